use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Map, Value};
use yule_core::montecarlo::{monte_carlo, oracle, Estimate};
use yule_core::reference::{EVEN_MOMENTS_N50, SECOND_MOMENTS, SECOND_MOMENT_LIMIT};
use yule_core::*;

use crate::args::*;

pub const SCHEMA: &str = "yule/1";
pub const CACHE_ENV: &str = "YULE_CACHE_DIR";

/// Result of one subcommand: the JSON document printed on stdout and the
/// files that were written.
pub struct Output {
    pub json: Value,
    pub files: Vec<PathBuf>,
}

impl Output {
    fn stdout_only(json: Value) -> Self {
        Self { json, files: Vec::new() }
    }
}

/// Tags a payload with the schema and command name.
pub fn envelope<T: Serialize>(command: &str, payload: &T) -> Result<Value> {
    let mut map = Map::new();
    map.insert("schema".into(), json!(SCHEMA));
    map.insert("command".into(), json!(command));
    match serde_json::to_value(payload)? {
        Value::Object(fields) => map.extend(fields),
        other => {
            map.insert("result".into(), other);
        }
    }
    Ok(Value::Object(map))
}

fn context(n: usize, mode: KernelMode) -> Result<KernelContext> {
    let mode = BuildMode::from(mode);
    let ctx = match std::env::var_os(CACHE_ENV) {
        Some(dir) if !dir.is_empty() => {
            let dir = PathBuf::from(dir);
            std::fs::create_dir_all(&dir).with_context(|| format!("creating cache directory {}", dir.display()))?;
            KernelContext::load_or_build(&dir, n, mode)?
        }
        _ => KernelContext::with_mode(n, mode)?,
    };
    Ok(ctx)
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    csv::Writer::from_path(path).with_context(|| format!("opening {}", path.display()))
}

pub fn execute(cli: &Cli) -> Result<Output> {
    let mode = cli.kernel_mode;
    match &cli.command {
        Command::Moment(a) => moment_cmd(a, mode),
        Command::Table(a) => table_cmd(a, mode),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Rate(a) => rate_cmd(a),
        Command::Bounds(a) => bounds_cmd(a),
        Command::Charpoly(a) => charpoly_cmd(a, mode),
        Command::Mgf(a) => mgf_cmd(a, mode),
        Command::Replay(a) => crate::manifest::replay(&a.manifest_path),
    }
}

fn moment_cmd(a: &MomentArgs, mode: KernelMode) -> Result<Output> {
    let target = match a.n {
        Some(n) => Target::Discrete(n),
        None => Target::Continuous,
    };
    let req = MomentRequest::new(target, a.order)
        .with_rel_tol(a.rel_tol)
        .with_backend(a.backend.into());
    req.validate()?;
    let ctx = match target {
        Target::Discrete(n) => Some(context(n, mode)?),
        Target::Continuous => None,
    };
    let r = moment(&req, ctx.as_ref())?;
    Ok(Output::stdout_only(envelope("moment", &r)?))
}

#[derive(Serialize)]
struct TableRow {
    key: String,
    value: f64,
    abs_error: f64,
    reference_value: f64,
    abs_diff: f64,
}

fn table_cmd(a: &TableArgs, mode: KernelMode) -> Result<Output> {
    let mut rows = Vec::new();
    let key_name = match a.which {
        Which::Table1 => {
            for (n, reference) in SECOND_MOMENTS {
                let ctx = context(n, mode)?;
                let backend = if n > 200 { Backend::ClosedForm } else { Backend::SeriesSpectral };
                let req = MomentRequest::new(Target::Discrete(n), 2)
                    .with_rel_tol(a.rel_tol)
                    .with_backend(backend);
                let r = moment(&req, Some(&ctx))?;
                rows.push(row(n.to_string(), &r, reference));
            }
            let req = MomentRequest::new(Target::Continuous, 2).with_rel_tol(a.rel_tol);
            let r = moment(&req, None)?;
            rows.push(row("inf".into(), &r, SECOND_MOMENT_LIMIT));
            "n"
        }
        Which::Table2 => {
            let ctx = context(50, mode)?;
            for (k, reference) in EVEN_MOMENTS_N50 {
                let req = MomentRequest::new(Target::Discrete(50), k).with_rel_tol(a.rel_tol);
                let r = moment(&req, Some(&ctx))?;
                rows.push(row(k.to_string(), &r, reference));
            }
            "k"
        }
    };
    let mut w = csv_writer(&a.out)?;
    w.write_record([key_name, "value", "abs_error", "reference_value", "abs_diff"])?;
    for r in &rows {
        w.write_record([r.key.clone(), float(r.value), float(r.abs_error), float(r.reference_value), float(r.abs_diff)])?;
    }
    w.flush()?;
    let max_abs_diff = rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max);
    let json = envelope(
        "table",
        &json!({ "which": a.which, "key": key_name, "rows": rows, "max_abs_diff": max_abs_diff }),
    )?;
    Ok(Output {
        json,
        files: vec![a.out.clone()],
    })
}

fn row(key: String, r: &MomentResult, reference: f64) -> TableRow {
    TableRow {
        key,
        value: r.value,
        abs_error: r.abs_error_estimate,
        reference_value: reference,
        abs_diff: (r.value - reference).abs(),
    }
}

#[derive(Serialize)]
struct Checked {
    estimate: Estimate,
    exact: f64,
}

fn simulate_cmd(a: &SimulateArgs) -> Result<Output> {
    let cfg = SimConfig {
        antithetic: a.antithetic,
        ..SimConfig::new(a.n, a.fine_factor, a.replicates, a.seed)
    };
    let out = monte_carlo(&cfg, |s| {
        [
            (s.theta_n - s.theta_hat).abs(),
            (s.a_n - s.a_hat).powi(2),
            (s.b_n - s.b_hat).powi(2),
            (s.c_n - s.c_hat).powi(2),
            s.a_n * s.a_n,
            s.b_n,
            s.theta_n * s.theta_n,
        ]
    })?;
    let [l1, var_a, var_b, var_c, a2, b_mean, theta2] = out.estimates;
    let mut files = Vec::new();
    if let Some(path) = &a.out {
        let mut w = csv_writer(path)?;
        w.write_record(["replicate", "A_n", "B_n", "C_n", "A", "B", "C", "theta_n", "theta"])?;
        let mut failure = None;
        montecarlo::for_each_sample(&cfg, |r, s| {
            if failure.is_some() {
                return;
            }
            let rec = [
                r.to_string(),
                float(s.a_n),
                float(s.b_n),
                float(s.c_n),
                float(s.a_hat),
                float(s.b_hat),
                float(s.c_hat),
                float(s.theta_n),
                float(s.theta_hat),
            ];
            if let Err(e) = w.write_record(&rec) {
                failure = Some(e);
            }
        })?;
        if let Some(e) = failure {
            return Err(e.into());
        }
        w.flush()?;
        files.push(path.clone());
    }
    let json = envelope(
        "simulate",
        &json!({
            "config": cfg,
            "replicates": out.replicates,
            "redraws": out.redraws,
            "l1_distance": l1,
            "theta_n_squared": theta2,
            "a_n_squared": Checked { estimate: a2, exact: oracle::second_moment_a_n(a.n) },
            "b_n_mean": Checked { estimate: b_mean, exact: oracle::mean_b_n(a.n) },
            "diff_a": Checked { estimate: var_a, exact: oracle::diff_a(a.n) },
            "diff_b": Checked { estimate: var_b, exact: oracle::diff_b(a.n) },
            "diff_c": Checked { estimate: var_c, exact: oracle::diff_b(a.n) },
        }),
    )?;
    Ok(Output { json, files })
}

fn rate_cmd(a: &RateArgs) -> Result<Output> {
    let r = rate_experiment(&a.n_list, a.fine_factor, a.replicates, a.seed)?;
    let mut files = Vec::new();
    if let Some(path) = &a.out {
        let mut w = csv_writer(path)?;
        w.write_record(["n", "fine_factor", "mean", "stderr"])?;
        for p in &r.points {
            w.write_record([p.n.to_string(), p.fine_factor.to_string(), float(p.l1.mean), float(p.l1.stderr)])?;
        }
        w.flush()?;
        files.push(path.clone());
    }
    let json = envelope("rate", &json!({ "replicates": a.replicates, "seed": a.seed, "report": r }))?;
    Ok(Output { json, files })
}

fn bounds_cmd(a: &BoundsArgs) -> Result<Output> {
    let cfg = BoundConfig {
        n_scan_max: a.scan_max,
        rel_tol: a.rel_tol,
        ..BoundConfig::default()
    };
    let report = compute_bounds(&cfg)?;
    let json = envelope("bounds", &report)?;
    let mut files = Vec::new();
    if let Some(path) = &a.out {
        std::fs::write(path, serde_json::to_string_pretty(&json)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        files.push(path.clone());
    }
    Ok(Output { json, files })
}

fn charpoly_cmd(a: &CharpolyArgs, mode: KernelMode) -> Result<Output> {
    let ctx = context(a.n, mode)?;
    let value = ctx.dn(a.lambda)?;
    let json = envelope(
        "charpoly",
        &json!({ "n": a.n, "lambda": a.lambda, "kernel_mode": ctx.build_mode(), "value": value }),
    )?;
    Ok(Output::stdout_only(json))
}

fn mgf_cmd(a: &MgfArgs, mode: KernelMode) -> Result<Output> {
    let ctx = context(a.n, mode)?;
    let p = MgfPoint::new(a.s11, a.s12, a.s22)?;
    let value = phi_n(&ctx, &p)?;
    let ab = alpha_beta(&p)?;
    let json = envelope(
        "mgf",
        &json!({ "n": a.n, "point": p, "alpha": ab.alpha, "beta": ab.beta, "value": value }),
    )?;
    Ok(Output::stdout_only(json))
}
