use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Parser;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use yule_core::YuleError;

use crate::args::{Cli, Command};
use crate::commands::{envelope, execute, Output, SCHEMA};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub yule_core: String,
    pub yule_cli: String,
    pub os: String,
    pub arch: String,
}

impl Versions {
    fn current() -> Self {
        Self {
            // the crates share the workspace version
            yule_core: env!("CARGO_PKG_VERSION").into(),
            yule_cli: env!("CARGO_PKG_VERSION").into(),
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub command: String,
    /// Arguments after the program name, as given.
    pub args: Vec<String>,
    pub config: Cli,
    pub versions: Versions,
    pub seed: Option<u64>,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<OutputRecord>,
    pub stdout_sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

/// The line printed on stdout for a JSON document.
pub fn render(json: &Value) -> Result<String> {
    Ok(serde_json::to_string(json)?)
}

/// Where the manifest goes, if anywhere.
pub fn manifest_path(cli: &Cli) -> Option<PathBuf> {
    if let Some(p) = &cli.manifest {
        return Some(p.clone());
    }
    cli.command.out_path().map(|out| {
        let mut name = out.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    })
}

pub fn write_manifest(
    path: &Path,
    cli: &Cli,
    args: &[String],
    started: String,
    output: &Output,
    stdout: &str,
) -> Result<()> {
    let outputs = output
        .files
        .iter()
        .map(|p| {
            Ok(OutputRecord {
                path: p.clone(),
                sha256: file_digest(p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = RunManifest {
        schema: SCHEMA.into(),
        command: cli.command.name().into(),
        args: args.to_vec(),
        config: cli.clone(),
        versions: Versions::current(),
        seed: cli.command.seed(),
        started,
        finished: now(),
        outputs,
        stdout_sha256: sha256_hex(stdout.as_bytes()),
    };
    std::fs::write(path, serde_json::to_string_pretty(&manifest)? + "\n")
        .with_context(|| format!("writing manifest {}", path.display()))
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339()
}

#[derive(Debug, Serialize)]
struct ReplayedOutput {
    path: PathBuf,
    recorded: String,
    replayed: String,
    identical: bool,
}

/// Re-runs the recorded arguments with outputs redirected to a scratch
/// directory and compares digests of every output and of stdout.
pub fn replay(manifest_path: &Path) -> Result<Output> {
    let text = std::fs::read_to_string(manifest_path)
        .with_context(|| format!("reading manifest {}", manifest_path.display()))?;
    let manifest: RunManifest = serde_json::from_str(&text).context("parsing manifest")?;
    let mut cli = Cli::try_parse_from(std::iter::once("yule".to_string()).chain(manifest.args.iter().cloned()))
        .context("re-parsing recorded arguments")?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(YuleError::Domain("a replay manifest cannot itself be replayed".into()).into());
    }
    let scratch = tempfile::tempdir()?;
    if let Some(out) = cli.command.out_path_mut() {
        let name = out.file_name().map(PathBuf::from).unwrap_or_else(|| "output".into());
        *out = scratch.path().join(name);
    }
    let output = execute(&cli)?;
    let stdout = render(&output.json)?;
    let mut rows = Vec::new();
    for (rec, new) in manifest.outputs.iter().zip(&output.files) {
        let replayed = file_digest(new)?;
        rows.push(ReplayedOutput {
            path: rec.path.clone(),
            identical: replayed == rec.sha256,
            recorded: rec.sha256.clone(),
            replayed,
        });
    }
    let stdout_identical = sha256_hex(stdout.as_bytes()) == manifest.stdout_sha256;
    let identical =
        stdout_identical && manifest.outputs.len() == output.files.len() && rows.iter().all(|r| r.identical);
    let json = envelope(
        "replay",
        &json!({
            "manifest": manifest_path,
            "replayed_command": manifest.command,
            "identical": identical,
            "stdout_identical": stdout_identical,
            "outputs": rows,
        }),
    )?;
    if !identical {
        println!("{}", render(&json)?);
        return Err(YuleError::Consistency("replayed outputs differ from the manifest".into()).into());
    }
    Ok(Output {
        json,
        files: Vec::new(),
    })
}
