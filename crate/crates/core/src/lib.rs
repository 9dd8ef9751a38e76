//! Exact moments of the empirical correlation of two independent Gaussian
//! random walks, its continuous-time limit, and a coupled Monte Carlo
//! simulator for the distance between the two.
//!
//! The crate is organised bottom-up:
//!
//! * [`kernel`]: the bridge kernel `K_n`, its spectrum and `d_n(λ) = det(I − λK_n)`;
//! * [`mgf`]: joint and univariate moment generating functions;
//! * [`series`]: truncated power series used to differentiate the mgf;
//! * [`quadrature`]: one- and two-dimensional adaptive Gauss–Kronrod rules;
//! * [`moments`]: positive and negative moments by quadrature;
//! * [`montecarlo`]: the coupled path simulator;
//! * [`bounds`]: the constants of the `O(1/n)` Wasserstein bound;
//! * [`reference`]: published moment values for comparison.

pub mod bounds;
pub mod error;
pub mod kernel;
pub mod mgf;
pub mod moments;
pub mod montecarlo;
pub mod normal;
pub mod quadrature;
pub mod reference;
pub mod series;
pub mod sum;

pub use bounds::{
    check_dn_lower_bounds, compute_bounds, compute_c4, compute_c5, compute_cm, BoundConfig, BoundReport, C4Report,
};
pub use error::{Result, YuleError};
pub use kernel::{
    build_kernel_matrix, dn_explicit, dn_neg, dn_neg_prime, dn_oracle, eigen_spectrum, ln_dn_neg, BuildMode,
    KernelContext,
};
pub use mgf::{alpha_beta, phi_b, phi_bn, phi_n, AlphaBeta, MgfPoint};
pub use moments::{
    moment, negative_moment, second_moment_closed_form, Backend, MomentRequest, MomentResult, Spectrum, Target,
};
pub use montecarlo::{
    estimate_difference_variances, estimate_l1_distance, rate_experiment, sample_coupled, CoupledSample,
    SimConfig,
};
pub use series::{dphi_ds12_at_zero, log_d_series, TruncatedSeries};
