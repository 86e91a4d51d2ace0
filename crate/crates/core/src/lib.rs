//! Normalized solutions of the fractional Kirchhoff equation
//!
//!   (a + b ||(-Delta)^{s/2} u||_2^2) (-Delta)^s u
//!       = lambda u + mu |u|^{q-2} u + |u|^{p-2} u   in R^3,
//!   ||u||_2 = c,
//!
//! with a, b, c > 0, s in (0, 1), 2 < q < p < 6/(3 - 2s) and mu >= 0. The
//! library discretizes radial fields sine-spectrally on a truncated ball,
//! exposes the constrained energy / Pohozaev structure and the dilation
//! fiber analysis, computes the interpolation constants C(s, alpha) and the
//! explicit smallness thresholds, and solves for the three ground-state
//! objects: the mixed-regime local minimizer at negative level, the
//! mountain-pass state at positive level, and the mu = 0 ground state,
//! together with the mu -> 0+ asymptotic sweeps relating them.

pub mod error;
pub mod fiber;
pub mod gn;
pub mod grid;
pub mod harness;
pub mod io;
pub mod params;
pub mod solver;
pub mod spectral;
pub mod variational;

pub use error::{Error, Result};
pub use fiber::{
    classify_fiber, fiber_from_moments, h_roots, lemma28_condition, mu_thresholds,
    CriticalStructure, FiberProfile, ScalarQuartic,
};
pub use gn::{optimal_gn_constant, weinstein_quotient, GnResult};
pub use grid::{lp_norm, mass_norm_sq, Moments, RadialField, RadialGrid};
pub use harness::{load_config, run, RunConfig, RunMode};
pub use params::{critical_exponent, theta, ProblemParams, Regime};
pub use solver::{
    asymptotic_sweep, default_mu_ladder, solve_local_min, solve_mountain_pass, solve_mu_zero,
    GradientMetric, SolverOptions, SweepRow,
};
pub use spectral::{
    apply_fractional_laplacian, dilate, dilate_with_report, moments, rearrange_decreasing,
    riesz_seminorm_sq,
};
pub use variational::{
    classify_pohozaev, el_residual, energy, lambda_from_moments, multiplier_estimate, pohozaev,
    pohozaev_identity_residual, PohozaevClass, SolveReport,
};
