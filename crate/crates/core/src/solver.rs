//! Constrained solvers for the three solution objects: the mixed-regime
//! interior local minimizer (negative level), the mountain-pass state
//! (positive level), and the mu = 0 ground state, plus the mu -> 0+ sweep.
//!
//! Both solves are projected descents on the mass sphere, each minimizing a
//! dilation-reduced functional. The local minimizer descends
//! u -> E(s_u * u), dilating every iterate to its fiber minimum: below both
//! thresholds every mass-c field has the two-critical-point fiber shape, the
//! s_u-projected iterate lies on the P^+ branch inside the seminorm ball of
//! radius R0, and the reduced infimum is exactly m(c, mu). The mountain-pass
//! state descends u -> E(t_u * u) through the fiber maximum in the same way.
//! Projecting every iterate (rather than free descent with a basin guard)
//! lets one dilation absorb the enormous scale migrations the mu ladder
//! produces, keeping iteration counts flat across rungs.
//!
//! The descent direction is the Euler-Lagrange gradient with the L^2-optimal
//! multiplier (hence tangent to the sphere), passed through the sine-space
//! metric ((a + bA) rho^{2s} + |lambda|)^{-1}. That metric approximates the
//! inverse of the linearized operator, which keeps the iteration count
//! mesh-independent across the extreme scale range these problems produce;
//! the raw L^2 metric is kept as an option.
//!
//! Grids are uniform with a per-solve truncation radius. The states of this
//! problem concentrate (or spread) by many orders of magnitude as mu moves,
//! so each solve estimates its own length scale from closed-form Gaussian
//! moments, picks a power-of-two radius around it, and re-solves on an
//! adjusted grid when the converged state reports poor tail coverage or
//! resolution.

use crate::error::{Error, Result};
use crate::fiber::{classify_fiber, fiber_from_moments, h_roots, mu_thresholds};
use crate::grid::{mass_norm_sq, Moments, RadialField, RadialGrid};
use crate::params::{ProblemParams, Regime};
use crate::spectral::{dilate, hs_distance_rel, moments, sine_coefficients, sine_multiplier};
use crate::variational::{
    classify_pohozaev, el_gradient, elliptic_scale, energy, multiplier_estimate, pohozaev,
    pohozaev_identity_residual, SolveReport, TOL_EL, TOL_POHOZAEV,
};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;
use std::sync::Arc;

/// Descent direction metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum GradientMetric {
    /// Plain L^2 gradient. Simple, but the step size is throttled by the
    /// stiffest sine mode; impractical at production grids.
    Plain,
    /// Sine-diagonal inverse ((a + bA) rho^{2s} + |lambda|)^{-1}.
    #[default]
    SpectralShift,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Euler-Lagrange residual accepted as converged (reported bound).
    pub tol_el: f64,
    /// |P_mu| relative to aA + bA^2 accepted as converged (reported bound).
    pub tol_p: f64,
    /// Stopping tolerance on max(el_residual, |P| / (aA + bA^2)).
    pub stop_tol: f64,
    pub max_iter: usize,
    pub metric: GradientMetric,
    /// Pick the truncation radius from the problem scale (power-of-two
    /// quantized) instead of using `grid_r_max` directly.
    pub auto_domain: bool,
    pub grid_r_max: f64,
    pub grid_n: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol_el: TOL_EL,
            tol_p: TOL_POHOZAEV,
            stop_tol: 1e-6,
            max_iter: 20_000,
            metric: GradientMetric::SpectralShift,
            auto_domain: true,
            grid_r_max: 20.0,
            grid_n: 4096,
        }
    }
}

const ARMIJO_FACTOR: f64 = 0.5;
const ARMIJO_CONSTANT: f64 = 1e-4;
const ETA_INIT: f64 = 1e-2;
const ETA_MAX: f64 = 1e2;
const MAX_BACKTRACKS: usize = 60;
const MAX_REGRIDS: usize = 5;
const TAIL_FACTOR: f64 = 128.0;
const TAIL_MASS_TOL: f64 = 1e-8;

/// Closed-form moments of k e^{-r^2/(2w^2)} carrying mass ||u||_2 = mass.
pub fn gaussian_moments(params: &ProblemParams, width: f64, mass: f64) -> Moments {
    let s = params.s;
    let g_s = 2.0 * PI * gamma(s + 1.5) / PI.powf(1.5);
    let l_alpha = |alpha: f64| {
        mass.powf(alpha)
            * PI.powf(-0.75 * alpha)
            * (2.0 * PI / alpha).powf(1.5)
            * width.powf(3.0 - 1.5 * alpha)
    };
    Moments {
        seminorm_sq: mass * mass * g_s * width.powf(-2.0 * s),
        mass_sq: mass * mass,
        lq: l_alpha(params.q),
        lp: l_alpha(params.p),
    }
}

fn gaussian_with_mass(grid: Arc<RadialGrid>, width: f64, mass: f64) -> RadialField {
    let amplitude = mass / (width.powf(1.5) * PI.powf(0.75));
    RadialField::gaussian(grid, width, amplitude)
}

/// Largest truncation radius the auto-domain logic will request; states
/// needing more report unconverged with diagnostics instead.
const R_MAX_CAP: f64 = 16_777_216.0;

/// Power-of-two truncation radius covering `tail_factor` times the width.
fn quantized_radius(width: f64, tail_factor: f64) -> f64 {
    2f64.powi((width * tail_factor).log2().ceil() as i32).min(R_MAX_CAP)
}

fn make_grid(r_max: f64, n: usize) -> Result<Arc<RadialGrid>> {
    Ok(Arc::new(RadialGrid::new(r_max, n)?))
}

/// Cubic resampling of a field onto another grid (zero beyond the source).
pub fn resample(u: &RadialField, grid: Arc<RadialGrid>) -> RadialField {
    let values = grid.nodes().map(|r| u.interpolate(r)).collect();
    RadialField::new(grid, values).expect("resampled values are finite")
}

fn renormalize_mass(u: &RadialField, c: f64) -> RadialField {
    let m = mass_norm_sq(u);
    u.scale(c / m.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ProjectionRule {
    /// Dilate every iterate to its fiber minimum (the P^+ branch).
    FiberMin,
    /// Dilate every iterate to its fiber maximum (the P^- branch).
    FiberMax,
}

struct DescentOutcome {
    field: RadialField,
    iterations: usize,
    converged: bool,
    el_residual: f64,
    pohozaev_rel: f64,
    trace: Vec<(f64, f64)>,
}

struct Workspace<'a> {
    params: &'a ProblemParams,
    opts: &'a SolverOptions,
    regime: Regime,
}

impl<'a> Workspace<'a> {
    fn project_to_fiber(&self, u: &RadialField, pick_max: bool) -> Result<RadialField> {
        let m = moments(u, self.params.s, self.params.q, self.params.p)?;
        let profile = fiber_from_moments(self.params, &m);
        let structure = classify_fiber(&profile, self.regime, self.params.s)?;
        let tau = if pick_max {
            structure.maximizer().ok_or_else(|| {
                Error::BracketNotFound("profile has no fiber maximum to project onto".into())
            })?
        } else {
            structure.minimizer().ok_or_else(|| {
                Error::BracketNotFound("profile has no fiber minimum to project onto".into())
            })?
        };
        let v = dilate(u, tau)?;
        Ok(renormalize_mass(&v, self.params.c))
    }

    /// Reduced energy of a candidate seed (fiber projection included);
    /// infinity when the candidate cannot be projected.
    fn seed_score(&self, candidate: &RadialField, pick_max: bool) -> f64 {
        let mass = mass_norm_sq(candidate);
        if !(mass > 1e-12 * self.params.c * self.params.c) {
            return f64::INFINITY;
        }
        let normalized = renormalize_mass(candidate, self.params.c);
        match self.project_to_fiber(&normalized, pick_max) {
            Ok(v) => match moments(&v, self.params.s, self.params.q, self.params.p) {
                Ok(m) => energy(self.params, &m),
                Err(_) => f64::INFINITY,
            },
            Err(_) => f64::INFINITY,
        }
    }

    fn direction(&self, g: &RadialField, m: &Moments, lambda: f64) -> RadialField {
        match self.opts.metric {
            GradientMetric::Plain => g.clone(),
            GradientMetric::SpectralShift => {
                let coeff = self.params.a + self.params.b * m.seminorm_sq;
                let shift = (-lambda).max(1e-8 * coeff);
                sine_multiplier(g, |rho| 1.0 / (coeff * rho.powf(2.0 * self.params.s) + shift))
            }
        }
    }

    fn descend(&self, seed: RadialField, rule: ProjectionRule) -> Result<DescentOutcome> {
        let params = self.params;
        let pick_max = rule == ProjectionRule::FiberMax;
        let mut u = self.project_to_fiber(&renormalize_mass(&seed, params.c), pick_max)?;
        let m0 = moments(&u, params.s, params.q, params.p)?;
        let mut e_current = energy(params, &m0);
        let mut trace = vec![(e_current, f64::NAN)];
        let mut eta = ETA_INIT;
        let mut stalls = 0usize;

        for it in 0..self.opts.max_iter {
            let m = moments(&u, params.s, params.q, params.p)?;
            let lambda = multiplier_estimate(params, &m)?;
            let (g, _) = el_gradient(params, &u, lambda)?;
            let mut d = self.direction(&g, &m, lambda);
            let du = d.inner(&u) / m.mass_sq;
            d = d.axpy(-du, &u);
            let slope = g.inner(&d);

            let mut accepted = false;
            for _ in 0..MAX_BACKTRACKS {
                let trial = renormalize_mass(&u.axpy(-eta, &d), params.c);
                let projected = match self.project_to_fiber(&trial, pick_max) {
                    Ok(v) => v,
                    Err(_) => {
                        eta *= ARMIJO_FACTOR;
                        continue;
                    }
                };
                let m_trial = moments(&projected, params.s, params.q, params.p)?;
                let e_trial = energy(params, &m_trial);
                if e_trial <= e_current - ARMIJO_CONSTANT * eta * slope {
                    u = projected;
                    e_current = e_trial;
                    eta = (eta * 2.0).min(ETA_MAX);
                    accepted = true;
                    break;
                }
                eta *= ARMIJO_FACTOR;
            }
            let m_now = moments(&u, params.s, params.q, params.p)?;
            let lambda_now = multiplier_estimate(params, &m_now)?;
            let el = crate::variational::el_residual(params, &u, lambda_now)?;
            let p_rel = pohozaev(params, &m_now).abs() / elliptic_scale(params, &m_now);
            trace.push((e_current, el));
            if el.max(p_rel) < self.opts.stop_tol {
                return Ok(DescentOutcome {
                    field: u,
                    iterations: it + 1,
                    converged: true,
                    el_residual: el,
                    pohozaev_rel: p_rel,
                    trace,
                });
            }
            if accepted {
                stalls = 0;
            } else {
                stalls += 1;
                eta = ETA_INIT;
                if stalls >= 8 {
                    return Ok(DescentOutcome {
                        field: u,
                        iterations: it + 1,
                        converged: false,
                        el_residual: el,
                        pohozaev_rel: p_rel,
                        trace,
                    });
                }
            }
        }
        let m_now = moments(&u, params.s, params.q, params.p)?;
        let lambda_now = multiplier_estimate(params, &m_now)?;
        let el = crate::variational::el_residual(params, &u, lambda_now)?;
        let p_rel = pohozaev(params, &m_now).abs() / elliptic_scale(params, &m_now);
        Ok(DescentOutcome {
            field: u,
            iterations: self.opts.max_iter,
            converged: false,
            el_residual: el,
            pohozaev_rel: p_rel,
            trace,
        })
    }
}

/// Post-solve grid diagnostics: how far out the state carries mass and how
/// many nodes resolve its half-mass radius.
#[derive(Debug, Clone, Copy)]
struct GridDiagnostics {
    half_mass_radius: f64,
    tail_fraction: f64,
}

fn grid_diagnostics(u: &RadialField) -> GridDiagnostics {
    let grid = u.grid();
    let dr = grid.spacing();
    let total = mass_norm_sq(u);
    if total <= 0.0 {
        return GridDiagnostics {
            half_mass_radius: grid.r_max(),
            tail_fraction: 0.0,
        };
    }
    let mut acc = 0.0;
    let mut half_radius = grid.r_max();
    let mut tail = 0.0;
    let boundary = 0.8 * grid.r_max();
    let mut seen_half = false;
    for (i, v) in u.values().iter().enumerate() {
        let r = (i + 1) as f64 * dr;
        let contribution = 4.0 * PI * r * r * v * v * dr;
        acc += contribution;
        if !seen_half && acc >= 0.5 * total {
            half_radius = r;
            seen_half = true;
        }
        if r > boundary {
            tail += contribution;
        }
    }
    GridDiagnostics {
        half_mass_radius: half_radius,
        tail_fraction: tail / total,
    }
}

enum GridVerdict {
    Keep,
    Grow,
    Shrink,
}

fn judge_grid(u: &RadialField, diag: GridDiagnostics) -> GridVerdict {
    let grid = u.grid();
    if diag.tail_fraction > TAIL_MASS_TOL || diag.half_mass_radius > grid.r_max() / 10.0 {
        return GridVerdict::Grow;
    }
    if diag.half_mass_radius < 16.0 * grid.spacing() {
        return GridVerdict::Shrink;
    }
    GridVerdict::Keep
}

fn build_report(
    params: &ProblemParams,
    opts: &SolverOptions,
    outcome: DescentOutcome,
) -> Result<SolveReport> {
    let u = outcome.field;
    let m = moments(&u, params.s, params.q, params.p)?;
    let lambda = multiplier_estimate(params, &m)?;
    let identity = pohozaev_identity_residual(params, &u, lambda)?;
    let classification = classify_pohozaev(params, &m, opts.tol_p);
    // convergence is judged by the reported tolerances; the tighter internal
    // stop can stall on the energy's floating-point resolution first
    let converged = outcome.el_residual <= opts.tol_el && outcome.pohozaev_rel <= opts.tol_p;
    Ok(SolveReport {
        lambda,
        level: energy(params, &m),
        el_residual: outcome.el_residual,
        pohozaev_residual: outcome.pohozaev_rel,
        identity_residual: identity,
        classification,
        iterations: outcome.iterations,
        converged,
        tol_el: opts.tol_el,
        tol_p: opts.tol_p,
        seminorm: m.seminorm_sq.sqrt(),
        mass: m.mass_sq.sqrt(),
        grid_r_max: u.grid().r_max(),
        grid_n: u.grid().n(),
        trace: outcome.trace,
        field: Some(u),
    })
}

/// Estimated half-width of the fiber-maximum state reachable from a Gaussian.
fn fiber_scale_estimate(params: &ProblemParams, regime: Regime) -> Result<f64> {
    let m = gaussian_moments(params, 1.0, params.c);
    let profile = fiber_from_moments(params, &m);
    let structure = classify_fiber(&profile, regime, params.s)?;
    let t_u = structure
        .maximizer()
        .ok_or_else(|| Error::BracketNotFound("seed profile has no fiber maximum".into()))?;
    Ok((-t_u).exp())
}

fn solve_on_adaptive_grids<SeedF, SolveF>(
    opts: &SolverOptions,
    initial_width: f64,
    mut seed_for: SeedF,
    mut solve_on: SolveF,
) -> Result<DescentOutcome>
where
    SeedF: FnMut(Arc<RadialGrid>) -> Result<RadialField>,
    SolveF: FnMut(RadialField) -> Result<DescentOutcome>,
{
    let mut r_max = if opts.auto_domain {
        quantized_radius(initial_width, TAIL_FACTOR)
    } else {
        opts.grid_r_max
    };
    let mut warm: Option<RadialField> = None;
    let mut outcome: Option<DescentOutcome> = None;
    let mut visited = vec![r_max];
    for round in 0..=MAX_REGRIDS {
        let grid = make_grid(r_max, opts.grid_n)?;
        let seed = match &warm {
            Some(prev) => resample(prev, grid.clone()),
            None => seed_for(grid.clone())?,
        };
        let result = solve_on(seed)?;
        let diag = grid_diagnostics(&result.field);
        if std::env::var_os("FRAKIR_TRACE").is_some() {
            eprintln!(
                "trace: grid r_max={r_max} iters={} conv={} el={:.2e} prel={:.2e} w50={:.3e} tail={:.1e}",
                result.iterations, result.converged, result.el_residual, result.pohozaev_rel,
                diag.half_mass_radius, diag.tail_fraction
            );
        }
        let verdict = if opts.auto_domain && round < MAX_REGRIDS {
            judge_grid(&result.field, diag)
        } else {
            GridVerdict::Keep
        };
        let target = match verdict {
            GridVerdict::Keep => return Ok(result),
            GridVerdict::Grow => (r_max * 4.0).min(R_MAX_CAP),
            GridVerdict::Shrink => r_max / 4.0,
        };
        // a grid revisit means the two criteria straddle the quantization:
        // keep the current (larger-domain-safe) result instead of cycling
        if visited.contains(&target) {
            return Ok(result);
        }
        visited.push(target);
        r_max = target;
        warm = Some(result.field.clone());
        outcome = Some(result);
    }
    outcome.ok_or_else(|| Error::NonConvergence {
        iterations: 0,
        residual: f64::NAN,
    })
}

/// The interior local minimizer of the mixed regime: level m(c, mu) < 0,
/// multiplier < 0, class P^+, seminorm below R0.
///
/// Needs 0 < mu < min(mu_1, mu_2); the iteration cap produces a report with
/// `converged = false` rather than an error, so the diagnostics survive.
pub fn solve_local_min(
    params: &ProblemParams,
    c_q: f64,
    c_p: f64,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    params.validate()?;
    if params.regime() != Regime::Mixed {
        return Err(Error::Regime(
            "the local minimizer exists in the mixed regime (q < 2 + 4s/3 < 2 + 8s/3 < p)".into(),
        ));
    }
    let (mu1, mu2) = mu_thresholds(params, c_q, c_p)?;
    let mu_max = mu1.min(mu2);
    if !(params.mu > 0.0 && params.mu < mu_max) {
        return Err(Error::Regime(format!(
            "local minimizer needs 0 < mu < min(mu_1, mu_2) = {mu_max:.6e}, got mu = {:.6e}",
            params.mu
        )));
    }
    let (r0, _r1) = h_roots(params, c_q, c_p)?;
    let width = local_seed_width(params, r0);
    let workspace = Workspace {
        params,
        opts,
        regime: Regime::Mixed,
    };
    let outcome = solve_on_adaptive_grids(
        opts,
        width,
        |grid| Ok(gaussian_with_mass(grid, width, params.c)),
        |seed| workspace.descend(seed, ProjectionRule::FiberMin),
    )?;
    build_report(params, opts, outcome)
}

/// Gaussian width whose closed-form seminorm is half of R0.
fn local_seed_width(params: &ProblemParams, r0: f64) -> f64 {
    let g_s = 2.0 * PI * gamma(params.s + 1.5) / PI.powf(1.5);
    (params.c * params.c * g_s / (0.25 * r0 * r0)).powf(1.0 / (2.0 * params.s))
}

/// The mountain-pass state: minimizes the reduced functional E(t_u * u) on
/// the mass sphere. Mixed regime (mu below both thresholds when they are
/// supplied) or supercritical regime with any mu > 0.
pub fn solve_mountain_pass(
    params: &ProblemParams,
    gn_constants: Option<(f64, f64)>,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    params.validate()?;
    let regime = params.regime();
    match regime {
        Regime::Mixed => {
            if !(params.mu > 0.0) {
                return Err(Error::Regime("the mountain-pass solve needs mu > 0".into()));
            }
            if let Some((c_q, c_p)) = gn_constants {
                let (mu1, mu2) = mu_thresholds(params, c_q, c_p)?;
                if params.mu >= mu1.min(mu2) {
                    return Err(Error::Regime(format!(
                        "mixed-regime mountain pass needs mu < min(mu_1, mu_2) = {:.6e}",
                        mu1.min(mu2)
                    )));
                }
            }
        }
        Regime::Supercritical => {
            if !(params.mu > 0.0) {
                return Err(Error::Regime("the mountain-pass solve needs mu > 0".into()));
            }
        }
        Regime::Unsupported => {
            return Err(Error::Regime(
                "mountain-pass geometry needs the mixed or supercritical regime".into(),
            ))
        }
    }
    solve_fiber_max_state(params, regime, opts)
}

/// The unique ground state of the mu = 0 problem (needs p > 2 + 8s/3);
/// its level m(c, 0) is positive and its class is P^-.
pub fn solve_mu_zero(params: &ProblemParams, opts: &SolverOptions) -> Result<SolveReport> {
    let zeroed = params.with_mu(0.0);
    zeroed.validate()?;
    if !(zeroed.p > 2.0 + 8.0 * zeroed.s / 3.0) {
        return Err(Error::Regime(format!(
            "the mu = 0 ground state needs p > 2 + 8s/3 = {:.6}, got p = {}",
            2.0 + 8.0 * zeroed.s / 3.0,
            zeroed.p
        )));
    }
    let regime = zeroed.regime();
    if regime == Regime::Unsupported {
        return Err(Error::Regime(
            "the mu = 0 solve needs the mixed or supercritical exponent layout".into(),
        ));
    }
    solve_fiber_max_state(&zeroed, regime, opts)
}

fn solve_fiber_max_state(
    params: &ProblemParams,
    regime: Regime,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    let width = fiber_scale_estimate(params, regime)?;
    let workspace = Workspace {
        params,
        opts,
        regime,
    };
    let outcome = solve_on_adaptive_grids(
        opts,
        width,
        |grid| Ok(gaussian_with_mass(grid, width, params.c)),
        |seed| workspace.descend(seed, ProjectionRule::FiberMax),
    )?;
    build_report(params, opts, outcome)
}

/// Mountain-pass solve warm-started from a previous field (used by sweeps).
fn solve_fiber_max_warm(
    params: &ProblemParams,
    regime: Regime,
    opts: &SolverOptions,
    warm: &RadialField,
) -> Result<SolveReport> {
    let workspace = Workspace {
        params,
        opts,
        regime,
    };
    let diag = grid_diagnostics(warm);
    let width = diag.half_mass_radius;
    let outcome = solve_on_adaptive_grids(
        opts,
        width,
        |grid| {
            Ok(better_seed(
                &workspace,
                resample(warm, grid.clone()),
                gaussian_with_mass(grid, width, params.c),
                true,
            ))
        },
        |seed| workspace.descend(seed, ProjectionRule::FiberMax),
    )?;
    build_report(params, opts, outcome)
}

/// Lower reduced energy wins; a carried field that no longer fits its grid
/// scores infinity and loses to the fresh Gaussian.
fn better_seed(
    workspace: &Workspace,
    carried: RadialField,
    fresh: RadialField,
    pick_max: bool,
) -> RadialField {
    if workspace.seed_score(&carried, pick_max) <= workspace.seed_score(&fresh, pick_max) {
        carried
    } else {
        fresh
    }
}

fn solve_local_min_warm(
    params: &ProblemParams,
    c_q: f64,
    c_p: f64,
    opts: &SolverOptions,
    warm: &RadialField,
) -> Result<SolveReport> {
    let (r0, _) = h_roots(params, c_q, c_p)?;
    // the local branch migrates scale fast along the ladder: size the domain
    // from the new mu's envelope, then carry the previous shape onto it
    let width = local_seed_width(params, r0);
    let workspace = Workspace {
        params,
        opts,
        regime: Regime::Mixed,
    };
    let outcome = solve_on_adaptive_grids(
        opts,
        width,
        |grid| {
            Ok(better_seed(
                &workspace,
                resample(warm, grid.clone()),
                gaussian_with_mass(grid, width, params.c),
                false,
            ))
        },
        |seed| workspace.descend(seed, ProjectionRule::FiberMin),
    )?;
    build_report(params, opts, outcome)
}

/// One row of the mu -> 0+ sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub mu: f64,
    /// m(c, mu), mixed regime only.
    pub m_level: Option<f64>,
    pub sigma_level: f64,
    /// ||(-Delta)^{s/2} u~_mu||_2, mixed regime only.
    pub seminorm_local: Option<f64>,
    pub lambda_local: Option<f64>,
    pub lambda_mp: f64,
    /// Relative H^s distance of the mountain-pass state to the mu = 0 state.
    pub h_distance: f64,
    pub converged: bool,
}

/// Everything the sweep produces beyond the rows.
#[derive(Debug)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// mu = 0 report on its own grid.
    pub mu_zero: SolveReport,
    /// m(c, 0) recomputed on the final rung's grid for bias-free comparison.
    pub m_zero_final_grid: f64,
    /// Reports of the final rung (kept for artifact output).
    pub final_mp: Option<SolveReport>,
    pub final_local: Option<SolveReport>,
    pub failed_rows: usize,
}

/// Runs the mu ladder (strictly decreasing), warm-starting each rung from
/// the previous one, and measures every mountain-pass state against the
/// mu = 0 ground state. Per-row failures are recorded and the sweep moves on
/// with fresh seeds.
pub fn asymptotic_sweep(
    params: &ProblemParams,
    mu_ladder: &[f64],
    gn_constants: Option<(f64, f64)>,
    opts: &SolverOptions,
) -> Result<SweepOutcome> {
    if mu_ladder.is_empty() {
        return Err(Error::invalid("mu_ladder", "must contain at least one entry"));
    }
    if mu_ladder.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::invalid("mu_ladder", "entries must be strictly decreasing"));
    }
    if mu_ladder.iter().any(|&mu| !(mu > 0.0)) {
        return Err(Error::invalid("mu_ladder", "entries must be positive"));
    }
    let regime = params.regime();
    if regime == Regime::Unsupported {
        return Err(Error::Regime(
            "sweeps need the mixed or supercritical regime".into(),
        ));
    }
    let mixed = regime == Regime::Mixed;
    if mixed && gn_constants.is_none() {
        return Err(Error::invalid(
            "gn_constants",
            "the mixed-regime sweep needs C(s, q) and C(s, p) for its thresholds",
        ));
    }

    let mu_zero = solve_mu_zero(params, opts)?;
    let u_zero = mu_zero
        .field
        .clone()
        .ok_or_else(|| Error::invalid("mu_zero", "mu = 0 report carries no field"))?;

    let mut rows = Vec::with_capacity(mu_ladder.len());
    let mut warm_mp: Option<RadialField> = None;
    let mut warm_local: Option<RadialField> = None;
    let mut final_mp: Option<SolveReport> = None;
    let mut final_local: Option<SolveReport> = None;
    let mut failed = 0usize;

    for &mu in mu_ladder {
        if std::env::var_os("FRAKIR_TRACE").is_some() {
            eprintln!("trace: --- rung mu={mu:.6e} ---");
        }
        let p_mu = params.with_mu(mu);
        let mp = match &warm_mp {
            Some(w) => solve_fiber_max_warm(&p_mu, regime, opts, w),
            None => solve_mountain_pass(&p_mu, gn_constants, opts),
        };
        let local = if mixed {
            let (c_q, c_p) = gn_constants.expect("checked above");
            Some(match &warm_local {
                Some(w) => solve_local_min_warm(&p_mu, c_q, c_p, opts, w),
                None => solve_local_min(&p_mu, c_q, c_p, opts),
            })
        } else {
            None
        };

        match mp {
            Ok(mp_report) => {
                let u_mp = mp_report.field.clone().expect("solver reports carry fields");
                let u_zero_here = if u_zero.same_grid(&u_mp) {
                    u_zero.clone()
                } else {
                    renormalize_mass(&resample(&u_zero, u_mp.grid().clone()), params.c)
                };
                let h_distance = hs_distance_rel(&u_mp, &u_zero_here, params.s)?;
                let (m_level, seminorm_local, lambda_local, local_ok) = match &local {
                    Some(Ok(rep)) => (
                        Some(rep.level),
                        Some(rep.seminorm),
                        Some(rep.lambda),
                        rep.converged,
                    ),
                    Some(Err(e)) => {
                        if std::env::var_os("FRAKIR_TRACE").is_some() {
                            eprintln!("trace: rung mu={mu:.6e} local-min error: {e}");
                        }
                        (None, None, None, false)
                    }
                    None => (None, None, None, true),
                };
                rows.push(SweepRow {
                    mu,
                    m_level,
                    sigma_level: mp_report.level,
                    seminorm_local,
                    lambda_local,
                    lambda_mp: mp_report.lambda,
                    h_distance,
                    converged: mp_report.converged && local_ok,
                });
                if !(mp_report.converged && local_ok) {
                    failed += 1;
                }
                warm_mp = if mp_report.converged {
                    mp_report.field.clone()
                } else {
                    None
                };
                final_mp = Some(mp_report);
                if let Some(Ok(rep)) = local {
                    warm_local = if rep.converged { rep.field.clone() } else { None };
                    final_local = Some(rep);
                } else {
                    warm_local = None;
                }
            }
            Err(e) => {
                if std::env::var_os("FRAKIR_TRACE").is_some() {
                    eprintln!("trace: rung mu={mu:.6e} mountain-pass error: {e}");
                }
                failed += 1;
                warm_mp = None;
                warm_local = None;
                rows.push(SweepRow {
                    mu,
                    m_level: None,
                    sigma_level: f64::NAN,
                    seminorm_local: None,
                    lambda_local: None,
                    lambda_mp: f64::NAN,
                    h_distance: f64::NAN,
                    converged: false,
                });
            }
        }
    }

    // recompute m(c, 0) on the final rung's grid so the sigma <= m(c, 0)
    // comparison is free of cross-grid quadrature bias
    let m_zero_final_grid = match &final_mp {
        Some(rep) if rep.field.is_some() => {
            let grid = rep.field.as_ref().unwrap().grid().clone();
            let zeroed = params.with_mu(0.0);
            let workspace = Workspace {
                params: &zeroed,
                opts,
                regime,
            };
            let seed = renormalize_mass(&resample(&u_zero, grid), params.c);
            let outcome = workspace.descend(seed, ProjectionRule::FiberMax)?;
            let m = moments(&outcome.field, zeroed.s, zeroed.q, zeroed.p)?;
            energy(&zeroed, &m)
        }
        _ => mu_zero.level,
    };

    Ok(SweepOutcome {
        rows,
        mu_zero,
        m_zero_final_grid,
        final_mp,
        final_local,
        failed_rows: failed,
    })
}

/// Default geometric ladder: 12 rungs, factor 1/2, from min(mu_1, mu_2)/4.
pub fn default_mu_ladder(params: &ProblemParams, c_q: f64, c_p: f64) -> Result<Vec<f64>> {
    let (mu1, mu2) = mu_thresholds(params, c_q, c_p)?;
    let start = mu1.min(mu2) / 4.0;
    Ok((0..12).map(|k| start * 0.5f64.powi(k)).collect())
}

/// Spectral-tail fraction of a field: energy share of the top eighth of the
/// sine spectrum. A resolution diagnostic used by `verify`.
pub fn spectral_tail_fraction(u: &RadialField) -> f64 {
    let coeffs = sine_coefficients(u);
    let n = coeffs.len();
    let total: f64 = coeffs.iter().map(|c| c * c).sum();
    if total == 0.0 {
        return 0.0;
    }
    let tail: f64 = coeffs[n - n / 8..].iter().map(|c| c * c).sum();
    tail / total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mixed_params(mu: f64) -> ProblemParams {
        ProblemParams::new(1.0, 1.0, 1.0, 0.9, 3.0, 4.7, mu).unwrap()
    }

    #[test]
    fn gaussian_closed_moments_match_grid() {
        let params = mixed_params(0.1);
        let grid = Arc::new(RadialGrid::new(20.0, 4096).unwrap());
        let width = 1.3;
        let u = gaussian_with_mass(grid, width, params.c);
        let m_grid = moments(&u, params.s, params.q, params.p).unwrap();
        let m_closed = gaussian_moments(&params, width, params.c);
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        assert!(rel(m_grid.mass_sq, m_closed.mass_sq) < 1e-10);
        assert!(rel(m_grid.seminorm_sq, m_closed.seminorm_sq) < 1e-4);
        assert!(rel(m_grid.lq, m_closed.lq) < 1e-8);
        assert!(rel(m_grid.lp, m_closed.lp) < 1e-8);
    }

    #[test]
    fn quantized_radius_is_power_of_two() {
        let r = quantized_radius(3.1e-4, 128.0);
        assert_eq!(r, 0.0625);
        let r2 = quantized_radius(150.0, 128.0);
        assert_eq!(r2, 32768.0);
    }

    #[test]
    fn local_min_rejects_wrong_regime() {
        let sup = ProblemParams::new(1.0, 1.0, 1.0, 0.9, 4.5, 4.8, 1.0).unwrap();
        assert!(matches!(
            solve_local_min(&sup, 0.5, 0.5, &SolverOptions::default()),
            Err(Error::Regime(_))
        ));
    }

    #[test]
    fn mu_zero_rejects_subcritical_p() {
        let p = ProblemParams::new(1.0, 1.0, 1.0, 0.9, 3.0, 4.2, 0.0).unwrap();
        assert!(matches!(
            solve_mu_zero(&p, &SolverOptions::default()),
            Err(Error::Regime(_))
        ));
    }

    #[test]
    fn sweep_rejects_bad_ladder() {
        let p = mixed_params(0.1);
        let opts = SolverOptions::default();
        assert!(asymptotic_sweep(&p, &[], Some((0.5, 0.5)), &opts).is_err());
        assert!(asymptotic_sweep(&p, &[1.0, 1.0], Some((0.5, 0.5)), &opts).is_err());
        assert!(asymptotic_sweep(&p, &[1.0, 2.0], Some((0.5, 0.5)), &opts).is_err());
    }
}
