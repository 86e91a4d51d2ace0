//! Run orchestration: configuration, pipelines per mode, artifact layout.
//!
//! A run writes into its output directory:
//!
//! ```text
//! manifest.json     resolved config, version, constants, thresholds, reports
//! fields/*.csv      solution fields (plus .meta.json sidecars)
//! tables/*.csv      sweep tables
//! logs/run.log      per-iteration trace at verbosity 2, summaries otherwise
//! ```
//!
//! Exit status: 0 on full convergence, 2 on partial results (some rows or
//! solves unconverged), and configuration errors surface as `Err` for the
//! CLI to map to exit 1. Reruns with an identical config produce
//! bit-identical CSVs, and the manifest embeds the resolved config so a run
//! can be reproduced from the manifest alone.

use crate::error::{Error, Result};
use crate::fiber::{h_roots, mu_thresholds};
use crate::gn::{cached_gn_constant, optimal_gn_constant};
use crate::grid::{mass_norm_sq, RadialGrid};
use crate::io::{
    fmt_f64, read_field, read_report_document, sweep_csv_string, write_field,
    write_report_document, ReportDocument,
};
use crate::params::{ProblemParams, Regime};
use crate::solver::{
    asymptotic_sweep, default_mu_ladder, solve_local_min, solve_mountain_pass, solve_mu_zero,
    spectral_tail_fraction, GradientMetric, SolverOptions,
};
use crate::spectral::moments;
use crate::variational::{
    el_residual, elliptic_scale, energy, pohozaev, pohozaev_identity_residual, SolveReport,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    Thresholds,
    LocalMin,
    MountainPass,
    MuZero,
    Sweep,
    GnConstant,
    Verify,
}

impl RunMode {
    pub fn name(&self) -> &'static str {
        match self {
            RunMode::Thresholds => "thresholds",
            RunMode::LocalMin => "local_min",
            RunMode::MountainPass => "mountain_pass",
            RunMode::MuZero => "mu_zero",
            RunMode::Sweep => "sweep",
            RunMode::GnConstant => "gn_constant",
            RunMode::Verify => "verify",
        }
    }
}

fn default_a() -> f64 { 1.0 }
fn default_c() -> f64 { 1.0 }
fn default_s() -> f64 { 0.9 }
fn default_q() -> f64 { 3.0 }
fn default_p() -> f64 { 4.7 }
fn default_r_max() -> f64 { 20.0 }
fn default_n() -> usize { 4096 }
fn default_tol_el() -> f64 { crate::variational::TOL_EL }
fn default_tol_p() -> f64 { crate::variational::TOL_POHOZAEV }
fn default_verbosity() -> u8 { 1 }
fn default_output_dir() -> PathBuf { PathBuf::from("frakir_run") }
fn default_true() -> bool { true }

/// Flat run configuration; CLI flags override file values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: RunMode,
    #[serde(default = "default_a")]
    pub a: f64,
    #[serde(default = "default_a")]
    pub b: f64,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub mu_ladder: Option<Vec<f64>>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_tol_el")]
    pub tol_el: f64,
    #[serde(default = "default_tol_p")]
    pub tol_p: f64,
    #[serde(default = "default_verbosity")]
    pub verbosity: u8,
    #[serde(default)]
    pub metric: GradientMetric,
    #[serde(default = "default_true")]
    pub auto_domain: bool,
    #[serde(default)]
    pub gn_cache: Option<PathBuf>,
    /// Report document to re-check (verify mode).
    #[serde(default)]
    pub report: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(mode: RunMode) -> Self {
        RunConfig {
            mode,
            a: 1.0,
            b: 1.0,
            c: 1.0,
            s: 0.9,
            q: 3.0,
            p: 4.7,
            mu: 0.0,
            r_max: default_r_max(),
            n: default_n(),
            mu_ladder: None,
            output_dir: default_output_dir(),
            tol_el: default_tol_el(),
            tol_p: default_tol_p(),
            verbosity: 1,
            metric: GradientMetric::default(),
            auto_domain: true,
            gn_cache: None,
            report: None,
        }
    }

    pub fn problem(&self) -> Result<ProblemParams> {
        ProblemParams::new(self.a, self.b, self.c, self.s, self.q, self.p, self.mu)
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol_el: self.tol_el,
            tol_p: self.tol_p,
            stop_tol: self.tol_el.min(self.tol_p),
            metric: self.metric,
            auto_domain: self.auto_domain,
            grid_r_max: self.r_max,
            grid_n: self.n,
            ..SolverOptions::default()
        }
    }

    pub fn grid(&self) -> Result<Arc<RadialGrid>> {
        Ok(Arc::new(RadialGrid::new(self.r_max, self.n)?))
    }
}

/// Loads a config document; accepts either a flat [`RunConfig`] or a
/// manifest (whose `config` entry is used), so runs reproduce from their
/// own manifests.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let config_value = match value.get("config") {
        Some(inner) => inner.clone(),
        None => value,
    };
    Ok(serde_json::from_value(config_value)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GnRecord {
    pub c_q: f64,
    pub c_p: f64,
    pub grid_r_max: f64,
    pub grid_n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdRecord {
    pub mu1: f64,
    pub mu2: f64,
    pub mu: f64,
    pub r0: Option<f64>,
    pub r1: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config: RunConfig,
    #[serde(default)]
    pub gn: Option<GnRecord>,
    #[serde(default)]
    pub thresholds: Option<ThresholdRecord>,
    #[serde(default)]
    pub reports: BTreeMap<String, ReportDocument>,
    #[serde(default)]
    pub sweep_csv: Option<String>,
    #[serde(default)]
    pub m_zero_final_grid: Option<f64>,
    #[serde(default)]
    pub failed_rows: usize,
    pub exit_status: i32,
}

struct Logger {
    file: Option<File>,
    verbosity: u8,
}

impl Logger {
    fn new(dir: &Path, verbosity: u8) -> Result<Logger> {
        let logs = dir.join("logs");
        std::fs::create_dir_all(&logs)?;
        Ok(Logger {
            file: Some(File::create(logs.join("run.log"))?),
            verbosity,
        })
    }

    fn log(&mut self, level: u8, message: &str) {
        if level <= self.verbosity {
            if let Some(f) = &mut self.file {
                let _ = writeln!(f, "{message}");
            }
        }
    }

    fn log_report(&mut self, name: &str, report: &SolveReport) {
        self.log(
            1,
            &format!(
                "{name}: level={} lambda={} el={:.3e} |P|rel={:.3e} iters={} converged={} grid=({}, {})",
                fmt_f64(report.level),
                fmt_f64(report.lambda),
                report.el_residual,
                report.pohozaev_residual,
                report.iterations,
                report.converged,
                report.grid_r_max,
                report.grid_n
            ),
        );
        if self.verbosity >= 2 {
            for (i, (e, res)) in report.trace.iter().enumerate() {
                self.log(2, &format!("{name}[{i}] energy={} el_residual={:.6e}", fmt_f64(*e), res));
            }
        }
    }
}

fn write_report_artifacts(
    dir: &Path,
    name: &str,
    params: &ProblemParams,
    report: &SolveReport,
) -> Result<ReportDocument> {
    let field = report
        .field
        .as_ref()
        .ok_or_else(|| Error::invalid("report", "solver report carries no field"))?;
    let csv_rel = format!("fields/{name}.csv");
    write_field(&dir.join(&csv_rel), field, params.s)?;
    let doc = ReportDocument {
        params: *params,
        report: report.clone(),
        field_csv: csv_rel,
    };
    write_report_document(&dir.join(format!("{name}.report.json")), &doc)?;
    Ok(doc)
}

fn gn_pair(config: &RunConfig, params: &ProblemParams) -> Result<(f64, f64)> {
    let grid = config.grid()?;
    let cache = config.gn_cache.as_deref();
    let c_q = cached_gn_constant(params.s, params.q, &grid, cache)?;
    let c_p = cached_gn_constant(params.s, params.p, &grid, cache)?;
    Ok((c_q, c_p))
}

/// Executes the configured pipeline; returns the exit status (0 or 2).
pub fn run(config: &RunConfig) -> Result<i32> {
    let dir = config.output_dir.clone();
    std::fs::create_dir_all(&dir)?;
    let mut logger = Logger::new(&dir, config.verbosity)?;
    let mut manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        gn: None,
        thresholds: None,
        reports: BTreeMap::new(),
        sweep_csv: None,
        m_zero_final_grid: None,
        failed_rows: 0,
        exit_status: 0,
    };
    let mut status = 0i32;

    match config.mode {
        RunMode::Thresholds => {
            let params = config.problem()?;
            if params.regime() != Regime::Mixed {
                return Err(Error::Regime(
                    "thresholds are defined in the mixed regime (q < 2 + 4s/3, p > 2 + 8s/3)".into(),
                ));
            }
            if !(params.mu > 0.0) {
                return Err(Error::invalid("mu", "thresholds mode needs mu > 0 for the envelope roots"));
            }
            let (c_q, c_p) = gn_pair(config, &params)?;
            manifest.gn = Some(GnRecord {
                c_q,
                c_p,
                grid_r_max: config.r_max,
                grid_n: config.n,
            });
            let (mu1, mu2) = mu_thresholds(&params, c_q, c_p)?;
            let roots = match h_roots(&params, c_q, c_p) {
                Ok((r0, r1)) => (Some(r0), Some(r1)),
                Err(Error::RootsNotFound(_)) => (None, None),
                Err(e) => return Err(e),
            };
            manifest.thresholds = Some(ThresholdRecord {
                mu1,
                mu2,
                mu: params.mu,
                r0: roots.0,
                r1: roots.1,
            });
            logger.log(1, &format!("mu1={} mu2={}", fmt_f64(mu1), fmt_f64(mu2)));
        }
        RunMode::LocalMin => {
            let params = config.problem()?;
            let (c_q, c_p) = gn_pair(config, &params)?;
            manifest.gn = Some(GnRecord {
                c_q,
                c_p,
                grid_r_max: config.r_max,
                grid_n: config.n,
            });
            let (mu1, mu2) = mu_thresholds(&params, c_q, c_p)?;
            let (r0, r1) = h_roots(&params, c_q, c_p)?;
            manifest.thresholds = Some(ThresholdRecord {
                mu1,
                mu2,
                mu: params.mu,
                r0: Some(r0),
                r1: Some(r1),
            });
            let report = solve_local_min(&params, c_q, c_p, &config.solver_options())?;
            logger.log_report("local_min", &report);
            if !report.converged {
                status = 2;
            }
            let doc = write_report_artifacts(&dir, "local_min", &params, &report)?;
            manifest.reports.insert("local_min".into(), doc);
        }
        RunMode::MountainPass => {
            let params = config.problem()?;
            let gn = if params.regime() == Regime::Mixed {
                let pair = gn_pair(config, &params)?;
                manifest.gn = Some(GnRecord {
                    c_q: pair.0,
                    c_p: pair.1,
                    grid_r_max: config.r_max,
                    grid_n: config.n,
                });
                Some(pair)
            } else {
                None
            };
            let report = solve_mountain_pass(&params, gn, &config.solver_options())?;
            logger.log_report("mountain_pass", &report);
            if !report.converged {
                status = 2;
            }
            let doc = write_report_artifacts(&dir, "mountain_pass", &params, &report)?;
            manifest.reports.insert("mountain_pass".into(), doc);
        }
        RunMode::MuZero => {
            let params = config.problem()?;
            let report = solve_mu_zero(&params, &config.solver_options())?;
            logger.log_report("mu_zero", &report);
            if !report.converged {
                status = 2;
            }
            let zeroed = params.with_mu(0.0);
            let doc = write_report_artifacts(&dir, "mu_zero", &zeroed, &report)?;
            manifest.reports.insert("mu_zero".into(), doc);
        }
        RunMode::Sweep => {
            let params = config.problem()?;
            let mixed = params.regime() == Regime::Mixed;
            let gn = if mixed {
                let pair = gn_pair(config, &params)?;
                manifest.gn = Some(GnRecord {
                    c_q: pair.0,
                    c_p: pair.1,
                    grid_r_max: config.r_max,
                    grid_n: config.n,
                });
                Some(pair)
            } else {
                None
            };
            let ladder = match (&config.mu_ladder, gn) {
                (Some(l), _) => l.clone(),
                (None, Some((c_q, c_p))) => default_mu_ladder(&params, c_q, c_p)?,
                (None, None) => {
                    return Err(Error::invalid(
                        "mu_ladder",
                        "supercritical sweeps need an explicit ladder (--mu-ladder)",
                    ))
                }
            };
            let outcome = asymptotic_sweep(&params, &ladder, gn, &config.solver_options())?;
            let tables = dir.join("tables");
            std::fs::create_dir_all(&tables)?;
            std::fs::write(tables.join("sweep.csv"), sweep_csv_string(&outcome.rows))?;
            manifest.sweep_csv = Some("tables/sweep.csv".into());
            manifest.m_zero_final_grid = Some(outcome.m_zero_final_grid);
            manifest.failed_rows = outcome.failed_rows;
            logger.log_report("mu_zero", &outcome.mu_zero);
            let zeroed = params.with_mu(0.0);
            let doc = write_report_artifacts(&dir, "mu_zero", &zeroed, &outcome.mu_zero)?;
            manifest.reports.insert("mu_zero".into(), doc);
            if let Some(rep) = &outcome.final_mp {
                let p_final = params.with_mu(outcome.rows.last().map(|r| r.mu).unwrap_or(params.mu));
                let doc = write_report_artifacts(&dir, "mountain_pass_final", &p_final, rep)?;
                manifest.reports.insert("mountain_pass_final".into(), doc);
            }
            if let Some(rep) = &outcome.final_local {
                let p_final = params.with_mu(outcome.rows.last().map(|r| r.mu).unwrap_or(params.mu));
                let doc = write_report_artifacts(&dir, "local_min_final", &p_final, rep)?;
                manifest.reports.insert("local_min_final".into(), doc);
            }
            for row in &outcome.rows {
                logger.log(
                    1,
                    &format!(
                        "mu={} m={} sigma={} hdist={:.3e} converged={}",
                        fmt_f64(row.mu),
                        row.m_level.map(fmt_f64).unwrap_or_default(),
                        fmt_f64(row.sigma_level),
                        row.h_distance,
                        row.converged
                    ),
                );
            }
            if outcome.failed_rows > 0 {
                status = 2;
            }
        }
        RunMode::GnConstant => {
            let params = config.problem()?;
            let grid = config.grid()?;
            let result_q = optimal_gn_constant(params.s, params.q, &grid)?;
            let result_p = optimal_gn_constant(params.s, params.p, &grid)?;
            if !(result_q.converged && result_p.converged) {
                status = 2;
            }
            manifest.gn = Some(GnRecord {
                c_q: result_q.constant,
                c_p: result_p.constant,
                grid_r_max: config.r_max,
                grid_n: config.n,
            });
            write_field(&dir.join("fields/gn_maximizer_q.csv"), &result_q.maximizer, params.s)?;
            write_field(&dir.join("fields/gn_maximizer_p.csv"), &result_p.maximizer, params.s)?;
            logger.log(
                1,
                &format!("C(s,q)={} C(s,p)={}", fmt_f64(result_q.constant), fmt_f64(result_p.constant)),
            );
        }
        RunMode::Verify => {
            let path = config.report.as_ref().ok_or_else(|| {
                Error::invalid("report", "verify mode needs --report pointing at a report document")
            })?;
            let checks = verify_report(path)?;
            let mut all_ok = true;
            for (name, ok, detail) in &checks {
                println!("{} {name}: {detail}", if *ok { "PASS" } else { "FAIL" });
                all_ok &= ok;
            }
            if !all_ok {
                status = 2;
            }
        }
    }

    manifest.exit_status = status;
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(status)
}

/// Re-checks every invariant of a stored solution; returns (name, pass, detail).
pub fn verify_report(path: &Path) -> Result<Vec<(String, bool, String)>> {
    let doc = read_report_document(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let (field, _meta) = read_field(&base.join(&doc.field_csv))?;
    let params = doc.params;
    let stored = &doc.report;
    let mut checks = Vec::new();

    let mass = mass_norm_sq(&field).sqrt();
    checks.push((
        "mass constraint".to_string(),
        (mass - params.c).abs() <= 1e-8 * params.c,
        format!("|mass - c|/c = {:.3e}", (mass - params.c).abs() / params.c),
    ));

    let m = moments(&field, params.s, params.q, params.p)?;
    let el = el_residual(&params, &field, stored.lambda)?;
    checks.push((
        "euler-lagrange residual".to_string(),
        el <= stored.tol_el,
        format!("{el:.3e} <= {:.1e}", stored.tol_el),
    ));

    let p_rel = pohozaev(&params, &m).abs() / elliptic_scale(&params, &m);
    checks.push((
        "pohozaev residual".to_string(),
        p_rel <= stored.tol_p,
        format!("{p_rel:.3e} <= {:.1e}", stored.tol_p),
    ));

    let identity = pohozaev_identity_residual(&params, &field, stored.lambda)?;
    checks.push((
        "pohozaev identity".to_string(),
        identity <= 1e-4,
        format!("{identity:.3e} <= 1e-4"),
    ));

    checks.push((
        "negative multiplier".to_string(),
        stored.lambda < 0.0,
        format!("lambda = {:.6e}", stored.lambda),
    ));

    let level = energy(&params, &m);
    checks.push((
        "stored level".to_string(),
        (level - stored.level).abs() <= 1e-10 * level.abs().max(1.0),
        format!("recomputed {level:.12e} vs stored {:.12e}", stored.level),
    ));

    let positive = field.values().iter().all(|&v| v > 0.0);
    checks.push((
        "pointwise positivity".to_string(),
        positive,
        format!("min value {:.3e}", field.values().iter().cloned().fold(f64::INFINITY, f64::min)),
    ));

    let tail = spectral_tail_fraction(&field);
    checks.push((
        "spectral resolution".to_string(),
        tail < 1e-8,
        format!("high-mode energy fraction {tail:.3e}"),
    ));

    Ok(checks)
}
