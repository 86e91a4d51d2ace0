//! Command-line front end.

use clap::{Args, Parser, Subcommand};
use frakir::harness::{load_config, run, RunConfig, RunMode};
use frakir::solver::GradientMetric;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "frakir",
    version,
    about = "Normalized ground states of the fractional Kirchhoff equation with combined nonlinearities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute C(s, alpha), the thresholds mu_1 / mu_2 and the envelope roots R0 / R1
    #[command(name = "thresholds")]
    Thresholds(CommonArgs),
    /// Solve for the mixed-regime interior local minimizer (level m(c, mu) < 0)
    #[command(name = "local_min")]
    LocalMin(CommonArgs),
    /// Solve for the mountain-pass state (level sigma(c, mu) > 0)
    #[command(name = "mountain_pass")]
    MountainPass(CommonArgs),
    /// Solve the mu = 0 problem for the unique ground state u_0
    #[command(name = "mu_zero")]
    MuZero(CommonArgs),
    /// Run a warm-started mu ladder and emit the asymptotics table
    #[command(name = "sweep")]
    Sweep(CommonArgs),
    /// Compute the two interpolation constants and their maximizers
    #[command(name = "gn_constant")]
    GnConstant(CommonArgs),
    /// Re-check every invariant of a stored solution report
    #[command(name = "verify")]
    Verify(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON configuration (flat keys; a manifest.json also works)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long = "out")]
    out: Option<PathBuf>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    /// Comma-separated decreasing ladder, e.g. "1.0,0.5,0.25"
    #[arg(long = "mu-ladder")]
    mu_ladder: Option<String>,
    /// Grid as "r_max,n", e.g. "20,4096"
    #[arg(long)]
    grid: Option<String>,
    #[arg(long = "tol-el")]
    tol_el: Option<f64>,
    #[arg(long = "tol-p")]
    tol_p: Option<f64>,
    /// 0 = quiet, 1 = summaries (default), 2 = per-iteration trace
    #[arg(long)]
    verbosity: Option<u8>,
    /// Descent metric: "plain" or "spectral"
    #[arg(long)]
    metric: Option<String>,
    /// Pin the solve to the configured grid instead of auto-selecting r_max
    #[arg(long = "no-auto-domain")]
    no_auto_domain: bool,
    /// On-disk cache for the interpolation constants
    #[arg(long = "gn-cache")]
    gn_cache: Option<PathBuf>,
    /// Report document to verify
    #[arg(long)]
    report: Option<PathBuf>,
}

fn apply_args(config: &mut RunConfig, args: &CommonArgs) -> Result<(), String> {
    if let Some(v) = args.a { config.a = v; }
    if let Some(v) = args.b { config.b = v; }
    if let Some(v) = args.c { config.c = v; }
    if let Some(v) = args.s { config.s = v; }
    if let Some(v) = args.q { config.q = v; }
    if let Some(v) = args.p { config.p = v; }
    if let Some(v) = args.mu { config.mu = v; }
    if let Some(dir) = &args.out { config.output_dir = dir.clone(); }
    if let Some(ladder) = &args.mu_ladder {
        let parsed: Result<Vec<f64>, _> = ladder.split(',').map(|t| t.trim().parse::<f64>()).collect();
        config.mu_ladder = Some(parsed.map_err(|e| format!("--mu-ladder: {e}"))?);
    }
    if let Some(grid) = &args.grid {
        let mut parts = grid.split(',');
        let r_max = parts
            .next()
            .and_then(|t| t.trim().parse::<f64>().ok())
            .ok_or_else(|| "--grid expects \"r_max,n\"".to_string())?;
        let n = parts
            .next()
            .and_then(|t| t.trim().parse::<usize>().ok())
            .ok_or_else(|| "--grid expects \"r_max,n\"".to_string())?;
        config.r_max = r_max;
        config.n = n;
        // an explicit grid pins the solve domain
        config.auto_domain = false;
    }
    if let Some(v) = args.tol_el { config.tol_el = v; }
    if let Some(v) = args.tol_p { config.tol_p = v; }
    if let Some(v) = args.verbosity { config.verbosity = v; }
    if let Some(metric) = &args.metric {
        config.metric = match metric.as_str() {
            "plain" => GradientMetric::Plain,
            "spectral" => GradientMetric::SpectralShift,
            other => return Err(format!("--metric must be \"plain\" or \"spectral\", got {other}")),
        };
    }
    if args.no_auto_domain {
        config.auto_domain = false;
    }
    if let Some(path) = &args.gn_cache { config.gn_cache = Some(path.clone()); }
    if let Some(path) = &args.report { config.report = Some(path.clone()); }
    Ok(())
}

fn build_config(mode: RunMode, args: &CommonArgs) -> Result<RunConfig, String> {
    let mut config = match &args.config {
        Some(path) => {
            let mut loaded = load_config(path).map_err(|e| e.to_string())?;
            loaded.mode = mode;
            loaded
        }
        None => RunConfig::new(mode),
    };
    apply_args(&mut config, args)?;
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, args) = match &cli.command {
        Command::Thresholds(a) => (RunMode::Thresholds, a),
        Command::LocalMin(a) => (RunMode::LocalMin, a),
        Command::MountainPass(a) => (RunMode::MountainPass, a),
        Command::MuZero(a) => (RunMode::MuZero, a),
        Command::Sweep(a) => (RunMode::Sweep, a),
        Command::GnConstant(a) => (RunMode::GnConstant, a),
        Command::Verify(a) => (RunMode::Verify, a),
    };
    let config = match build_config(mode, args) {
        Ok(c) => c,
        Err(message) => {
            eprintln!("configuration error: {message}");
            return ExitCode::from(1);
        }
    };
    match run(&config) {
        Ok(0) => ExitCode::from(0),
        Ok(code) => {
            eprintln!("run finished with partial results (status {code})");
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("configuration error: {e}");
            ExitCode::from(1)
        }
    }
}
