//! Development smoke run for the asymptotic sweep. Not part of the test suite.

use frakir::gn::cached_gn_constant;
use frakir::solver::{asymptotic_sweep, SolverOptions};
use frakir::{mu_thresholds, ProblemParams, RadialGrid};
use std::sync::Arc;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let grid = Arc::new(RadialGrid::new(20.0, 4096).unwrap());
    let base = ProblemParams::new(1.0, 1.0, 1.0, 0.9, 3.0, 4.7, 0.1).unwrap();
    let c_q = cached_gn_constant(base.s, base.q, &grid, None).unwrap();
    let c_p = cached_gn_constant(base.s, base.p, &grid, None).unwrap();
    let (mu1, mu2) = mu_thresholds(&base, c_q, c_p).unwrap();
    let start = mu1.min(mu2) / 4.0;
    let ladder: Vec<f64> = (0..12).map(|k| start * 0.25f64.powi(k)).collect();
    println!("ladder: {:.3e} .. {:.3e}", ladder[0], ladder[11]);

    let opts = SolverOptions::default();
    let outcome = asymptotic_sweep(&base, &ladder, Some((c_q, c_p)), &opts).unwrap();
    println!("m(c,0) own grid = {:.9e}", outcome.mu_zero.level);
    println!("m(c,0) final grid = {:.9e}", outcome.m_zero_final_grid);
    for row in &outcome.rows {
        println!(
            "mu={:.6e} m={} sigma={:.9e} semi_loc={} lam_loc={} lam_mp={:.3e} hdist={:.3e} conv={}",
            row.mu,
            row.m_level.map(|v| format!("{v:.6e}")).unwrap_or_default(),
            row.sigma_level,
            row.seminorm_local.map(|v| format!("{v:.4e}")).unwrap_or_default(),
            row.lambda_local.map(|v| format!("{v:.3e}")).unwrap_or_default(),
            row.lambda_mp,
            row.h_distance,
            row.converged
        );
    }
    println!("failed rows: {}", outcome.failed_rows);
    println!("total: {:?}", t0.elapsed());

    // criterion-style checks
    let rows = &outcome.rows;
    let m_final = rows.last().unwrap().m_level.unwrap();
    println!("final |m| = {:.3e} (< 1e-3?)", m_final.abs());
    let mono_m = rows.windows(2).all(|w| w[1].m_level.unwrap() > w[0].m_level.unwrap());
    println!("m monotone increasing: {mono_m}");
    let mono_sigma = rows.windows(2).all(|w| w[1].sigma_level >= w[0].sigma_level - 1e-9);
    println!("sigma non-decreasing: {mono_sigma}");
    let bounded = rows
        .iter()
        .all(|r| r.sigma_level <= outcome.m_zero_final_grid + 1e-6);
    println!("sigma <= m(c,0)+1e-6 every rung: {bounded}");
    println!("final hdist = {:.3e} (< 1e-2?)", rows.last().unwrap().h_distance);
    let mono_semi = rows
        .windows(2)
        .all(|w| w[1].seminorm_local.unwrap() < w[0].seminorm_local.unwrap());
    println!("seminorm_local decreasing: {mono_semi}");
}
