//! Development smoke run: thresholds + all three solves at the default
//! mixed-regime parameters. Not part of the test suite.

use frakir::gn::cached_gn_constant;
use frakir::solver::{solve_local_min, solve_mountain_pass, solve_mu_zero, SolverOptions};
use frakir::{h_roots, mu_thresholds, ProblemParams, RadialGrid};
use std::sync::Arc;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let grid = Arc::new(RadialGrid::new(20.0, 4096).unwrap());
    let base = ProblemParams::new(1.0, 1.0, 1.0, 0.9, 3.0, 4.7, 0.1).unwrap();
    let c_q = cached_gn_constant(base.s, base.q, &grid, None).unwrap();
    let c_p = cached_gn_constant(base.s, base.p, &grid, None).unwrap();
    println!("C(s,q) = {c_q:.10}  C(s,p) = {c_p:.10}   [{:?}]", t0.elapsed());

    let (mu1, mu2) = mu_thresholds(&base, c_q, c_p).unwrap();
    let mu = mu1.min(mu2) / 4.0;
    let params = base.with_mu(mu);
    println!("mu1 = {mu1:.6e}  mu2 = {mu2:.6e}  mu = {mu:.6e}");
    let (r0, r1) = h_roots(&params, c_q, c_p).unwrap();
    println!("R0 = {r0:.6}  R1 = {r1:.6}");

    let opts = SolverOptions::default();

    let t = Instant::now();
    let local = solve_local_min(&params, c_q, c_p, &opts).unwrap();
    println!(
        "local_min: conv={} level={:.6e} lambda={:.6e} el={:.2e} |P|={:.2e} id={:.2e} class={:?} semi={:.4} iters={} grid=({}, {}) [{:?}]",
        local.converged, local.level, local.lambda, local.el_residual, local.pohozaev_residual,
        local.identity_residual, local.classification, local.seminorm, local.iterations,
        local.grid_r_max, local.grid_n, t.elapsed()
    );
    println!(
        "  seminorm < R0: {}   min value: {:.3e}",
        local.seminorm < r0,
        local.field.as_ref().unwrap().values().iter().cloned().fold(f64::INFINITY, f64::min)
    );

    let t = Instant::now();
    let mp = solve_mountain_pass(&params, Some((c_q, c_p)), &opts).unwrap();
    println!(
        "mountain_pass: conv={} level={:.6e} lambda={:.6e} el={:.2e} |P|={:.2e} id={:.2e} class={:?} iters={} grid=({}, {}) [{:?}]",
        mp.converged, mp.level, mp.lambda, mp.el_residual, mp.pohozaev_residual,
        mp.identity_residual, mp.classification, mp.iterations, mp.grid_r_max, mp.grid_n, t.elapsed()
    );

    let t = Instant::now();
    let zero = solve_mu_zero(&params, &opts).unwrap();
    println!(
        "mu_zero: conv={} level={:.6e} lambda={:.6e} el={:.2e} class={:?} iters={} grid=({}, {}) [{:?}]",
        zero.converged, zero.level, zero.lambda, zero.el_residual, zero.classification,
        zero.iterations, zero.grid_r_max, zero.grid_n, t.elapsed()
    );
    println!("sigma < m(c,0): {}", mp.level < zero.level);

    // supercritical
    let sup = ProblemParams::new(1.0, 1.0, 1.0, 0.9, 4.5, 4.8, 1.0).unwrap();
    let t = Instant::now();
    let mp_sup = solve_mountain_pass(&sup, None, &opts).unwrap();
    println!(
        "supercritical MP: conv={} level={:.6e} lambda={:.6e} el={:.2e} class={:?} iters={} grid=({}, {}) [{:?}]",
        mp_sup.converged, mp_sup.level, mp_sup.lambda, mp_sup.el_residual, mp_sup.classification,
        mp_sup.iterations, mp_sup.grid_r_max, mp_sup.grid_n, t.elapsed()
    );
    println!("total: {:?}", t0.elapsed());
}
