#![allow(dead_code)]

use tunnelcatch::eigensolve::{
    discretize_double_well, discretize_isolated_right, eigenvalues_between, Grid,
};
use tunnelcatch::DoubleWellSpec;

/// Probe grid level nearest `e_l` for the given width, minus `e_l`.
pub fn grid_detuning(template: &DoubleWellSpec, grid: &Grid, e_l: f64, w: f64) -> f64 {
    let spec = template.with_width(w).unwrap();
    let op = discretize_isolated_right(&spec, grid);
    let e_r = eigenvalues_between(&op, e_l - 0.4, e_l + 0.4)
        .into_iter()
        .min_by(|a, b| (a - e_l).abs().total_cmp(&(b - e_l).abs()))
        .expect("no probe level near e_l");
    e_r - e_l
}

/// Width at which the probe's grid level nearest `e_l` lands exactly on it,
/// on this grid. Tuning against the analytic level instead would leave an
/// O(h^2) detuning, which dwarfs exponentially small splittings; splitting
/// oracles therefore tune in the grid frame.
pub fn tune_width(template: &DoubleWellSpec, grid: &Grid, e_l: f64, w_guess: f64) -> f64 {
    solve_monotone_width(template, grid, e_l, w_guess, 0.0)
}

/// Width at which the grid detuning hits `target`. The probe level falls
/// with w, so the detuning is strictly decreasing and brackets cleanly.
pub fn solve_monotone_width(
    template: &DoubleWellSpec,
    grid: &Grid,
    e_l: f64,
    w_guess: f64,
    target: f64,
) -> f64 {
    let f = |w: f64| grid_detuning(template, grid, e_l, w) - target;
    let mut lo = w_guess - 0.02;
    let mut hi = w_guess + 0.02;
    let mut flo = f(lo);
    let mut fhi = f(hi);
    for _ in 0..20 {
        if flo > 0.0 && fhi < 0.0 {
            break;
        }
        if flo <= 0.0 {
            lo -= 0.02;
            flo = f(lo);
        }
        if fhi >= 0.0 {
            hi += 0.02;
            fhi = f(hi);
        }
    }
    assert!(
        flo > 0.0 && fhi < 0.0,
        "no width with detuning {target} near w = {w_guess}"
    );
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The two double-well grid eigenvalues nearest `e_l`, ascending.
pub fn pair_near(spec: &DoubleWellSpec, grid: &Grid, e_l: f64, window: f64) -> (f64, f64) {
    let op = discretize_double_well(spec, grid);
    let mut evs = eigenvalues_between(&op, e_l - window, e_l + window);
    evs.sort_by(|a, b| (a - e_l).abs().total_cmp(&(b - e_l).abs()));
    assert!(evs.len() >= 2, "expected a level pair near {e_l}");
    evs.truncate(2);
    evs.sort_by(f64::total_cmp);
    (evs[0], evs[1])
}
