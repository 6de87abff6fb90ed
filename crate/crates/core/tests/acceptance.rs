//! End-to-end acceptance checks for the whole pipeline, one test and one
//! printed PASS line per check (run with --nocapture to see the numbers).
//!
//! Checks 4 to 9 share two cached fixtures: a far-barrier resonant family
//! tuned at four values of hbar, and a narrow-barrier dynamics setup where
//! the splitting is large enough to propagate through a full transfer.

mod common;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::Instant;
use tunnelcatch::dynamics::grid_propagate;
use tunnelcatch::eigensolve::{
    classical_frequency, discretize_double_well, discretize_isolated_left,
    discretize_isolated_right, eigenvalues_between, solve_bound_states, BoundState, Grid,
};
use tunnelcatch::model::{check_separation, PhysicalWellSpec, SquareWellSpec};
use tunnelcatch::scanner::{infer_energy, scan, DeltaMethod, ScanParameter};
use tunnelcatch::semiclassic::{barrier_center, wkb_delta, wronskian_delta};
use tunnelcatch::squarewell::{resonance_depth, resonance_width, solve_levels};
use tunnelcatch::{DoubleWellSpec, Error};

fn template(b: f64, hbar: f64) -> DoubleWellSpec {
    let left = PhysicalWellSpec::harmonic_cap(1.5, 0.0, 2.0).unwrap();
    let right = SquareWellSpec::new(b, 0.44, 1.5).unwrap();
    DoubleWellSpec::new(left, right, hbar).unwrap()
}

/// Far-barrier well tuned onto the k = 0 resonance on its own grid.
struct Tuned {
    hbar: f64,
    spec: DoubleWellSpec,
    e_l: f64,
    psi_l: BoundState,
    psi_r: BoundState,
    delta_wkb: f64,
    delta_grid: f64,
    /// Double-well eigenvalues within 10 delta_wkb of e_l.
    n_within: usize,
}

const HBARS: [f64; 4] = [0.25, 0.2, 0.15, 0.12];

static RESONANT: OnceLock<Vec<Tuned>> = OnceLock::new();

fn resonant() -> &'static [Tuned] {
    RESONANT.get_or_init(|| {
        HBARS
            .iter()
            .map(|&hbar| {
                let tpl = template(3.0, hbar);
                let grid = Grid::for_spec(&tpl, -1.0, 0.002, 6.0).unwrap();
                let op_l = discretize_isolated_left(&tpl, &grid);
                let psi_l = solve_bound_states(&op_l, 2).unwrap().swap_remove(1);
                assert_eq!(psi_l.node_count, 1);
                let e_l = psi_l.energy;
                let guess = resonance_width(e_l, tpl.right.v, hbar, 0).unwrap();
                let w_star = common::tune_width(&tpl, &grid, e_l, guess);
                let spec = tpl.with_width(w_star).unwrap();
                let omega_l = classical_frequency(&spec.left, e_l).unwrap();
                let delta_wkb = wkb_delta(&spec, e_l, omega_l).unwrap();
                let op_r = discretize_isolated_right(&spec, &grid);
                let psi_r = solve_bound_states(&op_r, 1).unwrap().swap_remove(0);
                let pair = common::pair_near(&spec, &grid, e_l, 0.05);
                let op_d = discretize_double_well(&spec, &grid);
                let n_within =
                    eigenvalues_between(&op_d, e_l - 10.0 * delta_wkb, e_l + 10.0 * delta_wkb)
                        .len();
                Tuned {
                    hbar,
                    spec,
                    e_l,
                    psi_l,
                    psi_r,
                    delta_wkb,
                    delta_grid: pair.1 - pair.0,
                    n_within,
                }
            })
            .collect()
    })
}

/// Narrow-barrier well for time evolution, tuned the same way.
struct DynSetup {
    template: DoubleWellSpec,
    spec: DoubleWellSpec,
    grid: Grid,
    e_l: f64,
    psi_l: BoundState,
    w_star: f64,
    delta_grid: f64,
}

static DYN: OnceLock<DynSetup> = OnceLock::new();

fn dynamics_setup() -> &'static DynSetup {
    DYN.get_or_init(|| {
        let tpl = template(1.65, 0.15);
        let grid = Grid::for_spec(&tpl, -1.0, 0.004, 6.0).unwrap();
        let op_l = discretize_isolated_left(&tpl, &grid);
        let psi_l = solve_bound_states(&op_l, 2).unwrap().swap_remove(1);
        let e_l = psi_l.energy;
        let guess = resonance_width(e_l, tpl.right.v, tpl.hbar, 0).unwrap();
        let w_star = common::tune_width(&tpl, &grid, e_l, guess);
        let spec = tpl.with_width(w_star).unwrap();
        let pair = common::pair_near(&spec, &grid, e_l, 0.1);
        DynSetup {
            template: tpl,
            spec,
            grid,
            e_l,
            psi_l,
            w_star,
            delta_grid: pair.1 - pair.0,
        }
    })
}

/// Propagates the stored left state under the double well at width `w` and
/// returns (max P_r, refined peak time, worst norm drift).
fn propagate_at(setup: &DynSetup, w: f64, t_final: f64) -> (f64, f64, f64) {
    let spec = setup.template.with_width(w).unwrap();
    let op = discretize_double_well(&spec, &setup.grid);
    let c = barrier_center(&spec, setup.e_l).unwrap().c;
    let steps = (t_final / 0.02).ceil() as usize;
    let trace = grid_propagate(&op, &setup.psi_l, t_final, steps, c).unwrap();
    let p_max = trace.p_r.iter().fold(0.0f64, |m, &p| m.max(p));
    let drift = trace
        .norms
        .iter()
        .map(|&n| (n - 1.0).abs())
        .fold(0.0f64, f64::max);
    (p_max, trace.transfer_time, drift)
}

#[test]
fn a01_random_wells_match_refined_grids() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst = 0.0f64;
    let mut done = 0usize;
    while done < 50 {
        let v = rng.gen_range(0.8..3.0);
        let w = rng.gen_range(0.3..2.0);
        let hbar = rng.gen_range(0.08..0.25);
        let analytic = solve_levels(w, v, hbar).unwrap();
        let top = analytic.last().unwrap().e_r;
        if top > -0.05 * v {
            // a level grazing threshold decays too slowly for this domain
            // budget; redraw
            continue;
        }
        let pad = 8.0 * hbar / (-top).sqrt();
        let left = PhysicalWellSpec::harmonic_cap(1.0, -pad - 10.0, 2.0).unwrap();
        let spec =
            DoubleWellSpec::new(left, SquareWellSpec::new(0.0, w, v).unwrap(), hbar).unwrap();
        let g1 = Grid::new(-pad, w + pad, ((w + 2.0 * pad) / 2e-3).ceil() as usize, -0.5 * pad)
            .unwrap();
        let g2 = g1.refine();
        let e1 = eigenvalues_between(&discretize_isolated_right(&spec, &g1), -v, 0.025 * -v);
        let e2 = eigenvalues_between(&discretize_isolated_right(&spec, &g2), -v, 0.025 * -v);
        assert_eq!(e1.len(), analytic.len(), "level count on coarse grid");
        assert_eq!(e2.len(), analytic.len(), "level count on fine grid");
        for ((c_, f), a) in e1.iter().zip(&e2).zip(&analytic) {
            let richardson = (4.0 * f - c_) / 3.0;
            let err = (richardson - a.e_r).abs();
            assert!(
                err <= 1e-4,
                "v={v} w={w} hbar={hbar} k={}: |dE| = {err}",
                a.k
            );
            worst = worst.max(err);
        }
        done += 1;
    }
    let secs = t0.elapsed().as_secs_f64();
    assert!(secs <= 60.0, "took {secs} s");
    println!("acceptance 01: PASS (50 wells, worst |dE| = {worst:.2e}, {secs:.1} s)");
}

#[test]
fn a02_symmetric_configuration_is_exact() {
    let levels = solve_levels(0.5 * PI, 2.0, 1.0).unwrap();
    assert_eq!(levels.len(), 1);
    let e_err = (levels[0].e_r + 1.0).abs();
    assert!(e_err <= 1e-12);
    let mut w_err = 0.0f64;
    for k in 0..=5 {
        let w = resonance_width(-1.0, 2.0, 1.0, k).unwrap();
        w_err = w_err.max((w - PI * (k as f64 + 0.5)).abs());
    }
    assert!(w_err <= 1e-12);
    let d = resonance_depth(-1.0, 0.5 * PI, 1.0, 0).unwrap().exact;
    assert!((d - 2.0).abs() <= 1e-10);
    println!(
        "acceptance 02: PASS (|E+1| = {e_err:.1e}, widths off by {w_err:.1e}, depth off by {:.1e})",
        (d - 2.0).abs()
    );
}

#[test]
fn a03_series_remainder_drops_by_sixth_power() {
    let (w, v, k) = (0.5, 1.5, 0usize);
    let err = |hbar: f64| {
        let exact = solve_levels(w, v, hbar).unwrap()[k].e_r;
        (tunnelcatch::squarewell::level_asymptotic(w, v, hbar, k) - exact).abs()
    };
    let (e1, e2, e3) = (err(0.02), err(0.01), err(0.005));
    let (r1, r2) = (e1 / e2, e2 / e3);
    assert!((40.0..90.0).contains(&r1), "first halving ratio {r1}");
    assert!((40.0..90.0).contains(&r2), "second halving ratio {r2}");
    println!("acceptance 03: PASS (remainder ratios {r1:.1} and {r2:.1} per halving)");
}

#[test]
fn a04_grid_pair_confirms_wkb_splitting() {
    let mut dist_prev = f64::INFINITY;
    let mut line = String::new();
    for t in resonant() {
        assert_eq!(
            t.n_within, 2,
            "hbar = {}: {} levels within 10 delta",
            t.hbar, t.n_within
        );
        let ratio = t.delta_grid / t.delta_wkb;
        assert!(
            (0.5..=2.0).contains(&ratio),
            "hbar = {}: ratio {ratio}",
            t.hbar
        );
        let dist = (ratio - 1.0).abs();
        assert!(
            dist <= dist_prev,
            "hbar = {}: |ratio-1| grew to {dist:.2e}",
            t.hbar
        );
        dist_prev = dist;
        line.push_str(&format!(" {:.4}@{}", ratio, t.hbar));
    }
    println!("acceptance 04: PASS (two levels within 10 delta; grid/wkb ratios{line})");
}

#[test]
fn a05_wronskian_estimate_tracks_grid_splitting() {
    let mut factors = Vec::new();
    for t in resonant() {
        let c = barrier_center(&t.spec, t.e_l).unwrap().c;
        let dw = wronskian_delta(&t.psi_l, &t.psi_r, c, t.hbar).unwrap();
        let r = dw / t.delta_grid;
        factors.push(r.max(1.0 / r));
    }
    let at_015 = factors[2];
    assert!(at_015 <= 1.5, "factor {at_015} at hbar = 0.15");
    // the factor must shrink with hbar until it saturates at the grid
    // discretization floor; once within SAT of exact agreement there is no
    // room left to improve on a fixed mesh
    const SAT: f64 = 1e-3;
    for pair in factors.windows(2) {
        assert!(
            pair[1] <= pair[0] || pair[1] <= 1.0 + SAT,
            "agreement factor grew from {} to {} above the saturation band",
            pair[0],
            pair[1]
        );
    }
    println!(
        "acceptance 05: PASS (factor excesses {:.1e} {:.1e} {:.1e} {:.1e} along hbar {:?})",
        factors[0] - 1.0,
        factors[1] - 1.0,
        factors[2] - 1.0,
        factors[3] - 1.0,
        HBARS
    );
}

#[test]
fn a06_resonant_transfer_completes_and_detuning_blocks_it() {
    let s = dynamics_setup();
    let t_star = PI * s.spec.hbar / s.delta_grid;
    let (p_max, t_peak, drift) = propagate_at(s, s.w_star, 1.15 * t_star);
    assert!(p_max >= 0.9, "max P_r = {p_max}");
    assert!(
        (t_peak - t_star).abs() <= 0.05 * t_star,
        "peak at {t_peak} vs predicted {t_star}"
    );
    assert!(drift <= 1e-9, "norm drift {drift}");

    let w_det = common::solve_monotone_width(
        &s.template,
        &s.grid,
        s.e_l,
        s.w_star,
        10.0 * s.delta_grid,
    );
    let det = common::grid_detuning(&s.template, &s.grid, s.e_l, w_det);
    assert!((det / (10.0 * s.delta_grid) - 1.0).abs() <= 0.01);
    let (p_det, _, _) = propagate_at(s, w_det, 1.15 * t_star);
    assert!(p_det <= 0.02, "detuned max P_r = {p_det}");
    println!(
        "acceptance 06: PASS (max P_r = {p_max:.4} at t = {t_peak:.1} vs {t_star:.1}, drift {drift:.1e}, P_r = {p_det:.4} at 10 delta)"
    );
}

#[test]
fn a07_transfer_peak_traces_a_lorentzian() {
    let s = dynamics_setup();
    let delta = s.delta_grid;
    let mut worst = 0.0f64;
    for j in -3i32..=3 {
        let (w_j, det) = if j == 0 {
            (s.w_star, 0.0)
        } else {
            let w_j = common::solve_monotone_width(
                &s.template,
                &s.grid,
                s.e_l,
                s.w_star,
                j as f64 * delta,
            );
            (w_j, common::grid_detuning(&s.template, &s.grid, s.e_l, w_j))
        };
        let splitting = delta.hypot(det);
        let t_final = 1.1 * PI * s.spec.hbar / splitting;
        let (p_max, _, _) = propagate_at(s, w_j, t_final);
        let predicted = delta * delta / (delta * delta + det * det);
        worst = worst.max((p_max - predicted).abs());
    }
    assert!(worst <= 0.05, "worst deviation {worst}");
    println!("acceptance 07: PASS (7 detunings, worst |P - Lorentzian| = {worst:.2e})");
}

#[test]
fn a08_width_scan_finds_three_unit_peaks() {
    let t = &resonant()[2];
    let w0 = resonance_width(t.e_l, t.spec.right.v, t.hbar, 0).unwrap();
    let w2 = resonance_width(t.e_l, t.spec.right.v, t.hbar, 2).unwrap();
    let curve = scan(
        &t.spec,
        ScanParameter::Width,
        (0.8 * w0, 1.1 * w2),
        120,
        t.e_l,
        DeltaMethod::Wkb,
    )
    .unwrap();
    assert_eq!(curve.peaks.len(), 3, "found {} peaks", curve.peaks.len());
    let mut worst_center = 0.0f64;
    let mut worst_fwhm = 0.0f64;
    for (k, peak) in curve.peaks.iter().enumerate() {
        assert_eq!(peak.k, k);
        assert!(peak.p_at_peak >= 0.99, "k = {k}: P = {}", peak.p_at_peak);
        // local refined spacing at the peak
        let i = curve
            .samples
            .iter()
            .position(|s| s.param >= peak.param_at_peak)
            .unwrap();
        let spacing = curve.samples[i].param - curve.samples[i - 1].param;
        let center_err = (peak.param_at_peak - peak.predicted_param).abs();
        assert!(
            center_err <= spacing,
            "k = {k}: center off by {center_err} vs spacing {spacing}"
        );
        worst_center = worst_center.max(center_err / spacing);
        // energy-units width against the splitting at the peak
        let eps = 1e-6;
        let e_hi = solve_levels(peak.param_at_peak + eps, t.spec.right.v, t.hbar).unwrap()[k].e_r;
        let e_lo = solve_levels(peak.param_at_peak - eps, t.spec.right.v, t.hbar).unwrap()[k].e_r;
        let slope = (e_hi - e_lo) / (2.0 * eps);
        let delta_k = curve.samples[i].delta;
        let fwhm_e = peak.fwhm_param * slope.abs();
        let dev = (fwhm_e / (2.0 * delta_k) - 1.0).abs();
        assert!(dev <= 0.10, "k = {k}: energy fwhm {fwhm_e} vs 2 delta {}", 2.0 * delta_k);
        worst_fwhm = worst_fwhm.max(dev);
    }
    println!(
        "acceptance 08: PASS (3 peaks at P >= 0.99, centers within {worst_center:.2} spacings, fwhm/2delta off by <= {worst_fwhm:.3})"
    );
}

#[test]
fn a09_inferred_energy_closes_the_loop_and_series_is_fourth_order() {
    let t = &resonant()[2];
    let w0 = resonance_width(t.e_l, t.spec.right.v, t.hbar, 0).unwrap();
    let curve = scan(
        &t.spec,
        ScanParameter::Width,
        (0.9 * w0, 1.15 * w0),
        40,
        t.e_l,
        DeltaMethod::Wkb,
    )
    .unwrap();
    assert_eq!(curve.peaks.len(), 1);
    let peak = curve.peaks[0];
    let inferred = infer_energy(&peak, t.spec.right.v, peak.param_at_peak, t.hbar).unwrap();
    let i = curve
        .samples
        .iter()
        .position(|s| s.param >= peak.param_at_peak)
        .unwrap();
    let delta = curve.samples[i].delta;
    let exact_err = (inferred.exact - t.e_l).abs();
    assert!(
        exact_err <= 2.0 * delta,
        "inverted energy off by {exact_err} vs 2 delta = {}",
        2.0 * delta
    );

    // order of the truncated inference series at fixed geometry
    let (w, v) = (2.0, 1.5);
    let err = |hbar: f64| {
        let series = -v + PI * PI * hbar * hbar / (w * w)
            - 4.0 * PI * PI * hbar.powi(3) / (w.powi(3) * v.sqrt());
        (series - solve_levels(w, v, hbar).unwrap()[0].e_r).abs()
    };
    let (e1, e2, e3) = (err(0.2), err(0.1), err(0.05));
    let (r1, r2) = (e1 / e2, e2 / e3);
    assert!(r1 >= 12.0, "first halving ratio {r1}");
    assert!(r2 >= 12.0, "second halving ratio {r2}");
    let drift = ((e3 / 0.05f64.powi(4)) / (e2 / 0.1f64.powi(4)) - 1.0).abs();
    assert!(drift <= 0.25, "hbar^4 coefficient drift {drift}");
    println!(
        "acceptance 09: PASS (|E_inferred - E_l| = {exact_err:.2e} <= 2 delta = {:.2e}; observed orders {:.2}, {:.2})",
        2.0 * delta,
        r1.log2(),
        r2.log2()
    );
}

#[test]
fn a10_violated_separation_refuses_two_level_outputs() {
    let spec = template(1.24, 0.15);
    let e_l = -0.5;
    let sep = check_separation(&spec, e_l).unwrap();
    assert!(!sep.valid);
    let scan_err = scan(
        &spec,
        ScanParameter::Width,
        (0.3, 0.6),
        20,
        e_l,
        DeltaMethod::Wkb,
    )
    .unwrap_err();
    assert!(matches!(scan_err, Error::ValidityViolated { .. }));
    let omega_l = classical_frequency(&spec.left, e_l).unwrap();
    let delta_err = wkb_delta(&spec, e_l, omega_l).unwrap_err();
    assert!(matches!(delta_err, Error::InvalidTwoLevel));
    println!(
        "acceptance 10: PASS (margin {:.3e}; scan and wkb estimate both refuse)",
        sep.margin
    );
}
