//! Resonance scans over the probe width or depth: where does the probing
//! well catch the physical level, how high and how wide are the peaks, and
//! what energy do they imply for the caught state.

use crate::dynamics::p_r_max;
use crate::eigensolve::{
    count_below, discretize_isolated_left, discretize_isolated_right, solve_bound_states, Grid,
};
use crate::error::{Error, Result};
use crate::model::{check_separation, DoubleWellSpec};
use crate::par_map;
use crate::roots;
use crate::semiclassic::{barrier_center, wkb_delta, wronskian_delta};
use crate::squarewell::{level_count, resonance_depth, resonance_width, solve_levels};
use crate::{eigensolve, squarewell};
use std::f64::consts::PI;
use std::io::{self, Write};

/// Which probe parameter the scan sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanParameter {
    Width,
    Depth,
}

/// How the tunneling matrix element is estimated per sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaMethod {
    /// Semiclassical formula; fast, used for whole curves.
    Wkb,
    /// Wronskian of isolated-well grid states; slower, an independent path.
    Wronskian,
}

/// One scan point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSample {
    pub param: f64,
    pub p_r_max: f64,
    /// Full two-level splitting at this sample.
    pub splitting: f64,
    pub delta: f64,
    /// Probe level nearest the target energy, and its index.
    pub e_r: f64,
    pub k: usize,
}

/// A detected resonance peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakRecord {
    pub k: usize,
    pub param_at_peak: f64,
    /// Closed-form resonance parameter for the same k.
    pub predicted_param: f64,
    pub p_at_peak: f64,
    pub fwhm_param: f64,
}

/// A refined resonance curve with its detected peaks.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanCurve {
    pub parameter: ScanParameter,
    pub template: DoubleWellSpec,
    pub e_l: f64,
    pub samples: Vec<ScanSample>,
    pub peaks: Vec<PeakRecord>,
}

/// Both answers of the energy-inference protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InferredEnergy {
    /// Truncated series -v + pi^2 hbar^2 / w^2 - 4 pi^2 hbar^3 / (w^3 sqrt v).
    pub series: f64,
    /// Exact inversion of the k = 0 quantization condition.
    pub exact: f64,
}

fn apply_param(template: &DoubleWellSpec, parameter: ScanParameter, p: f64) -> Result<DoubleWellSpec> {
    match parameter {
        ScanParameter::Width => template.with_width(p),
        ScanParameter::Depth => template.with_depth(p),
    }
}

fn delta_by_wronskian(spec: &DoubleWellSpec, e_l: f64) -> Result<f64> {
    let grid = Grid::for_spec(spec, e_l, 0.002, 6.0)?;
    let pick_near = |op: &eigensolve::Discretized| -> Result<eigensolve::BoundState> {
        let below = count_below(op, e_l);
        let take = (below + 1).min(count_below(op, 0.0));
        let mut states = solve_bound_states(op, take.max(1))?;
        states.sort_by(|a, b| {
            (a.energy - e_l)
                .abs()
                .partial_cmp(&(b.energy - e_l).abs())
                .unwrap()
        });
        Ok(states.swap_remove(0))
    };
    let psi_l = pick_near(&discretize_isolated_left(spec, &grid))?;
    let psi_r = pick_near(&discretize_isolated_right(spec, &grid))?;
    let c = barrier_center(spec, e_l)?.c;
    wronskian_delta(&psi_l, &psi_r, c, spec.hbar)
}

fn make_sample(
    template: &DoubleWellSpec,
    parameter: ScanParameter,
    p: f64,
    e_l: f64,
    omega_l: f64,
    method: DeltaMethod,
) -> Result<ScanSample> {
    let spec = apply_param(template, parameter, p)?;
    let levels = solve_levels(spec.right.w, spec.right.v, spec.hbar)?;
    let nearest = levels
        .iter()
        .min_by(|a, b| {
            (a.e_r - e_l)
                .abs()
                .partial_cmp(&(b.e_r - e_l).abs())
                .unwrap()
        })
        .expect("a square well always holds at least one level");
    let detuning = nearest.e_r - e_l;
    // below the probe floor no level can be caught; the coupling formula
    // has no meaning there and the response is dead
    let delta = if e_l <= -spec.right.v {
        0.0
    } else {
        match method {
            DeltaMethod::Wkb => wkb_delta(&spec, e_l, omega_l)?,
            DeltaMethod::Wronskian => delta_by_wronskian(&spec, e_l)?,
        }
    };
    let (p_max, splitting) = if delta > 0.0 {
        (p_r_max(delta, detuning), detuning.hypot(delta))
    } else {
        (0.0, detuning.abs())
    };
    Ok(ScanSample {
        param: p,
        p_r_max: p_max,
        splitting,
        delta,
        e_r: nearest.e_r,
        k: nearest.k,
    })
}

/// Offsets of the dense cluster placed on each resonance, in units of the
/// local half-width delta.
const CLUSTER_DETUNINGS: [f64; 19] = [
    -4.0, -3.0, -2.0, -1.5, -1.0, -0.8, -0.6, -0.4, -0.2, 0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.5, 2.0,
    3.0, 4.0,
];

/// Sweeps the probe parameter over `range`, resolving each resonance with a
/// dense local cluster (peaks are exponentially narrow, so a uniform grid
/// alone would walk straight past them).
pub fn scan(
    template: &DoubleWellSpec,
    parameter: ScanParameter,
    range: (f64, f64),
    n_samples: usize,
    e_l: f64,
    method: DeltaMethod,
) -> Result<ScanCurve> {
    let (lo, hi) = range;
    if !(hi > lo) || n_samples < 2 {
        return Err(Error::InvalidSpec(format!(
            "scan needs hi > lo and at least 2 samples, got [{lo}, {hi}] x {n_samples}"
        )));
    }
    let sep = check_separation(template, e_l)?;
    if !sep.valid {
        return Err(Error::ValidityViolated { margin: sep.margin });
    }
    let omega_l = eigensolve::classical_frequency(&template.left, e_l)?;

    let mut params: Vec<f64> = (0..n_samples)
        .map(|i| lo + (hi - lo) * i as f64 / (n_samples - 1) as f64)
        .collect();

    // detuning of level k as the parameter moves; +1 stands in for "level
    // not yet bound", which keeps the sign logic uniform
    let det_k = |k: usize, p: f64| -> Result<f64> {
        let spec = apply_param(template, parameter, p)?;
        let levels = solve_levels(spec.right.w, spec.right.v, spec.hbar)?;
        Ok(levels.get(k).map_or(1.0, |l| l.e_r - e_l))
    };
    let spec_hi = apply_param(template, parameter, hi)?;
    let k_max = level_count(spec_hi.right.w, spec_hi.right.v, spec_hi.hbar);
    for k in 0..k_max {
        let g = |p: f64| det_k(k, p).unwrap_or(f64::NAN);
        if g(lo).signum() == g(hi).signum() {
            continue;
        }
        let p_star = roots::bisect(g, lo, hi, (hi - lo) * 1e-15)?;
        let probe = make_sample(template, parameter, p_star, e_l, omega_l, method)?;
        if !(probe.delta > 0.0) {
            continue;
        }
        let dp = (hi - lo) * 1e-6;
        let (pa, pb) = ((p_star - dp).max(lo), (p_star + dp).min(hi));
        let slope = (g(pb) - g(pa)) / (pb - pa);
        if !slope.is_finite() || slope == 0.0 {
            continue;
        }
        for &u in &CLUSTER_DETUNINGS {
            let p = p_star + u * probe.delta / slope.abs();
            if p > lo && p < hi {
                params.push(p);
            }
        }
    }

    params.sort_by(|a, b| a.partial_cmp(b).unwrap());
    params.dedup();

    let samples: Result<Vec<ScanSample>> = par_map(params, |p| {
        make_sample(template, parameter, p, e_l, omega_l, method)
    })
    .into_iter()
    .collect();
    let mut curve = ScanCurve {
        parameter,
        template: *template,
        e_l,
        samples: samples?,
        peaks: Vec::new(),
    };
    curve.peaks = find_peaks(&curve)?;
    Ok(curve)
}

fn parabola_vertex(p: [(f64, f64); 3]) -> Option<(f64, f64)> {
    let [(x1, y1), (x2, y2), (x3, y3)] = p;
    let denom = (x1 - x2) * (x1 - x3) * (x2 - x3);
    if denom == 0.0 {
        return None;
    }
    let a = (x3 * (y2 - y1) + x2 * (y1 - y3) + x1 * (y3 - y2)) / denom;
    let b = (x3 * x3 * (y1 - y2) + x2 * x2 * (y3 - y1) + x1 * x1 * (y2 - y3)) / denom;
    if !(a < 0.0) {
        return None;
    }
    let xv = -b / (2.0 * a);
    let c = y2 - a * x2 * x2 - b * x2;
    Some((xv, c - b * b / (4.0 * a)))
}

fn half_max_crossing(samples: &[ScanSample], i0: usize, half: f64, to_right: bool) -> f64 {
    let mut i = i0;
    loop {
        let j = if to_right { i + 1 } else { i.wrapping_sub(1) };
        if j >= samples.len() {
            // never dropped below half inside the window; report the edge
            return samples[i].param;
        }
        let (a, b) = (&samples[i], &samples[j]);
        if b.p_r_max < half {
            let t = (half - a.p_r_max) / (b.p_r_max - a.p_r_max);
            return a.param + t * (b.param - a.param);
        }
        i = j;
    }
}

/// Local maxima above 0.5 with sub-sample parabolic refinement, half-max
/// widths, level labels and the closed-form parameter prediction.
pub fn find_peaks(curve: &ScanCurve) -> Result<Vec<PeakRecord>> {
    let s = &curve.samples;
    let mut peaks: Vec<PeakRecord> = Vec::new();
    for i in 1..s.len().saturating_sub(1) {
        if !(s[i].p_r_max >= 0.5 && s[i].p_r_max > s[i - 1].p_r_max && s[i].p_r_max >= s[i + 1].p_r_max)
        {
            continue;
        }
        let fit = parabola_vertex([
            (s[i - 1].param, s[i - 1].p_r_max),
            (s[i].param, s[i].p_r_max),
            (s[i + 1].param, s[i + 1].p_r_max),
        ]);
        let (param_at_peak, p_fit) = fit.unwrap_or((s[i].param, s[i].p_r_max));
        let p_at_peak = p_fit.max(s[i].p_r_max).min(1.0);
        let left = half_max_crossing(s, i, 0.5 * p_at_peak, false);
        let right = half_max_crossing(s, i, 0.5 * p_at_peak, true);
        let k = s[i].k;
        let predicted_param = match curve.parameter {
            ScanParameter::Width => {
                resonance_width(curve.e_l, curve.template.right.v, curve.template.hbar, k)?
            }
            ScanParameter::Depth => {
                resonance_depth(curve.e_l, curve.template.right.w, curve.template.hbar, k)?.exact
            }
        };
        if let Some(last) = peaks.last_mut() {
            if last.k == k {
                if p_at_peak > last.p_at_peak {
                    *last = PeakRecord {
                        k,
                        param_at_peak,
                        predicted_param,
                        p_at_peak,
                        fwhm_param: right - left,
                    };
                }
                continue;
            }
        }
        peaks.push(PeakRecord {
            k,
            param_at_peak,
            predicted_param,
            p_at_peak,
            fwhm_param: right - left,
        });
    }
    Ok(peaks)
}

/// Energy of the caught state from the first (k = 0) resonance of a scan,
/// by the two-term series and by exact inversion of the quantization
/// condition.
pub fn infer_energy(
    first_peak: &PeakRecord,
    v: f64,
    w_at_peak: f64,
    hbar: f64,
) -> Result<InferredEnergy> {
    if first_peak.k != 0 {
        return Err(Error::NotFirstPeak { k: first_peak.k });
    }
    let series = -v + PI * PI * hbar * hbar / (w_at_peak * w_at_peak)
        - 4.0 * PI * PI * hbar.powi(3) / (w_at_peak.powi(3) * v.sqrt());
    let exact = squarewell::solve_levels(w_at_peak, v, hbar)?[0].e_r;
    Ok(InferredEnergy { series, exact })
}

/// Writes a curve as CSV with columns param, P_r_max, delta, detuning, k.
pub fn write_curve_csv<W: Write>(curve: &ScanCurve, mut out: W) -> io::Result<()> {
    writeln!(out, "param,P_r_max,delta,detuning,k")?;
    for s in &curve.samples {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{}",
            s.param,
            s.p_r_max,
            s.delta,
            s.e_r - curve.e_l,
            s.k
        )?;
    }
    Ok(())
}

/// Writes the peak list as a small plain-text report.
pub fn write_peaks_report<W: Write>(curve: &ScanCurve, mut out: W) -> io::Result<()> {
    let name = match curve.parameter {
        ScanParameter::Width => "width",
        ScanParameter::Depth => "depth",
    };
    writeln!(out, "# resonance peaks over {name}; target energy {:.16e}", curve.e_l)?;
    if curve.peaks.is_empty() {
        writeln!(out, "none found")?;
        return Ok(());
    }
    for p in &curve.peaks {
        writeln!(
            out,
            "k={} {name}={:.16e} predicted={:.16e} P={:.16e} fwhm={:.16e}",
            p.k, p.param_at_peak, p.predicted_param, p.p_at_peak, p.fwhm_param
        )?;
    }
    Ok(())
}
