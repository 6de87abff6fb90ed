//! Bound levels of an isolated finite square well of width w and depth v,
//! plus the inverse problems used to tune the probe onto a resonance.
//!
//! A level E in (-v, 0) satisfies
//!
//!   w sqrt(v + E) / hbar = pi (k + 1/2) - arctan((v + 2E) / (2 sqrt((-E)(v + E))))
//!
//! with k = 0, 1, ... counting nodes. The left side minus the right side is
//! strictly increasing in E, so each level is an isolated simple root.

use crate::error::{Error, Result};
use crate::roots;
use std::f64::consts::PI;

/// One bound level of the isolated square well.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareWellLevel {
    /// Node count / level index.
    pub k: usize,
    /// Level energy in (-v, 0).
    pub e_r: f64,
    /// Quantization residual at `e_r` (should be ~1e-15).
    pub residual: f64,
}

/// Exact and truncated-series answers for the resonant depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthSolution {
    pub exact: f64,
    pub asymptotic: f64,
}

/// Number of bound levels: floor(w sqrt(v) / (pi hbar)) + 1.
pub fn level_count(w: f64, v: f64, hbar: f64) -> usize {
    (w * v.sqrt() / (PI * hbar)).floor() as usize + 1
}

/// Quantization residual at energy `e` for level index `k`; zero at the
/// level, strictly increasing in `e`.
pub fn quantization_residual(e: f64, w: f64, v: f64, hbar: f64, k: usize) -> f64 {
    let q = (v + e).sqrt();
    let kap = (-e).sqrt();
    w * q / hbar - PI * (k as f64 + 0.5) + ((v + 2.0 * e) / (2.0 * q * kap)).atan()
}

fn check_well(w: f64, v: f64, hbar: f64) -> Result<()> {
    if !(w > 0.0) || !(v > 0.0) || !(hbar > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "square well solve needs w, v, hbar > 0, got w = {w}, v = {v}, hbar = {hbar}"
        )));
    }
    Ok(())
}

/// Solves every bound level. The root for level k is found in terms of
/// kappa = sqrt(-E)/1, where the residual stays smooth even when the level
/// sits exponentially close to the threshold E = 0.
pub fn solve_levels(w: f64, v: f64, hbar: f64) -> Result<Vec<SquareWellLevel>> {
    check_well(w, v, hbar)?;
    let sv = v.sqrt();
    let count = level_count(w, v, hbar);
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        // residual as a function of kappa = sqrt(-E), decreasing on (0, sqrt v)
        let f = |kap: f64| quantization_residual(-kap * kap, w, v, hbar, k);
        let df = |kap: f64| {
            let q = (v - kap * kap).max(0.0).sqrt();
            -(w * kap / hbar + 2.0) / q
        };
        let k_lo = sv * 1e-30;
        let k_hi = sv * (1.0 - 1e-15);
        let kap = if f(k_lo) <= 0.0 {
            // level within ~1e-30 of threshold: the linearized residual
            // margin - 2 kappa / sqrt(v) is already exact to double precision
            0.5 * sv * (w * sv / hbar - PI * k as f64).max(0.0)
        } else {
            roots::bisect_newton(f, df, k_lo, k_hi, sv * 1e-18)?
        };
        let e_r = -kap * kap;
        out.push(SquareWellLevel {
            k,
            e_r,
            residual: quantization_residual(e_r, w, v, hbar, k),
        });
    }
    Ok(out)
}

/// Truncated small-hbar series for level k:
///
///   E = -v + (hbar pi (k+1))^2 / w^2 * (1 - 4 hbar / (w sqrt v)
///       + 12 hbar^2 / (w^2 v)
///       - 2 (48 + (k+1)^2 pi^2) hbar^3 / (3 v^(3/2) w^3))
pub fn level_asymptotic(w: f64, v: f64, hbar: f64, k: usize) -> f64 {
    let n = (k + 1) as f64;
    let lead = hbar * hbar * PI * PI * n * n / (w * w);
    let sv = v.sqrt();
    let bracket = 1.0 - 4.0 * hbar / (w * sv) + 12.0 * hbar * hbar / (w * w * v)
        - 2.0 * (48.0 + n * n * PI * PI) * hbar.powi(3) / (3.0 * v * sv * w.powi(3));
    -v + lead * bracket
}

/// Width at which level k of the probe sits exactly at `e_l`:
///
///   w* = pi hbar / sqrt(v + E_l) * (k + 1/2
///        - arctan((v + 2 E_l) / (2 sqrt((-E_l)(v + E_l)))) / pi)
pub fn resonance_width(e_l: f64, v: f64, hbar: f64, k: usize) -> Result<f64> {
    check_well(1.0, v, hbar)?;
    if !(e_l > -v && e_l < 0.0) {
        return Err(Error::EnergyOutOfRange {
            energy: e_l,
            lo: -v,
            hi: 0.0,
        });
    }
    let q = (v + e_l).sqrt();
    let kap = (-e_l).sqrt();
    let phase = k as f64 + 0.5 - ((v + 2.0 * e_l) / (2.0 * kap * q)).atan() / PI;
    Ok(PI * hbar * phase / q)
}

/// Depth at which level k of the probe sits exactly at `e_l`, both as the
/// exact root of the quantization condition and as the truncated series
///
///   v* = -E_l + (hbar pi (k+1))^2 / w^2 * (1 - 4 hbar / (w sqrt(-E_l))
///        - 12 hbar^2 / (w^2 E_l)
///        - 4 (24 - (k+1)^2 pi^2) hbar^3 / (3 w^3 (-E_l)^(3/2)))
pub fn resonance_depth(e_l: f64, w: f64, hbar: f64, k: usize) -> Result<DepthSolution> {
    check_well(w, 1.0, hbar)?;
    if !(e_l < 0.0) {
        return Err(Error::EnergyOutOfRange {
            energy: e_l,
            lo: f64::NEG_INFINITY,
            hi: 0.0,
        });
    }
    // the residual at fixed E = e_l is strictly increasing in v, from
    // -pi (k+1) at v -> (-e_l)+ to +infinity
    let g = |v: f64| quantization_residual(e_l, w, v, hbar, k);
    let dg = |v: f64| {
        let q = (v + e_l).max(0.0).sqrt();
        let kap = (-e_l).sqrt();
        (0.5 * w / hbar + kap / v) / q
    };
    let n = (k + 1) as f64;
    let lead = hbar * hbar * PI * PI * n * n / (w * w);
    let lo = -e_l * (1.0 + 1e-15);
    let hi0 = lo + lead.max(-e_l * 1e-12);
    let (lo, hi) =
        roots::expand_bracket_up(g, lo, hi0).map_err(|_| Error::NoDepthRoot)?;
    let exact = roots::bisect_newton(g, dg, lo, hi, (-e_l) * 1e-16)?;
    let se = (-e_l).sqrt();
    let bracket = 1.0 - 4.0 * hbar / (w * se) - 12.0 * hbar * hbar / (w * w * e_l)
        - 4.0 * (24.0 - n * n * PI * PI) * hbar.powi(3) / (3.0 * w.powi(3) * (-e_l) * se);
    let asymptotic = -e_l + lead * bracket;
    Ok(DepthSolution { exact, asymptotic })
}
