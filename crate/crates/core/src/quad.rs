//! Adaptive Gauss-Kronrod quadrature with turning-point-aware substitutions.
//!
//! Plain panels use the 15-point Kronrod rule with the embedded 7-point Gauss
//! estimate for the error. Integrands with a vanishing or diverging square
//! root at an endpoint (classical turning points) are regularized by the
//! substitution x = x_turn +/- t^2, which makes the transformed integrand
//! smooth; the substitution zone extends `TURN_ZONE` from the turning point.
//!
//! Two guards keep the adaptive loop away from rounding artifacts. Panels
//! whose error estimate sits at the roundoff floor of the integrand are
//! accepted rather than subdivided, and the inner half of each substitution
//! zone is integrated with a single fixed panel: evaluating a generic p2
//! within ~1e-8 of its root loses every significant digit to cancellation,
//! so refinement there amplifies noise instead of reducing error.

use crate::error::{Error, Result};

/// Default absolute tolerance for action and period integrals.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Width of the endpoint substitution zone.
pub const TURN_ZONE: f64 = 1e-2;

const MAX_DEPTH: u32 = 52;

// Error estimates below this many ulps of int |f| are rounding noise.
const NOISE_FLOOR_ULPS: f64 = 200.0;

// 15-point Kronrod abscissae (positive half) and weights, with the embedded
// 7-point Gauss weights on every other node.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One Kronrod panel: returns (integral, error estimate, integral of |f|).
fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut result_gauss = WG[3] * fc;
    let mut result_kronrod = WGK[7] * fc;
    let mut result_abs = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = half * XGK[j];
        let (fm, fp) = (f(center - dx), f(center + dx));
        result_kronrod += WGK[j] * (fm + fp);
        result_abs += WGK[j] * (fm.abs() + fp.abs());
        if j % 2 == 1 {
            result_gauss += WG[j / 2] * (fm + fp);
        }
    }
    let integral = result_kronrod * half;
    let err = ((result_kronrod - result_gauss) * half).abs();
    (integral, err, result_abs * half)
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64> {
    let (val, err, resabs) = kronrod15(f, a, b);
    if !val.is_finite() {
        return Err(Error::QuadratureNonConvergent { lo: a, hi: b });
    }
    if err <= tol.max(NOISE_FLOOR_ULPS * f64::EPSILON * resabs) {
        return Ok(val);
    }
    if depth == 0 {
        // Interval shrank by 2^52 without meeting the error target.
        return Err(Error::QuadratureNonConvergent { lo: a, hi: b });
    }
    let mid = 0.5 * (a + b);
    if !(a < mid && mid < b) {
        return Ok(val);
    }
    let left = adapt(f, a, mid, 0.5 * tol, depth - 1)?;
    let right = adapt(f, mid, b, 0.5 * tol, depth - 1)?;
    Ok(left + right)
}

/// Adaptive integral of a smooth function over [a, b].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return Ok(-integrate(f, b, a, tol)?);
    }
    adapt(&f, a, b, tol, MAX_DEPTH)
}

/// Splits [lo, hi] into substitution zones around flagged endpoints plus a
/// plain middle panel. Returns (left zone end, right zone start).
fn zone_bounds(lo: f64, hi: f64, turn_lo: bool, turn_hi: bool) -> (f64, f64) {
    let len = hi - lo;
    let z = TURN_ZONE.min(len / if turn_lo && turn_hi { 2.0 } else { 1.0 });
    let zl = if turn_lo { lo + z } else { lo };
    let zr = if turn_hi { hi - z } else { hi };
    (zl, zr.max(zl))
}

/// Probes p2 on a coarse interior grid and reports the first point where it
/// is not strictly positive.
fn probe_positive<F: Fn(f64) -> f64>(p2: &F, lo: f64, hi: f64) -> Result<()> {
    const PROBES: usize = 129;
    for i in 1..PROBES {
        let x = lo + (hi - lo) * (i as f64) / (PROBES as f64);
        if p2(x) <= 0.0 {
            return Err(Error::BarrierPierced { x });
        }
    }
    Ok(())
}

/// Spot-checks p2 inside a substitution zone, at the depths the fixed inner
/// panel actually samples. `sign` is +1 for a zone growing from the lower
/// endpoint and -1 for one growing down from the upper endpoint.
fn probe_zone<F: Fn(f64) -> f64>(p2: &F, turn: f64, sign: f64, z: f64) -> Result<()> {
    for frac in [0.0625, 0.25, 0.5625] {
        let x = turn + sign * frac * z;
        if p2(x) <= 0.0 {
            return Err(Error::BarrierPierced { x });
        }
    }
    Ok(())
}

/// Integrates a substituted zone integrand over [0, tmax]. The inner half is
/// one fixed panel whose nodes stay clear of t = 0; the outer half, which
/// carries whatever structure the potential has, is handled adaptively.
fn zone_integral<F: Fn(f64) -> f64>(g: &F, tmax: f64, tol: f64) -> Result<f64> {
    let (inner, _, _) = kronrod15(g, 0.0, 0.5 * tmax);
    if !inner.is_finite() {
        return Err(Error::QuadratureNonConvergent {
            lo: 0.0,
            hi: 0.5 * tmax,
        });
    }
    let outer = adapt(g, 0.5 * tmax, tmax, tol, MAX_DEPTH)?;
    Ok(inner + outer)
}

/// Integral of sqrt(p2(x)) over [lo, hi] where p2 may vanish linearly at a
/// flagged endpoint (a classical turning point).
pub fn sqrt_integral<F: Fn(f64) -> f64>(
    p2: F,
    lo: f64,
    hi: f64,
    turn_lo: bool,
    turn_hi: bool,
    tol: f64,
) -> Result<f64> {
    if hi <= lo {
        return Ok(0.0);
    }
    let (zl, zr) = zone_bounds(lo, hi, turn_lo, turn_hi);
    let mut total = 0.0;
    if turn_lo && zl > lo {
        probe_zone(&p2, lo, 1.0, zl - lo)?;
        let tmax = (zl - lo).sqrt();
        total += zone_integral(&|t: f64| 2.0 * t * p2(lo + t * t).max(0.0).sqrt(), tmax, tol)?;
    }
    if zr > zl {
        probe_positive(&p2, zl, zr)?;
        total += adapt(&|x: f64| p2(x).max(0.0).sqrt(), zl, zr, tol, MAX_DEPTH)?;
    }
    if turn_hi && hi > zr {
        probe_zone(&p2, hi, -1.0, hi - zr)?;
        let tmax = (hi - zr).sqrt();
        total += zone_integral(&|t: f64| 2.0 * t * p2(hi - t * t).max(0.0).sqrt(), tmax, tol)?;
    }
    Ok(total)
}

/// Integral of 1/sqrt(q2(x)) over [lo, hi] where q2 vanishes linearly at a
/// flagged endpoint. The substitution turns the inverse square root into a
/// bounded integrand; Kronrod nodes never touch the endpoints themselves.
pub fn inv_sqrt_integral<F: Fn(f64) -> f64>(
    q2: F,
    lo: f64,
    hi: f64,
    turn_lo: bool,
    turn_hi: bool,
    tol: f64,
) -> Result<f64> {
    if hi <= lo {
        return Ok(0.0);
    }
    let (zl, zr) = zone_bounds(lo, hi, turn_lo, turn_hi);
    let mut total = 0.0;
    if turn_lo && zl > lo {
        probe_zone(&q2, lo, 1.0, zl - lo)?;
        let tmax = (zl - lo).sqrt();
        total += zone_integral(
            &|t: f64| 2.0 * t / q2(lo + t * t).max(f64::MIN_POSITIVE).sqrt(),
            tmax,
            tol.max(1e-14),
        )?;
    }
    if zr > zl {
        probe_positive(&q2, zl, zr)?;
        total += adapt(
            &|x: f64| 1.0 / q2(x).max(f64::MIN_POSITIVE).sqrt(),
            zl,
            zr,
            tol.max(1e-14),
            MAX_DEPTH,
        )?;
    }
    if turn_hi && hi > zr {
        probe_zone(&q2, hi, -1.0, hi - zr)?;
        let tmax = (hi - zr).sqrt();
        total += zone_integral(
            &|t: f64| 2.0 * t / q2(hi - t * t).max(f64::MIN_POSITIVE).sqrt(),
            tmax,
            tol.max(1e-14),
        )?;
    }
    Ok(total)
}
