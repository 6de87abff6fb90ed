//! Bracketed scalar root finding: bisection with a safeguarded Newton polish.

use crate::error::{Error, Result};

/// Bisection on a sign-changing bracket; converges to `xtol` in x.
///
/// `f(lo)` and `f(hi)` must have opposite signs (zero counts as a root).
pub fn bisect<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, xtol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::RootBracketFailure { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if b - a <= xtol || mid <= a || mid >= b {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Bisection followed by Newton steps clamped to the bracket.
///
/// Newton uses the supplied derivative and falls back to a bisection step
/// whenever an iterate would leave the current sign-preserving bracket.
pub fn bisect_newton<F, D>(f: F, df: D, lo: f64, hi: f64, xtol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let coarse = bisect(&f, lo, hi, (hi - lo).abs() * 1e-6 + xtol)?;
    let mut x = coarse;
    for _ in 0..40 {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        let dfx = df(x);
        if dfx == 0.0 || !dfx.is_finite() {
            break;
        }
        let step = fx / dfx;
        let next = x - step;
        if !(lo..=hi).contains(&next) {
            break;
        }
        x = next;
        if step.abs() <= xtol {
            return Ok(x);
        }
    }
    // Newton stalled or walked out; finish with plain bisection.
    bisect(&f, lo, hi, xtol)
}

/// Expands `hi` geometrically until `f` changes sign against `f(lo)`.
pub fn expand_bracket_up<F: Fn(f64) -> f64>(f: F, lo: f64, hi0: f64) -> Result<(f64, f64)> {
    let flo = f(lo);
    let mut hi = hi0;
    for _ in 0..80 {
        if f(hi).signum() != flo.signum() {
            return Ok((lo, hi));
        }
        hi = lo + (hi - lo) * 2.0;
        if !hi.is_finite() {
            break;
        }
    }
    Err(Error::RootBracketFailure { lo, hi })
}
