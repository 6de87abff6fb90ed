//! Double-well geometry: a smooth, compactly supported physical well on the
//! left and a square probing well on the right, separated by a flat barrier.
//!
//! Conventions: H = -hbar^2 d^2/dx^2 + V(x), classically H = p^2 + V, and all
//! quantities are dimensionless with hbar the only small parameter.

use crate::error::{Error, Result};
use crate::quad;
use crate::roots;

/// Shape family of the physical well.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WellFamily {
    /// Truncated parabola, -d + (omega^2/4)(x-x0)^2 up to the rim. C0 at the
    /// rim, harmonic near the bottom, so omega_l has a closed form.
    HarmonicCap,
    /// -d * exp(1 - 1/(1-s^2)) with s = 2(x-x0)/L. C-infinity with compact
    /// support.
    SmoothBump,
}

/// The physical (left) well: V_l <= 0, supported on [center - half_width,
/// center + half_width], minimum -depth at the center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalWellSpec {
    pub family: WellFamily,
    pub depth: f64,
    pub center: f64,
    pub half_width: f64,
}

impl PhysicalWellSpec {
    /// Harmonic-cap well from its curvature: the parabola -d + (omega^2/4)x^2
    /// reaches zero at half_width = 2 sqrt(d)/omega.
    pub fn harmonic_cap(depth: f64, center: f64, omega: f64) -> Result<Self> {
        if !(depth > 0.0) || !(omega > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "harmonic cap needs depth > 0 and omega > 0, got depth = {depth}, omega = {omega}"
            )));
        }
        Ok(Self {
            family: WellFamily::HarmonicCap,
            depth,
            center,
            half_width: 2.0 * depth.sqrt() / omega,
        })
    }

    /// Harmonic-cap well from its support; omega follows from the rim.
    pub fn harmonic_cap_with_support(depth: f64, center: f64, half_width: f64) -> Result<Self> {
        if !(depth > 0.0) || !(half_width > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "harmonic cap needs depth > 0 and half_width > 0, got {depth}, {half_width}"
            )));
        }
        Ok(Self {
            family: WellFamily::HarmonicCap,
            depth,
            center,
            half_width,
        })
    }

    pub fn smooth_bump(depth: f64, center: f64, half_width: f64) -> Result<Self> {
        if !(depth > 0.0) || !(half_width > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "smooth bump needs depth > 0 and half_width > 0, got {depth}, {half_width}"
            )));
        }
        Ok(Self {
            family: WellFamily::SmoothBump,
            depth,
            center,
            half_width,
        })
    }

    /// Curvature frequency of the harmonic-cap parabola.
    pub fn omega(&self) -> Option<f64> {
        match self.family {
            WellFamily::HarmonicCap => Some(2.0 * self.depth.sqrt() / self.half_width),
            WellFamily::SmoothBump => None,
        }
    }

    /// Left edge of the support.
    pub fn x_left_support(&self) -> f64 {
        self.center - self.half_width
    }

    /// Right edge of the support; the barrier starts at the turning point on
    /// this side.
    pub fn a(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn support(&self) -> (f64, f64) {
        (self.x_left_support(), self.a())
    }

    pub fn eval(&self, x: f64) -> f64 {
        let u = x - self.center;
        if u.abs() >= self.half_width {
            return 0.0;
        }
        match self.family {
            WellFamily::HarmonicCap => {
                let omega = 2.0 * self.depth.sqrt() / self.half_width;
                (-self.depth + 0.25 * omega * omega * u * u).min(0.0)
            }
            WellFamily::SmoothBump => {
                let s = u / self.half_width;
                let arg = 1.0 - 1.0 / (1.0 - s * s);
                -self.depth * arg.exp()
            }
        }
    }

    /// dV_l/dx. At the harmonic-cap rim the one-sided derivatives differ; the
    /// inner value is returned there, which is what the slope-based solvers
    /// need.
    pub fn slope(&self, x: f64) -> f64 {
        let u = x - self.center;
        if u.abs() >= self.half_width {
            return 0.0;
        }
        match self.family {
            WellFamily::HarmonicCap => {
                let omega = 2.0 * self.depth.sqrt() / self.half_width;
                0.5 * omega * omega * u
            }
            WellFamily::SmoothBump => {
                let s = u / self.half_width;
                let v = self.eval(x);
                if v == 0.0 {
                    return 0.0;
                }
                let one_minus = 1.0 - s * s;
                v * (-2.0 * s / (one_minus * one_minus)) / self.half_width
            }
        }
    }
}

/// The square probing well: V_r = -v on (b, b+w).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareWellSpec {
    /// Left edge (barrier side).
    pub b: f64,
    /// Width.
    pub w: f64,
    /// Depth.
    pub v: f64,
}

impl SquareWellSpec {
    pub fn new(b: f64, w: f64, v: f64) -> Result<Self> {
        if !(w > 0.0) || !(v > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "square well needs w > 0 and v > 0, got w = {w}, v = {v}"
            )));
        }
        Ok(Self { b, w, v })
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x > self.b && x < self.b + self.w {
            -self.v
        } else {
            0.0
        }
    }

    /// Average of V_r over the cell [x-h/2, x+h/2]. Sampling the sharp walls
    /// this way keeps discretized levels second-order accurate and makes them
    /// vary continuously as the walls move between grid nodes.
    pub fn cell_averaged(&self, x: f64, h: f64) -> f64 {
        let lo = (x - 0.5 * h).max(self.b);
        let hi = (x + 0.5 * h).min(self.b + self.w);
        if hi <= lo {
            0.0
        } else {
            -self.v * (hi - lo) / h
        }
    }
}

/// Full problem definition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleWellSpec {
    pub left: PhysicalWellSpec,
    pub right: SquareWellSpec,
    pub hbar: f64,
}

impl DoubleWellSpec {
    pub fn new(left: PhysicalWellSpec, right: SquareWellSpec, hbar: f64) -> Result<Self> {
        if !(hbar > 0.0) {
            return Err(Error::InvalidSpec(format!("hbar must be > 0, got {hbar}")));
        }
        if left.a() >= right.b {
            return Err(Error::InvalidSpec(format!(
                "well supports must not intersect: a = {} >= b = {}",
                left.a(),
                right.b
            )));
        }
        Ok(Self { left, right, hbar })
    }

    /// Same spec with a different probing-well width.
    pub fn with_width(&self, w: f64) -> Result<Self> {
        let mut s = *self;
        s.right = SquareWellSpec::new(self.right.b, w, self.right.v)?;
        Ok(s)
    }

    /// Same spec with a different probing-well depth.
    pub fn with_depth(&self, v: f64) -> Result<Self> {
        let mut s = *self;
        s.right = SquareWellSpec::new(self.right.b, self.right.w, v)?;
        Ok(s)
    }
}

/// Barrier endpoints at energy E: x_l on the inner slope of the physical
/// well, x_r = b exactly (vertical square wall).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurningPoints {
    pub x_l: f64,
    pub x_r: f64,
    pub energy: f64,
}

/// Outcome of the well-separation condition b - a > I.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationCheck {
    pub valid: bool,
    /// (b - a) - I; positive when the wells are far enough apart.
    pub margin: f64,
}

/// V(x) = V_l(x) + V_r(x).
pub fn eval_potential(spec: &DoubleWellSpec, x: f64) -> f64 {
    spec.left.eval(x) + spec.right.eval(x)
}

/// Locates the barrier endpoints at energy E. x_l is the unique root of
/// V_l(x) = E on the inner (right) slope of the physical well.
pub fn turning_points(spec: &DoubleWellSpec, e: f64) -> Result<TurningPoints> {
    let left = &spec.left;
    if e >= 0.0 || e <= -left.depth {
        return Err(Error::NoTurningPoint { energy: e });
    }
    let lo = left.center;
    let hi = left.a();
    let f = |x: f64| left.eval(x) - e;
    if f(lo).signum() == f(hi).signum() {
        return Err(Error::NonMonotoneSlope);
    }
    let x_l = roots::bisect_newton(f, |x| left.slope(x), lo, hi, 1e-14)?;
    Ok(TurningPoints {
        x_l,
        x_r: spec.right.b,
        energy: e,
    })
}

/// Separation condition for the two-level reduction: the flat barrier must be
/// longer than I = int_{x_l}^{a} sqrt(1 - V_l/E) dx.
pub fn check_separation(spec: &DoubleWellSpec, e: f64) -> Result<SeparationCheck> {
    let tp = turning_points(spec, e)?;
    let a = spec.left.a();
    let left = spec.left;
    let integral = quad::sqrt_integral(
        move |x| (left.eval(x) - e) / (-e),
        tp.x_l,
        a,
        true,
        false,
        quad::DEFAULT_TOL,
    )?;
    let margin = (spec.right.b - a) - integral;
    Ok(SeparationCheck {
        valid: margin > 0.0,
        margin,
    })
}
