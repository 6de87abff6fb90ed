//! Barrier actions, the barrier center, tunneling splitting estimates, and
//! the two-level reduction built on them.

use crate::eigensolve::BoundState;
use crate::error::{Error, Result};
use crate::model::{self, DoubleWellSpec, TurningPoints};
use crate::quad;
use crate::roots;
use std::f64::consts::PI;

/// Actions on the two banks of the barrier and the equal-action center c.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierData {
    /// Bank action between x_l and the support edge a.
    pub s_l: f64,
    /// Bank action on the probe side; identically zero for the square wall,
    /// stored for symmetry of the record.
    pub s_r: f64,
    /// Equal-action barrier center.
    pub c: f64,
    /// Total action between the turning points.
    pub full_action: f64,
    /// Whether c falls strictly inside the flat stretch (a, b), which is
    /// what the two-level reduction requires.
    pub valid_two_level: bool,
}

/// Spectrum of the symmetric-antisymmetric pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelResult {
    pub e1: f64,
    pub e2: f64,
    /// Tunneling matrix element delta.
    pub delta: f64,
    /// Full splitting E2 - E1 = sqrt(delta^2 + (E_r - E_l)^2).
    pub splitting: f64,
    /// Mixing angle in (0, pi/2); pi/4 at exact resonance.
    pub alpha: f64,
    pub e_l: f64,
    pub e_r: f64,
}

fn is_turning(spec: &DoubleWellSpec, e: f64, x: f64) -> bool {
    (model::eval_potential(spec, x) - e).abs() <= 1e-9 * e.abs().max(1e-12)
}

fn smooth_piece(spec: &DoubleWellSpec, e: f64, from: f64, to: f64) -> Result<f64> {
    let s = *spec;
    quad::sqrt_integral(
        move |x| model::eval_potential(&s, x) - e,
        from,
        to,
        is_turning(spec, e, from),
        is_turning(spec, e, to),
        quad::DEFAULT_TOL,
    )
}

fn action_between(spec: &DoubleWellSpec, e: f64, from: f64, to: f64) -> Result<f64> {
    if to <= from {
        return Ok(0.0);
    }
    // Split at the support edge a when it falls strictly inside.  V' can jump
    // there, and a panel straddling the jump near one of its edges slips past
    // the quadrature error estimate; on either side alone the integrand is
    // smooth.
    let a = spec.left.a();
    if from < a && a < to {
        return Ok(smooth_piece(spec, e, from, a)? + smooth_piece(spec, e, a, to)?);
    }
    smooth_piece(spec, e, from, to)
}

/// Action integral of sqrt(V - E) over [from, to], which must lie inside the
/// barrier at energy E.
pub fn tunnel_action(spec: &DoubleWellSpec, e: f64, from: f64, to: f64) -> Result<f64> {
    if from == to {
        return Ok(0.0);
    }
    let tp = model::turning_points(spec, e)?;
    let slack = 1e-12 * (tp.x_r - tp.x_l);
    if from < tp.x_l - slack || to > tp.x_r + slack || to < from {
        return Err(Error::InvalidSpec(format!(
            "action interval [{from}, {to}] escapes the barrier [{}, {}]",
            tp.x_l, tp.x_r
        )));
    }
    action_between(spec, e, from, to)
}

/// Computes bank actions and the equal-action center at energy E.
pub fn barrier_center(spec: &DoubleWellSpec, e: f64) -> Result<BarrierData> {
    let tp: TurningPoints = model::turning_points(spec, e)?;
    let a = spec.left.a();
    let s_l = action_between(spec, e, tp.x_l, a)?;
    let full_action = s_l + action_between(spec, e, a, tp.x_r)?;
    // split point with equal action on both sides: g is strictly increasing
    let s = *spec;
    let g = |c: f64| match action_between(&s, e, tp.x_l, c) {
        Ok(v) => 2.0 * v - full_action,
        Err(_) => f64::NAN,
    };
    let dg = |c: f64| 2.0 * (model::eval_potential(&s, c) - e).max(0.0).sqrt();
    let c = roots::bisect_newton(g, dg, tp.x_l, tp.x_r, 1e-13 * (tp.x_r - tp.x_l))?;
    Ok(BarrierData {
        s_l,
        s_r: 0.0,
        c,
        full_action,
        valid_two_level: a < c && c < tp.x_r,
    })
}

/// Semiclassical splitting
///
///   delta = 2 hbar (-E)^(1/4) sqrt(2 (v+E) omega_l / (pi v w)) exp(-S/hbar)
///
/// with S the full barrier action at the common resonance energy E.
pub fn wkb_delta(spec: &DoubleWellSpec, e: f64, omega_l: f64) -> Result<f64> {
    let v = spec.right.v;
    let w = spec.right.w;
    if !(e > -v && e < 0.0) {
        return Err(Error::EnergyOutOfRange {
            energy: e,
            lo: -v,
            hi: 0.0,
        });
    }
    let data = barrier_center(spec, e)?;
    if !data.valid_two_level {
        return Err(Error::InvalidTwoLevel);
    }
    let prefactor = 2.0 * spec.hbar * (-e).powf(0.25) * (2.0 * (v + e) * omega_l / (PI * v * w)).sqrt();
    Ok(prefactor * (-data.full_action / spec.hbar).exp())
}

/// Wronskian splitting 2 hbar^2 [psi_l psi_r' - psi_r psi_l'] at the grid
/// node nearest c, with centered differences. Magnitude only; downstream
/// formulas use delta^2.
pub fn wronskian_delta(psi_l: &BoundState, psi_r: &BoundState, c: f64, hbar: f64) -> Result<f64> {
    if !psi_l.grid.same_sampling(&psi_r.grid) {
        return Err(Error::GridMismatch);
    }
    let grid = &psi_l.grid;
    let i = ((c - grid.x_min) / grid.h - 1.0).round() as isize;
    let i = i.clamp(1, grid.n as isize - 2) as usize;
    let dr = (psi_r.psi[i + 1] - psi_r.psi[i - 1]) / (2.0 * grid.h);
    let dl = (psi_l.psi[i + 1] - psi_l.psi[i - 1]) / (2.0 * grid.h);
    let w = psi_l.psi[i] * dr - psi_r.psi[i] * dl;
    Ok((2.0 * hbar * hbar * w).abs())
}

/// Two-level spectrum for isolated levels E_l, E_r coupled by delta:
/// E_{1,2} = (E_l + E_r)/2 -/+ Delta/2 and the mixing angle with
/// tan(alpha) = x + sqrt(1 + x^2), x = (E_r - E_l)/delta.
pub fn two_level_spectrum(e_l: f64, e_r: f64, delta: f64) -> Result<TwoLevelResult> {
    if !(delta > 0.0) {
        return Err(Error::NonPositiveDelta { delta });
    }
    let det = e_r - e_l;
    let splitting = det.hypot(delta);
    let mean = 0.5 * (e_l + e_r);
    let x = det / delta;
    // same angle as arctan(x + sqrt(1+x^2)), without overflowing at large x
    let alpha = 0.25 * PI + 0.5 * x.atan();
    Ok(TwoLevelResult {
        e1: mean - 0.5 * splitting,
        e2: mean + 0.5 * splitting,
        delta,
        splitting,
        alpha,
        e_l,
        e_r,
    })
}

/// Mixed pair psi_1 = cos(a) psi_l + sin(a) psi_r, psi_2 = sin(a) psi_l -
/// cos(a) psi_r, each renormalized on the grid.
pub fn bilocalized_states(
    psi_l: &BoundState,
    psi_r: &BoundState,
    alpha: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !psi_l.grid.same_sampling(&psi_r.grid) {
        return Err(Error::GridMismatch);
    }
    let (ca, sa) = (alpha.cos(), alpha.sin());
    let h = psi_l.grid.h;
    let mix = |wl: f64, wr: f64| -> Vec<f64> {
        let mut v: Vec<f64> = psi_l
            .psi
            .iter()
            .zip(&psi_r.psi)
            .map(|(&l, &r)| wl * l + wr * r)
            .collect();
        let norm = (v.iter().map(|&x| x * x).sum::<f64>() * h).sqrt();
        for x in v.iter_mut() {
            *x /= norm;
        }
        v
    };
    Ok((mix(ca, sa), mix(sa, -ca)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::Grid;
    use crate::model::{PhysicalWellSpec, SquareWellSpec};

    fn demo_spec(b: f64, e_ref: f64, hbar: f64) -> DoubleWellSpec {
        let left = PhysicalWellSpec::harmonic_cap(1.5, 0.0, 2.0).unwrap();
        let right = SquareWellSpec::new(b, 0.5, 1.5).unwrap();
        let _ = e_ref;
        DoubleWellSpec::new(left, right, hbar).unwrap()
    }

    #[test]
    fn flat_segment_action() {
        let spec = demo_spec(3.0, -0.5, 0.15);
        let a = spec.left.a();
        let e = -0.5;
        let act = tunnel_action(&spec, e, a, 3.0).unwrap();
        assert!((act - (3.0 - a) * 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(tunnel_action(&spec, e, 2.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn center_defect_is_tiny() {
        let spec = demo_spec(3.0, -0.5, 0.15);
        let e = -0.5;
        let data = barrier_center(&spec, e).unwrap();
        let tp = model::turning_points(&spec, e).unwrap();
        let lhs = tunnel_action(&spec, e, tp.x_l, data.c).unwrap();
        let rhs = tunnel_action(&spec, e, data.c, tp.x_r).unwrap();
        assert!((lhs - rhs).abs() <= 1e-10, "defect {}", lhs - rhs);
        assert!(data.valid_two_level);
        assert!((lhs + rhs - data.full_action).abs() <= 1e-10);
    }

    #[test]
    fn center_closed_form() {
        // with a vertical right wall the equal-action point is
        // (a+b)/2 - S_l / (2 sqrt(-E))
        let spec = demo_spec(3.0, -0.5, 0.15);
        let e = -0.5;
        let data = barrier_center(&spec, e).unwrap();
        let a = spec.left.a();
        let closed = 0.5 * (a + 3.0) - data.s_l / (2.0 * (-e).sqrt());
        assert!((data.c - closed).abs() <= 1e-10, "{} vs {closed}", data.c);
    }

    #[test]
    fn delta_decreases_with_barrier_length() {
        let mut prev = f64::INFINITY;
        for b in [2.2, 2.6, 3.0, 3.4] {
            let spec = demo_spec(b, -0.5, 0.15);
            let d = wkb_delta(&spec, -0.5, 2.0).unwrap();
            assert!(d > 0.0 && d < prev, "delta({b}) = {d}");
            prev = d;
        }
    }

    #[test]
    fn spectrum_degenerate_case() {
        let r = two_level_spectrum(-1.0, -1.0, 1e-6).unwrap();
        assert!((r.e1 - (-1.0 - 5e-7)).abs() < 1e-18);
        assert!((r.e2 - (-1.0 + 5e-7)).abs() < 1e-18);
        assert!((r.alpha - PI / 4.0).abs() < 1e-15);
        assert_eq!(r.splitting, r.delta);
    }

    #[test]
    fn spectrum_half_angle_case() {
        // detuning equal to delta: splitting delta*sqrt2, alpha = 3 pi / 8;
        // a power of two keeps -1.0 + d exact so the detuning is d itself
        let d = 2f64.powi(-20);
        let r = two_level_spectrum(-1.0, -1.0 + d, d).unwrap();
        assert!((r.splitting - d * 2f64.sqrt()).abs() < 1e-20);
        assert!((r.alpha - 3.0 * PI / 8.0).abs() < 1e-14);
        assert!((r.alpha.tan() - (1.0 + 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn alpha_reflection() {
        for x in [0.0, 0.3, 2.0, 57.0, 1e4] {
            let plus = two_level_spectrum(0.0, x * 1e-8, 1e-8).unwrap().alpha;
            let minus = two_level_spectrum(0.0, -x * 1e-8, 1e-8).unwrap().alpha;
            assert!((plus + minus - PI / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn splitting_identity() {
        for (det, delta) in [(0.0, 1e-7), (3e-7, 1e-7), (-2e-5, 1e-9), (4.0, 0.5)] {
            let r = two_level_spectrum(-1.0, -1.0 + det, delta).unwrap();
            // the identity holds for the detuning as rounded into e_r - e_l,
            // not the literal det above
            let det = r.e_r - r.e_l;
            let lhs = r.splitting * r.splitting - r.delta * r.delta - det * det;
            assert!(lhs.abs() <= 4e-15 * r.splitting * r.splitting);
            assert!(r.e2 >= r.e1);
        }
    }

    #[test]
    fn rejects_nonpositive_delta() {
        assert!(matches!(
            two_level_spectrum(-1.0, -1.0, 0.0),
            Err(Error::NonPositiveDelta { .. })
        ));
    }

    #[test]
    fn wronskian_of_identical_states_vanishes() {
        let grid = Grid::new(0.0, 1.0, 101, 0.5).unwrap();
        let psi: Vec<f64> = (0..101).map(|i| ((i as f64) * 0.031).sin()).collect();
        let norm = (psi.iter().map(|&x| x * x).sum::<f64>() * grid.h).sqrt();
        let psi: Vec<f64> = psi.iter().map(|&x| x / norm).collect();
        let st = BoundState {
            energy: -1.0,
            psi,
            node_count: 0,
            grid,
        };
        let d = wronskian_delta(&st, &st.clone(), 0.5, 0.1).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn wronskian_grid_mismatch() {
        let g1 = Grid::new(0.0, 1.0, 101, 0.5).unwrap();
        let g2 = Grid::new(0.0, 1.0, 102, 0.5).unwrap();
        let mk = |g: Grid, n: usize| BoundState {
            energy: -1.0,
            psi: vec![1.0; n],
            node_count: 0,
            grid: g,
        };
        assert!(matches!(
            wronskian_delta(&mk(g1, 101), &mk(g2, 102), 0.5, 0.1),
            Err(Error::GridMismatch)
        ));
    }

    #[test]
    fn bilocalized_special_angles() {
        let grid = Grid::new(0.0, 1.0, 3, 0.5).unwrap();
        let mk = |v: [f64; 3]| {
            let norm = (v.iter().map(|&x| x * x).sum::<f64>() * grid.h).sqrt();
            BoundState {
                energy: -1.0,
                psi: v.iter().map(|&x| x / norm).collect(),
                node_count: 0,
                grid,
            }
        };
        let l = mk([1.0, 0.0, 0.0]);
        let r = mk([0.0, 0.0, 1.0]);
        let (p1, p2) = bilocalized_states(&l, &r, PI / 4.0).unwrap();
        assert!((p1[0] - p1[2]).abs() < 1e-15 && p1[0] > 0.0);
        assert!((p2[0] + p2[2]).abs() < 1e-15);
        let (q1, q2) = bilocalized_states(&l, &r, 0.0).unwrap();
        assert!((q1[0] - l.psi[0]).abs() < 1e-15 && q1[2] == 0.0);
        assert!((q2[2] + r.psi[2]).abs() < 1e-15 && q2[0] == 0.0);
    }
}
