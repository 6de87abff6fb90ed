//! Time evolution: the closed-form two-level solution and a unitary grid
//! propagator that serves as its independent check.

use crate::eigensolve::{BoundState, Discretized};
use crate::error::{Error, Result};
use crate::semiclassic::TwoLevelResult;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::{self, Write};

/// Occupation history of the two wells.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationTrace {
    pub times: Vec<f64>,
    pub p_l: Vec<f64>,
    pub p_r: Vec<f64>,
    /// Wavefunction norm at each sample; identically 1 for the analytic
    /// two-level solution.
    pub norms: Vec<f64>,
    /// Beat period 2 pi hbar / Delta (twice the measured peak time for grid
    /// runs).
    pub period: f64,
    /// Time of maximal right-well occupation, pi hbar / Delta on resonance.
    pub transfer_time: f64,
}

/// Amplitudes on (psi_l, psi_r) at time t for the initial state psi_l:
///
///   amp_l = e^{t E1/(i hbar)} cos^2(a) + e^{t E2/(i hbar)} sin^2(a)
///   amp_r = cos(a) sin(a) (e^{t E2/(i hbar)} - e^{t E1/(i hbar)})
pub fn two_level_evolve(
    result: &TwoLevelResult,
    alpha: f64,
    t: f64,
    hbar: f64,
) -> (Complex64, Complex64) {
    let ph1 = Complex64::from_polar(1.0, -result.e1 * t / hbar);
    let ph2 = Complex64::from_polar(1.0, -result.e2 * t / hbar);
    let (ca, sa) = (alpha.cos(), alpha.sin());
    let amp_l = ph1 * ca * ca + ph2 * sa * sa;
    let amp_r = (ph2 - ph1) * ca * sa;
    (amp_l, amp_r)
}

/// Closed-form occupations
///
///   P_l(t) = cos^4 a + sin^4 a + 2 cos^2 a sin^2 a cos(Delta t / hbar)
///   P_r(t) = 2 cos^2 a sin^2 a (1 - cos(Delta t / hbar))
pub fn occupation_probabilities(
    result: &TwoLevelResult,
    alpha: f64,
    times: &[f64],
    hbar: f64,
) -> OccupationTrace {
    let (c2, s2) = (alpha.cos().powi(2), alpha.sin().powi(2));
    let cross = 2.0 * c2 * s2;
    let omega = result.splitting / hbar;
    let mut p_l = Vec::with_capacity(times.len());
    let mut p_r = Vec::with_capacity(times.len());
    for &t in times {
        let cos = (omega * t).cos();
        p_l.push(c2 * c2 + s2 * s2 + cross * cos);
        p_r.push(cross * (1.0 - cos));
    }
    OccupationTrace {
        times: times.to_vec(),
        p_l,
        p_r,
        norms: vec![1.0; times.len()],
        period: 2.0 * PI * hbar / result.splitting,
        transfer_time: PI * hbar / result.splitting,
    }
}

/// Peak transfer probability delta^2 / (delta^2 + detuning^2).
pub fn p_r_max(delta: f64, detuning: f64) -> f64 {
    let d2 = delta * delta;
    d2 / (d2 + detuning * detuning)
}

/// Complex tridiagonal LU with partial pivoting, factored once per run.
struct CayleyFactor {
    d: Vec<Complex64>,
    dl: Vec<Complex64>,
    du: Vec<Complex64>,
    du2: Vec<Complex64>,
    swapped: Vec<bool>,
}

impl CayleyFactor {
    fn new(mut d: Vec<Complex64>, off: Complex64) -> Self {
        let n = d.len();
        let mut dl = vec![off; n.saturating_sub(1)];
        let mut du = vec![off; n.saturating_sub(1)];
        let mut du2 = vec![Complex64::new(0.0, 0.0); n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].norm_sqr() >= dl[i].norm_sqr() {
                let fact = dl[i] / d[i];
                dl[i] = fact;
                let dui = du[i];
                d[i + 1] -= fact * dui;
            } else {
                swapped[i] = true;
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let t = du[i];
                du[i] = d[i + 1];
                d[i + 1] = t - fact * d[i + 1];
                if i + 1 < n - 1 {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
            }
        }
        Self {
            d,
            dl,
            du,
            du2,
            swapped,
        }
    }

    fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = b.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            let bi = b[i];
            b[i + 1] -= self.dl[i] * bi;
        }
        b[n - 1] /= self.d[n - 1];
        if n >= 2 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// Unitary implicit propagation of `psi0` under `op` with the trapezoidal
/// Cayley stepper
///
///   (1 + i dt H / (2 hbar)) psi(t+dt) = (1 - i dt H / (2 hbar)) psi(t)
///
/// recording left and right occupations split at `c_split`.
pub fn grid_propagate(
    op: &Discretized,
    psi0: &BoundState,
    t_final: f64,
    steps: usize,
    c_split: f64,
) -> Result<OccupationTrace> {
    if !psi0.grid.same_sampling(&op.grid) {
        return Err(Error::GridMismatch);
    }
    if steps == 0 || !(t_final > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "propagation needs steps > 0 and t_final > 0, got {steps}, {t_final}"
        )));
    }
    let n = op.diag.len();
    let h = op.grid.h;
    let dt = t_final / steps as f64;
    let z = Complex64::new(0.0, 0.5 * dt / op.hbar);
    let a_diag: Vec<Complex64> = op.diag.iter().map(|&d| 1.0 + z * d).collect();
    let lu = CayleyFactor::new(a_diag, z * op.off);
    let b_diag: Vec<Complex64> = op.diag.iter().map(|&d| 1.0 - z * d).collect();
    let b_off = -z * op.off;

    let split = (0..n)
        .find(|&i| op.grid.x(i) >= c_split)
        .unwrap_or(n);
    let mut psi: Vec<Complex64> = psi0.psi.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];

    let mut times = Vec::with_capacity(steps + 1);
    let mut p_l = Vec::with_capacity(steps + 1);
    let mut p_r = Vec::with_capacity(steps + 1);
    let mut norms = Vec::with_capacity(steps + 1);
    let mut record = |psi: &[Complex64], t: f64| {
        let left: f64 = psi[..split].iter().map(|c| c.norm_sqr()).sum::<f64>() * h;
        let right: f64 = psi[split..].iter().map(|c| c.norm_sqr()).sum::<f64>() * h;
        times.push(t);
        p_l.push(left);
        p_r.push(right);
        norms.push((left + right).sqrt());
    };
    record(&psi, 0.0);

    for step in 1..=steps {
        rhs[0] = b_diag[0] * psi[0] + b_off * psi[1];
        for i in 1..n - 1 {
            rhs[i] = b_diag[i] * psi[i] + b_off * (psi[i - 1] + psi[i + 1]);
        }
        rhs[n - 1] = b_diag[n - 1] * psi[n - 1] + b_off * psi[n - 2];
        lu.solve_in_place(&mut rhs);
        std::mem::swap(&mut psi, &mut rhs);
        record(&psi, step as f64 * dt);
    }

    let drift = norms
        .iter()
        .map(|&s| (s - 1.0).abs())
        .fold(0.0f64, f64::max);
    if drift > 1e-9 {
        return Err(Error::StabilityBudgetExceeded { drift });
    }

    let transfer_time = refined_peak_time(&times, &p_r);
    Ok(OccupationTrace {
        times,
        p_l,
        p_r,
        norms,
        period: 2.0 * transfer_time,
        transfer_time,
    })
}

/// Time of the first global maximum of the trace, refined by a three-point
/// parabola.
fn refined_peak_time(times: &[f64], values: &[f64]) -> f64 {
    let mut i0 = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[i0] {
            i0 = i;
        }
    }
    if i0 == 0 || i0 + 1 >= values.len() {
        return times[i0];
    }
    let (ym, y0, yp) = (values[i0 - 1], values[i0], values[i0 + 1]);
    let denom = ym - 2.0 * y0 + yp;
    if denom.abs() < 1e-300 {
        return times[i0];
    }
    let dt = times[i0] - times[i0 - 1];
    times[i0] + 0.5 * dt * (ym - yp) / denom
}

/// Writes a trace as CSV with columns t, P_l, P_r, norm.
pub fn write_csv<W: Write>(trace: &OccupationTrace, mut out: W) -> io::Result<()> {
    writeln!(out, "t,P_l,P_r,norm")?;
    for i in 0..trace.times.len() {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            trace.times[i], trace.p_l[i], trace.p_r[i], trace.norms[i]
        )?;
    }
    Ok(())
}
