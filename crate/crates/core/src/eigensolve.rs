//! Finite-difference bound states of the discretized Schrodinger operator.
//!
//! Second-order three-point stencil with Dirichlet walls, Sturm-sequence
//! bisection for eigenvalues (bitwise-reproducible, resolves exponentially
//! close doublets), and inverse iteration for eigenvectors.

use crate::error::{Error, Result};
use crate::model::{DoubleWellSpec, PhysicalWellSpec};
use crate::par_map;
use crate::quad;
use crate::roots;
use std::f64::consts::PI;

/// Uniform grid with Dirichlet endpoints; the n interior nodes are
/// x_i = x_min + (i+1) h.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    /// Interior node count.
    pub n: usize,
    pub h: f64,
    /// Reporting split between the wells, strictly inside the barrier.
    pub c_split: f64,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n: usize, c_split: f64) -> Result<Self> {
        if !(x_max > x_min) || n == 0 {
            return Err(Error::InvalidSpec(format!(
                "grid needs x_max > x_min and n > 0, got [{x_min}, {x_max}], n = {n}"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            n,
            h: (x_max - x_min) / (n + 1) as f64,
            c_split,
        })
    }

    /// Builds a grid for `spec` resolving states near energy `e_ref`. The
    /// domain is the union of supports padded by `pad_kappa` decay lengths
    /// hbar/sqrt(-E); anything below 3 is too tight for the Dirichlet walls
    /// to be harmless, so the factor is clamped there.
    pub fn for_spec(
        spec: &DoubleWellSpec,
        e_ref: f64,
        h_target: f64,
        pad_kappa: f64,
    ) -> Result<Self> {
        if !(e_ref < 0.0) {
            return Err(Error::EnergyOutOfRange {
                energy: e_ref,
                lo: f64::NEG_INFINITY,
                hi: 0.0,
            });
        }
        if !(h_target > 0.0) {
            return Err(Error::InvalidSpec(format!("h_target must be > 0, got {h_target}")));
        }
        let pad = pad_kappa.max(3.0) * spec.hbar / (-e_ref).sqrt();
        let x_min = spec.left.x_left_support() - pad;
        let x_max = spec.right.b + spec.right.w + pad;
        let n = ((x_max - x_min) / h_target).ceil() as usize;
        let c_split = 0.5 * (spec.left.a() + spec.right.b);
        Grid::new(x_min, x_max, n.max(3), c_split)
    }

    /// Same endpoints, half the spacing.
    pub fn refine(&self) -> Self {
        let n = 2 * self.n + 1;
        Self {
            x_min: self.x_min,
            x_max: self.x_max,
            n,
            h: (self.x_max - self.x_min) / (n + 1) as f64,
            c_split: self.c_split,
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + (i + 1) as f64 * self.h
    }

    pub fn same_sampling(&self, other: &Grid) -> bool {
        self.x_min == other.x_min && self.n == other.n && self.h == other.h
    }
}

/// Symmetric tridiagonal operator: `diag` on the main diagonal, the constant
/// `off` on both off-diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretized {
    pub grid: Grid,
    pub hbar: f64,
    pub diag: Vec<f64>,
    pub off: f64,
}

/// One normalized bound state on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundState {
    pub energy: f64,
    pub psi: Vec<f64>,
    pub node_count: usize,
    pub grid: Grid,
}

/// Three-point discretization of -hbar^2 d^2/dx^2 + V.
pub fn discretize<F: Fn(f64) -> f64>(potential: F, grid: &Grid, hbar: f64) -> Discretized {
    let inv_h2 = hbar * hbar / (grid.h * grid.h);
    let diag = (0..grid.n)
        .map(|i| 2.0 * inv_h2 + potential(grid.x(i)))
        .collect();
    Discretized {
        grid: *grid,
        hbar,
        diag,
        off: -inv_h2,
    }
}

/// Discretization of the full double well. The square wall is sampled by its
/// cell average so levels vary continuously as the wall slides across nodes.
pub fn discretize_double_well(spec: &DoubleWellSpec, grid: &Grid) -> Discretized {
    let left = spec.left;
    let right = spec.right;
    let h = grid.h;
    discretize(
        move |x| left.eval(x) + right.cell_averaged(x, h),
        grid,
        spec.hbar,
    )
}

/// Discretization with only the physical well present.
pub fn discretize_isolated_left(spec: &DoubleWellSpec, grid: &Grid) -> Discretized {
    let left = spec.left;
    discretize(move |x| left.eval(x), grid, spec.hbar)
}

/// Discretization with only the probing well present.
pub fn discretize_isolated_right(spec: &DoubleWellSpec, grid: &Grid) -> Discretized {
    let right = spec.right;
    let h = grid.h;
    discretize(move |x| right.cell_averaged(x, h), grid, spec.hbar)
}

/// Number of eigenvalues strictly below `lambda` (Sturm sequence of the
/// shifted LDL^T factorization, with the usual pivot floor).
pub fn count_below(op: &Discretized, lambda: f64) -> usize {
    let e2 = op.off * op.off;
    let pivmin = (f64::MIN_POSITIVE * e2.max(1.0)).max(f64::MIN_POSITIVE);
    let mut p = op.diag[0] - lambda;
    if p.abs() < pivmin {
        p = -pivmin;
    }
    let mut count = usize::from(p < 0.0);
    for &d in &op.diag[1..] {
        p = d - lambda - e2 / p;
        if p.abs() < pivmin {
            p = -pivmin;
        }
        if p < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin_lower(op: &Discretized) -> f64 {
    op.diag.iter().cloned().fold(f64::INFINITY, f64::min) - 2.0 * op.off.abs()
}

/// Bisection to the eigenvalue of index `k` (0-based), given an enclosing
/// interval. Runs until the midpoint degenerates, i.e. to the last ulp.
fn eigenvalue_by_index(op: &Discretized, k: usize, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..160 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(op, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// All eigenvalues in (lo, hi), ascending.
pub fn eigenvalues_between(op: &Discretized, lo: f64, hi: f64) -> Vec<f64> {
    let k_lo = count_below(op, lo);
    let k_hi = count_below(op, hi);
    par_map((k_lo..k_hi).collect(), |k| eigenvalue_by_index(op, k, lo, hi))
}

/// Tridiagonal solve of (op - lambda) x = b with partial pivoting; the
/// factorization tolerates the near-singular shifts inverse iteration feeds
/// it. Overwrites and returns `b`.
fn solve_shifted(op: &Discretized, lambda: f64, mut b: Vec<f64>) -> Vec<f64> {
    let n = op.diag.len();
    let e = op.off;
    let mut d: Vec<f64> = op.diag.iter().map(|&x| x - lambda).collect();
    let mut dl = vec![e; n.saturating_sub(1)];
    let mut du = vec![e; n.saturating_sub(1)];
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut swapped = vec![false; n.saturating_sub(1)];
    let scale = op.diag.iter().fold(0.0f64, |m, &x| m.max(x.abs())) + 2.0 * e.abs();
    let tiny = scale * 1e-300;
    for i in 0..n.saturating_sub(1) {
        if d[i].abs() >= dl[i].abs() {
            if d[i].abs() < tiny {
                d[i] = if d[i] < 0.0 { -tiny } else { tiny };
            }
            let fact = dl[i] / d[i];
            dl[i] = fact;
            d[i + 1] -= fact * du[i];
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
    if d[n - 1].abs() < tiny {
        d[n - 1] = if d[n - 1] < 0.0 { -tiny } else { tiny };
    }
    for i in 0..n.saturating_sub(1) {
        if swapped[i] {
            b.swap(i, i + 1);
        }
        let bi = b[i];
        b[i + 1] -= dl[i] * bi;
    }
    b[n - 1] /= d[n - 1];
    if n >= 2 {
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
    b
}

fn grid_norm(psi: &[f64], h: f64) -> f64 {
    (psi.iter().map(|&x| x * x).sum::<f64>() * h).sqrt()
}

fn orthogonalize(psi: &mut [f64], others: &[BoundState], h: f64) {
    // two passes of modified Gram-Schmidt keep near-degenerate pairs clean
    for _ in 0..2 {
        for other in others {
            let proj: f64 = psi
                .iter()
                .zip(&other.psi)
                .map(|(&a, &b)| a * b)
                .sum::<f64>()
                * h;
            for (a, &b) in psi.iter_mut().zip(&other.psi) {
                *a -= proj * b;
            }
        }
    }
}

/// Deterministic dense-spectrum start vector for inverse iteration.
fn start_vector(n: usize, k: usize) -> Vec<f64> {
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15 ^ (k as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    (0..n)
        .map(|_| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

fn count_nodes(psi: &[f64]) -> usize {
    let maxabs = psi.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    let floor = maxabs * 1e-12;
    let mut nodes = 0;
    let mut last_sign = 0i8;
    for &x in psi {
        if x.abs() <= floor {
            continue;
        }
        let s = if x > 0.0 { 1 } else { -1 };
        if last_sign != 0 && s != last_sign {
            nodes += 1;
        }
        last_sign = s;
    }
    nodes
}

fn fix_sign(psi: &mut [f64]) {
    let maxabs = psi.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    if let Some(&first) = psi.iter().find(|x| x.abs() >= 0.01 * maxabs) {
        if first < 0.0 {
            for x in psi.iter_mut() {
                *x = -*x;
            }
        }
    }
}

fn eigenvector(op: &Discretized, lambda: f64, k: usize, others: &[BoundState]) -> Vec<f64> {
    let n = op.diag.len();
    let h = op.grid.h;
    let mut psi = start_vector(n, k);
    let s = grid_norm(&psi, h);
    for x in psi.iter_mut() {
        *x /= s;
    }
    for _ in 0..4 {
        psi = solve_shifted(op, lambda, psi);
        let s = grid_norm(&psi, h);
        for x in psi.iter_mut() {
            *x /= s;
        }
        orthogonalize(&mut psi, others, h);
        let s = grid_norm(&psi, h);
        if s > 0.0 {
            for x in psi.iter_mut() {
                *x /= s;
            }
        }
    }
    fix_sign(&mut psi);
    psi
}

/// The lowest `count` bound states (E < 0), ascending, normalized to unit
/// L2 norm on the grid.
pub fn solve_bound_states(op: &Discretized, count: usize) -> Result<Vec<BoundState>> {
    let found = count_below(op, 0.0);
    if found < count {
        return Err(Error::NotEnoughBoundStates {
            requested: count,
            found,
        });
    }
    let lo = gershgorin_lower(op);
    let lambdas = par_map((0..count).collect(), |k| eigenvalue_by_index(op, k, lo, 0.0));
    let mut states: Vec<BoundState> = Vec::with_capacity(count);
    for (k, &lambda) in lambdas.iter().enumerate() {
        let psi = eigenvector(op, lambda, k, &states);
        let node_count = count_nodes(&psi);
        states.push(BoundState {
            energy: lambda,
            psi,
            node_count,
            grid: op.grid,
        });
    }
    Ok(states)
}

/// L2 inner product of two states on the same grid.
pub fn overlap(a: &BoundState, b: &BoundState) -> Result<f64> {
    if !a.grid.same_sampling(&b.grid) {
        return Err(Error::GridMismatch);
    }
    Ok(a.psi.iter().zip(&b.psi).map(|(&x, &y)| x * y).sum::<f64>() * a.grid.h)
}

/// Classical oscillation frequency of the physical well at energy E,
/// omega = 2 pi / T with T = int dx / sqrt(E - V) over one libration.
pub fn classical_frequency(left: &PhysicalWellSpec, e: f64) -> Result<f64> {
    if !(e > -left.depth && e < 0.0) {
        return Err(Error::NoTurningPoint { energy: e });
    }
    let well = *left;
    let f = |x: f64| well.eval(x) - e;
    let x_plus = roots::bisect_newton(f, |x| well.slope(x), well.center, well.a(), 1e-14)?;
    // both families are even about the center
    let x_minus = 2.0 * well.center - x_plus;
    let period = quad::inv_sqrt_integral(
        move |x| e - well.eval(x),
        x_minus,
        x_plus,
        true,
        true,
        quad::DEFAULT_TOL,
    )?;
    Ok(2.0 * PI / period)
}
