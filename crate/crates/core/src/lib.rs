//! Semiclassical toolkit for a 1D double well: a smooth physical well probed
//! by a movable square well through a tunneling barrier.
//!
//! The crate covers the full pipeline: well geometry and turning points,
//! square-well level quantization, finite-difference eigensolves, WKB and
//! Wronskian splitting estimates, two-level and grid time evolution, and
//! resonance scans over the probe parameters.
//!
//! With the default `parallel` feature the scan and batch eigensolve loops
//! run on rayon; without it they fall back to plain sequential iteration
//! with identical output.

pub mod dynamics;
pub mod eigensolve;
pub mod error;
pub mod model;
pub mod quad;
pub mod roots;
pub mod scanner;
pub mod semiclassic;
pub mod squarewell;

pub use error::{Error, Result};
pub use model::{
    check_separation, eval_potential, turning_points, DoubleWellSpec, PhysicalWellSpec,
    SeparationCheck, SquareWellSpec, TurningPoints, WellFamily,
};

/// Maps `op` over `items`, in parallel when the `parallel` feature is on.
/// Output order matches input order in both builds, so results are
/// bit-identical regardless of how the work is chunked.
pub(crate) fn par_map<T, U, F>(items: Vec<T>, op: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.into_par_iter().map(op).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(op).collect()
    }
}
