use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("no turning point: E = {energy} is outside the open well range")]
    NoTurningPoint { energy: f64 },
    #[error("could not bracket the turning point (degenerate well slope)")]
    NonMonotoneSlope,
    #[error("root bracket failure: no sign change on [{lo}, {hi}]")]
    RootBracketFailure { lo: f64, hi: f64 },
    #[error("energy {energy} outside the admissible range ({lo}, {hi})")]
    EnergyOutOfRange { energy: f64, lo: f64, hi: f64 },
    #[error("no probing-well depth reaches the requested level")]
    NoDepthRoot,
    #[error("operator has only {found} bound states, {requested} requested")]
    NotEnoughBoundStates { requested: usize, found: usize },
    #[error("barrier pierced: V(x) <= E at x = {x}")]
    BarrierPierced { x: f64 },
    #[error("two-level reduction invalid: barrier center falls outside (a, b)")]
    InvalidTwoLevel,
    #[error("states live on different grids")]
    GridMismatch,
    #[error("coupling delta must be positive, got {delta}")]
    NonPositiveDelta { delta: f64 },
    #[error("propagation norm drift {drift:.3e} exceeds the stability budget")]
    StabilityBudgetExceeded { drift: f64 },
    #[error("well separation condition violated (margin {margin:.6e})")]
    ValidityViolated { margin: f64 },
    #[error("no resonance peak found in the scanned range")]
    NoPeakFound,
    #[error("first-peak inversion requires the k = 0 peak, got k = {k}")]
    NotFirstPeak { k: usize },
    #[error("quadrature failed to converge on [{lo}, {hi}]")]
    QuadratureNonConvergent { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
