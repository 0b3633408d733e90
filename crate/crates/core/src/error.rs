use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty sample")]
    EmptySample,
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("length mismatch: x has {x} rows, y has {y}")]
    LengthMismatch { x: usize, y: usize },
    #[error("degenerate: no score functions")]
    DegenerateSample,
    #[error("degenerate scale")]
    DegenerateScale,
    #[error("zero variance")]
    ZeroVariance,
    #[error("probability {0} outside (0,1)")]
    ProbabilityOutOfRange(f64),
    #[error("score index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("degree m must be >= 1")]
    InvalidDegree,
    #[error("zero-mass cell in conditioning")]
    ZeroMassCell,
    #[error("need at least two columns")]
    NotEnoughColumns,
    #[error("response is not binary")]
    NotBinary,
    #[error("perfect separation: {0}")]
    PerfectSeparation(String),
    #[error("{what} did not converge in {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("moment matching infeasible")]
    MomentInfeasible,
    #[error("start support mismatch: start cdf is degenerate at data point {0}")]
    StartSupportMismatch(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
