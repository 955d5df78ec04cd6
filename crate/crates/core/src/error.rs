use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong inside the solver and certifier.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("need at least {min} bodies, got {got}")]
    TooFewBodies { min: usize, got: usize },

    #[error("mass {index} is {value}; physical runs need every mass > 0")]
    NonPositiveMass { index: usize, value: f64 },

    #[error("mass {index} is zero")]
    ZeroMass { index: usize },

    #[error("total mass is zero")]
    ZeroTotalMass,

    #[error("potential exponent must be finite and nonzero, got {0}")]
    InvalidExponent(f64),

    #[error("bodies {i} and {j} coincide")]
    CoincidentBodies { i: usize, j: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("matrix has rank below n-1; configuration is not Dziobek-generic")]
    RankDeficient,

    #[error("kernel vector is degenerate: {0}")]
    DegenerateDelta(&'static str),

    #[error("veronese map of the zero vector is undefined")]
    ZeroVector,

    #[error("distances are not embeddable in dimension {target_dim}: {reason}")]
    NotEmbeddable { target_dim: usize, reason: String },

    #[error("shape entry ({i},{j}) gives 1+s = {value} <= 0; no physical distance exists")]
    NonPositiveShape { i: usize, j: usize, value: f64 },

    #[error("newton did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("iterate collapsed: bodies {i} and {j} at distance {distance:e}")]
    CollapseDetected { i: usize, j: usize, distance: f64 },

    #[error("no sign change found for the collinear ordering with middle body {middle}")]
    OracleRootNotFound { middle: usize },

    #[error("affine dimension is {measured}, expected {expected}")]
    WrongDimension { measured: usize, expected: usize },

    #[error("unsupported case: {0}")]
    UnsupportedCase(String),

    #[error("invalid options: {0}")]
    InvalidOptions(String),
}
