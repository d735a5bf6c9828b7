use thiserror::Error;

/// Errors raised by the walk library.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("argument must be finite, got {0}")]
    NonFinite(f64),

    #[error("derivative order must be 1 or 2, got {0}")]
    InvalidDerivativeOrder(u32),

    #[error("quadrature order {order} is below the minimum {min}")]
    QuadratureOrder { order: usize, min: usize },

    #[error("half-width of the integration interval must be positive, got {0}")]
    NonPositiveHalfWidth(f64),

    #[error("invalid tree parameters: p = {p}, M = {m} (need p >= 2, M >= 1)")]
    InvalidTree { p: usize, m: usize },

    #[error("vertex count overflows the platform integer range for p = {p}, M = {m}")]
    VertexCountOverflow { p: usize, m: usize },

    #[error("index {index} out of range (size {size})")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("tree has {vertices} vertices, above the configured cap of {cap}")]
    CapExceeded { vertices: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigendecomposition did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("recurrence needs parameter index {needed}, only {available} supplied")]
    InsufficientParameters { needed: usize, available: usize },

    #[error("normalized recurrence undefined: omega_{index} = 0")]
    VanishingOmega { index: usize },

    #[error("x = {x} is too close to a pole of the Stieltjes transform")]
    PoleProximity { x: f64 },

    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),

    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),

    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
