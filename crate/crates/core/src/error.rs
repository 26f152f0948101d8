//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum SleError {
    #[error("kappa must be positive, got {0}")]
    NonPositiveKappa(f64),

    #[error("charge convention mismatch for (n={n}, m={m}): {detail}")]
    ConventionMismatch { n: usize, m: usize, detail: String },

    #[error("invalid link-pattern shape: need 0 <= 2m <= n, got n={n}, m={m}")]
    BadPatternShape { n: usize, m: usize },

    #[error("invalid boundary configuration: {0}")]
    BadConfiguration(String),

    #[error("contour geometry error: {0}")]
    Geometry(String),

    #[error("quadrature did not reach tolerance {tol:.2e}; best error estimate {best:.2e}")]
    NonConvergence { tol: f64, best: f64 },

    #[error("singular input: {0}")]
    SingularInput(String),

    #[error("slit reduction unavailable for exponents p={p}, q={q} (need both > -1)")]
    ReductionUnavailable { p: f64, q: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error(
        "integral vanishes within quadrature noise: |value| = {value:.3e} <= floor {floor:.3e}; {hint}"
    )]
    VanishingIntegral { value: f64, floor: f64, hint: String },

    #[error("stencil footprint left the chamber for coordinate {index}")]
    StencilFootprint { index: usize },

    #[error("driving-point ordering violated after {halvings} step halvings")]
    OrderingViolation { halvings: u32 },

    #[error("conformal map is not admissible here: {0}")]
    BadConformalMap(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, SleError>;
