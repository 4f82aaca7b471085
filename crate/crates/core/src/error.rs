//! Error types shared by every module.

use thiserror::Error;

/// Which pointwise condition of the conic domain a vector failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeCondition {
    /// `-omega(v) > 0` fails at a Critical or Strong point.
    WindAlignment,
    /// `h(v,v) >= 0` fails at a Strong point.
    HSign,
    /// The zero vector away from the Critical region.
    ZeroVector,
}

impl std::fmt::Display for ConeCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConeCondition::WindAlignment => write!(f, "-omega(v) > 0 violated"),
            ConeCondition::HSign => write!(f, "h(v,v) >= 0 violated"),
            ConeCondition::ZeroVector => write!(f, "zero vector at a non-critical point"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("coordinate {axis} = {value} outside [{lo}, {hi}]")]
    OutOfBounds { axis: usize, value: f64, lo: f64, hi: f64 },
    #[error("point {0:?} is excluded from the manifold")]
    ExcludedPoint(Vec<f64>),
    #[error("vector outside A∪A_E ({0})")]
    OutsideCone(ConeCondition),
    #[error("base point is not in the mild region")]
    NotMild,
    #[error("non-finite value while evaluating {0}")]
    NonFinite(&'static str),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(#[from] DomainError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("singular metric at {0:?}")]
    SingularMetric(Vec<f64>),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("expression error: {0}")]
    Expr(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn is_domain(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::SingularMetric(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
