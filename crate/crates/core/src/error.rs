use thiserror::Error;

pub type Result<T, E = LtsError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LtsError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("total dimension {dim} exceeds the configured maximum {max}")]
    DimensionOverflow { dim: usize, max: usize },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("operator is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystems(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no finite bound: {0}")]
    NoFiniteBound(String),

    #[error("quadrature did not converge (change {change:e} on doubling nodes)")]
    QuadratureNotConverged { change: f64 },

    #[error("integrator failed: {0}")]
    IntegrationFailure(String),

    #[error("invalid transition table: {0}")]
    InvalidTable(String),

    #[error("non-normalized distribution (total {total})")]
    NotNormalizedDistribution { total: f64 },

    #[error("Schmidt data invalid: {0}")]
    InvalidSchmidt(String),

    #[error("Schmidt form does not hold for this state (captured weight {weight})")]
    SchmidtFormViolated { weight: f64 },

    #[error("singular closed form: {0}")]
    Singular(String),
}

impl LtsError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        LtsError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
