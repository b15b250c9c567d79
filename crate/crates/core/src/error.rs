use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("revenue ordering violated: {0}")]
    InvalidOrdering(String),

    #[error("degenerate dynamics: {0}")]
    DegenerateDynamics(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("premise violated: {0}")]
    PremiseViolated(String),

    #[error("invalid threshold: {0}")]
    InvalidThreshold(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn require_finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite, got {v}")))
    }
}
