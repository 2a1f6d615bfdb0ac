use thiserror::Error;

use crate::expr::ExprError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationKind {
    NonHermitian,
    TraceNotOne,
    NonPsd,
    /// A derivative matrix that is not Hermitian or not traceless.
    BadDerivative,
}

impl std::fmt::Display for ValidationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ValidationKind::NonHermitian => "non-hermitian",
            ValidationKind::TraceNotOne => "trace != 1",
            ValidationKind::NonPsd => "non-psd",
            ValidationKind::BadDerivative => "derivative not hermitian/traceless",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("model file: {0}")]
    Format(String),
    /// `row` and `col` are 1-based matrix indices.
    #[error("entry ({row},{col}): {source}")]
    Entry {
        row: usize,
        col: usize,
        #[source]
        source: ExprError,
    },
    #[error("{kind} (deviation {deviation:.3e})")]
    Validation {
        kind: ValidationKind,
        deviation: f64,
    },
    #[error("unknown built-in model `{0}`")]
    UnknownModel(String),
    #[error("expected {expected} coordinates, got {got}")]
    Arity { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("eigensolver failed: {0}")]
    EigensolverFailure(String),
    #[error("rank change: {0}")]
    RankChange(String),
    #[error("degenerate metric (min eigenvalue {min_eigenvalue:.3e})")]
    DegenerateMetric { min_eigenvalue: f64 },
    #[error("state is not pure (rank {rank})")]
    NotPure { rank: usize },
    #[error("finite-difference step {0:e} is below 1e-10")]
    StepTooSmall(f64),
    #[error("degenerate spectrum (gap {gap:.3e})")]
    DegenerateSpectrum { gap: f64 },
    #[error("{check} residual {residual:.3e} exceeds {tol:.1e}")]
    Residual {
        check: &'static str,
        residual: f64,
        tol: f64,
    },
    #[error("expected {expected} parameters, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("no feasible v2 for v1 = {v1}")]
    NoSolution { v1: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("at {coords:?}: {source}")]
    AtNode {
        coords: Vec<f64>,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl ExprError {
    /// Stable machine-readable name.
    pub fn kind(&self) -> &'static str {
        match self {
            ExprError::Syntax { .. } => "SyntaxError",
            ExprError::UnknownIdentifier { .. } => "UnknownIdentifier",
            ExprError::Domain { .. } => "DomainError",
            ExprError::Arity { .. } => "ArityError",
            ExprError::MissingParameter(_) => "MissingParameter",
        }
    }
}

impl ModelError {
    /// Stable machine-readable name.
    pub fn kind(&self) -> &'static str {
        match self {
            ModelError::Format(_) => "FormatError",
            ModelError::Entry { source, .. } => source.kind(),
            ModelError::Validation { .. } => "ValidationError",
            ModelError::UnknownModel(_) => "UnknownModel",
            ModelError::Arity { .. } => "ArityError",
        }
    }
}

impl Error {
    /// Stable machine-readable name; looks through [`Error::AtNode`].
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Model(m) => m.kind(),
            Error::EigensolverFailure(_) => "EigensolverFailure",
            Error::RankChange(_) => "RankChangeError",
            Error::DegenerateMetric { .. } => "DegenerateMetric",
            Error::NotPure { .. } => "NotPure",
            Error::StepTooSmall(_) => "StepTooSmall",
            Error::DegenerateSpectrum { .. } => "DegenerateSpectrum",
            Error::Residual { .. } => "ResidualError",
            Error::WrongArity { .. } => "WrongArity",
            Error::NoSolution { .. } => "NoSolution",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::AtNode { source, .. } => source.kind(),
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_look_through_wrappers() {
        let inner = Error::RankChange("x".into());
        let wrapped = Error::AtNode {
            coords: vec![0.0],
            source: Box::new(inner),
        };
        assert_eq!(wrapped.kind(), "RankChangeError");
        let validation = Error::from(ModelError::Validation {
            kind: ValidationKind::NonPsd,
            deviation: 0.1,
        });
        assert_eq!(validation.kind(), "ValidationError");
    }
}
