//! Crate-wide error type.

use std::fmt;

/// Which feature dimension an extraction failure came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureDimension {
    CorrelationStrength,
    DomainCrossing,
    StakeholderMultiplicity,
    UncertaintyLevel,
}

impl fmt::Display for FeatureDimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            FeatureDimension::CorrelationStrength => "correlation_strength",
            FeatureDimension::DomainCrossing => "domain_crossing",
            FeatureDimension::StakeholderMultiplicity => "stakeholder_multiplicity",
            FeatureDimension::UncertaintyLevel => "uncertainty_level",
        };
        f.write_str(name)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller-supplied value violated a precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Two containers that must agree in shape do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// An iterative fit produced a non-finite loss or parameter.
    #[error("training diverged at epoch {epoch}: {message}")]
    TrainingDiverged { epoch: usize, message: String },

    /// A fit target carries no signal (e.g. constant labels for a classifier).
    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),

    /// A normalizing quantity is zero, leaving a ratio undefined (e.g. a
    /// target variable with zero entropy).
    #[error("degenerate target: {0}")]
    DegenerateTarget(String),

    /// Threshold adaptation was asked to update without evidence for both
    /// strategies inside the rolling window.
    #[error("insufficient evidence: {0}")]
    InsufficientEvidence(String),

    /// A serialized policy document failed structural validation.
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    /// Feature extraction failed for one dimension of one query.
    #[error("feature `{dimension}` extraction failed: {source}")]
    Feature {
        dimension: FeatureDimension,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub(crate) fn for_feature(self, dimension: FeatureDimension) -> Self {
        Error::Feature { dimension, source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
