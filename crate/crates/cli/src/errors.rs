//! Exit-code discipline: 0 success, 1 user/config error, 2 data error,
//! 3 internal error.

use playerval::artifact::ArtifactError;
use playerval::dataset::DatasetError;
use playerval::evaltune::{EvalError, FitError};
use playerval::explain::ExplainError;
use playerval::selection::SelectionError;
use playerval::transform::TransformError;
use playerval::trees::TreesError;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable config, missing input paths.
    Usage(anyhow::Error),
    /// The input data violates a contract (schema, emptiness, domain).
    Data(anyhow::Error),
    /// Bugs and environment failures (serialization, write errors).
    Internal(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Usage(e) | CliError::Data(e) | CliError::Internal(e) => format!("{e:#}"),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Usage(e.into())
}

pub fn internal(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Internal(e.into())
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io { .. } => CliError::Usage(e.into()),
            DatasetError::InvalidFraction(_) => CliError::Usage(e.into()),
            _ => CliError::Data(e.into()),
        }
    }
}

impl From<TransformError> for CliError {
    fn from(e: TransformError) -> Self {
        CliError::Data(e.into())
    }
}

impl From<TreesError> for CliError {
    fn from(e: TreesError) -> Self {
        match e {
            TreesError::InvalidParams(_) => CliError::Usage(e.into()),
            TreesError::EmptyTraining => CliError::Data(e.into()),
            _ => CliError::Internal(e.into()),
        }
    }
}

impl From<SelectionError> for CliError {
    fn from(e: SelectionError) -> Self {
        match e {
            SelectionError::InvalidConfig(_) => CliError::Usage(e.into()),
            SelectionError::TooFewRows { .. } | SelectionError::TooFewFeatures { .. } => {
                CliError::Data(e.into())
            }
            _ => CliError::Internal(e.into()),
        }
    }
}

impl From<ExplainError> for CliError {
    fn from(e: ExplainError) -> Self {
        match e {
            ExplainError::UnknownFeature { .. } | ExplainError::RowOutOfRange { .. } => {
                CliError::Usage(e.into())
            }
            _ => CliError::Internal(e.into()),
        }
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        match e {
            FitError::Trees(inner) => inner.into(),
            FitError::Transform(inner) => inner.into(),
            FitError::Dataset(inner) => inner.into(),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::BadK { .. }
            | EvalError::UnknownAxis { .. }
            | EvalError::EmptyAxis(_) => CliError::Usage(e.into()),
            EvalError::Fold { .. } | EvalError::ZeroVariance => CliError::Data(e.into()),
            EvalError::Fit(inner) => inner.into(),
            EvalError::LengthMismatch { .. } => CliError::Internal(e.into()),
        }
    }
}

impl From<ArtifactError> for CliError {
    fn from(e: ArtifactError) -> Self {
        match e {
            ArtifactError::Io { .. } => CliError::Usage(e.into()),
            _ => CliError::Data(e.into()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Internal(e.into())
    }
}
