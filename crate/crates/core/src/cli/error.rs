use serde::Serialize;

use crate::dataset::DatasetError;
use crate::demography::DemographyError;
use crate::hinge::HingeError;
use crate::markov::MarkovError;
use crate::nullmodel::NullModelError;
use crate::sde::SdeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// Outputs of a rerun differ from the recorded digests.
    Mismatch,
    /// Command line or config does not match the subcommand's schema.
    Schema,
    /// Missing, unreadable or invalid input.
    Input,
    /// The computation itself failed.
    Numerical,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Mismatch => 1,
            ErrorKind::Schema => 2,
            ErrorKind::Input => 3,
            ErrorKind::Numerical => 4,
        }
    }
}

/// Error reported on stderr as one JSON object.
#[derive(Debug, Clone, PartialEq, Serialize, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

impl CliError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        CliError { kind, message: message.into(), path: None }
    }

    pub fn schema(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Schema, message)
    }

    pub fn input(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Input, message)
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Numerical, message)
    }

    pub fn at(mut self, path: impl Into<String>) -> Self {
        self.path = Some(path.into());
        self
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&serde_json::json!({ "error": self })).expect("serialisable")
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        let path = match &e {
            DatasetError::Io { path, .. } => Some(path.clone()),
            _ => None,
        };
        let kind = match e {
            DatasetError::ZeroVariance | DatasetError::DegenerateX => ErrorKind::Numerical,
            _ => ErrorKind::Input,
        };
        CliError { kind, message: e.to_string(), path }
    }
}

impl From<MarkovError> for CliError {
    fn from(e: MarkovError) -> Self {
        let kind = match e {
            MarkovError::NoUniqueStationary | MarkovError::UnstableStep { .. } => ErrorKind::Numerical,
            _ => ErrorKind::Input,
        };
        CliError::new(kind, e.to_string())
    }
}

impl From<SdeError> for CliError {
    fn from(e: SdeError) -> Self {
        let kind = match e {
            SdeError::NoSupport | SdeError::Unsupported(..) | SdeError::NoUsablePairs | SdeError::GridTooSmall { .. } => {
                ErrorKind::Numerical
            }
            _ => ErrorKind::Input,
        };
        CliError::new(kind, e.to_string())
    }
}

impl From<NullModelError> for CliError {
    fn from(e: NullModelError) -> Self {
        match e {
            NullModelError::Markov(m) => m.into(),
            NullModelError::Dataset(d) => d.into(),
            e => CliError::input(e.to_string()),
        }
    }
}

impl From<HingeError> for CliError {
    fn from(e: HingeError) -> Self {
        CliError::new(if matches!(e, HingeError::DegenerateX) { ErrorKind::Numerical } else { ErrorKind::Input }, e.to_string())
    }
}

impl From<DemographyError> for CliError {
    fn from(e: DemographyError) -> Self {
        let kind = match e {
            DemographyError::NotPrimitive
            | DemographyError::NoConvergence { .. }
            | DemographyError::NegativeInfinity(_)
            | DemographyError::StateBudgetExceeded(_) => ErrorKind::Numerical,
            _ => ErrorKind::Input,
        };
        CliError::new(kind, e.to_string())
    }
}
