use std::path::PathBuf;

use minimax_sampler::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{message}")]
    Validation { code: &'static str, message: String },
    #[error("{}: {source}", path.display())]
    Input { path: PathBuf, source: CoreError },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn validation(code: &'static str, message: impl Into<String>) -> Self {
        CliError::Validation {
            code,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Internal(_) => 2,
            _ => 1,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Validation { code, .. } => code,
            CliError::Input { source, .. } | CliError::Core(source) => core_code(source),
            CliError::Read { .. } => "UnreadableInput",
            CliError::Internal(_) => "Internal",
        }
    }
}

pub(crate) fn core_code(err: &CoreError) -> &'static str {
    match err {
        CoreError::EmptyPopulation => "EmptyPopulation",
        CoreError::InvertedInterval(_) => "InvertedInterval",
        CoreError::DuplicateId(_) => "DuplicateId",
        CoreError::NonFiniteBound(_) => "NonFiniteBound",
        CoreError::DegenerateUnit(_) => "DegenerateUnit",
        CoreError::LengthMismatch { .. } => "LengthMismatch",
        CoreError::DimensionMismatch { .. } => "DimensionMismatch",
        CoreError::InvalidProbability { .. } => "InvalidProbability",
        CoreError::ZeroInclusion(_) => "ZeroInclusion",
        CoreError::InvalidDesign(_) => "InvalidDesign",
        CoreError::EnumerationTooLarge { .. } => "EnumerationTooLarge",
        CoreError::PopulationTooLarge { .. } => "PopulationTooLarge",
        CoreError::BudgetOutOfRange { .. } => "BudgetOutOfRange",
        CoreError::InfeasibleCandidate(_) => "InfeasibleCandidate",
        CoreError::MissingValue(_) => "MissingValue",
        CoreError::IndexOutOfRange { .. } => "IndexOutOfRange",
        CoreError::NonpositiveScale(_) => "NonpositiveScale",
        CoreError::IncompleteProfile { .. } => "IncompleteProfile",
        CoreError::InvalidPrior(_) => "InvalidPrior",
        CoreError::PriorTooLarge { .. } => "PriorTooLarge",
        CoreError::BiasedChallenger { .. } => "BiasedChallenger",
        CoreError::InvalidSign(_) => "InvalidSign",
        CoreError::TooFewReplicates(_) => "TooFewReplicates",
        CoreError::Parse(_) => "ParseError",
    }
}
