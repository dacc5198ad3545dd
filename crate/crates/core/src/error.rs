use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the population, design, allocation, estimation and
/// verification layers. Unit indices are zero-based.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("population has no units")]
    EmptyPopulation,
    #[error("unit `{0}` has lower bound above upper bound")]
    InvertedInterval(String),
    #[error("unit id `{0}` appears more than once")]
    DuplicateId(String),
    #[error("unit `{0}` has a non-finite bound")]
    NonFiniteBound(String),
    #[error("unit `{0}` has zero radius (known outcome)")]
    DegenerateUnit(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid inclusion probability {value} for unit {index}")]
    InvalidProbability { index: usize, value: f64 },
    #[error("unit {0} has zero inclusion probability")]
    ZeroInclusion(usize),
    #[error("invalid design: {0}")]
    InvalidDesign(String),
    #[error("design support of {support} subsets exceeds the enumeration cap of {cap}")]
    EnumerationTooLarge { support: u128, cap: usize },
    #[error("population of {units} units exceeds the vertex enumeration cap of {cap}")]
    PopulationTooLarge { units: usize, cap: usize },
    #[error("budget {budget} outside (0, {units}]")]
    BudgetOutOfRange { budget: f64, units: usize },
    #[error("candidate is infeasible: {0}")]
    InfeasibleCandidate(String),
    #[error("no observed value for sampled unit {0}")]
    MissingValue(usize),
    #[error("unit index {index} out of range for population of {units}")]
    IndexOutOfRange { index: usize, units: usize },
    #[error("scale factor {0} must be positive")]
    NonpositiveScale(f64),
    #[error("risk profile has {got} entries, expected {expected}")]
    IncompleteProfile { expected: usize, got: usize },
    #[error("invalid prior: {0}")]
    InvalidPrior(String),
    #[error("prior support of {support} points exceeds the cap of {cap}")]
    PriorTooLarge { support: u128, cap: usize },
    #[error("challenger estimator is biased by {bias} at a prior support point")]
    BiasedChallenger { bias: f64 },
    #[error("invalid sign {0}; signs must be -1 or +1")]
    InvalidSign(i8),
    #[error("at least 2 replicates are required, got {0}")]
    TooFewReplicates(u64),
    #[error("{0}")]
    Parse(String),
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Parse(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}
