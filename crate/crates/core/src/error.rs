use thiserror::Error;

use crate::oracle::PreferenceQuery;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid event: {0}")]
    InvalidEvent(String),

    #[error("invalid gamble: {0}")]
    InvalidGamble(String),

    #[error("invalid probability model: {0}")]
    InvalidModel(String),

    #[error("invalid utility function: {0}")]
    InvalidUtility(String),

    #[error("invalid risk function: {0}")]
    InvalidRisk(String),

    #[error("money amount {amount} outside utility domain [{lo}, {hi}]")]
    Domain { amount: f64, lo: f64, hi: f64 },

    #[error("no utility entry for outcome `{0}`")]
    UnknownOutcome(String),

    #[error("{0}")]
    Validation(String),

    #[error(transparent)]
    Oracle(#[from] OracleError),

    /// The agent answered in a way no REU maximizer with the assumed utility could.
    #[error("monotonicity violation: {0}")]
    MonotonicityViolation(String),

    #[error("no fair lottery found for denominators {0:?}")]
    FairnessUnavailable(Vec<u32>),

    #[error("inconsistent measurements: {0}")]
    Inconsistency(String),

    #[error("weight {0} outside the range of the risk function")]
    WeightOutOfRange(f64),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("session terminated")]
    SessionTerminated,

    #[error("timed out waiting for an answer")]
    Timeout,

    /// Replay asked something other than what the transcript recorded at `step` (1-based).
    #[error("replay diverged at step {step}: {reason}")]
    ReplayDivergence { step: u64, reason: String },

    /// A resumable replay ran out of recorded answers; the query is the next one to put to the agent.
    #[error("awaiting an answer to query {}", .0.id)]
    AnswerPending(Box<PreferenceQuery>),

    #[error("oracle could not evaluate query: {0}")]
    Evaluation(String),
}
