use thiserror::Error;

/// Errors raised by model evaluation, integration and analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrendError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid initial state: {0}")]
    InvalidInitialState(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("p = {p} with a non-zero recurrence rate lies outside the Fad/Fashion/Classic/Periodic taxonomy")]
    OutsideTaxonomy { p: f64 },

    #[error("unknown scenario `{name}`; registered scenarios: {}", known.join(", "))]
    UnknownScenario { name: String, known: Vec<String> },

    #[error("decay fit window holds {found} samples, at least {required} required")]
    TooFewSamples { found: usize, required: usize },

    #[error("I never fell below the threshold {threshold} within the horizon")]
    ThresholdNotReached { threshold: f64 },

    #[error("cannot normalize populations: {0}")]
    Normalize(String),
}

pub type Result<T, E = TrendError> = std::result::Result<T, E>;
