use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("singular parameters: {0}")]
    Singular(String),
    #[error("level {level} is not an equilibrium (|h(x) - x| = {residual:e})")]
    NotAnEquilibrium { level: f64, residual: f64 },
    #[error("time {t} precedes trajectory start {start}")]
    BeforeStart { t: f64, start: f64 },
    #[error("assumption violated: {0}")]
    Assumption(String),
    #[error("subsidy level {level} does not exceed the minimum subsidy {minimum}")]
    InfeasibleSubsidy { level: f64, minimum: f64 },
    #[error("invalid step: {0}")]
    InvalidStep(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
