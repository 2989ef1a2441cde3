use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {0} is not a power of two")]
    NotQubitDimension(usize),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("invalid qubit selection: {0}")]
    InvalidQubits(String),

    #[error("coupling strength {0} outside [0, 2pi)")]
    CouplingOutOfRange(f64),

    #[error("degenerate coupling: {0}")]
    DegenerateCoupling(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("incomplete measurement set: {0}")]
    IncompleteMeasurements(String),

    #[error("tomogram has no recorded counts")]
    ZeroCounts,

    #[error("tomogram format error at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("{}", config_message(.line, .message))]
    Config { line: Option<usize>, message: String },

    #[error("budget flag required: {0}")]
    BudgetRequired(String),

    #[error("cannot write {path}: {source}")]
    Output { path: String, source: std::io::Error },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn config_message(line: &Option<usize>, message: &str) -> String {
    match line {
        Some(l) => format!("config error at line {l}: {message}"),
        None => format!("config error: {message}"),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
