use thiserror::Error;

/// Errors raised by the testbed operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("controller `{controller}` cannot drive a {model} model")]
    IncompatibleController {
        controller: &'static str,
        model: &'static str,
    },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("symbol {symbol} outside alphabet of size {size}")]
    SymbolOutOfRange { symbol: usize, size: usize },

    #[error("model kinds differ: {0} vs {1}")]
    KindMismatch(&'static str, &'static str),

    #[error("noise variances differ: {0} vs {1}")]
    VarianceMismatch(f64, f64),

    #[error("absolute continuity violated: reference kernel assigns zero mass to output {symbol}")]
    AbsoluteContinuity { symbol: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("missing {0} records")]
    MissingRecord(&'static str),

    #[error("enumeration budget exceeded: {required} outcomes > {budget}")]
    BudgetExceeded { required: f64, budget: f64 },

    #[error("no separation exists at this budget: target entropy {target} nats exceeds curve maximum {max} nats")]
    NoSeparation { target: f64, max: f64 },

    #[error("identifier output is not a point of the packing")]
    OutsidePacking,

    #[error("history is empty")]
    EmptyHistory,

    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
