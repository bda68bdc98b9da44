use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("non-positive price {price} for {market} at row {row}")]
    NonPositivePrice { market: String, row: usize, price: f64 },

    #[error("dates not strictly increasing at row {row}")]
    NonMonotoneDates { row: usize },

    #[error("empty series: {0}")]
    EmptySeries(String),

    #[error("empty intersection of dates")]
    EmptyIntersection,

    #[error("too few exceedances: found {found}, need {required}")]
    TooFewExceedances { found: usize, required: usize },

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("convergence failure: {0}")]
    NonConvergence(String),

    #[error("{0}")]
    Mismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
