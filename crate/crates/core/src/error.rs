use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no convergence after {iterations} iterations (last bracket [{lo}, {hi}])")]
    Iteration { iterations: usize, lo: f64, hi: f64 },

    #[error("integral diverges: {0}")]
    Divergence(String),

    #[error("moment of order {order} does not exist: {reason}")]
    MomentUndefined { order: u32, reason: String },

    #[error("moment generating function undefined at t = {t} (requires t < {threshold})")]
    MgfUndefined { t: f64, threshold: f64 },

    #[error("Renyi entropy undefined: {0}")]
    EntropyUndefined(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("degenerate distribution: {0}")]
    Degenerate(String),

    #[error("data value {value} at index {index} is outside the model domain")]
    DataDomain { index: usize, value: f64 },

    #[error("empty data")]
    EmptyData,

    #[error("{criterion} undefined for n = {n}, k = {k}")]
    CriterionUndefined { criterion: &'static str, n: usize, k: usize },

    #[error("fit failed for {model}: {trace}")]
    FitFailure { model: String, trace: String },

    #[error("parse error at row {row}, column {column}: cannot read {cell:?} as a number")]
    Parse { row: u64, column: usize, cell: String },

    #[error("invalid argument: {0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by the input data rather than the numerics.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::DataDomain { .. } | Error::EmptyData | Error::Parse { .. } | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
