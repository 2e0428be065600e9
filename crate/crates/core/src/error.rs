use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus {0} is invalid: every cyclic factor needs order at least 2")]
    InvalidModulus(u64),
    #[error("group order {order} exceeds the configured cap {cap}")]
    OrderCapExceeded { order: u128, cap: usize },
    #[error("element index {index} out of range for a group of order {order}")]
    IndexOutOfRange { index: usize, order: usize },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("budget exceeded: {what} needs {needed}, cap is {cap}")]
    Budget { what: &'static str, needed: u128, cap: u128 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("mean {0} is negative beyond float tolerance; kernel inconsistency")]
    NegativeMean(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
