use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("time {t} outside tabulated range [0, {end}]")]
    OutOfRange { t: f64, end: f64 },

    #[error("derivative {rate} outside admissible band [{lo}, {hi}]")]
    Inadmissible { rate: f64, lo: f64, hi: f64 },

    #[error("degenerate state: {0}")]
    Degenerate(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("simulation error at t = {t}: {source}")]
    Step {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
