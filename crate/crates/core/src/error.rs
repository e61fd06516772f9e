use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The threshold does not describe a rare event for the importance-sampling rate.
    #[error(
        "x = {x} is not above the spectral edge (1 + sqrt(gamma))^2 = {edge}; \
         the event is not rare and the tilting rate is undefined, supply an explicit rate"
    )]
    NonRareRegime { x: f64, edge: f64 },

    #[error("support violation: {0}")]
    SupportViolation(String),

    #[error("numerical failure in {routine}: {detail}")]
    Numerical { routine: &'static str, detail: String },

    #[error("ratio undefined: {0}")]
    UndefinedRatio(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
