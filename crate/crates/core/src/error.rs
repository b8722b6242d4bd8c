use std::io;

use thiserror::Error;

use crate::artifact::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation failed: {0}")]
    Validation(ValidationReport),
    #[error("format error: {0}")]
    Format(String),
    #[error("corruption: stored digest {stored} does not match computed digest {computed}")]
    Corruption { stored: String, computed: String },
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("construction error: {0}")]
    Construction(String),
    #[error("encoding error: {0}")]
    Encoding(String),
    #[error("quantization error: {0}")]
    Quantization(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("arithmetic overflow: {0}")]
    Arithmetic(String),
    #[error("packing error: {0}")]
    Packing(String),
    #[error("routing error: {0}")]
    Routing(String),
    #[error("training error: {0}")]
    Training(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable name of the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Validation(_) => "validation",
            Error::Format(_) => "format",
            Error::Corruption { .. } => "corruption",
            Error::Io(_) => "io",
            Error::Construction(_) => "construction",
            Error::Encoding(_) => "encoding",
            Error::Quantization(_) => "quantization",
            Error::Contract(_) => "contract",
            Error::Arithmetic(_) => "arithmetic",
            Error::Packing(_) => "packing",
            Error::Routing(_) => "routing",
            Error::Training(_) => "training",
            Error::Csv(_) => "csv",
        }
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
