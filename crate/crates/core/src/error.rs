use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input is empty")]
    EmptyInput,
    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),
    #[error("input has a header but no data rows")]
    NoRows,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("schema override for `{column}`: {reason}")]
    InvalidOverride { column: String, reason: String },
    #[error("unsupported visualization: {0}")]
    UnsupportedSpec(String),
    #[error("invalid filter on `{attr}`: {reason}")]
    InvalidFilter { attr: String, reason: String },
}
