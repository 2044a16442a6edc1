use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The CSV header is missing a required column.
    #[error("schema error: missing column `{0}`")]
    Schema(String),

    #[error("duplicate country `{0}`")]
    DuplicateCountry(String),

    /// A row (1-based, header excluded) failed a record invariant.
    #[error("validation error at row {row}: {message}")]
    Validation { row: usize, message: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    /// Statistically degenerate input, e.g. zero variance.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The differenced series carries no information for the requested terms.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// A study found nothing it could compute on.
    #[error("empty study: {0}")]
    EmptyStudy(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by data insufficiency rather than misuse.
    pub fn is_data_insufficiency(&self) -> bool {
        matches!(
            self,
            Error::Degenerate(_) | Error::InsufficientData(_) | Error::DegenerateFit(_) | Error::EmptyStudy(_)
        )
    }
}
