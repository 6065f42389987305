use thiserror::Error;
use traitlens_core::inventory::InventoryError;
use traitlens_core::psychstats::StatsError;
use traitlens_core::rater::RaterError;
use traitlens_core::report::ReportError;
use traitlens_core::scoring::ScoringError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("upstream returned HTTP {status}: {body}")]
    Upstream { status: u16, body: String },
    #[error("malformed upstream response: {0}")]
    Protocol(String),
    #[error("embedding dimension changed for {model}: expected {expected}, got {got}")]
    Dimension { model: String, expected: usize, got: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("store error: {0}")]
    Store(String),
    #[error(transparent)]
    Rater(#[from] RaterError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error(transparent)]
    Inventory(#[from] InventoryError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid input file {path}: {message}")]
    Input { path: String, message: String },
}

impl HarnessError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        HarnessError::Io {
            context: context.into(),
            source,
        }
    }

    /// Configuration problems exit with 1 like runtime failures; this lets the
    /// CLI print them distinctly.
    pub fn is_config(&self) -> bool {
        matches!(self, HarnessError::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
