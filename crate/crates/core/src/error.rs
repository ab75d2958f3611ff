use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed caller input (bad node index, self-loop, empty list, ...).
    #[error("input error: {0}")]
    Input(String),

    /// An ensemble, bound or schedule description violates its invariants.
    #[error("spec error: {0}")]
    Spec(String),

    #[error("operation requires q = 2 but configuration has q = {0}")]
    UnsupportedForQState(usize),

    #[error("degenerate graph: {0}")]
    Degenerate(String),

    #[error("label count mismatch: functional expects q = {expected}, configuration has q = {found}")]
    QMismatch { expected: usize, found: usize },

    #[error("exhaustive search needs {states} states, budget is {budget}")]
    TooLarge { states: u128, budget: u128 },

    #[error("infeasible spec: {0}")]
    Infeasible(String),

    #[error("invalid move kind: {0}")]
    InvalidMoveKind(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short machine-readable tag, used by the CLI error line and the C API.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Input(_) => "input",
            Error::Spec(_) => "spec",
            Error::UnsupportedForQState(_) => "unsupported",
            Error::Degenerate(_) => "degenerate",
            Error::QMismatch { .. } => "q_mismatch",
            Error::TooLarge { .. } => "too_large",
            Error::Infeasible(_) => "infeasible",
            Error::InvalidMoveKind(_) => "invalid_move_kind",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
