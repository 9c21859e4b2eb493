use thiserror::Error;

/// Errors surfaced by the simulator, oracles and harness.
#[derive(Debug, Error)]
pub enum Error {
    /// Structurally invalid argument (negative size, probability outside
    /// `[0, 1]`, non-integral edge total, mismatched lengths, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A quantity that is only defined for non-degenerate edge probability
    /// was requested at `p = 0` or `p = 1`.
    #[error("{what} is singular at p = {p}")]
    DegenerateProbability { what: &'static str, p: f64 },

    /// A rejection sampler exceeded its configured attempt budget.
    #[error("sampling budget exhausted after {attempts} attempts ({what})")]
    BudgetExhausted { attempts: u64, what: &'static str },

    /// Log-space evaluation left the representable range.
    #[error("numeric overflow in {0}")]
    NumericOverflow(&'static str),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("report serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
