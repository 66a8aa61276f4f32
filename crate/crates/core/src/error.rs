use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no bound state with {nodes} nodes in energy bracket [{lo:e}, {hi:e}]")]
    NoBoundState { nodes: usize, lo: f64, hi: f64 },

    #[error("energy bracket [{lo:e}, {hi:e}] too narrow: {advice}")]
    BracketTooNarrow { lo: f64, hi: f64, advice: String },

    #[error(
        "invalid coupling bracket [{lower}, {upper}]: bound state at lower = {lower_has_state}, at upper = {upper_has_state}"
    )]
    InvalidCouplingBracket {
        lower: f64,
        upper: f64,
        lower_has_state: bool,
        upper_has_state: bool,
    },

    #[error("zero-energy exterior has no square-integrable branch (effective strength {effective_strength})")]
    ExteriorNotDecaying { effective_strength: f64 },

    #[error("radial function is not normalized")]
    Unnormalized,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for failures of the numerics themselves rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_))
    }
}
