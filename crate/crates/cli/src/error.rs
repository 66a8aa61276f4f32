use std::fmt;

use serde_json::json;

/// Failures surfaced by the CLI, each with a fixed exit code.
#[derive(Debug)]
pub enum LabError {
    /// Unreadable, malformed or out-of-range configuration.
    Config(String),
    Core(threshold_core::Error),
    Io(String),
    /// The run finished and its bundle was written, but a check failed.
    Verification(String),
}

impl LabError {
    /// 1 for bad input or violated preconditions, 2 for numerical failures
    /// and failed verifications.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) | LabError::Io(_) => 1,
            LabError::Core(e) => match e {
                threshold_core::Error::Numerical(_) | threshold_core::Error::BracketTooNarrow { .. } => 2,
                _ => 1,
            },
            LabError::Verification(_) => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LabError::Config(_) => "config",
            LabError::Io(_) => "io",
            LabError::Verification(_) => "verification",
            LabError::Core(e) => match e {
                threshold_core::Error::Domain(_) => "domain",
                threshold_core::Error::Precondition(_) => "precondition",
                threshold_core::Error::NoBoundState { .. } => "no_bound_state",
                threshold_core::Error::BracketTooNarrow { .. } => "bracket_too_narrow",
                threshold_core::Error::InvalidCouplingBracket { .. } => "invalid_coupling_bracket",
                threshold_core::Error::ExteriorNotDecaying { .. } => "exterior_not_decaying",
                threshold_core::Error::Unnormalized => "unnormalized",
                threshold_core::Error::Degenerate(_) => "degenerate",
                threshold_core::Error::InsufficientData(_) => "insufficient_data",
                threshold_core::Error::Numerical(_) => "numerical",
            },
        }
    }

    /// The single-line JSON written to stderr.
    pub fn to_json(&self) -> String {
        json!({ "error": { "kind": self.kind(), "message": self.to_string(), "exit_code": self.exit_code() } }).to_string()
    }
}

impl fmt::Display for LabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabError::Config(m) => write!(f, "invalid config: {m}"),
            LabError::Core(e) => write!(f, "{e}"),
            LabError::Io(m) => write!(f, "{m}"),
            LabError::Verification(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl std::error::Error for LabError {}

impl From<threshold_core::Error> for LabError {
    fn from(e: threshold_core::Error) -> Self {
        LabError::Core(e)
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}
