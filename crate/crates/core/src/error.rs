use thiserror::Error;

/// Errors raised by the lab. Variants map onto the failure modes of the
/// numerical pipeline; the CLI turns them into exit codes.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid frequency range: k^2 + a^2 = {lhs} must exceed r^2/4 = {rhs}")]
    InvalidFrequencyRange { lhs: f64, rhs: f64 },

    #[error("degenerate Faddeev symbol: min |symbol| = {min_symbol:e} below guard {guard:e}")]
    DegenerateSymbol { min_symbol: f64, guard: f64 },

    #[error("fixed-point iteration did not contract after {iterations} iterations (last residual {residual:e})")]
    NoContraction { iterations: usize, residual: f64 },

    #[error("resonant frequency: k = {k} (k^2 near a Dirichlet eigenvalue; {detail}); rerun with k perturbed by ~0.5%")]
    ResonantFrequency { k: f64, detail: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl LabError {
    pub fn config(msg: impl Into<String>) -> Self {
        LabError::Config(msg.into())
    }

    /// Short machine-readable tag, used in sweep records for failed cells.
    pub fn tag(&self) -> &'static str {
        match self {
            LabError::Config(_) => "config",
            LabError::InvalidFrequencyRange { .. } => "invalid_frequency_range",
            LabError::DegenerateSymbol { .. } => "degenerate_symbol",
            LabError::NoContraction { .. } => "no_contraction",
            LabError::ResonantFrequency { .. } => "resonant_frequency",
            LabError::InsufficientData(_) => "insufficient_data",
            LabError::Format(_) => "format",
            LabError::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
