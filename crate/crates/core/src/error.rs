use thiserror::Error;

/// Errors produced by the numerical routines of the laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),

    #[error(
        "parameter point outside the restricted space Θ₁^{{2p}}: psi_bar = {psi_bar} but psi_bar < 1 is required"
    )]
    OutsideParameterSpace { psi_bar: f64 },

    #[error("symbol is singular at x = {x} (x ≡ 0 mod 2π)")]
    SingularPoint { x: f64 },

    #[error("integrand is not integrable: singular exponent {exponent} must be < 1")]
    NonIntegrable { exponent: f64 },

    #[error("quadrature tolerance not met: tail error estimate {tail_error:e} vs total {total:e}")]
    ToleranceNotMet { tail_error: f64, total: f64 },

    #[error("coefficient table covers lags up to {available}, but lag {needed} is required")]
    InsufficientLags { needed: usize, available: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate log-log fit: only {positive_points} positive error(s)")]
    DegenerateFit { positive_points: usize },

    #[error("stochastic floor: {0}")]
    StochasticFloor(String),

    #[error("rejection sampler starved: acceptance rate {acceptance:e} < 1e-3")]
    RejectionStarved { acceptance: f64 },

    #[error("unsupported scale: {0}")]
    UnsupportedScale(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("serialization failed: {0}")]
    Serialization(String),
}

impl LabError {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            LabError::InvalidSymbol(_) => "InvalidSymbol",
            LabError::OutsideParameterSpace { .. } => "OutsideParameterSpace",
            LabError::SingularPoint { .. } => "SingularPoint",
            LabError::NonIntegrable { .. } => "NonIntegrable",
            LabError::ToleranceNotMet { .. } => "ToleranceNotMet",
            LabError::InsufficientLags { .. } => "InsufficientLags",
            LabError::DimensionMismatch { .. } => "DimensionMismatch",
            LabError::DegenerateFit { .. } => "DegenerateFit",
            LabError::StochasticFloor(_) => "StochasticFloor",
            LabError::RejectionStarved { .. } => "RejectionStarved",
            LabError::UnsupportedScale(_) => "UnsupportedScale",
            LabError::InvalidArgument(_) => "InvalidArgument",
            LabError::Serialization(_) => "Serialization",
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
