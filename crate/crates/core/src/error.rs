use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("point {re}+{im}i lies outside the chart of radius {radius}")]
    OutsideChart { re: f64, im: f64, radius: f64 },

    #[error("flow state became non-finite after {steps} steps")]
    NonFiniteState { steps: usize },

    #[error("invalid resolution: {0}")]
    InvalidResolution(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("quadrature defect {defect:e} exceeds tolerance {tolerance:e}")]
    QuadratureDefect { defect: f64, tolerance: f64 },

    #[error("eigensolver failure: {0}")]
    EigensolverFailure(String),

    #[error("spectrum is empty")]
    EmptySpectrum,

    #[error("energy scaling requires a shift tau")]
    MissingTau,

    #[error("smoothing width must be positive and finite, got {0}")]
    InvalidWidth(f64),

    #[error("|grad H| = {norm:e} at the requested point is below the critical threshold")]
    CriticalPoint { norm: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("hamiltonian `{label}` is defined on {expected}, not {got}")]
    IncompatibleModel {
        label: String,
        expected: &'static str,
        got: &'static str,
    },

    #[error("unknown hamiltonian `{0}`")]
    UnknownHamiltonian(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
