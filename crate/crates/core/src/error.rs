use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mode index {index} out of range for a space with {modes} modes")]
    ModeOutOfRange { index: usize, modes: usize },

    #[error("invalid Hilbert space: {0}")]
    InvalidSpace(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("expected a space with {expected} modes, found {found}")]
    WrongModeCount { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("hamiltonian is not hermitian (max deviation {0:e})")]
    NonHermitian(f64),

    #[error("collapse rate must be nonnegative, found {0}")]
    NegativeRate(f64),

    #[error("steady state is not unique (singular trace-constrained system)")]
    DegenerateSteadyState,

    #[error("steady-state residual {residual:e} exceeds tolerance {tolerance:e}")]
    ResidualNotMet { residual: f64, tolerance: f64 },

    #[error("steady state fails density-matrix check: {0}")]
    InvalidDensityMatrix(String),

    #[error("negative propagation time {0}")]
    NegativeTime(f64),

    #[error("integrator failed: {0}")]
    IntegratorFailure(String),

    #[error("occupancy {occupancy:e} below floor {floor:e}; correlation undefined")]
    UndefinedCorrelation { occupancy: f64, floor: f64 },

    #[error("correlation has non-negligible imaginary part {0:e}")]
    ComplexCorrelation(f64),

    #[error("optimal condition outside its domain: {0}")]
    Domain(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short stable identifier written into sweep output rows.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ModeOutOfRange { .. } => "mode_out_of_range",
            Error::InvalidSpace(_) => "invalid_space",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::WrongModeCount { .. } => "wrong_mode_count",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::NonHermitian(_) => "non_hermitian",
            Error::NegativeRate(_) => "negative_rate",
            Error::DegenerateSteadyState => "degenerate_steady_state",
            Error::ResidualNotMet { .. } => "residual_not_met",
            Error::InvalidDensityMatrix(_) => "invalid_density_matrix",
            Error::NegativeTime(_) => "negative_time",
            Error::IntegratorFailure(_) => "integrator_failure",
            Error::UndefinedCorrelation { .. } => "undefined_correlation",
            Error::ComplexCorrelation(_) => "complex_correlation",
            Error::Domain(_) => "domain",
            Error::Singular(_) => "singular",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
