use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Amplitude pushed past the edge of the momentum window.
    #[error("momentum window truncation: lost norm {lost_norm:.3e} exceeds cap {cap:.3e}")]
    Truncation { lost_norm: f64, cap: f64 },

    #[error("shift of {shift} steps does not fit a window of {width} sites")]
    ShiftTooLarge { shift: i64, width: i64 },

    #[error("singular detuning: {0}")]
    SingularDetuning(String),

    /// A closed-form expression hit one of its denominators.
    #[error("pole in closed form at denominator `{denominator}` (value {value:.3e})")]
    Pole { denominator: String, value: f64 },

    #[error("quadrature did not converge: estimate {estimate}, error {error:.3e} > tol {tol:.3e}")]
    Quadrature { estimate: String, error: f64, tol: f64 },

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("matrix is not invertible: {0}")]
    Singular(String),

    #[error("matrix decomposition failed: {0}")]
    Decomposition(String),

    #[error("momentum grid error: {0}")]
    Grid(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    /// Adaptive step size collapsed below the resolvable minimum.
    #[error("step size underflow at t = {t:.6e} (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("trajectories cannot be aligned: {0}")]
    Alignment(String),

    #[error("validity check failed: {0}")]
    Validity(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short machine-readable tag, used in the CLI's error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Truncation { .. } => "truncation",
            Error::ShiftTooLarge { .. } => "shift_too_large",
            Error::SingularDetuning(_) => "singular_detuning",
            Error::Pole { .. } => "pole",
            Error::Quadrature { .. } => "quadrature",
            Error::Calibration(_) => "calibration",
            Error::Singular(_) => "singular",
            Error::Decomposition(_) => "decomposition",
            Error::Grid(_) => "grid",
            Error::Invalid(_) => "invalid",
            Error::StepUnderflow { .. } => "step_underflow",
            Error::Alignment(_) => "alignment",
            Error::Validity(_) => "validity",
            Error::Unsupported(_) => "unsupported",
            Error::Io(_) => "io",
            Error::Parse(_) => "parse",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
