use thiserror::Error;

/// Errors produced by the library.
///
/// [`Error::exit_code`] maps each variant onto the CLI exit-code contract:
/// validation failures exit with 2, numerical non-convergence with 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max|M - M^dag| = {deviation:.3e} exceeds tolerance {tolerance:.1e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("expected a {expected}x{expected} matrix, got {got}x{got}")]
    WrongDimension { expected: usize, got: usize },

    #[error("not a density matrix: {reason}")]
    InvalidDensity { reason: String },

    #[error("invalid parameter {name}: {value} ({constraint})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("quadrature did not converge at {nodes} nodes/axis: last two estimates differ by {change:.3e} (tolerance {tolerance:.1e})")]
    QuadratureNotConverged {
        nodes: usize,
        change: f64,
        tolerance: f64,
        previous: f64,
        latest: f64,
    },

    #[error("quadrature did not converge at tau = {tau}: entries changed by {change:.3e} at {nodes} nodes/axis (tolerance {tolerance:.1e})")]
    CurveNotConverged {
        tau: f64,
        nodes: usize,
        change: f64,
        tolerance: f64,
    },

    #[error("subsystem count mismatch: {left} vs {right}")]
    SubsystemMismatch { left: usize, right: usize },

    #[error("subsystem {index} carries a {found} label, expected {expected}")]
    LabelKind {
        index: usize,
        found: &'static str,
        expected: &'static str,
    },

    #[error("measurement outcome has zero probability (structurally impossible)")]
    ImpossibleOutcome,

    #[error("measurement outcome probability {probability:.3e} is below the numerical floor; conditional state unreliable")]
    OutcomeUnderflow { probability: f64 },

    #[error("Fock truncation {truncation} leaks probability {leak:.3e} (limit {limit:.1e})")]
    TruncationLeak {
        truncation: usize,
        leak: f64,
        limit: f64,
    },

    #[error("truncation overflow guard: required {required} Fock levels exceeds the {cap} cap")]
    TruncationOverflow { required: usize, cap: usize },

    #[error("covariance matrix invalid: {reason}")]
    InvalidCovariance { reason: String },

    #[error("config error at {path}:{line}: {message}")]
    Config {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// CLI exit code for this error: 2 for validation, 3 for non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::QuadratureNotConverged { .. } | Error::CurveNotConverged { .. } => 3,
            _ => 2,
        }
    }
}
