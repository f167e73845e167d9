use thiserror::Error;

/// Errors produced by the physics and linear-algebra routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Adaptive quadrature stopped before reaching the requested accuracy.
    #[error("quadrature did not converge: requested {requested:.3e}, achieved {achieved:.3e}")]
    QuadratureNonConvergence { requested: f64, achieved: f64 },

    /// A root solve found no sign change over the search bracket.
    #[error("target not bracketed on [{lo:.3e}, {hi:.3e}]")]
    NoBracket { lo: f64, hi: f64 },

    /// The drift matrix has an eigenvalue with non-negative real part.
    #[error("linear model is not strictly stable")]
    UnstableModel,

    /// A covariance matrix fails the physicality bound.
    #[error("unphysical covariance matrix: min symplectic eigenvalue {nu_min:.6e} < 1/2")]
    Unphysical { nu_min: f64 },

    /// The dual-homodyne measurement covariance is singular.
    #[error("singular Bell detection: det(measured covariance) = {det:.3e} <= 0")]
    SingularMeasurement { det: f64 },

    /// Roundoff pushed an intermediate quantity outside its analytic range.
    #[error("numerical conditioning failure: {0}")]
    Conditioning(String),

    /// A mode index exceeded the number of modes in a covariance matrix.
    #[error("mode index {index} out of range for {n_modes} modes")]
    ModeIndex { index: usize, n_modes: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
