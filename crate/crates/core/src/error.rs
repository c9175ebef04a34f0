use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("theta = {0} is outside the open interval (-pi/4, pi/4)")]
    Range(f64),

    #[error("caustic: |sin(omega t)| = {0:e} is below the analytic tolerance")]
    Caustic(f64),

    #[error("omega t = {0} lies outside the principal window (0, pi)")]
    BranchWindow(f64),

    #[error("dimension {got} is too small (need at least {min})")]
    Dimension { got: usize, min: usize },

    #[error("matrix exponential residual {residual:e} exceeds tolerance {tol:e}")]
    Convergence { residual: f64, tol: f64 },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("Hermite polynomial H_{n} overflowed double range")]
    Overflow { n: usize },

    #[error("quadrature did not converge: refinement changed the result by {delta:e} (tolerance {tol:e})")]
    NonConverged { delta: f64, tol: f64 },

    #[error("rotated Gaussian no longer decays on the real line (Re c = {0})")]
    Decay(f64),

    #[error("quadrature grid needs {needed} kernel evaluations, cap is {cap}")]
    Budget { needed: u128, cap: u128 },

    #[error("lattice fluctuation determinant vanishes or changes sign ({0:e})")]
    SingularLattice(f64),

    #[error("invalid argument: {0}")]
    Validation(String),
}

impl Error {
    /// Failures of a numerical method, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::Range(_) | Error::Dimension { .. } | Error::Validation(_)
        )
    }
}
