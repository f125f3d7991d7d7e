use thiserror::Error;

/// Errors raised by the model, the solvers and the sweep engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    #[error("degenerate sphere trap: effective frequency Omega2 = {omega2_eff:e} must be positive")]
    DegenerateTrap { omega2_eff: f64 },

    #[error("mirror effective frequency Omega1 vanishes")]
    SingularMirror,

    #[error("drift matrix is not stable (max Re lambda = {max_re:e}); no stationary state")]
    Unstable { max_re: f64 },

    #[error("Lyapunov operator is singular: |lambda_i + lambda_j| = {min_sum:e}")]
    SingularLyapunov { min_sum: f64 },

    #[error("eigenvalues of the drift matrix do not come in conjugate pairs")]
    UnpairedEigenvalues,

    #[error("no self-consistent steady state found in the detuning window [{lo}, {hi}]")]
    NoSteadyState { lo: f64, hi: f64 },

    #[error("stability bracket [{lo:e}, {hi:e}] does not straddle the instability threshold")]
    BadBracket { lo: f64, hi: f64 },

    #[error("intracavity field diverges: |r^2 exp(2ikL)| = 1 at kL = {kl}")]
    FieldDivergence { kl: f64 },

    #[error("moment integration diverged at t = {t}")]
    Diverged { t: f64 },

    #[error("numerical fault in {context}")]
    Numerical { context: &'static str },
}

impl Error {
    /// True for errors that stem from the physics of the requested point
    /// (instability, inverted trap) rather than from the numerics.
    pub fn is_physical(&self) -> bool {
        matches!(
            self,
            Error::Unstable { .. }
                | Error::DegenerateTrap { .. }
                | Error::SingularMirror
                | Error::BadBracket { .. }
                | Error::InvalidParam { .. }
                | Error::FieldDivergence { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
