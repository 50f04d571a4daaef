use crate::spectral::ModeIndex;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("square-root argument is exactly zero at {0}")]
    ZeroArgument(ModeIndex),

    #[error("coefficient B is singular at {0} (kappa - 1 = 0)")]
    SingularCoefficient(ModeIndex),

    #[error("cancellation not resolved at the {digits}-digit cap (ratio {ratio:.3e})")]
    PrecisionExhausted { digits: u32, ratio: f64 },

    #[error("quadrature failed at {index:?}: estimated error {estimate:.3e} exceeds {tol:.3e}")]
    QuadratureFailure {
        index: Option<ModeIndex>,
        estimate: f64,
        tol: f64,
    },

    #[error("path sum not converged at depth {depth}: error estimate {err:.3e} > tol {tol:.3e}")]
    Unconverged { depth: usize, err: f64, tol: f64 },

    #[error("brute-force enumeration limited to depth 12, got {0}")]
    DepthTooLarge(usize),

    #[error("threshold hit: sigma + m*omega = 0 at m = {0}")]
    ThresholdHit(i64),

    #[error("wave reached the box edge at t = {t:.3} (|psi| = {amplitude:.3e})")]
    Reflected { t: f64, amplitude: f64 },

    #[error("norm drift {drift:.3e} in one step at t = {t:.3}")]
    StepRejected { t: f64, drift: f64 },

    #[error("time {0} is not among the stored samples")]
    TimeNotStored(f64),

    #[error("remainder below the grid noise floor")]
    SignalBelowNoise,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
