use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration invariant does not hold. The message names the
    /// violated condition, e.g. `n_ions ≥ 1 violated`.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("missing field `{0}`")]
    MissingField(&'static str),

    #[error("unknown ion species `{0}`")]
    UnknownSpecies(String),

    #[error("cannot parse configuration document: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("equilibrium solver did not converge after {iterations} iterations (gradient {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("stationary point is not a minimum: Hessian eigenvalue {eigenvalue:.3e}")]
    NotAMinimum { eigenvalue: f64 },

    #[error("operation needs at least {needed} ions, got {got}")]
    TooFewIons { needed: usize, got: usize },

    #[error("mode index {index} out of range for {n_modes} modes")]
    InvalidMode { index: usize, n_modes: usize },

    #[error("ion index {index} out of range for {n_ions} ions")]
    InvalidIon { index: usize, n_ions: usize },

    #[error("Fock truncation too small: {population:.3e} population in the top two levels")]
    Truncation { population: f64 },

    #[error("displacement matrix element out of safe range: |β|²·(max(n,m)+1) = {value:.3e} > {bound:.1e}")]
    DisplacementRange { value: f64, bound: f64 },

    #[error("integrator step size underflow at t = {time:.6e}")]
    StepSizeUnderflow { time: f64 },

    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { got: usize, min: usize },

    #[error("configuration {states} for ion {ion}: {source}")]
    Configuration {
        ion: usize,
        states: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by the input document rather than the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_) | Error::MissingField(_) | Error::UnknownSpecies(_) | Error::Parse(_)
        )
    }
}
