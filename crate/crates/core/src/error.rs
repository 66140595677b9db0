//! Error type shared by every stage of the simulator.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A configuration key is missing, malformed, unknown, or violates an invariant.
    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    /// A parameter record failed validation outside of config parsing.
    #[error("invalid parameter: {0}")]
    InvalidInput(String),

    #[error("pump frequency nonpositive")]
    PumpFrequencyNonpositive,

    #[error("bistable operating point: {roots} steady-state roots; choose a branch explicitly")]
    Bistable { roots: usize },

    #[error("singular response point at omega = {omega} rad/s")]
    SingularResponse { omega: f64 },

    #[error("phase undefined near transmission zero at omega = {omega} rad/s")]
    PhaseUndefined { omega: f64 },

    #[error("integration diverged at step {step}")]
    Diverged { step: usize },

    #[error("sideband window does not span an integer number of beat periods ({periods:.6})")]
    NonIntegerWindow { periods: f64 },

    #[error("window not resolved near omega = {omega} rad/s")]
    WindowNotResolved { omega: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("{0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Numerical failures are distinguished from input validation failures
    /// so the command line can report them with a separate exit status.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularResponse { .. }
                | Error::PhaseUndefined { .. }
                | Error::Diverged { .. }
                | Error::NonIntegerWindow { .. }
                | Error::WindowNotResolved { .. }
                | Error::DegenerateFit(_)
        )
    }

    pub fn exit_code(&self) -> i32 {
        if self.is_numerical() {
            2
        } else {
            1
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
