use thiserror::Error;

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("geometry produced no particles")]
    EmptyGeometry,

    #[error("particles {first} and {second} share the same reference position")]
    DuplicatePosition { first: usize, second: usize },

    #[error("correction matrix of particle {particle} is singular (det = {det:e})")]
    SingularCorrection { particle: usize, det: f64 },

    #[error("inverted element at particle {particle}, t = {time:e} s (det F = {det:e})")]
    InvertedElement { particle: usize, time: f64, det: f64 },

    #[error("run diverged at particle {particle}, t = {time:e} s: {reason}")]
    Divergence {
        particle: usize,
        time: f64,
        reason: String,
    },

    #[error("parameter `{key}`: {message}")]
    Parameter { key: String, message: String },

    #[error("config error (line {line}): {message}")]
    Config { line: usize, message: String },

    #[error("signal analysis failed: {0}")]
    Signal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SimError {
    /// True for failures of the numerical integration itself, as opposed to
    /// bad input or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            SimError::InvertedElement { .. }
                | SimError::Divergence { .. }
                | SimError::SingularCorrection { .. }
        )
    }
}
