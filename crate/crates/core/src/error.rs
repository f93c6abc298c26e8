use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("scenario is invalid: {}", .0.join("; "))]
    InvalidScenario(Vec<String>),

    #[error("malformed scenario file: {0}")]
    Parse(String),

    #[error("dimension mismatch: expected {expected}, got {actual} ({what})")]
    Dimension {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("state became non-finite at step {step} (t = {time}); last finite state kept")]
    NonFinite {
        step: usize,
        time: f64,
        last_finite: Box<crate::state::SystemState>,
    },

    #[error("eigenvalue solver did not converge for a {0}x{0} matrix")]
    EigenSolver(usize),

    #[error("sample point {0} lies within 1e-6 of an excluded singularity")]
    SingularSample(num_complex::Complex64),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn dim(what: &'static str, expected: usize, actual: usize) -> Self {
        Error::Dimension {
            what,
            expected,
            actual,
        }
    }
}
