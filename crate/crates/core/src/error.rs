use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch for {what}: expected length {expected}, got {actual}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A state variable became NaN or infinite.
    #[error("numerical divergence in `{variable}`{}", time.map(|t| format!(" at t = {t}")).unwrap_or_default())]
    Divergence { variable: String, time: Option<f64> },

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Attach a simulation time to a divergence error.
    pub fn at_time(self, t: f64) -> Self {
        match self {
            Error::Divergence { variable, .. } => Error::Divergence {
                variable,
                time: Some(t),
            },
            other => other,
        }
    }
}

pub(crate) fn check_len(what: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::ShapeMismatch {
            what,
            expected,
            actual,
        })
    }
}
