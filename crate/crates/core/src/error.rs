use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied something outside an operation's domain.
    #[error("input error: {0}")]
    Input(String),

    /// A matrix or transform violates a structural invariant.
    #[error("structural error: {0}")]
    Structural(String),

    /// Supplied data (matrices, datasets, config) failed validation.
    #[error("data error: {0}")]
    Data(String),

    /// A factorization or inversion could not be carried out.
    #[error("numerical error: {message}")]
    Numerical {
        message: String,
        /// Offending eigenvalue / singular value, when one is known.
        value: Option<f64>,
    },

    /// The passive-joint Jacobian is rank deficient; the block solve cannot be used.
    #[error("singular posture: {0}")]
    Singular(String),

    /// Inverse kinematics failed for one of the chains.
    #[error("workspace error: chain {chain}: {message}")]
    Workspace { chain: String, message: String },

    /// Small-rotation extraction requested outside its validity range.
    #[error("regime error: {0}")]
    Regime(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn numerical(message: impl Into<String>, value: Option<f64>) -> Self {
        Error::Numerical {
            message: message.into(),
            value,
        }
    }
}
