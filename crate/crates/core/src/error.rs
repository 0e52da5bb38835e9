use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid layout: {0}")]
    Layout(String),

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("circuit is not unitary-only: gate {index} is `{kind}`")]
    NonUnitary { index: usize, kind: String },

    #[error("{qubits} qubits exceeds the cap of {cap}")]
    QubitCap { qubits: usize, cap: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("probability {0} is outside the open interval (0, 1)")]
    Probability(f64),

    #[error("orbitals {first} and {second} are not orthogonal (|overlap| = {overlap:.3e})")]
    NotOrthogonal {
        first: usize,
        second: usize,
        overlap: f64,
    },

    #[error("state is not normalized (norm = {0})")]
    NotNormalized(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),

    #[error("matrix has eigenvalue {0:.3e} below the clamp tolerance")]
    NotPositive(f64),

    #[error("synthesis did not reach error {requested:.3e}; best found {best:.3e}")]
    SynthesisFailed { requested: f64, best: f64 },

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
