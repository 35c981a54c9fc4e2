use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("instance generation gave up after {attempts} attempts: {reason}")]
    RetryCapExceeded { attempts: usize, reason: String },

    #[error("gate index {gate} out of range for {num_gates} gates")]
    GateOutOfRange { gate: usize, num_gates: usize },

    #[error("no feasible assignment exists")]
    NoFeasibleAssignment,

    #[error("enumeration of {requested} states exceeds the cap of {cap}")]
    EnumerationCap { requested: u128, cap: u128 },

    #[error("{what}: expected length {expected}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("{qubits} qubits exceeds the simulator cap of {cap}")]
    QubitCap { qubits: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("cost function returned a non-finite value {value} at evaluation {eval}")]
    NonFiniteCost { value: f64, eval: usize },

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable tag, used by the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInstance(_) => "invalid_instance",
            Error::InvalidConfig(_) => "invalid_config",
            Error::RetryCapExceeded { .. } => "retry_cap_exceeded",
            Error::GateOutOfRange { .. } => "gate_out_of_range",
            Error::NoFeasibleAssignment => "no_feasible_assignment",
            Error::EnumerationCap { .. } => "enumeration_cap",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::QubitCap { .. } => "qubit_cap",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Empty(_) => "empty_input",
            Error::NonFiniteCost { .. } => "non_finite_cost",
            Error::UnknownStrategy { .. } => "unknown_strategy",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
