use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("qubit {qubit} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("qubit {0} listed more than once")]
    DuplicateQubit(usize),

    #[error("gate of arity {expected} applied to {found} qubits")]
    ArityMismatch { expected: usize, found: usize },

    #[error("invalid probability {0}")]
    InvalidProbability(f64),

    #[error("unknown gate `{0}`")]
    UnknownGate(String),

    #[error("gate `{name}` expects {expected} parameter(s), got {found}")]
    GateParams {
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("{requested} qubits exceed the configured maximum of {max}")]
    TooManyQubits { requested: usize, max: usize },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("post-selection impossible (p_pass = {p_pass:e})")]
    PostSelectionImpossible { p_pass: f64 },

    #[error("sampling overhead is infinite for p_pass = 0")]
    InfiniteOverhead,

    #[error("invalid STS descriptor: {0}")]
    InvalidDescriptor(String),

    #[error("STS checks are not simultaneously observable")]
    NotSimultaneouslyObservable,

    #[error("cat state with {ancillas} ancillas exceeds the {factors} controlled factors available")]
    TooManyAncillas { ancillas: usize, factors: usize },

    #[error("invalid switch specification: {0}")]
    InvalidSwitch(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
