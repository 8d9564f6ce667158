use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("register name collision: {0}")]
    RegisterCollision(String),

    #[error("unknown register: {0}")]
    UnknownRegister(String),

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid effect operator: {0}")]
    InvalidEffect(String),

    #[error("gate is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("qubit budget exceeded: need {needed} qubits, limit {limit}")]
    QubitBudget { needed: usize, limit: usize },

    #[error("outcome {0} has zero probability")]
    ZeroProbability(u8),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("input outside function domain: {0}")]
    OutOfDomain(String),

    #[error("missing encoding for Alice input {0}")]
    MissingEncoding(u64),

    #[error("amplification plan rejected: {0}")]
    PlanRejected(String),

    #[error("code search failed: {0}")]
    CodeSearch(String),

    #[error("copy budget exhausted: {0}")]
    CopyBudget(String),

    #[error("capacity exceeded: {len} bits, capacity {capacity}")]
    Capacity { len: usize, capacity: usize },

    #[error("promise violation: {0}")]
    PromiseViolation(String),

    #[error("protocol format error: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
