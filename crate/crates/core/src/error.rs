use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("no finite-wavenumber instability for delta1 = {0} (instability at k = 0)")]
    NoFiniteKInstability(f64),

    #[error("homogeneous branch does not exist at pump {pump}")]
    BranchAbsent { pump: f64 },

    #[error("eigen-branch is complex at k = {k}")]
    ComplexBranch { k: f64 },

    #[error("linear theory only valid below threshold, got pump {0}")]
    AboveThreshold(f64),

    #[error("diffusion positivity violated: |alpha0| = {modulus}")]
    GuardViolation { modulus: f64 },

    #[error("non-finite field value at t = {time}")]
    NonFinite { time: f64 },

    #[error("unknown initial condition `{0}`")]
    UnknownInitKind(String),

    #[error("unphysical Q moments: m1 = {m1} below vacuum level by more than 5 standard errors")]
    UnphysicalMoments { m1: f64 },

    #[error("twin variance undefined: intensity sum {sum} at or below statistical floor {floor}")]
    UndefinedForVacuum { sum: f64, floor: f64 },

    #[error("insufficient samples: have {have}, need {need}")]
    InsufficientSamples { have: u64, need: u64 },

    #[error("mode {0} has no distinct partner")]
    Unpaired(i64),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("all {0} trajectories were rejected")]
    AllRejected(usize),

    #[error("checkpoint format: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
