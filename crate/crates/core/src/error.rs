use thiserror::Error;

/// Errors raised while validating a frequency specification.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("empty alphabet")]
    Empty,
    #[error("NonPositiveWeight at letter {index}")]
    NonPositiveWeight { index: usize },
    #[error("SumNotOne residual={residual}")]
    SumNotOne { residual: String },
    #[error("NotNonincreasing at letter {index}")]
    NotNonincreasing { index: usize },
    #[error("TailMismatch at letter {index}")]
    TailMismatch { index: usize },
}

/// Errors from the scheduler and sequence generation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("deficit undefined before the first step")]
    ZeroSteps,
    #[error("InvalidPrefixLetter {index}")]
    InvalidPrefixLetter { index: usize },
    #[error("prefix of length {prefix} exceeds requested length {n}")]
    PrefixTooLong { prefix: usize, n: usize },
    #[error("letter {index} is not materialized")]
    UnknownLetter { index: usize },
}

/// Errors from the diagnostics harness.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagError {
    #[error("deficit undefined before the first step")]
    ZeroSteps,
    #[error("checkpoint {checkpoint} beyond sequence length {len}")]
    CheckpointBeyondSequence { checkpoint: usize, len: usize },
    #[error("checkpoints must be strictly increasing and positive")]
    UnorderedCheckpoints,
    #[error("need at least 3 checkpoints spanning 2 decades")]
    InsufficientCheckpoints,
    #[error("DegenerateTrace: fewer than two nonzero deviations and the last checkpoint is not exact")]
    DegenerateTrace,
}

/// Errors from the numeration module.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumerationError {
    #[error("BaseTooSmall: base {0} < 2")]
    BaseTooSmall(u64),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

/// Errors from the torus pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TorusError {
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: String, hi: String },
    #[error("partition: {0}")]
    BadPartition(String),
    #[error("measure: {0}")]
    BadMeasure(String),
    #[error("IntervalTooShort: interval {index} shorter than c_min")]
    IntervalTooShort { index: usize },
    #[error("ImageTooShort at m={m}")]
    ImageTooShort { m: usize },
    #[error("PrecisionExhausted at m={m}")]
    PrecisionExhausted { m: usize },
    #[error("MembershipBreak at m={m}")]
    MembershipBreak { m: usize },
    #[error("empty target list")]
    EmptyTargets,
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}
