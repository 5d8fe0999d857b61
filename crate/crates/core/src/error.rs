use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("step called on a terminated episode; call reset first")]
    StepAfterDone,
    #[error("action {action} out of range for {count} actions")]
    InvalidAction { action: usize, count: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),
    #[error("architectures differ")]
    ArchitectureMismatch,
    #[error("non-finite gradient")]
    NonFiniteGradient,
    #[error("invalid agent config: {0}")]
    InvalidConfig(String),
    #[error("replay buffer holds {have} transitions, need {need}")]
    InsufficientData { have: usize, need: usize },
    #[error("negative KL divergence {0}")]
    NegativeKl(f64),
    #[error("empty sequence")]
    EmptySequence,
    #[error("reward {0} outside [0, 1]")]
    RewardOutOfRange(f64),
    #[error("arm {arm} out of range for {count} arms")]
    InvalidArm { arm: usize, count: usize },
    #[error("only {pulls} pulls for {arms} arms")]
    InsufficientPulls { pulls: u64, arms: usize },
    #[error("config error: {0}")]
    Config(String),
    #[error("missing logs in {0}")]
    MissingLogs(PathBuf),
    #[error("malformed log {path}: {msg}")]
    MalformedLog { path: PathBuf, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
