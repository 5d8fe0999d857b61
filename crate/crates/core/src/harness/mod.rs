//! Experiment configuration, the window protocol, log files and summaries.

pub mod aggregate;
pub mod config;
pub mod experiment;
pub mod logs;
pub mod run;
pub mod selftest;

pub use aggregate::{aggregate, Aggregate};
pub use config::{ArmChoice, DynamicsConfig, ExperimentConfig};
pub use experiment::{calibrate, run_experiment, run_strategy, Calibration, ExperimentReport, StrategyRun};
pub use run::{ArmSlot, EpisodeRecord, RunState, WindowRecord};
