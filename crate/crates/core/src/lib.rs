//! Bandit selection over reinforcement-learning agents.
//!
//! A multi-armed bandit picks which of several RL agents interacts with the
//! environment for the next window of episodes. The bandit's reward mixes
//! the window's normalized return with a certainty score derived from the
//! information gain of each agent's Bayesian dynamics model.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the `f64` instantiation used by the experiment harness.

pub mod agent;
pub mod bandit;
pub mod dynamics;
pub mod env;
pub mod error;
pub mod gradcheck;
pub mod harness;
pub mod mlp;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod surrogate;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Env = env::Env<f64>;
pub type Transition = env::Transition<f64>;
pub type Agent = agent::Agent<f64>;
pub type VariationalParams = dynamics::VariationalParams<f64>;
pub type VariationalParams32 = dynamics::VariationalParams<f32>;
pub type DynamicsBatch = dynamics::DynamicsBatch<f64>;
pub type ElboEstimate = dynamics::ElboEstimate<f64>;
pub type BanditState = bandit::BanditState<f64>;
pub type RunningNorm = surrogate::RunningNorm<f64>;
