//! Composite surrogate reward: normalized true reward mixed with a bounded
//! certainty score derived from the dynamics model's information gain.
//!
//! A large posterior update means the model was surprised. The certainty
//! score maps an information gain `kl` to `1 / (1 + kl / m)` where `m` is the
//! running mean of earlier gains for the same arm, so scores are scale free
//! and approach 1 as updates shrink relative to the arm's history.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Lower bound on the running mean used as the certainty denominator.
pub const EPS_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurrogateConfig {
    pub eta: f64,
    pub ma_window: usize,
    pub clip: bool,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        Self { eta: 0.5, ma_window: 10, clip: true }
    }
}

impl SurrogateConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0) || !self.eta.is_finite() {
            return Err(Error::Config(format!("eta must be finite and >= 0, got {}", self.eta)));
        }
        if self.ma_window == 0 {
            return Err(Error::Config("ma_window must be positive".into()));
        }
        Ok(())
    }
}

/// Running count, mean and extrema of a scalar stream.
#[derive(Debug, Clone, PartialEq)]
pub struct RunningNorm<T> {
    pub count: u64,
    pub running_mean: T,
    pub running_min: T,
    pub running_max: T,
    pub window: usize,
}

impl<T: Scalar> RunningNorm<T> {
    pub fn new(window: usize) -> Self {
        Self {
            count: 0,
            running_mean: T::zero(),
            running_min: T::infinity(),
            running_max: T::neg_infinity(),
            window: window.max(1),
        }
    }

    pub fn observe(&mut self, x: T) {
        self.count += 1;
        self.running_mean += (x - self.running_mean) / T::c(self.count as f64);
        self.running_min = self.running_min.min(x);
        self.running_max = self.running_max.max(x);
    }
}

/// `1 / (1 + kl / max(mean, ε))` against the statistics seen so far, then
/// folds `kl` into `norm`.
pub fn certainty_score<T: Scalar>(kl: T, norm: &mut RunningNorm<T>) -> Result<T> {
    if !(kl >= T::zero()) {
        return Err(Error::NegativeKl(kl.as_f64()));
    }
    let denom = norm.running_mean.max(T::c(EPS_FLOOR));
    let score = T::one() / (T::one() + kl / denom);
    norm.observe(kl);
    Ok(score)
}

/// `(r + η c) / (1 + η)`.
pub fn composite_reward<T: Scalar>(true_reward_normalized: T, certainty_ma: T, config: &SurrogateConfig) -> T {
    let eta = T::c(config.eta);
    (true_reward_normalized + eta * certainty_ma) / (T::one() + eta)
}

/// Min-max scaling of `raw` against the extrema seen so far (0.5 while the
/// range is degenerate), optionally clipped to `[0, 1]`; then folds `raw`
/// into `norm`.
pub fn normalize_reward<T: Scalar>(raw: T, norm: &mut RunningNorm<T>, clip: bool) -> T {
    let (lo, hi) = (norm.running_min, norm.running_max);
    let half = T::c(0.5);
    let scaled = if norm.count == 0 {
        half
    } else if hi > lo {
        (raw - lo) / (hi - lo)
    } else if raw > hi {
        T::one()
    } else if raw < lo {
        T::zero()
    } else {
        half
    };
    norm.observe(raw);
    if clip {
        scaled.max(T::zero()).min(T::one())
    } else {
        scaled
    }
}

/// Mean of the last `min(window, len)` values.
pub fn moving_average<T: Scalar>(values: &[T], window: usize) -> Result<T> {
    if values.is_empty() {
        return Err(Error::EmptySequence);
    }
    let w = window.max(1).min(values.len());
    let tail = &values[values.len() - w..];
    Ok(tail.iter().copied().sum::<T>() / T::from_usize_lossy(w))
}

/// Per-arm certainty state: the information-gain statistics and the most
/// recent certainty scores.
#[derive(Debug, Clone, PartialEq)]
pub struct CertaintyTracker<T> {
    norm: RunningNorm<T>,
    recent: VecDeque<T>,
}

impl<T: Scalar> CertaintyTracker<T> {
    pub fn new(ma_window: usize) -> Self {
        Self { norm: RunningNorm::new(ma_window), recent: VecDeque::new() }
    }

    pub fn norm(&self) -> &RunningNorm<T> {
        &self.norm
    }

    /// Scores `kl` and records the score.
    pub fn push(&mut self, kl: T) -> Result<T> {
        let score = certainty_score(kl, &mut self.norm)?;
        self.recent.push_back(score);
        while self.recent.len() > self.norm.window {
            self.recent.pop_front();
        }
        Ok(score)
    }

    /// Moving average of the recorded scores.
    pub fn moving_average(&self) -> Result<T> {
        let v: Vec<T> = self.recent.iter().copied().collect();
        moving_average(&v, self.norm.window)
    }
}
