//! Arm-selection strategies over rewards in `[0, 1]`.
//!
//! | strategy        | selection                                                        |
//! |-----------------|------------------------------------------------------------------|
//! | epsilon-greedy  | argmax mean w.p. `1 − ε`, else uniform                           |
//! | softmax         | `p_i ∝ exp(mean_i / τ)`                                          |
//! | UCB1            | each arm once, then argmax `mean_i + c √(2 ln t / n_i)`          |
//! | EXP3            | `p_i = (1 − γ) w_i / Σw + γ / K`; `w_i ← w_i exp(γ r / (p_i K))`  |
//! | uniform         | `1 / K`                                                          |
//! | fixed           | always the same arm                                              |
//!
//! Ties always go to the lowest arm index.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Stream};
use crate::scalar::{argmax, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BanditParams {
    pub epsilon: f64,
    pub tau: f64,
    pub ucb_c: f64,
    pub exp3_gamma: f64,
}

impl Default for BanditParams {
    fn default() -> Self {
        Self { epsilon: 0.1, tau: 0.1, ucb_c: 1.0, exp3_gamma: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    EpsilonGreedy { epsilon: f64 },
    Softmax { tau: f64 },
    Ucb1 { c: f64 },
    Exp3 { gamma: f64 },
    Uniform,
    FixedArm(usize),
}

/// Strategy as named in configs and logs, before hyperparameters are bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyName {
    EpsilonGreedy,
    Softmax,
    Ucb1,
    Exp3,
    Uniform,
    /// The calibrated best arm.
    Best,
    /// The calibrated worst arm.
    Worst,
    Fixed(usize),
}

impl StrategyName {
    pub fn bind(self, params: &BanditParams, best: Option<usize>, worst: Option<usize>) -> Result<Strategy> {
        let need = |arm: Option<usize>, what: &str| {
            arm.ok_or_else(|| Error::Config(format!("strategy `{what}` needs a known {what} arm")))
        };
        Ok(match self {
            StrategyName::EpsilonGreedy => Strategy::EpsilonGreedy { epsilon: params.epsilon },
            StrategyName::Softmax => Strategy::Softmax { tau: params.tau },
            StrategyName::Ucb1 => Strategy::Ucb1 { c: params.ucb_c },
            StrategyName::Exp3 => Strategy::Exp3 { gamma: params.exp3_gamma },
            StrategyName::Uniform => Strategy::Uniform,
            StrategyName::Best => Strategy::FixedArm(need(best, "best")?),
            StrategyName::Worst => Strategy::FixedArm(need(worst, "worst")?),
            StrategyName::Fixed(i) => Strategy::FixedArm(i),
        })
    }
}

impl fmt::Display for StrategyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyName::EpsilonGreedy => f.write_str("epsilon_greedy"),
            StrategyName::Softmax => f.write_str("softmax"),
            StrategyName::Ucb1 => f.write_str("ucb1"),
            StrategyName::Exp3 => f.write_str("exp3"),
            StrategyName::Uniform => f.write_str("uniform"),
            StrategyName::Best => f.write_str("best"),
            StrategyName::Worst => f.write_str("worst"),
            StrategyName::Fixed(i) => write!(f, "fixed{i}"),
        }
    }
}

impl FromStr for StrategyName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase().replace('-', "_");
        Ok(match s.as_str() {
            "epsilon_greedy" | "egreedy" => StrategyName::EpsilonGreedy,
            "softmax" => StrategyName::Softmax,
            "ucb1" | "ucb" => StrategyName::Ucb1,
            "exp3" => StrategyName::Exp3,
            "uniform" => StrategyName::Uniform,
            "best" | "oracle" => StrategyName::Best,
            "worst" => StrategyName::Worst,
            other => {
                let idx = other.strip_prefix("fixed").map(|r| r.trim_start_matches([':', '_']));
                match idx.and_then(|i| i.parse().ok()) {
                    Some(i) => StrategyName::Fixed(i),
                    None => return Err(Error::Config(format!("unknown strategy `{other}`"))),
                }
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PullRecord<T> {
    pub round: u64,
    pub arm: usize,
    pub reward: T,
}

#[derive(Debug, Clone)]
pub struct BanditState<T> {
    strategy: Strategy,
    counts: Vec<u64>,
    means: Vec<T>,
    weights: Vec<T>,
    t: u64,
    rng: Stream,
    history: Vec<PullRecord<T>>,
}

impl<T: Scalar> BanditState<T> {
    pub fn new(strategy: Strategy, arms: usize, seed: u64) -> Result<Self> {
        if arms == 0 {
            return Err(Error::Config("bandit needs at least one arm".into()));
        }
        if let Strategy::FixedArm(i) = strategy {
            if i >= arms {
                return Err(Error::InvalidArm { arm: i, count: arms });
            }
        }
        Ok(Self {
            strategy,
            counts: vec![0; arms],
            means: vec![T::zero(); arms],
            weights: vec![T::one(); arms],
            t: 0,
            rng: rng::stream(seed),
            history: Vec::new(),
        })
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn arms(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn means(&self) -> &[T] {
        &self.means
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn history(&self) -> &[PullRecord<T>] {
        &self.history
    }

    fn ucb_index(&self, c: f64) -> Vec<T> {
        let ln_t = T::c(self.t as f64).ln();
        self.means
            .iter()
            .zip(&self.counts)
            .map(|(&m, &n)| m + T::c(c) * (T::c(2.0) * ln_t / T::c(n as f64)).sqrt())
            .collect()
    }

    /// Current selection distribution. UCB1 is deterministic and reports a
    /// point mass on the arm it would play.
    pub fn probabilities(&self) -> Vec<T> {
        let k = self.arms();
        let kt = T::from_usize_lossy(k);
        let point = |i: usize| {
            let mut p = vec![T::zero(); k];
            p[i] = T::one();
            p
        };
        match self.strategy {
            Strategy::Uniform => vec![T::one() / kt; k],
            Strategy::FixedArm(i) => point(i),
            Strategy::Ucb1 { c } => point(self.ucb_choice(c)),
            Strategy::EpsilonGreedy { epsilon } => {
                let eps = T::c(epsilon);
                let mut p = vec![eps / kt; k];
                p[argmax(&self.means).unwrap()] += T::one() - eps;
                p
            }
            Strategy::Softmax { tau } => {
                let tau = T::c(tau);
                let top = self.means.iter().copied().fold(T::neg_infinity(), T::max);
                let e: Vec<T> = self.means.iter().map(|&m| ((m - top) / tau).exp()).collect();
                let z: T = e.iter().copied().sum();
                e.into_iter().map(|x| x / z).collect()
            }
            Strategy::Exp3 { gamma } => {
                let g = T::c(gamma);
                let z: T = self.weights.iter().copied().sum();
                self.weights.iter().map(|&w| (T::one() - g) * w / z + g / kt).collect()
            }
        }
    }

    fn ucb_choice(&self, c: f64) -> usize {
        if let Some(untried) = self.counts.iter().position(|&n| n == 0) {
            return untried;
        }
        argmax(&self.ucb_index(c)).unwrap()
    }

    fn sample(&mut self, probs: &[T]) -> usize {
        let u = T::c(self.rng.gen::<f64>());
        let mut acc = T::zero();
        for (i, &p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        probs.iter().rposition(|&p| p > T::zero()).unwrap_or(0)
    }

    pub fn select(&mut self) -> usize {
        let k = self.arms();
        match self.strategy {
            Strategy::FixedArm(i) => i,
            Strategy::Ucb1 { c } => self.ucb_choice(c),
            Strategy::Uniform => self.rng.gen_range(0..k),
            Strategy::EpsilonGreedy { epsilon } => {
                if self.rng.gen::<f64>() < epsilon {
                    self.rng.gen_range(0..k)
                } else {
                    argmax(&self.means).unwrap()
                }
            }
            Strategy::Softmax { .. } | Strategy::Exp3 { .. } => {
                let p = self.probabilities();
                self.sample(&p)
            }
        }
    }

    pub fn update(&mut self, arm: usize, reward: T) -> Result<()> {
        if arm >= self.arms() {
            return Err(Error::InvalidArm { arm, count: self.arms() });
        }
        if !(reward >= T::zero() && reward <= T::one()) {
            return Err(Error::RewardOutOfRange(reward.as_f64()));
        }
        if let Strategy::Exp3 { gamma } = self.strategy {
            let p = self.probabilities()[arm];
            let k = T::from_usize_lossy(self.arms());
            let estimate = reward / p;
            self.weights[arm] = self.weights[arm] * (T::c(gamma) * estimate / k).exp();
            let top = self.weights.iter().copied().fold(T::zero(), T::max);
            if top > T::c(1e30) {
                for w in &mut self.weights {
                    *w = (*w / top).max(T::min_positive_value());
                }
            }
        }
        self.counts[arm] += 1;
        let n = T::c(self.counts[arm] as f64);
        let old = self.means[arm];
        self.means[arm] = old + (reward - old) / n;
        self.history.push(PullRecord { round: self.t, arm, reward });
        self.t += 1;
        Ok(())
    }

    /// Most-pulled arm; ties go to the higher empirical mean, then the lower
    /// index.
    pub fn recommend(&self) -> Result<usize> {
        if (self.t as usize) < self.arms() {
            return Err(Error::InsufficientPulls { pulls: self.t, arms: self.arms() });
        }
        let mut best = 0;
        for i in 1..self.arms() {
            let (n, m) = (self.counts[i], self.means[i]);
            if n > self.counts[best] || (n == self.counts[best] && m > self.means[best]) {
                best = i;
            }
        }
        Ok(best)
    }
}

/// `Σ (max_i μ_i − μ_chosen)` over the history.
pub fn regret<T: Scalar>(history: &[PullRecord<T>], arm_means: &[T]) -> T {
    let top = arm_means.iter().copied().fold(T::neg_infinity(), T::max);
    history.iter().map(|r| top - arm_means[r.arm]).sum()
}
