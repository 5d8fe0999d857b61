//! Seeded control tasks.
//!
//! Each [`Env`] is reset with an explicit seed; the start state and any
//! stochastic transitions are drawn from a stream seeded by that value, so a
//! (kind, seed, action sequence) triple always replays the same transitions.
//! Truncation at `max_episode_steps` is reported as an ordinary terminal
//! transition.

pub mod cartpole;
pub mod mountain_car;
pub mod noisy_chain;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Stream};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvKind {
    CartPole,
    MountainCar,
    NoisyChain,
}

impl EnvKind {
    pub fn spec(self) -> EnvSpec {
        match self {
            EnvKind::CartPole => EnvSpec {
                state_dim: 4,
                action_count: 2,
                reward_min: 0.0,
                reward_max: 1.0,
                max_episode_steps: cartpole::MAX_EPISODE_STEPS,
            },
            EnvKind::MountainCar => EnvSpec {
                state_dim: 2,
                action_count: 3,
                reward_min: -1.0,
                reward_max: 0.0,
                max_episode_steps: mountain_car::MAX_EPISODE_STEPS,
            },
            EnvKind::NoisyChain => EnvSpec {
                state_dim: 1,
                action_count: 2,
                reward_min: 0.0,
                reward_max: noisy_chain::GOAL_REWARD,
                max_episode_steps: noisy_chain::MAX_EPISODE_STEPS,
            },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EnvKind::CartPole => "cart_pole",
            EnvKind::MountainCar => "mountain_car",
            EnvKind::NoisyChain => "noisy_chain",
        }
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "cart_pole" | "cartpole" => Ok(EnvKind::CartPole),
            "mountain_car" | "mountaincar" => Ok(EnvKind::MountainCar),
            "noisy_chain" | "noisychain" => Ok(EnvKind::NoisyChain),
            other => Err(Error::Config(format!("unknown environment `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvSpec {
    pub state_dim: usize,
    pub action_count: usize,
    pub reward_min: f64,
    pub reward_max: f64,
    pub max_episode_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition<T> {
    pub state: Vec<T>,
    pub action: usize,
    pub next_state: Vec<T>,
    pub reward: T,
    pub done: bool,
}

#[derive(Debug, Clone)]
pub struct Env<T> {
    kind: EnvKind,
    spec: EnvSpec,
    rng: Stream,
    state: Vec<T>,
    cell: usize,
    step_count: usize,
    done: bool,
}

impl<T: Scalar> Env<T> {
    /// A fresh instance; it is terminal until the first [`Env::reset`].
    pub fn new(kind: EnvKind) -> Self {
        let spec = kind.spec();
        Self {
            kind,
            spec,
            rng: rng::stream(0),
            state: vec![T::zero(); spec.state_dim],
            cell: 0,
            step_count: 0,
            done: true,
        }
    }

    pub fn kind(&self) -> EnvKind {
        self.kind
    }

    pub fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    pub fn state(&self) -> &[T] {
        &self.state
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn reset(&mut self, seed: u64) -> Vec<T> {
        self.rng = rng::stream(seed);
        self.step_count = 0;
        self.done = false;
        match self.kind {
            EnvKind::CartPole => {
                let b = cartpole::START_BOX;
                for v in self.state.iter_mut() {
                    *v = T::c(self.rng.gen_range(-b..b));
                }
            }
            EnvKind::MountainCar => {
                let p = self.rng.gen_range(mountain_car::START_LOW..mountain_car::START_HIGH);
                self.state[0] = T::c(p);
                self.state[1] = T::zero();
            }
            EnvKind::NoisyChain => {
                self.cell = 0;
                self.state[0] = T::c(noisy_chain::observe(0));
            }
        }
        self.state.clone()
    }

    /// Places the environment in an arbitrary non-terminal state. Used to
    /// probe single transitions; for the chain the state is `[cell / 4]`.
    pub fn set_state(&mut self, state: &[T]) -> Result<()> {
        if state.len() != self.spec.state_dim {
            return Err(Error::DimensionMismatch { expected: self.spec.state_dim, got: state.len() });
        }
        if self.kind == EnvKind::NoisyChain {
            let cell = (state[0].as_f64() * noisy_chain::GOAL as f64).round();
            if !(0.0..noisy_chain::GOAL as f64).contains(&cell) {
                return Err(Error::InvalidConfig(format!("chain cell {cell} is not a start cell")));
            }
            self.cell = cell as usize;
            self.state[0] = T::c(noisy_chain::observe(self.cell));
        } else {
            self.state.copy_from_slice(state);
        }
        self.done = false;
        Ok(())
    }

    pub fn step(&mut self, action: usize) -> Result<Transition<T>> {
        if self.done {
            return Err(Error::StepAfterDone);
        }
        if action >= self.spec.action_count {
            return Err(Error::InvalidAction { action, count: self.spec.action_count });
        }
        let prev = self.state.clone();
        let (terminated, reward) = match self.kind {
            EnvKind::CartPole => (cartpole::advance(&mut self.state, action), T::one()),
            EnvKind::MountainCar => (mountain_car::advance(&mut self.state, action), -T::one()),
            EnvKind::NoisyChain => {
                let u: f64 = self.rng.gen();
                self.cell = noisy_chain::advance(self.cell, action, u);
                self.state[0] = T::c(noisy_chain::observe(self.cell));
                if self.cell == noisy_chain::GOAL {
                    (true, T::c(noisy_chain::GOAL_REWARD))
                } else {
                    (false, T::zero())
                }
            }
        };
        self.step_count += 1;
        self.done = terminated || self.step_count >= self.spec.max_episode_steps;
        Ok(Transition { state: prev, action, next_state: self.state.clone(), reward, done: self.done })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specs() {
        let c = EnvKind::CartPole.spec();
        assert_eq!((c.state_dim, c.action_count), (4, 2));
        let m = EnvKind::MountainCar.spec();
        assert_eq!((m.state_dim, m.action_count), (2, 3));
        let n = EnvKind::NoisyChain.spec();
        assert_eq!((n.state_dim, n.action_count), (1, 2));
        for k in [EnvKind::CartPole, EnvKind::MountainCar, EnvKind::NoisyChain] {
            let s = k.spec();
            assert!(s.reward_min < s.reward_max);
            assert_eq!(k.name().parse::<EnvKind>().unwrap(), k);
        }
    }

    #[test]
    fn cartpole_start_box_and_determinism() {
        let mut e = Env::<f64>::new(EnvKind::CartPole);
        for seed in 0..200 {
            let s = e.reset(seed);
            assert!(s.iter().all(|v| v.abs() <= 0.05));
            assert_eq!(s, e.reset(seed));
        }
    }

    #[test]
    fn mountain_car_start() {
        let mut e = Env::<f64>::new(EnvKind::MountainCar);
        for seed in 0..200 {
            let s = e.reset(seed);
            assert!((-0.6..=-0.4).contains(&s[0]));
            assert_eq!(s[1], 0.0);
        }
    }

    #[test]
    fn mountain_car_push_right_from_rest() {
        let mut e = Env::<f64>::new(EnvKind::MountainCar);
        e.reset(0);
        e.set_state(&[-0.5, 0.0]).unwrap();
        let t = e.step(2).unwrap();
        // 0.001 - 0.0025 * cos(-1.5), evaluated by hand: cos(1.5) = 0.0707372016677029
        let expected_v = 0.001 - 0.0025 * 0.070_737_201_667_702_9;
        assert!((t.next_state[1] - expected_v).abs() < 1e-15);
        assert!((t.next_state[0] - (-0.5 + expected_v)).abs() < 1e-15);
        assert_eq!(t.reward, -1.0);
    }

    #[test]
    fn step_errors() {
        let mut e = Env::<f64>::new(EnvKind::CartPole);
        assert!(matches!(e.step(0), Err(Error::StepAfterDone)));
        e.reset(1);
        assert!(matches!(e.step(2), Err(Error::InvalidAction { action: 2, count: 2 })));
    }

    #[test]
    fn truncation_at_max_steps() {
        let mut e = Env::<f64>::new(EnvKind::MountainCar);
        e.reset(3);
        let max = e.spec().max_episode_steps;
        for i in 0..max {
            let t = e.step(1).unwrap();
            assert_eq!(t.done, i == max - 1, "step {i}");
        }
        assert!(matches!(e.step(1), Err(Error::StepAfterDone)));
    }

    #[test]
    fn chain_goal_pays_and_terminates() {
        let mut e = Env::<f64>::new(EnvKind::NoisyChain);
        e.reset(0);
        e.set_state(&[0.75]).unwrap();
        let t = loop {
            let t = e.step(1).unwrap();
            if t.done {
                break t;
            }
        };
        if t.next_state[0] == 1.0 {
            assert_eq!(t.reward, 1.0);
        }
    }

    #[test]
    fn f32_instance_runs() {
        let mut e = Env::<f32>::new(EnvKind::CartPole);
        e.reset(5);
        let mut n = 0;
        while !e.is_done() {
            e.step(n % 2).unwrap();
            n += 1;
        }
        assert!(n <= 200);
    }
}
