//! One run: a set of arms (agent + dynamics model + certainty state), a
//! shared environment, and the window loop.
//!
//! Random streams are keyed so that an arm's trajectory depends only on
//! `(master_seed, run_id, arm, number of episodes it has played)`:
//!
//! | stream           | label           | coordinates                     |
//! |------------------|-----------------|---------------------------------|
//! | agent            | `agent`         | run, arm                        |
//! | dynamics init    | `dynamics`      | run, arm                        |
//! | dynamics batches | `dynamics-batch`| run, arm                        |
//! | dynamics noise   | `dynamics-noise`| run, arm, update number         |
//! | episode reset    | `episode`       | run, arm, arm-local episode     |
//! | bandit           | `bandit:<name>` | run                             |

use rand::Rng;

use super::config::ExperimentConfig;
use crate::agent::{ActMode, Agent};
use crate::dynamics::{self, DynamicsBatch, VariationalParams};
use crate::env::Env;
use crate::error::Result;
use crate::rng::{self, Stream};
use crate::surrogate::{self, CertaintyTracker, RunningNorm};

#[derive(Debug, Clone, PartialEq)]
pub struct WindowRecord {
    pub run_id: usize,
    pub window_index: usize,
    pub strategy: String,
    pub chosen_arm: usize,
    pub arm_label: String,
    pub episode_returns: Vec<f64>,
    pub mean_return: f64,
    pub normalized_return: f64,
    pub mean_info_gain: f64,
    pub certainty_ma: f64,
    pub composite_reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub run_id: usize,
    pub window_index: usize,
    pub arm: usize,
    /// Arm-local episode number.
    pub episode: u64,
    pub steps: usize,
    pub episode_return: f64,
    pub info_gain: f64,
    pub certainty: f64,
}

#[derive(Debug, Clone)]
pub struct ArmSlot {
    pub agent: Agent<f64>,
    pub model: VariationalParams<f64>,
    pub certainty: CertaintyTracker<f64>,
    pub episodes: u64,
    pub model_updates: u64,
    batch_rng: Stream,
}

pub struct RunState<'a> {
    config: &'a ExperimentConfig,
    run_id: usize,
    env: Env<f64>,
    arms: Vec<ArmSlot>,
    reward_norm: RunningNorm<f64>,
}

impl<'a> RunState<'a> {
    /// Fresh agents, dynamics models and surrogate state for `run_id`.
    pub fn new(config: &'a ExperimentConfig, run_id: usize) -> Result<Self> {
        let spec = config.env.spec();
        let master = config.master_seed;
        let r = run_id as u64;
        let arms = config
            .arms
            .iter()
            .enumerate()
            .map(|(k, ac)| {
                let k = k as u64;
                let agent = Agent::new(ac.clone(), &spec, rng::derive_seed(master, "agent", &[r, k]))?;
                let d = &config.dynamics;
                let model = VariationalParams::for_env(
                    &spec,
                    &d.hidden_layers,
                    d.prior_std,
                    rng::derive_seed(master, "dynamics", &[r, k]),
                )?
                .with_obs_std(d.obs_std);
                Ok(ArmSlot {
                    agent,
                    model,
                    certainty: CertaintyTracker::new(config.surrogate.ma_window),
                    episodes: 0,
                    model_updates: 0,
                    batch_rng: rng::derive_stream(master, "dynamics-batch", &[r, k]),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            config,
            run_id,
            env: Env::new(config.env),
            arms,
            reward_norm: RunningNorm::new(1),
        })
    }

    pub fn arms(&self) -> &[ArmSlot] {
        &self.arms
    }

    pub fn arm_count(&self) -> usize {
        self.arms.len()
    }

    /// Plays `window_episodes` episodes with `arm`, training its agent
    /// online and its dynamics model after every episode. Only that arm's
    /// state changes. The returned record has `normalized_return` and
    /// `composite_reward` unset (NaN) until [`RunState::score`].
    pub fn run_window(
        &mut self,
        arm: usize,
        window_index: usize,
        strategy: &str,
        episodes_out: &mut Vec<EpisodeRecord>,
    ) -> Result<WindowRecord> {
        let cfg = self.config;
        let master = cfg.master_seed;
        let r = self.run_id as u64;
        let action_count = self.env.spec().action_count;
        let slot = &mut self.arms[arm];
        let mut returns = Vec::with_capacity(cfg.window_episodes);
        let mut gains = Vec::with_capacity(cfg.window_episodes);

        for _ in 0..cfg.window_episodes {
            let seed = rng::derive_seed(master, "episode", &[r, arm as u64, slot.episodes]);
            let mut state = self.env.reset(seed);
            let mut ret = 0.0;
            let mut steps = 0;
            loop {
                let action = slot.agent.act(&state, ActMode::Explore)?;
                let t = self.env.step(action)?;
                ret += t.reward;
                steps += 1;
                let done = t.done;
                state.clone_from(&t.next_state);
                slot.agent.observe(t);
                if slot.agent.can_update() {
                    slot.agent.update()?;
                }
                if done {
                    break;
                }
            }

            let before = slot.model.clone();
            let d = &cfg.dynamics;
            let replay = slot.agent.replay();
            for _ in 0..d.train_steps {
                let picks: Vec<usize> = (0..d.batch_size).map(|_| slot.batch_rng.gen_range(0..replay.len())).collect();
                let batch = DynamicsBatch::from_transitions(picks.iter().map(|&i| replay.get(i)), action_count)?;
                let noise = rng::derive_seed(master, "dynamics-noise", &[r, arm as u64, slot.model_updates]);
                let (next, _) = dynamics::train_step(&slot.model, &batch, d.step_size(slot.model_updates), noise)?;
                slot.model = next;
                slot.model_updates += 1;
            }
            let gain = dynamics::posterior_kl(&slot.model, &before)?;
            let certainty = slot.certainty.push(gain)?;

            episodes_out.push(EpisodeRecord {
                run_id: self.run_id,
                window_index,
                arm,
                episode: slot.episodes,
                steps,
                episode_return: ret,
                info_gain: gain,
                certainty,
            });
            slot.episodes += 1;
            returns.push(ret);
            gains.push(gain);
        }

        let mean_return = crate::stats::mean(&returns);
        Ok(WindowRecord {
            run_id: self.run_id,
            window_index,
            strategy: strategy.to_string(),
            chosen_arm: arm,
            arm_label: cfg.arms[arm].label.clone(),
            mean_return,
            episode_returns: returns,
            normalized_return: f64::NAN,
            mean_info_gain: crate::stats::mean(&gains),
            certainty_ma: slot.certainty.moving_average()?,
            composite_reward: f64::NAN,
        })
    }

    /// Normalizes the window's mean return against the run-wide extrema and
    /// forms the composite reward the bandit receives.
    pub fn score(&mut self, record: &mut WindowRecord) {
        let s = &self.config.surrogate;
        record.normalized_return = surrogate::normalize_reward(record.mean_return, &mut self.reward_norm, s.clip);
        record.composite_reward = surrogate::composite_reward(record.normalized_return, record.certainty_ma, s);
    }
}
