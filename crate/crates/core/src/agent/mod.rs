//! Small DQN-style agents; each configuration is one bandit arm.
//!
//! A Q-network (dense `tanh` MLP, linear output with one value per action)
//! is trained by one-step temporal-difference learning from a uniformly
//! sampled replay minibatch:
//!
//! ```text
//! loss = 1/B Σ ½ (Q(s, a) − y)²,   y = r + γ · max_a' Q_target(s', a')   (y = r if done)
//! ```
//!
//! The target network is a copy of the Q-network refreshed every
//! `target_sync_interval` updates. Exploration is ε-greedy with ε decaying
//! linearly from `epsilon_start` to `epsilon_end` over `epsilon_decay_steps`
//! observed transitions.

mod optim;
mod replay;

pub use optim::{Optimizer, OptimizerKind};
pub use replay::ReplayBuffer;

use rand::seq::index;
use rand::Rng;
use rand_distr::Uniform;
use serde::{Deserialize, Serialize};

use crate::env::{EnvSpec, Transition};
use crate::error::{Error, Result};
use crate::mlp::{Activations, Layout};
use crate::rng::{self, Stream};
use crate::scalar::{argmax, Scalar};

fn default_true() -> bool {
    true
}

fn default_one() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    pub label: String,
    pub hidden_layers: Vec<usize>,
    pub learning_rate: f64,
    pub discount: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub epsilon_decay_steps: u64,
    pub replay_capacity: usize,
    pub batch_size: usize,
    pub target_sync_interval: u64,
    /// Observed transitions between TD updates.
    #[serde(default = "default_one")]
    pub update_every: u64,
    #[serde(default)]
    pub optimizer: OptimizerKind,
    #[serde(default = "default_true")]
    pub bias: bool,
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidConfig(format!("{}: {m}", self.label)));
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return fail(format!("learning_rate {} must be finite and >= 0", self.learning_rate));
        }
        if !(0.0..=1.0).contains(&self.discount) {
            return fail(format!("discount {} outside [0, 1]", self.discount));
        }
        for e in [self.epsilon_start, self.epsilon_end] {
            if !(0.0..=1.0).contains(&e) {
                return fail(format!("epsilon {e} outside [0, 1]"));
            }
        }
        if self.epsilon_end > self.epsilon_start {
            return fail("epsilon_end exceeds epsilon_start".into());
        }
        if self.epsilon_decay_steps == 0 || self.target_sync_interval == 0 || self.update_every == 0 {
            return fail("epsilon_decay_steps, target_sync_interval and update_every must be positive".into());
        }
        if self.replay_capacity == 0 || self.batch_size == 0 {
            return fail("replay_capacity and batch_size must be positive".into());
        }
        if self.batch_size > self.replay_capacity {
            return fail(format!("batch_size {} > replay_capacity {}", self.batch_size, self.replay_capacity));
        }
        if self.hidden_layers.iter().any(|&h| h == 0) {
            return fail("zero-width hidden layer".into());
        }
        Ok(())
    }

    fn base(label: &str) -> Self {
        Self {
            label: label.to_string(),
            hidden_layers: vec![32],
            learning_rate: 3e-3,
            discount: 0.99,
            epsilon_start: 1.0,
            epsilon_end: 0.02,
            epsilon_decay_steps: 2_000,
            replay_capacity: 10_000,
            batch_size: 32,
            target_sync_interval: 100,
            update_every: 2,
            optimizer: OptimizerKind::Adam,
            bias: true,
        }
    }

    /// The shipped four-arm pool: a tuned configuration, a deeper and
    /// slower-learning network, an aggressive learning rate, and a crippled
    /// arm that never learns and always acts at random.
    pub fn default_pool() -> Vec<AgentConfig> {
        vec![
            Self::base("good"),
            Self { hidden_layers: vec![16, 16], learning_rate: 3e-4, ..Self::base("deep_slow") },
            Self { learning_rate: 0.1, ..Self::base("high_lr") },
            Self { learning_rate: 0.0, epsilon_end: 1.0, ..Self::base("crippled") },
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActMode {
    Explore,
    Greedy,
}

#[derive(Debug, Clone)]
pub struct Agent<T> {
    config: AgentConfig,
    spec: EnvSpec,
    layout: Layout,
    q: Vec<T>,
    target: Vec<T>,
    optimizer: Optimizer<T>,
    replay: ReplayBuffer<T>,
    steps_seen: u64,
    updates: u64,
    act_rng: Stream,
    replay_rng: Stream,
    scratch: Activations<T>,
    grad: Vec<T>,
}

impl<T: Scalar> Agent<T> {
    /// Weights uniform in `±1/√fan_in`, zero biases. Action selection and
    /// replay sampling draw from separate streams derived from `seed`.
    pub fn new(config: AgentConfig, spec: &EnvSpec, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut sizes = vec![spec.state_dim];
        sizes.extend_from_slice(&config.hidden_layers);
        sizes.push(spec.action_count);
        let layout = Layout::new(&sizes, config.bias)?;
        let mut init = rng::derive_stream(seed, "agent-init", &[]);
        let mut q = vec![T::zero(); layout.param_count()];
        for l in 0..layout.layers() {
            let (start, _) = layout.layer_range(l);
            let (n_in, n_out) = (sizes[l], sizes[l + 1]);
            let b = 1.0 / (n_in as f64).sqrt();
            let dist = Uniform::new(-b, b);
            for w in &mut q[start..start + n_in * n_out] {
                *w = T::c(init.sample(dist));
            }
        }
        let n = q.len();
        Ok(Self {
            optimizer: Optimizer::new(config.optimizer, n),
            replay: ReplayBuffer::new(config.replay_capacity),
            target: q.clone(),
            q,
            scratch: layout.scratch(),
            grad: vec![T::zero(); n],
            layout,
            spec: *spec,
            steps_seen: 0,
            updates: 0,
            act_rng: rng::derive_stream(seed, "agent-act", &[]),
            replay_rng: rng::derive_stream(seed, "agent-replay", &[]),
            config,
        })
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn q_params(&self) -> &[T] {
        &self.q
    }

    /// Overwrites the online network (and the target network with it).
    pub fn set_q_params(&mut self, params: &[T]) -> Result<()> {
        if params.len() != self.q.len() {
            return Err(Error::DimensionMismatch { expected: self.q.len(), got: params.len() });
        }
        self.q.copy_from_slice(params);
        self.target.copy_from_slice(params);
        Ok(())
    }

    pub fn target_params(&self) -> &[T] {
        &self.target
    }

    pub fn replay(&self) -> &ReplayBuffer<T> {
        &self.replay
    }

    pub fn steps_seen(&self) -> u64 {
        self.steps_seen
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn epsilon(&self) -> f64 {
        let c = &self.config;
        let frac = (self.steps_seen as f64 / c.epsilon_decay_steps as f64).min(1.0);
        c.epsilon_start + (c.epsilon_end - c.epsilon_start) * frac
    }

    pub fn q_values(&mut self, state: &[T]) -> Result<Vec<T>> {
        self.check_state(state)?;
        self.layout.forward(&self.q, state, &mut self.scratch);
        Ok(self.scratch.output().to_vec())
    }

    fn check_state(&self, state: &[T]) -> Result<()> {
        if state.len() != self.spec.state_dim {
            return Err(Error::DimensionMismatch { expected: self.spec.state_dim, got: state.len() });
        }
        Ok(())
    }

    pub fn act(&mut self, state: &[T], mode: ActMode) -> Result<usize> {
        self.check_state(state)?;
        if mode == ActMode::Explore {
            let eps = self.epsilon();
            if eps > 0.0 && self.act_rng.gen::<f64>() < eps {
                return Ok(self.act_rng.gen_range(0..self.spec.action_count));
            }
        }
        self.layout.forward(&self.q, state, &mut self.scratch);
        Ok(argmax(self.scratch.output()).expect("at least two actions"))
    }

    pub fn observe(&mut self, t: Transition<T>) {
        self.replay.push(t);
        self.steps_seen += 1;
    }

    pub fn can_update(&self) -> bool {
        self.replay.len() >= self.config.batch_size && self.steps_seen % self.config.update_every == 0
    }

    /// One TD step on a replay minibatch; returns the pre-step loss.
    pub fn update(&mut self) -> Result<T> {
        let b = self.config.batch_size;
        if self.replay.len() < b {
            return Err(Error::InsufficientData { have: self.replay.len(), need: b });
        }
        let picks = index::sample(&mut self.replay_rng, self.replay.len(), b).into_vec();
        let mut grad = std::mem::take(&mut self.grad);
        grad.iter_mut().for_each(|g| *g = T::zero());
        let loss = {
            let batch: Vec<&Transition<T>> = picks.iter().map(|&i| self.replay.get(i)).collect();
            let gamma = T::c(self.config.discount);
            let targets = td_targets(&self.layout, &self.target, gamma, &batch, &mut self.scratch);
            td_loss_grad(&self.layout, &self.q, &batch, &targets, &mut self.scratch, Some(&mut grad))
        };
        if grad.iter().any(|g| !g.is_finite()) {
            self.grad = grad;
            return Err(Error::NonFiniteGradient);
        }
        let lr = T::c(self.config.learning_rate);
        self.optimizer.step(&mut self.q, &grad, lr);
        self.grad = grad;
        self.updates += 1;
        if self.updates % self.config.target_sync_interval == 0 {
            self.target.copy_from_slice(&self.q);
        }
        Ok(loss)
    }

    /// Bootstrapped targets `r + γ max Q_target(s')` (just `r` when done).
    pub fn td_targets(&mut self, batch: &[&Transition<T>]) -> Vec<T> {
        let gamma = T::c(self.config.discount);
        td_targets(&self.layout, &self.target, gamma, batch, &mut self.scratch)
    }

    /// TD loss of `params` against fixed `targets`, with its gradient.
    pub fn td_loss_with_gradient(&mut self, params: &[T], batch: &[&Transition<T>], targets: &[T]) -> (T, Vec<T>) {
        let mut grad = vec![T::zero(); params.len()];
        let loss = td_loss_grad(&self.layout, params, batch, targets, &mut self.scratch, Some(&mut grad));
        (loss, grad)
    }

    pub fn td_loss(&mut self, params: &[T], batch: &[&Transition<T>], targets: &[T]) -> T {
        td_loss_grad(&self.layout, params, batch, targets, &mut self.scratch, None)
    }
}

fn td_targets<T: Scalar>(
    layout: &Layout,
    target: &[T],
    gamma: T,
    batch: &[&Transition<T>],
    acts: &mut Activations<T>,
) -> Vec<T> {
    batch
        .iter()
        .map(|t| {
            if t.done {
                t.reward
            } else {
                layout.forward(target, &t.next_state, acts);
                let best = acts.output().iter().copied().fold(T::neg_infinity(), T::max);
                t.reward + gamma * best
            }
        })
        .collect()
}

fn td_loss_grad<T: Scalar>(
    layout: &Layout,
    params: &[T],
    batch: &[&Transition<T>],
    targets: &[T],
    acts: &mut Activations<T>,
    mut grad: Option<&mut Vec<T>>,
) -> T {
    let n = T::from_usize_lossy(batch.len());
    let mut g_out = vec![T::zero(); layout.output_dim()];
    let mut loss = T::zero();
    for (t, &y) in batch.iter().zip(targets) {
        layout.forward(params, &t.state, acts);
        let err = acts.output()[t.action] - y;
        loss += T::c(0.5) * err * err / n;
        if let Some(g) = grad.as_deref_mut() {
            g_out.iter_mut().for_each(|v| *v = T::zero());
            g_out[t.action] = err / n;
            layout.backward(params, acts, &g_out, g);
        }
    }
    loss
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::EnvKind;

    fn tiny_spec() -> EnvSpec {
        EnvSpec { state_dim: 1, action_count: 2, reward_min: 0.0, reward_max: 1.0, max_episode_steps: 10 }
    }

    fn tiny_config() -> AgentConfig {
        AgentConfig {
            label: "tiny".into(),
            hidden_layers: vec![],
            learning_rate: 0.5,
            discount: 0.9,
            epsilon_start: 1.0,
            epsilon_end: 0.0,
            epsilon_decay_steps: 10,
            replay_capacity: 4,
            batch_size: 1,
            target_sync_interval: 1,
            update_every: 1,
            optimizer: OptimizerKind::Sgd,
            bias: false,
        }
    }

    #[test]
    fn same_seed_same_network() {
        let spec = EnvKind::CartPole.spec();
        let c = AgentConfig::default_pool()[0].clone();
        let a = Agent::<f64>::new(c.clone(), &spec, 5).unwrap();
        let b = Agent::<f64>::new(c.clone(), &spec, 5).unwrap();
        assert_eq!(a.q_params(), b.q_params());
        assert_eq!(a.q_params(), a.target_params());
        assert_ne!(a.q_params(), Agent::<f64>::new(c, &spec, 6).unwrap().q_params());
    }

    #[test]
    fn invalid_configs() {
        let spec = tiny_spec();
        let bad = AgentConfig { batch_size: 5, ..tiny_config() };
        assert!(matches!(Agent::<f64>::new(bad, &spec, 0), Err(Error::InvalidConfig(_))));
        let bad = AgentConfig { epsilon_end: 0.5, epsilon_start: 0.1, ..tiny_config() };
        assert!(matches!(Agent::<f64>::new(bad, &spec, 0), Err(Error::InvalidConfig(_))));
        let linear = Agent::<f64>::new(tiny_config(), &spec, 0).unwrap();
        assert_eq!(linear.layout().sizes(), &[1, 2]);
    }

    #[test]
    fn greedy_ties_pick_lowest() {
        let mut a = Agent::<f64>::new(tiny_config(), &tiny_spec(), 0).unwrap();
        a.set_q_params(&[0.3, 0.3]).unwrap();
        assert_eq!(a.act(&[1.0], ActMode::Greedy).unwrap(), 0);
        a.set_q_params(&[0.1, 0.4]).unwrap();
        assert_eq!(a.act(&[1.0], ActMode::Greedy).unwrap(), 1);
        assert!(matches!(a.act(&[1.0, 2.0], ActMode::Greedy), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn epsilon_decays_linearly() {
        let mut a = Agent::<f64>::new(tiny_config(), &tiny_spec(), 0).unwrap();
        assert_eq!(a.epsilon(), 1.0);
        for _ in 0..5 {
            a.observe(Transition { state: vec![0.0], action: 0, next_state: vec![0.0], reward: 0.0, done: false });
        }
        assert!((a.epsilon() - 0.5).abs() < 1e-12);
        for _ in 0..20 {
            a.observe(Transition { state: vec![0.0], action: 0, next_state: vec![0.0], reward: 0.0, done: false });
        }
        assert_eq!(a.epsilon(), 0.0);
        assert_eq!(a.steps_seen(), 25);
        assert_eq!(a.replay().len(), 4);
    }

    #[test]
    fn tabular_td_update() {
        let mut a = Agent::<f64>::new(tiny_config(), &tiny_spec(), 0).unwrap();
        a.set_q_params(&[0.0, 0.0]).unwrap();
        assert!(matches!(a.update(), Err(Error::InsufficientData { have: 0, need: 1 })));
        a.observe(Transition { state: vec![1.0], action: 1, next_state: vec![1.0], reward: 1.0, done: true });
        let loss = a.update().unwrap();
        assert_eq!(loss, 0.5);
        assert_eq!(a.q_values(&[1.0]).unwrap(), vec![0.0, 0.5]);
    }

    #[test]
    fn zero_discount_target_is_reward() {
        let mut a = Agent::<f64>::new(AgentConfig { discount: 0.0, ..tiny_config() }, &tiny_spec(), 0).unwrap();
        a.set_q_params(&[5.0, 7.0]).unwrap();
        let t = Transition { state: vec![1.0], action: 0, next_state: vec![1.0], reward: 0.25, done: false };
        assert_eq!(a.td_targets(&[&t]), vec![0.25]);
        let with_gamma = Agent::<f64>::new(tiny_config(), &tiny_spec(), 0);
        let mut g = with_gamma.unwrap();
        g.set_q_params(&[5.0, 7.0]).unwrap();
        assert_eq!(g.td_targets(&[&t]), vec![0.25 + 0.9 * 7.0]);
    }
}
