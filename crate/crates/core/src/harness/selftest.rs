//! Fast end-to-end sanity checks behind the `selftest` subcommand.

use super::config::ExperimentConfig;
use super::experiment::run_strategy;
use crate::agent::{Agent, AgentConfig};
use crate::bandit::{BanditState, Strategy};
use crate::dynamics::{self, DynamicsBatch, VariationalParams};
use crate::env::EnvKind;
use crate::error::Result;
use crate::gradcheck;
use crate::rng;
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

pub fn run_all(seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();

    let a = VariationalParams::<f64>::init(&[3, 8, 2], 0.5, seed)?;
    let self_kl = dynamics::posterior_kl(&a, &a)?;
    out.push(check("posterior_kl(a, a) = 0", self_kl == 0.0, format!("{self_kl}")));

    let transitions = gradcheck::random_transitions(EnvKind::CartPole, 16, seed);
    let batch = DynamicsBatch::from_transitions(transitions.iter(), 2)?;
    let model = VariationalParams::<f64>::init(&[6, 8, 4], 0.5, seed)?;
    let (mu_err, rho_err) = gradcheck::elbo_gradient_error(&model, &batch, 2, seed)?;
    out.push(check("ELBO gradient vs finite differences", mu_err.max(rho_err) < 1e-4, format!("mu {mu_err:.2e}, rho {rho_err:.2e}")));

    let mut cfg = AgentConfig::default_pool()[0].clone();
    cfg.hidden_layers = vec![8];
    let mut agent = Agent::<f64>::new(cfg, &EnvKind::CartPole.spec(), seed)?;
    let td_err = gradcheck::td_gradient_error(&mut agent, &transitions);
    out.push(check("TD-loss gradient vs finite differences", td_err < 1e-4, format!("{td_err:.2e}")));

    let means = [0.9, 0.5, 0.1];
    let runs = 20;
    let mut hits = 0;
    for r in 0..runs {
        let mut b = BanditState::<f64>::new(Strategy::Ucb1 { c: 1.0 }, 3, rng::derive_seed(seed, "selftest-ucb", &[r]))?;
        let mut coin = rng::derive_stream(seed, "selftest-coin", &[r]);
        for _ in 0..2000 {
            let arm = b.select();
            let reward = if coin.gen::<f64>() < means[arm] { 1.0 } else { 0.0 };
            b.update(arm, reward)?;
        }
        hits += usize::from(b.recommend()? == 0);
    }
    out.push(check("UCB1 finds the best Bernoulli arm", hits * 100 >= 95 * runs as usize, format!("{hits}/{runs}")));

    let config = ExperimentConfig {
        env: EnvKind::NoisyChain,
        window_episodes: 2,
        total_windows: 6,
        n_runs: 1,
        master_seed: seed,
        ..ExperimentConfig::default()
    };
    let first = run_strategy(&config, 0, "uniform", Strategy::Uniform)?;
    let second = run_strategy(&config, 0, "uniform", Strategy::Uniform)?;
    out.push(check("window loop is deterministic", first.windows == second.windows, String::new()));

    let mut ablation = config.clone();
    ablation.surrogate.eta = 0.0;
    let run = run_strategy(&ablation, 0, "uniform", Strategy::Uniform)?;
    let same = run.windows.iter().all(|w| w.composite_reward == w.normalized_return);
    out.push(check("eta = 0 feeds the bandit the normalized reward", same, String::new()));

    Ok(out)
}
