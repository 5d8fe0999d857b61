//! Central finite-difference checks for the analytic ELBO and TD-loss
//! gradients.

use rand::Rng;

use crate::agent::Agent;
use crate::dynamics::{self, DynamicsBatch, VariationalParams};
use crate::env::{Env, EnvKind, Transition};
use crate::error::Result;
use crate::rng;

pub const STEP: f64 = 1e-5;
/// Denominator floor for the relative error, so coordinates whose gradient
/// is essentially zero are compared absolutely.
pub const SCALE_FLOOR: f64 = 1e-3;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(SCALE_FLOOR)
}

/// Largest relative error between `analytic` and central differences of `f`
/// around `x`.
pub fn max_relative_error(analytic: &[f64], x: &[f64], mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    let mut probe = x.to_vec();
    let mut worst: f64 = 0.0;
    for j in 0..x.len() {
        probe[j] = x[j] + STEP;
        let up = f(&probe);
        probe[j] = x[j] - STEP;
        let down = f(&probe);
        probe[j] = x[j];
        worst = worst.max(relative_error(analytic[j], (up - down) / (2.0 * STEP)));
    }
    worst
}

/// `n` transitions from uniformly random play, resetting on termination.
pub fn random_transitions(kind: EnvKind, n: usize, seed: u64) -> Vec<Transition<f64>> {
    let mut env = Env::<f64>::new(kind);
    let actions = env.spec().action_count;
    let mut pick = rng::derive_stream(seed, "gradcheck-actions", &[]);
    let mut out = Vec::with_capacity(n);
    let mut episode = 0;
    env.reset(rng::derive_seed(seed, "gradcheck-reset", &[episode]));
    while out.len() < n {
        if env.is_done() {
            episode += 1;
            env.reset(rng::derive_seed(seed, "gradcheck-reset", &[episode]));
        }
        out.push(env.step(pick.gen_range(0..actions)).expect("valid action"));
    }
    out
}

/// Worst relative error over all μ and ρ coordinates of the ELBO gradient,
/// using `n_mc` samples with a fixed noise seed.
pub fn elbo_gradient_error(
    params: &VariationalParams<f64>,
    batch: &DynamicsBatch<f64>,
    n_mc: usize,
    noise_seed: u64,
) -> Result<(f64, f64)> {
    let (_, grad) = dynamics::elbo_with_gradient(params, batch, n_mc, noise_seed)?;
    let value = |p: &VariationalParams<f64>| dynamics::elbo(p, batch, n_mc, noise_seed).expect("valid batch").value;
    let mu_err = max_relative_error(&grad.mu, params.mu(), |x| {
        let mut p = params.clone();
        p.mu_mut().copy_from_slice(x);
        value(&p)
    });
    let rho_err = max_relative_error(&grad.rho, params.rho(), |x| {
        let mut p = params.clone();
        p.rho_mut().copy_from_slice(x);
        value(&p)
    });
    Ok((mu_err, rho_err))
}

/// Worst relative error of the TD-loss gradient at the agent's current
/// Q-parameters, with targets held fixed.
pub fn td_gradient_error(agent: &mut Agent<f64>, batch: &[Transition<f64>]) -> f64 {
    let refs: Vec<&Transition<f64>> = batch.iter().collect();
    let targets = agent.td_targets(&refs);
    let params = agent.q_params().to_vec();
    let (_, grad) = agent.td_loss_with_gradient(&params, &refs, &targets);
    max_relative_error(&grad, &params, |x| agent.td_loss(x, &refs, &targets))
}
