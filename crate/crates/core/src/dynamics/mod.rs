//! Bayesian dynamics model with a mean-field Gaussian posterior.
//!
//! Every weight and bias `θ_j` has an independent posterior
//! `N(μ_j, σ_j²)` with `σ_j = softplus(ρ_j)`, and an isotropic prior
//! `N(0, prior_std²)`. The network maps `[state, one_hot(action)]` to the
//! mean of the next state; the observation model is a diagonal Gaussian with
//! fixed standard deviation `obs_std`.
//!
//! Training maximizes the evidence lower bound
//!
//! ```text
//! L(φ) = E_{θ~q(·;φ)} [ log p(D | θ) ] − KL(q(·;φ) ‖ p)
//! ```
//!
//! with reparameterized Monte Carlo gradients (`θ = μ + σ ε`). The change of
//! belief caused by an update is the closed-form [`posterior_kl`] between the
//! new and old posteriors, which is the information gain fed to the
//! surrogate reward.

mod kl;
pub mod snapshot;

pub use kl::gaussian_kl;

use rand::Rng;
use rand_distr::{StandardNormal, Uniform};

use crate::env::{EnvSpec, Transition};
use crate::error::{Error, Result};
use crate::mlp::Layout;
use crate::rng;
use crate::scalar::{sigmoid, softplus, softplus_inv, Scalar};

pub const DEFAULT_OBS_STD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct VariationalParams<T> {
    layout: Layout,
    mu: Vec<T>,
    rho: Vec<T>,
    prior_std: T,
    obs_std: T,
}

impl<T: Scalar> VariationalParams<T> {
    /// Posterior means drawn uniformly in `±1/√fan_in` for weights, zero for
    /// biases; every `σ` starts at `prior_std / 2`.
    pub fn init(layer_sizes: &[usize], prior_std: T, seed: u64) -> Result<Self> {
        if !(prior_std > T::zero()) || !prior_std.is_finite() {
            return Err(Error::InvalidArchitecture(format!("prior_std must be positive, got {prior_std}")));
        }
        let layout = Layout::new(layer_sizes, true)?;
        let mut rng = rng::stream(seed);
        let mut mu = vec![T::zero(); layout.param_count()];
        for l in 0..layout.layers() {
            let (start, _) = layout.layer_range(l);
            let (n_in, n_out) = (layout.sizes()[l], layout.sizes()[l + 1]);
            let bound = 1.0 / (n_in as f64).sqrt();
            let dist = Uniform::new(-bound, bound);
            for m in &mut mu[start..start + n_in * n_out] {
                *m = T::c(rng.sample(dist));
            }
        }
        let rho0 = softplus_inv(prior_std / T::c(2.0));
        let rho = vec![rho0; layout.param_count()];
        Ok(Self { layout, mu, rho, prior_std, obs_std: T::c(DEFAULT_OBS_STD) })
    }

    /// Architecture `[state_dim + action_count, hidden.., state_dim]`.
    pub fn for_env(spec: &EnvSpec, hidden: &[usize], prior_std: T, seed: u64) -> Result<Self> {
        let mut sizes = vec![spec.state_dim + spec.action_count];
        sizes.extend_from_slice(hidden);
        sizes.push(spec.state_dim);
        Self::init(&sizes, prior_std, seed)
    }

    pub fn with_obs_std(mut self, obs_std: T) -> Self {
        assert!(obs_std > T::zero(), "observation noise must be positive");
        self.obs_std = obs_std;
        self
    }

    pub(crate) fn from_parts(layout: Layout, mu: Vec<T>, rho: Vec<T>, prior_std: T, obs_std: T) -> Self {
        Self { layout, mu, rho, prior_std, obs_std }
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn layer_sizes(&self) -> &[usize] {
        self.layout.sizes()
    }

    pub fn param_count(&self) -> usize {
        self.mu.len()
    }

    pub fn prior_std(&self) -> T {
        self.prior_std
    }

    pub fn obs_std(&self) -> T {
        self.obs_std
    }

    pub fn mu(&self) -> &[T] {
        &self.mu
    }

    pub fn rho(&self) -> &[T] {
        &self.rho
    }

    pub fn mu_mut(&mut self) -> &mut [T] {
        &mut self.mu
    }

    pub fn rho_mut(&mut self) -> &mut [T] {
        &mut self.rho
    }

    pub fn sigma(&self, j: usize) -> T {
        softplus(self.rho[j])
    }

    pub fn sigmas(&self) -> Vec<T> {
        self.rho.iter().map(|&r| softplus(r)).collect()
    }

    fn same_architecture(&self, other: &Self) -> bool {
        self.layout == other.layout
    }

    fn check_input(&self, len: usize) -> Result<()> {
        if len != self.layout.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.layout.input_dim(), got: len });
        }
        Ok(())
    }

    /// Forward pass at the posterior means.
    pub fn mean_forward(&self, input: &[T]) -> Result<Vec<T>> {
        self.check_input(input.len())?;
        let mut acts = self.layout.scratch();
        self.layout.forward(&self.mu, input, &mut acts);
        Ok(acts.output().to_vec())
    }

    /// One reparameterized weight draw `θ = μ + σ ε`, then a forward pass.
    pub fn sample_forward(&self, input: &[T], noise_seed: u64) -> Result<Vec<T>> {
        self.check_input(input.len())?;
        let mut noise = rng::stream(noise_seed);
        let mut theta = vec![T::zero(); self.param_count()];
        self.draw(&mut noise, &mut theta, None);
        let mut acts = self.layout.scratch();
        self.layout.forward(&theta, input, &mut acts);
        Ok(acts.output().to_vec())
    }

    fn draw<R: Rng>(&self, noise: &mut R, theta: &mut [T], mut eps_out: Option<&mut [T]>) {
        for j in 0..self.mu.len() {
            let e: f64 = noise.sample(StandardNormal);
            let e = T::c(e);
            theta[j] = self.mu[j] + softplus(self.rho[j]) * e;
            if let Some(out) = eps_out.as_deref_mut() {
                out[j] = e;
            }
        }
    }

    /// Closed-form `KL(q(·;φ) ‖ N(0, prior_std²))` summed over parameters.
    pub fn kl_to_prior(&self) -> T {
        let mut total = T::zero();
        for (m, r) in self.mu.iter().zip(&self.rho) {
            total += gaussian_kl(*m, softplus(*r), T::zero(), self.prior_std);
        }
        total
    }
}

/// Regression data for the dynamics model: rows of `[state, one_hot(action)]`
/// paired with next states.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsBatch<T> {
    inputs: Vec<T>,
    targets: Vec<T>,
    input_dim: usize,
    target_dim: usize,
}

impl<T: Scalar> DynamicsBatch<T> {
    pub fn new(inputs: Vec<Vec<T>>, targets: Vec<Vec<T>>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::EmptySequence);
        }
        if inputs.len() != targets.len() {
            return Err(Error::DimensionMismatch { expected: inputs.len(), got: targets.len() });
        }
        let input_dim = inputs[0].len();
        let target_dim = targets[0].len();
        let mut flat_in = Vec::with_capacity(inputs.len() * input_dim);
        let mut flat_t = Vec::with_capacity(targets.len() * target_dim);
        for (x, y) in inputs.iter().zip(&targets) {
            if x.len() != input_dim {
                return Err(Error::DimensionMismatch { expected: input_dim, got: x.len() });
            }
            if y.len() != target_dim {
                return Err(Error::DimensionMismatch { expected: target_dim, got: y.len() });
            }
            flat_in.extend_from_slice(x);
            flat_t.extend_from_slice(y);
        }
        Ok(Self { inputs: flat_in, targets: flat_t, input_dim, target_dim })
    }

    pub fn from_transitions<'a, I>(transitions: I, action_count: usize) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Transition<T>>,
    {
        let (inputs, targets): (Vec<_>, Vec<_>) = transitions
            .into_iter()
            .map(|t| (encode_input(&t.state, t.action, action_count), t.next_state.clone()))
            .unzip();
        Self::new(inputs, targets)
    }

    pub fn len(&self) -> usize {
        self.inputs.len() / self.input_dim
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input(&self, i: usize) -> &[T] {
        &self.inputs[i * self.input_dim..(i + 1) * self.input_dim]
    }

    pub fn target(&self, i: usize) -> &[T] {
        &self.targets[i * self.target_dim..(i + 1) * self.target_dim]
    }
}

/// `[state, one_hot(action)]`.
pub fn encode_input<T: Scalar>(state: &[T], action: usize, action_count: usize) -> Vec<T> {
    let mut x = Vec::with_capacity(state.len() + action_count);
    x.extend_from_slice(state);
    x.extend((0..action_count).map(|a| if a == action { T::one() } else { T::zero() }));
    x
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElboEstimate<T> {
    pub value: T,
    pub log_likelihood_term: T,
    pub kl_to_prior_term: T,
    pub n_mc_samples: usize,
}

/// Gradient of the ELBO estimate in `(μ, ρ)` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ElboGradient<T> {
    pub mu: Vec<T>,
    pub rho: Vec<T>,
}

fn check_batch<T: Scalar>(params: &VariationalParams<T>, batch: &DynamicsBatch<T>) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::EmptySequence);
    }
    params.check_input(batch.input_dim)?;
    if batch.target_dim != params.layout.output_dim() {
        return Err(Error::DimensionMismatch { expected: params.layout.output_dim(), got: batch.target_dim });
    }
    Ok(())
}

/// Monte Carlo ELBO estimate. The noise for sample `s`, parameter `j` is the
/// `(s·P + j)`-th standard normal draw of the stream seeded by `noise_seed`,
/// so equal seeds give common random numbers across parameter values.
pub fn elbo<T: Scalar>(
    params: &VariationalParams<T>,
    batch: &DynamicsBatch<T>,
    n_mc_samples: usize,
    noise_seed: u64,
) -> Result<ElboEstimate<T>> {
    elbo_impl(params, batch, n_mc_samples, noise_seed, false).map(|(e, _)| e)
}

/// ELBO estimate together with its reparameterized gradient.
pub fn elbo_with_gradient<T: Scalar>(
    params: &VariationalParams<T>,
    batch: &DynamicsBatch<T>,
    n_mc_samples: usize,
    noise_seed: u64,
) -> Result<(ElboEstimate<T>, ElboGradient<T>)> {
    elbo_impl(params, batch, n_mc_samples, noise_seed, true).map(|(e, g)| (e, g.unwrap()))
}

fn elbo_impl<T: Scalar>(
    params: &VariationalParams<T>,
    batch: &DynamicsBatch<T>,
    n_mc_samples: usize,
    noise_seed: u64,
    with_grad: bool,
) -> Result<(ElboEstimate<T>, Option<ElboGradient<T>>)> {
    check_batch(params, batch)?;
    if n_mc_samples == 0 {
        return Err(Error::InvalidConfig("n_mc_samples must be positive".into()));
    }
    let p = params.param_count();
    let layout = &params.layout;
    let mut noise = rng::stream(noise_seed);
    let mut theta = vec![T::zero(); p];
    let mut eps = vec![T::zero(); p];
    let mut g_theta = vec![T::zero(); p];
    let mut grad_mu = vec![T::zero(); p];
    let mut grad_rho = vec![T::zero(); p];
    let mut acts = layout.scratch();
    let mut g_out = vec![T::zero(); layout.output_dim()];

    let var = params.obs_std * params.obs_std;
    let log_norm = T::c(-0.5) * (T::c(2.0 * std::f64::consts::PI) * var).ln();
    let mut ll_total = T::zero();

    for _ in 0..n_mc_samples {
        params.draw(&mut noise, &mut theta, Some(&mut eps));
        if with_grad {
            g_theta.iter_mut().for_each(|g| *g = T::zero());
        }
        for i in 0..batch.len() {
            layout.forward(&theta, batch.input(i), &mut acts);
            for (k, (f, y)) in acts.output().iter().zip(batch.target(i)).enumerate() {
                let r = *y - *f;
                ll_total += log_norm - r * r / (T::c(2.0) * var);
                g_out[k] = r / var;
            }
            if with_grad {
                layout.backward(&theta, &mut acts, &g_out, &mut g_theta);
            }
        }
        if with_grad {
            for j in 0..p {
                grad_mu[j] += g_theta[j];
                grad_rho[j] += g_theta[j] * eps[j] * sigmoid(params.rho[j]);
            }
        }
    }

    let n = T::from_usize_lossy(n_mc_samples);
    let ll = ll_total / n;
    let kl = params.kl_to_prior();
    let estimate = ElboEstimate { value: ll - kl, log_likelihood_term: ll, kl_to_prior_term: kl, n_mc_samples };
    if !with_grad {
        return Ok((estimate, None));
    }

    let prior_var = params.prior_std * params.prior_std;
    for j in 0..p {
        let sigma = softplus(params.rho[j]);
        grad_mu[j] = grad_mu[j] / n - params.mu[j] / prior_var;
        let dkl_dsigma = -T::one() / sigma + sigma / prior_var;
        grad_rho[j] = grad_rho[j] / n - dkl_dsigma * sigmoid(params.rho[j]);
    }
    Ok((estimate, Some(ElboGradient { mu: grad_mu, rho: grad_rho })))
}

/// One step of gradient ascent on a single-sample ELBO estimate. Returns the
/// updated parameters and the estimate taken before the step.
pub fn train_step<T: Scalar>(
    params: &VariationalParams<T>,
    batch: &DynamicsBatch<T>,
    learning_rate: T,
    noise_seed: u64,
) -> Result<(VariationalParams<T>, ElboEstimate<T>)> {
    let (est, grad) = elbo_with_gradient(params, batch, 1, noise_seed)?;
    if grad.mu.iter().chain(&grad.rho).any(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient);
    }
    let mut next = params.clone();
    if learning_rate != T::zero() {
        for j in 0..next.mu.len() {
            next.mu[j] += learning_rate * grad.mu[j];
            next.rho[j] += learning_rate * grad.rho[j];
        }
    }
    Ok((next, est))
}

/// Information gain of an update: `Σ_j KL(N(μ'_j, σ'_j²) ‖ N(μ_j, σ_j²))`
/// from the updated posterior `new` to the previous posterior `old`.
pub fn posterior_kl<T: Scalar>(new: &VariationalParams<T>, old: &VariationalParams<T>) -> Result<T> {
    if !new.same_architecture(old) {
        return Err(Error::ArchitectureMismatch);
    }
    let mut total = T::zero();
    for j in 0..new.mu.len() {
        total += gaussian_kl(new.mu[j], softplus(new.rho[j]), old.mu[j], softplus(old.rho[j]));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_weight(mu: f64, sigma: f64, prior_std: f64) -> VariationalParams<f64> {
        let layout = Layout::new(&[1, 1], false).unwrap();
        VariationalParams::from_parts(layout, vec![mu], vec![softplus_inv(sigma)], prior_std, 0.1)
    }

    #[test]
    fn init_sets_half_prior_sigma() {
        let p = VariationalParams::<f64>::init(&[3, 8, 2], 1.0, 11).unwrap();
        for s in p.sigmas() {
            assert!((s - 0.5).abs() < 1e-12);
        }
        assert_eq!(p, VariationalParams::init(&[3, 8, 2], 1.0, 11).unwrap());
        assert_ne!(p, VariationalParams::init(&[3, 8, 2], 1.0, 12).unwrap());
        assert!(matches!(VariationalParams::<f64>::init(&[3], 1.0, 0), Err(Error::InvalidArchitecture(_))));
    }

    #[test]
    fn zero_sigma_forward_is_deterministic_network() {
        let mut p = VariationalParams::<f64>::init(&[3, 8, 2], 1.0, 4).unwrap();
        p.rho_mut().iter_mut().for_each(|r| *r = f64::NEG_INFINITY);
        let x = [0.2, -0.1, 1.0];
        assert_eq!(p.sample_forward(&x, 1).unwrap(), p.mean_forward(&x).unwrap());
        assert_eq!(p.sample_forward(&x, 1).unwrap(), p.sample_forward(&x, 99).unwrap());
    }

    #[test]
    fn fixed_noise_seed_repeats() {
        let p = VariationalParams::<f64>::init(&[3, 8, 2], 1.0, 4).unwrap();
        let x = [0.2, -0.1, 1.0];
        assert_eq!(p.sample_forward(&x, 5).unwrap(), p.sample_forward(&x, 5).unwrap());
        assert_ne!(p.sample_forward(&x, 5).unwrap(), p.sample_forward(&x, 6).unwrap());
        assert!(matches!(p.sample_forward(&x[..2], 5), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn identity_network() {
        // state_dim 2, two actions: input [s0, s1, a0, a1] -> [s0, s1]
        let layout = Layout::new(&[4, 2], true).unwrap();
        let mu = vec![1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        let rho = vec![-1e4; 10];
        let p = VariationalParams::from_parts(layout, mu, rho, 1.0, 0.1);
        let x = encode_input(&[0.7, -1.3], 1, 2);
        assert_eq!(p.sample_forward(&x, 3).unwrap(), vec![0.7, -1.3]);
    }

    #[test]
    fn kl_to_prior_examples() {
        assert_eq!(single_weight(0.0, 1.0, 1.0).kl_to_prior(), 0.0);
        assert!((single_weight(1.0, 1.0, 1.0).kl_to_prior() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn posterior_kl_examples() {
        let a = single_weight(1.0, 1.0, 1.0);
        let b = single_weight(0.0, 1.0, 1.0);
        assert_eq!(posterior_kl(&a, &a).unwrap(), 0.0);
        assert!((posterior_kl(&a, &b).unwrap() - 0.5).abs() < 1e-12);
        let e = std::f64::consts::E;
        let wide = single_weight(0.0, e, 1.0);
        let kl = posterior_kl(&wide, &b).unwrap();
        assert!((kl - (e * e / 2.0 - 1.5)).abs() < 1e-9);
        assert!((kl - 2.1945).abs() < 1e-4);
        assert!((posterior_kl(&b, &wide).unwrap() - kl).abs() > 0.1);
        let other = VariationalParams::<f64>::init(&[1, 2], 1.0, 0).unwrap();
        assert!(matches!(posterior_kl(&a, &other), Err(Error::ArchitectureMismatch)));
    }

    #[test]
    fn train_step_zero_lr_is_identity() {
        let p = VariationalParams::<f64>::init(&[3, 4, 1], 1.0, 2).unwrap();
        let batch = DynamicsBatch::new(vec![vec![0.1, 1.0, 0.0]], vec![vec![0.2]]).unwrap();
        let (next, est) = train_step(&p, &batch, 0.0, 9).unwrap();
        assert_eq!(next, p);
        assert_eq!(est.value, est.log_likelihood_term - est.kl_to_prior_term);
    }

    #[test]
    fn batch_validation() {
        assert!(matches!(DynamicsBatch::<f64>::new(vec![], vec![]), Err(Error::EmptySequence)));
        assert!(DynamicsBatch::new(vec![vec![1.0], vec![1.0, 2.0]], vec![vec![0.0], vec![0.0]]).is_err());
        let p = VariationalParams::<f64>::init(&[3, 4, 1], 1.0, 2).unwrap();
        let wrong = DynamicsBatch::new(vec![vec![0.1, 1.0]], vec![vec![0.2]]).unwrap();
        assert!(matches!(elbo(&p, &wrong, 1, 0), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn non_finite_gradient_is_reported() {
        let p = VariationalParams::<f64>::init(&[3, 4, 1], 1.0, 2).unwrap();
        let batch = DynamicsBatch::new(vec![vec![0.1, 1.0, 0.0]], vec![vec![f64::NAN]]).unwrap();
        assert!(matches!(train_step(&p, &batch, 0.1, 0), Err(Error::NonFiniteGradient)));
    }
}
