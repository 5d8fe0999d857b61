use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Sgd,
    #[default]
    Adam,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

/// Minimizing optimizer over a flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub enum Optimizer<T> {
    Sgd,
    Adam { m: Vec<T>, v: Vec<T>, t: i32 },
}

impl<T: Scalar> Optimizer<T> {
    pub fn new(kind: OptimizerKind, n: usize) -> Self {
        match kind {
            OptimizerKind::Sgd => Optimizer::Sgd,
            OptimizerKind::Adam => Optimizer::Adam { m: vec![T::zero(); n], v: vec![T::zero(); n], t: 0 },
        }
    }

    pub fn step(&mut self, params: &mut [T], grad: &[T], lr: T) {
        match self {
            Optimizer::Sgd => {
                for (p, g) in params.iter_mut().zip(grad) {
                    *p -= lr * *g;
                }
            }
            Optimizer::Adam { m, v, t } => {
                *t = t.saturating_add(1);
                let (b1, b2) = (T::c(BETA1), T::c(BETA2));
                let c1 = T::one() - b1.powi(*t);
                let c2 = T::one() - b2.powi(*t);
                for j in 0..params.len() {
                    let g = grad[j];
                    m[j] = b1 * m[j] + (T::one() - b1) * g;
                    v[j] = b2 * v[j] + (T::one() - b2) * g * g;
                    let m_hat = m[j] / c1;
                    let v_hat = v[j] / c2;
                    params[j] -= lr * m_hat / (v_hat.sqrt() + T::c(EPS));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adam_first_step_is_sign_times_lr() {
        let mut opt = Optimizer::<f64>::new(OptimizerKind::Adam, 2);
        let mut p = vec![0.0, 0.0];
        opt.step(&mut p, &[3.0, -0.5], 0.1);
        assert!((p[0] + 0.1).abs() < 1e-8);
        assert!((p[1] - 0.1).abs() < 1e-7);
    }

    #[test]
    fn zero_lr_leaves_params() {
        let mut opt = Optimizer::<f64>::new(OptimizerKind::Adam, 1);
        let mut p = vec![0.25];
        opt.step(&mut p, &[1.0], 0.0);
        assert_eq!(p, vec![0.25]);
    }
}
