//! Dense feed-forward network over a flat parameter slice.
//!
//! Hidden layers use `tanh`, the output layer is linear. Parameters are laid
//! out layer by layer: the `out × in` weight matrix in row-major order,
//! followed by the `out` biases when the layout has biases. The same layout
//! serves the Q-networks (point weights) and the dynamics model (weights
//! drawn from the variational posterior).

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    sizes: Vec<usize>,
    bias: bool,
    offsets: Vec<usize>,
}

impl Layout {
    pub fn new(sizes: &[usize], bias: bool) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::InvalidArchitecture(format!(
                "need at least input and output sizes, got {sizes:?}"
            )));
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(Error::InvalidArchitecture(format!("zero-width layer in {sizes:?}")));
        }
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut off = 0;
        offsets.push(0);
        for w in sizes.windows(2) {
            off += w[0] * w[1] + if bias { w[1] } else { 0 };
            offsets.push(off);
        }
        Ok(Self { sizes: sizes.to_vec(), bias, offsets })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn has_bias(&self) -> bool {
        self.bias
    }

    pub fn layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn param_count(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// `(start, end)` of layer `l`'s parameters in the flat vector.
    pub fn layer_range(&self, l: usize) -> (usize, usize) {
        (self.offsets[l], self.offsets[l + 1])
    }

    pub fn scratch<T: Scalar>(&self) -> Activations<T> {
        Activations { layers: self.sizes.iter().map(|&n| vec![T::zero(); n]).collect(), delta: Vec::new() }
    }

    /// Forward pass; the output is `acts.output()`.
    pub fn forward<T: Scalar>(&self, params: &[T], input: &[T], acts: &mut Activations<T>) {
        debug_assert_eq!(params.len(), self.param_count());
        debug_assert_eq!(input.len(), self.input_dim());
        acts.layers[0].copy_from_slice(input);
        let last = self.layers() - 1;
        for l in 0..self.layers() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let (w0, _) = self.layer_range(l);
            let (head, tail) = acts.layers.split_at_mut(l + 1);
            let a_in = &head[l];
            let a_out = &mut tail[0];
            for o in 0..n_out {
                let row = &params[w0 + o * n_in..w0 + (o + 1) * n_in];
                let mut z = if self.bias { params[w0 + n_in * n_out + o] } else { T::zero() };
                for (w, x) in row.iter().zip(a_in.iter()) {
                    z += *w * *x;
                }
                a_out[o] = if l == last { z } else { z.tanh() };
            }
        }
    }

    /// Accumulates `d loss / d params` into `grad` given `d loss / d output`,
    /// using the activations of the preceding [`Layout::forward`].
    pub fn backward<T: Scalar>(&self, params: &[T], acts: &mut Activations<T>, grad_out: &[T], grad: &mut [T]) {
        let mut delta = std::mem::take(&mut acts.delta);
        delta.clear();
        delta.extend_from_slice(grad_out);
        let mut prev = Vec::new();
        for l in (0..self.layers()).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let (w0, _) = self.layer_range(l);
            let a_in = &acts.layers[l];
            for o in 0..n_out {
                let d = delta[o];
                if d == T::zero() {
                    continue;
                }
                let g = &mut grad[w0 + o * n_in..w0 + (o + 1) * n_in];
                for (gi, x) in g.iter_mut().zip(a_in.iter()) {
                    *gi += d * *x;
                }
                if self.bias {
                    grad[w0 + n_in * n_out + o] += d;
                }
            }
            if l > 0 {
                prev.clear();
                prev.resize(n_in, T::zero());
                for o in 0..n_out {
                    let d = delta[o];
                    if d == T::zero() {
                        continue;
                    }
                    let row = &params[w0 + o * n_in..w0 + (o + 1) * n_in];
                    for (p, w) in prev.iter_mut().zip(row.iter()) {
                        *p += *w * d;
                    }
                }
                for (p, a) in prev.iter_mut().zip(a_in.iter()) {
                    *p *= T::one() - *a * *a;
                }
                std::mem::swap(&mut delta, &mut prev);
            }
        }
        acts.delta = delta;
    }
}

/// Per-layer activation buffers reused across forward/backward passes.
#[derive(Debug, Clone)]
pub struct Activations<T> {
    layers: Vec<Vec<T>>,
    delta: Vec<T>,
}

impl<T: Scalar> Activations<T> {
    pub fn output(&self) -> &[T] {
        self.layers.last().unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loss(layout: &Layout, p: &[f64], x: &[f64], y: &[f64]) -> f64 {
        let mut a = layout.scratch();
        layout.forward(p, x, &mut a);
        a.output().iter().zip(y).map(|(o, t)| 0.5 * (o - t) * (o - t)).sum()
    }

    #[test]
    fn layout_counts() {
        let l = Layout::new(&[3, 8, 2], true).unwrap();
        assert_eq!(l.param_count(), 3 * 8 + 8 + 8 * 2 + 2);
        let nb = Layout::new(&[3, 2], false).unwrap();
        assert_eq!(nb.param_count(), 6);
        assert!(Layout::new(&[3], true).is_err());
        assert!(Layout::new(&[3, 0, 1], true).is_err());
    }

    #[test]
    fn backward_matches_finite_differences() {
        let layout = Layout::new(&[3, 5, 4, 2], true).unwrap();
        let p: Vec<f64> = (0..layout.param_count()).map(|i| ((i * 37 % 17) as f64 - 8.0) / 10.0).collect();
        let x = [0.3, -0.7, 0.2];
        let y = [0.1, -0.4];
        let mut a = layout.scratch();
        layout.forward(&p, &x, &mut a);
        let g_out: Vec<f64> = a.output().iter().zip(&y).map(|(o, t)| o - t).collect();
        let mut grad = vec![0.0; p.len()];
        layout.backward(&p, &mut a, &g_out, &mut grad);
        let h = 1e-6;
        for i in 0..p.len() {
            let mut pp = p.clone();
            pp[i] += h;
            let up = loss(&layout, &pp, &x, &y);
            pp[i] -= 2.0 * h;
            let dn = loss(&layout, &pp, &x, &y);
            let fd = (up - dn) / (2.0 * h);
            assert!((fd - grad[i]).abs() < 1e-8, "param {i}: fd {fd} vs {}", grad[i]);
        }
    }
}
