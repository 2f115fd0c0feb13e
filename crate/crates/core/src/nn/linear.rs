use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Parameterized;
use crate::error::{ensure_len, Result};

/// Dense affine map `W·x + b` with `W` stored row-major (`out_dim × in_dim`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearLayer {
    in_dim: usize,
    out_dim: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
    #[serde(skip)]
    grad_weights: Vec<f64>,
    #[serde(skip)]
    grad_bias: Vec<f64>,
}

impl LinearLayer {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            weights: vec![0.0; in_dim * out_dim],
            bias: vec![0.0; out_dim],
            grad_weights: vec![0.0; in_dim * out_dim],
            grad_bias: vec![0.0; out_dim],
        }
    }

    /// Weights from `Uniform(-1/√in_dim, 1/√in_dim)`, zero bias.
    pub fn init_uniform<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        let mut layer = Self::zeros(in_dim, out_dim);
        let bound = 1.0 / (in_dim as f64).sqrt();
        layer
            .weights
            .iter_mut()
            .for_each(|w| *w = rng.random_range(-bound..bound));
        layer
    }

    pub fn from_parts(in_dim: usize, out_dim: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        ensure_len("linear weights", in_dim * out_dim, weights.len())?;
        ensure_len("linear bias", out_dim, bias.len())?;
        Ok(Self {
            in_dim,
            out_dim,
            grad_weights: vec![0.0; weights.len()],
            grad_bias: vec![0.0; bias.len()],
            weights,
            bias,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn grad_weights(&self) -> &[f64] {
        &self.grad_weights
    }

    pub fn grad_bias(&self) -> &[f64] {
        &self.grad_bias
    }

    /// `W·x + b`.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        ensure_len("linear input", self.in_dim, x.len())?;
        Ok(self
            .weights
            .chunks_exact(self.in_dim)
            .zip(&self.bias)
            .map(|(row, b)| dot(row, x) + b)
            .collect())
    }

    /// Accumulates `upstream·xᵀ` into `grad_weights` and `upstream` into
    /// `grad_bias`; returns `Wᵀ·upstream` when `want_input_grad` is set,
    /// otherwise an empty vector.
    pub fn backward_into(
        &self,
        x: &[f64],
        upstream: &[f64],
        grad_weights: &mut [f64],
        grad_bias: &mut [f64],
        want_input_grad: bool,
    ) -> Result<Vec<f64>> {
        ensure_len("linear backward input", self.in_dim, x.len())?;
        ensure_len("linear backward upstream", self.out_dim, upstream.len())?;
        ensure_len("linear weight gradient", self.weights.len(), grad_weights.len())?;
        ensure_len("linear bias gradient", self.bias.len(), grad_bias.len())?;
        for ((grow, g), gb) in grad_weights
            .chunks_exact_mut(self.in_dim)
            .zip(upstream)
            .zip(grad_bias.iter_mut())
        {
            *gb += g;
            if *g != 0.0 {
                for (w, xi) in grow.iter_mut().zip(x) {
                    *w += g * xi;
                }
            }
        }
        if !want_input_grad {
            return Ok(Vec::new());
        }
        let mut dx = vec![0.0; self.in_dim];
        for (row, g) in self.weights.chunks_exact(self.in_dim).zip(upstream) {
            for (d, w) in dx.iter_mut().zip(row) {
                *d += w * g;
            }
        }
        Ok(dx)
    }

    /// Accumulates into the layer's own gradient buffers; returns `Wᵀ·upstream`.
    pub fn backward(&mut self, x: &[f64], upstream: &[f64]) -> Result<Vec<f64>> {
        let mut gw = std::mem::take(&mut self.grad_weights);
        let mut gb = std::mem::take(&mut self.grad_bias);
        let out = self.backward_into(x, upstream, &mut gw, &mut gb, true);
        self.grad_weights = gw;
        self.grad_bias = gb;
        out
    }
}

impl Parameterized for LinearLayer {
    fn visit_params(&mut self, f: &mut dyn FnMut(&str, &mut [f64], &[f64])) {
        f("weight", &mut self.weights, &self.grad_weights);
        f("bias", &mut self.bias, &self.grad_bias);
    }

    fn visit_grads_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        if self.grad_weights.len() != self.weights.len() {
            self.grad_weights = vec![0.0; self.weights.len()];
            self.grad_bias = vec![0.0; self.bias.len()];
        }
        f(&mut self.grad_weights);
        f(&mut self.grad_bias);
    }

    fn param_lens(&self) -> Vec<usize> {
        vec![self.weights.len(), self.bias.len()]
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
