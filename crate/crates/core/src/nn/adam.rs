use serde::{Deserialize, Serialize};

use super::Parameterized;
use crate::error::{ensure_len, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn with_learning_rate(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            ..Self::default()
        }
    }
}

/// Moment estimates for one parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    first: Vec<f64>,
    second: Vec<f64>,
    step: u64,
}

impl AdamState {
    pub fn new(len: usize, config: AdamConfig) -> Self {
        Self {
            config,
            first: vec![0.0; len],
            second: vec![0.0; len],
            step: 0,
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn first_moment(&self) -> &[f64] {
        &self.first
    }

    pub fn second_moment(&self) -> &[f64] {
        &self.second
    }
}

/// One bias-corrected Adam update of `params` in place. `grads` is not modified.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState) -> Result<()> {
    ensure_len("adam gradients", params.len(), grads.len())?;
    ensure_len("adam moments", params.len(), state.first.len())?;
    state.step += 1;
    let AdamConfig {
        learning_rate,
        beta1,
        beta2,
        epsilon,
    } = state.config;
    let t = state.step as i32;
    let c1 = 1.0 - beta1.powi(t);
    let c2 = 1.0 - beta2.powi(t);
    for (((p, g), m), v) in params
        .iter_mut()
        .zip(grads)
        .zip(state.first.iter_mut())
        .zip(state.second.iter_mut())
    {
        *m = beta1 * *m + (1.0 - beta1) * g;
        *v = beta2 * *v + (1.0 - beta2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
    }
    Ok(())
}

/// Adam over every tensor of a [`Parameterized`] model.
#[derive(Debug, Clone)]
pub struct Adam {
    config: AdamConfig,
    states: Vec<AdamState>,
}

impl Adam {
    pub fn new(config: AdamConfig) -> Self {
        Self {
            config,
            states: Vec::new(),
        }
    }

    pub fn set_learning_rate(&mut self, lr: f64) {
        self.config.learning_rate = lr;
        for s in &mut self.states {
            s.config.learning_rate = lr;
        }
    }

    pub fn config(&self) -> AdamConfig {
        self.config
    }

    /// Number of updates applied so far.
    pub fn steps(&self) -> u64 {
        self.states.first().map_or(0, AdamState::step)
    }

    /// Applies one update using the model's accumulated gradients.
    pub fn step<P: Parameterized + ?Sized>(&mut self, model: &mut P) -> Result<()> {
        let mut idx = 0;
        let mut result = Ok(());
        let config = self.config;
        let states = &mut self.states;
        model.visit_params(&mut |_, params, grads| {
            if result.is_err() {
                return;
            }
            if states.len() <= idx {
                states.push(AdamState::new(params.len(), config));
            }
            result = adam_step(params, grads, &mut states[idx]);
            idx += 1;
        });
        result
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut p = vec![1.0, -2.0, 3.5];
        let mut s = AdamState::new(3, AdamConfig::default());
        for _ in 0..10 {
            adam_step(&mut p, &[0.0; 3], &mut s).unwrap();
        }
        assert_eq!(p, vec![1.0, -2.0, 3.5]);
        assert_eq!(s.step(), 10);
    }

    #[test]
    fn constant_gradient_step_approaches_learning_rate() {
        for &g in &[1e-4, 0.3, 250.0] {
            let lr = 0.01;
            let mut p = vec![0.0];
            let mut s = AdamState::new(1, AdamConfig::with_learning_rate(lr));
            let mut last = 0.0;
            for _ in 0..1000 {
                let before = p[0];
                adam_step(&mut p, &[g], &mut s).unwrap();
                last = before - p[0];
            }
            // with a constant gradient m_hat = g and v_hat = g², so the step is lr·|g|/(|g|+eps)
            let expected = lr * g / (g + 1e-8);
            assert!((last - expected).abs() < 1e-9 * lr, "g={g}: {last} vs {expected}");
            assert!((last - lr).abs() < 1e-3 * lr);
        }
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut p = vec![0.0, 0.0];
        let mut s = AdamState::new(2, AdamConfig::with_learning_rate(0.1));
        adam_step(&mut p, &[2.0, -0.5], &mut s).unwrap();
        assert!((p[0] + 0.1).abs() < 1e-8 && (p[1] - 0.1).abs() < 1e-7);
    }

    #[test]
    fn identical_runs_are_bit_identical() {
        let run = || {
            let mut p = vec![0.3, -0.2];
            let mut s = AdamState::new(2, AdamConfig::default());
            for k in 0..50 {
                let g = [(k as f64 * 0.7).sin(), p[0] * p[1]];
                adam_step(&mut p, &g, &mut s).unwrap();
            }
            p
        };
        let (a, b) = (run(), run());
        assert_eq!(a[0].to_bits(), b[0].to_bits());
        assert_eq!(a[1].to_bits(), b[1].to_bits());
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let mut s = AdamState::new(2, AdamConfig::default());
        assert!(adam_step(&mut [0.0, 0.0], &[1.0], &mut s).is_err());
        assert!(adam_step(&mut [0.0; 3], &[1.0; 3], &mut s).is_err());
        assert_eq!(s.step(), 0);
    }
}
