//! Minimal classical network kit: linear layers, MSE loss, Adam and
//! checkpoints.

mod adam;
pub mod checkpoint;
mod linear;
mod loss;

pub use adam::{adam_step, Adam, AdamConfig, AdamState};
pub use checkpoint::{Checkpoint, Tensor};
pub use linear::LinearLayer;
pub use loss::{mae, mse_loss};

/// Something with trainable tensors and matching gradient buffers.
///
/// Tensors are always visited in the same order; [`GradBuffer`] relies on it.
pub trait Parameterized {
    /// Calls `f(name, params, grads)` for every tensor.
    #[allow(clippy::type_complexity)]
    fn visit_params(&mut self, f: &mut dyn FnMut(&str, &mut [f64], &[f64]));

    fn visit_grads_mut(&mut self, f: &mut dyn FnMut(&mut [f64]));

    /// Length of every tensor, in visit order.
    fn param_lens(&self) -> Vec<usize>;

    fn num_params(&self) -> usize {
        self.param_lens().iter().sum()
    }

    fn zero_grads(&mut self) {
        self.visit_grads_mut(&mut |g| g.fill(0.0));
    }

    /// Adds `grad` into the model's own gradient buffers.
    fn accumulate_grads(&mut self, grad: &GradBuffer) {
        let mut tensors = grad.tensors.iter();
        self.visit_grads_mut(&mut |g| {
            if let Some(src) = tensors.next() {
                for (a, b) in g.iter_mut().zip(src) {
                    *a += b;
                }
            }
        });
    }

    fn new_grad_buffer(&self) -> GradBuffer {
        GradBuffer::zeros(&self.param_lens())
    }
}

/// Detached gradient storage, one flat vector per tensor in visit order.
///
/// Batch workers each fill their own buffer; buffers are then summed in a
/// fixed order so the result does not depend on scheduling.
#[derive(Debug, Clone, PartialEq)]
pub struct GradBuffer {
    pub tensors: Vec<Vec<f64>>,
}

impl GradBuffer {
    pub fn zeros(lens: &[usize]) -> Self {
        Self {
            tensors: lens.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &GradBuffer) {
        for (a, b) in self.tensors.iter_mut().zip(&other.tensors) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.tensors.iter_mut().flatten().for_each(|g| *g *= s);
    }

    pub fn is_finite(&self) -> bool {
        self.tensors.iter().flatten().all(|g| g.is_finite())
    }

    pub fn flat(&self) -> Vec<f64> {
        self.tensors.iter().flatten().copied().collect()
    }
}
