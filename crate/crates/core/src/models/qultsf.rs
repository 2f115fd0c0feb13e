use rand::Rng;

use super::baselines::{base_checkpoint, layer_from, layer_tensors};
use super::{checkpoint_dims, Forecaster, Trainable};
use crate::error::{ensure_len, Error, Result};
use crate::nn::{Checkpoint, GradBuffer, LinearLayer, Parameterized, Tensor};
use crate::qsim::{amplitude_embed, pauli_z_expectations, run_ansatz, vjp_adjoint, CircuitParams};

/// Linear `L → 2^N`, amplitude-embedded `N`-qubit ansatz with Pauli-Z
/// readout, then linear `N → T`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuLTSFModel {
    pub input: LinearLayer,
    pub circuit: CircuitParams,
    circuit_grad: Vec<f64>,
    pub output: LinearLayer,
}

/// Intermediate activations of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    /// Input-layer output, length `2^N`.
    pub y1: Vec<f64>,
    /// Pauli-Z readouts, length `N`, each in `[-1, 1]`.
    pub y2: Vec<f64>,
    pub prediction: Vec<f64>,
}

impl QuLTSFModel {
    pub fn new(input: LinearLayer, circuit: CircuitParams, output: LinearLayer) -> Result<Self> {
        let dim = 1usize << circuit.num_qubits();
        if input.out_dim() != dim {
            return Err(Error::dim("input layer width (2^N)", dim, input.out_dim()));
        }
        if output.in_dim() != circuit.num_qubits() {
            return Err(Error::dim("output layer fan-in (N)", circuit.num_qubits(), output.in_dim()));
        }
        Ok(Self {
            circuit_grad: vec![0.0; circuit.len()],
            input,
            circuit,
            output,
        })
    }

    /// Fan-in uniform classical weights, zero biases, angles in `[0, 2π)`.
    pub fn init<R: Rng + ?Sized>(
        lookback: usize,
        horizon: usize,
        qubits: usize,
        layers: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let input = LinearLayer::init_uniform(lookback, 1 << qubits, rng);
        let circuit = CircuitParams::random(qubits, layers, rng)?;
        let output = LinearLayer::init_uniform(qubits, horizon, rng);
        Self::new(input, circuit, output)
    }

    pub fn num_qubits(&self) -> usize {
        self.circuit.num_qubits()
    }

    pub fn num_layers(&self) -> usize {
        self.circuit.num_layers()
    }

    pub fn circuit_grad(&self) -> &[f64] {
        &self.circuit_grad
    }

    pub fn forward(&self, x: &[f64]) -> Result<ForwardTrace> {
        ensure_len("qultsf input", self.input.in_dim(), x.len())?;
        let y1 = self.input.forward(x)?;
        let mut state = amplitude_embed(&y1)?;
        run_ansatz(&mut state, &self.circuit)?;
        let y2 = pauli_z_expectations(&state);
        let prediction = self.output.forward(&y2)?;
        Ok(ForwardTrace { y1, y2, prediction })
    }

    /// Backpropagates `upstream` through a trace of `forward(x)` into `grad`
    /// (tensor order: input weight, input bias, circuit, output weight,
    /// output bias). Returns `∂loss/∂x` when `want_input_grad` is set.
    pub fn backward_into(
        &self,
        trace: &ForwardTrace,
        x: &[f64],
        upstream: &[f64],
        grad: &mut GradBuffer,
        want_input_grad: bool,
    ) -> Result<Vec<f64>> {
        ensure_len("qultsf upstream", self.output.out_dim(), upstream.len())?;
        let [iw, ib, cg, ow, ob] = grad.tensors.as_mut_slice() else {
            return Err(Error::dim("qultsf gradient tensors", 5, grad.tensors.len()));
        };
        let d_y2 = self.output.backward_into(&trace.y2, upstream, ow, ob, true)?;
        let vjp = vjp_adjoint(&trace.y1, &self.circuit, &d_y2)?;
        ensure_len("circuit gradient", cg.len(), vjp.d_params.len())?;
        for (g, d) in cg.iter_mut().zip(&vjp.d_params) {
            *g += d;
        }
        self.input.backward_into(x, &vjp.d_input, iw, ib, want_input_grad)
    }

    /// Accumulates into the model's own buffers; returns `∂loss/∂x`.
    pub fn backward(&mut self, trace: &ForwardTrace, x: &[f64], upstream: &[f64]) -> Result<Vec<f64>> {
        let mut grad = self.new_grad_buffer();
        let dx = self.backward_into(trace, x, upstream, &mut grad, true)?;
        self.accumulate_grads(&grad);
        Ok(dx)
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let mut c = base_checkpoint("qultsf", self.lookback(), self.horizon());
        c.meta.insert("qubits".into(), self.num_qubits().to_string());
        c.meta.insert("layers".into(), self.num_layers().to_string());
        layer_tensors(&mut c, "input", &self.input);
        c.tensors.push(Tensor {
            name: "circuit.angles".into(),
            shape: vec![self.num_layers(), self.num_qubits(), 3],
            values: self.circuit.angles().to_vec(),
        });
        layer_tensors(&mut c, "output", &self.output);
        c
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        let (l, t) = checkpoint_dims(ckpt)?;
        let n = ckpt.meta_usize("qubits")?;
        let k = ckpt.meta_usize("layers")?;
        let angles = ckpt.tensor("circuit.angles")?;
        if angles.shape != [k, n, 3] {
            return Err(Error::Checkpoint(format!("circuit angles have shape {:?}", angles.shape)));
        }
        Self::new(
            layer_from(ckpt, "input", l, 1 << n)?,
            CircuitParams::from_angles(n, k, angles.values.clone())?,
            layer_from(ckpt, "output", n, t)?,
        )
    }
}

impl Forecaster for QuLTSFModel {
    fn lookback(&self) -> usize {
        self.input.in_dim()
    }

    fn horizon(&self) -> usize {
        self.output.out_dim()
    }

    fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(x)?.prediction)
    }
}

impl Parameterized for QuLTSFModel {
    fn visit_params(&mut self, f: &mut dyn FnMut(&str, &mut [f64], &[f64])) {
        self.input.visit_params(f);
        f("circuit", self.circuit.angles_mut(), &self.circuit_grad);
        self.output.visit_params(f);
    }

    fn visit_grads_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        self.input.visit_grads_mut(f);
        f(&mut self.circuit_grad);
        self.output.visit_grads_mut(f);
    }

    fn param_lens(&self) -> Vec<usize> {
        let mut v = self.input.param_lens();
        v.push(self.circuit.len());
        v.extend(self.output.param_lens());
        v
    }
}

impl Trainable for QuLTSFModel {
    fn backward_sample(&self, x: &[f64], upstream: &[f64], grad: &mut GradBuffer) -> Result<()> {
        let trace = self.forward(x)?;
        self.backward_into(&trace, x, upstream, grad, false)?;
        Ok(())
    }

    fn accumulate_sample(&self, x: &[f64], target: &[f64], grad: &mut GradBuffer) -> Result<f64> {
        let trace = self.forward(x)?;
        let (loss, upstream) = crate::nn::mse_loss(&trace.prediction, target)?;
        self.backward_into(&trace, x, &upstream, grad, false)?;
        Ok(loss)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::mse_loss;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_model(l: usize, t: usize, n: usize, k: usize, seed: u64) -> QuLTSFModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = QuLTSFModel::init(l, t, n, k, &mut rng).unwrap();
        m.input.bias_mut().iter_mut().for_each(|b| *b = rng.random_range(-0.5..0.5));
        m.output.bias_mut().iter_mut().for_each(|b| *b = rng.random_range(-0.5..0.5));
        m
    }

    #[test]
    fn zero_output_weights_give_bias() {
        let mut m = random_model(6, 3, 2, 1, 0);
        m.output = LinearLayer::from_parts(2, 3, vec![0.0; 6], vec![1.0, -2.0, 0.5]).unwrap();
        let x = [0.2, 0.1, -0.7, 1.0, 0.0, 0.3];
        assert_eq!(m.predict(&x).unwrap(), vec![1.0, -2.0, 0.5]);
    }

    #[test]
    fn ground_state_single_qubit_reads_plus_one() {
        // input layer produces y1 = (1, 0) for any x via its bias
        let input = LinearLayer::from_parts(3, 2, vec![0.0; 6], vec![1.0, 0.0]).unwrap();
        let output = LinearLayer::from_parts(1, 2, vec![0.5, -3.0], vec![0.25, 0.0]).unwrap();
        let m = QuLTSFModel::new(input, CircuitParams::zeros(1, 1).unwrap(), output).unwrap();
        let tr = m.forward(&[9.0, -1.0, 2.0]).unwrap();
        assert_eq!(tr.y1, vec![1.0, 0.0]);
        assert_eq!(tr.y2, vec![1.0]);
        assert_eq!(tr.prediction, vec![0.75, -3.0]);
    }

    #[test]
    fn forward_is_composition_of_parts() {
        let m = random_model(8, 4, 3, 2, 1);
        let x: Vec<f64> = (0..8).map(|i| (i as f64).sin()).collect();
        let tr = m.forward(&x).unwrap();
        let y1 = m.input.forward(&x).unwrap();
        let y2 = crate::qsim::expectations(&y1, &m.circuit).unwrap();
        assert_eq!(tr.y1, y1);
        assert_eq!(tr.y2, y2);
        assert_eq!(tr.prediction, m.output.forward(&y2).unwrap());
        assert!(tr.y2.iter().all(|v| v.abs() <= 1.0 + 1e-12));
    }

    #[test]
    fn zero_upstream_accumulates_nothing() {
        let mut m = random_model(8, 4, 3, 2, 2);
        let x = vec![0.5; 8];
        let tr = m.forward(&x).unwrap();
        m.backward(&tr, &x, &[0.0; 4]).unwrap();
        let mut all_zero = true;
        m.visit_params(&mut |_, _, g| all_zero &= g.iter().all(|v| *v == 0.0));
        assert!(all_zero);
    }

    fn loss_of(m: &QuLTSFModel, x: &[f64], target: &[f64]) -> f64 {
        mse_loss(&m.predict(x).unwrap(), target).unwrap().0
    }

    fn check_all_params(m: &mut QuLTSFModel, x: &[f64], target: &[f64], skip_circuit: bool) {
        let tr = m.forward(x).unwrap();
        let (_, up) = mse_loss(&tr.prediction, target).unwrap();
        m.zero_grads();
        let dx = m.backward(&tr, x, &up).unwrap();
        let mut analytic = Vec::new();
        m.visit_params(&mut |_, _, g| analytic.push(g.to_vec()));
        let h = 1e-6;
        for tensor in 0..analytic.len() {
            if skip_circuit && tensor == 2 {
                continue;
            }
            for i in 0..analytic[tensor].len() {
                let nudge = |m: &mut QuLTSFModel, d: f64| {
                    let mut k = 0;
                    m.visit_params(&mut |_, p, _| {
                        if k == tensor {
                            p[i] += d;
                        }
                        k += 1;
                    });
                };
                nudge(m, h);
                let up = loss_of(m, x, target);
                nudge(m, -2.0 * h);
                let down = loss_of(m, x, target);
                nudge(m, h);
                let fd = (up - down) / (2.0 * h);
                let a = analytic[tensor][i];
                if a.abs().max(fd.abs()) > 1e-8 {
                    let rel = (a - fd).abs() / a.abs().max(fd.abs());
                    assert!(rel < 1e-4, "tensor {tensor}[{i}]: {a} vs {fd}");
                }
            }
        }
        for j in 0..x.len() {
            let mut xp = x.to_vec();
            xp[j] += h;
            let mut xm = x.to_vec();
            xm[j] -= h;
            let fd = (loss_of(m, &xp, target) - loss_of(m, &xm, target)) / (2.0 * h);
            if dx[j].abs().max(fd.abs()) > 1e-8 {
                assert!((dx[j] - fd).abs() / dx[j].abs().max(fd.abs()) < 1e-4);
            }
        }
    }

    #[test]
    fn full_model_gradient_matches_finite_differences() {
        let mut m = random_model(8, 4, 3, 2, 3);
        let x: Vec<f64> = (0..8).map(|i| 0.3 * (i as f64 * 1.3).cos()).collect();
        let target = [0.2, -0.1, 0.4, 0.0];
        check_all_params(&mut m, &x, &target, false);
    }

    #[test]
    fn frozen_circuit_input_gradients_match_finite_differences() {
        let mut m = random_model(8, 4, 3, 2, 4);
        let x: Vec<f64> = (0..8).map(|i| 0.1 * i as f64 - 0.3).collect();
        check_all_params(&mut m, &x, &[1.0, 0.0, -1.0, 0.5], true);
    }

    #[test]
    fn shape_errors() {
        let m = random_model(8, 4, 3, 2, 5);
        assert!(m.forward(&[0.0; 7]).is_err());
        let bad_in = LinearLayer::zeros(8, 4);
        assert!(QuLTSFModel::new(bad_in, CircuitParams::zeros(3, 1).unwrap(), LinearLayer::zeros(3, 2)).is_err());
        let tr = m.forward(&[0.1; 8]).unwrap();
        let mut grad = m.new_grad_buffer();
        assert!(m.backward_into(&tr, &[0.1; 8], &[0.0; 3], &mut grad, false).is_err());
    }
}
