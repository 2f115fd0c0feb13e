//! Gradients of Pauli-Z readouts with respect to circuit angles and the
//! pre-normalization embedded vector.
//!
//! The production path is an adjoint sweep: one forward simulation, then a
//! walk back through the gate list carrying both the state and the
//! observable-weighted adjoint state. Every `Rot` is expanded into its three
//! elementary rotations `RZ(φ)`, `RY(θ)`, `RZ(ω)`, each of the form
//! `exp(-i·a·P/2)`, so the derivative of `⟨H⟩` with respect to `a` is
//! `Im⟨λ|P|ψ⟩` evaluated just after that rotation.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use super::circuit::{entangler_pairs, pauli_z_expectations, run_ansatz, CircuitParams};
use super::gates::{apply_cnot_unchecked, apply_matrix_unchecked, ry_matrix, rz_matrix};
use super::state::{amplitude_embed, l2_norm, qubits_for_len, Statevector, ZERO_NORM_THRESHOLD};
use crate::error::{Error, Result};

/// Full Jacobian of the `N` readouts.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientResult {
    /// `d_params[q][i]` is `∂⟨Z_q⟩/∂angle_i`.
    pub d_params: Vec<Vec<f64>>,
    /// `d_input[q][j]` is `∂⟨Z_q⟩/∂v_j`; empty for methods that do not compute it.
    pub d_input: Vec<Vec<f64>>,
}

/// Vector-Jacobian product of the readouts against a cotangent.
#[derive(Debug, Clone, PartialEq)]
pub struct VjpResult {
    /// Readouts `⟨Z_q⟩` of the forward pass.
    pub expectations: Vec<f64>,
    /// `Σ_q c_q ∂⟨Z_q⟩/∂angle_i`.
    pub d_params: Vec<f64>,
    /// `Σ_q c_q ∂⟨Z_q⟩/∂v_j`.
    pub d_input: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Rz { qubit: usize, param: usize },
    Ry { qubit: usize, param: usize },
    Cnot { control: usize, target: usize },
}

fn gate_list(params: &CircuitParams) -> Vec<Op> {
    let n = params.num_qubits();
    let mut ops = Vec::with_capacity(params.num_layers() * 4 * n);
    for layer in 0..params.num_layers() {
        for qubit in 0..n {
            ops.push(Op::Rz { qubit, param: params.index(layer, qubit, 0) });
            ops.push(Op::Ry { qubit, param: params.index(layer, qubit, 1) });
            ops.push(Op::Rz { qubit, param: params.index(layer, qubit, 2) });
        }
        for (control, target) in entangler_pairs(n) {
            ops.push(Op::Cnot { control, target });
        }
    }
    ops
}

fn apply_inverse(state: &mut Statevector, op: Op, angles: &[f64]) {
    match op {
        Op::Rz { qubit, param } => apply_matrix_unchecked(state, qubit, &rz_matrix(-angles[param])),
        Op::Ry { qubit, param } => apply_matrix_unchecked(state, qubit, &ry_matrix(-angles[param])),
        Op::Cnot { control, target } => apply_cnot_unchecked(state, control, target),
    }
}

/// `Im⟨λ|Z_q|ψ⟩`.
fn im_expect_z(lambda: &Statevector, psi: &Statevector, qubit: usize) -> f64 {
    let mask = psi.mask(qubit);
    lambda
        .amplitudes()
        .iter()
        .zip(psi.amplitudes())
        .enumerate()
        .map(|(b, (l, p))| {
            let v = (l.conj() * p).im;
            if b & mask == 0 {
                v
            } else {
                -v
            }
        })
        .sum()
}

/// `Im⟨λ|Y_q|ψ⟩` with `Y = [[0, -i], [i, 0]]`.
fn im_expect_y(lambda: &Statevector, psi: &Statevector, qubit: usize) -> f64 {
    let mask = psi.mask(qubit);
    let l = lambda.amplitudes();
    let p = psi.amplitudes();
    let i = Complex64::new(0.0, 1.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for i0 in 0..p.len() {
        if i0 & mask == 0 {
            let i1 = i0 | mask;
            acc += l[i0].conj() * (-i * p[i1]) + l[i1].conj() * (i * p[i0]);
        }
    }
    acc.im
}

/// Diagonal of `Σ_q c_q Z_q` in the computational basis.
fn weighted_z_diagonal(num_qubits: usize, weights: &[f64]) -> Vec<f64> {
    (0..1usize << num_qubits)
        .map(|b| {
            weights
                .iter()
                .enumerate()
                .map(|(q, w)| if b & (1 << (num_qubits - 1 - q)) == 0 { *w } else { -*w })
                .sum()
        })
        .collect()
}

/// Walks the gate list backwards from the output state. Returns the angle
/// gradient and `U†·H·|ψ_out⟩`.
fn adjoint_sweep(
    ops: &[Op],
    angles: &[f64],
    mut psi: Statevector,
    diagonal: &[f64],
) -> (Vec<f64>, Statevector) {
    let mut lambda = psi.clone();
    for (l, h) in lambda.amplitudes_mut().iter_mut().zip(diagonal) {
        *l *= *h;
    }
    let mut grad = vec![0.0; angles.len()];
    for &op in ops.iter().rev() {
        match op {
            Op::Rz { qubit, param } => grad[param] += im_expect_z(&lambda, &psi, qubit),
            Op::Ry { qubit, param } => grad[param] += im_expect_y(&lambda, &psi, qubit),
            Op::Cnot { .. } => {}
        }
        apply_inverse(&mut psi, op, angles);
        apply_inverse(&mut lambda, op, angles);
    }
    (grad, lambda)
}

struct Forward {
    ops: Vec<Op>,
    output: Statevector,
    /// Embedded amplitudes and the input norm, or `None` for the zero fallback.
    embedding: Option<(Vec<f64>, f64)>,
}

fn forward(input: &[f64], params: &CircuitParams) -> Result<Forward> {
    let n = qubits_for_len(input.len())?;
    if n != params.num_qubits() {
        return Err(Error::dim("embedded input qubits", params.num_qubits(), n));
    }
    let mut state = amplitude_embed(input)?;
    let norm = l2_norm(input);
    let embedding = (norm >= ZERO_NORM_THRESHOLD)
        .then(|| (state.amplitudes().iter().map(|a| a.re).collect(), norm));
    run_ansatz(&mut state, params)?;
    Ok(Forward {
        ops: gate_list(params),
        output: state,
        embedding,
    })
}

/// Chains `∂f/∂a = 2·Re(λ)` through `a = v/‖v‖`.
fn input_gradient(embedding: &Option<(Vec<f64>, f64)>, lambda: &Statevector) -> Vec<f64> {
    match embedding {
        None => vec![0.0; lambda.dim()],
        Some((a, norm)) => {
            let g: Vec<f64> = lambda.amplitudes().iter().map(|l| 2.0 * l.re).collect();
            let proj: f64 = a.iter().zip(&g).map(|(x, y)| x * y).sum();
            g.iter().zip(a).map(|(gi, ai)| (gi - ai * proj) / norm).collect()
        }
    }
}

/// Readouts of `run_ansatz(amplitude_embed(input))`.
pub fn expectations(input: &[f64], params: &CircuitParams) -> Result<Vec<f64>> {
    let mut state = amplitude_embed(input)?;
    run_ansatz(&mut state, params)?;
    Ok(pauli_z_expectations(&state))
}

/// Readouts plus the cotangent-weighted gradients, from one forward and one
/// backward sweep.
pub fn vjp_adjoint(input: &[f64], params: &CircuitParams, cotangent: &[f64]) -> Result<VjpResult> {
    if cotangent.len() != params.num_qubits() {
        return Err(Error::dim("readout cotangent", params.num_qubits(), cotangent.len()));
    }
    let fwd = forward(input, params)?;
    let expectations = pauli_z_expectations(&fwd.output);
    let diagonal = weighted_z_diagonal(params.num_qubits(), cotangent);
    let (d_params, lambda) = adjoint_sweep(&fwd.ops, params.angles(), fwd.output, &diagonal);
    let d_input = input_gradient(&fwd.embedding, &lambda);
    Ok(VjpResult {
        expectations,
        d_params,
        d_input,
    })
}

/// Full Jacobian of every `⟨Z_q⟩` by adjoint differentiation.
pub fn gradients_adjoint(input: &[f64], params: &CircuitParams) -> Result<GradientResult> {
    let fwd = forward(input, params)?;
    let n = params.num_qubits();
    let mut d_params = Vec::with_capacity(n);
    let mut d_input = Vec::with_capacity(n);
    for q in 0..n {
        let mut unit = vec![0.0; n];
        unit[q] = 1.0;
        let diagonal = weighted_z_diagonal(n, &unit);
        let (g, lambda) = adjoint_sweep(&fwd.ops, params.angles(), fwd.output.clone(), &diagonal);
        d_params.push(g);
        d_input.push(input_gradient(&fwd.embedding, &lambda));
    }
    Ok(GradientResult { d_params, d_input })
}

/// Angle Jacobian by the two-term parameter-shift rule (`±π/2`).
pub fn gradients_parameter_shift(input: &[f64], params: &CircuitParams) -> Result<GradientResult> {
    let n = params.num_qubits();
    // validates shapes
    expectations(input, params)?;
    let mut d_params = vec![vec![0.0; params.len()]; n];
    let mut shifted = params.clone();
    for i in 0..params.len() {
        let base = params.angles()[i];
        shifted.angles_mut()[i] = base + FRAC_PI_2;
        let plus = expectations(input, &shifted)?;
        shifted.angles_mut()[i] = base - FRAC_PI_2;
        let minus = expectations(input, &shifted)?;
        shifted.angles_mut()[i] = base;
        for (row, (p, m)) in d_params.iter_mut().zip(plus.iter().zip(&minus)) {
            row[i] = 0.5 * (p - m);
        }
    }
    Ok(GradientResult {
        d_params,
        d_input: Vec::new(),
    })
}
