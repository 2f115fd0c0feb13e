use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::gates::{apply_cnot_unchecked, apply_matrix_unchecked, rot_matrix};
use super::state::{check_qubit_count, Statevector};
use crate::error::{Error, Result};

/// Angles per `Rot` gate: `(phi, theta, omega)`.
pub const ANGLES_PER_ROTATION: usize = 3;

/// Angles of the hardware-efficient ansatz, stored flat as
/// `[layer][qubit][phi, theta, omega]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    num_qubits: usize,
    num_layers: usize,
    angles: Vec<f64>,
}

impl CircuitParams {
    pub fn zeros(num_qubits: usize, num_layers: usize) -> Result<Self> {
        Self::from_angles(
            num_qubits,
            num_layers,
            vec![0.0; Self::count(num_qubits, num_layers)],
        )
    }

    pub fn from_angles(num_qubits: usize, num_layers: usize, angles: Vec<f64>) -> Result<Self> {
        check_qubit_count(num_qubits)?;
        if num_layers == 0 {
            return Err(Error::InvalidInput("ansatz needs at least one layer".into()));
        }
        let expected = Self::count(num_qubits, num_layers);
        if angles.len() != expected {
            return Err(Error::dim("circuit angles", expected, angles.len()));
        }
        Ok(Self {
            num_qubits,
            num_layers,
            angles,
        })
    }

    /// Angles drawn uniformly from `[0, 2π)`.
    pub fn random<R: Rng + ?Sized>(num_qubits: usize, num_layers: usize, rng: &mut R) -> Result<Self> {
        let angles = (0..Self::count(num_qubits, num_layers))
            .map(|_| rng.random_range(0.0..TAU))
            .collect();
        Self::from_angles(num_qubits, num_layers, angles)
    }

    /// Total number of angles, `3·N·K`.
    pub fn count(num_qubits: usize, num_layers: usize) -> usize {
        ANGLES_PER_ROTATION * num_qubits * num_layers
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_layers(&self) -> usize {
        self.num_layers
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn angles_mut(&mut self) -> &mut [f64] {
        &mut self.angles
    }

    /// Flat index of an angle.
    pub fn index(&self, layer: usize, qubit: usize, which: usize) -> usize {
        (layer * self.num_qubits + qubit) * ANGLES_PER_ROTATION + which
    }

    /// `(phi, theta, omega)` of the rotation on `qubit` in `layer`.
    pub fn rotation(&self, layer: usize, qubit: usize) -> (f64, f64, f64) {
        let i = self.index(layer, qubit, 0);
        (self.angles[i], self.angles[i + 1], self.angles[i + 2])
    }
}

/// CNOT pairs of one circular entangling sub-layer.
pub(crate) fn entangler_pairs(num_qubits: usize) -> impl Iterator<Item = (usize, usize)> {
    let n = if num_qubits > 1 { num_qubits } else { 0 };
    (0..n).map(move |i| (i, (i + 1) % num_qubits))
}

fn check_shape(state: &Statevector, params: &CircuitParams) -> Result<()> {
    if state.num_qubits() != params.num_qubits() {
        return Err(Error::dim(
            "ansatz qubit count",
            state.num_qubits(),
            params.num_qubits(),
        ));
    }
    Ok(())
}

/// Applies all `K` ansatz layers to `state` in place.
pub fn run_ansatz(state: &mut Statevector, params: &CircuitParams) -> Result<()> {
    check_shape(state, params)?;
    let n = params.num_qubits();
    for layer in 0..params.num_layers() {
        for q in 0..n {
            let (phi, theta, omega) = params.rotation(layer, q);
            apply_matrix_unchecked(state, q, &rot_matrix(phi, theta, omega));
        }
        for (c, t) in entangler_pairs(n) {
            apply_cnot_unchecked(state, c, t);
        }
    }
    Ok(())
}

/// `⟨Z_q⟩` for every qubit `q`.
pub fn pauli_z_expectations(state: &Statevector) -> Vec<f64> {
    let n = state.num_qubits();
    let mut out = vec![0.0; n];
    for (b, a) in state.amplitudes().iter().enumerate() {
        let p = a.norm_sqr();
        for (q, e) in out.iter_mut().enumerate() {
            if b & (1 << (n - 1 - q)) == 0 {
                *e += p;
            } else {
                *e -= p;
            }
        }
    }
    out
}
