use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 20;

/// Inputs with an L2 norm below this embed as `|0…0⟩`.
pub const ZERO_NORM_THRESHOLD: f64 = 1e-12;

/// Pure state of an `N`-qubit register; index `b` holds the amplitude of `|b⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    amplitudes: Vec<Complex64>,
    num_qubits: usize,
}

impl Statevector {
    /// The computational basis state `|index⟩`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_qubit_count(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::InvalidInput(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            amplitudes,
            num_qubits,
        })
    }

    /// `|0…0⟩`.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    /// Wraps raw amplitudes. The length must be a power of two; normalization
    /// is the caller's responsibility.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let num_qubits = qubits_for_len(amplitudes.len())?;
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite amplitude".into()));
        }
        Ok(Self {
            amplitudes,
            num_qubits,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `|amplitude_b|²` for every basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Bit mask selecting `qubit` in a basis index (qubit 0 is the MSB).
    pub(crate) fn mask(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }
}

pub(crate) fn check_qubit_count(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(Error::InvalidInput(format!(
            "qubit count must be in 1..={MAX_QUBITS}, got {num_qubits}"
        )));
    }
    Ok(())
}

pub(crate) fn qubits_for_len(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::InvalidInput(format!(
            "length {len} is not a power of two of at least 2"
        )));
    }
    let n = len.trailing_zeros() as usize;
    check_qubit_count(n)?;
    Ok(n)
}

/// Amplitude embedding: encodes `v / ‖v‖₂` as real amplitudes.
///
/// Vectors with norm below [`ZERO_NORM_THRESHOLD`] map to `|0…0⟩`.
pub fn amplitude_embed(v: &[f64]) -> Result<Statevector> {
    let num_qubits = qubits_for_len(v.len())?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite entry in embedded vector".into()));
    }
    let norm = l2_norm(v);
    if norm < ZERO_NORM_THRESHOLD {
        return Statevector::zero(num_qubits);
    }
    let amplitudes = v.iter().map(|&x| Complex64::new(x / norm, 0.0)).collect();
    Ok(Statevector {
        amplitudes,
        num_qubits,
    })
}

pub(crate) fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
