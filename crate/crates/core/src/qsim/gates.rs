use num_complex::Complex64;

use super::state::Statevector;
use crate::error::{Error, Result};

/// Row-major 2×2 complex matrix.
pub type Matrix2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub(crate) fn rz_matrix(lambda: f64) -> Matrix2 {
    let h = 0.5 * lambda;
    [
        [Complex64::new(h.cos(), -h.sin()), ZERO],
        [ZERO, Complex64::new(h.cos(), h.sin())],
    ]
}

pub(crate) fn ry_matrix(theta: f64) -> Matrix2 {
    let (s, c) = (0.5 * theta).sin_cos();
    [
        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    ]
}

pub(crate) fn matmul2(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

#[cfg(test)]
fn dagger2(m: &Matrix2) -> Matrix2 {
    [
        [m[0][0].conj(), m[1][0].conj()],
        [m[0][1].conj(), m[1][1].conj()],
    ]
}

/// `RZ(omega)·RY(theta)·RZ(phi)`.
pub fn rot_matrix(phi: f64, theta: f64, omega: f64) -> Matrix2 {
    matmul2(&rz_matrix(omega), &matmul2(&ry_matrix(theta), &rz_matrix(phi)))
}

fn check_qubit(state: &Statevector, qubit: usize) -> Result<()> {
    if qubit >= state.num_qubits() {
        return Err(Error::Qubit {
            index: qubit,
            num_qubits: state.num_qubits(),
        });
    }
    Ok(())
}

/// Applies a single-qubit matrix without bounds checks on `qubit`.
pub(crate) fn apply_matrix_unchecked(state: &mut Statevector, qubit: usize, m: &Matrix2) {
    let mask = state.mask(qubit);
    let amps = state.amplitudes_mut();
    let dim = amps.len();
    let mut base = 0;
    while base < dim {
        for i0 in base..base + mask {
            let i1 = i0 | mask;
            let a0 = amps[i0];
            let a1 = amps[i1];
            amps[i0] = m[0][0] * a0 + m[0][1] * a1;
            amps[i1] = m[1][0] * a0 + m[1][1] * a1;
        }
        base += 2 * mask;
    }
}

/// Applies an arbitrary single-qubit unitary to `qubit`.
pub fn apply_matrix(state: &mut Statevector, qubit: usize, m: &Matrix2) -> Result<()> {
    check_qubit(state, qubit)?;
    apply_matrix_unchecked(state, qubit, m);
    Ok(())
}

/// Applies `Rot(phi, theta, omega) = RZ(omega)·RY(theta)·RZ(phi)` to `qubit`.
pub fn apply_rot(
    state: &mut Statevector,
    qubit: usize,
    phi: f64,
    theta: f64,
    omega: f64,
) -> Result<()> {
    apply_matrix(state, qubit, &rot_matrix(phi, theta, omega))
}

pub(crate) fn apply_cnot_unchecked(state: &mut Statevector, control: usize, target: usize) {
    let cmask = state.mask(control);
    let tmask = state.mask(target);
    let amps = state.amplitudes_mut();
    for i in 0..amps.len() {
        // visit each swapped pair once, from its target-bit-clear member
        if i & cmask != 0 && i & tmask == 0 {
            amps.swap(i, i | tmask);
        }
    }
}

/// Flips `target` on every basis state whose `control` bit is set.
pub fn apply_cnot(state: &mut Statevector, control: usize, target: usize) -> Result<()> {
    check_qubit(state, control)?;
    check_qubit(state, target)?;
    if control == target {
        return Err(Error::Qubit {
            index: target,
            num_qubits: state.num_qubits(),
        });
    }
    apply_cnot_unchecked(state, control, target);
    Ok(())
}
