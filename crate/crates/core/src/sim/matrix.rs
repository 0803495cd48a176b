//! Dense complex matrix helpers shared by the backends.
//!
//! Multi-qubit operators use little-endian local ordering: bit `j` of a
//! matrix row/column index belongs to the `j`-th entry of the qubit list the
//! operator is applied to.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Single-qubit Pauli matrix by digit: 0 = I, 1 = X, 2 = Y, 3 = Z.
pub fn pauli(digit: usize) -> CMatrix {
    match digit {
        0 => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ONE]),
        1 => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        2 => CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        3 => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        _ => panic!("pauli digit out of range: {digit}"),
    }
}

/// Kronecker product `a ⊗ b` (`a` acts on the more significant bits).
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Pauli string on `k` local qubits; digit `j` of `index` (base 4) acts on
/// local qubit `j`.
pub fn pauli_string(index: usize, k: usize) -> CMatrix {
    let mut out = identity(1);
    for j in (0..k).rev() {
        let digit = (index >> (2 * j)) & 3;
        out = kron(&out, &pauli(digit));
    }
    out
}

pub fn is_unitary(m: &CMatrix, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let prod = m.adjoint() * m;
    frobenius_distance(&prod, &identity(m.nrows())) <= tol
}

pub fn frobenius_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Frobenius distance between `a` and `b` after removing the best global
/// phase, i.e. `min_φ ‖a − e^{iφ} b‖`.
pub fn distance_up_to_phase(a: &CMatrix, b: &CMatrix) -> f64 {
    let overlap: Complex64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 1e-300 {
        overlap / overlap.norm()
    } else {
        ONE
    };
    frobenius_distance(a, &(b * phase))
}

/// Returns the number of qubits `k` for a `2^k × 2^k` matrix.
pub fn qubit_arity(m: &CMatrix) -> Option<usize> {
    let d = m.nrows();
    if m.ncols() != d || d == 0 || !d.is_power_of_two() {
        return None;
    }
    Some(d.trailing_zeros() as usize)
}

/// Pauli-transfer matrix of the linear map `ρ ↦ Σ_e E ρ E†`, row-major,
/// `R[i][j] = 2^{-k} Re Tr(P_i Λ(P_j))`.
pub fn pauli_transfer(ops: &[CMatrix], k: usize) -> Vec<f64> {
    let dim4 = 1usize << (2 * k);
    let paulis: Vec<CMatrix> = (0..dim4).map(|i| pauli_string(i, k)).collect();
    let scale = 1.0 / (1u64 << k) as f64;
    let mut out = vec![0.0; dim4 * dim4];
    for (j, pj) in paulis.iter().enumerate() {
        let mut image = CMatrix::zeros(1 << k, 1 << k);
        for e in ops {
            image += e * pj * e.adjoint();
        }
        for (i, pi) in paulis.iter().enumerate() {
            let tr: Complex64 = (pi * &image).trace();
            out[i * dim4 + j] = tr.re * scale;
        }
    }
    out
}
