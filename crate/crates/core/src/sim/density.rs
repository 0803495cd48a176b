//! Exact mixed-state backend.
//!
//! The density operator is stored by its real Pauli coefficients,
//! `ρ = 2^{-n} Σ_P c_P P` with `c_P = Tr(Pρ)`, so every gate, channel, reset
//! and projector is a real `4^k × 4^k` transfer matrix acting on `k` base-4
//! digits. Qubit `q` owns digit `q` (bits `2q..2q+2` of the coefficient
//! index); digit values are 0 = I, 1 = X, 2 = Y, 3 = Z.

use num_complex::Complex64;

use super::matrix::{self, CMatrix};

/// A real `4 × 4` single-qubit transfer matrix, row-major.
pub type Map1 = [f64; 16];

pub const IDENTITY_MAP: Map1 = [
    1.0, 0.0, 0.0, 0.0, //
    0.0, 1.0, 0.0, 0.0, //
    0.0, 0.0, 1.0, 0.0, //
    0.0, 0.0, 0.0, 1.0,
];

/// Trace out the qubit and replace it with `|0⟩⟨0|`.
pub const RESET_MAP: Map1 = [
    1.0, 0.0, 0.0, 0.0, //
    0.0, 0.0, 0.0, 0.0, //
    0.0, 0.0, 0.0, 0.0, //
    1.0, 0.0, 0.0, 0.0,
];

/// Unnormalized projection onto `|bit⟩`.
pub fn projector_map(bit: bool) -> Map1 {
    let s = if bit { -1.0 } else { 1.0 };
    [
        0.5, 0.0, 0.0, 0.5 * s, //
        0.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 0.0, //
        0.5 * s, 0.0, 0.0, 0.5,
    ]
}

/// `a · b` (apply `b` first).
pub fn compose(a: &Map1, b: &Map1) -> Map1 {
    let mut out = [0.0; 16];
    for i in 0..4 {
        for j in 0..4 {
            out[i * 4 + j] = (0..4).map(|k| a[i * 4 + k] * b[k * 4 + j]).sum();
        }
    }
    out
}

pub fn is_identity(m: &Map1, tol: f64) -> bool {
    m.iter().zip(IDENTITY_MAP.iter()).all(|(a, b)| (a - b).abs() <= tol)
}

fn is_diagonal(m: &Map1) -> bool {
    (0..16).all(|i| i % 5 == 0 || m[i] == 0.0)
}

/// A two-qubit transfer matrix with one nonzero entry per row, such as
/// Clifford unitaries (CX) and Pauli-diagonal channels:
/// `out[i] = weight[i] · in[perm[i]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Monomial2 {
    pub perm: [u8; 16],
    pub weight: [f64; 16],
}

impl Monomial2 {
    pub fn from_transfer(m: &[f64]) -> Option<Self> {
        if m.len() != 256 {
            return None;
        }
        let mut perm = [0u8; 16];
        let mut weight = [0.0; 16];
        for i in 0..16 {
            let mut found = None;
            for j in 0..16 {
                let v = m[i * 16 + j];
                if v.abs() < 1e-14 {
                    continue;
                }
                if found.is_some() {
                    return None;
                }
                found = Some((j, v));
            }
            let (j, w) = found?;
            perm[i] = j as u8;
            weight[i] = w;
        }
        Some(Self { perm, weight })
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &Monomial2) -> Monomial2 {
        let mut out = *next;
        for i in 0..16 {
            let j = next.perm[i] as usize;
            out.perm[i] = self.perm[j];
            out.weight[i] = next.weight[i] * self.weight[j];
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    coeffs: Vec<f64>,
}

#[inline]
fn digit_stride(q: usize) -> usize {
    1usize << (2 * q)
}

/// Coefficient-array offsets of every local digit combination of `qubits`.
fn digit_offsets(qubits: &[usize]) -> Vec<usize> {
    let k = qubits.len();
    (0..1usize << (2 * k))
        .map(|local| {
            qubits
                .iter()
                .enumerate()
                .map(|(j, &q)| ((local >> (2 * j)) & 3) * digit_stride(q))
                .sum()
        })
        .collect()
}

#[inline]
fn deposit_zero_digits(mut i: usize, sorted: &[usize]) -> usize {
    for &q in sorted {
        let p = 2 * q;
        let low = i & ((1usize << p) - 1);
        i = low | ((i >> p) << (p + 2));
    }
    i
}

impl DensityMatrix {
    /// `|0…0⟩⟨0…0|`: coefficient 1 on every string over {I, Z}.
    pub fn zero(n_qubits: usize) -> Self {
        let mut coeffs = vec![0.0; 1 << (2 * n_qubits)];
        for s in 0..1usize << n_qubits {
            coeffs[z_string_index(s, n_qubits)] = 1.0;
        }
        Self { n_qubits, coeffs }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn pauli_coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn trace(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn purity(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>() / (1u64 << self.n_qubits) as f64
    }

    pub(crate) fn scale(&mut self, factor: f64) {
        for c in &mut self.coeffs {
            *c *= factor;
        }
    }

    /// Applies a single-qubit transfer matrix to qubit `q`.
    pub fn apply_map1(&mut self, q: usize, m: &Map1) {
        let s = digit_stride(q);
        if is_diagonal(m) {
            for block in self.coeffs.chunks_exact_mut(4 * s) {
                for d in 1..4 {
                    let f = m[d * 5];
                    if f != 1.0 {
                        block[d * s..(d + 1) * s].iter_mut().for_each(|c| *c *= f);
                    }
                }
                if m[0] != 1.0 {
                    block[..s].iter_mut().for_each(|c| *c *= m[0]);
                }
            }
            return;
        }
        for block in self.coeffs.chunks_exact_mut(4 * s) {
            let (p0, rest) = block.split_at_mut(s);
            let (p1, rest) = rest.split_at_mut(s);
            let (p2, p3) = rest.split_at_mut(s);
            for (((a, b), c), d) in p0.iter_mut().zip(p1.iter_mut()).zip(p2.iter_mut()).zip(p3.iter_mut()) {
                let (v0, v1, v2, v3) = (*a, *b, *c, *d);
                *a = m[0] * v0 + m[1] * v1 + m[2] * v2 + m[3] * v3;
                *b = m[4] * v0 + m[5] * v1 + m[6] * v2 + m[7] * v3;
                *c = m[8] * v0 + m[9] * v1 + m[10] * v2 + m[11] * v3;
                *d = m[12] * v0 + m[13] * v1 + m[14] * v2 + m[15] * v3;
            }
        }
    }

    /// Applies a two-qubit signed permutation on `(a, b)` (local digit
    /// index `da + 4·db`), optionally preceded by single-qubit maps on each.
    pub fn apply_perm2(
        &mut self,
        a: usize,
        b: usize,
        perm: &Monomial2,
        pre_a: Option<&Map1>,
        pre_b: Option<&Map1>,
    ) {
        let (sa, sb) = (digit_stride(a), digit_stride(b));
        let mut offsets = [0usize; 16];
        for (local, off) in offsets.iter_mut().enumerate() {
            *off = (local & 3) * sa + (local >> 2) * sb;
        }
        let (sp, sr) = if a < b { (sa, sb) } else { (sb, sa) };
        let len = self.coeffs.len();
        let c = &mut self.coeffs;
        let mut v = [0.0f64; 16];
        let mut top = 0;
        while top < len {
            let mut mid = 0;
            while mid < sr {
                for low in 0..sp {
                    let base = top + mid + low;
                    for (slot, off) in v.iter_mut().zip(&offsets) {
                        *slot = c[base + off];
                    }
                    if let Some(m) = pre_a {
                        for db in 0..4 {
                            let o = 4 * db;
                            let (v0, v1, v2, v3) = (v[o], v[o + 1], v[o + 2], v[o + 3]);
                            for r in 0..4 {
                                v[o + r] = m[4 * r] * v0 + m[4 * r + 1] * v1 + m[4 * r + 2] * v2 + m[4 * r + 3] * v3;
                            }
                        }
                    }
                    if let Some(m) = pre_b {
                        for da in 0..4 {
                            let (v0, v1, v2, v3) = (v[da], v[da + 4], v[da + 8], v[da + 12]);
                            for r in 0..4 {
                                v[da + 4 * r] =
                                    m[4 * r] * v0 + m[4 * r + 1] * v1 + m[4 * r + 2] * v2 + m[4 * r + 3] * v3;
                            }
                        }
                    }
                    for (i, off) in offsets.iter().enumerate() {
                        c[base + off] = perm.weight[i] * v[perm.perm[i] as usize];
                    }
                }
                mid += 4 * sp;
            }
            top += 4 * sr;
        }
    }

    /// Applies a general `4^k × 4^k` transfer matrix (row-major) to `qubits`.
    pub fn apply_transfer(&mut self, qubits: &[usize], m: &[f64]) {
        if qubits.len() == 1 {
            let mut m1 = [0.0; 16];
            m1.copy_from_slice(m);
            self.apply_map1(qubits[0], &m1);
            return;
        }
        let offsets = digit_offsets(qubits);
        let dim = offsets.len();
        let mut sorted = qubits.to_vec();
        sorted.sort_unstable();
        let mut buf = vec![0.0; dim];
        for i in 0..self.coeffs.len() >> (2 * qubits.len()) {
            let base = deposit_zero_digits(i, &sorted);
            for (slot, off) in buf.iter_mut().zip(&offsets) {
                *slot = self.coeffs[base + off];
            }
            for (r, off) in offsets.iter().enumerate() {
                let row = &m[r * dim..(r + 1) * dim];
                self.coeffs[base + off] = row.iter().zip(&buf).map(|(x, y)| x * y).sum();
            }
        }
    }

    /// `Σ_e E ρ E†` for operators on `qubits`.
    pub fn apply_operators(&mut self, ops: &[CMatrix], qubits: &[usize]) {
        let transfer = matrix::pauli_transfer(ops, qubits.len());
        if qubits.len() == 2 {
            if let Some(perm) = Monomial2::from_transfer(&transfer) {
                self.apply_perm2(qubits[0], qubits[1], &perm, None, None);
                return;
            }
        }
        self.apply_transfer(qubits, &transfer);
    }

    /// Probability that qubit `q` reads 1.
    pub fn prob_one(&self, q: usize) -> f64 {
        0.5 * (self.coeffs[0] - self.coeffs[3 * digit_stride(q)])
    }

    /// Computational-basis probabilities (the diagonal of ρ).
    pub fn probabilities(&self) -> Vec<f64> {
        let n = self.n_qubits;
        let mut p: Vec<f64> = (0..1usize << n).map(|s| self.coeffs[z_string_index(s, n)]).collect();
        for q in 0..n {
            let bit = 1usize << q;
            for x in 0..p.len() {
                if x & bit == 0 {
                    let (a, b) = (p[x], p[x | bit]);
                    p[x] = 0.5 * (a + b);
                    p[x | bit] = 0.5 * (a - b);
                }
            }
        }
        p
    }

    /// Reconstructs the `2^n × 2^n` density matrix.
    pub fn to_matrix(&self) -> CMatrix {
        let n = self.n_qubits;
        let half = Complex64::new(0.5, 0.0);
        let ihalf = Complex64::new(0.0, 0.5);
        let mut t: Vec<Complex64> = self.coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect();
        // Per digit: (I, X, Y, Z) → matrix units indexed by r + 2c.
        for q in 0..n {
            let s = digit_stride(q);
            for block in t.chunks_exact_mut(4 * s) {
                for i in 0..s {
                    let (ci, cx, cy, cz) = (block[i], block[i + s], block[i + 2 * s], block[i + 3 * s]);
                    block[i] = half * (ci + cz);
                    block[i + s] = half * cx + ihalf * cy;
                    block[i + 2 * s] = half * cx - ihalf * cy;
                    block[i + 3 * s] = half * (ci - cz);
                }
            }
        }
        let dim = 1usize << n;
        let mut rho = CMatrix::zeros(dim, dim);
        for (idx, v) in t.into_iter().enumerate() {
            let (mut r, mut c) = (0usize, 0usize);
            for q in 0..n {
                let e = (idx >> (2 * q)) & 3;
                r |= (e & 1) << q;
                c |= (e >> 1) << q;
            }
            rho[(r, c)] = v;
        }
        rho
    }

    /// Builds the Pauli representation of a Hermitian `2^n × 2^n` matrix.
    pub fn from_matrix(rho: &CMatrix) -> Option<Self> {
        let n = matrix::qubit_arity(rho)?;
        let mut t = vec![Complex64::new(0.0, 0.0); 1 << (2 * n)];
        for r in 0..1usize << n {
            for c in 0..1usize << n {
                let mut idx = 0;
                for q in 0..n {
                    let e = ((r >> q) & 1) | (((c >> q) & 1) << 1);
                    idx |= e << (2 * q);
                }
                t[idx] = rho[(r, c)];
            }
        }
        let i = Complex64::new(0.0, 1.0);
        for q in 0..n {
            let s = digit_stride(q);
            for block in t.chunks_exact_mut(4 * s) {
                for k in 0..s {
                    let (m00, m10, m01, m11) = (block[k], block[k + s], block[k + 2 * s], block[k + 3 * s]);
                    block[k] = m00 + m11;
                    block[k + s] = m01 + m10;
                    block[k + 2 * s] = i * (m01 - m10);
                    block[k + 3 * s] = m00 - m11;
                }
            }
        }
        Some(Self {
            n_qubits: n,
            coeffs: t.into_iter().map(|z| z.re).collect(),
        })
    }
}

/// Coefficient index of the Pauli string with Z on the set bits of `s`.
#[inline]
fn z_string_index(s: usize, n: usize) -> usize {
    (0..n).filter(|q| (s >> q) & 1 == 1).map(|q| 3usize << (2 * q)).sum()
}

/// Single-qubit transfer matrix of a `2 × 2` operator set.
pub fn map1_from_operators(ops: &[CMatrix]) -> Map1 {
    use nalgebra::Matrix2;
    let paulis: [Matrix2<Complex64>; 4] = std::array::from_fn(|d| {
        let p = matrix::pauli(d);
        Matrix2::new(p[(0, 0)], p[(0, 1)], p[(1, 0)], p[(1, 1)])
    });
    let ops: Vec<Matrix2<Complex64>> =
        ops.iter().map(|e| Matrix2::new(e[(0, 0)], e[(0, 1)], e[(1, 0)], e[(1, 1)])).collect();
    let mut m = [0.0; 16];
    for (j, pj) in paulis.iter().enumerate() {
        let image: Matrix2<Complex64> = ops.iter().map(|e| e * pj * e.adjoint()).sum();
        for (i, pi) in paulis.iter().enumerate() {
            m[i * 4 + j] = 0.5 * (pi * image).trace().re;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::matrix::{pauli, ONE, ZERO};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn hadamard() -> CMatrix {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        CMatrix::from_row_slice(2, 2, &[h, h, h, -h])
    }

    fn cx() -> CMatrix {
        CMatrix::from_row_slice(
            4,
            4,
            &[ONE, ZERO, ZERO, ZERO, ZERO, ZERO, ZERO, ONE, ZERO, ZERO, ONE, ZERO, ZERO, ONE, ZERO, ZERO],
        )
    }

    #[test]
    fn zero_state_matrix() {
        let rho = DensityMatrix::zero(2).to_matrix();
        for r in 0..4 {
            for c in 0..4 {
                let want = if r == 0 && c == 0 { 1.0 } else { 0.0 };
                assert!((rho[(r, c)] - Complex64::new(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn matrix_round_trip_through_pauli_basis() {
        let mut d = DensityMatrix::zero(3);
        d.apply_operators(&[hadamard()], &[0]);
        d.apply_operators(&[cx()], &[0, 2]);
        d.apply_operators(&[hadamard()], &[1]);
        let back = DensityMatrix::from_matrix(&d.to_matrix()).unwrap();
        for (a, b) in d.pauli_coefficients().iter().zip(back.pauli_coefficients()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn perm_fast_path_matches_conjugation() {
        let mut d = DensityMatrix::zero(3);
        d.apply_operators(&[hadamard()], &[2]);
        d.apply_operators(&[hadamard()], &[0]);
        let before = d.to_matrix();
        d.apply_operators(&[cx()], &[2, 1]);
        // Dense reference: embed CX(control 2, target 1) on 3 qubits.
        let mut full = CMatrix::zeros(8, 8);
        for x in 0..8usize {
            let y = if x & 4 != 0 { x ^ 2 } else { x };
            full[(y, x)] = ONE;
        }
        let want = &full * before * full.adjoint();
        assert!(matrix::frobenius_distance(&d.to_matrix(), &want) < 1e-12);
    }

    #[test]
    fn pre_maps_fold_into_perm_pass() {
        let h = map1_from_operators(&[hadamard()]);
        let perm = Monomial2::from_transfer(&matrix::pauli_transfer(&[cx()], 2)).unwrap();
        let mut fused = DensityMatrix::zero(3);
        fused.apply_perm2(1, 0, &perm, Some(&h), Some(&h));
        let mut split = DensityMatrix::zero(3);
        split.apply_map1(1, &h);
        split.apply_map1(0, &h);
        split.apply_perm2(1, 0, &perm, None, None);
        assert_eq!(fused, split);
    }

    #[test]
    fn probabilities_are_diagonal() {
        let mut d = DensityMatrix::zero(2);
        d.apply_operators(&[hadamard()], &[0]);
        let p = d.probabilities();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        assert!(p[2].abs() < 1e-15 && p[3].abs() < 1e-15);
        assert!((d.prob_one(0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn reset_map_sends_one_to_zero() {
        let mut d = DensityMatrix::zero(1);
        d.apply_operators(&[pauli(1)], &[0]);
        d.apply_map1(0, &RESET_MAP);
        assert_eq!(d, DensityMatrix::zero(1));
    }
}
