//! Pure-state backend: a `2^n` amplitude vector evolved by gates, with Kraus
//! channels realized as sampled branches (quantum trajectories).

use num_complex::Complex64;

use super::kraus::KrausChannel;
use super::matrix::{CMatrix, ONE, ZERO};
use super::rng::RandomStream;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

/// Positions of all basis indices whose bits at `qubits` are zero, combined
/// with per-local-index offsets.
pub(crate) fn block_offsets(qubits: &[usize]) -> Vec<usize> {
    let k = qubits.len();
    (0..1usize << k)
        .map(|local| {
            qubits
                .iter()
                .enumerate()
                .filter(|(j, _)| (local >> j) & 1 == 1)
                .map(|(_, &q)| 1usize << q)
                .sum()
        })
        .collect()
}

/// Inserts zero bits at the (ascending) positions `sorted` into `i`.
#[inline]
pub(crate) fn deposit_zero_bits(mut i: usize, sorted: &[usize]) -> usize {
    for &p in sorted {
        let low = i & ((1usize << p) - 1);
        i = low | ((i >> p) << (p + 1));
    }
    i
}

impl StateVector {
    pub fn zero(n_qubits: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[0] = ONE;
        Self { n_qubits, amps }
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Option<Self> {
        if amps.is_empty() || !amps.len().is_power_of_two() {
            return None;
        }
        let n_qubits = amps.len().trailing_zeros() as usize;
        Some(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn scale(&mut self, factor: f64) {
        for a in &mut self.amps {
            *a *= factor;
        }
    }

    pub fn apply_1q(&mut self, q: usize, m: &[Complex64; 4]) {
        let stride = 1usize << q;
        let len = self.amps.len();
        let mut base = 0;
        while base < len {
            for i in base..base + stride {
                let a = self.amps[i];
                let b = self.amps[i + stride];
                self.amps[i] = m[0] * a + m[1] * b;
                self.amps[i + stride] = m[2] * a + m[3] * b;
            }
            base += 2 * stride;
        }
    }

    pub fn apply_cx(&mut self, control: usize, target: usize) {
        let cmask = 1usize << control;
        let tmask = 1usize << target;
        for i in 0..self.amps.len() {
            if i & cmask != 0 && i & tmask == 0 {
                self.amps.swap(i, i | tmask);
            }
        }
    }

    /// Applies a `2^k × 2^k` matrix to the listed qubits.
    pub fn apply_matrix(&mut self, m: &CMatrix, qubits: &[usize]) {
        if qubits.len() == 1 {
            let q = qubits[0];
            self.apply_1q(q, &[m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]);
            return;
        }
        let offsets = block_offsets(qubits);
        let mut sorted = qubits.to_vec();
        sorted.sort_unstable();
        let dim = offsets.len();
        let mut buf = vec![ZERO; dim];
        for i in 0..self.amps.len() >> qubits.len() {
            let base = deposit_zero_bits(i, &sorted);
            for (slot, off) in buf.iter_mut().zip(&offsets) {
                *slot = self.amps[base + off];
            }
            for (r, off) in offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (c, v) in buf.iter().enumerate() {
                    acc += m[(r, c)] * v;
                }
                self.amps[base + off] = acc;
            }
        }
    }

    /// `‖E ψ‖²` for each operator of a channel acting on `qubits`.
    pub fn branch_weights(&self, ops: &[CMatrix], qubits: &[usize]) -> Vec<f64> {
        let grams: Vec<CMatrix> = ops.iter().map(|e| e.adjoint() * e).collect();
        let offsets = block_offsets(qubits);
        let mut sorted = qubits.to_vec();
        sorted.sort_unstable();
        let dim = offsets.len();
        let mut weights = vec![0.0; ops.len()];
        let mut buf = vec![ZERO; dim];
        for i in 0..self.amps.len() >> qubits.len() {
            let base = deposit_zero_bits(i, &sorted);
            for (slot, off) in buf.iter_mut().zip(&offsets) {
                *slot = self.amps[base + off];
            }
            for (w, g) in weights.iter_mut().zip(&grams) {
                let mut acc = ZERO;
                for r in 0..dim {
                    for c in 0..dim {
                        acc += buf[r].conj() * g[(r, c)] * buf[c];
                    }
                }
                *w += acc.re;
            }
        }
        weights
    }

    /// Samples one Kraus branch with probability `‖E_i ψ‖²` and renormalizes.
    /// Returns the chosen branch index.
    pub fn apply_kraus_sampled(
        &mut self,
        channel: &KrausChannel,
        qubits: &[usize],
        rng: &mut RandomStream,
    ) -> usize {
        let weights = self.branch_weights(channel.operators(), qubits);
        let branch = rng.pick_weighted(&weights);
        self.apply_matrix(&channel.operators()[branch], qubits);
        let norm = weights[branch];
        if norm > 0.0 {
            self.scale(1.0 / norm.sqrt());
        }
        branch
    }

    /// Probability that qubit `q` reads 1.
    pub fn prob_one(&self, q: usize) -> f64 {
        let mask = 1usize << q;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Projects qubit `q` onto `bit` and renormalizes by `prob` (the Born
    /// weight of that outcome).
    pub fn project(&mut self, q: usize, bit: bool, prob: f64) {
        let mask = 1usize << q;
        let inv = if prob > 0.0 { 1.0 / prob.sqrt() } else { 0.0 };
        for (i, a) in self.amps.iter_mut().enumerate() {
            if ((i & mask) != 0) == bit {
                *a *= inv;
            } else {
                *a = ZERO;
            }
        }
    }

    /// Measures qubit `q` in the computational basis.
    pub fn measure_qubit(&mut self, q: usize, rng: &mut RandomStream) -> (bool, f64) {
        let p1 = self.prob_one(q).clamp(0.0, 1.0);
        let bit = rng.pick_weighted(&[1.0 - p1, p1]) == 1;
        let prob = if bit { p1 } else { 1.0 - p1 };
        self.project(q, bit, prob);
        (bit, prob)
    }

    pub fn flip(&mut self, q: usize) {
        self.apply_1q(q, &[ZERO, ONE, ONE, ZERO]);
    }
}
