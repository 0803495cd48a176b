//! Quantum state simulation: a pure state-vector backend sampled as
//! trajectories and an exact mixed-state backend.

pub mod density;
pub mod error;
pub mod exec;
pub mod kraus;
pub mod matrix;
pub mod rng;
pub mod vector;

use serde::{Deserialize, Serialize};

pub use density::DensityMatrix;
pub use error::{Result, SimError};
pub use exec::{DensityPlan, Op, Program, TrajectoryPlan};
pub use kraus::{ChannelLabel, KrausChannel};
pub use matrix::CMatrix;
pub use rng::RandomStream;
pub use vector::StateVector;

pub const MAX_VECTOR_QUBITS: usize = 14;
pub const MAX_DENSITY_QUBITS: usize = 10;

/// Tolerance for the unitarity check in [`apply_unitary`].
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Vector,
    Density,
}

#[derive(Clone, Debug, PartialEq)]
pub enum QuantumState {
    Vector(StateVector),
    Density(DensityMatrix),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub qubit_indices: Vec<usize>,
    pub outcome_bits: Vec<bool>,
    pub probability: f64,
}

impl MeasurementRecord {
    /// Outcome as a bitstring, first measured qubit first.
    pub fn bitstring(&self) -> String {
        self.outcome_bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

impl QuantumState {
    pub fn n_qubits(&self) -> usize {
        match self {
            QuantumState::Vector(v) => v.n_qubits(),
            QuantumState::Density(d) => d.n_qubits(),
        }
    }

    pub fn backend(&self) -> Backend {
        match self {
            QuantumState::Vector(_) => Backend::Vector,
            QuantumState::Density(_) => Backend::Density,
        }
    }

    /// The state as a dense density matrix (`|ψ⟩⟨ψ|` for vectors).
    pub fn density_matrix(&self) -> CMatrix {
        match self {
            QuantumState::Vector(v) => {
                let psi = CMatrix::from_column_slice(v.amplitudes().len(), 1, v.amplitudes());
                &psi * psi.adjoint()
            }
            QuantumState::Density(d) => d.to_matrix(),
        }
    }
}

fn check_qubits(state: &QuantumState, qubits: &[usize]) -> Result<()> {
    let n = state.n_qubits();
    for (i, &q) in qubits.iter().enumerate() {
        if q >= n {
            return Err(SimError::Validation(format!("qubit {q} out of range for {n} qubits")));
        }
        if qubits[..i].contains(&q) {
            return Err(SimError::Validation(format!("qubit {q} listed twice")));
        }
    }
    Ok(())
}

pub fn init_state(n: usize, backend: Backend) -> Result<QuantumState> {
    let max = match backend {
        Backend::Vector => MAX_VECTOR_QUBITS,
        Backend::Density => MAX_DENSITY_QUBITS,
    };
    if n == 0 || n > max {
        return Err(SimError::Capacity(format!(
            "{n} qubits unsupported on the {backend:?} backend (1..={max})"
        )));
    }
    Ok(match backend {
        Backend::Vector => QuantumState::Vector(StateVector::zero(n)),
        Backend::Density => QuantumState::Density(DensityMatrix::zero(n)),
    })
}

pub fn apply_unitary(mut state: QuantumState, u: &CMatrix, qubits: &[usize]) -> Result<QuantumState> {
    check_qubits(&state, qubits)?;
    if u.nrows() != 1 << qubits.len() || u.ncols() != u.nrows() {
        return Err(SimError::Validation(format!(
            "{}×{} matrix does not act on {} qubits",
            u.nrows(),
            u.ncols(),
            qubits.len()
        )));
    }
    if !matrix::is_unitary(u, UNITARY_TOL) {
        return Err(SimError::Validation("matrix is not unitary".into()));
    }
    match &mut state {
        QuantumState::Vector(v) => v.apply_matrix(u, qubits),
        QuantumState::Density(d) => d.apply_operators(std::slice::from_ref(u), qubits),
    }
    Ok(state)
}

/// Applies a channel: exactly on the density backend, as one sampled branch
/// on the vector backend.
pub fn apply_kraus(
    mut state: QuantumState,
    channel: &KrausChannel,
    qubits: &[usize],
    rng: &mut RandomStream,
) -> Result<QuantumState> {
    check_qubits(&state, qubits)?;
    if channel.arity() != qubits.len() {
        return Err(SimError::Validation(format!(
            "channel acts on {} qubits, {} given",
            channel.arity(),
            qubits.len()
        )));
    }
    let err = channel.completeness_error();
    if err > kraus::COMPLETENESS_TOL {
        return Err(SimError::Validation(format!("Kraus completeness violated by {err:.3e}")));
    }
    match &mut state {
        QuantumState::Vector(v) => {
            v.apply_kraus_sampled(channel, qubits, rng);
        }
        QuantumState::Density(d) => d.apply_operators(channel.operators(), qubits),
    }
    Ok(state)
}

/// Measures `qubits` in order, sampling each outcome by the Born rule.
pub fn measure(
    mut state: QuantumState,
    qubits: &[usize],
    rng: &mut RandomStream,
) -> Result<(MeasurementRecord, QuantumState)> {
    check_qubits(&state, qubits)?;
    let mut bits = Vec::with_capacity(qubits.len());
    let mut probability = 1.0;
    for &q in qubits {
        let (bit, p) = match &mut state {
            QuantumState::Vector(v) => v.measure_qubit(q, rng),
            QuantumState::Density(d) => {
                let p1 = (d.prob_one(q) / d.trace()).clamp(0.0, 1.0);
                let bit = rng.pick_weighted(&[1.0 - p1, p1]) == 1;
                let p = if bit { p1 } else { 1.0 - p1 };
                d.apply_map1(q, &density::projector_map(bit));
                let tr = d.trace();
                if tr > 0.0 {
                    d.scale(1.0 / tr);
                }
                (bit, p)
            }
        };
        bits.push(bit);
        probability *= p;
    }
    Ok((
        MeasurementRecord {
            qubit_indices: qubits.to_vec(),
            outcome_bits: bits,
            probability,
        },
        state,
    ))
}

/// Returns each listed qubit to `|0⟩`. The vector backend measures and
/// flips; the density backend traces the qubit out and replaces it.
pub fn reset_qubits(mut state: QuantumState, qubits: &[usize], rng: &mut RandomStream) -> Result<QuantumState> {
    check_qubits(&state, qubits)?;
    for &q in qubits {
        match &mut state {
            QuantumState::Vector(v) => {
                let (bit, _) = v.measure_qubit(q, rng);
                if bit {
                    v.flip(q);
                }
            }
            QuantumState::Density(d) => d.apply_map1(q, &density::RESET_MAP),
        }
    }
    Ok(state)
}

/// Computational-basis distribution, indexed little-endian (bit `q` of the
/// index is qubit `q`).
pub fn probabilities(state: &QuantumState) -> Vec<f64> {
    match state {
        QuantumState::Vector(v) => v.probabilities(),
        QuantumState::Density(d) => {
            let tr = d.trace();
            d.probabilities().into_iter().map(|p| (p / tr).max(0.0)).collect()
        }
    }
}
