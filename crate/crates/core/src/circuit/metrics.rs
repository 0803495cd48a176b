use serde::{Deserialize, Serialize};

use super::gates::instruction_matrix;
use super::{Circuit, CircuitError, GateKind, Result};
use crate::sim::matrix::CMatrix;
use crate::sim::StateVector;

pub const MAX_UNITARY_QUBITS: usize = 6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitMetrics {
    pub total_gates: usize,
    pub depth: usize,
    pub count_1q: usize,
    pub count_2q: usize,
    pub measurements: usize,
    pub resets: usize,
}

/// Counts and depth of a basis circuit. Depth uses per-wire frontiers
/// (including classical bits written by measurements); measurements and
/// resets occupy one slot on their wire. Barriers align the frontiers of
/// their qubits and are not counted.
pub fn circuit_metrics(circuit: &Circuit) -> Result<CircuitMetrics> {
    let mut m = CircuitMetrics::default();
    let mut qfront = vec![0usize; circuit.n_qubits];
    let mut cfront = vec![0usize; circuit.n_clbits];
    for inst in &circuit.instructions {
        match inst.kind {
            GateKind::U1 | GateKind::U2 | GateKind::U3 => m.count_1q += 1,
            GateKind::Cx => m.count_2q += 1,
            GateKind::Measure => m.measurements += 1,
            GateKind::Reset => m.resets += 1,
            GateKind::Barrier => {
                let level = inst.qubits.iter().map(|&q| qfront[q]).max().unwrap_or(0);
                for &q in &inst.qubits {
                    qfront[q] = level;
                }
                continue;
            }
            other => {
                return Err(CircuitError::Validation(format!(
                    "{other:?} is not a basis instruction; transpile first"
                )))
            }
        }
        let mut level = inst.qubits.iter().map(|&q| qfront[q]).max().unwrap_or(0);
        if let Some(c) = inst.clbit {
            level = level.max(cfront[c]);
        }
        level += 1;
        for &q in &inst.qubits {
            qfront[q] = level;
        }
        if let Some(c) = inst.clbit {
            cfront[c] = level;
        }
        m.depth = m.depth.max(level);
    }
    m.total_gates = m.count_1q + m.count_2q;
    Ok(m)
}

/// Product of the embedded gate matrices, first instruction applied first.
pub fn circuit_unitary(circuit: &Circuit) -> Result<CMatrix> {
    let n = circuit.n_qubits;
    if n > MAX_UNITARY_QUBITS {
        return Err(CircuitError::Capacity(format!(
            "{n} qubits exceeds the {MAX_UNITARY_QUBITS}-qubit unitary limit"
        )));
    }
    let mats = circuit
        .instructions
        .iter()
        .map(|inst| {
            if inst.kind == GateKind::Barrier {
                return Ok(None);
            }
            if !inst.kind.is_unitary() {
                return Err(CircuitError::Validation(format!("{:?} is not unitary", inst.kind)));
            }
            instruction_matrix(inst).map(|m| Some((m, inst.qubits.to_vec())))
        })
        .collect::<Result<Vec<_>>>()?;
    let mats: Vec<_> = mats.into_iter().flatten().collect();
    let dim = 1usize << n;
    let mut u = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut e = vec![crate::sim::matrix::ZERO; dim];
        e[col] = crate::sim::matrix::ONE;
        let mut psi = StateVector::from_amplitudes(e).expect("power of two");
        for (m, qubits) in &mats {
            psi.apply_matrix(m, qubits);
        }
        for (row, a) in psi.amplitudes().iter().enumerate() {
            u[(row, col)] = *a;
        }
    }
    Ok(u)
}
