use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::{CircuitError, GateKind, Instruction, Result};
use crate::sim::matrix::{self, CMatrix, ONE, ZERO};

fn cis(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x)
}

pub fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> CMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(c, 0.0),
            -cis(lambda) * s,
            cis(phi) * s,
            cis(phi + lambda) * c,
        ],
    )
}

pub fn cx_matrix() -> CMatrix {
    // Local index bit 0 is the control, bit 1 the target.
    CMatrix::from_row_slice(
        4,
        4,
        &[ONE, ZERO, ZERO, ZERO, ZERO, ZERO, ZERO, ONE, ZERO, ZERO, ONE, ZERO, ZERO, ONE, ZERO, ZERO],
    )
}

/// Multi-controlled X on `n_controls + 1` local qubits (target last).
pub fn mct_matrix(n_controls: usize) -> CMatrix {
    let dim = 1usize << (n_controls + 1);
    let all = (1usize << n_controls) - 1;
    let mut m = CMatrix::zeros(dim, dim);
    for x in 0..dim {
        let y = if x & all == all { x ^ (1 << n_controls) } else { x };
        m[(y, x)] = ONE;
    }
    m
}

/// The standard matrix of a fixed-arity gate.
pub fn gate_matrix(kind: GateKind, params: &[f64]) -> Result<CMatrix> {
    if params.len() != kind.param_count() {
        return Err(CircuitError::Validation(format!(
            "{kind:?} takes {} parameters, got {}",
            kind.param_count(),
            params.len()
        )));
    }
    Ok(match kind {
        GateKind::U1 => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, cis(params[0])]),
        GateKind::U2 => u3_matrix(PI / 2.0, params[0], params[1]),
        GateKind::U3 => u3_matrix(params[0], params[1], params[2]),
        GateKind::Cx => cx_matrix(),
        GateKind::H => {
            let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
            CMatrix::from_row_slice(2, 2, &[h, h, h, -h])
        }
        GateKind::X => matrix::pauli(1),
        GateKind::Z => matrix::pauli(3),
        GateKind::Mct | GateKind::Mcta | GateKind::Measure | GateKind::Reset | GateKind::Barrier => {
            return Err(CircuitError::Validation(format!("{kind:?} has no fixed matrix")))
        }
    })
}

/// Local matrix of a unitary instruction over its qubit list. An MCTA acts
/// as the identity on its ancilla.
pub fn instruction_matrix(inst: &Instruction) -> Result<CMatrix> {
    match inst.kind {
        GateKind::Mct => Ok(mct_matrix(inst.qubits.len() - 1)),
        GateKind::Mcta => Ok(matrix::kron(&matrix::identity(2), &mct_matrix(inst.qubits.len() - 2))),
        kind => gate_matrix(kind, &inst.params),
    }
}
