use std::f64::consts::PI;

use super::gates::gate_matrix;
use super::mct::{mct_gray, mct_one_ancilla};
use super::{Circuit, GateKind, Instruction};
use crate::sim::matrix::CMatrix;

const ANGLE_TOL: f64 = 1e-10;

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Euler angles `(θ, φ, λ)` with `U = e^{iα} U3(θ, φ, λ)`, `θ ∈ [0, π]`.
pub fn zyz_angles(u: &CMatrix) -> (f64, f64, f64) {
    let (u00, u01, u10, u11) = (u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
    let theta = 2.0 * u10.norm().atan2(u00.norm());
    let (phi, lambda);
    if u00.norm() > 1e-12 {
        let alpha = u00.arg();
        let sum = u11.arg() - alpha;
        if u10.norm() > 1e-12 {
            phi = u10.arg() - alpha;
            lambda = sum - phi;
        } else {
            phi = 0.0;
            lambda = sum;
        }
    } else {
        let alpha = u10.arg();
        phi = 0.0;
        lambda = (-u01).arg() - alpha;
    }
    (theta, wrap_angle(phi), wrap_angle(lambda))
}

/// The cheapest basis gate equal to `u` up to global phase, or `None` when
/// `u` is proportional to the identity.
pub fn synthesize_1q(u: &CMatrix, q: usize) -> Option<Instruction> {
    let (theta, phi, lambda) = zyz_angles(u);
    if theta.abs() < ANGLE_TOL {
        let l = wrap_angle(phi + lambda);
        return (l.abs() >= ANGLE_TOL).then(|| Instruction::u1(l, q));
    }
    if (theta - PI / 2.0).abs() < ANGLE_TOL {
        return Some(Instruction::u2(phi, lambda, q));
    }
    Some(Instruction::u3(theta, phi, lambda, q))
}

/// Expands non-basis gates, then greedily fuses runs of single-qubit gates
/// on each wire into one U1/U2/U3.
pub fn transpile_to_basis(circuit: &Circuit) -> Circuit {
    let mut expanded = Vec::with_capacity(circuit.instructions.len());
    for inst in &circuit.instructions {
        match inst.kind {
            GateKind::Mct => {
                let (target, controls) = inst.qubits.split_last().expect("MCT has qubits");
                mct_gray(controls, *target, &mut expanded);
            }
            GateKind::Mcta => {
                let k = inst.qubits.len();
                mct_one_ancilla(&inst.qubits[..k - 2], inst.qubits[k - 2], inst.qubits[k - 1], &mut expanded);
            }
            GateKind::H => expanded.push(Instruction::u2(0.0, PI, inst.qubits[0])),
            GateKind::X => expanded.push(Instruction::u3(PI, 0.0, PI, inst.qubits[0])),
            GateKind::Z => expanded.push(Instruction::u1(PI, inst.qubits[0])),
            _ => expanded.push(inst.clone()),
        }
    }
    let mut out = Circuit::new(circuit.n_qubits, circuit.n_clbits);
    let mut pending: Vec<Option<CMatrix>> = vec![None; circuit.n_qubits];
    let flush = |pending: &mut Vec<Option<CMatrix>>, out: &mut Circuit, q: usize| {
        if let Some(u) = pending[q].take() {
            if let Some(inst) = synthesize_1q(&u, q) {
                out.add(inst);
            }
        }
    };
    for inst in expanded {
        if inst.kind.is_unitary() && inst.qubits.len() == 1 {
            let q = inst.qubits[0];
            let m = gate_matrix(inst.kind, &inst.params).expect("basis gate");
            pending[q] = Some(match pending[q].take() {
                Some(prev) => m * prev,
                None => m,
            });
        } else {
            for &q in &inst.qubits {
                flush(&mut pending, &mut out, q);
            }
            out.add(inst);
        }
    }
    for q in 0..circuit.n_qubits {
        flush(&mut pending, &mut out, q);
    }
    out
}
