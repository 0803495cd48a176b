//! Multi-controlled Toffoli decompositions into `{U1, U2, CX}`.
//!
//! Without ancillas the gate is `H · C^m U1(π) · H` with the controlled
//! phase expanded along a Gray-code walk of the controls (cost `Θ(2^m)`).
//! With one clean ancilla the controls are split in two halves; the first
//! half is computed into the ancilla, and the second half plus the ancilla
//! drive the target through a borrowed-qubit (dirty ancilla) ladder, which
//! is polynomial in `m`.

use std::f64::consts::PI;

use super::{Circuit, CircuitError, Instruction, Result};

pub const MAX_CONTROLS: usize = 13;

/// Controlled U1: `diag(1, 1, 1, e^{iλ})` on `(c, t)`.
pub fn cu1(lambda: f64, c: usize, t: usize, out: &mut Vec<Instruction>) {
    out.push(Instruction::u1(lambda / 2.0, c));
    out.push(Instruction::cx(c, t));
    out.push(Instruction::u1(-lambda / 2.0, t));
    out.push(Instruction::cx(c, t));
    out.push(Instruction::u1(lambda / 2.0, t));
}

/// Multi-controlled U1 via the Gray-code ladder.
pub fn mcu1_gray(lambda: f64, controls: &[usize], target: usize, out: &mut Vec<Instruction>) {
    let m = controls.len();
    if m == 0 {
        out.push(Instruction::u1(lambda, target));
        return;
    }
    let step = lambda / (1u64 << (m - 1)) as f64;
    let mut last: Option<usize> = None;
    for i in 1..1usize << m {
        let pattern = i ^ (i >> 1);
        let lm = (usize::BITS - 1 - pattern.leading_zeros()) as usize;
        if let Some(prev) = last {
            let pos = (pattern ^ prev).trailing_zeros() as usize;
            if pos != lm {
                out.push(Instruction::cx(controls[pos], controls[lm]));
            } else {
                for idx in (0..lm).rev().filter(|j| pattern >> j & 1 == 1) {
                    out.push(Instruction::cx(controls[idx], controls[lm]));
                }
            }
        }
        let sign = if pattern.count_ones() % 2 == 0 { -1.0 } else { 1.0 };
        cu1(sign * step, controls[lm], target, out);
        last = Some(pattern);
    }
}

/// Exact Toffoli in 15 basis gates.
pub fn ccx(a: usize, b: usize, t: usize, out: &mut Vec<Instruction>) {
    let q = PI / 4.0;
    out.extend([
        Instruction::u2(0.0, PI, t),
        Instruction::cx(b, t),
        Instruction::u1(-q, t),
        Instruction::cx(a, t),
        Instruction::u1(q, t),
        Instruction::cx(b, t),
        Instruction::u1(-q, t),
        Instruction::cx(a, t),
        Instruction::u1(q, b),
        Instruction::u1(q, t),
        Instruction::u2(0.0, PI, t),
        Instruction::cx(a, b),
        Instruction::u1(q, a),
        Instruction::u1(-q, b),
        Instruction::cx(a, b),
    ]);
}

/// Toffoli up to a relative phase diagonal in the computational basis. It is
/// its own inverse, so a compute/uncompute pair is exact.
pub fn rccx(a: usize, b: usize, t: usize, out: &mut Vec<Instruction>) {
    let q = PI / 4.0;
    out.extend([
        Instruction::u2(0.0, PI, t),
        Instruction::u1(q, t),
        Instruction::cx(b, t),
        Instruction::u1(-q, t),
        Instruction::cx(a, t),
        Instruction::u1(q, t),
        Instruction::cx(b, t),
        Instruction::u1(-q, t),
        Instruction::u2(0.0, PI, t),
    ]);
}

/// Multi-controlled X with no ancilla.
pub fn mct_gray(controls: &[usize], target: usize, out: &mut Vec<Instruction>) {
    match controls.len() {
        0 => out.push(Instruction::u3(PI, 0.0, PI, target)),
        1 => out.push(Instruction::cx(controls[0], target)),
        _ => {
            out.push(Instruction::u2(0.0, PI, target));
            mcu1_gray(PI, controls, target, out);
            out.push(Instruction::u2(0.0, PI, target));
        }
    }
}

fn pick_borrowed(exclude: &[usize], pool: &[usize]) -> usize {
    *pool
        .iter()
        .find(|q| !exclude.contains(q))
        .expect("borrowed-qubit pool exhausted")
}

/// Multi-controlled X that may borrow any qubit of `pool` in an arbitrary
/// state and returns it unchanged.
fn mct_borrowed(controls: &[usize], target: usize, pool: &[usize], out: &mut Vec<Instruction>) {
    match controls.len() {
        0 | 1 => mct_gray(controls, target, out),
        2 => ccx(controls[0], controls[1], target, out),
        k => {
            let (a, b) = controls.split_at(k.div_ceil(2));
            let mut busy: Vec<usize> = controls.to_vec();
            busy.push(target);
            let d = pick_borrowed(&busy, pool);
            let mut pool_a: Vec<usize> = b.to_vec();
            pool_a.push(target);
            pool_a.extend(pool.iter().filter(|q| !busy.contains(q) && **q != d));
            let mut b_ctl = b.to_vec();
            b_ctl.push(d);
            let mut pool_b: Vec<usize> = a.to_vec();
            pool_b.extend(pool.iter().filter(|q| !busy.contains(q) && **q != d));
            for _ in 0..2 {
                if a.len() == 2 {
                    rccx(a[0], a[1], d, out);
                } else {
                    mct_borrowed(a, d, &pool_a, out);
                }
                mct_borrowed(&b_ctl, target, &pool_b, out);
            }
        }
    }
}

/// Multi-controlled X using one ancilla that starts and ends in `|0⟩`.
/// Fewer than three controls fall back to exact CX/Toffoli.
pub fn mct_one_ancilla(controls: &[usize], target: usize, ancilla: usize, out: &mut Vec<Instruction>) {
    let m = controls.len();
    if m < 3 {
        if m == 2 {
            ccx(controls[0], controls[1], target, out);
        } else {
            mct_gray(controls, target, out);
        }
        return;
    }
    let (a, b) = controls.split_at(m.div_ceil(2));
    let mut compute = Vec::new();
    if a.len() == 2 {
        rccx(a[0], a[1], ancilla, &mut compute);
    } else {
        let mut pool = b.to_vec();
        pool.push(target);
        mct_borrowed(a, ancilla, &pool, &mut compute);
    }
    out.extend(compute.iter().cloned());
    let mut b_ctl = b.to_vec();
    b_ctl.push(ancilla);
    mct_borrowed(&b_ctl, target, a, out);
    out.extend(compute);
}

fn check_controls(n_controls: usize, min: usize) -> Result<()> {
    if n_controls < min || n_controls > MAX_CONTROLS {
        return Err(CircuitError::Validation(format!(
            "{n_controls} controls outside the supported range {min}..={MAX_CONTROLS}"
        )));
    }
    Ok(())
}

/// Gray-code decomposition on `n_controls + 1` qubits: controls
/// `0..n_controls`, target `n_controls`.
pub fn decompose_mct_noancilla(n_controls: usize) -> Result<Circuit> {
    check_controls(n_controls, 1)?;
    let controls: Vec<usize> = (0..n_controls).collect();
    let mut out = Vec::new();
    mct_gray(&controls, n_controls, &mut out);
    let mut c = Circuit::new(n_controls + 1, 0);
    c.extend(out);
    Ok(c)
}

/// One-ancilla decomposition on `n_controls + 2` qubits: controls
/// `0..n_controls`, target `n_controls`, ancilla `n_controls + 1`.
pub fn decompose_mct_one_ancilla(n_controls: usize) -> Result<Circuit> {
    check_controls(n_controls, 3)?;
    let controls: Vec<usize> = (0..n_controls).collect();
    let mut out = Vec::new();
    mct_one_ancilla(&controls, n_controls, n_controls + 1, &mut out);
    let mut c = Circuit::new(n_controls + 2, 0);
    c.extend(out);
    Ok(c)
}
