//! Whole-program execution on either backend.
//!
//! A [`Program`] is a flat list of unitaries, channels, measurements and
//! resets. The density executor compiles it into real transfer-matrix passes
//! (fusing runs of single-qubit operations per wire and deferring terminal
//! measurements to a final readout); the trajectory executor runs one
//! sampled state-vector evolution per shot.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::density::{self, DensityMatrix, Map1, Monomial2};
use super::error::{Result, SimError};
use super::kraus::KrausChannel;
use super::matrix::{self, CMatrix};
use super::rng::RandomStream;
use super::vector::StateVector;

/// Branches lighter than this are dropped during density-backend branching.
const BRANCH_PRUNE: f64 = 1e-15;

#[derive(Clone, Debug)]
pub enum Op {
    Unitary { matrix: CMatrix, qubits: Vec<usize> },
    Channel { channel: Arc<KrausChannel>, qubits: Vec<usize> },
    Measure { qubit: usize, clbit: usize },
    Reset { qubit: usize },
}

impl Op {
    pub fn qubits(&self) -> &[usize] {
        match self {
            Op::Unitary { qubits, .. } | Op::Channel { qubits, .. } => qubits,
            Op::Measure { qubit, .. } | Op::Reset { qubit } => std::slice::from_ref(qubit),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Program {
    pub n_qubits: usize,
    pub n_clbits: usize,
    pub ops: Vec<Op>,
}

impl Program {
    pub fn new(n_qubits: usize, n_clbits: usize) -> Self {
        Self {
            n_qubits,
            n_clbits,
            ops: Vec::new(),
        }
    }

    pub fn push(&mut self, op: Op) {
        self.ops.push(op);
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_clbits > 24 {
            return Err(SimError::Capacity(format!("{} classical bits", self.n_clbits)));
        }
        for op in &self.ops {
            let qs = op.qubits();
            for (i, &q) in qs.iter().enumerate() {
                if q >= self.n_qubits {
                    return Err(SimError::Validation(format!("qubit {q} out of range")));
                }
                if qs[..i].contains(&q) {
                    return Err(SimError::Validation(format!("qubit {q} repeated")));
                }
            }
            match op {
                Op::Unitary { matrix, qubits } => {
                    if matrix.nrows() != 1 << qubits.len() {
                        return Err(SimError::Validation("matrix arity mismatch".into()));
                    }
                }
                Op::Channel { channel, qubits } => {
                    if channel.arity() != qubits.len() {
                        return Err(SimError::Validation("channel arity mismatch".into()));
                    }
                }
                Op::Measure { clbit, .. } => {
                    if *clbit >= self.n_clbits {
                        return Err(SimError::Validation(format!("clbit {clbit} out of range")));
                    }
                }
                Op::Reset { .. } => {}
            }
        }
        Ok(())
    }

    /// True when the program contains no channels.
    pub fn is_noiseless(&self) -> bool {
        !self.ops.iter().any(|op| matches!(op, Op::Channel { .. }))
    }
}

#[derive(Clone, Debug)]
enum DensityOp {
    Map1 { qubit: usize, map: Map1 },
    Perm2 { a: usize, b: usize, perm: Monomial2, pre_a: Option<Map1>, pre_b: Option<Map1> },
    MapK { qubits: Vec<usize>, map: Vec<f64> },
    Measure { qubit: usize, clbit: usize },
}

/// A program lowered to transfer-matrix passes for the density backend.
#[derive(Clone, Debug)]
pub struct DensityPlan {
    n_qubits: usize,
    n_clbits: usize,
    ops: Vec<DensityOp>,
    readout: Vec<(usize, usize)>,
}

fn map1_of(ops: &[CMatrix]) -> Map1 {
    density::map1_from_operators(ops)
}

fn cx_perm() -> &'static Monomial2 {
    static CX: std::sync::OnceLock<Monomial2> = std::sync::OnceLock::new();
    CX.get_or_init(|| {
        let mut cx = CMatrix::zeros(4, 4);
        for (r, c) in [(0, 0), (1, 3), (2, 2), (3, 1)] {
            cx[(r, c)] = matrix::ONE;
        }
        Monomial2::from_transfer(&matrix::pauli_transfer(&[cx], 2)).expect("CX is Clifford")
    })
}

impl DensityPlan {
    pub fn compile(program: &Program) -> Result<Self> {
        program.validate()?;
        let n = program.n_qubits;
        let terminal = terminal_measurements(program);
        let mut pending: Vec<Option<Map1>> = vec![None; n];
        let mut channel_maps: std::collections::HashMap<*const KrausChannel, Map1> = Default::default();
        let mut channel_transfers: std::collections::HashMap<*const KrausChannel, Vec<f64>> = Default::default();
        let mut ops = Vec::new();
        let mut readout = Vec::new();
        let push_pending = |pending: &mut Vec<Option<Map1>>, q: usize, m: Map1| {
            pending[q] = Some(match pending[q] {
                Some(prev) => density::compose(&m, &prev),
                None => m,
            });
        };
        let flush = |pending: &mut Vec<Option<Map1>>, ops: &mut Vec<DensityOp>, q: usize| {
            if let Some(map) = pending[q].take() {
                if !density::is_identity(&map, 1e-14) {
                    ops.push(DensityOp::Map1 { qubit: q, map });
                }
            }
        };
        for (i, op) in program.ops.iter().enumerate() {
            match op {
                Op::Unitary { matrix, qubits } if qubits.len() == 1 => {
                    push_pending(&mut pending, qubits[0], map1_of(std::slice::from_ref(matrix)));
                }
                Op::Channel { channel, qubits } if qubits.len() == 1 => {
                    let map = *channel_maps
                        .entry(Arc::as_ptr(channel))
                        .or_insert_with(|| map1_of(channel.operators()));
                    push_pending(&mut pending, qubits[0], map);
                }
                Op::Unitary { matrix, qubits } if qubits.len() == 2 && is_cx(matrix) => {
                    ops.push(DensityOp::Perm2 {
                        a: qubits[0],
                        b: qubits[1],
                        perm: *cx_perm(),
                        pre_a: pending[qubits[0]].take(),
                        pre_b: pending[qubits[1]].take(),
                    });
                }
                Op::Reset { qubit } => push_pending(&mut pending, *qubit, density::RESET_MAP),
                Op::Unitary { .. } | Op::Channel { .. } => {
                    let qubits = op.qubits().to_vec();
                    let map = match op {
                        Op::Unitary { matrix, .. } => matrix::pauli_transfer(std::slice::from_ref(matrix), qubits.len()),
                        Op::Channel { channel, .. } => channel_transfers
                            .entry(Arc::as_ptr(channel))
                            .or_insert_with(|| channel.pauli_transfer())
                            .clone(),
                        _ => unreachable!(),
                    };
                    let perm = if qubits.len() == 2 { Monomial2::from_transfer(&map) } else { None };
                    match perm {
                        Some(next) if pending[qubits[0]].is_none() && pending[qubits[1]].is_none() => {
                            match ops.last_mut() {
                                Some(DensityOp::Perm2 { a, b, perm, .. }) if *a == qubits[0] && *b == qubits[1] => {
                                    *perm = perm.then(&next);
                                }
                                _ => ops.push(DensityOp::Perm2 {
                                    a: qubits[0],
                                    b: qubits[1],
                                    perm: next,
                                    pre_a: None,
                                    pre_b: None,
                                }),
                            }
                        }
                        Some(perm) => ops.push(DensityOp::Perm2 {
                            a: qubits[0],
                            b: qubits[1],
                            perm,
                            pre_a: pending[qubits[0]].take(),
                            pre_b: pending[qubits[1]].take(),
                        }),
                        None => {
                            for &q in &qubits {
                                flush(&mut pending, &mut ops, q);
                            }
                            ops.push(DensityOp::MapK { qubits, map });
                        }
                    }
                }
                Op::Measure { qubit, clbit } => {
                    flush(&mut pending, &mut ops, *qubit);
                    if terminal[i] {
                        readout.push((*qubit, *clbit));
                    } else {
                        ops.push(DensityOp::Measure { qubit: *qubit, clbit: *clbit });
                    }
                }
            }
        }
        for q in 0..n {
            flush(&mut pending, &mut ops, q);
        }
        Ok(Self {
            n_qubits: n,
            n_clbits: program.n_clbits,
            ops,
            readout,
        })
    }

    /// Number of transfer passes after fusion.
    pub fn pass_count(&self) -> usize {
        self.ops.len()
    }

    /// Runs the plan and returns the final (unnormalized-by-branch) states
    /// together with their classical records.
    pub fn run_states(&self) -> Vec<(u64, DensityMatrix)> {
        let mut branches = vec![(0u64, DensityMatrix::zero(self.n_qubits))];
        for op in &self.ops {
            match op {
                DensityOp::Map1 { qubit, map } => {
                    for (_, rho) in &mut branches {
                        rho.apply_map1(*qubit, map);
                    }
                }
                DensityOp::Perm2 { a, b, perm, pre_a, pre_b } => {
                    for (_, rho) in &mut branches {
                        rho.apply_perm2(*a, *b, perm, pre_a.as_ref(), pre_b.as_ref());
                    }
                }
                DensityOp::MapK { qubits, map } => {
                    for (_, rho) in &mut branches {
                        rho.apply_transfer(qubits, map);
                    }
                }
                DensityOp::Measure { qubit, clbit } => {
                    let mut next = Vec::with_capacity(branches.len() * 2);
                    for (bits, rho) in branches {
                        let bits = bits & !(1u64 << clbit);
                        let mut one = rho.clone();
                        one.apply_map1(*qubit, &density::projector_map(true));
                        let mut zero = rho;
                        zero.apply_map1(*qubit, &density::projector_map(false));
                        if zero.trace() > BRANCH_PRUNE {
                            next.push((bits, zero));
                        }
                        if one.trace() > BRANCH_PRUNE {
                            next.push((bits | 1u64 << clbit, one));
                        }
                    }
                    branches = next;
                }
            }
        }
        branches
    }

    /// Exact distribution over the `2^n_clbits` classical registers.
    pub fn distribution(&self) -> Vec<f64> {
        let mut dist = vec![0.0; 1usize << self.n_clbits];
        for (bits, rho) in self.run_states() {
            for (x, p) in rho.probabilities().into_iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                let mut reg = bits;
                for &(q, c) in &self.readout {
                    reg = (reg & !(1u64 << c)) | ((((x >> q) & 1) as u64) << c);
                }
                dist[reg as usize] += p;
            }
        }
        for p in &mut dist {
            *p = p.max(0.0);
        }
        dist
    }
}

#[derive(Clone, Debug)]
enum TrajOp {
    Gate1 { qubit: usize, m: [Complex64; 4] },
    Cx { control: usize, target: usize },
    Gate { matrix: CMatrix, qubits: Vec<usize> },
    /// Mixed-unitary channel: fixed branch probabilities; `None` = identity.
    Mixed { qubits: Vec<usize>, probs: Vec<f64>, unitaries: Vec<Option<CMatrix>> },
    Kraus { channel: Arc<KrausChannel>, qubits: Vec<usize> },
    Measure { qubit: usize, clbit: usize },
    Reset { qubit: usize },
}

/// A program lowered for the trajectory backend.
#[derive(Clone, Debug)]
pub struct TrajectoryPlan {
    n_qubits: usize,
    n_clbits: usize,
    ops: Vec<TrajOp>,
}

fn is_cx(m: &CMatrix) -> bool {
    let mut cx = CMatrix::zeros(4, 4);
    cx[(0, 0)] = matrix::ONE;
    cx[(1, 3)] = matrix::ONE;
    cx[(2, 2)] = matrix::ONE;
    cx[(3, 1)] = matrix::ONE;
    m.shape() == (4, 4) && matrix::frobenius_distance(m, &cx) < 1e-14
}

impl TrajectoryPlan {
    pub fn compile(program: &Program) -> Result<Self> {
        program.validate()?;
        let ops = program
            .ops
            .iter()
            .map(|op| match op {
                Op::Unitary { matrix, qubits } if qubits.len() == 1 => TrajOp::Gate1 {
                    qubit: qubits[0],
                    m: [matrix[(0, 0)], matrix[(0, 1)], matrix[(1, 0)], matrix[(1, 1)]],
                },
                Op::Unitary { matrix, qubits } if is_cx(matrix) => TrajOp::Cx {
                    control: qubits[0],
                    target: qubits[1],
                },
                Op::Unitary { matrix, qubits } => TrajOp::Gate {
                    matrix: matrix.clone(),
                    qubits: qubits.clone(),
                },
                Op::Channel { channel, qubits } => match channel.mixed_unitary() {
                    Some((probs, unitaries)) => {
                        let dim = 1 << qubits.len();
                        let unitaries = unitaries
                            .into_iter()
                            .map(|u| {
                                (matrix::distance_up_to_phase(&u, &matrix::identity(dim)) > 1e-14).then_some(u)
                            })
                            .collect();
                        TrajOp::Mixed {
                            qubits: qubits.clone(),
                            probs,
                            unitaries,
                        }
                    }
                    None => TrajOp::Kraus {
                        channel: channel.clone(),
                        qubits: qubits.clone(),
                    },
                },
                Op::Measure { qubit, clbit } => TrajOp::Measure {
                    qubit: *qubit,
                    clbit: *clbit,
                },
                Op::Reset { qubit } => TrajOp::Reset { qubit: *qubit },
            })
            .collect();
        Ok(Self {
            n_qubits: program.n_qubits,
            n_clbits: program.n_clbits,
            ops,
        })
    }

    /// Runs one trajectory and returns the classical register.
    pub fn run_shot(&self, rng: &mut RandomStream) -> u64 {
        let mut psi = StateVector::zero(self.n_qubits);
        let mut reg = 0u64;
        for op in &self.ops {
            match op {
                TrajOp::Gate1 { qubit, m } => psi.apply_1q(*qubit, m),
                TrajOp::Cx { control, target } => psi.apply_cx(*control, *target),
                TrajOp::Gate { matrix, qubits } => psi.apply_matrix(matrix, qubits),
                TrajOp::Mixed { qubits, probs, unitaries } => {
                    let branch = rng.pick_weighted(probs);
                    if let Some(u) = &unitaries[branch] {
                        psi.apply_matrix(u, qubits);
                    }
                }
                TrajOp::Kraus { channel, qubits } => {
                    psi.apply_kraus_sampled(channel, qubits, rng);
                }
                TrajOp::Measure { qubit, clbit } => {
                    let (bit, _) = psi.measure_qubit(*qubit, rng);
                    reg = (reg & !(1u64 << clbit)) | ((bit as u64) << clbit);
                }
                TrajOp::Reset { qubit } => {
                    let (bit, _) = psi.measure_qubit(*qubit, rng);
                    if bit {
                        psi.flip(*qubit);
                    }
                }
            }
        }
        reg
    }

    /// Histogram of `shots` trajectories, trajectory `i` using stream `(seed, i)`.
    pub fn counts(&self, shots: u64, seed: u64) -> Vec<u64> {
        let size = 1usize << self.n_clbits;
        (0..shots)
            .into_par_iter()
            .fold(
                || vec![0u64; size],
                |mut acc, i| {
                    let mut rng = RandomStream::new(seed, i);
                    acc[self.run_shot(&mut rng) as usize] += 1;
                    acc
                },
            )
            .reduce(
                || vec![0u64; size],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            )
    }
}

fn terminal_measurements(program: &Program) -> Vec<bool> {
    let mut last_touch = vec![None; program.n_qubits];
    for (i, op) in program.ops.iter().enumerate() {
        for &q in op.qubits() {
            last_touch[q] = Some(i);
        }
    }
    program
        .ops
        .iter()
        .enumerate()
        .map(|(i, op)| matches!(op, Op::Measure { qubit, .. } if last_touch[*qubit] == Some(i)))
        .collect()
}

/// Exact classical distribution of a noiseless program using state vectors.
/// Mid-circuit measurements and resets split the evolution into weighted
/// branches; terminal measurements are read from the final amplitudes.
pub fn pure_distribution(program: &Program) -> Result<Vec<f64>> {
    program.validate()?;
    if !program.is_noiseless() {
        return Err(SimError::Validation("program contains noise channels".into()));
    }
    let terminal = terminal_measurements(program);
    let mut branches = vec![(0u64, StateVector::zero(program.n_qubits))];
    let mut readout = Vec::new();
    for (op, &is_terminal) in program.ops.iter().zip(&terminal) {
        match op {
            Op::Unitary { matrix, qubits } => {
                for (_, psi) in &mut branches {
                    psi.apply_matrix(matrix, qubits);
                }
            }
            Op::Measure { qubit, clbit } if is_terminal => readout.push((*qubit, *clbit)),
            Op::Measure { .. } | Op::Reset { .. } => {
                let (q, clbit) = match op {
                    Op::Measure { qubit, clbit } => (*qubit, Some(*clbit)),
                    Op::Reset { qubit } => (*qubit, None),
                    _ => unreachable!(),
                };
                let mut next = Vec::with_capacity(branches.len() * 2);
                for (bits, psi) in branches {
                    let mut one = psi.clone();
                    one.project(q, true, 1.0);
                    let mut zero = psi;
                    zero.project(q, false, 1.0);
                    let (bits0, bits1) = match clbit {
                        Some(c) => (bits & !(1u64 << c), bits | (1u64 << c)),
                        None => {
                            one.flip(q);
                            (bits, bits)
                        }
                    };
                    if zero.norm_sqr() > BRANCH_PRUNE {
                        next.push((bits0, zero));
                    }
                    if one.norm_sqr() > BRANCH_PRUNE {
                        next.push((bits1, one));
                    }
                }
                branches = next;
            }
            Op::Channel { .. } => unreachable!(),
        }
    }
    let mut dist = vec![0.0; 1usize << program.n_clbits];
    for (bits, psi) in branches {
        for (x, p) in psi.probabilities().into_iter().enumerate() {
            let mut reg = bits;
            for &(q, c) in &readout {
                reg = (reg & !(1u64 << c)) | ((((x >> q) & 1) as u64) << c);
            }
            dist[reg as usize] += p;
        }
    }
    Ok(dist)
}
