//! Circuit representation, gate matrices, multi-controlled Toffoli
//! decompositions, transpilation to `{U1, U2, U3, CX}` and metrics.

pub mod gates;
pub mod mct;
pub mod metrics;
pub mod qasm;
pub mod transpile;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

pub use gates::gate_matrix;
pub use mct::{decompose_mct_noancilla, decompose_mct_one_ancilla};
pub use metrics::{circuit_metrics, circuit_unitary, CircuitMetrics};
pub use transpile::transpile_to_basis;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = CircuitError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    U1,
    U2,
    U3,
    Cx,
    /// Multi-controlled X; qubits are `controls…, target`.
    Mct,
    /// Multi-controlled X decomposed with one clean ancilla; qubits are
    /// `controls…, target, ancilla`.
    Mcta,
    H,
    X,
    Z,
    Measure,
    Reset,
    /// Scheduling fence across its qubits; no gate, no duration.
    Barrier,
}

impl GateKind {
    pub fn param_count(self) -> usize {
        match self {
            GateKind::U1 => 1,
            GateKind::U2 => 2,
            GateKind::U3 => 3,
            _ => 0,
        }
    }

    /// Gate time in nanoseconds. U1 is a frame change and takes no time.
    pub fn duration_ns(self) -> f64 {
        match self {
            GateKind::U1 | GateKind::Z => 0.0,
            GateKind::U2 | GateKind::H => 50.0,
            GateKind::U3 | GateKind::X => 100.0,
            GateKind::Cx => 300.0,
            GateKind::Measure | GateKind::Reset => 1000.0,
            GateKind::Mct | GateKind::Mcta | GateKind::Barrier => 0.0,
        }
    }

    pub fn is_basis(self) -> bool {
        matches!(
            self,
            GateKind::U1 | GateKind::U2 | GateKind::U3 | GateKind::Cx | GateKind::Measure | GateKind::Reset | GateKind::Barrier
        )
    }

    pub fn is_unitary(self) -> bool {
        !matches!(self, GateKind::Measure | GateKind::Reset | GateKind::Barrier)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instruction {
    pub kind: GateKind,
    pub qubits: SmallVec<[usize; 4]>,
    pub params: SmallVec<[f64; 3]>,
    pub clbit: Option<usize>,
}

impl Instruction {
    pub fn new(kind: GateKind, qubits: &[usize], params: &[f64]) -> Self {
        Self {
            kind,
            qubits: SmallVec::from_slice(qubits),
            params: SmallVec::from_slice(params),
            clbit: None,
        }
    }

    pub fn u1(lambda: f64, q: usize) -> Self {
        Self::new(GateKind::U1, &[q], &[lambda])
    }

    pub fn u2(phi: f64, lambda: f64, q: usize) -> Self {
        Self::new(GateKind::U2, &[q], &[phi, lambda])
    }

    pub fn u3(theta: f64, phi: f64, lambda: f64, q: usize) -> Self {
        Self::new(GateKind::U3, &[q], &[theta, phi, lambda])
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Self::new(GateKind::Cx, &[control, target], &[])
    }

    pub fn h(q: usize) -> Self {
        Self::new(GateKind::H, &[q], &[])
    }

    pub fn x(q: usize) -> Self {
        Self::new(GateKind::X, &[q], &[])
    }

    pub fn z(q: usize) -> Self {
        Self::new(GateKind::Z, &[q], &[])
    }

    pub fn measure(q: usize, clbit: usize) -> Self {
        Self {
            clbit: Some(clbit),
            ..Self::new(GateKind::Measure, &[q], &[])
        }
    }

    pub fn reset(q: usize) -> Self {
        Self::new(GateKind::Reset, &[q], &[])
    }

    pub fn barrier(qubits: &[usize]) -> Self {
        Self::new(GateKind::Barrier, qubits, &[])
    }

    pub fn duration_ns(&self) -> f64 {
        self.kind.duration_ns()
    }

    /// Number of qubits the instruction acts on.
    pub fn arity(&self) -> usize {
        self.qubits.len()
    }

    fn validate(&self, n_qubits: usize, n_clbits: usize) -> Result<()> {
        if self.params.len() != self.kind.param_count() {
            return Err(CircuitError::Validation(format!(
                "{:?} takes {} parameters, got {}",
                self.kind,
                self.kind.param_count(),
                self.params.len()
            )));
        }
        let want = match self.kind {
            GateKind::Cx => Some(2),
            GateKind::Mct | GateKind::Mcta | GateKind::Barrier => None,
            _ => Some(1),
        };
        let arity_ok = match (self.kind, want) {
            (_, Some(k)) => self.qubits.len() == k,
            (GateKind::Mct, None) => self.qubits.len() >= 2,
            (GateKind::Mcta, None) => self.qubits.len() >= 3,
            (GateKind::Barrier, None) => !self.qubits.is_empty(),
            _ => unreachable!(),
        };
        if !arity_ok {
            return Err(CircuitError::Validation(format!(
                "{:?} cannot act on {} qubits",
                self.kind,
                self.qubits.len()
            )));
        }
        for (i, &q) in self.qubits.iter().enumerate() {
            if q >= n_qubits {
                return Err(CircuitError::Validation(format!("qubit {q} out of range ({n_qubits} qubits)")));
            }
            if self.qubits[..i].contains(&q) {
                return Err(CircuitError::Validation(format!("qubit {q} repeated in {:?}", self.kind)));
            }
        }
        match (self.kind, self.clbit) {
            (GateKind::Measure, Some(c)) if c < n_clbits => Ok(()),
            (GateKind::Measure, Some(c)) => Err(CircuitError::Validation(format!("clbit {c} out of range"))),
            (GateKind::Measure, None) => Err(CircuitError::Validation("measure without clbit".into())),
            (_, Some(_)) => Err(CircuitError::Validation(format!("{:?} cannot write a clbit", self.kind))),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Circuit {
    pub n_qubits: usize,
    pub n_clbits: usize,
    pub instructions: Vec<Instruction>,
}

impl Circuit {
    pub fn new(n_qubits: usize, n_clbits: usize) -> Self {
        Self {
            n_qubits,
            n_clbits,
            instructions: Vec::new(),
        }
    }

    /// Appends an instruction after checking arity, parameters and indices.
    pub fn push(&mut self, inst: Instruction) -> Result<&mut Self> {
        inst.validate(self.n_qubits, self.n_clbits)?;
        self.instructions.push(inst);
        Ok(self)
    }

    /// Appends an instruction built by this crate; indices are trusted.
    pub(crate) fn add(&mut self, inst: Instruction) -> &mut Self {
        debug_assert!(inst.validate(self.n_qubits, self.n_clbits).is_ok(), "{inst:?}");
        self.instructions.push(inst);
        self
    }

    pub(crate) fn extend<I: IntoIterator<Item = Instruction>>(&mut self, insts: I) -> &mut Self {
        for inst in insts {
            self.add(inst);
        }
        self
    }

    /// Appends all instructions of `other` (same register sizes or smaller).
    pub fn append(&mut self, other: &Circuit) -> Result<&mut Self> {
        for inst in &other.instructions {
            self.push(inst.clone())?;
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let mut written = vec![false; self.n_clbits];
        for inst in &self.instructions {
            inst.validate(self.n_qubits, self.n_clbits)?;
            if let Some(c) = inst.clbit {
                if std::mem::replace(&mut written[c], true) {
                    return Err(CircuitError::Validation(format!("clbit {c} measured twice")));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn is_basis(&self) -> bool {
        self.instructions.iter().all(|i| i.kind.is_basis())
    }

    /// Gate, measurement and reset counts keyed by kind.
    pub fn count_ops(&self) -> std::collections::BTreeMap<String, usize> {
        let mut out = std::collections::BTreeMap::new();
        for inst in &self.instructions {
            *out.entry(format!("{:?}", inst.kind).to_lowercase()).or_insert(0) += 1;
        }
        out
    }
}

impl Circuit {
    /// Lowers to a simulator program. Multi-controlled gates become dense
    /// matrices, so transpile wide circuits first.
    pub fn to_program(&self) -> Result<crate::sim::Program> {
        use crate::sim::Op;
        self.validate()?;
        let mut program = crate::sim::Program::new(self.n_qubits, self.n_clbits);
        for inst in &self.instructions {
            program.push(match inst.kind {
                GateKind::Barrier => continue,
                GateKind::Measure => Op::Measure {
                    qubit: inst.qubits[0],
                    clbit: inst.clbit.expect("validated"),
                },
                GateKind::Reset => Op::Reset { qubit: inst.qubits[0] },
                _ => Op::Unitary {
                    matrix: gates::instruction_matrix(inst)?,
                    qubits: inst.qubits.to_vec(),
                },
            });
        }
        Ok(program)
    }
}
