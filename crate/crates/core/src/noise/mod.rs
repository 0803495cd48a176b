//! Noise channel families and their attachment to basis circuits.

pub mod channels;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::circuit::{gates, Circuit, CircuitError, GateKind, Instruction};
use crate::sim::{KrausChannel, Op, Program, Result, SimError};

pub use channels::{
    amplitude_damping_channel, depolarizing_channel, pauli_flip_channel, phase_damping_channel,
    thermal_relaxation_channel, Pauli, ThermalParams,
};

/// Short family identifiers used on the command line and in reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Bf,
    Pf,
    Bpf,
    Dep,
    Ad,
    Pd,
    Thermal,
}

impl ErrorKind {
    pub const GATE_ERRORS: [ErrorKind; 6] =
        [ErrorKind::Bf, ErrorKind::Pf, ErrorKind::Bpf, ErrorKind::Dep, ErrorKind::Ad, ErrorKind::Pd];

    pub fn name(self) -> &'static str {
        match self {
            ErrorKind::Bf => "bf",
            ErrorKind::Pf => "pf",
            ErrorKind::Bpf => "bpf",
            ErrorKind::Dep => "dep",
            ErrorKind::Ad => "ad",
            ErrorKind::Pd => "pd",
            ErrorKind::Thermal => "thermal",
        }
    }

    /// The one-parameter family at strength `p` (not valid for thermal).
    pub fn family(self, p: f64) -> Option<NoiseFamily> {
        Some(match self {
            ErrorKind::Bf => NoiseFamily::Bf { p },
            ErrorKind::Pf => NoiseFamily::Pf { p },
            ErrorKind::Bpf => NoiseFamily::Bpf { p },
            ErrorKind::Dep => NoiseFamily::Dep { p },
            ErrorKind::Ad => NoiseFamily::Ad { p },
            ErrorKind::Pd => NoiseFamily::Pd { p },
            ErrorKind::Thermal => return None,
        })
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ErrorKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        [ErrorKind::Thermal]
            .into_iter()
            .chain(ErrorKind::GATE_ERRORS)
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| SimError::Validation(format!("unknown error family '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum NoiseFamily {
    Bf { p: f64 },
    Pf { p: f64 },
    Bpf { p: f64 },
    Dep { p: f64 },
    Ad { p: f64 },
    Pd { p: f64 },
    Thermal { t1_us: f64, t2_us: f64 },
}

impl NoiseFamily {
    pub fn kind(&self) -> ErrorKind {
        match self {
            NoiseFamily::Bf { .. } => ErrorKind::Bf,
            NoiseFamily::Pf { .. } => ErrorKind::Pf,
            NoiseFamily::Bpf { .. } => ErrorKind::Bpf,
            NoiseFamily::Dep { .. } => ErrorKind::Dep,
            NoiseFamily::Ad { .. } => ErrorKind::Ad,
            NoiseFamily::Pd { .. } => ErrorKind::Pd,
            NoiseFamily::Thermal { .. } => ErrorKind::Thermal,
        }
    }

    pub fn is_thermal(&self) -> bool {
        matches!(self, NoiseFamily::Thermal { .. })
    }

    /// Single-qubit channel of this family; `duration_ns` only matters for
    /// thermal relaxation.
    pub fn channel(&self, duration_ns: f64) -> Result<KrausChannel> {
        match *self {
            NoiseFamily::Bf { p } => pauli_flip_channel(Pauli::X, p),
            NoiseFamily::Pf { p } => pauli_flip_channel(Pauli::Z, p),
            NoiseFamily::Bpf { p } => pauli_flip_channel(Pauli::Y, p),
            NoiseFamily::Dep { p } => depolarizing_channel(p, 1),
            NoiseFamily::Ad { p } => amplitude_damping_channel(p),
            NoiseFamily::Pd { p } => phase_damping_channel(p),
            NoiseFamily::Thermal { t1_us, t2_us } => {
                thermal_relaxation_channel(ThermalParams::new(t1_us, t2_us, duration_ns))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateClass {
    #[serde(rename = "1q")]
    OneQubit,
    #[serde(rename = "2q")]
    TwoQubit,
    #[serde(rename = "measure")]
    Measure,
    #[serde(rename = "reset")]
    Reset,
}

impl GateClass {
    pub fn of(kind: GateKind) -> Option<GateClass> {
        match kind {
            GateKind::U1 | GateKind::U2 | GateKind::U3 => Some(GateClass::OneQubit),
            GateKind::Cx => Some(GateClass::TwoQubit),
            GateKind::Measure => Some(GateClass::Measure),
            GateKind::Reset => Some(GateClass::Reset),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseRule {
    #[serde(flatten)]
    pub family: NoiseFamily,
    pub gate_scope: Vec<GateClass>,
    /// `None` applies the rule to every qubit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubits: Option<Vec<usize>>,
}

impl NoiseRule {
    /// Gate errors on every one- and two-qubit gate, or thermal relaxation
    /// on every timed instruction.
    pub fn everywhere(family: NoiseFamily) -> Self {
        let gate_scope = if family.is_thermal() {
            vec![GateClass::OneQubit, GateClass::TwoQubit, GateClass::Measure, GateClass::Reset]
        } else {
            vec![GateClass::OneQubit, GateClass::TwoQubit]
        };
        Self {
            family,
            gate_scope,
            qubits: None,
        }
    }

    pub fn with_gate_scope(mut self, scope: &[GateClass]) -> Self {
        self.gate_scope = scope.to_vec();
        self
    }

    pub fn on_qubits(mut self, qubits: &[usize]) -> Self {
        self.qubits = Some(qubits.to_vec());
        self
    }

    fn applies_to(&self, class: GateClass, q: usize) -> bool {
        self.gate_scope.contains(&class) && self.qubits.as_ref().is_none_or(|set| set.contains(&q))
    }

    pub fn validate(&self) -> Result<()> {
        if self.gate_scope.is_empty() {
            return Err(SimError::Validation("noise rule with empty gate scope".into()));
        }
        if matches!(&self.qubits, Some(q) if q.is_empty()) {
            return Err(SimError::Validation("noise rule with empty qubit scope".into()));
        }
        if !self.family.is_thermal()
            && self
                .gate_scope
                .iter()
                .any(|c| matches!(c, GateClass::Measure | GateClass::Reset))
        {
            return Err(SimError::Validation(
                "gate-error families attach to unitary gates only".into(),
            ));
        }
        // Constructing the channel checks the parameters.
        self.family.channel(100.0).map(|_| ())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    #[serde(default)]
    pub rules: Vec<NoiseRule>,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn single(rule: NoiseRule) -> Self {
        Self { rules: vec![rule] }
    }

    /// Family `kind` at strength `p` on every gate.
    pub fn uniform(kind: ErrorKind, p: f64) -> Option<Self> {
        kind.family(p).map(|f| Self::single(NoiseRule::everywhere(f)))
    }

    pub fn thermal(t1_us: f64, t2_us: f64) -> Self {
        Self::single(NoiseRule::everywhere(NoiseFamily::Thermal { t1_us, t2_us }))
    }

    pub fn is_noiseless(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.rules.iter().filter(|r| r.family.is_thermal()).count() > 1 {
            return Err(SimError::Validation("at most one thermal rule is allowed".into()));
        }
        self.rules.iter().try_for_each(NoiseRule::validate)
    }
}

#[derive(Clone, Debug)]
pub enum NoisyOp {
    Gate(Instruction),
    Channel { channel: Arc<KrausChannel>, qubits: Vec<usize> },
}

/// A basis circuit with noise channels interleaved.
#[derive(Clone, Debug)]
pub struct NoisyProgram {
    pub n_qubits: usize,
    pub n_clbits: usize,
    pub ops: Vec<NoisyOp>,
}

impl NoisyProgram {
    pub fn channel_count(&self) -> usize {
        self.ops.iter().filter(|op| matches!(op, NoisyOp::Channel { .. })).count()
    }

    /// Lowers to a simulator program with dense gate matrices.
    pub fn to_program(&self) -> Result<Program> {
        let mut program = Program::new(self.n_qubits, self.n_clbits);
        for op in &self.ops {
            match op {
                NoisyOp::Channel { channel, qubits } => program.push(Op::Channel {
                    channel: channel.clone(),
                    qubits: qubits.clone(),
                }),
                NoisyOp::Gate(inst) => match inst.kind {
                    GateKind::Barrier => {}
                    GateKind::Measure => program.push(Op::Measure {
                        qubit: inst.qubits[0],
                        clbit: inst.clbit.expect("measure writes a clbit"),
                    }),
                    GateKind::Reset => program.push(Op::Reset { qubit: inst.qubits[0] }),
                    _ => program.push(Op::Unitary {
                        matrix: gates::instruction_matrix(inst).map_err(|e| SimError::Validation(e.to_string()))?,
                        qubits: inst.qubits.to_vec(),
                    }),
                },
            }
        }
        Ok(program)
    }
}

impl From<CircuitError> for SimError {
    fn from(e: CircuitError) -> Self {
        match e {
            CircuitError::Capacity(m) => SimError::Capacity(m),
            other => SimError::Validation(other.to_string()),
        }
    }
}

/// Interleaves the model's channels with a basis circuit.
///
/// Gate-error rules insert their channel after every matching one- or
/// two-qubit gate, once per participating in-scope qubit. The thermal rule
/// uses each instruction's duration; it follows gates and resets and
/// precedes measurements (the qubit relaxes while being read out).
/// Zero-duration instructions get no thermal channel.
pub fn attach_noise(circuit: &Circuit, model: &NoiseModel) -> Result<NoisyProgram> {
    model.validate()?;
    circuit.validate()?;
    if let Some(inst) = circuit.instructions.iter().find(|i| !i.kind.is_basis()) {
        return Err(SimError::Validation(format!(
            "{:?} is not a basis instruction; transpile first",
            inst.kind
        )));
    }
    let mut cache: HashMap<(usize, u64), Arc<KrausChannel>> = HashMap::new();
    let mut channel_for = |rule_idx: usize, duration: f64| -> Result<Arc<KrausChannel>> {
        let key = (rule_idx, duration.to_bits());
        if let Some(c) = cache.get(&key) {
            return Ok(c.clone());
        }
        let c = Arc::new(model.rules[rule_idx].family.channel(duration)?);
        cache.insert(key, c.clone());
        Ok(c)
    };
    let mut ops = Vec::with_capacity(circuit.instructions.len() * 2);
    for inst in &circuit.instructions {
        let Some(class) = GateClass::of(inst.kind) else {
            ops.push(NoisyOp::Gate(inst.clone()));
            continue;
        };
        let duration = inst.duration_ns();
        let mut before = Vec::new();
        let mut after = Vec::new();
        for (idx, rule) in model.rules.iter().enumerate() {
            let thermal = rule.family.is_thermal();
            if thermal && duration <= 0.0 {
                continue;
            }
            for &q in &inst.qubits {
                if !rule.applies_to(class, q) {
                    continue;
                }
                let op = NoisyOp::Channel {
                    channel: channel_for(idx, if thermal { duration } else { 0.0 })?,
                    qubits: vec![q],
                };
                if thermal && class == GateClass::Measure {
                    before.push(op);
                } else {
                    after.push(op);
                }
            }
        }
        ops.extend(before);
        ops.push(NoisyOp::Gate(inst.clone()));
        ops.extend(after);
    }
    Ok(NoisyProgram {
        n_qubits: circuit.n_qubits,
        n_clbits: circuit.n_clbits,
        ops,
    })
}
