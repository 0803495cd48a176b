//! Grover search circuits: the standard algorithm and depth-reduced
//! variants built from stage schedules with local diffusion operators.

mod schedule;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{transpile_to_basis, Circuit, CircuitError, GateKind, Instruction};
use crate::sim::{self, SimError};

pub use schedule::{
    block_success_model, default_m1_schedule, default_m2_schedule, DiffusionScope, Iteration, OracleScope, Stage,
    StageSchedule,
};

#[derive(Debug, Error)]
pub enum GroverError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

pub type Result<T, E = GroverError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MctMode {
    Noancilla,
    OneAncilla,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Standard,
    Modified,
}

/// The six named algorithm variants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Sga,
    Sgaa,
    M1ga,
    M1gaa,
    M2ga,
    M2gaa,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Sga,
        Algorithm::Sgaa,
        Algorithm::M1ga,
        Algorithm::M1gaa,
        Algorithm::M2ga,
        Algorithm::M2gaa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Sga => "sga",
            Algorithm::Sgaa => "sgaa",
            Algorithm::M1ga => "m1ga",
            Algorithm::M1gaa => "m1gaa",
            Algorithm::M2ga => "m2ga",
            Algorithm::M2gaa => "m2gaa",
        }
    }

    pub fn mct_mode(self) -> MctMode {
        match self {
            Algorithm::Sga | Algorithm::M1ga | Algorithm::M2ga => MctMode::Noancilla,
            _ => MctMode::OneAncilla,
        }
    }

    pub fn uses_ancilla(self) -> bool {
        self.mct_mode() == MctMode::OneAncilla
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = GroverError;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| GroverError::Config(format!("unknown algorithm '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroverConfig {
    pub n_qubits: usize,
    /// Target bitstring, most significant (highest qubit) first.
    pub target: String,
    pub mct_mode: MctMode,
    pub variant: Variant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<StageSchedule>,
}

impl GroverConfig {
    pub fn standard(n_qubits: usize, mct_mode: MctMode) -> Self {
        Self {
            n_qubits,
            target: "1".repeat(n_qubits),
            mct_mode,
            variant: Variant::Standard,
            schedule: None,
        }
    }

    pub fn modified(n_qubits: usize, mct_mode: MctMode, schedule: StageSchedule) -> Self {
        Self {
            n_qubits,
            target: "1".repeat(n_qubits),
            mct_mode,
            variant: Variant::Modified,
            schedule: Some(schedule),
        }
    }

    /// Default configuration of a named variant with the all-ones target.
    pub fn for_algorithm(algorithm: Algorithm, n_qubits: usize) -> Self {
        let mode = algorithm.mct_mode();
        match algorithm {
            Algorithm::Sga | Algorithm::Sgaa => Self::standard(n_qubits, mode),
            Algorithm::M1ga | Algorithm::M1gaa => Self::modified(n_qubits, mode, default_m1_schedule(n_qubits)),
            Algorithm::M2ga | Algorithm::M2gaa => Self::modified(n_qubits, mode, default_m2_schedule(n_qubits)),
        }
    }

    pub fn with_target(mut self, target: &str) -> Self {
        self.target = target.to_string();
        self
    }

    /// Total circuit width: data qubits plus the ancilla when present.
    pub fn total_qubits(&self) -> usize {
        self.n_qubits + usize::from(self.mct_mode == MctMode::OneAncilla)
    }

    pub fn ancilla(&self) -> Option<usize> {
        (self.mct_mode == MctMode::OneAncilla).then_some(self.n_qubits)
    }

    /// Target bit carried by data qubit `q`.
    pub fn target_bit(&self, q: usize) -> bool {
        self.target.as_bytes()[self.n_qubits - 1 - q] == b'1'
    }

    /// Target as a little-endian basis index.
    pub fn target_index(&self) -> usize {
        (0..self.n_qubits).filter(|&q| self.target_bit(q)).map(|q| 1usize << q).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 {
            return Err(GroverError::Config("need at least one qubit".into()));
        }
        if self.target.len() != self.n_qubits || !self.target.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(GroverError::Config(format!(
                "target '{}' is not a {}-bit string",
                self.target, self.n_qubits
            )));
        }
        match (self.variant, &self.schedule) {
            (Variant::Modified, None) => Err(GroverError::Config("modified variant needs a schedule".into())),
            (Variant::Modified, Some(s)) => s.validate(self.n_qubits),
            (Variant::Standard, _) => Ok(()),
        }
    }
}

/// `⌊π / (4θ)⌋` with `θ = arcsin(2^{-n/2})`, at least 1.
pub fn optimal_iterations(n: usize) -> usize {
    let theta = (0.5f64).powf(n as f64 / 2.0).asin();
    ((std::f64::consts::PI / (4.0 * theta)).floor() as usize).max(1)
}

/// Closed-form noiseless success of `k` standard iterations on `n` qubits.
pub fn standard_success(n: usize, k: usize) -> f64 {
    let theta = (0.5f64).powf(n as f64 / 2.0).asin();
    ((2 * k + 1) as f64 * theta).sin().powi(2)
}

/// Multi-controlled Z on `qubits` realized as H–MCT–H on the last one.
fn multi_controlled_z(qubits: &[usize], ancilla: Option<usize>, out: &mut Circuit) {
    let (&last, controls) = qubits.split_last().expect("nonempty block");
    if controls.is_empty() {
        out.push(Instruction::z(last)).expect("valid qubit");
        return;
    }
    out.push(Instruction::h(last)).expect("valid qubit");
    let mut wires = controls.to_vec();
    wires.push(last);
    let kind = match ancilla {
        Some(a) if controls.len() >= 2 => {
            wires.push(a);
            GateKind::Mcta
        }
        _ => GateKind::Mct,
    };
    out.push(Instruction::new(kind, &wires, &[])).expect("valid qubits");
    out.push(Instruction::h(last)).expect("valid qubit");
}

fn oracle_into(qubits: &[usize], bits: &[bool], ancilla: Option<usize>, out: &mut Circuit) {
    let flips: Vec<usize> = qubits.iter().zip(bits).filter(|(_, b)| !**b).map(|(q, _)| *q).collect();
    for &q in &flips {
        out.push(Instruction::x(q)).expect("valid qubit");
    }
    multi_controlled_z(qubits, ancilla, out);
    for &q in &flips {
        out.push(Instruction::x(q)).expect("valid qubit");
    }
}

fn diffusion_into(qubits: &[usize], ancilla: Option<usize>, out: &mut Circuit) {
    for &q in qubits {
        out.push(Instruction::h(q)).expect("valid qubit");
    }
    for &q in qubits {
        out.push(Instruction::x(q)).expect("valid qubit");
    }
    multi_controlled_z(qubits, ancilla, out);
    for &q in qubits {
        out.push(Instruction::x(q)).expect("valid qubit");
    }
    for &q in qubits {
        out.push(Instruction::h(q)).expect("valid qubit");
    }
}

fn ancilla_for(mode: MctMode, n: usize) -> Option<usize> {
    (mode == MctMode::OneAncilla).then_some(n)
}

fn parse_target(n: usize, target: &str) -> Result<Vec<bool>> {
    if target.is_empty() {
        return Err(GroverError::Config("empty target".into()));
    }
    if target.len() != n || !target.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(GroverError::Config(format!("target '{target}' is not a {n}-bit string")));
    }
    // Little-endian: entry q is the bit of qubit q.
    Ok(target.bytes().rev().map(|b| b == b'1').collect())
}

/// Phase oracle marking `target` on qubits `0..n` (plus an ancilla at `n`
/// in one-ancilla mode).
pub fn build_oracle(n: usize, target: &str, mct_mode: MctMode) -> Result<Circuit> {
    let bits = parse_target(n, target)?;
    let ancilla = ancilla_for(mct_mode, n);
    let mut c = Circuit::new(n + usize::from(ancilla.is_some()), 0);
    let qubits: Vec<usize> = (0..n).collect();
    oracle_into(&qubits, &bits, ancilla, &mut c);
    Ok(c)
}

/// Reflection about the uniform superposition of `scope` (up to a global
/// phase of −1), identity elsewhere.
pub fn build_diffusion(n: usize, scope: &[usize]) -> Result<Circuit> {
    if scope.is_empty() {
        return Err(GroverError::Config("empty diffusion scope".into()));
    }
    let mut c = Circuit::new(n, 0);
    for (i, &q) in scope.iter().enumerate() {
        if q >= n || scope[..i].contains(&q) {
            return Err(GroverError::Config(format!("bad diffusion scope {scope:?}")));
        }
    }
    diffusion_into(scope, None, &mut c);
    Ok(c)
}

/// H on every data qubit, `optimal_iterations(n)` rounds of oracle and
/// global diffusion, then measurement of qubit `q` into clbit `q`.
pub fn build_standard_grover(config: &GroverConfig) -> Result<Circuit> {
    config.validate()?;
    let n = config.n_qubits;
    let schedule = StageSchedule::single(n, vec![Iteration::standard(); optimal_iterations(n)]);
    build_schedule(config, &schedule)
}

pub fn build_modified_grover(config: &GroverConfig) -> Result<Circuit> {
    config.validate()?;
    if config.variant != Variant::Modified {
        return Err(GroverError::Config("standard configuration passed to the modified builder".into()));
    }
    build_schedule(config, config.schedule.as_ref().expect("validated"))
}

pub fn build(config: &GroverConfig) -> Result<Circuit> {
    match config.variant {
        Variant::Standard => build_standard_grover(config),
        Variant::Modified => build_modified_grover(config),
    }
}

fn build_schedule(config: &GroverConfig, schedule: &StageSchedule) -> Result<Circuit> {
    schedule.validate(config.n_qubits)?;
    let n = config.n_qubits;
    let ancilla = config.ancilla();
    let bits = parse_target(n, &config.target)?;
    let all: Vec<usize> = (0..n).collect();
    let mut c = Circuit::new(config.total_qubits(), n);
    for &q in &all {
        c.push(Instruction::h(q))?;
    }
    let mut measured = vec![false; n];
    for (si, stage) in schedule.stages.iter().enumerate() {
        for it in &stage.iterations {
            match it.oracle {
                OracleScope::Full => oracle_into(&all, &bits, ancilla, &mut c),
                OracleScope::Block => {
                    let block_bits: Vec<bool> = stage.block.iter().map(|&q| bits[q]).collect();
                    oracle_into(&stage.block, &block_bits, ancilla, &mut c);
                }
            }
            match &it.diffusion {
                DiffusionScope::Global => diffusion_into(&all, ancilla, &mut c),
                DiffusionScope::Local(scope) => diffusion_into(scope, ancilla, &mut c),
            }
        }
        if stage.measure_after {
            for &q in &stage.block {
                c.push(Instruction::measure(q, q))?;
                measured[q] = true;
            }
            let later: Vec<usize> = schedule.stages[si + 1..].iter().flat_map(|s| s.block.iter().copied()).collect();
            let wires: Vec<usize> = (0..c.n_qubits).collect();
            c.push(Instruction::barrier(&wires))?;
            for &q in &later {
                c.push(Instruction::reset(q))?;
            }
            for &q in &later {
                c.push(Instruction::h(q))?;
            }
        }
    }
    for q in (0..n).filter(|&q| !measured[q]) {
        c.push(Instruction::measure(q, q))?;
    }
    Ok(c)
}

/// Noiseless probability of reading the target. The standard variant uses
/// the closed form; modified schedules are simulated exactly.
pub fn ideal_success_probability(config: &GroverConfig) -> Result<f64> {
    config.validate()?;
    match config.variant {
        Variant::Standard => Ok(standard_success(config.n_qubits, optimal_iterations(config.n_qubits))),
        Variant::Modified => simulated_success_probability(config),
    }
}

/// Noiseless target probability by exact state-vector simulation of the
/// transpiled circuit.
pub fn simulated_success_probability(config: &GroverConfig) -> Result<f64> {
    if config.total_qubits() > sim::MAX_VECTOR_QUBITS {
        return Err(SimError::Capacity(format!("{} qubits", config.total_qubits())).into());
    }
    let circuit = transpile_to_basis(&build(config)?);
    let dist = sim::exec::pure_distribution(&circuit.to_program()?)?;
    Ok(dist[config.target_index()])
}
