//! Experiment harness: noisy runs, selectivity, threshold search,
//! relaxation scans, scaling fits and report files.

pub mod fit;
pub mod relax;
pub mod report;
pub mod threshold;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{transpile_to_basis, Circuit};
use crate::grover::{self, Algorithm, GroverConfig, GroverError};
use crate::noise::{attach_noise, NoiseModel};
use crate::sim::{self, DensityPlan, SimError, TrajectoryPlan};

pub use fit::{extrapolate, fit_scaling, FitModel, FitResult};
pub use relax::{log_grid, relaxation_scan, relaxation_scan_pruned, RelaxPoint, RelaxationScan};
pub use threshold::{find_error_threshold, find_threshold_with, ThresholdResult, TARGET_S};

/// Largest data-qubit count evaluated exactly by the automatic backend.
pub const AUTO_EXACT_MAX_QUBITS: usize = 8;
pub const DEFAULT_SHOTS: u64 = 20_000;

#[derive(Debug, Error)]
pub enum LabError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Grover(#[from] GroverError),
    #[error("{0}")]
    Invalid(String),
    #[error("threshold not bracketed: {0}")]
    Unbracketed(String),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendChoice {
    #[default]
    Auto,
    Density,
    Trajectory,
}

impl FromStr for BackendChoice {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(BackendChoice::Auto),
            "density" => Ok(BackendChoice::Density),
            "trajectory" => Ok(BackendChoice::Trajectory),
            other => Err(LabError::Invalid(format!("unknown backend '{other}'"))),
        }
    }
}

impl fmt::Display for BackendChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendChoice::Auto => "auto",
            BackendChoice::Density => "density",
            BackendChoice::Trajectory => "trajectory",
        })
    }
}

/// Outcome distribution over `n`-bit classical registers. Exact runs carry
/// `shots = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    pub n_bits: usize,
    pub target: String,
    pub shots: u64,
    /// Indexed little-endian: bit `q` of the index is classical bit `q`.
    pub probs: Vec<f64>,
}

/// Bitstring of a register value, highest bit first.
pub fn bitstring(index: usize, n_bits: usize) -> String {
    (0..n_bits).rev().map(|b| if index >> b & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn parse_bitstring(s: &str) -> Option<usize> {
    s.bytes().try_fold(0usize, |acc, b| match b {
        b'0' => Some(acc << 1),
        b'1' => Some(acc << 1 | 1),
        _ => None,
    })
}

#[derive(Serialize, Deserialize)]
struct DistributionJson {
    target: String,
    shots: u64,
    probs: BTreeMap<String, f64>,
}

impl Distribution {
    pub fn from_counts(n_bits: usize, target: &str, counts: &[u64]) -> Self {
        let shots: u64 = counts.iter().sum();
        Self {
            n_bits,
            target: target.to_string(),
            shots,
            probs: counts.iter().map(|&c| c as f64 / shots.max(1) as f64).collect(),
        }
    }

    pub fn prob(&self, bits: &str) -> f64 {
        parse_bitstring(bits).and_then(|i| self.probs.get(i).copied()).unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Total-variation distance to another distribution of the same width.
    pub fn tv_distance(&self, other: &Distribution) -> f64 {
        0.5 * self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    pub fn to_json(&self) -> String {
        let probs = self
            .probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(i, p)| (bitstring(i, self.n_bits), *p))
            .collect();
        let doc = DistributionJson {
            target: self.target.clone(),
            shots: self.shots,
            probs,
        };
        serde_json::to_string_pretty(&doc).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: DistributionJson = serde_json::from_str(text).map_err(|e| LabError::Invalid(e.to_string()))?;
        let n_bits = doc.target.len();
        let mut probs = vec![0.0; 1usize << n_bits];
        for (k, v) in doc.probs {
            let i = parse_bitstring(&k)
                .filter(|_| k.len() == n_bits)
                .ok_or_else(|| LabError::Invalid(format!("bad bitstring '{k}'")))?;
            probs[i] = v;
        }
        Ok(Self {
            n_bits,
            target: doc.target,
            shots: doc.shots,
            probs,
        })
    }
}

/// `P_t`, the largest non-target probability `P_hn`, and
/// `S = 10·log10(P_t / P_hn)` (±∞ when one side vanishes).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectivityReport {
    pub p_t: f64,
    pub p_hn: f64,
    pub s: f64,
    /// Most likely non-target outcome (lexicographically smallest on ties).
    pub argmax_hn: String,
}

pub fn selectivity_from(p_t: f64, p_hn: f64) -> f64 {
    if p_hn <= 0.0 {
        f64::INFINITY
    } else if p_t <= 0.0 {
        f64::NEG_INFINITY
    } else {
        10.0 * (p_t / p_hn).log10()
    }
}

pub fn selectivity(dist: &Distribution, target: &str) -> Result<SelectivityReport> {
    let t = parse_bitstring(target)
        .filter(|_| target.len() == dist.n_bits)
        .ok_or_else(|| LabError::Invalid(format!("target '{target}' does not fit {} bits", dist.n_bits)))?;
    if dist.probs.is_empty() {
        return Err(LabError::Invalid("empty distribution".into()));
    }
    let p_t = dist.probs[t];
    let mut best: Option<(usize, f64)> = None;
    // Ascending index order is lexicographic bitstring order, so strict `>`
    // keeps the smallest bitstring among ties.
    for (i, &p) in dist.probs.iter().enumerate() {
        if i != t && best.is_none_or(|(_, b)| p > b) {
            best = Some((i, p));
        }
    }
    let (argmax, p_hn) = best.unwrap_or((t, 0.0));
    Ok(SelectivityReport {
        p_t,
        p_hn,
        s: selectivity_from(p_t, p_hn),
        argmax_hn: bitstring(argmax, dist.n_bits),
    })
}

/// A Grover configuration with its transpiled circuit, reusable across
/// noise models.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: GroverConfig,
    pub circuit: Circuit,
    /// Algorithm name, or `custom` for configurations outside the six presets.
    pub label: String,
}

impl Experiment {
    pub fn new(config: GroverConfig) -> Result<Self> {
        let circuit = transpile_to_basis(&grover::build(&config)?);
        let label = Algorithm::ALL
            .into_iter()
            .find(|a| GroverConfig::for_algorithm(*a, config.n_qubits).with_target(&config.target) == config)
            .map_or_else(|| "custom".to_string(), |a| a.name().to_string());
        Ok(Self { config, circuit, label })
    }

    pub fn for_algorithm(algorithm: Algorithm, n_qubits: usize) -> Result<Self> {
        let config = GroverConfig::for_algorithm(algorithm, n_qubits);
        config.validate()?;
        Self::new(config)
    }

    pub fn resolve_backend(&self, backend: BackendChoice) -> BackendChoice {
        match backend {
            BackendChoice::Auto
                if self.config.n_qubits <= AUTO_EXACT_MAX_QUBITS
                    && self.circuit.n_qubits <= sim::MAX_DENSITY_QUBITS =>
            {
                BackendChoice::Density
            }
            BackendChoice::Auto => BackendChoice::Trajectory,
            other => other,
        }
    }

    /// Runs the circuit under `model`. The density backend returns exact
    /// probabilities; the trajectory backend samples `shots` trajectories,
    /// trajectory `i` drawing from stream `(seed, i)`.
    pub fn run(&self, model: &NoiseModel, shots: u64, backend: BackendChoice, seed: u64) -> Result<Distribution> {
        let program = attach_noise(&self.circuit, model)?.to_program()?;
        let n = self.config.n_qubits;
        let target = self.config.target.clone();
        match self.resolve_backend(backend) {
            BackendChoice::Density => {
                if program.n_qubits > sim::MAX_DENSITY_QUBITS {
                    return Err(SimError::Capacity(format!(
                        "{} qubits exceed the density backend limit of {}",
                        program.n_qubits,
                        sim::MAX_DENSITY_QUBITS
                    ))
                    .into());
                }
                let probs = DensityPlan::compile(&program)?.distribution();
                Ok(Distribution {
                    n_bits: n,
                    target,
                    shots: 0,
                    probs,
                })
            }
            _ => {
                if program.n_qubits > sim::MAX_VECTOR_QUBITS {
                    return Err(SimError::Capacity(format!("{} qubits", program.n_qubits)).into());
                }
                if shots == 0 {
                    return Err(LabError::Invalid("trajectory runs need at least one shot".into()));
                }
                let counts = TrajectoryPlan::compile(&program)?.counts(shots, seed);
                Ok(Distribution::from_counts(n, &target, &counts))
            }
        }
    }

    pub fn selectivity(&self, model: &NoiseModel, shots: u64, backend: BackendChoice, seed: u64) -> Result<f64> {
        let dist = self.run(model, shots, backend, seed)?;
        Ok(selectivity(&dist, &self.config.target)?.s)
    }
}

pub fn run_shots(
    config: &GroverConfig,
    model: &NoiseModel,
    shots: u64,
    backend: BackendChoice,
    seed: u64,
) -> Result<Distribution> {
    Experiment::new(config.clone())?.run(model, shots, backend, seed)
}
