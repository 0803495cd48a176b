use serde::{Deserialize, Serialize};

use super::error::{Result, SimError};
use super::matrix::{self, CMatrix};

/// Completeness tolerance for Kraus operator sets.
pub const COMPLETENESS_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelLabel {
    BitFlip,
    PhaseFlip,
    BitphaseFlip,
    Depolarizing,
    AmplitudeDamping,
    PhaseDamping,
    ThermalRelaxation,
    Custom,
}

/// A completely positive trace-preserving map given by Kraus operators
/// `{E_i}` with `Σ E_i† E_i = I`, acting on one or two qubits.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    arity: usize,
    operators: Vec<CMatrix>,
    label: ChannelLabel,
}

impl KrausChannel {
    pub fn new(label: ChannelLabel, operators: Vec<CMatrix>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| SimError::Validation("Kraus channel needs at least one operator".into()))?;
        let arity = matrix::qubit_arity(first)
            .ok_or_else(|| SimError::Validation("Kraus operator must be 2^k × 2^k".into()))?;
        if arity == 0 || arity > 2 {
            return Err(SimError::Validation(format!(
                "Kraus channels act on 1 or 2 qubits, got {arity}"
            )));
        }
        if operators.iter().any(|e| e.shape() != first.shape()) {
            return Err(SimError::Validation("Kraus operators differ in shape".into()));
        }
        let channel = Self {
            arity,
            operators,
            label,
        };
        let err = channel.completeness_error();
        if err > COMPLETENESS_TOL {
            return Err(SimError::Validation(format!(
                "Kraus completeness violated by {err:.3e}"
            )));
        }
        Ok(channel)
    }

    pub fn identity(arity: usize) -> Self {
        Self {
            arity,
            operators: vec![matrix::identity(1 << arity)],
            label: ChannelLabel::Custom,
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn label(&self) -> ChannelLabel {
        self.label
    }

    pub fn with_label(mut self, label: ChannelLabel) -> Self {
        self.label = label;
        self
    }

    /// Frobenius norm of `Σ E_i† E_i − I`.
    pub fn completeness_error(&self) -> f64 {
        let dim = 1 << self.arity;
        let mut sum = CMatrix::zeros(dim, dim);
        for e in &self.operators {
            sum += e.adjoint() * e;
        }
        matrix::frobenius_distance(&sum, &matrix::identity(dim))
    }

    /// Sequential composition: `self` first, then `next`.
    pub fn then(&self, next: &KrausChannel) -> Result<KrausChannel> {
        if self.arity != next.arity {
            return Err(SimError::Validation("cannot compose channels of different arity".into()));
        }
        let operators = next
            .operators
            .iter()
            .flat_map(|f| self.operators.iter().map(move |e| f * e))
            .filter(|m| m.iter().any(|z| z.norm_sqr() > 0.0))
            .collect::<Vec<_>>();
        let operators = if operators.is_empty() {
            vec![CMatrix::zeros(1 << self.arity, 1 << self.arity)]
        } else {
            operators
        };
        Ok(KrausChannel {
            arity: self.arity,
            operators,
            label: self.label,
        })
    }

    /// Applies the channel to a `2^k × 2^k` density matrix.
    pub fn apply_to(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
        for e in &self.operators {
            out += e * rho * e.adjoint();
        }
        out
    }

    /// Pauli-transfer matrix of the channel (row-major `4^k × 4^k`).
    pub fn pauli_transfer(&self) -> Vec<f64> {
        matrix::pauli_transfer(&self.operators, self.arity)
    }

    /// When every operator is proportional to a unitary, returns the branch
    /// probabilities and normalized unitaries.
    pub fn mixed_unitary(&self) -> Option<(Vec<f64>, Vec<CMatrix>)> {
        let dim = 1 << self.arity;
        let mut probs = Vec::with_capacity(self.operators.len());
        let mut unitaries = Vec::with_capacity(self.operators.len());
        for e in &self.operators {
            let gram = e.adjoint() * e;
            let p = gram[(0, 0)].re;
            let scaled = matrix::identity(dim) * num_complex::Complex64::new(p, 0.0);
            if matrix::frobenius_distance(&gram, &scaled) > 1e-12 {
                return None;
            }
            probs.push(p);
            unitaries.push(if p > 0.0 { e / num_complex::Complex64::new(p.sqrt(), 0.0) } else { e.clone() });
        }
        Some((probs, unitaries))
    }
}
