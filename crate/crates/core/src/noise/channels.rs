use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::sim::kraus::{ChannelLabel, KrausChannel};
use crate::sim::matrix::{self, CMatrix, ONE, ZERO};
use crate::sim::{Result, SimError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    fn digit(self) -> usize {
        match self {
            Pauli::X => 1,
            Pauli::Y => 2,
            Pauli::Z => 3,
        }
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(SimError::Validation(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `ρ → (1 − p) ρ + p σρσ`.
pub fn pauli_flip_channel(sigma: Pauli, p: f64) -> Result<KrausChannel> {
    check_probability(p)?;
    let label = match sigma {
        Pauli::X => ChannelLabel::BitFlip,
        Pauli::Y => ChannelLabel::BitphaseFlip,
        Pauli::Z => ChannelLabel::PhaseFlip,
    };
    KrausChannel::new(
        label,
        vec![
            matrix::identity(2) * real((1.0 - p).sqrt()),
            matrix::pauli(sigma.digit()) * real(p.sqrt()),
        ],
    )
}

/// `ρ → (1 − p) ρ + p I / 2^n` on one or two qubits, as a uniform Pauli
/// mixture.
pub fn depolarizing_channel(p: f64, n: usize) -> Result<KrausChannel> {
    check_probability(p)?;
    if !(1..=2).contains(&n) {
        return Err(SimError::Validation(format!("depolarizing channel on {n} qubits")));
    }
    let d2 = (1usize << (2 * n)) as f64;
    let ops = (0..1usize << (2 * n))
        .map(|i| {
            let w = if i == 0 { 1.0 - p * (d2 - 1.0) / d2 } else { p / d2 };
            matrix::pauli_string(i, n) * real(w.sqrt())
        })
        .collect();
    KrausChannel::new(ChannelLabel::Depolarizing, ops)
}

/// `E0 = diag(1, √(1−p))`, `E1 = √p |0⟩⟨1|`.
pub fn amplitude_damping_channel(p: f64) -> Result<KrausChannel> {
    check_probability(p)?;
    KrausChannel::new(
        ChannelLabel::AmplitudeDamping,
        vec![
            CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, real((1.0 - p).sqrt())]),
            CMatrix::from_row_slice(2, 2, &[ZERO, real(p.sqrt()), ZERO, ZERO]),
        ],
    )
}

/// `E0 = diag(1, √(1−p))`, `E1 = √p |1⟩⟨1|`.
pub fn phase_damping_channel(p: f64) -> Result<KrausChannel> {
    check_probability(p)?;
    KrausChannel::new(
        ChannelLabel::PhaseDamping,
        vec![
            CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, real((1.0 - p).sqrt())]),
            CMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, real(p.sqrt())]),
        ],
    )
}

/// Relaxation times in microseconds and an operation time in nanoseconds.
/// Infinite times mean no decay of that kind.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalParams {
    pub t1_us: f64,
    pub t2_us: f64,
    pub gate_time_ns: f64,
}

impl ThermalParams {
    pub fn new(t1_us: f64, t2_us: f64, gate_time_ns: f64) -> Self {
        Self {
            t1_us,
            t2_us,
            gate_time_ns,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t1_us.is_nan() || self.t2_us.is_nan() || self.t1_us <= 0.0 || self.t2_us <= 0.0 {
            return Err(SimError::Validation(format!(
                "relaxation times must be positive (T1 = {}, T2 = {})",
                self.t1_us, self.t2_us
            )));
        }
        if self.t2_us > 2.0 * self.t1_us {
            return Err(SimError::Validation(format!(
                "T2 = {} µs exceeds 2·T1 = {} µs",
                self.t2_us,
                2.0 * self.t1_us
            )));
        }
        if !self.gate_time_ns.is_finite() || self.gate_time_ns < 0.0 {
            return Err(SimError::Validation(format!("bad gate time {}", self.gate_time_ns)));
        }
        Ok(())
    }

    /// Amplitude-damping strength `1 − e^{−t/T1}`.
    pub fn gamma(&self) -> f64 {
        -(-self.gate_time_ns / (1e3 * self.t1_us)).exp_m1()
    }

    /// Pure-dephasing flip probability `(1 − e^{−t/Tφ}) / 2` with
    /// `1/Tφ = 1/T2 − 1/(2 T1)`.
    pub fn dephasing_probability(&self) -> f64 {
        let rate = 1.0 / self.t2_us - 0.5 / self.t1_us;
        if rate <= 0.0 {
            return 0.0;
        }
        -0.5 * (-self.gate_time_ns * rate / 1e3).exp_m1()
    }
}

/// Amplitude damping followed by pure dephasing, reproducing population
/// decay `e^{−t/T1}` and coherence decay `e^{−t/T2}`.
pub fn thermal_relaxation_channel(params: ThermalParams) -> Result<KrausChannel> {
    params.validate()?;
    let gamma = params.gamma();
    let p_phi = params.dephasing_probability();
    let mut channel = KrausChannel::identity(1);
    if gamma > 0.0 {
        channel = channel.then(&amplitude_damping_channel(gamma)?)?;
    }
    if p_phi > 0.0 {
        channel = channel.then(&pauli_flip_channel(Pauli::Z, p_phi)?)?;
    }
    Ok(channel.with_label(ChannelLabel::ThermalRelaxation))
}
