use std::f64::consts::PI;

use grover_core::circuit::{transpile_to_basis, Circuit, Instruction};
use grover_core::grover::{self, Algorithm, GroverConfig};
use grover_core::lab::{BackendChoice, Experiment};
use grover_core::noise::{
    amplitude_damping_channel, attach_noise, depolarizing_channel, pauli_flip_channel, phase_damping_channel,
    thermal_relaxation_channel, ErrorKind, GateClass, NoiseFamily, NoiseModel, NoiseRule, NoisyOp, Pauli,
    ThermalParams,
};
use grover_core::sim::{CMatrix, KrausChannel};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn diag(a: f64, b: f64) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(a, 0.), c(0., 0.), c(0., 0.), c(b, 0.)])
}

fn plus() -> CMatrix {
    CMatrix::from_element(2, 2, c(0.5, 0.))
}

/// Completeness residual `‖Σ E†E − I‖`, computed independently.
fn residual(ch: &KrausChannel) -> f64 {
    let d = ch.operators()[0].nrows();
    let sum = ch
        .operators()
        .iter()
        .fold(CMatrix::zeros(d, d), |acc, e| acc + e.adjoint() * e);
    (sum - CMatrix::identity(d, d)).norm()
}

/// A random single-qubit density matrix from Bloch coordinates.
fn bloch_rho(r: f64, theta: f64, phi: f64) -> CMatrix {
    let (x, y, z) = (r * theta.sin() * phi.cos(), r * theta.sin() * phi.sin(), r * theta.cos());
    CMatrix::from_row_slice(2, 2, &[c((1. + z) / 2., 0.), c(x / 2., -y / 2.), c(x / 2., y / 2.), c((1. - z) / 2., 0.)])
}

fn rho_strategy() -> impl Strategy<Value = CMatrix> {
    (0.0..=1.0f64, 0.0..PI, 0.0..2.0 * PI).prop_map(|(r, t, p)| bloch_rho(r, t, p))
}

#[test]
fn bit_flip_half_on_zero() {
    let out = pauli_flip_channel(Pauli::X, 0.5).unwrap().apply_to(&diag(1., 0.));
    assert!((out - diag(0.5, 0.5)).norm() < 1e-12);
}

#[test]
fn phase_flip_fixes_zero() {
    for p in [0.0, 0.1, 0.5, 1.0] {
        let out = pauli_flip_channel(Pauli::Z, p).unwrap().apply_to(&diag(1., 0.));
        assert!((out - diag(1., 0.)).norm() < 1e-12);
    }
}

#[test]
fn bit_flip_zero_is_identity() {
    let ch = pauli_flip_channel(Pauli::X, 0.0).unwrap();
    let rho = bloch_rho(0.8, 1.0, 2.0);
    assert!((ch.apply_to(&rho) - rho).norm() < 1e-15);
}

#[test]
fn out_of_range_probabilities_rejected() {
    assert!(pauli_flip_channel(Pauli::Y, 1.2).is_err());
    assert!(depolarizing_channel(-0.1, 1).is_err());
    assert!(depolarizing_channel(0.1, 3).is_err());
    assert!(amplitude_damping_channel(f64::NAN).is_err());
    assert!(phase_damping_channel(2.0).is_err());
}

#[test]
fn depolarizing_examples() {
    let rho = bloch_rho(1.0, 0.4, 1.3);
    let out = depolarizing_channel(1.0, 1).unwrap().apply_to(&rho);
    assert!((out - diag(0.5, 0.5)).norm() < 1e-12);

    let out = depolarizing_channel(0.5, 1).unwrap().apply_to(&rho);
    let purity = (&out * &out).trace().re;
    assert!((purity - 0.625).abs() < 1e-12);

    let mut pure2 = CMatrix::zeros(4, 4);
    pure2[(1, 1)] = c(1., 0.);
    let out = depolarizing_channel(1.0, 2).unwrap().apply_to(&pure2);
    assert!((out - CMatrix::identity(4, 4) * c(0.25, 0.)).norm() < 1e-12);
}

#[test]
fn damping_examples() {
    let out = amplitude_damping_channel(1.0).unwrap().apply_to(&diag(0., 1.));
    assert!((out - diag(1., 0.)).norm() < 1e-12);

    let out = phase_damping_channel(0.19).unwrap().apply_to(&plus());
    assert!((out[(0, 1)].re - 0.45).abs() < 1e-12);
    assert!((out[(1, 0)].re - 0.45).abs() < 1e-12);

    let out = phase_damping_channel(0.6).unwrap().apply_to(&diag(0., 1.));
    assert!((out - diag(0., 1.)).norm() < 1e-12);
}

#[test]
fn thermal_examples() {
    let inf = thermal_relaxation_channel(ThermalParams::new(f64::INFINITY, f64::INFINITY, 300.0)).unwrap();
    let rho = bloch_rho(0.9, 1.1, 0.3);
    assert!((inf.apply_to(&rho) - rho).norm() < 1e-15);

    let ch = thermal_relaxation_channel(ThermalParams::new(100.0, 100.0, 100.0)).unwrap();
    let out = ch.apply_to(&diag(0., 1.));
    assert!((out[(1, 1)].re - (-0.001f64).exp()).abs() < 1e-12);
    assert!((out[(1, 1)].re - 0.9990).abs() < 1e-4);

    assert!(thermal_relaxation_channel(ThermalParams::new(50.0, 120.0, 100.0)).is_err());
    assert!(thermal_relaxation_channel(ThermalParams::new(0.0, 0.0, 100.0)).is_err());
}

#[test]
fn thermal_at_t2_equal_2t1_is_amplitude_damping() {
    for (t1, tg) in [(10.0, 50.0), (75.0, 300.0), (1000.0, 1000.0)] {
        let th = thermal_relaxation_channel(ThermalParams::new(t1, 2.0 * t1, tg)).unwrap();
        let ad = amplitude_damping_channel(1.0 - (-tg * 1e-3 / t1).exp()).unwrap();
        for rho in [bloch_rho(1.0, 0.3, 0.2), plus(), diag(0.2, 0.8)] {
            assert!((th.apply_to(&rho) - ad.apply_to(&rho)).norm() < 1e-10);
        }
    }
}

#[test]
fn fixed_points() {
    let mixed = diag(0.5, 0.5);
    assert!((depolarizing_channel(0.37, 1).unwrap().apply_to(&mixed) - &mixed).norm() < 1e-12);
    let ground = diag(1., 0.);
    assert!((amplitude_damping_channel(0.6).unwrap().apply_to(&ground) - &ground).norm() < 1e-12);
    let d = diag(0.3, 0.7);
    assert!((phase_damping_channel(0.8).unwrap().apply_to(&d) - &d).norm() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn every_family_is_complete(p in 0.0..=1.0f64, t1 in 1.0..1e4f64, frac in 0.01..=2.0f64, tg in 0.0..2000.0f64) {
        let channels = [
            pauli_flip_channel(Pauli::X, p).unwrap(),
            pauli_flip_channel(Pauli::Y, p).unwrap(),
            pauli_flip_channel(Pauli::Z, p).unwrap(),
            depolarizing_channel(p, 1).unwrap(),
            depolarizing_channel(p, 2).unwrap(),
            amplitude_damping_channel(p).unwrap(),
            phase_damping_channel(p).unwrap(),
            thermal_relaxation_channel(ThermalParams::new(t1, frac * t1, tg)).unwrap(),
        ];
        for ch in &channels {
            prop_assert!(residual(ch) < 1e-12, "{:?}", ch.label());
        }
    }

    #[test]
    fn closed_form_actions(p in 0.0..=1.0f64, rho in rho_strategy()) {
        let dep = depolarizing_channel(p, 1).unwrap().apply_to(&rho);
        let want = &rho * c(1.0 - p, 0.) + diag(p / 2.0, p / 2.0);
        prop_assert!((dep - want).norm() < 1e-10);

        let ad = amplitude_damping_channel(p).unwrap().apply_to(&rho);
        prop_assert!((ad[(0, 0)] - (rho[(0, 0)] + rho[(1, 1)] * p)).norm() < 1e-10);
        prop_assert!((ad[(1, 1)] - rho[(1, 1)] * (1.0 - p)).norm() < 1e-10);
        prop_assert!((ad[(0, 1)] - rho[(0, 1)] * (1.0 - p).sqrt()).norm() < 1e-10);

        let pd = phase_damping_channel(p).unwrap().apply_to(&rho);
        prop_assert!((pd[(1, 1)] - rho[(1, 1)]).norm() < 1e-10);
        prop_assert!((pd[(0, 1)] - rho[(0, 1)] * (1.0 - p).sqrt()).norm() < 1e-10);

        for sigma in [Pauli::X, Pauli::Y, Pauli::Z] {
            let s = match sigma {
                Pauli::X => CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
                Pauli::Y => CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
                Pauli::Z => diag(1., -1.),
            };
            let out = pauli_flip_channel(sigma, p).unwrap().apply_to(&rho);
            let want = &rho * c(1.0 - p, 0.) + &s * &rho * &s * c(p, 0.);
            prop_assert!((out - want).norm() < 1e-10);
        }
    }

    #[test]
    fn thermal_decay_rates(t1 in 1.0..1e4f64, frac in 0.01..=2.0f64, tg in 0.0..2000.0f64, rho in rho_strategy()) {
        let t2 = frac * t1;
        let out = thermal_relaxation_channel(ThermalParams::new(t1, t2, tg)).unwrap().apply_to(&rho);
        let t = tg * 1e-3;
        prop_assert!((out[(1, 1)] - rho[(1, 1)] * (-t / t1).exp()).norm() < 1e-10);
        prop_assert!((out[(0, 1)] - rho[(0, 1)] * (-t / t2).exp()).norm() < 1e-10);
        prop_assert!((out.trace() - c(1., 0.)).norm() < 1e-10);
    }
}

fn channel_targets(ops: &[NoisyOp]) -> Vec<Vec<usize>> {
    ops.iter()
        .filter_map(|op| match op {
            NoisyOp::Channel { qubits, .. } => Some(qubits.clone()),
            NoisyOp::Gate(_) => None,
        })
        .collect()
}

#[test]
fn one_qubit_scope_skips_cx() {
    let mut circ = Circuit::new(2, 0);
    circ.push(Instruction::u2(0.0, PI, 0)).unwrap();
    circ.push(Instruction::cx(0, 1)).unwrap();
    let rule = NoiseRule::everywhere(NoiseFamily::Bf { p: 0.1 }).with_gate_scope(&[GateClass::OneQubit]);
    let noisy = attach_noise(&circ, &NoiseModel::single(rule)).unwrap();
    assert_eq!(noisy.channel_count(), 1);
    assert!(matches!(noisy.ops[1], NoisyOp::Channel { .. }));
}

#[test]
fn two_qubit_scope_inserts_one_channel_per_qubit() {
    let mut circ = Circuit::new(2, 0);
    circ.push(Instruction::cx(0, 1)).unwrap();
    let rule = NoiseRule::everywhere(NoiseFamily::Dep { p: 0.1 }).with_gate_scope(&[GateClass::TwoQubit]);
    let noisy = attach_noise(&circ, &NoiseModel::single(rule)).unwrap();
    assert_eq!(channel_targets(&noisy.ops), vec![vec![0], vec![1]]);
}

#[test]
fn qubit_scope_only_touches_that_qubit() {
    let circ = transpile_to_basis(&grover::build(&GroverConfig::for_algorithm(Algorithm::Sga, 8)).unwrap());
    let rule = NoiseRule::everywhere(NoiseFamily::Pf { p: 0.01 }).on_qubits(&[3]);
    let noisy = attach_noise(&circ, &NoiseModel::single(rule)).unwrap();
    let touching: usize = circ
        .instructions
        .iter()
        .filter(|i| i.kind.is_unitary() && i.qubits.contains(&3))
        .count();
    assert!(touching > 0);
    assert_eq!(noisy.channel_count(), touching);
    let mut last_gate: Option<&Instruction> = None;
    for op in &noisy.ops {
        match op {
            NoisyOp::Gate(g) => last_gate = Some(g),
            NoisyOp::Channel { qubits, .. } => {
                assert_eq!(qubits, &vec![3]);
                assert!(last_gate.unwrap().qubits.contains(&3));
            }
        }
    }
}

#[test]
fn thermal_placement_and_durations() {
    let mut circ = Circuit::new(2, 2);
    circ.push(Instruction::u1(0.3, 0)).unwrap();
    circ.push(Instruction::u3(0.1, 0.2, 0.3, 1)).unwrap();
    circ.push(Instruction::cx(0, 1)).unwrap();
    circ.push(Instruction::reset(0)).unwrap();
    circ.push(Instruction::measure(1, 1)).unwrap();
    let noisy = attach_noise(&circ, &NoiseModel::thermal(50.0, 70.0)).unwrap();
    let layout: Vec<String> = noisy
        .ops
        .iter()
        .map(|op| match op {
            NoisyOp::Gate(g) => format!("{:?}", g.kind),
            NoisyOp::Channel { qubits, .. } => format!("T{}", qubits[0]),
        })
        .collect();
    assert_eq!(
        layout,
        ["U1", "U3", "T1", "Cx", "T0", "T1", "Reset", "T0", "T1", "Measure"]
    );
    // The CX channel decays the excited population by e^{-0.3 µs / T1}.
    let NoisyOp::Channel { channel, .. } = &noisy.ops[4] else { unreachable!() };
    let out = channel.apply_to(&diag(0., 1.));
    assert!((out[(1, 1)].re - (-0.3f64 / 50.0).exp()).abs() < 1e-12);
}

#[test]
fn attach_rejects_non_basis_circuits() {
    let mut circ = Circuit::new(1, 0);
    circ.push(Instruction::h(0)).unwrap();
    assert!(attach_noise(&circ, &NoiseModel::uniform(ErrorKind::Bf, 0.1).unwrap()).is_err());
}

#[test]
fn model_validation() {
    let two_thermal = NoiseModel {
        rules: vec![
            NoiseRule::everywhere(NoiseFamily::Thermal { t1_us: 10.0, t2_us: 10.0 }),
            NoiseRule::everywhere(NoiseFamily::Thermal { t1_us: 20.0, t2_us: 10.0 }),
        ],
    };
    assert!(two_thermal.validate().is_err());
    let on_measure = NoiseRule::everywhere(NoiseFamily::Bf { p: 0.1 }).with_gate_scope(&[GateClass::Measure]);
    assert!(on_measure.validate().is_err());
    assert!(NoiseRule::everywhere(NoiseFamily::Ad { p: 0.1 }).on_qubits(&[]).validate().is_err());
    assert!(NoiseRule::everywhere(NoiseFamily::Ad { p: 0.1 }).with_gate_scope(&[]).validate().is_err());
    assert!(NoiseModel::thermal(10.0, 30.0).validate().is_err());
    let mixed = NoiseModel {
        rules: vec![
            NoiseRule::everywhere(NoiseFamily::Dep { p: 0.01 }),
            NoiseRule::everywhere(NoiseFamily::Thermal { t1_us: 20.0, t2_us: 10.0 }),
        ],
    };
    assert!(mixed.validate().is_ok());
}

#[test]
fn model_json_round_trip() {
    let model = NoiseModel {
        rules: vec![
            NoiseRule::everywhere(NoiseFamily::Pd { p: 0.02 }).on_qubits(&[0, 2]),
            NoiseRule::everywhere(NoiseFamily::Thermal { t1_us: 80.0, t2_us: 60.0 }),
        ],
    };
    let text = serde_json::to_string(&model).unwrap();
    assert!(text.contains("\"family\":\"pd\""));
    assert!(text.contains("\"2q\""));
    let back: NoiseModel = serde_json::from_str(&text).unwrap();
    assert_eq!(back, model);
}

#[test]
fn error_kind_names_round_trip() {
    for kind in [ErrorKind::Bf, ErrorKind::Pf, ErrorKind::Dep, ErrorKind::Ad, ErrorKind::Pd, ErrorKind::Thermal] {
        assert_eq!(kind.name().parse::<ErrorKind>().unwrap(), kind);
    }
    assert!("xyz".parse::<ErrorKind>().is_err());
}

#[test]
fn selectivity_falls_as_noise_grows() {
    let exp = Experiment::for_algorithm(Algorithm::Sga, 3).unwrap();
    for kind in [ErrorKind::Bf, ErrorKind::Pf, ErrorKind::Dep, ErrorKind::Ad, ErrorKind::Pd] {
        let s: Vec<f64> = [1e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1]
            .iter()
            .map(|&p| {
                exp.selectivity(&NoiseModel::uniform(kind, p).unwrap(), 0, BackendChoice::Density, 0)
                    .unwrap()
            })
            .collect();
        assert!(s.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{kind}: {s:?}");
    }
}
