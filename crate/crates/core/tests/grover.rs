use grover_core::circuit::{circuit_metrics, circuit_unitary, transpile_to_basis, Circuit};
use grover_core::grover::{
    build, build_diffusion, build_oracle, default_m1_schedule, default_m2_schedule, ideal_success_probability,
    optimal_iterations, simulated_success_probability, Algorithm, GroverConfig, Iteration, MctMode, OracleScope,
    Stage, StageSchedule,
};
use grover_core::sim::exec::pure_distribution;
use grover_core::sim::matrix::distance_up_to_phase;
use grover_core::sim::{CMatrix, Op, Program};
use num_complex::Complex64;

fn closed_form(n: usize, k: usize) -> f64 {
    let theta = (2f64.powi(n as i32)).sqrt().recip().asin();
    ((2 * k + 1) as f64 * theta).sin().powi(2)
}

fn diag_with_minus(dim: usize, marked: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |r, c| match (r == c, r == marked) {
        (true, true) => Complex64::new(-1., 0.),
        (true, false) => Complex64::new(1., 0.),
        _ => Complex64::new(0., 0.),
    })
}

/// `2|s⟩⟨s| − I` on `m` qubits.
fn reflection(m: usize) -> CMatrix {
    let dim = 1usize << m;
    CMatrix::from_fn(dim, dim, |r, c| {
        Complex64::new(2.0 / dim as f64 - if r == c { 1.0 } else { 0.0 }, 0.0)
    })
}

fn success(config: &GroverConfig) -> f64 {
    let c = transpile_to_basis(&build(config).unwrap());
    pure_distribution(&c.to_program().unwrap()).unwrap()[config.target_index()]
}

fn data_distribution(config: &GroverConfig) -> Vec<f64> {
    let c = transpile_to_basis(&build(config).unwrap());
    pure_distribution(&c.to_program().unwrap()).unwrap()
}

#[test]
fn optimal_iteration_examples() {
    assert_eq!(optimal_iterations(2), 1);
    assert_eq!(optimal_iterations(4), 3);
    assert_eq!(optimal_iterations(10), 25);
    assert_eq!(optimal_iterations(1), 1);
    for n in 2..=14 {
        let theta = 2f64.powf(-(n as f64) / 2.0).asin();
        assert_eq!(optimal_iterations(n), (std::f64::consts::PI / (4.0 * theta)).floor() as usize);
    }
}

#[test]
fn oracle_examples() {
    let z = circuit_unitary(&build_oracle(1, "1", MctMode::Noancilla).unwrap()).unwrap();
    assert!((z - diag_with_minus(2, 1)).norm() < 1e-12);
    let u = circuit_unitary(&build_oracle(3, "111", MctMode::Noancilla).unwrap()).unwrap();
    assert!((u - diag_with_minus(8, 7)).norm() < 1e-12);
    let u = circuit_unitary(&build_oracle(3, "101", MctMode::Noancilla).unwrap()).unwrap();
    assert!((u - diag_with_minus(8, 5)).norm() < 1e-12);
    assert!(build_oracle(3, "", MctMode::Noancilla).is_err());
    assert!(build_oracle(3, "10", MctMode::Noancilla).is_err());
}

#[test]
fn transpiled_oracles_are_involutions() {
    for n in 2..=5 {
        for target in ["0".repeat(n), "1".repeat(n), "10".repeat(n)[..n].to_string()] {
            let oracle = build_oracle(n, &target, MctMode::Noancilla).unwrap();
            let mut twice = oracle.clone();
            twice.append(&oracle).unwrap();
            let u = circuit_unitary(&transpile_to_basis(&twice)).unwrap();
            let id = CMatrix::identity(1 << n, 1 << n);
            assert!(distance_up_to_phase(&u, &id) < 1e-10, "n={n} {target}");

            let marked = usize::from_str_radix(&target, 2).unwrap();
            let single = circuit_unitary(&transpile_to_basis(&oracle)).unwrap();
            assert!(distance_up_to_phase(&single, &diag_with_minus(1 << n, marked)) < 1e-9);
        }
    }
}

#[test]
fn diffusion_examples() {
    let d = circuit_unitary(&build_diffusion(2, &[0, 1]).unwrap()).unwrap();
    assert!(distance_up_to_phase(&d, &reflection(2)) < 1e-12);

    // Scope {q1}: qubit 1 is the high bit, so the oracle is R ⊗ I.
    let d = circuit_unitary(&build_diffusion(2, &[1]).unwrap()).unwrap();
    let r = reflection(1);
    let want = CMatrix::from_fn(4, 4, |row, col| {
        if row & 1 == col & 1 {
            r[(row >> 1, col >> 1)]
        } else {
            Complex64::new(0., 0.)
        }
    });
    assert!(distance_up_to_phase(&d, &want) < 1e-12);
    assert!(build_diffusion(2, &[]).is_err());
    assert!(build_diffusion(2, &[2]).is_err());
}

#[test]
fn diffusion_reflects_and_fixes_uniform_state() {
    for n in 1..=5 {
        let d = circuit_unitary(&transpile_to_basis(&build_diffusion(n, &(0..n).collect::<Vec<_>>()).unwrap()))
            .unwrap();
        let dim = 1usize << n;
        assert!(distance_up_to_phase(&(&d * &d), &CMatrix::identity(dim, dim)) < 1e-10);
        assert!(distance_up_to_phase(&d, &reflection(n)) < 1e-9);
    }
}

#[test]
fn standard_grover_success() {
    let two = GroverConfig::standard(2, MctMode::Noancilla);
    assert!((success(&two) - 1.0).abs() < 1e-9);
    assert!((ideal_success_probability(&two).unwrap() - 1.0).abs() < 1e-12);
    for n in 3..=7 {
        let cfg = GroverConfig::standard(n, MctMode::Noancilla);
        let want = closed_form(n, optimal_iterations(n));
        assert!((success(&cfg) - want).abs() < 1e-9, "n={n}");
    }
    let four = GroverConfig::standard(4, MctMode::Noancilla);
    assert!((success(&four) - 0.9613).abs() < 1e-4);
    let three = GroverConfig::standard(3, MctMode::Noancilla);
    assert!((ideal_success_probability(&three).unwrap() - 0.9453).abs() < 1e-4);
}

#[test]
fn arbitrary_targets_are_found() {
    for target in ["000", "101", "010", "0110"] {
        let n = target.len();
        for mode in [MctMode::Noancilla, MctMode::OneAncilla] {
            let cfg = GroverConfig::standard(n, mode).with_target(target);
            let want = closed_form(n, optimal_iterations(n));
            assert!((success(&cfg) - want).abs() < 1e-9, "{target} {mode:?}");
        }
    }
}

#[test]
fn sgaa_gate_count_ratio_at_four_qubits() {
    let count = |a| {
        let c = transpile_to_basis(&build(&GroverConfig::for_algorithm(a, 4)).unwrap());
        circuit_metrics(&c).unwrap().total_gates as f64
    };
    let ratio = count(Algorithm::Sgaa) / count(Algorithm::Sga);
    assert!(ratio > 0.6 && ratio < 1.0, "{ratio}");
}

#[test]
fn one_stage_all_global_schedule_is_sga() {
    for n in [3, 5] {
        let schedule = StageSchedule::single(n, vec![Iteration::standard(); optimal_iterations(n)]);
        let m = build(&GroverConfig::modified(n, MctMode::Noancilla, schedule)).unwrap();
        let s = build(&GroverConfig::standard(n, MctMode::Noancilla)).unwrap();
        assert_eq!(m.instructions, s.instructions);
    }
}

fn two_stage(n: usize, split: usize) -> StageSchedule {
    let stage = |block: Vec<usize>, measure_after| {
        let k = optimal_iterations(block.len());
        Stage {
            iterations: vec![
                Iteration {
                    oracle: OracleScope::Block,
                    diffusion: grover_core::grover::DiffusionScope::Local(block.clone()),
                };
                k
            ],
            block,
            measure_after,
        }
    };
    StageSchedule {
        stages: vec![stage((0..split).collect(), true), stage((split..n).collect(), false)],
    }
}

#[test]
fn two_stage_two_by_two_is_exact() {
    for mode in [MctMode::Noancilla, MctMode::OneAncilla] {
        let cfg = GroverConfig::modified(4, mode, two_stage(4, 2));
        assert!((success(&cfg) - 1.0).abs() < 1e-9);
        let cfg = cfg.with_target("1001");
        assert!((success(&cfg) - 1.0).abs() < 1e-9);
    }
}

#[test]
fn two_stage_success_is_product_of_stage_successes() {
    // Blocks of 3 and 2 qubits: each stage is an independent standard search.
    let cfg = GroverConfig::modified(5, MctMode::Noancilla, two_stage(5, 3));
    let want = closed_form(3, optimal_iterations(3)) * closed_form(2, optimal_iterations(2));
    assert!((success(&cfg) - want).abs() < 1e-9);
}

#[test]
fn default_modified_schedules_succeed() {
    let m2 = GroverConfig::for_algorithm(Algorithm::M2ga, 6);
    assert!(ideal_success_probability(&m2).unwrap() > 0.5);
    let m2 = GroverConfig::for_algorithm(Algorithm::M2ga, 4);
    assert!((ideal_success_probability(&m2).unwrap() - 1.0).abs() < 1e-9);
    for n in 4..=7 {
        let m1 = GroverConfig::for_algorithm(Algorithm::M1ga, n);
        assert!(ideal_success_probability(&m1).unwrap() > 0.5, "n={n}");
        assert!(default_m1_schedule(n).validate(n).is_ok());
        assert!(default_m2_schedule(n).validate(n).is_ok());
    }
}

#[test]
fn schedules_must_partition_the_register() {
    let overlap = StageSchedule {
        stages: vec![
            Stage {
                block: vec![0, 1],
                iterations: vec![Iteration::standard()],
                measure_after: true,
            },
            Stage {
                block: vec![1, 2],
                iterations: vec![Iteration::standard()],
                measure_after: false,
            },
        ],
    };
    assert!(build(&GroverConfig::modified(3, MctMode::Noancilla, overlap)).is_err());
    let missing = StageSchedule {
        stages: vec![Stage {
            block: vec![0, 1],
            iterations: vec![Iteration::standard()],
            measure_after: false,
        }],
    };
    assert!(build(&GroverConfig::modified(3, MctMode::Noancilla, missing)).is_err());
    let unmeasured = StageSchedule {
        stages: vec![
            Stage {
                block: vec![0],
                iterations: vec![Iteration::standard()],
                measure_after: false,
            },
            Stage {
                block: vec![1, 2],
                iterations: vec![Iteration::standard()],
                measure_after: false,
            },
        ],
    };
    assert!(build(&GroverConfig::modified(3, MctMode::Noancilla, unmeasured)).is_err());
}

/// Noiseless probability that the ancilla reads 1 at the end of the circuit.
fn ancilla_excitation(config: &GroverConfig) -> f64 {
    let c = transpile_to_basis(&build(config).unwrap());
    let base = c.to_program().unwrap();
    let anc = config.ancilla().unwrap();
    let mut program = Program::new(base.n_qubits, base.n_clbits + 1);
    program.ops = base.ops;
    program.push(Op::Measure {
        qubit: anc,
        clbit: base.n_clbits,
    });
    let dist = pure_distribution(&program).unwrap();
    dist.iter().enumerate().filter(|(i, _)| i >> base.n_clbits & 1 == 1).map(|(_, p)| p).sum()
}

#[test]
fn ancilla_returns_to_zero() {
    for alg in [Algorithm::Sgaa, Algorithm::M1gaa, Algorithm::M2gaa] {
        for n in 3..=6 {
            let cfg = GroverConfig::for_algorithm(alg, n);
            assert!(ancilla_excitation(&cfg) < 1e-8, "{alg} n={n}");
        }
    }
}

#[test]
fn sga_and_sgaa_distributions_agree() {
    for n in 4..=8 {
        let a = data_distribution(&GroverConfig::for_algorithm(Algorithm::Sga, n));
        let b = data_distribution(&GroverConfig::for_algorithm(Algorithm::Sgaa, n));
        let worst = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-8, "n={n}: {worst}");
    }
}

#[test]
fn ancilla_variants_are_shallower() {
    for n in [6, 8, 10] {
        let depth = |a| {
            let c: Circuit = transpile_to_basis(&build(&GroverConfig::for_algorithm(a, n)).unwrap());
            circuit_metrics(&c).unwrap().depth
        };
        assert!(depth(Algorithm::Sgaa) < depth(Algorithm::Sga), "n={n}");
        assert!(depth(Algorithm::M1gaa) < depth(Algorithm::M1ga), "n={n}");
        assert!(depth(Algorithm::M2gaa) < depth(Algorithm::M2ga), "n={n}");
    }
}

#[test]
fn ideal_success_matches_simulation_for_standard_variant() {
    for n in 2..=6 {
        let cfg = GroverConfig::for_algorithm(Algorithm::Sgaa, n);
        let closed = ideal_success_probability(&cfg).unwrap();
        assert!((simulated_success_probability(&cfg).unwrap() - closed).abs() < 1e-9);
    }
}

#[test]
fn algorithm_names_parse() {
    for a in Algorithm::ALL {
        assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        assert_eq!(a.to_string().to_lowercase().parse::<Algorithm>().unwrap(), a);
    }
    assert!("grover".parse::<Algorithm>().is_err());
}
