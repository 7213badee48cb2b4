//! End-to-end acceptance suite. Each test prints one `criterion N: PASS/FAIL`
//! line; a FAIL carries the measured values next to the reference targets.
//!
//! Reference targets marked "printed" are the published tables and readouts
//! this simulator is compared against; tolerances are stated inline.

use ndarray::Array1;
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use std::time::Instant;

use reacsim::circuit::{circuit_unitary, qft_circuit, run_circuit, step_circuit, Circuit, Gate};
use reacsim::cli::{cmd_eigen, max_state_discrepancy};
use reacsim::config::RunConfig;
use reacsim::control::{
    diagonalizing_rotation, grape_optimize, measure_overlap_via_populations, population_readout,
    pulse_propagator, ControlPulse, DensityMatrix, GradientMode, GrapeConfig, SpinSystem,
};
use reacsim::dynamics::{
    bare_hamiltonian_matrix, dft_matrix, exact_reference, lowest_eigenpairs, propagate,
    SplitPropagator,
};
use reacsim::encoding::{encode_state, expand_diagonal, reconstruct_diagonal};
use reacsim::linalg::{adjoint, expm_i_hermitian, max_abs_diff, norm_sqr, unitarity_deviation, C64, Mat, Vector};
use reacsim::model::{
    build_kinetic_diag, build_position_diag, build_potential_diag, fit_mass_to_kinetic, Grid,
    ReactionModel, Representation, AU_TIME_IN_FS, PROTON_MASS,
};

const V_PRINTED: [f64; 8] = [293.78, -0.10, 1.85, 5.41, 5.46, 2.02, 0.18, 305.44];
const T_PRINTED_MAG: [f64; 8] = [0.0, 0.91, 3.63, 8.16, 14.51, 8.16, 3.63, 0.91];
const Q_PRINTED: [f64; 8] = [-1.51, -1.08, -0.65, -0.22, 0.22, 0.65, 1.08, 1.51];
const PEAKS_PRINTED: [f64; 4] = [-0.047, -0.501, -0.114, -0.041];

fn defaults() -> (ReactionModel, Grid) {
    let model = ReactionModel::default();
    let grid = Grid::new(&model, 3);
    (model, grid)
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn random_state(dim: usize, rng: &mut ChaCha8Rng) -> Vector {
    let mut a: Vector = Array1::from_iter(
        (0..dim).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))),
    );
    let n = norm_sqr(&a).sqrt();
    a.mapv_inplace(|z| z / n);
    a
}

/// Criterion 1: the default model reproduces the printed operator tables —
/// V_diag and q_diag exactly at printed precision, T_diag magnitudes within
/// 1% with the fitted mass (itself within 1% of the proton-mass default).
#[test]
fn criterion_01_operator_tables() {
    let start = Instant::now();
    let (model, grid) = defaults();

    let v = build_potential_diag(&model, &grid);
    for (x, want) in v.values.iter().zip(V_PRINTED.iter()) {
        assert_eq!(
            round2(x * 1e3),
            *want,
            "criterion 1: FAIL — V_diag entry {x} does not print as {want}e-3"
        );
    }
    let q = build_position_diag(&grid);
    for (x, want) in q.values.iter().zip(Q_PRINTED.iter()) {
        assert_eq!(
            round2(*x),
            *want,
            "criterion 1: FAIL — q_diag entry {x} does not print as {want}"
        );
    }
    let printed_ha: Vec<f64> = T_PRINTED_MAG.iter().map(|x| x * 1e-3).collect();
    let fitted = fit_mass_to_kinetic(&grid, &printed_ha).unwrap();
    let fit_err = (fitted - PROTON_MASS).abs() / PROTON_MASS;
    assert!(
        fit_err < 0.01,
        "criterion 1: FAIL — fitted mass {fitted} deviates {fit_err:.3} from default"
    );
    let fit_model = ReactionModel {
        mass: fitted,
        ..model.clone()
    };
    let t = build_kinetic_diag(&fit_model, &grid).unwrap();
    for (x, want) in t.values.iter().zip(printed_ha.iter()).skip(1) {
        let rel = (x - want).abs() / want;
        assert!(
            rel < 0.01,
            "criterion 1: FAIL — T_diag entry {x} vs printed {want} (rel {rel:.4})"
        );
    }

    // the eigen command serves the same tables
    let report = cmd_eigen(&RunConfig::default()).unwrap().report;
    assert!(report.contains("index,q_diag,v_diag,t_diag"));

    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 1.0, "criterion 1: FAIL — runtime {dt:?}");
    println!(
        "criterion 1: PASS — printed tables reproduced; fitted mass {fitted:.2} ({:.2}% from default); {dt:?}",
        fit_err * 100.0
    );
}

/// Criterion 2: first excited state right-well probability 0.80 ± 0.05 on
/// the 8-point grid.
#[test]
fn criterion_02_eigenstructure() {
    let start = Instant::now();
    let (model, grid) = defaults();
    let pairs = lowest_eigenpairs(&model, &grid, 2).unwrap();
    let p1_right = pairs[1].state.right_probability();
    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 1.0, "criterion 2: FAIL — runtime {dt:?}");
    assert!(
        (p1_right - 0.80).abs() <= 0.05,
        "criterion 2: FAIL — first-excited right-well probability {p1_right:.4}, target 0.80 ± 0.05 \
         (the model pinned by the printed tables localizes 0.866 of the state on the right; \
         see the decisions ledger on the irreproducible reference values)"
    );
    println!("criterion 2: PASS — right-well probability {p1_right:.4}; {dt:?}");
}

/// Criterion 3: 25-step propagation from the ground state — product overlap
/// 0.77 ± 0.02 at t_f, reactant overlap 0.535 ± 0.005 at t_7, curves
/// monotone in trend and crossing once.
#[test]
fn criterion_03_reaction_dynamics() {
    let start = Instant::now();
    let (model, grid) = defaults();
    let pairs = lowest_eigenpairs(&model, &grid, 1).unwrap();
    let (snaps, _) = propagate(&model, &grid, &pairs[0].state).unwrap();
    let r7 = snaps[7].reactant_overlap;
    let p_final = snaps[25].product_overlap;

    let slope = |xs: &[f64]| -> f64 {
        let n = xs.len() as f64;
        let mean_t = (xs.len() - 1) as f64 / 2.0;
        let mean_x = xs.iter().sum::<f64>() / n;
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, x) in xs.iter().enumerate() {
            num += (i as f64 - mean_t) * (x - mean_x);
            den += (i as f64 - mean_t).powi(2);
        }
        num / den
    };
    let reactant: Vec<f64> = snaps.iter().map(|s| s.reactant_overlap).collect();
    let product: Vec<f64> = snaps.iter().map(|s| s.product_overlap).collect();
    let crossings = snaps
        .windows(2)
        .filter(|w| {
            (w[0].product_overlap > w[0].reactant_overlap)
                != (w[1].product_overlap > w[1].reactant_overlap)
        })
        .count();

    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 1.0, "criterion 3: FAIL — runtime {dt:?}");

    let ok = (p_final - 0.77).abs() <= 0.02
        && (r7 - 0.535).abs() <= 0.005
        && slope(&reactant) < 0.0
        && slope(&product) > 0.0
        && crossings == 1;
    assert!(
        ok,
        "criterion 3: FAIL — measured product(t_f) {p_final:.4} (target 0.77 ± 0.02), \
         reactant(t_7) {r7:.4} (target 0.535 ± 0.005), crossings {crossings} (target 1); \
         the step networks built from the printed tables give these values, the published \
         curve values are not reachable from them (see the decisions ledger)"
    );
    println!(
        "criterion 3: PASS — product(t_f) {p_final:.4}, reactant(t_7) {r7:.4}; {dt:?}"
    );
}

/// Criterion 4: the circuit route and the grid route agree — snapshot
/// overlaps within 1e-8 everywhere, per-step states within 1e-10 for 100
/// random initial states.
#[test]
fn criterion_04_route_equivalence() {
    let start = Instant::now();
    let cfg = RunConfig::default();
    let (model, grid) = defaults();

    // snapshot agreement from the ground state
    let pairs = lowest_eigenpairs(&model, &grid, 2).unwrap();
    let (grid_snaps, _) = propagate(&model, &grid, &pairs[0].state).unwrap();
    let ref0 = encode_state(&pairs[0].state).unwrap();
    let ref1 = encode_state(&pairs[1].state).unwrap();
    let mut state = encode_state(&pairs[0].state).unwrap();
    let mut worst_snapshot = 0.0f64;
    for (m, snap) in grid_snaps.iter().enumerate().skip(1) {
        let c = step_circuit(&model, &grid, m).unwrap();
        state = run_circuit(&c, &state).unwrap();
        let r = reacsim::linalg::inner(&ref0, &state).norm_sqr();
        let p = reacsim::linalg::inner(&ref1, &state).norm_sqr();
        worst_snapshot = worst_snapshot
            .max((r - snap.reactant_overlap).abs())
            .max((p - snap.product_overlap).abs());
    }
    assert!(
        worst_snapshot < 1e-8,
        "criterion 4: FAIL — snapshot discrepancy {worst_snapshot:e} exceeds 1e-8"
    );

    // per-step state agreement on random inputs
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_state = 0.0f64;
    for _ in 0..100 {
        let random = random_state(8, &mut rng);
        let d = max_state_discrepancy(&cfg, &random).unwrap();
        worst_state = worst_state.max(d);
    }
    assert!(
        worst_state < 1e-10,
        "criterion 4: FAIL — state discrepancy {worst_state:e} exceeds 1e-10"
    );

    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 5.0, "criterion 4: FAIL — runtime {dt:?}");
    println!(
        "criterion 4: PASS — snapshot diff {worst_snapshot:.2e}, state diff {worst_state:.2e}; {dt:?}"
    );
}

/// Criterion 5: the 3-qubit QFT network equals the DFT matrix to 1e-12 and
/// the H, S, T, SWAP gate matrices are exactly the printed ones.
#[test]
fn criterion_05_qft_and_gates() {
    let u = circuit_unitary(&qft_circuit(3)).unwrap();
    let f = dft_matrix(8);
    let qft_dev = max_abs_diff(&u, &f);
    assert!(
        qft_dev < 1e-12,
        "criterion 5: FAIL — QFT deviates {qft_dev:e} from the DFT matrix"
    );

    let single = |g: Gate, n: u32| -> Mat {
        let mut c = Circuit::new(n);
        c.push(g).unwrap();
        circuit_unitary(&c).unwrap()
    };
    let s2 = 1.0 / 2f64.sqrt();
    let h = single(Gate::Hadamard { target: 0 }, 1);
    let h_want = [[s2, s2], [s2, -s2]];
    for i in 0..2 {
        for j in 0..2 {
            assert!(
                (h[(i, j)] - C64::new(h_want[i][j], 0.0)).norm() < 1e-15,
                "criterion 5: FAIL — Hadamard entry ({i},{j})"
            );
        }
    }
    let s = single(Gate::PhaseS { target: 0 }, 1);
    assert!(
        (s[(1, 1)] - C64::new(0.0, 1.0)).norm() < 1e-15 && (s[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15,
        "criterion 5: FAIL — S matrix"
    );
    let t = single(Gate::PhaseT { target: 0 }, 1);
    assert!(
        (t[(1, 1)] - C64::from_polar(1.0, std::f64::consts::PI / 4.0)).norm() < 1e-15,
        "criterion 5: FAIL — T matrix"
    );
    let swap = single(Gate::Swap { a: 0, b: 1 }, 2);
    let swap_want = [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ];
    for i in 0..4 {
        for j in 0..4 {
            assert!(
                (swap[(i, j)] - C64::new(swap_want[i][j], 0.0)).norm() < 1e-15,
                "criterion 5: FAIL — SWAP entry ({i},{j})"
            );
        }
    }
    println!("criterion 5: PASS — QFT deviation {qft_dev:.2e}, gate matrices exact");
}

/// Criterion 6: the local error of one split step against the dense midpoint
/// matrix-exponential shrinks by ≥ 3.5x per halving of δt once the step is
/// inside the asymptotic regime (the wall phases keep the first halving from
/// δt = 62 a.u. out of it; the sequence is printed).
#[test]
fn criterion_06_split_error_order() {
    let start = Instant::now();
    let (model, grid) = defaults();
    let pairs = lowest_eigenpairs(&model, &grid, 1).unwrap();
    let phi0 = &pairs[0].state;
    let h0 = bare_hamiltonian_matrix(&model, &grid).unwrap();
    let q = build_position_diag(&grid);

    let v = build_potential_diag(&model, &grid);
    let t = build_kinetic_diag(&model, &grid).unwrap();
    let f = dft_matrix(8);
    let fd = adjoint(&f);

    // one split step of size dt_au with the field frozen at the interval
    // midpoint, against the dense exponential of the same midpoint H
    let err_at = |dt_au: f64| -> f64 {
        let dt_fs = dt_au * AU_TIME_IN_FS;
        let eps = reacsim::model::field_at(&model, dt_fs / 2.0).unwrap();
        let mut psi = phi0.amplitudes.clone();
        let laser: Vec<C64> = q
            .values
            .iter()
            .map(|&x| C64::from_polar(1.0, x * eps * dt_au / 2.0))
            .collect();
        for (x, &vv) in psi.iter_mut().zip(v.values.iter()) {
            *x *= C64::from_polar(1.0, -vv * dt_au / 2.0);
        }
        for (x, l) in psi.iter_mut().zip(laser.iter()) {
            *x *= l;
        }
        let mut mom = f.dot(&psi);
        for (x, &tt) in mom.iter_mut().zip(t.values.iter()) {
            *x *= C64::from_polar(1.0, -tt * dt_au);
        }
        let mut stepped = fd.dot(&mom);
        for (x, l) in stepped.iter_mut().zip(laser.iter()) {
            *x *= l;
        }
        for (x, &vv) in stepped.iter_mut().zip(v.values.iter()) {
            *x *= C64::from_polar(1.0, -vv * dt_au / 2.0);
        }
        let mut hm = h0.clone();
        for k in 0..8 {
            hm[(k, k)] -= C64::new(q.values[k] * eps, 0.0);
        }
        let exact = expm_i_hermitian(&hm, dt_au).dot(&phi0.amplitudes);
        stepped
            .iter()
            .zip(exact.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };

    let dt0 = ReactionModel::default().dt_au();
    let errors: Vec<f64> = (0..6).map(|k| err_at(dt0 / (1 << k) as f64)).collect();
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    let tail_ok = ratios[ratios.len() - 1] >= 3.5 && ratios[ratios.len() - 2] >= 3.5;
    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 5.0, "criterion 6: FAIL — runtime {dt:?}");
    assert!(
        tail_ok,
        "criterion 6: FAIL — halving ratios {ratios:?} do not reach 3.5"
    );
    println!(
        "criterion 6: PASS — local-error halving ratios {:?} (third order reached); {dt:?}",
        ratios.iter().map(|r| (r * 100.0).round() / 100.0).collect::<Vec<_>>()
    );
}

/// Criterion 7: GRAPE synthesis — the accumulated 7-step network reaches
/// fidelity > 0.99 with 750 segments over 15 ms; a single-spin π/2 target
/// reaches > 0.999; the analytic gradient matches finite differences to
/// relative 1e-5.
#[test]
fn criterion_07_grape_synthesis() {
    let start = Instant::now();
    let cfg = RunConfig::default();

    // gradient check first (cheap)
    let sys = SpinSystem::default();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let nseg = 6;
    let duration = 1.2e-3;
    let amplitudes: Vec<Vec<f64>> = (0..nseg)
        .map(|_| (0..6).map(|_| rng.random_range(-2e3..2e3)).collect())
        .collect();
    let target_pulse = ControlPulse {
        duration_s: duration,
        amplitudes: (0..nseg)
            .map(|_| (0..6).map(|_| rng.random_range(-2e3..2e3)).collect())
            .collect(),
    };
    let target_small = pulse_propagator(&sys, &target_pulse).unwrap();
    let grad_cfg = GrapeConfig {
        segment_count: nseg,
        duration_s: duration,
        gradient: GradientMode::Exact,
        parallel: false,
        ..Default::default()
    };
    let (_, grad) =
        reacsim::control::fidelity_and_gradient(&sys, &target_small, &amplitudes, &grad_cfg);
    let h = 0.05; // Hz
    for (j, k) in [(0usize, 0usize), (2, 3), (5, 5)] {
        let mut up = amplitudes.clone();
        up[j][k] += h;
        let mut dn = amplitudes.clone();
        dn[j][k] -= h;
        let fd = (reacsim::control::mean_fidelity(&sys, &target_small, &up, &grad_cfg)
            - reacsim::control::mean_fidelity(&sys, &target_small, &dn, &grad_cfg))
            / (2.0 * h);
        let an = grad[j][k];
        let rel = (an - fd).abs() / fd.abs().max(1e-12);
        assert!(
            rel < 1e-5,
            "criterion 7: FAIL — gradient at ({j},{k}): analytic {an}, finite difference {fd}, rel {rel:e}"
        );
    }

    // single-spin π/2
    let single = SpinSystem::single_spin();
    let c = (std::f64::consts::PI / 4.0).cos();
    let s = (std::f64::consts::PI / 4.0).sin();
    let half_pi_x = ndarray::Array2::from_shape_vec(
        (2, 2),
        vec![
            C64::new(c, 0.0),
            C64::new(0.0, -s),
            C64::new(0.0, -s),
            C64::new(c, 0.0),
        ],
    )
    .unwrap();
    let single_cfg = GrapeConfig {
        segment_count: 100,
        duration_s: 1e-3,
        fidelity_goal: 0.999,
        iteration_cap: 400,
        seed: 5,
        ..Default::default()
    };
    let single_out = grape_optimize(&single, &half_pi_x, &single_cfg).unwrap();
    assert!(
        single_out.final_fidelity > 0.999,
        "criterion 7: FAIL — single-spin fidelity {}",
        single_out.final_fidelity
    );

    // the accumulated 7-step network
    let target = reacsim::cli::accumulated_target(&cfg, 7).unwrap();
    let big_cfg = GrapeConfig {
        segment_count: 750,
        duration_s: 15e-3,
        fidelity_goal: 0.99,
        iteration_cap: 1000,
        seed: 0,
        ..Default::default()
    };
    let out = grape_optimize(&SpinSystem::default(), &target, &big_cfg).unwrap();
    assert!(
        out.final_fidelity > 0.99,
        "criterion 7: FAIL — U(t_7,0) fidelity {} after {} iterations",
        out.final_fidelity,
        out.iterations
    );
    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 120.0, "criterion 7: FAIL — runtime {dt:?}");
    println!(
        "criterion 7: PASS — U(t_7,0) fidelity {:.6} in {} iterations, single-spin {:.6}; {dt:?}",
        out.final_fidelity, out.iterations, single_out.final_fidelity
    );
}

/// Criterion 8: the population measurement route equals direct overlaps to
/// 1e-12 on 1000 random 3-qubit pairs, and the t_7 peak differences equal
/// the printed values ± 0.002.
#[test]
fn criterion_08_measurement_scheme() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let psi = random_state(8, &mut rng);
        let phi = random_state(8, &mut rng);
        let via = measure_overlap_via_populations(&psi, &phi).unwrap();
        let direct = reacsim::linalg::inner(&phi, &psi).norm_sqr();
        worst = worst.max((via - direct).abs());
    }
    assert!(
        worst < 1e-12,
        "criterion 8: FAIL — population route deviates {worst:e} from direct overlaps"
    );

    // t_7 peak differences
    let (model, grid) = defaults();
    let pairs = lowest_eigenpairs(&model, &grid, 1).unwrap();
    let prop = SplitPropagator::new(&model, &grid).unwrap();
    let mut psi = pairs[0].state.clone();
    for m in 1..=7 {
        psi = prop.step(&psi, m).unwrap();
    }
    let sv0 = encode_state(&pairs[0].state).unwrap();
    let sv7 = encode_state(&psi).unwrap();
    let r = diagonalizing_rotation(&DensityMatrix::pure(&sv0).unwrap());
    let rotated = r
        .dot(&DensityMatrix::pure(&sv7).unwrap().matrix)
        .dot(&adjoint(&r));
    let (_, peaks) = population_readout(&DensityMatrix::new(rotated).unwrap()).unwrap();
    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 5.0, "criterion 8: FAIL — runtime {dt:?}");

    let peaks_ok = peaks
        .iter()
        .zip(PEAKS_PRINTED.iter())
        .all(|(got, want)| (got - want).abs() <= 0.002);
    assert!(
        peaks_ok,
        "criterion 8: FAIL — population/direct identity holds ({worst:.2e} on 1000 pairs) but \
         t_7 peak differences {peaks:?} miss the printed values {PEAKS_PRINTED:?} ± 0.002; \
         the t_7 state of the printed step networks cannot produce them (see the decisions ledger)"
    );
    println!("criterion 8: PASS — identity {worst:.2e}, peaks {peaks:?}; {dt:?}");
}

/// Criterion 9: property suites — norm conservation over all steps, unitarity
/// of gates and pulse propagators, expansion round trips, snapshot sums.
#[test]
fn criterion_09_property_suites() {
    let (model, grid) = defaults();

    // norm conservation across all 25 steps
    let pairs = lowest_eigenpairs(&model, &grid, 1).unwrap();
    let prop = SplitPropagator::new(&model, &grid).unwrap();
    let mut psi = pairs[0].state.clone();
    for m in 1..=model.step_count {
        psi = prop.step(&psi, m).unwrap();
        let drift = (psi.norm_sqr() - 1.0).abs();
        assert!(
            drift < 1e-12,
            "criterion 9: FAIL — norm drift {drift:e} at step {m}"
        );
    }

    // unitarity: every gate of a step network and random pulse propagators
    let c = step_circuit(&model, &grid, 3).unwrap();
    for g in &c.gates {
        let mut single = Circuit::new(3);
        single.push(g.clone()).unwrap();
        let dev = unitarity_deviation(&circuit_unitary(&single).unwrap());
        assert!(dev < 1e-10, "criterion 9: FAIL — gate deviation {dev:e}");
    }
    let sys = SpinSystem::default();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..5 {
        let pulse = ControlPulse {
            duration_s: 2e-3,
            amplitudes: (0..30)
                .map(|_| (0..6).map(|_| rng.random_range(-8e3..8e3)).collect())
                .collect(),
        };
        let dev = unitarity_deviation(&pulse_propagator(&sys, &pulse).unwrap());
        assert!(dev < 1e-10, "criterion 9: FAIL — propagator deviation {dev:e}");
    }

    // Pauli-z expansion round trip on random diagonals up to n = 5
    for n in 1u32..=5 {
        for _ in 0..20 {
            let values: Vec<f64> = (0..1usize << n)
                .map(|_| rng.random_range(-3.0..3.0))
                .collect();
            let diag = reacsim::model::DiagonalOperator {
                values: values.clone(),
                representation: Representation::Position,
            };
            let rec = reconstruct_diagonal(&expand_diagonal(&diag, n).unwrap());
            for (a, b) in rec.values.iter().zip(values.iter()) {
                assert!(
                    (a - b).abs() < 1e-12,
                    "criterion 9: FAIL — expansion round trip at n={n}"
                );
            }
        }
    }

    // snapshot overlap sums
    let (snaps, _) = propagate(&model, &grid, &pairs[0].state).unwrap();
    for s in &snaps {
        assert!(
            s.reactant_overlap + s.product_overlap <= 1.0 + 1e-9,
            "criterion 9: FAIL — overlap sum exceeds one at step {}",
            s.step_index
        );
    }
    println!("criterion 9: PASS — norms, unitarity, round trips, overlap sums");
}

/// Criterion 10: the 64-point reference run — product population rises to
/// dominance within the pulse and step-halving moves the final populations by
/// less than 1e-3.
#[test]
fn criterion_10_fine_grid_reference() {
    let start = Instant::now();
    let model = ReactionModel::default();
    let grid = Grid::new(&model, 6);
    let snaps = exact_reference(&model, &grid).unwrap();
    let final_r = snaps.last().unwrap().reactant_overlap;
    let final_p = snaps.last().unwrap().product_overlap;

    let halved = ReactionModel {
        step_count: 50,
        ..model.clone()
    };
    let snaps_halved = exact_reference(&halved, &grid).unwrap();
    let dr = (snaps_halved.last().unwrap().reactant_overlap - final_r).abs();
    let dp = (snaps_halved.last().unwrap().product_overlap - final_p).abs();

    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 2.0, "criterion 10: FAIL — runtime {dt:?}");

    let dominance = final_p > final_r && final_p > 0.5;
    let converged = dr < 1e-3 && dp < 1e-3;
    assert!(
        dominance && converged,
        "criterion 10: FAIL — final reactant {final_r:.4}, product {final_p:.4} \
         (dominance {dominance}); step-halving shifts ({dr:.4}, {dp:.4}) vs < 1e-3 \
         (converged {converged}); the 25-step split with the wall-scaled potential is far \
         from its asymptotic regime (see the decisions ledger)"
    );
    println!(
        "criterion 10: PASS — product {final_p:.4} dominant, halving shift ({dr:.1e}, {dp:.1e}); {dt:?}"
    );
}
