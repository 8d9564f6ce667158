mod common;

use std::collections::BTreeMap;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use qmacc_core::amplify::{pad_witness, AmplificationPlan};
use qmacc_core::demerlin::*;
use qmacc_core::protocol::toys;
use qmacc_core::protocol::*;
use qmacc_core::qcore::circuit::Gate;
use qmacc_core::qcore::linalg::{outer, trace};
use qmacc_core::qcore::random::{random_pure, random_unitary};
use qmacc_core::qcore::*;
use qmacc_core::seeding;
use rand::Rng;

fn plan(p: &OneWayQmaProtocol, ell: usize, u: usize) -> AmplificationPlan {
    let s = p.sizes();
    AmplificationPlan::manual(s.advice, s.witness, 1.0 / 3.0, ell, u).unwrap()
}

fn rac2_loop() -> DemerlinizedProtocol {
    let p = toys::rac2();
    demerlinize(&p, &plan(&p, 1, 1)).unwrap()
}

fn random_loop(seed: u64) -> DemerlinizedProtocol {
    let mut rng = seeding::rng(seed);
    let b = ProtocolBuilder::new(0, 1, 1, 1);
    let acc = b.ancilla(0);
    let p = b
        .gate(Gate::custom(vec![0, 1, 2], random_unitary(&mut rng, 8)).unwrap())
        .unwrap()
        .build(AliceEncoder::Table(BTreeMap::from([(0, random_pure(&mut rng, 2))])), acc)
        .unwrap();
    demerlinize(&p, &plan(&p, 1, 1)).unwrap()
}

#[test]
fn round_counts() {
    let p = toys::accept_on_witness_one();
    let d1 = demerlinize(&p, &plan(&p, 1, 1)).unwrap();
    assert_eq!((d1.t_rounds(), d1.counter_qubits().len()), (18, 5));
    let q = pad_witness(&p, 1).unwrap();
    let d2 = demerlinize(&q, &plan(&q, 1, 1)).unwrap();
    assert_eq!(d2.t_rounds(), 36);
}

#[test]
fn half_accepting_witnesses_give_geometric_acceptance() {
    let p = toys::accept_on_witness_one();
    let d = demerlinize(&p, &plan(&p, 1, 1)).unwrap();
    assert_abs_diff_eq!(evaluate_demerlinized(&d, 0, 0).unwrap(), 1.0 - 0.5f64.powi(18), epsilon = 1e-12);
}

#[test]
fn rejecting_base_gives_zero() {
    let p = toys::always_reject(1);
    let d = demerlinize(&p, &plan(&p, 1, 1)).unwrap();
    assert_abs_diff_eq!(evaluate_demerlinized(&d, 0, 0).unwrap(), 0.0, epsilon = 1e-12);
}

#[test]
fn mismatched_plan_rejected() {
    let p = toys::rac2();
    let wrong = AmplificationPlan::manual(1, 1, 1.0 / 3.0, 1, 1).unwrap();
    assert!(demerlinize(&p, &wrong).is_err());
}

#[test]
fn rac2_loop_separates_every_instance() {
    let d = rac2_loop();
    let a = audit_demerlinized(&d, &toys::rac2_function()).unwrap();
    assert!(a.precondition.holds, "{:?}", a.precondition);
    assert!(a.pass());
    assert!(a.p_accept_yes_min >= 1.0 / 9.0);
    assert!(a.gap >= 1.0 / 9.0, "gap {}", a.gap);
    assert!(a.no_bound_vacuous);
    let pp = threshold_post_pass(a.p_accept_yes_min, a.p_accept_no_max, 101).unwrap();
    assert!(pp.yes_accept >= 2.0 / 3.0 && pp.no_accept <= 1.0 / 3.0);
}

/// The unrolled circuit, replayed by the reference interpreter, must leave
/// the counter at zero with exactly the probability given by the product of
/// the round instruments' reject operators.
#[test]
fn replayed_circuit_matches_instrument_product() {
    let d = rac2_loop();
    let q = d.amplified();
    let n = d.n_qubits();
    let extra = n - q.n_qubits();
    let mut rng = seeding::rng(3);
    for (x, y) in [(0b1010u64, 1u64), (0b0110, 2), (0b1111, 3)] {
        let coins: Vec<u64> = (0..d.t_rounds()).map(|_| rng.gen_range(0..2)).collect();
        let c = d.unrolled(&coins).unwrap();
        let mut state: Vec<C64> = vec![C64::new(0.0, 0.0); 1 << n];
        let input = q.input_state(y, &q.encode(x).unwrap(), 0).unwrap();
        for (i, a) in input.iter().enumerate() {
            state[i << extra] = *a;
        }
        common::replay(c.gates(), n, &mut state);
        let counter_mask = (1usize << (extra - 1)) - 1;
        let p_zero: f64 = state.iter().enumerate().filter(|(i, _)| i & counter_mask == 0).map(|(_, a)| a.norm_sqr()).sum();
        // witness, ancillas and flag are back to |0⟩ in every branch
        let s = q.sizes();
        let dirty = ((1usize << (s.witness + s.ancilla)) - 1) << extra | 1usize << (extra - 1);
        let leak: f64 = state.iter().enumerate().filter(|(i, _)| i & dirty != 0).map(|(_, a)| a.norm_sqr()).sum();
        assert!(leak < 1e-12);

        let mut rho = outer(&q.encode(x).unwrap());
        for &z in &coins {
            rho = d.round_instrument(y, z as usize).unwrap().apply(0, &rho);
        }
        assert_abs_diff_eq!(p_zero, trace(&rho).re, epsilon = 1e-10);
    }
}

#[test]
fn monte_carlo_agrees_on_rac2() {
    let d = rac2_loop();
    for (x, y) in [(0b1000u64, 0u64), (0b1000, 1)] {
        let exact = evaluate_demerlinized(&d, x, y).unwrap();
        let (est, se) = monte_carlo(&d, x, y, 100_000, 17).unwrap();
        assert!((est - exact).abs() <= 3.0 * se, "({x},{y}): {est} ± {se} vs {exact}");
    }
}

#[test]
fn monte_carlo_agrees_on_non_classical_verifier() {
    let d = random_loop(21);
    let exact = evaluate_demerlinized(&d, 0, 0).unwrap();
    let (est, se) = monte_carlo(&d, 0, 0, 100_000, 5).unwrap();
    assert!((est - exact).abs() <= 3.0 * se.max(1e-5), "{est} ± {se} vs {exact}");
}

#[test]
fn monte_carlo_is_seed_deterministic() {
    let d = rac2_loop();
    assert_eq!(monte_carlo(&d, 3, 1, 2000, 9).unwrap(), monte_carlo(&d, 3, 1, 2000, 9).unwrap());
}

#[test]
fn damage_stays_within_composed_gentle_bound() {
    for d in [rac2_loop(), random_loop(8), random_loop(9)] {
        let pairs: Vec<(u64, u64)> = if d.amplified().sizes().bob_input > 0 { vec![(0b1001, 0), (0b0110, 3)] } else { vec![(0, 0)] };
        for (x, y) in pairs {
            for s in damage_trajectory(&d, x, y).unwrap() {
                if s.damage.is_finite() {
                    assert!(s.damage <= s.bound + 1e-9, "t={} damage {} bound {}", s.t, s.damage, s.bound);
                }
            }
        }
    }
}

#[test]
fn first_round_damage_matches_good_as_new_on_joint_measurement() {
    // for a classical-readout verifier each coin gives a PSD reject operator;
    // with the coin held in a register the round is one measurement
    let d = rac2_loop();
    let (x, y) = (0b1100, 2);
    let ins: Vec<_> = (0..2).map(|z| d.round_instrument(y, z).unwrap()).collect();
    let rho = outer(&d.amplified().encode(x).unwrap());
    let mut joint_reject = Mat::zeros(8, 8);
    for (z, i) in ins.iter().enumerate() {
        let e = i.effect(0);
        for r in 0..4 {
            for c in 0..4 {
                joint_reject[(z * 4 + r, z * 4 + c)] = e[(r, c)];
            }
        }
    }
    let accept = Mat::identity(8, 8) - joint_reject;
    let m = TwoOutcomeMeasurement::new(accept).unwrap();
    let mixed_coin = Mat::identity(2, 2).unscale(2.0);
    let joint = DensityMatrix::new(qmacc_core::qcore::linalg::kron(&mixed_coin, &rho), Layout::single("j", 3)).unwrap();
    let gan = qmacc_core::qlemmas::good_as_new_check(&joint, &m).unwrap();
    let step = &damage_trajectory(&d, x, y).unwrap()[1];
    assert_abs_diff_eq!(step.round_accept, gan.epsilon, epsilon = 1e-12);
    assert!(step.damage <= gan.bound + 1e-12);
}

#[test]
fn degenerate_plan_resources() {
    let p = toys::rac2();
    let d = rac2_loop();
    let r = resource_report(&d);
    assert_eq!(r.rounds, 18);
    assert_eq!(r.qubits, p.n_qubits() + 5 + 1);
    let inc = qmacc_core::qcore::circuit::increment(d.counter_qubits(), &[d.flag_qubit()]).len();
    assert_eq!(r.gates_per_round, 2 * p.circuit().gate_count() + 2 + inc);
    assert_eq!(r.gates, 18 * r.gates_per_round as u128);
}

#[test]
fn gates_grow_linearly_in_outer_count() {
    let p = toys::accept_on_witness_one();
    let g: Vec<u128> = [9, 11, 13].iter().map(|&u| resource_report(&demerlinize(&p, &plan(&p, 1, u)).unwrap()).gates).collect();
    assert_eq!(g[1] - g[0], g[2] - g[1]);
}

#[test]
fn report_has_cli_fields() {
    let d = rac2_loop();
    let a = audit_demerlinized(&d, &toys::rac2_function()).unwrap();
    let v = serde_json::to_value(DemerlinReport::new(&a, &resource_report(&d))).unwrap();
    for k in ["W", "T", "p_accept_yes_min", "p_accept_no_max", "gates", "qubits", "bounds"] {
        assert!(v.get(k).is_some(), "missing {k}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn acceptance_is_a_probability_and_monotone_in_rounds(seed in any::<u64>()) {
        let d = random_loop(seed);
        let steps = damage_trajectory(&d, 0, 0).unwrap();
        for w in steps.windows(2) {
            prop_assert!(w[1].survival <= w[0].survival + 1e-12);
        }
        let p = evaluate_demerlinized(&d, 0, 0).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!((1.0 - steps.last().unwrap().survival - p).abs() < 1e-12);
    }
}
