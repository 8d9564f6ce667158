mod common;

use std::collections::BTreeMap;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use qmacc_core::amplify::*;
use qmacc_core::protocol::toys;
use qmacc_core::protocol::*;
use qmacc_core::qcore::circuit::Gate;
use qmacc_core::qcore::linalg::{outer, re};
use qmacc_core::qcore::random::{random_density, random_pure, random_unitary};
use qmacc_core::qcore::*;
use qmacc_core::seeding;
use qmacc_core::tails;

fn witness_basis_projector(dim: usize, j: usize) -> Mat {
    let mut e = Vector::zeros(dim);
    e[j] = re(1.0);
    outer(&e)
}

#[test]
fn inner_repetitions_for_w2_match_exact_tail() {
    let exact = common::min_odd_majority_exact(1, 3, 8000);
    assert_eq!(min_inner_repetitions(1.0 / 3.0, 1.0 / 8000.0), Some(exact as usize));
    assert_eq!(exact, 115);
}

#[test]
fn inner_target_for_w3() {
    assert_abs_diff_eq!(inner_error_target(3), 1.0 / 27000.0, epsilon = 1e-18);
}

#[test]
fn degenerate_single_repetition_rejected() {
    let req = PlanRequest { c_ell: Some(0.5), ..PlanRequest::new(1, 2) };
    assert!(matches!(plan_amplification(req), Err(qmacc_core::Error::PlanRejected(_))));
}

#[test]
fn default_plan_meets_every_target() {
    let plan = plan_amplification(PlanRequest::new(1, 2)).unwrap();
    assert!(plan.is_valid());
    assert!(plan.ell % 2 == 1 && plan.u % 2 == 1);
    assert_eq!(plan.big_w, 2 * plan.ell);
    assert_eq!(plan.big_a, plan.ell * plan.u);
    let exact_inner = common::to_f64(&common::binomial_tail_exact(plan.ell as u64, 1, 3, plan.ell as u64 / 2 + 1));
    assert!(exact_inner <= 1.0 / 8000.0);
    assert!(plan.u as f64 * exact_inner.sqrt() < 1.0 / 3.0);
    assert!(plan.ln_soundness_bound <= -(plan.big_w as f64) * 5f64.ln());
}

#[test]
fn plan_serializes() {
    let plan = plan_amplification(PlanRequest::new(1, 3)).unwrap();
    let back: AmplificationPlan = serde_json::from_str(&serde_json::to_string(&plan).unwrap()).unwrap();
    assert_eq!(plan, back);
}

#[test]
fn single_copy_inner_layer_is_identity() {
    let p = toys::coin_toy();
    let q = build_inner(&p, 1).unwrap();
    for x in 0..2 {
        let a = induced_witness_operator(&p, x, 0).unwrap();
        let b = induced_witness_operator(&q, x, 0).unwrap();
        assert!((a - b).camax() < 1e-9);
    }
}

#[test]
fn five_copy_inner_layer_on_coin_toy() {
    let p = toys::coin_toy();
    let q = build_inner(&p, 5).unwrap();
    // honest product witness |1⟩^⊗5 on a yes-instance
    let honest = witness_basis_projector(32, 31);
    assert_abs_diff_eq!(acceptance_for_witness(&q, 1, 0, &honest).unwrap(), 192.0 / 243.0, epsilon = 1e-9);
    // no-instance optimum over all (entangled) witnesses, independent eigen oracle
    let w = induced_witness_operator(&q, 0, 0).unwrap();
    let top = *common::jacobi_eigenvalues(&w).last().unwrap();
    assert_abs_diff_eq!(top, 51.0 / 243.0, epsilon = 1e-9);
    let (l, _) = optimal_witness(&q, 0, 0).unwrap();
    assert_abs_diff_eq!(l, top, epsilon = 1e-9);
}

#[test]
fn inner_layer_on_random_verifier_is_majority_tail() {
    let mut rng = seeding::rng(5);
    let n = 3;
    let b = ProtocolBuilder::new(0, 1, 1, 1);
    let acc = b.ancilla(0);
    let p = b
        .gate(Gate::custom((0..n).collect(), random_unitary(&mut rng, 8)).unwrap())
        .unwrap()
        .build(AliceEncoder::Table(BTreeMap::from([(0, random_pure(&mut rng, 2))])), acc)
        .unwrap();
    let (base, _) = optimal_witness(&p, 0, 0).unwrap();
    let q = build_inner(&p, 3).unwrap();
    let (l, _) = optimal_witness(&q, 0, 0).unwrap();
    let tail = base.powi(3) + 3.0 * base.powi(2) * (1.0 - base);
    assert_abs_diff_eq!(l, tail, epsilon = 1e-9);
    let plan = AmplificationPlan::manual(1, 1, 1.0 / 3.0, 3, 1).unwrap();
    let r = amplified_acceptance(&p, &plan, 0, 0).unwrap();
    assert_abs_diff_eq!(r.inner_lambda, l, epsilon = 1e-9);
}

#[test]
fn single_invocation_outer_layer_is_identity() {
    let inner = build_inner(&toys::coin_toy(), 3).unwrap();
    let outer = build_outer(&inner, 1).unwrap();
    for x in 0..2 {
        let a = induced_witness_operator(&inner, x, 0).unwrap();
        let b = induced_witness_operator(&outer, x, 0).unwrap();
        assert!((a - b).camax() < 1e-9);
    }
}

#[test]
fn outer_circuit_matches_history_simulation() {
    let mut rng = seeding::rng(6);
    let inner = build_inner(&toys::coin_toy(), 3).unwrap();
    let outer = build_outer(&inner, 3).unwrap();
    for x in 0..2 {
        let ins = inner_instrument(&inner, x, 0).unwrap();
        let w = induced_witness_operator(&outer, x, 0).unwrap();
        for _ in 0..3 {
            let rho = random_density(&mut rng, 8, 2);
            let (hist, _) = outer_acceptance_by_histories(&ins, 3, &rho);
            let dense = (&w * &rho).trace().re;
            assert_abs_diff_eq!(hist, dense, epsilon = 1e-9);
        }
    }
}

#[test]
fn outer_freshness_on_no_instance() {
    let inner = build_inner(&toys::coin_toy(), 3).unwrap();
    let ins = inner_instrument(&inner, 0, 0).unwrap();
    let (eps, _) = optimal_witness(&inner, 0, 0).unwrap();
    assert_abs_diff_eq!(eps, 7.0 / 27.0, epsilon = 1e-9);
    let mut rng = seeding::rng(7);
    for _ in 0..20 {
        let rank = 1 + rng_rank(&mut rng);
        let rho = random_density(&mut rng, 8, rank);
        let (_, worst) = outer_acceptance_by_histories(&ins, 5, &rho);
        assert!(worst <= eps + 1e-9, "conditional {worst} above {eps}");
    }
}

fn rng_rank(rng: &mut seeding::Rng) -> usize {
    use rand::Rng;
    rng.gen_range(0..8)
}

#[test]
fn outer_completeness_within_union_bound() {
    let inner = build_inner(&toys::coin_toy(), 5).unwrap();
    let (l, v) = optimal_witness(&inner, 1, 0).unwrap();
    let eps = 1.0 - l;
    let ins = inner_instrument(&inner, 1, 0).unwrap();
    for u in [1, 3, 5] {
        let (acc, _) = outer_acceptance_by_histories(&ins, u, &v.to_density().into_matrix());
        assert!(1.0 - acc <= u as f64 * eps.sqrt() + 1e-9);
    }
}

#[test]
fn outer_rejects_when_inner_never_accepts() {
    let outer = build_outer(&build_inner(&toys::always_reject(1), 3).unwrap(), 3).unwrap();
    let (l, _) = optimal_witness(&outer, 0, 0).unwrap();
    assert!(l.abs() < 1e-12);
}

#[test]
fn classical_readout_outer_is_majority_tail() {
    let inner = build_inner(&toys::coin_toy(), 1).unwrap();
    let outer = build_outer(&inner, 3).unwrap();
    for x in 0..2 {
        let (li, _) = optimal_witness(&inner, x, 0).unwrap();
        let (lo, _) = optimal_witness(&outer, x, 0).unwrap();
        assert_abs_diff_eq!(lo, tails::majority_tail(3, li), epsilon = 1e-9);
    }
}

#[test]
fn bob_input_must_be_read_only() {
    let b = ProtocolBuilder::new(1, 0, 1, 1);
    let (y, acc) = (b.bob(0), b.ancilla(0));
    let p = b.gate(Gate::x(y)).unwrap().build(AliceEncoder::Basis, acc).unwrap();
    assert!(build_inner(&p, 3).is_err());
}

#[test]
fn padded_coin_toy_audit_meets_targets() {
    let p = pad_witness(&toys::coin_toy(), 1).unwrap();
    let plan = plan_amplification(PlanRequest::new(1, 2)).unwrap();
    let audit = audit_amplification(&p, &toys::coin_function(), &plan).unwrap();
    assert!(audit.soundness_pass && audit.completeness_pass);
    assert!(audit.records.iter().all(|r| r.exact));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn amplified_circuits_stay_unitary(seed in any::<u64>(), ell in 1usize..4, u in 1usize..3) {
        let mut rng = seeding::rng(seed);
        let b = ProtocolBuilder::new(0, 1, 1, 1);
        let acc = b.ancilla(0);
        let p = b
            .gate(Gate::custom(vec![0, 1, 2], random_unitary(&mut rng, 8)).unwrap())
            .unwrap()
            .build(AliceEncoder::Table(BTreeMap::from([(0, random_pure(&mut rng, 2))])), acc)
            .unwrap();
        let outer = build_outer(&build_inner(&p, ell).unwrap(), u).unwrap();
        prop_assert!(outer.circuit().validate().is_ok());
        prop_assert!(outer.accept_qubit() < outer.n_qubits());
        let (l, _) = optimal_witness(&outer, 0, 0).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&l));
    }
}
