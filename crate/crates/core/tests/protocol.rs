use std::collections::BTreeMap;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use qmacc_core::protocol::toys;
use qmacc_core::protocol::*;
use qmacc_core::qcore::circuit::Gate;
use qmacc_core::qcore::linalg::{identity, re, trace};
use qmacc_core::qcore::random::{random_density, random_pure, random_unitary};
use qmacc_core::qcore::*;
use qmacc_core::seeding::{self, Rng};

/// A verifier with one advice qubit, `w` witness qubits and one ancilla whose
/// whole circuit is a single Haar-random unitary. Returns the protocol and
/// that unitary so tests can simulate it without the circuit machinery.
fn random_verifier(rng: &mut Rng, w: usize) -> (OneWayQmaProtocol, Mat, Vector) {
    let n = 2 + w;
    let u = random_unitary(rng, 1 << n);
    let advice = random_pure(rng, 2);
    let b = ProtocolBuilder::new(0, 1, w, 1);
    let acc = b.ancilla(0);
    let p = b
        .gate(Gate::custom((0..n).collect(), u.clone()).unwrap())
        .unwrap()
        .build(AliceEncoder::Table(BTreeMap::from([(0, advice.clone())])), acc)
        .unwrap();
    (p, u, advice)
}

/// Acceptance of `|advice⟩|φ⟩|0⟩` under `u`, accept = last qubit.
fn simulate(u: &Mat, advice: &Vector, phi: &Vector) -> f64 {
    let anc = Vector::from_vec(vec![re(1.0), re(0.0)]);
    let out = u * advice.kronecker(phi).kronecker(&anc);
    out.iter().enumerate().filter(|(i, _)| i & 1 == 1).map(|(_, z)| z.norm_sqr()).sum()
}

#[test]
fn witness_independent_operator_is_scaled_identity() {
    let p = toys::witness_independent(0.4);
    let w = induced_witness_operator(&p, 0, 0).unwrap();
    assert!((w - identity(2) * re(0.4)).camax() < 1e-12);
    let (l, _) = optimal_witness(&p, 0, 0).unwrap();
    assert_abs_diff_eq!(l, 0.4, epsilon = 1e-12);
}

#[test]
fn accept_on_one_operator_is_projector() {
    let p = toys::accept_on_witness_one();
    let w = induced_witness_operator(&p, 0, 0).unwrap();
    assert_abs_diff_eq!(w[(1, 1)].re, 1.0, epsilon = 1e-12);
    assert!(w[(0, 0)].norm() + w[(0, 1)].norm() < 1e-12);
    let (l, v) = optimal_witness(&p, 0, 0).unwrap();
    assert_abs_diff_eq!(l, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(v.amplitudes()[1].norm(), 1.0, epsilon = 1e-12);
}

#[test]
fn operator_matches_direct_simulation_on_50_witnesses() {
    let mut rng = seeding::rng(50);
    let (p, u, advice) = random_verifier(&mut rng, 1);
    let w = induced_witness_operator(&p, 0, 0).unwrap();
    for _ in 0..50 {
        let phi = random_pure(&mut rng, 2);
        let via_op = (phi.adjoint() * &w * &phi)[(0, 0)].re;
        assert_abs_diff_eq!(via_op, simulate(&u, &advice, &phi), epsilon = 1e-9);
    }
}

/// Random search over pure witnesses with 10^4 evaluations: Haar draws for
/// the first tenth, then random perturbations of the incumbent with a
/// shrinking step. Every candidate is a genuine witness, so the result is a
/// lower-bound certificate for λ.
fn random_search(rng: &mut Rng, u: &Mat, advice: &Vector, dim: usize) -> f64 {
    let mut best_v = random_pure(rng, dim);
    let mut best = simulate(u, advice, &best_v);
    for k in 0..10_000 {
        let cand = if k < 1000 {
            random_pure(rng, dim)
        } else {
            let step = 0.3 * (1.0 - k as f64 / 10_000.0) + 1e-3;
            let noise = random_pure(rng, dim) * re(step);
            let v = &best_v + noise;
            let n = v.norm();
            v.unscale(n)
        };
        let val = simulate(u, advice, &cand);
        if val > best {
            best = val;
            best_v = cand;
        }
    }
    best
}

#[test]
fn optimum_dominates_random_search() {
    let mut rng = seeding::rng(51);
    let (p, u, advice) = random_verifier(&mut rng, 2);
    let (l, _) = optimal_witness(&p, 0, 0).unwrap();
    let best = random_search(&mut rng, &u, &advice, 4);
    assert!(best <= l + 1e-9);
    assert!(l - best < 1e-3, "λ = {l}, search = {best}");
}

#[test]
fn always_reject_passes_on_constant_zero() {
    let p = toys::always_reject(1);
    let f = CommunicationFunction::from_fn(0, 0, |_, _| Some(false)).unwrap();
    let a = audit_protocol(&p, &f).unwrap();
    assert!(a.pass);
}

#[test]
fn basis_rac_passes_with_extreme_lambdas() {
    let a = audit_protocol(&toys::rac_basis(), &toys::index_function(2, 1)).unwrap();
    assert!(a.pass);
    assert_eq!(a.records.len(), 8);
    for r in &a.records {
        let want = if r.f { 1.0 } else { 0.0 };
        assert_abs_diff_eq!(r.lambda, want, epsilon = 1e-12);
    }
}

#[test]
fn perturbed_rac_reports_the_single_violation() {
    let a = audit_protocol(&toys::rac_basis_perturbed(), &toys::index_function(2, 1)).unwrap();
    assert!(!a.pass);
    let v: Vec<_> = a.violations().map(|r| (r.x, r.y)).collect();
    assert_eq!(v, vec![(0b10, 1)]);
}

#[test]
fn witness_free_audit_is_plain_success_condition() {
    // with no witness register λ is just the acceptance probability
    let p = toys::rac_basis();
    let f = toys::index_function(2, 1);
    let c = p.circuit();
    for (x, i, fv) in f.entries() {
        // layout: bob | a0 a1 | acc
        let out = c.run_basis(((i as usize) << 3) | ((x as usize) << 1)).unwrap();
        let acc: f64 = out.iter().enumerate().filter(|(k, _)| k & 1 == 1).map(|(_, z)| z.norm_sqr()).sum();
        let (l, _) = optimal_witness(&p, x, i).unwrap();
        assert_abs_diff_eq!(l, acc, epsilon = 1e-12);
        assert_eq!(verdict(fv, acc), if fv { Verdict::Complete } else { Verdict::Sound });
    }
}

#[test]
fn missing_encoding_is_an_error() {
    let f = CommunicationFunction::from_fn(2, 0, |_, _| Some(true)).unwrap();
    assert!(audit_protocol(&toys::coin_toy(), &f).is_err());
}

#[test]
fn rac2_separates_by_qrac_angles() {
    let a = audit_protocol(&toys::rac2(), &toys::rac2_function()).unwrap();
    assert!(a.pass);
    let c2 = (std::f64::consts::PI / 8.0).cos().powi(2);
    assert_abs_diff_eq!(a.min_yes().unwrap(), c2, epsilon = 1e-9);
    assert_abs_diff_eq!(a.max_no().unwrap(), 1.0 - c2, epsilon = 1e-9);
}

#[test]
fn json_round_trip_preserves_operators() {
    for p in [toys::coin_toy(), toys::rac2(), toys::rac_basis()] {
        let q = OneWayQmaProtocol::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(p.sizes(), q.sizes());
        let x = p.alice().domain(p.sizes().advice)[0];
        let a = induced_witness_operator(&p, x, 0).unwrap();
        let b = induced_witness_operator(&q, x, 0).unwrap();
        assert!((a - b).camax() < 1e-12);
    }
}

#[test]
fn json_rejects_unknown_register() {
    let s = toys::coin_toy().to_json().unwrap().replace("\"witness\"", "\"merlin\"");
    assert!(OneWayQmaProtocol::from_json(&s).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn lambda_in_unit_interval_and_witness_rotation_invariant(seed in any::<u64>(), w in 1usize..3) {
        let mut rng = seeding::rng(seed);
        let (p, _, _) = random_verifier(&mut rng, w);
        let (l, _) = optimal_witness(&p, 0, 0).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&l));
        // rotate the witness first; the optimum is unchanged
        let v = random_unitary(&mut rng, 1 << w);
        let s = p.sizes();
        let mut c = UnitaryCircuit::new(s.total());
        c.push(Gate::custom(p.witness_qubits().collect(), v).unwrap()).unwrap();
        c.extend(p.circuit().gates().iter().cloned()).unwrap();
        let q = OneWayQmaProtocol::new(s, p.alice().clone(), c, p.accept_qubit()).unwrap();
        let (lq, _) = optimal_witness(&q, 0, 0).unwrap();
        prop_assert!((l - lq).abs() < 1e-9);
    }

    #[test]
    fn mixed_witnesses_never_beat_lambda(seed in any::<u64>()) {
        let mut rng = seeding::rng(seed);
        let (p, _, _) = random_verifier(&mut rng, 2);
        let (l, _) = optimal_witness(&p, 0, 0).unwrap();
        for _ in 0..100 {
            let rho = random_density(&mut rng, 4, 1 + (seed % 4) as usize);
            let acc = acceptance_for_witness(&p, 0, 0, &rho).unwrap();
            prop_assert!(acc <= l + 1e-9);
            prop_assert!(trace(&rho).re > 0.0);
        }
    }
}
