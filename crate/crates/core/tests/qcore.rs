mod common;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use qmacc_core::qcore::linalg::{c, identity, re};
use qmacc_core::qcore::random::{random_density, random_effect, random_pure, random_unitary};
use qmacc_core::qcore::*;
use qmacc_core::seeding;
use qmacc_core::Error;

fn ket(v: &[f64]) -> Vector {
    Vector::from_iterator(v.len(), v.iter().map(|&x| re(x)))
}

fn pure(name: &str, v: &[f64]) -> DensityMatrix {
    let n = v.len().trailing_zeros() as usize;
    StateVector::normalized(ket(v), Layout::single(name, n)).unwrap().to_density()
}

fn mixed(name: &str, m: Mat) -> DensityMatrix {
    let n = m.nrows().trailing_zeros() as usize;
    DensityMatrix::new(m, Layout::single(name, n)).unwrap()
}

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[test]
fn tensor_of_basis_states() {
    let t = tensor_product(&pure("a", &[1.0, 0.0]), &pure("b", &[1.0, 0.0])).unwrap();
    let mut want = Mat::zeros(4, 4);
    want[(0, 0)] = re(1.0);
    assert_abs_diff_eq!((t.matrix() - want).norm(), 0.0, epsilon = 1e-12);
    assert_eq!(t.layout().registers().len(), 2);
}

#[test]
fn tensor_of_maximally_mixed() {
    let a = DensityMatrix::maximally_mixed(Layout::single("a", 1));
    let b = DensityMatrix::maximally_mixed(Layout::single("b", 1));
    let t = tensor_product(&a, &b).unwrap();
    assert_abs_diff_eq!((t.matrix() - identity(4) * re(0.25)).norm(), 0.0, epsilon = 1e-12);
}

#[test]
fn tensor_matches_kronecker_oracle() {
    let a = pure("a", &[H, H]);
    let b = pure("b", &[0.0, 1.0]);
    let t = tensor_product(&a, &b).unwrap();
    let want = common::kron_oracle(a.matrix(), b.matrix());
    for i in 0..4 {
        for j in 0..4 {
            assert_abs_diff_eq!(t.matrix()[(i, j)].re, want[(i, j)].re, epsilon = 1e-12);
            assert_abs_diff_eq!(t.matrix()[(i, j)].im, want[(i, j)].im, epsilon = 1e-12);
        }
    }
    assert_abs_diff_eq!(t.trace(), 1.0, epsilon = 1e-12);
}

#[test]
fn tensor_rejects_name_collision() {
    let a = pure("a", &[1.0, 0.0]);
    assert!(matches!(tensor_product(&a, &a), Err(Error::RegisterCollision(_))));
}

#[test]
fn partial_trace_examples() {
    let prod = tensor_product(&pure("a", &[1.0, 0.0]), &pure("b", &[1.0, 0.0])).unwrap();
    let r = partial_trace(&prod, &["a"]).unwrap();
    assert_abs_diff_eq!(r.matrix()[(0, 0)].re, 1.0, epsilon = 1e-12);

    let bell = StateVector::normalized(ket(&[1.0, 0.0, 0.0, 1.0]), Layout::new(vec![Register::new("a", 1), Register::new("b", 1)]).unwrap())
        .unwrap()
        .to_density();
    let r = partial_trace(&bell, &["a"]).unwrap();
    assert_abs_diff_eq!((r.matrix() - identity(2) * re(0.5)).norm(), 0.0, epsilon = 1e-12);
    assert!(matches!(partial_trace(&bell, &["z"]), Err(Error::UnknownRegister(_))));
}

#[test]
fn partial_trace_matches_summation_oracle() {
    let mut rng = seeding::rng(11);
    let m = random_density(&mut rng, 8, 8);
    let layout = Layout::new(vec![Register::new("a", 2), Register::new("b", 1)]).unwrap();
    let rho = DensityMatrix::new(m.clone(), layout).unwrap();
    let r = partial_trace(&rho, &["a"]).unwrap();
    let want = common::trace_out_tail(&m, 2, 1);
    assert_abs_diff_eq!((r.matrix() - want).norm(), 0.0, epsilon = 1e-12);
}

#[test]
fn fidelity_examples() {
    let z = pure("a", &[1.0, 0.0]);
    let o = pure("a", &[0.0, 1.0]);
    let p = pure("a", &[H, H]);
    assert_abs_diff_eq!(fidelity(&z, &z).unwrap(), 1.0, epsilon = 1e-9);
    assert_abs_diff_eq!(fidelity(&z, &o).unwrap(), 0.0, epsilon = 1e-9);
    // pure-state oracle |<0|+>|
    assert_abs_diff_eq!(fidelity(&z, &p).unwrap(), H, epsilon = 1e-9);
    let big = DensityMatrix::maximally_mixed(Layout::single("a", 2));
    assert!(matches!(fidelity(&z, &big), Err(Error::DimensionMismatch(..))));
}

#[test]
fn trace_distance_examples() {
    let z = pure("a", &[1.0, 0.0]);
    let o = pure("a", &[0.0, 1.0]);
    let p = pure("a", &[H, H]);
    assert_abs_diff_eq!(trace_distance(&z, &z).unwrap(), 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(trace_distance(&z, &o).unwrap(), 1.0, epsilon = 1e-12);
    let oracle = 0.5 * common::jacobi_eigenvalues(&(z.matrix() - p.matrix())).iter().map(|x| x.abs()).sum::<f64>();
    assert_abs_diff_eq!(trace_distance(&z, &p).unwrap(), oracle, epsilon = 1e-12);
    assert_abs_diff_eq!(oracle, H, epsilon = 1e-12);
}

#[test]
fn measurement_examples() {
    let mut rng = seeding::rng(5);
    let rho = mixed("a", random_density(&mut rng, 2, 2));
    let r = measure_two_outcome(&rho, &TwoOutcomeMeasurement::scaled_identity(2, 1.0).unwrap()).unwrap();
    assert_abs_diff_eq!(r.p1, 1.0, epsilon = 1e-12);
    assert!(r.post0.is_none());
    assert_abs_diff_eq!((r.post1.unwrap().matrix() - rho.matrix()).norm(), 0.0, epsilon = 1e-12);

    let r = measure_two_outcome(&rho, &TwoOutcomeMeasurement::scaled_identity(2, 0.5).unwrap()).unwrap();
    assert_abs_diff_eq!(r.p1, 0.5, epsilon = 1e-12);
    assert_abs_diff_eq!((r.post0.unwrap().matrix() - rho.matrix()).norm(), 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!((r.post1.unwrap().matrix() - rho.matrix()).norm(), 0.0, epsilon = 1e-12);

    let mut e = Mat::zeros(2, 2);
    e[(1, 1)] = re(1.0);
    let r = measure_two_outcome(&pure("a", &[H, H]), &TwoOutcomeMeasurement::new(e).unwrap()).unwrap();
    assert_abs_diff_eq!(r.p1, 0.5, epsilon = 1e-12);
    assert_abs_diff_eq!(r.post0.unwrap().matrix()[(0, 0)].re, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(r.post1.unwrap().matrix()[(1, 1)].re, 1.0, epsilon = 1e-12);
}

#[test]
fn measurement_kraus_completeness() {
    let mut rng = seeding::rng(9);
    let m = TwoOutcomeMeasurement::new(random_effect(&mut rng, 4)).unwrap();
    let sum = m.kraus0().adjoint() * m.kraus0() + m.kraus1().adjoint() * m.kraus1();
    assert_abs_diff_eq!((sum - identity(4)).norm(), 0.0, epsilon = 1e-9);
}

#[test]
fn top_eigenpair_examples() {
    let (l, _) = top_eigenpair(&identity(4)).unwrap();
    assert_abs_diff_eq!(l, 1.0, epsilon = 1e-12);
    let d = Mat::from_diagonal(&ket(&[0.2, 0.9]));
    let (l, v) = top_eigenpair(&d).unwrap();
    assert_abs_diff_eq!(l, 0.9, epsilon = 1e-12);
    assert_abs_diff_eq!(v.amplitudes()[1].norm(), 1.0, epsilon = 1e-12);
    let bad = Mat::from_row_slice(2, 2, &[re(0.0), re(1.0), re(0.0), re(0.0)]);
    assert!(matches!(top_eigenpair(&bad), Err(Error::NotHermitian(_))));
}

#[test]
fn top_eigenpair_matches_jacobi_oracle() {
    let mut rng = seeding::rng(21);
    for _ in 0..5 {
        let g = random_unitary(&mut rng, 8) + random_unitary(&mut rng, 8) * c(0.0, 0.7);
        let h = (&g + g.adjoint()) * re(0.5);
        let (l, v) = top_eigenpair(&h).unwrap();
        let oracle = *common::jacobi_eigenvalues(&h).last().unwrap();
        assert_abs_diff_eq!(l, oracle, epsilon = 1e-8);
        let r = (&h * v.amplitudes() - v.amplitudes() * re(l)).norm();
        assert!(r <= 1e-8, "residual {r}");
    }
}

#[test]
fn state_invariants_enforced() {
    assert!(StateVector::new(ket(&[1.0, 1.0]), Layout::single("a", 1)).is_err());
    assert!(StateVector::new(ket(&[1.0, 0.0, 0.0]), Layout::single("a", 1)).is_err());
    let not_psd = Mat::from_diagonal(&ket(&[1.5, -0.5]));
    assert!(DensityMatrix::new(not_psd, Layout::single("a", 1)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fuchs_van_de_graaf_upper(seed in any::<u64>(), dim_log in 1usize..4, rank in 1usize..4) {
        let mut rng = seeding::rng(seed);
        let d = 1 << dim_log;
        let a = mixed("a", random_density(&mut rng, d, rank));
        let b = mixed("a", random_density(&mut rng, d, rank));
        let td = trace_distance(&a, &b).unwrap();
        let f = fidelity(&a, &b).unwrap();
        prop_assert!(td <= (1.0 - f * f).max(0.0).sqrt() + 1e-9);
        prop_assert!((fidelity(&b, &a).unwrap() - f).abs() < 1e-7);
    }

    #[test]
    fn any_basis_averages_to_maximally_mixed(seed in any::<u64>(), dim_log in 1usize..5) {
        let mut rng = seeding::rng(seed);
        let d = 1 << dim_log;
        let u = random_unitary(&mut rng, d);
        let mut acc = Mat::zeros(d, d);
        for j in 0..d {
            let v: Vector = u.column(j).into_owned();
            acc += &v * v.adjoint();
        }
        let avg = acc.unscale(d as f64);
        prop_assert!((avg - identity(d).unscale(d as f64)).norm() < 1e-9);
    }

    #[test]
    fn measurement_conserves_probability(seed in any::<u64>(), dim_log in 1usize..4) {
        let mut rng = seeding::rng(seed);
        let d = 1 << dim_log;
        let rho = mixed("a", random_density(&mut rng, d, d));
        let m = TwoOutcomeMeasurement::new(random_effect(&mut rng, d)).unwrap();
        let r = measure_two_outcome(&rho, &m).unwrap();
        let t0 = r.post0.map_or(0.0, |s| s.trace());
        let t1 = r.post1.map_or(0.0, |s| s.trace());
        prop_assert!((r.p0 * t0 + r.p1 * t1 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn partial_trace_inverts_tensor(seed in any::<u64>(), na in 1usize..3, nb in 1usize..3) {
        let mut rng = seeding::rng(seed);
        let a = DensityMatrix::new(random_density(&mut rng, 1 << na, 2), Layout::single("a", na)).unwrap();
        let b = DensityMatrix::new(random_density(&mut rng, 1 << nb, 2), Layout::single("b", nb)).unwrap();
        let t = tensor_product(&a, &b).unwrap();
        prop_assert!((t.trace() - a.trace() * b.trace()).abs() < 1e-9);
        let back = partial_trace(&t, &["a"]).unwrap();
        prop_assert!((back.matrix() - a.matrix()).norm() < 1e-9);
    }

    #[test]
    fn triangle_inequality(seed in any::<u64>()) {
        let mut rng = seeding::rng(seed);
        let s: Vec<DensityMatrix> = (0..3).map(|_| mixed("a", random_density(&mut rng, 4, 2))).collect();
        let d = |i: usize, j: usize| trace_distance(&s[i], &s[j]).unwrap();
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-9);
    }

    #[test]
    fn pure_state_fidelity_is_overlap(seed in any::<u64>()) {
        let mut rng = seeding::rng(seed);
        let (u, v) = (random_pure(&mut rng, 4), random_pure(&mut rng, 4));
        let a = StateVector::new(u.clone(), Layout::single("a", 2)).unwrap().to_density();
        let b = StateVector::new(v.clone(), Layout::single("a", 2)).unwrap().to_density();
        prop_assert!((fidelity(&a, &b).unwrap() - u.dotc(&v).norm()).abs() < 1e-7);
    }
}
