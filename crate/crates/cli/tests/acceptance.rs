//! One line per acceptance criterion. Every bound is recomputed here from
//! raw quantities rather than read back from the library's own pass flags.

use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use qmacc_core::advice::toys::{bell_qcma, parity_ma, rotated_qma, witness_independent_qma};
use qmacc_core::advice::{fix::fixed_operator, ma_fix_advice, qcma_train, qma_fix_advice, AdvisedVerifier, Evaluator};
use qmacc_core::amplify::{audit_amplification, pad_witness, plan_amplification, AmplificationPlan, PlanRequest};
use qmacc_core::demerlin::{audit_demerlinized, demerlinize, monte_carlo};
use qmacc_core::protocol::toys;
use qmacc_core::qcore::TwoOutcomeMeasurement;
use qmacc_core::qlemmas::{
    good_as_new_check, or_bound_tight_instance, or_bound_run, random_or_instance, random_union_instance, union_bound_run,
};
use qmacc_core::rac::reduce::{audit_ordinary, tight_reduction, RandomizedRac};
use qmacc_core::rac::{audit_rac, default_code, RacParams};
use qmacc_core::seeding::{child_seed, trial_rng};
use rand::Rng;

type M = DMatrix<Complex64>;
type Outcome = Result<String, String>;
/// A check and its time budget in seconds.
type Criterion = (fn() -> Outcome, Option<u64>);

const SLACK: f64 = 1e-9;
const SEED: u64 = 20240601;

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok { Ok(()) } else { Err(msg.into()) }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn sqrt_psd(m: &M) -> M {
    let h = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(h);
    let d = M::from_diagonal(&eig.eigenvalues.map(|v| Complex64::new(v.max(0.0).sqrt(), 0.0)));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

fn max_eigenvalue(m: &M) -> f64 {
    let h = (m + m.adjoint()).scale(0.5);
    SymmetricEigen::new(h).eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn trace(m: &M) -> f64 {
    m.trace().re
}

fn reject_kraus(m: &TwoOutcomeMeasurement) -> M {
    sqrt_psd(&(M::identity(m.dim(), m.dim()) - m.effect()))
}

/// Probability that a Lüders sequence of `seq` rejects every time.
fn never_accept(rho: &M, seq: &[TwoOutcomeMeasurement]) -> f64 {
    seq.iter()
        .fold(rho.clone(), |cur, m| {
            let k = reject_kraus(m);
            &k * cur * k.adjoint()
        })
        .trace()
        .re
}

/// Acceptance of the joint measurement on `rho ⊗ sigma`, and the exact OR
/// probability over uniformly random basis slices of the second factor.
fn or_oracle(rho: &M, sigma: &M, joint: &TwoOutcomeMeasurement, t: usize) -> (f64, f64) {
    let (da, n) = (rho.nrows(), sigma.nrows());
    let e = joint.effect();
    let eta = trace(&(e * rho.kronecker(sigma)));
    let kraus: Vec<M> = (0..n)
        .map(|j| {
            let slice = M::from_fn(da, da, |r, s| e[(r * n + j, s * n + j)]);
            sqrt_psd(&(M::identity(da, da) - slice))
        })
        .collect();
    let mut cur = rho.clone();
    for _ in 0..t {
        cur = kraus.iter().fold(M::zeros(da, da), |acc, k| acc + k * &cur * k.adjoint()).unscale(n as f64);
    }
    (eta, 1.0 - trace(&cur))
}

fn criterion_1() -> Outcome {
    let mut worst: f64 = f64::NEG_INFINITY;
    for t in 0..1000 {
        let mut rng = trial_rng(SEED, t);
        let inst = random_union_instance(&mut rng, 4, 8).map_err(err)?;
        check(inst.rho.dim() <= 16 && inst.seq.len() <= 8, format!("trial {t} outside dim ≤ 16, T ≤ 8"))?;
        let rho = inst.rho.matrix();
        let eps = inst.seq.iter().map(|m| trace(&(m.effect() * rho))).fold(0.0, f64::max);
        check(eps <= inst.epsilon + SLACK, format!("trial {t}: measured ε {eps} above declared {}", inst.epsilon))?;
        let p = 1.0 - never_accept(rho, &inst.seq);
        let r = union_bound_run(&inst.rho, &inst.seq, inst.epsilon).map_err(err)?;
        check((p - r.p_any_one).abs() <= SLACK, format!("trial {t}: oracle {p} vs library {}", r.p_any_one))?;
        let bound = inst.seq.len() as f64 * inst.epsilon.sqrt();
        check(p <= bound + SLACK, format!("trial {t}: p {p} above T·√ε = {bound}"))?;
        worst = worst.max(p - bound);
    }
    Ok(format!("1000/1000 within T·√ε, worst excess {worst:.3e}"))
}

fn criterion_2() -> Outcome {
    let mut lines = Vec::new();
    for w in [1usize, 2] {
        let inst = or_bound_tight_instance(w).map_err(err)?;
        let n = 1usize << w;
        check(inst.sigma.dim() == n && inst.t_steps == 9 * n, format!("W={w}: expected N={n}, T={}", 9 * n))?;
        let (eta, p) = or_oracle(inst.rho.matrix(), inst.sigma.matrix(), &inst.joint, inst.t_steps);
        check((eta - 2.0 / 3.0).abs() <= SLACK, format!("W={w}: η = {eta}, expected 2/3"))?;
        let r = or_bound_run(&inst.rho, &inst.sigma, &inst.joint, inst.t_steps, None).map_err(err)?;
        check((p - r.p_any_one).abs() <= SLACK, format!("W={w}: oracle {p} vs library {}", r.p_any_one))?;
        check(p >= 1.0 / 9.0 - SLACK, format!("W={w}: p {p} below 1/9"))?;
        lines.push(format!("W={w} p={p:.6}"));
    }
    for t in 0..200 {
        let mut rng = trial_rng(child_seed(SEED, "or"), t);
        let (na, nb) = (rng.gen_range(1..=2usize), rng.gen_range(1..=2usize));
        let inst = random_or_instance(&mut rng, 1 << na, 1 << nb).map_err(err)?;
        let (eta, p) = or_oracle(inst.rho.matrix(), inst.sigma.matrix(), &inst.joint, inst.t_steps);
        let n = inst.sigma.dim() as f64;
        check(inst.t_steps as f64 >= n / (eta * eta) - SLACK, format!("random {t}: T < N/η²"))?;
        let bound = (eta - (n / inst.t_steps as f64).sqrt()).powi(2);
        check(p >= bound - SLACK, format!("random {t}: p {p} below (η − √(N/T))² = {bound}"))?;
    }
    Ok(format!("{}, 200/200 random pass", lines.join(", ")))
}

fn criterion_3() -> Outcome {
    let (rho, m) = qmacc_cli::equality_instance().map_err(err)?;
    let r = good_as_new_check(&rho, &m).map_err(err)?;
    // outcome 1 has probability 1/2, so the bound is 1/√2; outcome 0 leaves
    // |−⟩, at trace distance 1/√2 from |0⟩
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let eps = trace(&(m.effect() * rho.matrix()));
    let k0 = reject_kraus(&m);
    let post0 = (&k0 * rho.matrix() * k0.adjoint()).unscale(1.0 - eps);
    let diff = post0 - rho.matrix();
    let damage = SymmetricEigen::new(diff).eigenvalues.iter().map(|v| v.abs()).sum::<f64>() / 2.0;
    check((eps - 0.5).abs() <= SLACK, format!("ε = {eps}"))?;
    check((damage - half).abs() <= SLACK && (r.damage - half).abs() <= SLACK, format!("damage {damage} / {}", r.damage))?;
    check((eps.sqrt() - half).abs() <= SLACK && (r.bound - half).abs() <= SLACK, format!("bound {}", r.bound))?;
    Ok(format!("damage = bound = {:.12}", r.damage))
}

fn criterion_4() -> Outcome {
    let plan = plan_amplification(PlanRequest::new(1, 2)).map_err(err)?;
    let p = pad_witness(&toys::coin_toy(), plan.w - 1).map_err(err)?;
    let audit = audit_amplification(&p, &toys::coin_function(), &plan).map_err(err)?;
    let ln_target = -(plan.big_w as f64) * 5f64.ln();
    check(audit.records.iter().all(|r| r.exact), "some acceptances are bracketed, not exact")?;
    check(audit.ln_max_no <= ln_target + SLACK, format!("ln soundness {} above ln 5^-W = {ln_target}", audit.ln_max_no))?;
    check(audit.max_completeness_error <= 1.0 / 3.0 + SLACK, format!("completeness error {}", audit.max_completeness_error))?;
    Ok(format!(
        "ℓ={} u={} W={}: ln soundness {:.2} ≤ {:.2}, completeness error {:.2e}",
        plan.ell, plan.u, plan.big_w, audit.ln_max_no, ln_target, audit.max_completeness_error
    ))
}

fn criterion_5() -> Outcome {
    let p = toys::rac2();
    let s = p.sizes();
    let plan = AmplificationPlan::manual(s.advice, s.witness, 1.0 / 3.0, 1, 1).map_err(err)?;
    let d = demerlinize(&p, &plan).map_err(err)?;
    let f = toys::rac2_function();
    let audit = audit_demerlinized(&d, &f).map_err(err)?;
    let w = d.big_w() as f64;
    let gap_bound = 1.0 / 9.0 - 9.0 * 2f64.powf(w) / 5f64.powf(w / 2.0);
    let yes = audit.records.iter().filter(|r| r.f).map(|r| r.p_accept).fold(f64::INFINITY, f64::min);
    let no = audit.records.iter().filter(|r| !r.f).map(|r| r.p_accept).fold(f64::NEG_INFINITY, f64::max);
    check(audit.records.len() == f.entries().count(), "not every (X, Y) audited")?;
    check(yes - no >= gap_bound - SLACK, format!("gap {} below {gap_bound}", yes - no))?;
    // at small W the bound above is negative; the yes side still has to clear 1/9
    check(yes >= 1.0 / 9.0 - SLACK, format!("yes-instance acceptance {yes} below 1/9"))?;
    check(audit.precondition.max_no_lambda <= 5f64.powf(-w) + SLACK, "amplified soundness above 5^-W")?;
    let shots = 100_000;
    let mut worst_z: f64 = 0.0;
    for r in audit.records.iter().filter(|r| (r.f && r.p_accept == yes) || (!r.f && r.p_accept == no)) {
        let (est, _) = monte_carlo(&d, r.x, r.y, shots, child_seed(SEED, &format!("mc/{}/{}", r.x, r.y))).map_err(err)?;
        let sigma = (r.p_accept * (1.0 - r.p_accept) / shots as f64).sqrt().max(1.0 / shots as f64);
        let z = (est - r.p_accept).abs() / sigma;
        check(z <= 3.0, format!("({}, {}): estimate {est} vs exact {} is {z:.2}σ", r.x, r.y, r.p_accept))?;
        worst_z = worst_z.max(z);
    }
    Ok(format!("gap {:.4} ≥ {gap_bound:.3} (W={w}), Monte Carlo within {worst_z:.2}σ", yes - no))
}

fn criterion_6() -> Outcome {
    let code = default_code(4).map_err(err)?;
    let params = RacParams::new(8, 2, 4).map_err(err)?;
    let a = audit_rac(&code, &params).map_err(err)?;
    let big_w = code.big_w();
    let dist = (1..1u64 << code.w()).map(|y| code.encode(y).count_ones() as usize).min().unwrap();
    check(dist == a.verified_min_distance, format!("min distance {dist} vs {}", a.verified_min_distance))?;
    let delta = dist as f64 / big_w as f64;
    let r = (3f64.ln() / -(1.0 - delta).ln()).ceil() as usize;
    check(a.completeness == 1.0 && a.honest_outputs_correct, format!("completeness {}", a.completeness))?;
    check(a.min_detection >= delta - SLACK, format!("detection {} below d/W = {delta}", a.min_detection))?;
    check(a.repetitions == r, format!("r = {} but ceil(ln3/−ln(1−δ)) = {r}", a.repetitions))?;
    let soundness = (1.0 - a.min_detection).powi(r as i32);
    check(soundness <= 1.0 / 3.0 + SLACK, format!("soundness {soundness}"))?;
    let base = RandomizedRac::from_code(&code, &params, r).map_err(err)?;
    let reduced = tight_reduction(&base, child_seed(SEED, "reduce")).map_err(err)?;
    let ord = audit_ordinary(&reduced).map_err(err)?;
    check(ord.max_error <= 1.0 / 3.0, format!("ordinary RAC error {}", ord.max_error))?;
    Ok(format!(
        "d/W = {dist}/{big_w}, r = {r}, soundness {soundness:.4}, reduced error {:.2e} with {} copies",
        ord.max_error, ord.copies
    ))
}

fn majority_accepts(v: &AdvisedVerifier, advice: &[usize], x: u64, z: u64) -> bool {
    let Evaluator::Classical(a) = v.evaluator() else { unreachable!() };
    2 * advice.iter().filter(|&&r| a(x, r, z)).count() > advice.len()
}

fn criterion_7() -> Outcome {
    let mut checked = 0;
    for (n, w) in [(1, 1), (2, 1), (3, 2)] {
        let v = parity_ma(n, w).map_err(err)?;
        let fix = ma_fix_advice(&v, child_seed(SEED, "ma")).map_err(err)?;
        check(fix.certificate.errors == 0, format!("ma n={n}: certificate reports {} errors", fix.certificate.errors))?;
        for x in 0..1u64 << n {
            let any = (0..1u64 << w).any(|z| majority_accepts(&v, &fix.advice, x, z));
            check(any == v.in_language(x), format!("ma n={n} x={x}: fixed verifier wrong"))?;
            checked += 1;
        }
    }
    let mut verifiers: Vec<AdvisedVerifier> = (1..=3).map(rotated_qma).collect::<Result<_, _>>().map_err(err)?;
    verifiers.push(witness_independent_qma());
    for v in &verifiers {
        let fix = qma_fix_advice(v).map_err(err)?;
        check(fix.errors == 0, format!("qma n={}: {} errors", v.n(), fix.errors))?;
        let dim = 1usize << v.w();
        for x in 0..1u64 << v.n() {
            let m = fixed_operator(v, &fix.advice, fix.rounds, x);
            let optimal = max_eigenvalue(&m);
            let max_basis = (0..dim).map(|z| m[(z, z)].re).fold(0.0, f64::max);
            check(optimal <= dim as f64 * max_basis + SLACK, format!("qma x={x}: 2^w·max-basis inequality fails"))?;
            let ok = if v.in_language(x) { optimal >= 2.0 / 3.0 } else { optimal <= 1.0 / 3.0 };
            check(ok, format!("qma n={} x={x}: optimal {optimal}", v.n()))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} inputs re-verified, zero errors"))
}

fn criterion_8() -> Outcome {
    let v = bell_qcma();
    let set = qcma_train(&v).map_err(err)?;
    let t = set.len() as f64;
    let big_a = set.plan.big_a as f64;
    let floor = 2f64.powf(-big_a) * (1.0 - t / (big_a * big_a));
    let ceiling = (2.0f64 / 3.0).powf(t);
    check(set.p_t >= floor - SLACK, format!("p_T {} below floor {floor}", set.p_t))?;
    check(set.p_t <= ceiling + SLACK, format!("p_T {} above (2/3)^T = {ceiling}", set.p_t))?;
    let lang: Vec<bool> = (0..4u64).map(|x| x.count_ones() % 2 == 1).collect();
    for d in &set.audit.decisions {
        check(d.decision == Some(lang[d.x as usize]), format!("x={} decided {:?}", d.x, d.decision))?;
    }
    Ok(format!("T={} A={}: {floor:.4} ≤ p_T={:.4} ≤ {ceiling:.4}, all inputs correct", set.len(), set.plan.big_a, set.p_t))
}

fn criterion_9() -> Outcome {
    let runs: &[&[&str]] = &[
        &["lemma", "good-as-new", "--instance", "random"],
        &["lemma", "union", "--trials", "200"],
        &["lemma", "or-bound", "--witness-qubits", "1,2", "--random", "20"],
        &["amplify", "plan", "--toy", "coin"],
        &["demerlin", "build"],
        &["demerlin", "run"],
        &["rac", "audit", "--n", "4,8", "--w", "2,4"],
        &["rac", "reduce"],
        &["rac", "fingerprint"],
        &["advice", "ma-fix"],
        &["advice", "qma-fix"],
        &["advice", "qcma-train"],
    ];
    for args in runs {
        let mut outs = Vec::new();
        for (fmt, jobs) in [("json", "1"), ("json", "3"), ("csv", "1"), ("csv", "2")] {
            let out = Command::new(env!("CARGO_BIN_EXE_qmacc"))
                .args(*args)
                .args(["--seed", "7", "--shots", "3000", "--format", fmt, "--jobs", jobs])
                .env_remove("QMACC_OUT")
                .output()
                .map_err(err)?;
            check(out.status.code() == Some(0), format!("{args:?} exited {:?}", out.status.code()))?;
            outs.push(out.stdout);
        }
        check(outs[0] == outs[1] && outs[2] == outs[3], format!("{args:?} output differs between runs"))?;
    }
    Ok(format!("{} commands byte-identical in json and csv across thread counts", runs.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        (criterion_1, Some(30)),
        (criterion_2, Some(60)),
        (criterion_3, None),
        (criterion_4, Some(120)),
        (criterion_5, Some(300)),
        (criterion_6, None),
        (criterion_7, None),
        (criterion_8, Some(300)),
        (criterion_9, None),
    ];
    let mut failed = 0;
    for (i, (f, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut outcome = f();
        let took = start.elapsed();
        if let (Ok(_), Some(b)) = (&outcome, budget) {
            if took > Duration::from_secs(*b) {
                outcome = Err(format!("took {:.1}s, budget {b}s", took.as_secs_f64()));
            }
        }
        let budget = budget.map(|b| format!(" < {b}s")).unwrap_or_default();
        match outcome {
            Ok(msg) => println!("criterion {}: PASS {msg} ({:.2}s{budget})", i + 1, took.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("criterion {}: FAIL {msg} ({:.2}s{budget})", i + 1, took.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
