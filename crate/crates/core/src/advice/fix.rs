//! Replacing randomized advice by one fixed tuple of samples.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{AdvisedVerifier, Evaluator};
use crate::error::{Error, Result};
use crate::qcore::linalg::{self, Mat};
use crate::qcore::metrics::top_eigenpair;
use crate::{seeding, tails};

/// Largest advice tuple tried while boosting.
pub const MAX_TUPLE: usize = 99;
/// Largest number of witness-preserving rounds tried for quantum witnesses.
pub const MAX_ROUNDS: usize = 201;
const SAMPLE_ATTEMPTS: u64 = 256;
const ENUMERATION_CAP: u128 = 1 << 22;

fn check_promise(v: &AdvisedVerifier) -> Result<Vec<f64>> {
    (0..1u64 << v.n())
        .map(|x| {
            let lambda = top_eigenpair(&v.mean_operator(x))?.0;
            let ok = if v.in_language(x) { lambda >= 2.0 / 3.0 - linalg::TOL } else { lambda <= 1.0 / 3.0 + linalg::TOL };
            if !ok {
                return Err(Error::PromiseViolation(format!("input {x}: best acceptance {lambda:.6} on the wrong side of the gap")));
            }
            Ok(lambda)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FixMethod {
    Sampled,
    Enumerated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixCertificate {
    pub inputs_checked: usize,
    pub pairs_checked: usize,
    pub errors: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MaFix {
    pub copies: usize,
    /// Per-(x, z) target `1/(2^n·2^w)`.
    pub target: f64,
    pub max_boosted_error: f64,
    /// `1 − Σ` boosted errors over the pairs that matter: a uniformly drawn
    /// tuple works at least this often.
    pub success_lower_bound: f64,
    pub method: FixMethod,
    pub attempts: u64,
    pub advice: Vec<usize>,
    pub certificate: FixCertificate,
}

/// Boosted Arthur: majority of `A(x, r_k, z)` over the tuple.
pub fn boosted_accepts(v: &AdvisedVerifier, advice: &[usize], x: u64, z: u64) -> Result<bool> {
    let Evaluator::Classical(a) = v.evaluator() else {
        return Err(Error::Precondition("boosted vote needs a classical Arthur".into()));
    };
    let votes = advice.iter().filter(|&&r| a(x, r, z)).count();
    Ok(votes >= tails::majority_threshold(advice.len()))
}

/// Every `x ∈ L` has an accepted witness, no `x ∉ L` has one.
pub fn certify_classical(v: &AdvisedVerifier, advice: &[usize]) -> Result<FixCertificate> {
    let mut errors = 0;
    for x in 0..1u64 << v.n() {
        let mut any = false;
        for z in 0..1u64 << v.w() {
            any |= boosted_accepts(v, advice, x, z)?;
        }
        errors += (any != v.in_language(x)) as usize;
    }
    Ok(FixCertificate { inputs_checked: 1 << v.n(), pairs_checked: 1 << (v.n() + v.w()), errors })
}

/// Fixed advice for a classical Merlin-Arthur verifier.
pub fn ma_fix_advice(v: &AdvisedVerifier, seed: u64) -> Result<MaFix> {
    let Evaluator::Classical(a) = v.evaluator() else {
        return Err(Error::Precondition("classical fixing needs a classical Arthur".into()));
    };
    if v.n() > 4 || v.w() > 4 {
        return Err(Error::OutOfDomain("classical fixing is exhaustive: n ≤ 4, w ≤ 4".into()));
    }
    check_promise(v)?;
    let dist = v.advice_distribution();
    let q = |x: u64, z: u64| -> f64 { dist.iter().enumerate().filter(|(r, _)| a(x, *r, z)).map(|(_, p)| p).sum() };

    // acceptance of the pairs a counting argument must control
    let mut relevant: Vec<(bool, f64)> = Vec::new();
    for x in 0..1u64 << v.n() {
        let acc: Vec<f64> = (0..1u64 << v.w()).map(|z| q(x, z)).collect();
        if v.in_language(x) {
            relevant.push((true, acc.iter().copied().fold(0.0, f64::max)));
        } else {
            relevant.extend(acc.into_iter().map(|p| (false, p)));
        }
    }
    let target = 1.0 / (1u64 << (v.n() + v.w())) as f64;
    let errors = |p: usize| -> Vec<f64> {
        relevant.iter().map(|&(yes, acc)| if yes { 1.0 - tails::majority_tail(p, acc) } else { tails::majority_tail(p, acc) }).collect()
    };
    let copies = (1..=MAX_TUPLE)
        .step_by(2)
        .find(|&p| errors(p).iter().all(|&e| e < target))
        .ok_or_else(|| Error::CopyBudget(format!("per-pair error {target:e} needs more than {MAX_TUPLE} samples")))?;
    let errs = errors(copies);
    let max_boosted_error = errs.iter().copied().fold(0.0, f64::max);
    let success_lower_bound = 1.0 - errs.iter().sum::<f64>();

    let mut rng = seeding::rng(seed);
    let mut draw = || -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (r, &p) in dist.iter().enumerate() {
            acc += p;
            if u < acc {
                return r;
            }
        }
        dist.len() - 1
    };
    for attempt in 1..=SAMPLE_ATTEMPTS {
        let advice: Vec<usize> = (0..copies).map(|_| draw()).collect();
        let certificate = certify_classical(v, &advice)?;
        if certificate.errors == 0 {
            return Ok(MaFix { copies, target, max_boosted_error, success_lower_bound, method: FixMethod::Sampled, attempts: attempt, advice, certificate });
        }
    }

    let s = dist.len();
    if (s as u128).checked_pow(copies as u32).is_none_or(|t| t > ENUMERATION_CAP) {
        return Err(Error::PromiseViolation("no fixed advice found by sampling and the tuple space is too large".into()));
    }
    let mut advice = vec![0usize; copies];
    let mut attempts = SAMPLE_ATTEMPTS;
    loop {
        attempts += 1;
        let certificate = certify_classical(v, &advice)?;
        if certificate.errors == 0 {
            return Ok(MaFix { copies, target, max_boosted_error, success_lower_bound, method: FixMethod::Enumerated, attempts, advice, certificate });
        }
        // odometer over the tuple space
        let mut k = copies;
        loop {
            if k == 0 {
                return Err(Error::PromiseViolation("no advice tuple passes the certificate".into()));
            }
            k -= 1;
            advice[k] += 1;
            if advice[k] < s {
                break;
            }
            advice[k] = 0;
        }
    }
}

/// Accept operator after `rounds` witness-preserving repetitions of a
/// verifier with accept operator `m`: each eigenvalue λ becomes the
/// probability that a strict majority of `rounds` Bernoulli(λ) trials succeed.
pub fn witness_preserving_amplify(m: &Mat, rounds: usize) -> Mat {
    linalg::spectral_map(m, |l| tails::majority_tail(rounds, l.clamp(0.0, 1.0)))
}

/// All multisets of `copies` advice values with their probability under
/// independent sampling, most likely first.
fn multisets(dist: &[f64], copies: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(k: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, s: usize) {
        if k + 1 == s {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for c in (0..=left).rev() {
            cur.push(c);
            rec(k + 1, left - c, cur, out, s);
            cur.pop();
        }
    }
    let mut counts = Vec::new();
    rec(0, copies, &mut Vec::new(), &mut counts, dist.len());
    let ln_fact = |n: usize| (1..=n).map(|i| (i as f64).ln()).sum::<f64>();
    let mut out: Vec<(Vec<usize>, f64)> = counts
        .into_iter()
        .filter_map(|c| {
            if c.iter().zip(dist).any(|(&k, &p)| k > 0 && p == 0.0) {
                return None;
            }
            let ln = ln_fact(copies) + c.iter().zip(dist).map(|(&k, &p)| if k == 0 { 0.0 } else { k as f64 * p.ln() - ln_fact(k) }).sum::<f64>();
            Some((c, ln.exp()))
        })
        .collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| b.0.cmp(&a.0)));
    out
}

/// Per-input record of the fixed-advice certificate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QmaRecord {
    pub x: u64,
    pub in_language: bool,
    /// Best acceptance over all witnesses.
    pub optimal: f64,
    /// Best acceptance over computational-basis witnesses.
    pub max_basis: f64,
    /// `2^w · max_basis`, the maximally-mixed-state bound on `optimal`.
    pub mixed_bound: f64,
    pub mixed_bound_holds: bool,
    pub correct: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QmaFix {
    pub copies: usize,
    pub rounds: usize,
    /// Per-(x, witness) target `1/(2^n·2^{3w})`.
    pub epsilon: f64,
    pub max_boosted_error: f64,
    /// Probability that a random tuple is good for every yes-instance.
    pub mass_yes: f64,
    /// Probability that a random tuple keeps every basis witness of every
    /// no-instance below `2^{-2w}`.
    pub mass_no: f64,
    pub mass_both: f64,
    /// Union-bound guarantee `mass_yes + mass_no − 1` on `mass_both`.
    pub union_bound: f64,
    /// The chosen tuple, as a sorted multiset of advice values.
    pub advice: Vec<usize>,
    pub records: Vec<QmaRecord>,
    pub errors: usize,
}

struct Boost {
    // per multiset, per input: eigen decomposition of the tuple's mean operator
    spectra: Vec<Vec<(Vec<f64>, Mat)>>,
    probs: Vec<f64>,
    counts: Vec<Vec<usize>>,
}

impl Boost {
    fn new(v: &AdvisedVerifier, copies: usize) -> Self {
        let ms = multisets(v.advice_distribution(), copies);
        let ops: Vec<Vec<Mat>> = (0..1u64 << v.n()).map(|x| (0..v.advice_distribution().len()).map(|r| v.operator(x, r)).collect()).collect();
        let d = 1usize << v.w();
        let spectra = ms
            .iter()
            .map(|(c, _)| {
                ops.iter()
                    .map(|per_r| {
                        let mean = c.iter().zip(per_r).fold(Mat::zeros(d, d), |acc, (&k, m)| acc + m.scale(k as f64 / copies as f64));
                        linalg::eigh(&mean)
                    })
                    .collect()
            })
            .collect();
        let (counts, probs) = ms.into_iter().unzip();
        Self { spectra, probs, counts }
    }

    fn amplified(&self, i: usize, x: usize, rounds: usize) -> Mat {
        let (vals, vecs) = &self.spectra[i][x];
        let g: Vec<f64> = vals.iter().map(|&l| tails::majority_tail(rounds, l.clamp(0.0, 1.0))).collect();
        let d = vals.len();
        let diag = Mat::from_fn(d, d, |a, b| if a == b { linalg::re(g[a]) } else { linalg::re(0.0) });
        vecs * diag * vecs.adjoint()
    }
}

/// Fixed advice for a verifier with a quantum witness.
pub fn qma_fix_advice(v: &AdvisedVerifier) -> Result<QmaFix> {
    if v.w() > 3 || v.n() > 4 {
        return Err(Error::OutOfDomain("quantum fixing needs w ≤ 3 and n ≤ 4".into()));
    }
    check_promise(v)?;
    let (n, w) = (v.n(), v.w());
    let epsilon = 1.0 / (1u64 << (n + 3 * w)) as f64;
    let xs: Vec<usize> = (0..1usize << n).collect();
    let d = 1usize << w;

    let mut found = None;
    'search: for copies in (1..=MAX_TUPLE).step_by(2) {
        let boost = Boost::new(v, copies);
        for rounds in (1..=MAX_ROUNDS).step_by(2) {
            let mut worst: f64 = 0.0;
            for &x in &xs {
                let avg = (0..boost.probs.len()).fold(Mat::zeros(d, d), |acc, i| acc + boost.amplified(i, x, rounds).scale(boost.probs[i]));
                let top = top_eigenpair(&avg)?.0;
                worst = worst.max(if v.in_language(x as u64) { 1.0 - top } else { top });
                if worst > epsilon {
                    break;
                }
            }
            if worst <= epsilon {
                found = Some((copies, rounds, boost, worst));
                break 'search;
            }
        }
    }
    let (copies, rounds, boost, max_boosted_error) =
        found.ok_or_else(|| Error::CopyBudget(format!("error {epsilon:e} not reached within {MAX_TUPLE} samples and {MAX_ROUNDS} rounds")))?;

    let yes_floor = 1.0 - 1.0 / (1u64 << (3 * w)) as f64;
    let basis_ceiling = 1.0 / (1u64 << (2 * w)) as f64;
    let (mut mass_yes, mut mass_no, mut mass_both) = (0.0, 0.0, 0.0);
    let mut chosen = None;
    for i in 0..boost.probs.len() {
        let mut yes_ok = true;
        let mut no_ok = true;
        for &x in &xs {
            let m = boost.amplified(i, x, rounds);
            if v.in_language(x as u64) {
                yes_ok &= top_eigenpair(&m)?.0 >= yes_floor;
            } else {
                no_ok &= (0..d).all(|z| m[(z, z)].re <= basis_ceiling);
            }
        }
        let p = boost.probs[i];
        mass_yes += p * yes_ok as u8 as f64;
        mass_no += p * no_ok as u8 as f64;
        if yes_ok && no_ok {
            mass_both += p;
            chosen.get_or_insert(i);
        }
    }
    let i = chosen.ok_or_else(|| Error::PromiseViolation("no advice tuple satisfies both halves".into()))?;

    let mut records = Vec::with_capacity(xs.len());
    for &x in &xs {
        let m = boost.amplified(i, x, rounds);
        let optimal = top_eigenpair(&m)?.0;
        let max_basis = (0..d).map(|z| m[(z, z)].re).fold(0.0, f64::max);
        let mixed_bound = d as f64 * max_basis;
        let yes = v.in_language(x as u64);
        records.push(QmaRecord {
            x: x as u64,
            in_language: yes,
            optimal,
            max_basis,
            mixed_bound,
            mixed_bound_holds: optimal <= mixed_bound + linalg::TOL,
            correct: if yes { optimal >= 2.0 / 3.0 } else { optimal <= 1.0 / 3.0 },
        });
    }
    let errors = records.iter().filter(|r| !r.correct || !r.mixed_bound_holds).count();
    let advice = boost.counts[i].iter().enumerate().flat_map(|(r, &k)| std::iter::repeat_n(r, k)).collect();
    Ok(QmaFix {
        copies,
        rounds,
        epsilon,
        max_boosted_error,
        mass_yes,
        mass_no,
        mass_both,
        union_bound: mass_yes + mass_no - 1.0,
        advice,
        records,
        errors,
    })
}

/// Accept operator of the fixed verifier for a given advice multiset.
pub fn fixed_operator(v: &AdvisedVerifier, advice: &[usize], rounds: usize, x: u64) -> Mat {
    let d = 1usize << v.w();
    let mean = advice.iter().fold(Mat::zeros(d, d), |acc, &r| acc + v.operator(x, r).scale(1.0 / advice.len() as f64));
    witness_preserving_amplify(&mean, rounds)
}
