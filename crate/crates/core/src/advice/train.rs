//! Replacing quantum advice with classical training pairs.
//!
//! Start from the maximally mixed state on the (amplified) advice register
//! and postselect, one pair `(x, z)` at a time, on the verifier answering
//! `L(x)`. Pairs are chosen while some still has a correct-answer
//! probability of at most 2/3. Each chosen pair removes a third of the
//! remaining weight, while the true advice survives almost untouched, so the
//! list stays short.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::amplify::build_inner;
use crate::error::{Error, Result};
use crate::protocol::OneWayQmaProtocol;
use crate::qcore::instrument::Instrument;
use crate::qcore::linalg::{self, Mat, Vector};
use crate::{seeding, tails};

pub const MAX_TRAINING_INPUT_BITS: usize = 3;
pub const MAX_TRAINING_WITNESS_BITS: usize = 3;
pub const MAX_AMPLIFIED_ADVICE: usize = 4;
/// Hard stop on the training loop; the audit bound `T ≤ 4A` is far below it.
pub const MAX_T: usize = 64;
/// Pairs whose correct answer is essentially impossible are skipped.
pub const DEGENERATE_Q: f64 = 1e-12;

/// A verifier whose witness is classical and whose advice is quantum. Bob's
/// register holds `x`; the true advice is the protocol's encoding of 0.
#[derive(Clone, Debug)]
pub struct QcmaVerifier {
    pub n: usize,
    pub language: Vec<bool>,
    pub protocol: OneWayQmaProtocol,
}

impl QcmaVerifier {
    pub fn new(language: Vec<bool>, protocol: OneWayQmaProtocol) -> Result<Self> {
        let s = protocol.sizes();
        let n = s.bob_input;
        if n == 0 || n > MAX_TRAINING_INPUT_BITS {
            return Err(Error::OutOfDomain(format!("input length {n} outside 1..={MAX_TRAINING_INPUT_BITS}")));
        }
        if s.witness > MAX_TRAINING_WITNESS_BITS {
            return Err(Error::OutOfDomain(format!("witness width {} above {MAX_TRAINING_WITNESS_BITS}", s.witness)));
        }
        if s.advice == 0 || s.advice > MAX_AMPLIFIED_ADVICE {
            return Err(Error::OutOfDomain(format!("advice width {} outside 1..={MAX_AMPLIFIED_ADVICE}", s.advice)));
        }
        if language.len() != 1 << n {
            return Err(Error::DimensionMismatch(language.len(), 1 << n));
        }
        Ok(Self { n, language, protocol })
    }

    pub fn w(&self) -> usize {
        self.protocol.sizes().witness
    }

    pub fn true_advice(&self) -> Result<Vector> {
        self.protocol.encode(0)
    }

    /// Acceptance of every basis witness on the true advice, indexed `[x][z]`.
    pub fn acceptance_table(&self) -> Result<Vec<Vec<f64>>> {
        let psi = self.true_advice()?;
        (0..1u64 << self.n)
            .map(|x| {
                let m = self.protocol.witness_operator_for_advice(x, &psi)?;
                Ok((0..m.nrows()).map(|z| m[(z, z)].re).collect())
            })
            .collect()
    }

    /// Worst-case error over inputs, with the best basis witness on yes-inputs.
    pub fn base_error(&self) -> Result<f64> {
        let table = self.acceptance_table()?;
        Ok(table
            .iter()
            .enumerate()
            .map(|(x, row)| {
                let best = row.iter().copied().fold(0.0, f64::max);
                if self.language[x] { 1.0 - best } else { best }
            })
            .fold(0.0, f64::max))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingPlan {
    pub base_error: f64,
    /// Parallel copies in the amplified verifier.
    pub ell: usize,
    pub amplified_error: f64,
    /// Qubits of amplified advice.
    pub big_a: usize,
    /// Validity threshold `1 − 1/A⁴`.
    pub validity: f64,
}

/// Smallest odd `ℓ` that drives the error to `1/(aℓ)⁴`.
pub fn plan_training(v: &QcmaVerifier) -> Result<TrainingPlan> {
    let a = v.protocol.sizes().advice;
    let base_error = v.base_error()?;
    if base_error >= 0.5 {
        return Err(Error::PlanRejected(format!("base error {base_error:.4} leaves no majority gap")));
    }
    for ell in (1..).step_by(2) {
        let big_a = a * ell;
        if big_a > MAX_AMPLIFIED_ADVICE {
            return Err(Error::PlanRejected(format!(
                "amplified advice would need more than {MAX_AMPLIFIED_ADVICE} qubits"
            )));
        }
        let amplified_error = tails::majority_tail(ell, base_error);
        let target = (big_a as f64).powi(-4);
        if amplified_error <= target {
            return Ok(TrainingPlan { base_error, ell, amplified_error, big_a, validity: 1.0 - target });
        }
    }
    unreachable!("the advice cap ends the loop")
}

/// One chosen pair and what it did.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingStep {
    pub x: u64,
    pub z: u64,
    pub answer: bool,
    /// Probability of the correct answer on the state before the step.
    pub q: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputDecision {
    pub x: u64,
    pub in_language: bool,
    /// Acceptance of each witness on the trained state.
    pub lambdas: Vec<f64>,
    /// `Some(true)` accept, `Some(false)` reject, `None` a gap violation.
    pub decision: Option<bool>,
    pub correct: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingAudit {
    pub floor: f64,
    pub floor_pass: bool,
    pub geometric_bound: f64,
    pub geometric_pass: bool,
    pub union_bound: f64,
    pub union_pass: bool,
    pub length_bound: usize,
    pub length_pass: bool,
    pub maximal: bool,
    pub decisions: Vec<InputDecision>,
    pub all_correct: bool,
}

impl TrainingAudit {
    pub fn pass(&self) -> bool {
        self.floor_pass && self.geometric_pass && self.union_pass && self.length_pass && self.maximal && self.all_correct
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainingSet {
    pub plan: TrainingPlan,
    pub steps: Vec<TrainingStep>,
    /// Probability that the maximally mixed start passes every step.
    pub p_t: f64,
    /// Probability that the true advice passes every step.
    pub survival: f64,
    /// Pairs passed over because their correct answer had probability ≈ 0.
    pub skipped_degenerate: usize,
    pub audit: TrainingAudit,
    #[serde(skip)]
    pub state: Option<Mat>,
}

impl TrainingSet {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn pairs(&self) -> Vec<(u64, u64)> {
        self.steps.iter().map(|s| (s.x, s.z)).collect()
    }
}

struct Trainer {
    instruments: Vec<Vec<Instrument>>,
    valid: Vec<Vec<bool>>,
    language: Vec<bool>,
}

impl Trainer {
    fn new(v: &QcmaVerifier, amplified: &OneWayQmaProtocol, plan: &TrainingPlan) -> Result<Self> {
        let w = v.w();
        let da = 1usize << plan.big_a;
        let system: Vec<usize> = amplified.advice_qubits().collect();
        let psi = amplified.encode(0)?;
        let mut instruments = Vec::new();
        let mut valid = Vec::new();
        for x in 0..1u64 << v.n {
            let wop = amplified.witness_operator_for_advice(x, &psi)?;
            let mut row_i = Vec::new();
            let mut row_v = Vec::new();
            for z in 0..1usize << w {
                let zrep = repeat_witness(z, w, plan.ell);
                let inputs: Vec<Vector> = (0..da)
                    .map(|a| {
                        let mut e = Vector::zeros(da);
                        e[a] = linalg::re(1.0);
                        amplified.input_state(x, &e, zrep)
                    })
                    .collect::<Result<_>>()?;
                row_i.push(Instrument::from_circuit_inputs(amplified.circuit(), &system, &inputs, amplified.accept_qubit())?);
                row_v.push(wop[(zrep, zrep)].re >= plan.validity);
            }
            instruments.push(row_i);
            valid.push(row_v);
        }
        Ok(Self { instruments, valid, language: v.language.clone() })
    }

    fn candidate(&self, x: usize, z: usize) -> bool {
        !self.language[x] || self.valid[x][z]
    }

    fn q(&self, x: usize, z: usize, rho: &Mat) -> f64 {
        self.instruments[x][z].probability(self.language[x] as u8, rho)
    }

    /// Lexicographically first pair of least correct-answer probability among
    /// the eligible ones, plus the count of degenerate pairs seen.
    fn pick(&self, rho: &Mat) -> (Option<(usize, usize, f64)>, usize) {
        let mut best: Option<(usize, usize, f64)> = None;
        let mut degenerate = 0;
        for x in 0..self.instruments.len() {
            for z in 0..self.instruments[x].len() {
                if !self.candidate(x, z) {
                    continue;
                }
                let q = self.q(x, z, rho);
                if q <= DEGENERATE_Q {
                    degenerate += 1;
                    continue;
                }
                if q <= 2.0 / 3.0 + DEGENERATE_Q && best.is_none_or(|(_, _, b)| q < b - DEGENERATE_Q) {
                    best = Some((x, z, q));
                }
            }
        }
        (best, degenerate)
    }
}

fn repeat_witness(z: usize, w: usize, ell: usize) -> usize {
    (0..ell).fold(0, |acc, _| (acc << w) | z)
}

/// Build the training list for `v` and audit it.
pub fn qcma_train(v: &QcmaVerifier) -> Result<TrainingSet> {
    let plan = plan_training(v)?;
    let amplified = build_inner(&v.protocol, plan.ell)?;
    let trainer = Trainer::new(v, &amplified, &plan)?;
    let da = 1usize << plan.big_a;
    let psi = amplified.encode(0)?;

    let mut rho = Mat::identity(da, da).scale(1.0 / da as f64);
    let mut truth = linalg::outer(&psi);
    let mut p_t = 1.0;
    let mut steps = Vec::new();
    let mut skipped_degenerate = 0;
    loop {
        let (pick, degenerate) = trainer.pick(&rho);
        skipped_degenerate = skipped_degenerate.max(degenerate);
        let Some((x, z, q)) = pick else { break };
        if steps.len() == MAX_T {
            return Err(Error::PlanRejected(format!("training did not settle within {MAX_T} pairs")));
        }
        let answer = v.language[x];
        let inst = &trainer.instruments[x][z];
        rho = linalg::hermitize(&inst.apply(answer as u8, &rho).scale(1.0 / q));
        truth = inst.apply(answer as u8, &truth);
        p_t *= q;
        steps.push(TrainingStep { x: x as u64, z: z as u64, answer, q });
    }
    let survival = truth.trace().re;

    let t = steps.len();
    let big_a = plan.big_a as f64;
    let floor = (1.0 - t as f64 / (big_a * big_a)) / da as f64;
    let geometric_bound = (2.0f64 / 3.0).powi(t as i32);
    let union_bound = t as f64 / (big_a * big_a);
    let decisions: Vec<InputDecision> = (0..1usize << v.n)
        .map(|x| {
            let lambdas: Vec<f64> = trainer.instruments[x].iter().map(|i| i.probability(1, &rho)).collect();
            let decision = if lambdas.iter().any(|&l| l >= 2.0 / 3.0) {
                Some(true)
            } else if lambdas.iter().all(|&l| l <= 1.0 / 3.0) {
                Some(false)
            } else {
                None
            };
            InputDecision { x: x as u64, in_language: v.language[x], lambdas, correct: decision == Some(v.language[x]), decision }
        })
        .collect();
    let all_correct = decisions.iter().all(|d| d.correct);
    let audit = TrainingAudit {
        floor,
        floor_pass: p_t >= floor - linalg::TOL,
        geometric_bound,
        geometric_pass: p_t <= geometric_bound + linalg::TOL,
        union_bound,
        union_pass: 1.0 - survival <= union_bound + linalg::TOL,
        length_bound: 4 * plan.big_a,
        length_pass: t <= 4 * plan.big_a,
        maximal: trainer.pick(&rho).0.is_none(),
        decisions,
        all_correct,
    };
    Ok(TrainingSet { plan, steps, p_t, survival, skipped_degenerate, audit, state: Some(rho) })
}

/// Number of majority votes needed to push a 1/3 error below `2^{-2w}`.
pub fn j_for(w: usize) -> usize {
    let target = 2f64.powi(-2 * w as i32);
    tails::min_odd_majority(1.0 / 3.0, target, 10_001).expect("target is reachable")
}

/// Average over witnesses of the `J`-fold majority acceptance.
pub fn j_fold_decision(lambdas: &[f64], w: usize) -> Result<f64> {
    if lambdas.len() != 1 << w {
        return Err(Error::DimensionMismatch(lambdas.len(), 1 << w));
    }
    let j = j_for(w);
    Ok(lambdas.iter().map(|&l| tails::majority_tail(j, l.clamp(0.0, 1.0))).sum::<f64>() / lambdas.len() as f64)
}

/// Decide from the averaged statistic: accept at `S ≥ 2^{-w-1}`, reject at
/// `S ≤ 2^{-2w}`. Anything between is a promise violation.
pub fn s_decision(s: f64, w: usize) -> Result<bool> {
    let hi = 2f64.powi(-(w as i32) - 1);
    let lo = 2f64.powi(-2 * w as i32);
    if s >= hi && s > lo {
        Ok(true)
    } else if s <= lo && s < hi {
        Ok(false)
    } else {
        Err(Error::PromiseViolation(format!("statistic {s:.6} between 2^-{} and 2^-{}", 2 * w, w + 1)))
    }
}

/// Monte Carlo estimate of the averaged statistic: pick a uniform witness,
/// run `J` Bernoulli trials, record the majority.
pub fn sample_s(lambdas: &[f64], w: usize, shots: usize, seed: u64) -> Result<f64> {
    if lambdas.len() != 1 << w {
        return Err(Error::DimensionMismatch(lambdas.len(), 1 << w));
    }
    let j = j_for(w);
    let threshold = tails::majority_threshold(j);
    let mut rng = seeding::rng(seed);
    let hits = (0..shots)
        .filter(|_| {
            let l = lambdas[rng.gen_range(0..lambdas.len())];
            (0..j).filter(|_| rng.gen::<f64>() < l).count() >= threshold
        })
        .count();
    Ok(hits as f64 / shots.max(1) as f64)
}
