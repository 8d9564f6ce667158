//! Two-layer witness amplification.
//!
//! The inner layer runs `ℓ` copies of Bob's verifier in parallel, each on its
//! own copy of Alice's message and its own slice of the witness, and takes a
//! reversible majority. The outer layer invokes the inner layer `u` times on
//! fresh copies of Alice's message but one shared witness register, copying
//! each answer into a tally and uncomputing everything else.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{optimal_witness, AliceEncoder, CommunicationFunction, OneWayQmaProtocol, RegisterSizes};
use crate::qcore::circuit::{self, UnitaryCircuit, MAX_STATEVECTOR_QUBITS};
use crate::qcore::instrument::Instrument;
use crate::qcore::linalg::{Mat, Vector};
use crate::tails;

/// Base error assumed when none is given.
pub const DEFAULT_BASE_ERROR: f64 = 1.0 / 3.0;
/// Largest repetition count any search will consider.
pub const MAX_REPETITIONS: usize = 100_001;

/// Inner error target `1/(1000·w³)`.
pub fn inner_error_target(w: usize) -> f64 {
    1.0 / (1000.0 * (w as f64).powi(3))
}

/// Smallest odd `ℓ` whose majority error on base error `base_err` is at most `eps`.
pub fn min_inner_repetitions(base_err: f64, eps: f64) -> Option<usize> {
    tails::min_odd_majority(base_err, eps, MAX_REPETITIONS)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplificationPlan {
    pub a: usize,
    pub w: usize,
    pub base_error: f64,
    pub ell: usize,
    pub u: usize,
    /// Total Alice qubits `a·ℓ·u`.
    pub big_a: usize,
    /// Total witness qubits `w·ℓ`.
    pub big_w: usize,
    /// `1/(1000·w³)`.
    pub eps_target: f64,
    /// Exact inner majority error at `ℓ`.
    pub inner_error: f64,
    /// `ln 5^{-W}`.
    pub ln_soundness_target: f64,
    /// `ln` of the freshness bound on outer soundness, `MajTail(u, ε_ℓ)`.
    pub ln_soundness_bound: f64,
    /// `u·√ε_ℓ`.
    pub completeness_error_bound: f64,
    pub meets_inner_target: bool,
    pub meets_soundness_target: bool,
    pub meets_completeness: bool,
}

impl AmplificationPlan {
    /// Evaluate an arbitrary `(ℓ, u)` choice without rejecting it.
    pub fn manual(a: usize, w: usize, base_error: f64, ell: usize, u: usize) -> Result<Self> {
        if ell == 0 || u == 0 {
            return Err(Error::PlanRejected("repetition counts must be positive".into()));
        }
        let eps_target = inner_error_target(w.max(1));
        let inner_error = tails::majority_tail(ell, base_error);
        let big_w = w * ell;
        let ln_soundness_target = -(big_w as f64) * 5f64.ln();
        let ln_soundness_bound = tails::ln_majority_tail(u, inner_error);
        let completeness_error_bound = u as f64 * inner_error.sqrt();
        Ok(Self {
            a,
            w,
            base_error,
            ell,
            u,
            big_a: a * ell * u,
            big_w,
            eps_target,
            inner_error,
            ln_soundness_target,
            ln_soundness_bound,
            completeness_error_bound,
            meets_inner_target: inner_error <= eps_target,
            meets_soundness_target: ln_soundness_bound <= ln_soundness_target,
            meets_completeness: completeness_error_bound < 1.0 / 3.0,
        })
    }

    pub fn is_valid(&self) -> bool {
        self.meets_inner_target && self.meets_soundness_target && self.meets_completeness
    }

    pub fn soundness_target(&self) -> f64 {
        self.ln_soundness_target.exp()
    }
}

/// Knobs for [`plan_amplification`]. Unset constants are replaced by the
/// smallest counts that satisfy every target exactly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanRequest {
    pub a: usize,
    pub w: usize,
    pub base_error: f64,
    pub c_ell: Option<f64>,
    pub c_u: Option<f64>,
}

impl PlanRequest {
    pub fn new(a: usize, w: usize) -> Self {
        Self { a, w, base_error: DEFAULT_BASE_ERROR, c_ell: None, c_u: None }
    }
}

fn min_outer(a: usize, w: usize, base: f64, ell: usize) -> Result<Option<AmplificationPlan>> {
    let eps = tails::majority_tail(ell, base);
    let u_cap = if eps > 0.0 { (1.0 / (3.0 * eps.sqrt())).ceil() as usize } else { MAX_REPETITIONS };
    let target = -((w * ell) as f64) * 5f64.ln();
    let found = (1..=u_cap.min(MAX_REPETITIONS)).step_by(2).find(|&u| tails::ln_majority_tail(u, eps) <= target);
    match found {
        Some(u) => {
            let plan = AmplificationPlan::manual(a, w, base, ell, u)?;
            Ok(plan.is_valid().then_some(plan))
        }
        None => Ok(None),
    }
}

/// Choose `(ℓ, u)` for witness width `w ≥ 2`.
///
/// Without constants, `ℓ` is the smallest odd count that meets the inner
/// target and admits an outer count meeting both the soundness target
/// `5^{-wℓ}` and the completeness requirement `u·√ε_ℓ < 1/3`, and `u` is the
/// smallest such count.
pub fn plan_amplification(req: PlanRequest) -> Result<AmplificationPlan> {
    let PlanRequest { a, w, base_error, c_ell, c_u } = req;
    if w < 2 {
        return Err(Error::Precondition(format!("witness width {w} < 2")));
    }
    if !(0.0..0.5).contains(&base_error) {
        return Err(Error::Precondition(format!("base error {base_error} not below 1/2")));
    }
    let eps_target = inner_error_target(w);
    let log_w = (w as f64).log2();
    let ells: Vec<usize> = match c_ell {
        Some(c) => vec![tails::odd_ceil(c * log_w)],
        None => {
            let start = min_inner_repetitions(base_error, eps_target)
                .ok_or_else(|| Error::PlanRejected("inner target unreachable".into()))?;
            (start..=MAX_REPETITIONS).step_by(2).collect()
        }
    };
    for ell in ells {
        let inner = tails::majority_tail(ell, base_error);
        if inner > eps_target {
            return Err(Error::PlanRejected(format!(
                "inner majority of {ell} leaves error {inner:.3e} above {eps_target:.3e}"
            )));
        }
        match c_u {
            Some(c) => {
                let u = tails::odd_ceil(c * (w * ell) as f64);
                let plan = AmplificationPlan::manual(a, w, base_error, ell, u)?;
                if !plan.is_valid() {
                    return Err(Error::PlanRejected(format!(
                        "u = {u} misses a target (soundness {}, completeness {})",
                        plan.meets_soundness_target, plan.meets_completeness
                    )));
                }
                return Ok(plan);
            }
            None => {
                if let Some(plan) = min_outer(a, w, base_error, ell)? {
                    return Ok(plan);
                }
                if c_ell.is_some() {
                    return Err(Error::PlanRejected(format!("no outer count works with ℓ = {ell}")));
                }
            }
        }
    }
    Err(Error::PlanRejected("no feasible plan within the repetition budget".into()))
}

fn check_bob_read_only(p: &OneWayQmaProtocol) -> Result<()> {
    let bob = p.bob_qubits();
    if p.circuit().gates().iter().any(|g| g.targets().iter().any(|q| bob.contains(q))) {
        return Err(Error::Precondition("verifier writes to Bob's input register".into()));
    }
    Ok(())
}

fn budget(n: usize) -> Result<()> {
    if n > MAX_STATEVECTOR_QUBITS {
        return Err(Error::QubitBudget { needed: n, limit: MAX_STATEVECTOR_QUBITS });
    }
    Ok(())
}

/// Copy `k` of a protocol's qubits inside a layout holding `copies` side by side.
fn copy_map(s: RegisterSizes, k: usize, advice_base: usize, witness_base: usize, ancilla_base: usize) -> Vec<usize> {
    let mut map = Vec::with_capacity(s.total());
    map.extend(0..s.bob_input);
    map.extend((0..s.advice).map(|i| advice_base + k * s.advice + i));
    map.extend((0..s.witness).map(|i| witness_base + k * s.witness + i));
    map.extend((0..s.ancilla).map(|i| ancilla_base + k * s.ancilla + i));
    map
}

/// `ℓ` parallel copies with a reversible majority of their answers.
pub fn build_inner(p: &OneWayQmaProtocol, ell: usize) -> Result<OneWayQmaProtocol> {
    if ell == 0 {
        return Err(Error::Precondition("ℓ must be positive".into()));
    }
    check_bob_read_only(p)?;
    if ell == 1 {
        // a majority of one vote is the vote itself
        return Ok(p.clone());
    }
    let s = p.sizes();
    let cw = circuit::counter_width(ell);
    let ancilla = s.ancilla * ell + cw + 1;
    let sizes = RegisterSizes { bob_input: s.bob_input, advice: s.advice * ell, witness: s.witness * ell, ancilla };
    budget(sizes.total())?;
    let adv0 = s.bob_input;
    let wit0 = adv0 + sizes.advice;
    let anc0 = wit0 + sizes.witness;
    let counter: Vec<usize> = (0..cw).map(|i| anc0 + s.ancilla * ell + i).collect();
    let out = anc0 + s.ancilla * ell + cw;
    let mut c = UnitaryCircuit::new(sizes.total());
    let mut votes = Vec::with_capacity(ell);
    for k in 0..ell {
        let map = copy_map(s, k, adv0, wit0, anc0);
        c.append_mapped(p.circuit(), &map)?;
        votes.push(map[p.accept_qubit()]);
    }
    c.extend(circuit::majority(&votes, &counter, out))?;
    OneWayQmaProtocol::new(sizes, AliceEncoder::Power(Box::new(p.alice().clone()), ell), c, out)
}

/// `u` sequential invocations sharing one witness register.
///
/// Ancillas of the inner verifier are reused across invocations after each
/// uncompute; this is exact whenever every invocation hands them back clean,
/// which holds for verifiers that read the witness classically.
pub fn build_outer(inner: &OneWayQmaProtocol, u: usize) -> Result<OneWayQmaProtocol> {
    if u == 0 {
        return Err(Error::Precondition("u must be positive".into()));
    }
    check_bob_read_only(inner)?;
    if u == 1 {
        return Ok(inner.clone());
    }
    let s = inner.sizes();
    let tw = circuit::counter_width(u);
    let sizes = RegisterSizes {
        bob_input: s.bob_input,
        advice: s.advice * u,
        witness: s.witness,
        ancilla: s.ancilla + tw + 1,
    };
    budget(sizes.total())?;
    let adv0 = s.bob_input;
    let wit0 = adv0 + sizes.advice;
    let anc0 = wit0 + s.witness;
    let tally: Vec<usize> = (0..tw).map(|i| anc0 + s.ancilla + i).collect();
    let out = anc0 + s.ancilla + tw;
    let mut c = UnitaryCircuit::new(sizes.total());
    let undo = inner.circuit().inverse();
    for t in 0..u {
        let mut map = Vec::with_capacity(s.total());
        map.extend(0..s.bob_input);
        map.extend((0..s.advice).map(|i| adv0 + t * s.advice + i));
        map.extend((0..s.witness).map(|i| wit0 + i));
        map.extend((0..s.ancilla).map(|i| anc0 + i));
        c.append_mapped(inner.circuit(), &map)?;
        c.extend(circuit::increment(&tally, &[map[inner.accept_qubit()]]))?;
        c.append_mapped(&undo, &map)?;
    }
    c.extend(circuit::flip_if_in_range(&tally, tails::majority_threshold(u), u, out))?;
    OneWayQmaProtocol::new(sizes, AliceEncoder::Power(Box::new(inner.alice().clone()), u), c, out)
}

/// Widen the witness register with `extra` idle qubits.
pub fn pad_witness(p: &OneWayQmaProtocol, extra: usize) -> Result<OneWayQmaProtocol> {
    let s = p.sizes();
    let sizes = RegisterSizes { witness: s.witness + extra, ..s };
    let cut = s.bob_input + s.advice + s.witness;
    let map: Vec<usize> = (0..s.total()).map(|q| if q < cut { q } else { q + extra }).collect();
    let mut c = UnitaryCircuit::new(sizes.total());
    c.append_mapped(p.circuit(), &map)?;
    OneWayQmaProtocol::new(sizes, p.alice().clone(), c, map[p.accept_qubit()])
}

/// Acceptance of the amplified verifier on one input pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AmplifiedAcceptance {
    pub x: u64,
    pub y: u64,
    pub base_lambda: f64,
    /// Best inner acceptance (exact for any verifier).
    pub inner_lambda: f64,
    /// Bounds on the best outer acceptance; equal when `exact`.
    pub outer_lower: f64,
    pub outer_upper: f64,
    pub ln_outer_upper: f64,
    pub exact: bool,
}

/// Best acceptance after both layers, without building the circuits.
///
/// The inner operator is a symmetric polynomial in commuting copies of the
/// base witness operator, so its top eigenvalue is the majority tail at the
/// base top eigenvalue. For classical-readout verifiers the outer invocations
/// act diagonally on the witness basis, so the outer value is again a
/// majority tail. Otherwise the outer value is bracketed by the sequential
/// union bound below and the fresh-advice argument above.
pub fn amplified_acceptance(p: &OneWayQmaProtocol, plan: &AmplificationPlan, x: u64, y: u64) -> Result<AmplifiedAcceptance> {
    let (base_lambda, _) = optimal_witness(p, x, y)?;
    let inner_lambda = tails::majority_tail(plan.ell, base_lambda);
    let exact = p.is_classical_readout(x, y)?;
    let ln_upper = tails::ln_majority_tail(plan.u, inner_lambda);
    let upper = ln_upper.exp();
    let lower = if exact { upper } else { (1.0 - plan.u as f64 * (1.0 - inner_lambda).max(0.0).sqrt()).max(0.0) };
    Ok(AmplifiedAcceptance {
        x,
        y,
        base_lambda,
        inner_lambda,
        outer_lower: lower,
        outer_upper: upper,
        ln_outer_upper: ln_upper,
        exact,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AmplificationAudit {
    pub plan: AmplificationPlan,
    pub records: Vec<AmplifiedAcceptance>,
    /// `max` over no-instances of `ln` outer acceptance.
    pub ln_max_no: f64,
    /// Worst completeness error over yes-instances.
    pub max_completeness_error: f64,
    pub soundness_pass: bool,
    pub completeness_pass: bool,
}

/// Audit an amplified protocol against `5^{-W}` soundness and 1/3 completeness error.
pub fn audit_amplification(p: &OneWayQmaProtocol, f: &CommunicationFunction, plan: &AmplificationPlan) -> Result<AmplificationAudit> {
    let records: Vec<AmplifiedAcceptance> = f
        .entries()
        .map(|(x, y, _)| amplified_acceptance(p, plan, x, y))
        .collect::<Result<_>>()?;
    let mut ln_max_no = f64::NEG_INFINITY;
    let mut max_completeness_error: f64 = 0.0;
    for (r, (_, _, fv)) in records.iter().zip(f.entries()) {
        if fv {
            max_completeness_error = max_completeness_error.max(1.0 - r.outer_lower);
        } else {
            ln_max_no = ln_max_no.max(r.ln_outer_upper);
        }
    }
    Ok(AmplificationAudit {
        soundness_pass: ln_max_no <= plan.ln_soundness_target,
        completeness_pass: max_completeness_error <= 1.0 / 3.0,
        plan: plan.clone(),
        records,
        ln_max_no,
        max_completeness_error,
    })
}

/// One inner invocation (run, read answer, uncompute) as an instrument on the
/// witness register with fresh advice and clean ancillas.
pub fn inner_instrument(inner: &OneWayQmaProtocol, x: u64, y: u64) -> Result<Instrument> {
    let advice = inner.encode(x)?;
    let witness: Vec<usize> = inner.witness_qubits().collect();
    let inputs: Vec<Vector> = (0..1usize << witness.len())
        .map(|j| inner.input_state(y, &advice, j))
        .collect::<Result<_>>()?;
    Instrument::from_circuit_inputs(inner.circuit(), &witness, &inputs, inner.accept_qubit())
}

/// Exact outer acceptance for witness state `rho`, following every outcome
/// history of `u` invocations of the inner instrument. Also returns the
/// largest conditional acceptance seen at any step.
pub fn outer_acceptance_by_histories(ins: &Instrument, u: usize, rho: &Mat) -> (f64, f64) {
    // layer[k] holds one unnormalized witness state per history with k accepts
    let mut worst_conditional: f64 = 0.0;
    let mut layer: Vec<Vec<Mat>> = vec![vec![rho.clone()]];
    for _ in 0..u {
        let mut next: Vec<Vec<Mat>> = vec![Vec::new(); layer.len() + 1];
        for (k, states) in layer.iter().enumerate() {
            for st in states {
                let p = st.trace().re;
                if p > 1e-15 {
                    worst_conditional = worst_conditional.max(ins.probability(1, st) / p);
                }
                next[k].push(ins.apply(0, st));
                next[k + 1].push(ins.apply(1, st));
            }
        }
        layer = next;
    }
    let accept: f64 = layer
        .iter()
        .enumerate()
        .filter(|(k, _)| *k >= tails::majority_threshold(u))
        .flat_map(|(_, v)| v.iter().map(|m| m.trace().re))
        .sum();
    (accept.clamp(0.0, 1.0), worst_conditional)
}
