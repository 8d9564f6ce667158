//! Removing Merlin from a one-way protocol.
//!
//! Bob runs the amplified verifier `Q*` on `9·2^W` uniformly random classical
//! witnesses, counts accepts in a register that is never uncomputed, undoes
//! the verifier after every round and finally accepts iff the count is
//! nonzero. Only Alice's message is reused from round to round, so the whole
//! procedure is a `T`-fold iterate of one averaged reject channel on her
//! register.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amplify::{build_inner, build_outer, AmplificationPlan};
use crate::error::{Error, Result};
use crate::protocol::{optimal_witness, CommunicationFunction, OneWayQmaProtocol};
use crate::qcore::circuit::{self, Gate, UnitaryCircuit, MAX_STATEVECTOR_QUBITS};
use crate::qcore::linalg::{self, Mat, Vector, C64, TOL};
use crate::qcore::metrics::trace_distance_raw;
use crate::qcore::state::MAX_DENSITY_QUBITS;
use crate::qcore::{Instrument, KrausChannel};
use crate::{seeding, tails};

/// Largest witness width the loop is emitted for.
pub const MAX_LOOP_WITNESS: usize = 16;

/// Rounds for witness width `w`: `9·2^w`.
pub fn rounds_for(w: usize) -> u64 {
    9u64 << w
}

/// The soundness-side acceptance bound `9·2^W / √(5^W)`.
pub fn no_instance_bound(w: usize) -> f64 {
    (9f64.ln() + w as f64 * (2f64.ln() - 0.5 * 5f64.ln())).exp()
}

/// The completeness-side acceptance bound `(2/3 − √(N/T))² = 1/9`.
pub const YES_INSTANCE_BOUND: f64 = 1.0 / 9.0;

/// The Merlin-free protocol: a round template plus a round count.
#[derive(Clone, Debug)]
pub struct DemerlinizedProtocol {
    plan: AmplificationPlan,
    base_gates: usize,
    base_qubits: usize,
    base_witness: usize,
    amplified: OneWayQmaProtocol,
    t_rounds: u64,
    counter: Vec<usize>,
    flag: usize,
    round: UnitaryCircuit,
}

/// Amplify `p` per `plan` and wrap it in the witness-enumeration loop.
pub fn demerlinize(p: &OneWayQmaProtocol, plan: &AmplificationPlan) -> Result<DemerlinizedProtocol> {
    let s = p.sizes();
    if plan.w != s.witness || plan.a != s.advice {
        return Err(Error::Precondition(format!(
            "plan is for (a, w) = ({}, {}) but protocol has ({}, {})",
            plan.a, plan.w, s.advice, s.witness
        )));
    }
    let amplified = build_outer(&build_inner(p, plan.ell)?, plan.u)?;
    let big_w = amplified.sizes().witness;
    if big_w > MAX_LOOP_WITNESS {
        return Err(Error::QubitBudget { needed: big_w, limit: MAX_LOOP_WITNESS });
    }
    let t_rounds = rounds_for(big_w);
    let cw = circuit::counter_width(t_rounds as usize);
    let nq = amplified.n_qubits();
    let total = nq + 1 + cw;
    if total > MAX_STATEVECTOR_QUBITS {
        return Err(Error::QubitBudget { needed: total, limit: MAX_STATEVECTOR_QUBITS });
    }
    let flag = nq;
    let counter: Vec<usize> = (nq + 1..total).collect();
    let ident: Vec<usize> = (0..nq).collect();
    let out = amplified.accept_qubit();
    let mut round = UnitaryCircuit::new(total);
    round.append_mapped(amplified.circuit(), &ident)?;
    round.push(Gate::cnot(out, flag))?;
    round.extend(circuit::increment(&counter, &[flag]))?;
    round.push(Gate::cnot(out, flag))?;
    round.append_mapped(&amplified.circuit().inverse(), &ident)?;
    Ok(DemerlinizedProtocol {
        plan: plan.clone(),
        base_gates: p.circuit().gate_count(),
        base_qubits: p.n_qubits(),
        base_witness: s.witness,
        amplified,
        t_rounds,
        counter,
        flag,
        round,
    })
}

impl DemerlinizedProtocol {
    pub fn plan(&self) -> &AmplificationPlan {
        &self.plan
    }

    /// The amplified verifier `Q*`.
    pub fn amplified(&self) -> &OneWayQmaProtocol {
        &self.amplified
    }

    /// Witness width `W` of `Q*`.
    pub fn big_w(&self) -> usize {
        self.amplified.sizes().witness
    }

    pub fn t_rounds(&self) -> u64 {
        self.t_rounds
    }

    pub fn counter_qubits(&self) -> &[usize] {
        &self.counter
    }

    pub fn flag_qubit(&self) -> usize {
        self.flag
    }

    /// One round: `Q*`, copy the answer to the flag, count it, uncopy, `Q*⁻¹`.
    pub fn round_circuit(&self) -> &UnitaryCircuit {
        &self.round
    }

    pub fn n_qubits(&self) -> usize {
        self.round.n_qubits()
    }

    /// The loop unrolled for a fixed coin sequence, each round bracketed by
    /// X gates that load and unload its witness string. Faithful when `Q*`
    /// returns its witness and ancillas clean, which holds for verifiers
    /// with classical readout; in general Bob resets those registers between
    /// rounds, which a unitary circuit cannot express.
    pub fn unrolled(&self, coins: &[u64]) -> Result<UnitaryCircuit> {
        let wq: Vec<usize> = self.amplified.witness_qubits().collect();
        let mut c = UnitaryCircuit::new(self.n_qubits());
        for &z in coins {
            if z >> wq.len() != 0 {
                return Err(Error::OutOfDomain(format!("coin {z} wider than the witness")));
            }
            let load: Vec<Gate> = wq
                .iter()
                .enumerate()
                .filter(|(k, _)| z >> (wq.len() - 1 - k) & 1 == 1)
                .map(|(_, &q)| Gate::x(q))
                .collect();
            c.extend(load.iter().cloned())?;
            c.extend(self.round.gates().iter().cloned())?;
            c.extend(load)?;
        }
        Ok(c)
    }

    /// Instrument of one round with witness string `z`, on Alice's register.
    pub fn round_instrument(&self, y: u64, z: usize) -> Result<Instrument> {
        let q = &self.amplified;
        let da = 1usize << q.sizes().advice;
        let inputs: Vec<Vector> = (0..da)
            .map(|a| {
                let mut e = Vector::zeros(da);
                e[a] = linalg::re(1.0);
                q.input_state(y, &e, z)
            })
            .collect::<Result<_>>()?;
        let advice: Vec<usize> = q.advice_qubits().collect();
        Instrument::from_circuit_inputs(q.circuit(), &advice, &inputs, q.accept_qubit())
    }

    /// The averaged reject channel `Φ₀ = 2^{-W} Σ_z K_{0,z} · K_{0,z}^†`.
    pub fn reject_channel(&self, y: u64) -> Result<KrausChannel> {
        let advice = self.amplified.sizes().advice;
        if advice > MAX_DENSITY_QUBITS {
            return Err(Error::QubitBudget { needed: advice, limit: MAX_DENSITY_QUBITS });
        }
        let instruments: Vec<Instrument> = (0..1usize << self.big_w())
            .into_par_iter()
            .map(|z| self.round_instrument(y, z))
            .collect::<Result<_>>()?;
        let branches: Vec<(&Instrument, u8)> = instruments.iter().map(|i| (i, 0)).collect();
        Ok(KrausChannel::average(&branches))
    }

    fn alice_density(&self, x: u64) -> Result<Mat> {
        Ok(linalg::outer(&self.amplified.encode(x)?))
    }
}

/// Survival operators `Φ₀^t(ρ)` for `t = 0..=T`, computed without storing
/// them all when only the last is needed.
fn iterate_reject(d: &DemerlinizedProtocol, x: u64, y: u64, mut visit: impl FnMut(u64, &Mat)) -> Result<f64> {
    let phi = d.reject_channel(y)?;
    let mut st = d.alice_density(x)?;
    visit(0, &st);
    for t in 1..=d.t_rounds {
        st = phi.apply(&st);
        visit(t, &st);
    }
    Ok(linalg::trace(&st).re)
}

/// Exact acceptance `1 − tr Φ₀^T(ρ_X)` of the Merlin-free protocol.
pub fn evaluate_demerlinized(d: &DemerlinizedProtocol, x: u64, y: u64) -> Result<f64> {
    let survive = iterate_reject(d, x, y, |_, _| {})?;
    Ok((1.0 - survive).clamp(0.0, 1.0))
}

/// Advice damage after `t` rejecting rounds.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DamageStep {
    pub t: u64,
    /// Probability that rounds `1..=t` all rejected.
    pub survival: f64,
    /// Acceptance chance of round `t` given earlier rejects.
    pub round_accept: f64,
    /// Trace distance of the conditioned advice from Alice's original state.
    pub damage: f64,
    /// `Σ_{k≤t} √(round_accept_k)`.
    pub bound: f64,
}

/// Damage trajectory over all `T` rounds.
///
/// Each round is a projective measurement on advice, witness, ancillas and
/// the coin, so conditioning on reject moves the joint state by at most
/// `√ε`, and tracing out everything but the advice can only shrink that.
pub fn damage_trajectory(d: &DemerlinizedProtocol, x: u64, y: u64) -> Result<Vec<DamageStep>> {
    let rho0 = d.alice_density(x)?;
    let mut steps = Vec::with_capacity(d.t_rounds as usize + 1);
    let mut prev_survival = 1.0;
    let mut bound = 0.0;
    iterate_reject(d, x, y, |t, st| {
        let s = linalg::trace(st).re;
        let round_accept = if t == 0 || prev_survival <= 0.0 { 0.0 } else { (1.0 - s / prev_survival).max(0.0) };
        bound += round_accept.sqrt();
        let damage = if s > 1e-300 { trace_distance_raw(&rho0, &st.unscale(s)) } else { f64::NAN };
        steps.push(DamageStep { t, survival: s, round_accept, damage, bound });
        prev_survival = s;
    })?;
    Ok(steps)
}

/// Estimate acceptance by sampling coins and measurement outcomes round by
/// round on the statevector of `Q*`. Witness and ancillas are measured and
/// re-prepared between rounds. Returns the estimate and its standard error.
pub fn monte_carlo(d: &DemerlinizedProtocol, x: u64, y: u64, shots: u64, seed: u64) -> Result<(f64, f64)> {
    let q = &d.amplified;
    let s = q.sizes();
    let n = q.n_qubits();
    let low = s.witness + s.ancilla;
    let low_mask = (1usize << low) - 1;
    let acc_bit = 1usize << (n - 1 - q.accept_qubit());
    let start = q.input_state(y, &q.encode(x)?, 0)?;
    let inverse = q.circuit().inverse();
    let t_rounds = d.t_rounds;
    let nw = s.witness;
    let accepts: u64 = (0..shots)
        .into_par_iter()
        .map(|shot| {
            let mut rng = seeding::trial_rng(seed, shot);
            let mut v = start.clone();
            for _ in 0..t_rounds {
                let z: usize = rng.gen_range(0..1usize << nw);
                // witness and ancillas are |0⟩ here; load z into the witness bits
                let mut loaded = Vector::zeros(v.len());
                for (i, a) in v.iter().enumerate() {
                    if a.norm_sqr() > 0.0 {
                        loaded[i | (z << s.ancilla)] = *a;
                    }
                }
                v = loaded;
                q.circuit().apply(v.as_mut_slice());
                let p1: f64 = v.iter().enumerate().filter(|(i, _)| i & acc_bit != 0).map(|(_, a)| a.norm_sqr()).sum();
                if rng.gen::<f64>() < p1 {
                    return 1u64;
                }
                keep_where(&mut v, |i| i & acc_bit == 0);
                inverse.apply(v.as_mut_slice());
                // measure witness and ancillas, then return them to |0⟩
                let mut marg = vec![0.0f64; 1 << low];
                for (i, a) in v.iter().enumerate() {
                    marg[i & low_mask] += a.norm_sqr();
                }
                let r = sample(&marg, rng.gen::<f64>());
                let mut reset = Vector::zeros(v.len());
                for (i, a) in v.iter().enumerate() {
                    if i & low_mask == r {
                        reset[i & !low_mask] = *a;
                    }
                }
                let norm = reset.norm();
                v = reset.unscale(norm);
            }
            0
        })
        .sum();
    let p = accepts as f64 / shots as f64;
    Ok((p, (p * (1.0 - p) / shots as f64).sqrt()))
}

fn keep_where(v: &mut Vector, keep: impl Fn(usize) -> bool) {
    let mut norm = 0.0;
    for (i, a) in v.iter_mut().enumerate() {
        if keep(i) {
            norm += a.norm_sqr();
        } else {
            *a = C64::new(0.0, 0.0);
        }
    }
    let norm = norm.sqrt();
    if norm > 0.0 {
        v.unscale_mut(norm);
    }
}

fn sample(weights: &[f64], u: f64) -> usize {
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    for (k, w) in weights.iter().enumerate() {
        acc += w / total;
        if u < acc {
            return k;
        }
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DemerlinRecord {
    pub x: u64,
    pub y: u64,
    pub f: bool,
    pub p_accept: f64,
}

/// Whether `Q*` really has soundness `5^{-W}` on the function's no-instances.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SoundnessPrecondition {
    pub max_no_lambda: f64,
    pub target: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DemerlinAudit {
    pub big_w: usize,
    pub t_rounds: u64,
    pub records: Vec<DemerlinRecord>,
    pub p_accept_yes_min: f64,
    pub p_accept_no_max: f64,
    pub gap: f64,
    pub no_bound: f64,
    pub yes_bound: f64,
    pub gap_bound: f64,
    /// The no-instance bound is at least 1 and so says nothing.
    pub no_bound_vacuous: bool,
    pub precondition: SoundnessPrecondition,
    pub completeness_pass: bool,
    pub soundness_pass: bool,
    pub gap_pass: bool,
}

impl DemerlinAudit {
    pub fn pass(&self) -> bool {
        self.completeness_pass && self.soundness_pass && self.gap_pass
    }
}

/// Exact acceptance on every defined `(X, Y)`, checked against both bounds.
pub fn audit_demerlinized(d: &DemerlinizedProtocol, f: &CommunicationFunction) -> Result<DemerlinAudit> {
    let entries: Vec<(u64, u64, bool)> = f.entries().collect();
    let records: Vec<DemerlinRecord> = entries
        .par_iter()
        .map(|&(x, y, fv)| Ok(DemerlinRecord { x, y, f: fv, p_accept: evaluate_demerlinized(d, x, y)? }))
        .collect::<Result<_>>()?;
    let yes = records.iter().filter(|r| r.f).map(|r| r.p_accept).fold(f64::INFINITY, f64::min);
    let no = records.iter().filter(|r| !r.f).map(|r| r.p_accept).fold(f64::NEG_INFINITY, f64::max);
    let max_no_lambda = entries
        .par_iter()
        .filter(|e| !e.2)
        .map(|&(x, y, _)| optimal_witness(&d.amplified, x, y).map(|(l, _)| l))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let w = d.big_w();
    let target = 5f64.powi(-(w as i32));
    let no_bound = no_instance_bound(w);
    let gap_bound = YES_INSTANCE_BOUND - no_bound;
    // with only yes- or only no-instances the gap is unconstrained
    let gap = if yes.is_finite() && no.is_finite() { yes - no } else { f64::INFINITY };
    Ok(DemerlinAudit {
        big_w: w,
        t_rounds: d.t_rounds,
        p_accept_yes_min: yes,
        p_accept_no_max: no,
        gap,
        no_bound,
        yes_bound: YES_INSTANCE_BOUND,
        gap_bound,
        no_bound_vacuous: no_bound >= 1.0,
        precondition: SoundnessPrecondition { max_no_lambda, target, holds: max_no_lambda <= target + TOL },
        completeness_pass: !yes.is_finite() || yes >= YES_INSTANCE_BOUND - TOL,
        soundness_pass: !no.is_finite() || no <= no_bound + TOL,
        gap_pass: gap >= gap_bound - TOL,
        records,
    })
}

/// Independent repetitions of the whole protocol with a threshold vote.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThresholdPostPass {
    pub repetitions: usize,
    pub threshold: usize,
    pub yes_accept: f64,
    pub no_accept: f64,
}

/// Smallest `k ≤ max_k` (and threshold) lifting the audited separation to
/// 2/3 versus 1/3. `None` when the instances are not separated at all.
pub fn threshold_post_pass(yes_min: f64, no_max: f64, max_k: usize) -> Option<ThresholdPostPass> {
    if yes_min.partial_cmp(&no_max) != Some(std::cmp::Ordering::Greater) {
        return None;
    }
    for k in 1..=max_k {
        for theta in 1..=k {
            let ya = tails::binomial_tail(k, yes_min, theta);
            let na = tails::binomial_tail(k, no_max, theta);
            if ya >= 2.0 / 3.0 && na <= 1.0 / 3.0 {
                return Some(ThresholdPostPass { repetitions: k, threshold: theta, yes_accept: ya, no_accept: na });
            }
        }
    }
    None
}

/// Size of the emitted protocol next to the asymptotic formulas with unit
/// constants.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResourceReport {
    pub base_gates: usize,
    pub base_qubits: usize,
    pub amplified_gates: usize,
    pub amplified_qubits: usize,
    pub rounds: u64,
    pub counter_qubits: usize,
    pub gates_per_round: usize,
    /// Loop gates excluding coin loading: `T · gates_per_round`.
    pub gates: u128,
    /// X gates for loading and unloading coins, worst case `2·W·T`.
    pub coin_gates_max: u128,
    /// Amplified qubits, the flag and the counter.
    pub qubits: usize,
    /// `C · w log²w · 2^W`.
    pub formula_gates: f64,
    /// `S² log² S`.
    pub formula_qubits: f64,
}

pub fn resource_report(d: &DemerlinizedProtocol) -> ResourceReport {
    let per_round = d.round.gate_count();
    let t = d.t_rounds as u128;
    let w = d.base_witness.max(2) as f64;
    let s = d.base_qubits as f64;
    ResourceReport {
        base_gates: d.base_gates,
        base_qubits: d.base_qubits,
        amplified_gates: d.amplified.circuit().gate_count(),
        amplified_qubits: d.amplified.n_qubits(),
        rounds: d.t_rounds,
        counter_qubits: d.counter.len(),
        gates_per_round: per_round,
        gates: t * per_round as u128,
        coin_gates_max: 2 * d.big_w() as u128 * t,
        qubits: d.n_qubits(),
        formula_gates: d.base_gates as f64 * w * w.log2().powi(2) * 2f64.powi(d.big_w() as i32),
        formula_qubits: s * s * s.log2().max(1.0).powi(2),
    }
}

/// The report emitted by the command line.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DemerlinReport {
    #[serde(rename = "W")]
    pub big_w: usize,
    #[serde(rename = "T")]
    pub t_rounds: u64,
    pub p_accept_yes_min: f64,
    pub p_accept_no_max: f64,
    pub gates: u128,
    pub qubits: usize,
    pub bounds: ReportBounds,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportBounds {
    pub yes_min: f64,
    pub no_max: f64,
    pub gap_min: f64,
    pub no_bound_vacuous: bool,
}

impl DemerlinReport {
    pub fn new(audit: &DemerlinAudit, res: &ResourceReport) -> Self {
        Self {
            big_w: audit.big_w,
            t_rounds: audit.t_rounds,
            p_accept_yes_min: audit.p_accept_yes_min,
            p_accept_no_max: audit.p_accept_no_max,
            gates: res.gates,
            qubits: res.qubits,
            bounds: ReportBounds {
                yes_min: audit.yes_bound,
                no_max: audit.no_bound,
                gap_min: audit.gap_bound,
                no_bound_vacuous: audit.no_bound_vacuous,
            },
        }
    }
}
