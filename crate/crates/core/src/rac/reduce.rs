//! Removing Merlin from a classical protocol by amplifying each candidate
//! message separately and letting Bob try all of them.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::code::LinearCode;
use super::{alice_message, bob_decide, RacParams, Verdict};
use crate::error::{Error, Result};
use crate::{seeding, tails};

pub const MAX_REDUCTION_WIDTH: usize = 12;
pub const MAX_COPIES: usize = 4001;
const MAX_COINS: usize = 1 << 20;
const DP_STATE_CAP: usize = 200_000;

pub type AliceFn = Arc<dyn Fn(u64, usize) -> u64 + Send + Sync>;
pub type BobFn = Arc<dyn Fn(usize, u64, u64) -> bool + Send + Sync>;

/// A randomized protocol with `w`-bit Merlin messages, given as strategy
/// functions. Alice maps `(X, coin)` to a message, coins being uniform over
/// `0..coins`; Bob maps `(i, message, z)` to accept. It succeeds when every
/// 1-bit has some `z` accepted with probability at least 2/3 and every 0-bit
/// has all `z` accepted with probability at most 1/3.
#[derive(Clone)]
pub struct RandomizedRac {
    pub n: usize,
    /// Bits in Alice's message.
    pub a: usize,
    pub w: usize,
    pub coins: usize,
    alice: AliceFn,
    bob: BobFn,
}

impl fmt::Debug for RandomizedRac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RandomizedRac").field("n", &self.n).field("a", &self.a).field("w", &self.w).field("coins", &self.coins).finish()
    }
}

impl RandomizedRac {
    pub fn new(n: usize, a: usize, w: usize, coins: usize, alice: AliceFn, bob: BobFn) -> Result<Self> {
        if n == 0 || n > 63 {
            return Err(Error::OutOfDomain(format!("input length {n} outside 1..=63")));
        }
        if w > MAX_REDUCTION_WIDTH {
            return Err(Error::OutOfDomain(format!("Merlin width {w} above {MAX_REDUCTION_WIDTH}")));
        }
        if coins == 0 || coins > MAX_COINS {
            return Err(Error::OutOfDomain(format!("coin count {coins} outside 1..={MAX_COINS}")));
        }
        Ok(Self { n, a, w, coins, alice, bob })
    }

    /// The code-based protocol in decision form, with `rounds` independent
    /// positions checked against the same Merlin block. Bob accepts when every
    /// check passes and the block says 1.
    pub fn from_code(code: &LinearCode, params: &RacParams, rounds: usize) -> Result<Self> {
        if code.w() != params.w {
            return Err(Error::DimensionMismatch(code.w(), params.w));
        }
        let big_w = code.big_w();
        let coins = big_w
            .checked_pow(rounds as u32)
            .filter(|&c| rounds > 0 && c <= MAX_COINS)
            .ok_or_else(|| Error::OutOfDomain(format!("{big_w}^{rounds} positions exceed the coin budget")))?;
        let k_bits = usize::BITS as usize - (big_w - 1).leading_zeros() as usize;
        let per_round = k_bits + params.a;
        if per_round * rounds > 64 {
            return Err(Error::OutOfDomain("message does not fit 64 bits".into()));
        }
        let (c1, p1) = (code.clone(), *params);
        let alice: AliceFn = Arc::new(move |x, coin| {
            let mut msg = 0u64;
            let mut rest = coin;
            for _ in 0..rounds {
                let m = alice_message(x, rest % big_w, &c1, &p1);
                rest /= big_w;
                msg = (msg << k_bits) | m.k as u64;
                for b in m.bits {
                    msg = (msg << 1) | b as u64;
                }
            }
            msg
        });
        let (c2, p2) = (code.clone(), *params);
        let bob: BobFn = Arc::new(move |i, msg, z| {
            (0..rounds).all(|t| {
                let chunk = msg >> ((rounds - 1 - t) * per_round);
                let k = ((chunk >> p2.a) & ((1 << k_bits) - 1)) as usize;
                let bits = (0..p2.a).map(|j| (chunk >> (p2.a - 1 - j)) & 1 == 1).collect();
                let am = super::AliceMessage { k, bits };
                k < big_w && bob_decide(i, &am, z, &c2, &p2) == (Verdict::Accept, Some(true))
            })
        });
        Self::new(params.n, per_round * rounds, params.w, coins, alice, bob)
    }

    pub fn alice(&self, x: u64, coin: usize) -> u64 {
        (self.alice)(x, coin)
    }

    pub fn bob(&self, i: usize, msg: u64, z: u64) -> bool {
        (self.bob)(i, msg, z)
    }

    pub fn x_bit(&self, x: u64, i: usize) -> bool {
        (x >> (self.n - 1 - i)) & 1 == 1
    }

    pub fn merlin_messages(&self) -> u64 {
        1u64 << self.w
    }

    /// Acceptance probability for each Merlin message, exact over coins.
    pub fn acceptance_by_message(&self, x: u64, i: usize) -> Vec<f64> {
        self.patterns(x, i).1
    }

    /// Per-coin accept pattern over Merlin messages (bit `z` set when `z` is
    /// accepted), as a histogram, plus the per-message acceptance.
    fn patterns(&self, x: u64, i: usize) -> (HashMap<Vec<bool>, usize>, Vec<f64>) {
        let z_count = self.merlin_messages() as usize;
        let mut hist: HashMap<Vec<bool>, usize> = HashMap::new();
        let mut hits = vec![0usize; z_count];
        for coin in 0..self.coins {
            let msg = self.alice(x, coin);
            let pat: Vec<bool> = (0..z_count as u64).map(|z| self.bob(i, msg, z)).collect();
            for (h, &b) in hits.iter_mut().zip(&pat) {
                *h += b as usize;
            }
            *hist.entry(pat).or_default() += 1;
        }
        (hist, hits.into_iter().map(|h| h as f64 / self.coins as f64).collect())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RandomizedAudit {
    pub n: usize,
    pub w: usize,
    pub max_error: f64,
    pub pass: bool,
}

/// Exhaustive check of the Merlin-aided success condition.
pub fn audit_randomized(base: &RandomizedRac) -> Result<RandomizedAudit> {
    check_exhaustive(base.n)?;
    let max_error = (0..1u64 << base.n)
        .into_par_iter()
        .map(|x| {
            (0..base.n)
                .map(|i| {
                    let best = base.acceptance_by_message(x, i).into_iter().fold(0.0, f64::max);
                    if base.x_bit(x, i) { 1.0 - best } else { best }
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(RandomizedAudit { n: base.n, w: base.w, max_error, pass: max_error <= 1.0 / 3.0 + 1e-12 })
}

fn check_exhaustive(n: usize) -> Result<()> {
    if n > 16 {
        return Err(Error::OutOfDomain(format!("exhaustive audit limited to n ≤ 16, got {n}")));
    }
    Ok(())
}

/// Ordinary protocol obtained by sending `copies` independent base messages;
/// Bob takes a majority vote per Merlin message and accepts if any wins.
#[derive(Clone, Debug)]
pub struct ReducedRac {
    pub base: RandomizedRac,
    pub copies: usize,
    /// Majority error per Merlin message for a base error of 1/3.
    pub per_message_error: f64,
    pub seed: u64,
}

impl ReducedRac {
    pub fn message_bits(&self) -> usize {
        self.copies * self.base.a
    }

    /// Bracket on the acceptance probability, exact whenever the per-message
    /// votes can be tracked jointly.
    pub fn acceptance(&self, x: u64, i: usize) -> AcceptBounds {
        let (hist, per_z) = self.base.patterns(x, i);
        let tail: Vec<f64> = per_z.iter().map(|&p| tails::majority_tail(self.copies, p)).collect();
        if tail.len() == 1 {
            return AcceptBounds::exact(tail[0]);
        }
        match any_majority(&hist, self.base.coins, self.copies, per_z.len()) {
            Some(p) => AcceptBounds::exact(p),
            None => AcceptBounds {
                lower: tail.iter().copied().fold(0.0, f64::max),
                upper: tail.iter().sum::<f64>().min(1.0),
                exact: false,
            },
        }
    }

    /// One sampled execution; Alice's coins come from `(seed, trial)`.
    pub fn sample(&self, x: u64, i: usize, trial: u64) -> bool {
        let mut rng = seeding::trial_rng(self.seed, trial);
        let msgs: Vec<u64> = (0..self.copies).map(|_| self.base.alice(x, rng.gen_range(0..self.base.coins))).collect();
        let need = tails::majority_threshold(self.copies);
        (0..self.base.merlin_messages()).any(|z| msgs.iter().filter(|&&m| self.base.bob(i, m, z)).count() >= need)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcceptBounds {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
}

impl AcceptBounds {
    fn exact(p: f64) -> Self {
        Self { lower: p, upper: p, exact: true }
    }
}

/// Probability that at least one message reaches a strict majority, by
/// dynamic programming over vote counts capped at the threshold. `None` when
/// the state space is too large.
fn any_majority(hist: &HashMap<Vec<bool>, usize>, coins: usize, copies: usize, z_count: usize) -> Option<f64> {
    let need = tails::majority_threshold(copies);
    let radix = need + 1;
    let states = radix.checked_pow(z_count as u32).filter(|&s| s <= DP_STATE_CAP)?;
    let pats: Vec<(Vec<bool>, f64)> = hist.iter().map(|(p, &c)| (p.clone(), c as f64 / coins as f64)).collect();
    let mut dist = vec![0.0; states];
    dist[0] = 1.0;
    let mut won = 0.0;
    for _ in 0..copies {
        let mut next = vec![0.0; states];
        for (s, &mass) in dist.iter().enumerate().filter(|(_, m)| **m > 0.0) {
            for (pat, prob) in &pats {
                let (mut t, mut rest, mut place, mut hit) = (0, s, 1, false);
                for &b in pat {
                    let c = rest % radix + b as usize;
                    rest /= radix;
                    hit |= c >= need;
                    t += c * place;
                    place *= radix;
                }
                if hit {
                    won += mass * prob;
                } else {
                    next[t] += mass * prob;
                }
            }
        }
        dist = next;
    }
    Some(won.clamp(0.0, 1.0))
}

/// Copies of a 1/3-error base needed so that each Merlin message errs with
/// probability at most `2^{-2(w+1)}`. No copies are added when `w = 0`.
pub fn copies_for(w: usize) -> Result<usize> {
    if w == 0 {
        return Ok(1);
    }
    let target = 2f64.powi(-2 * (w as i32 + 1));
    tails::min_odd_majority(1.0 / 3.0, target, MAX_COPIES)
        .ok_or_else(|| Error::CopyBudget(format!("error {target:e} needs more than {MAX_COPIES} copies")))
}

pub fn tight_reduction(base: &RandomizedRac, seed: u64) -> Result<ReducedRac> {
    if base.w > MAX_REDUCTION_WIDTH {
        return Err(Error::OutOfDomain(format!("Merlin width {} above {MAX_REDUCTION_WIDTH}", base.w)));
    }
    let copies = copies_for(base.w)?;
    Ok(ReducedRac { base: base.clone(), copies, per_message_error: tails::majority_tail(copies, 1.0 / 3.0), seed })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrdinaryAudit {
    pub n: usize,
    pub w: usize,
    pub copies: usize,
    pub message_bits: usize,
    pub per_message_error: f64,
    /// Worst `Pr[output ≠ x_i]` over all `(X, i)`, upper bound when inexact.
    pub max_error: f64,
    pub all_exact: bool,
    pub pass: bool,
}

/// Exhaustive ordinary success audit: output 1 exactly when `x_i = 1`, with
/// probability at least 2/3.
pub fn audit_ordinary(r: &ReducedRac) -> Result<OrdinaryAudit> {
    let n = r.base.n;
    check_exhaustive(n)?;
    let (max_error, all_exact) = (0..1u64 << n)
        .into_par_iter()
        .map(|x| {
            (0..n).fold((0.0f64, true), |(e, ex), i| {
                let b = r.acceptance(x, i);
                let err = if r.base.x_bit(x, i) { 1.0 - b.lower } else { b.upper };
                (e.max(err), ex && b.exact)
            })
        })
        .reduce(|| (0.0, true), |a, b| (a.0.max(b.0), a.1 && b.1));
    Ok(OrdinaryAudit {
        n,
        w: r.base.w,
        copies: r.copies,
        message_bits: r.message_bits(),
        per_message_error: r.per_message_error,
        max_error,
        all_exact,
        pass: max_error <= 1.0 / 3.0 + 1e-12,
    })
}

/// A deterministic protocol without Merlin: Alice's message for every input
/// and the string Bob decodes from every message.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterministicRac {
    pub n: usize,
    pub a: usize,
    pub encoding: Vec<u64>,
    pub decoding: Vec<u64>,
}

impl DeterministicRac {
    /// Number of `(X, i)` pairs answered wrongly.
    pub fn errors(&self) -> usize {
        (0..1u64 << self.n)
            .map(|x| ((self.decoding[self.encoding[x as usize] as usize] ^ x) & ((1 << self.n) - 1)).count_ones() as usize)
            .sum()
    }
}

/// Complete backtracking search for a deterministic `a`-bit encoding that
/// answers every `(X, i)` correctly. Deterministic answers are 0/1, so this
/// is the same as passing the 2/3 audit.
pub fn find_deterministic_rac(n: usize, a: usize) -> Result<Option<DeterministicRac>> {
    if n == 0 || n > 8 {
        return Err(Error::OutOfDomain(format!("search limited to 1 ≤ n ≤ 8, got {n}")));
    }
    if a > 16 {
        return Err(Error::OutOfDomain(format!("message width {a} above 16")));
    }
    let messages = 1usize << a;
    // decoder[m] = (known bit mask, decoded bits)
    let mut decoder = vec![(0u64, 0u64); messages];
    let mut encoding = vec![0u64; 1 << n];
    let full = (1u64 << n) - 1;

    fn go(x: usize, n: usize, full: u64, decoder: &mut [(u64, u64)], enc: &mut [u64]) -> bool {
        if x == 1 << n {
            return true;
        }
        let mut tried_fresh = false;
        for m in 0..decoder.len() {
            let (known, bits) = decoder[m];
            if known == 0 {
                // fresh messages are interchangeable
                if tried_fresh {
                    continue;
                }
                tried_fresh = true;
            }
            if (bits ^ x as u64) & known != 0 {
                continue;
            }
            let saved = decoder[m];
            // Bob must answer every index for this input, fixing the whole row
            decoder[m] = (full, x as u64);
            enc[x] = m as u64;
            if go(x + 1, n, full, decoder, enc) {
                return true;
            }
            decoder[m] = saved;
        }
        false
    }

    if !go(0, n, full, &mut decoder, &mut encoding) {
        return Ok(None);
    }
    let decoding = decoder.iter().map(|&(_, b)| b).collect();
    Ok(Some(DeterministicRac { n, a, encoding, decoding }))
}
