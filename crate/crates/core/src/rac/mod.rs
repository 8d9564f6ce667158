//! Classical Merlin-aided random access codes.
//!
//! Alice holds an `N`-bit string `X`, split into `a` blocks `Y_0..Y_{a-1}` of
//! `w` bits each. She picks a uniform codeword position `k`, and sends `k`
//! together with bit `k` of every encoded block. Merlin sends the block that
//! contains the queried bit. Bob re-encodes Merlin's block, compares position
//! `k` with Alice's bit for that block and, if they agree, reads the answer
//! out of Merlin's block.

pub mod code;
pub mod fingerprint;
pub mod reduce;

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding;

pub use code::{build_code, default_code, LinearCode};

/// Shape of a protocol instance. Strings are numbered from the most
/// significant bit; `X` is zero-padded on the right up to `a·w` bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RacParams {
    pub n: usize,
    pub a: usize,
    pub w: usize,
}

impl RacParams {
    pub fn new(n: usize, a: usize, w: usize) -> Result<Self> {
        if n == 0 || a == 0 || w == 0 {
            return Err(Error::OutOfDomain(format!("need n, a, w ≥ 1, got ({n}, {a}, {w})")));
        }
        if a * w < n {
            return Err(Error::OutOfDomain(format!("{a} blocks of {w} bits cannot hold {n} bits")));
        }
        if a * w > 64 {
            return Err(Error::OutOfDomain(format!("padded length {} exceeds 64", a * w)));
        }
        Ok(Self { n, a, w })
    }

    /// Fewest blocks of width `w` covering `n` bits.
    pub fn covering(n: usize, w: usize) -> Result<Self> {
        if w == 0 {
            return Err(Error::OutOfDomain("block width must be positive".into()));
        }
        Self::new(n, n.div_ceil(w), w)
    }

    pub fn padded_len(&self) -> usize {
        self.a * self.w
    }

    fn check_x(&self, x: u64) -> Result<()> {
        if self.n < 64 && x >> self.n != 0 {
            return Err(Error::OutOfDomain(format!("input {x:#x} wider than {} bits", self.n)));
        }
        Ok(())
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::OutOfDomain(format!("index {i} outside 0..{} (padding is not queryable)", self.n)));
        }
        Ok(())
    }

    /// Bit `i` of `X`.
    pub fn x_bit(&self, x: u64, i: usize) -> bool {
        (x >> (self.n - 1 - i)) & 1 == 1
    }

    /// Block `j` of the padded string.
    pub fn block(&self, x: u64, j: usize) -> u64 {
        let padded = x << (self.padded_len() - self.n);
        (padded >> (self.padded_len() - (j + 1) * self.w)) & mask(self.w)
    }

    /// Block holding bit `i`, and the bit's offset within it.
    pub fn locate(&self, i: usize) -> (usize, usize) {
        (i / self.w, i % self.w)
    }

    /// Bit at `offset` of a `w`-bit block.
    pub fn block_bit(&self, y: u64, offset: usize) -> bool {
        (y >> (self.w - 1 - offset)) & 1 == 1
    }
}

fn mask(bits: usize) -> u64 {
    if bits >= 64 { u64::MAX } else { (1u64 << bits) - 1 }
}

/// What Merlin sends, as a function of the full input.
#[derive(Clone, Copy, Debug)]
pub enum MerlinStrategy {
    Honest,
    Constant(u64),
    Custom(fn(u64, usize) -> u64),
}

impl MerlinStrategy {
    pub fn message(&self, params: &RacParams, x: u64, i: usize) -> u64 {
        match self {
            Self::Honest => params.block(x, params.locate(i).0),
            Self::Constant(y) => *y & mask(params.w),
            Self::Custom(f) => f(x, i) & mask(params.w),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accept,
    Reject,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AliceMessage {
    /// Codeword position, 0-based.
    pub k: usize,
    /// Bit `k` of each encoded block.
    pub bits: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RacTranscript {
    pub alice_message: AliceMessage,
    pub merlin_message: u64,
    pub bob_verdict: Verdict,
    pub bob_output: Option<bool>,
}

fn check_code(code: &LinearCode, params: &RacParams) -> Result<()> {
    if code.w() != params.w {
        return Err(Error::DimensionMismatch(code.w(), params.w));
    }
    Ok(())
}

pub fn alice_message(x: u64, k: usize, code: &LinearCode, params: &RacParams) -> AliceMessage {
    AliceMessage { k, bits: (0..params.a).map(|j| code.bit(params.block(x, j), k)).collect() }
}

/// Bob's decision given Alice's message and Merlin's block. Abstains on reject.
pub fn bob_decide(i: usize, alice: &AliceMessage, merlin: u64, code: &LinearCode, params: &RacParams) -> (Verdict, Option<bool>) {
    let (j, offset) = params.locate(i);
    if code.bit(merlin, alice.k) == alice.bits[j] {
        (Verdict::Accept, Some(params.block_bit(merlin, offset)))
    } else {
        (Verdict::Reject, None)
    }
}

/// One run of the protocol with Alice's position drawn from `seed`.
pub fn rac_round(x: u64, i: usize, code: &LinearCode, params: &RacParams, merlin: MerlinStrategy, seed: u64) -> Result<RacTranscript> {
    check_code(code, params)?;
    params.check_x(x)?;
    params.check_index(i)?;
    let k = seeding::rng(seed).gen_range(0..code.big_w());
    let alice = alice_message(x, k, code, params);
    let msg = merlin.message(params, x, i);
    let (bob_verdict, bob_output) = bob_decide(i, &alice, msg, code, params);
    Ok(RacTranscript { alice_message: alice, merlin_message: msg, bob_verdict, bob_output })
}

/// Exact probability over Alice's position that Bob accepts `merlin`.
pub fn acceptance_probability(x: u64, i: usize, merlin: u64, code: &LinearCode, params: &RacParams) -> Result<f64> {
    check_code(code, params)?;
    params.check_x(x)?;
    params.check_index(i)?;
    let hits = (0..code.big_w())
        .filter(|&k| bob_decide(i, &alice_message(x, k, code, params), merlin, code, params).0 == Verdict::Accept)
        .count();
    Ok(hits as f64 / code.big_w() as f64)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheatProfile {
    pub honest: u64,
    /// Rejection probability for every message other than the honest one.
    pub detection: BTreeMap<u64, f64>,
    /// Cheats whose accepted output differs from the true bit.
    pub flipping: Vec<u64>,
    pub min_flipping_detection: Option<f64>,
}

/// Exact rejection probability of every dishonest Merlin message.
pub fn cheat_detection_profile(x: u64, i: usize, code: &LinearCode, params: &RacParams) -> Result<CheatProfile> {
    check_code(code, params)?;
    params.check_x(x)?;
    params.check_index(i)?;
    let honest = MerlinStrategy::Honest.message(params, x, i);
    let truth = params.x_bit(x, i);
    let offset = params.locate(i).1;
    let mut detection = BTreeMap::new();
    let mut flipping = Vec::new();
    for y in (0..=mask(params.w)).filter(|&y| y != honest) {
        detection.insert(y, 1.0 - acceptance_probability(x, i, y, code, params)?);
        if params.block_bit(y, offset) != truth {
            flipping.push(y);
        }
    }
    let min_flipping_detection = flipping.iter().map(|y| detection[y]).reduce(f64::min);
    Ok(CheatProfile { honest, detection, flipping, min_flipping_detection })
}

/// Independent rounds with fresh positions needed to push a per-round
/// acceptance of `1 − δ` down to 1/3.
pub fn repetitions_for(delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::OutOfDomain(format!("relative distance {delta} outside (0, 1]")));
    }
    if delta == 1.0 {
        return Ok(1);
    }
    Ok(((3f64).ln() / -(1.0 - delta).ln()).ceil().max(1.0) as usize)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RacAudit {
    pub params: RacParams,
    pub big_w: usize,
    pub verified_min_distance: usize,
    pub delta: f64,
    /// Minimum honest acceptance over all `(X, i)`.
    pub completeness: f64,
    /// Honest accepts always carried the right bit.
    pub honest_outputs_correct: bool,
    pub min_detection: f64,
    pub repetitions: usize,
    /// Largest acceptance of an answer-flipping cheat after the repetitions.
    pub soundness_after_r: f64,
    pub completeness_pass: bool,
    pub detection_pass: bool,
    pub soundness_pass: bool,
}

impl RacAudit {
    pub fn pass(&self) -> bool {
        self.completeness_pass && self.detection_pass && self.soundness_pass && self.honest_outputs_correct
    }
}

/// Exhaustive audit over every input and every index.
pub fn audit_rac(code: &LinearCode, params: &RacParams) -> Result<RacAudit> {
    check_code(code, params)?;
    if params.n > 20 {
        return Err(Error::OutOfDomain(format!("exhaustive audit limited to n ≤ 20, got {}", params.n)));
    }
    let big_w = code.big_w();
    let d = code.verified_min_distance();
    let delta = d as f64 / big_w as f64;
    let repetitions = repetitions_for(delta)?;

    struct Row {
        completeness: f64,
        correct: bool,
        min_detection: f64,
    }
    let rows: Vec<Row> = (0..1u64 << params.n)
        .into_par_iter()
        .map(|x| -> Result<Row> {
            let mut row = Row { completeness: 1.0, correct: true, min_detection: 1.0 };
            for i in 0..params.n {
                let honest = MerlinStrategy::Honest.message(params, x, i);
                row.completeness = row.completeness.min(acceptance_probability(x, i, honest, code, params)?);
                for k in 0..big_w {
                    let (v, out) = bob_decide(i, &alice_message(x, k, code, params), honest, code, params);
                    row.correct &= v == Verdict::Reject || out == Some(params.x_bit(x, i));
                }
                if let Some(m) = cheat_detection_profile(x, i, code, params)?.min_flipping_detection {
                    row.min_detection = row.min_detection.min(m);
                }
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let completeness = rows.iter().map(|r| r.completeness).fold(1.0, f64::min);
    let min_detection = rows.iter().map(|r| r.min_detection).fold(1.0, f64::min);
    let soundness_after_r = (1.0 - min_detection).powi(repetitions as i32);
    Ok(RacAudit {
        params: *params,
        big_w,
        verified_min_distance: d,
        delta,
        completeness,
        honest_outputs_correct: rows.iter().all(|r| r.correct),
        min_detection,
        repetitions,
        soundness_after_r,
        completeness_pass: completeness == 1.0,
        detection_pass: min_detection + 1e-12 >= delta,
        soundness_pass: soundness_after_r <= 1.0 / 3.0,
    })
}
