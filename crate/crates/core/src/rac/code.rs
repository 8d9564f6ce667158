use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding;

/// Relative distance every shipped code must reach.
pub const TARGET_RELATIVE_DISTANCE: f64 = 1.0 / 8.0;
/// Message width up to which distances are verified by enumeration.
pub const MAX_CODE_WIDTH: usize = 16;
/// Seed behind [`default_code`].
pub const DEFAULT_CODE_SEED: u64 = 0x5eed_c0de;
/// Rate factor behind [`default_code`].
pub const DEFAULT_RATE_FACTOR: usize = 4;
const RETRY_BUDGET: u64 = 4096;

/// Binary linear code `{0,1}^w → {0,1}^W`. Row `k` of the generator is a
/// `w`-bit mask; codeword bit `k` is the parity of `row_k & y`. Message and
/// codeword bits are numbered from the most significant end.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearCode {
    w: usize,
    rows: Vec<u64>,
    verified_min_distance: usize,
    seed: Option<u64>,
}

impl LinearCode {
    /// Build from explicit generator rows and verify the distance by
    /// enumerating every nonzero message.
    pub fn from_rows(w: usize, rows: Vec<u64>) -> Result<Self> {
        if w == 0 || w > MAX_CODE_WIDTH {
            return Err(Error::OutOfDomain(format!("message width {w} outside 1..={MAX_CODE_WIDTH}")));
        }
        if rows.is_empty() || rows.len() > 64 {
            return Err(Error::OutOfDomain(format!("codeword length {} outside 1..=64", rows.len())));
        }
        if rows.iter().any(|r| r >> w != 0) {
            return Err(Error::OutOfDomain("generator row wider than the message".into()));
        }
        let mut code = Self { w, rows, verified_min_distance: 0, seed: None };
        code.verified_min_distance = (1..1u64 << w).map(|y| code.encode(y).count_ones() as usize).min().unwrap_or(0);
        Ok(code)
    }

    /// `W` copies of a single bit.
    pub fn repetition(big_w: usize) -> Result<Self> {
        Self::from_rows(1, vec![1; big_w])
    }

    pub fn w(&self) -> usize {
        self.w
    }

    /// Codeword length `W`.
    pub fn big_w(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn verified_min_distance(&self) -> usize {
        self.verified_min_distance
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Zero distance means two messages share a codeword.
    pub fn is_injective(&self) -> bool {
        self.verified_min_distance > 0
    }

    pub fn encode(&self, y: u64) -> u64 {
        self.rows.iter().fold(0u64, |acc, r| (acc << 1) | ((r & y).count_ones() as u64 & 1))
    }

    /// Bit `k` of the codeword of `y`.
    pub fn bit(&self, y: u64, k: usize) -> bool {
        (self.rows[k] & y).count_ones() & 1 == 1
    }
}

/// Seeded random linear code of length `c·w` with relative distance at
/// least 1/8, resampling until reached. Width 1 uses the repetition code.
pub fn build_code(w: usize, c: usize, seed: u64) -> Result<LinearCode> {
    if c == 0 {
        return Err(Error::OutOfDomain("rate factor must be positive".into()));
    }
    let big_w = c * w;
    if w == 1 {
        let mut code = LinearCode::repetition(big_w)?;
        code.seed = Some(seed);
        return Ok(code);
    }
    let target = (TARGET_RELATIVE_DISTANCE * big_w as f64).ceil() as usize;
    for attempt in 0..RETRY_BUDGET {
        let mut rng = seeding::trial_rng(seed, attempt);
        let rows: Vec<u64> = (0..big_w).map(|_| rng.gen::<u64>() & ((1u64 << w) - 1)).collect();
        let mut code = LinearCode::from_rows(w, rows)?;
        if code.verified_min_distance >= target.max(1) {
            code.seed = Some(seed);
            return Ok(code);
        }
    }
    Err(Error::CodeSearch(format!("no [{big_w}, {w}] code with distance {target} in {RETRY_BUDGET} draws")))
}

/// The shipped code for width `w`.
pub fn default_code(w: usize) -> Result<LinearCode> {
    build_code(w, DEFAULT_RATE_FACTOR, DEFAULT_CODE_SEED)
}
