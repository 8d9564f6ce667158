//! Short tags for long strings. A tag is `((α·v + β) mod p) mod 2^m`, where
//! `v` is the string read as an integer behind a leading 1 (so strings of
//! different lengths never share a value). The family over `(α, β) ∈ Z_p²`
//! is pairwise independent before the final truncation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding;

pub const MAX_TAG_BITS: u32 = 32;

/// The hash family: modulus and tag width.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FingerprintFamily {
    pub p: u64,
    pub m: u32,
}

/// One member of the family, i.e. a drawn key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FingerprintScheme {
    pub p: u64,
    pub m: u32,
    pub alpha: u64,
    pub beta: u64,
}

impl FingerprintFamily {
    /// `p` must be prime and at least `2^{m+2}`, which keeps the truncation
    /// bias under a factor of two.
    pub fn new(p: u64, m: u32) -> Result<Self> {
        if m == 0 || m > MAX_TAG_BITS {
            return Err(Error::OutOfDomain(format!("tag width {m} outside 1..={MAX_TAG_BITS}")));
        }
        if !primal::is_prime(p) {
            return Err(Error::OutOfDomain(format!("modulus {p} is not prime")));
        }
        if p < 1u64 << (m + 2) {
            return Err(Error::OutOfDomain(format!("modulus {p} below 2^{}", m + 2)));
        }
        Ok(Self { p, m })
    }

    /// Smallest prime family that can tag strings of up to `bits` bits.
    pub fn for_capacity(bits: usize, m: u32) -> Result<Self> {
        if bits > 61 {
            return Err(Error::Capacity { len: bits, capacity: 61 });
        }
        let floor = (1u64 << (bits + 1)).max(1u64 << (m.min(MAX_TAG_BITS) + 2));
        let p = (floor..).find(|&q| primal::is_prime(q)).expect("primes are unbounded");
        Self::new(p, m)
    }

    /// Longest string that can be tagged.
    pub fn capacity(&self) -> usize {
        // need 2^{len+1} ≤ p
        (63 - self.p.leading_zeros() as usize).saturating_sub(1)
    }

    pub fn draw(&self, rng: &mut impl Rng) -> FingerprintScheme {
        FingerprintScheme { p: self.p, m: self.m, alpha: rng.gen_range(0..self.p), beta: rng.gen_range(0..self.p) }
    }

    pub fn with_key(&self, alpha: u64, beta: u64) -> FingerprintScheme {
        FingerprintScheme { p: self.p, m: self.m, alpha: alpha % self.p, beta: beta % self.p }
    }

    /// Keys under which `a` and `b` get the same tag, counted over all `p²` keys.
    pub fn exact_collisions(&self, a: &[bool], b: &[bool]) -> Result<(u64, u64)> {
        let (va, vb) = (self.value(a)?, self.value(b)?);
        let mut hits = 0u64;
        for alpha in 0..self.p {
            for beta in 0..self.p {
                let s = self.with_key(alpha, beta);
                hits += (s.tag_value(va) == s.tag_value(vb)) as u64;
            }
        }
        Ok((hits, self.p * self.p))
    }

    /// Fraction of `draws` sampled keys that collide on `a` and `b`.
    pub fn sampled_collision_rate(&self, a: &[bool], b: &[bool], draws: usize, seed: u64) -> Result<f64> {
        let (va, vb) = (self.value(a)?, self.value(b)?);
        let mut rng = seeding::rng(seed);
        let hits = (0..draws)
            .filter(|_| {
                let s = self.draw(&mut rng);
                s.tag_value(va) == s.tag_value(vb)
            })
            .count();
        Ok(hits as f64 / draws.max(1) as f64)
    }

    /// Collision rate averaged over every pair of distinct `len`-bit strings,
    /// with `draws` sampled keys. Returns `(rate, pairs × draws)`.
    pub fn sampled_all_pairs_rate(&self, len: usize, draws: usize, seed: u64) -> Result<(f64, u64)> {
        if len > self.capacity().min(16) {
            return Err(Error::Capacity { len, capacity: self.capacity().min(16) });
        }
        if self.m > 20 {
            return Err(Error::OutOfDomain(format!("tag width {} too wide to histogram", self.m)));
        }
        let values: Vec<u64> = (0..1u64 << len).map(|x| self.value(&bits_of(x, len))).collect::<Result<_>>()?;
        let mut rng = seeding::rng(seed);
        let mut counts = vec![0u64; 1 << self.m];
        let mut hits = 0u64;
        for _ in 0..draws {
            let s = self.draw(&mut rng);
            counts.iter_mut().for_each(|c| *c = 0);
            for &v in &values {
                counts[s.tag_value(v) as usize] += 1;
            }
            hits += counts.iter().map(|c| c * c.saturating_sub(1) / 2).sum::<u64>();
        }
        let n = values.len() as u64;
        let trials = n * (n - 1) / 2 * draws as u64;
        Ok((hits as f64 / trials.max(1) as f64, trials))
    }

    fn value(&self, data: &[bool]) -> Result<u64> {
        let capacity = self.capacity();
        if data.len() > capacity {
            return Err(Error::Capacity { len: data.len(), capacity });
        }
        Ok(data.iter().fold(1u64, |v, &b| (v << 1) | b as u64))
    }
}

impl FingerprintScheme {
    pub fn family(&self) -> FingerprintFamily {
        FingerprintFamily { p: self.p, m: self.m }
    }

    fn tag_value(&self, v: u64) -> u64 {
        let h = (self.alpha as u128 * v as u128 + self.beta as u128) % self.p as u128;
        h as u64 & ((1u64 << self.m) - 1)
    }

    pub fn fingerprint(&self, data: &[bool]) -> Result<u64> {
        Ok(self.tag_value(self.family().value(data)?))
    }

    pub fn check(&self, data: &[bool], tag: u64) -> Result<bool> {
        Ok(self.fingerprint(data)? == tag)
    }
}

/// Bits of `x`, most significant first, `len` of them.
pub fn bits_of(x: u64, len: usize) -> Vec<bool> {
    (0..len).rev().map(|k| (x >> k) & 1 == 1).collect()
}
