//! Exact binomial and Poisson-binomial tails, evaluated in the log domain so
//! that probabilities far below `f64::MIN_POSITIVE` remain comparable.

fn ln_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln P[Bin(n, p) >= k]`.
pub fn ln_binomial_tail(n: usize, p: f64, k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    if k > n || p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return 0.0;
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    // ln C(n, j) built incrementally from ln C(n, 0) = 0
    let mut ln_c = 0.0;
    let mut acc = f64::NEG_INFINITY;
    for j in 0..=n {
        if j > 0 {
            ln_c += ((n - j + 1) as f64).ln() - (j as f64).ln();
        }
        if j >= k {
            acc = ln_add(acc, ln_c + j as f64 * lp + (n - j) as f64 * lq);
        }
    }
    acc.min(0.0)
}

pub fn binomial_tail(n: usize, p: f64, k: usize) -> f64 {
    ln_binomial_tail(n, p, k).exp()
}

/// Smallest count that forms a strict majority of `n`.
pub fn majority_threshold(n: usize) -> usize {
    n / 2 + 1
}

/// Probability that a strict majority of `n` independent trials succeed.
pub fn majority_tail(n: usize, p: f64) -> f64 {
    binomial_tail(n, p, majority_threshold(n))
}

pub fn ln_majority_tail(n: usize, p: f64) -> f64 {
    ln_binomial_tail(n, p, majority_threshold(n))
}

/// Distribution of the number of successes among independent trials with
/// the given success probabilities.
pub fn poisson_binomial(ps: &[f64]) -> Vec<f64> {
    let mut dist = vec![1.0];
    for &p in ps {
        let mut next = vec![0.0; dist.len() + 1];
        for (k, &d) in dist.iter().enumerate() {
            next[k] += d * (1.0 - p);
            next[k + 1] += d * p;
        }
        dist = next;
    }
    dist
}

pub fn poisson_binomial_at_least(ps: &[f64], k: usize) -> f64 {
    poisson_binomial(ps).iter().skip(k).sum::<f64>().clamp(0.0, 1.0)
}

/// Smallest odd `n` with `majority_tail(n, p) <= target`, searching up to `max_n`.
pub fn min_odd_majority(p: f64, target: f64, max_n: usize) -> Option<usize> {
    let ln_target = target.ln();
    (1..=max_n).step_by(2).find(|&n| ln_majority_tail(n, p) <= ln_target)
}

/// Round up to the next odd integer.
pub fn odd_ceil(x: f64) -> usize {
    let n = x.ceil().max(1.0) as usize;
    if n.is_multiple_of(2) { n + 1 } else { n }
}
