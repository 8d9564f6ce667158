//! Independent reference implementations used as test oracles. None of these
//! call into the library's numerics.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use qmacc_core::qcore::{Mat, C64};

/// All eigenvalues of a Hermitian matrix by cyclic Jacobi rotations on the
/// real symmetric embedding `[[A, -B], [B, A]]`. Each eigenvalue appears twice
/// in the embedding; every other one is returned, ascending.
#[allow(clippy::needless_range_loop)]
pub fn jacobi_eigenvalues(h: &Mat) -> Vec<f64> {
    let n = h.nrows();
    let m = 2 * n;
    let mut a = vec![vec![0.0f64; m]; m];
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            a[i][j] = z.re;
            a[i + n][j + n] = z.re;
            a[i][j + n] = -z.im;
            a[i + n][j] = z.im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..m).flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut d: Vec<f64> = (0..m).map(|i| a[i][i]).collect();
    d.sort_by(f64::total_cmp);
    d.into_iter().step_by(2).collect()
}

/// Kronecker product by explicit index arithmetic.
pub fn kron_oracle(a: &Mat, b: &Mat) -> Mat {
    let (ra, ca, rb, cb) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    let mut out = Mat::zeros(ra * rb, ca * cb);
    for i in 0..ra {
        for j in 0..ca {
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Trace out the last `nb` qubits of a matrix on `na + nb` qubits.
pub fn trace_out_tail(m: &Mat, na: usize, nb: usize) -> Mat {
    let (da, db) = (1 << na, 1 << nb);
    let mut out = Mat::zeros(da, da);
    for i in 0..da {
        for j in 0..da {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..db {
                acc += m[(i * db + k, j * db + k)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

fn binom(n: u64, k: u64) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// Exact `P[Bin(n, num/den) ≥ k]` as a rational.
pub fn binomial_tail_exact(n: u64, num: u64, den: u64, k: u64) -> BigRational {
    let mut acc = BigRational::zero();
    let p = BigRational::new(BigInt::from(num), BigInt::from(den));
    let q = BigRational::one() - p.clone();
    for j in k..=n {
        let term = BigRational::from_integer(binom(n, j)) * pow(&p, j) * pow(&q, n - j);
        acc += term;
    }
    acc
}

fn pow(x: &BigRational, e: u64) -> BigRational {
    let mut r = BigRational::one();
    for _ in 0..e {
        r *= x.clone();
    }
    r
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap()
}

/// Smallest odd `n` with exact majority tail at error `num/den` at most `1/target_den`.
pub fn min_odd_majority_exact(num: u64, den: u64, target_den: u64) -> u64 {
    let target = BigRational::new(BigInt::one(), BigInt::from(target_den));
    (1..).step_by(2).find(|&n| binomial_tail_exact(n, num, den, n / 2 + 1) <= target).unwrap()
}

/// Gate-by-gate statevector interpreter written against the gate accessors
/// only. Qubit `q` is bit `n-1-q` of an index; a gate's first target is the
/// most significant bit of its matrix.
pub fn replay(gates: &[qmacc_core::qcore::circuit::Gate], n: usize, state: &mut [C64]) {
    let bit = |q: usize| 1usize << (n - 1 - q);
    for g in gates {
        let t = g.targets();
        let k = t.len();
        let m = g.matrix();
        let tmask: usize = t.iter().map(|&q| bit(q)).sum();
        for base in 0..state.len() {
            if base & tmask != 0 {
                continue;
            }
            if g.controls().iter().any(|&c| base & bit(c) == 0) || g.neg_controls().iter().any(|&c| base & bit(c) != 0) {
                continue;
            }
            let idx: Vec<usize> = (0..1usize << k)
                .map(|s| {
                    let mut i = base;
                    for (j, &q) in t.iter().enumerate() {
                        if s >> (k - 1 - j) & 1 == 1 {
                            i |= bit(q);
                        }
                    }
                    i
                })
                .collect();
            let old: Vec<C64> = idx.iter().map(|&i| state[i]).collect();
            for (r, &i) in idx.iter().enumerate() {
                state[i] = (0..1usize << k).map(|c| m[(r, c)] * old[c]).sum();
            }
        }
    }
}
