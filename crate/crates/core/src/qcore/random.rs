//! Random states and operators for seeded experiments.

use rand::Rng;

use super::linalg::{self, c, re, Mat, Vector};

/// Standard normal sample (Box–Muller).
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| c(gaussian(rng), gaussian(rng)))
}

/// Haar-random unit vector.
pub fn random_pure<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vector {
    let v = Vector::from_fn(dim, |_, _| c(gaussian(rng), gaussian(rng)));
    let n = v.norm();
    v.unscale(n)
}

/// Random density matrix of the given rank (induced measure).
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> Mat {
    let g = ginibre(rng, dim, rank.max(1));
    let m = &g * g.adjoint();
    let tr = linalg::trace(&m).re;
    linalg::hermitize(&m.unscale(tr))
}

/// Haar-random unitary via QR with phase correction.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Mat {
    let qr = ginibre(rng, dim, dim).qr();
    let (mut q, r) = qr.unpack();
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / re(d.norm()) } else { re(1.0) };
        for i in 0..dim {
            q[(i, k)] *= phase;
        }
    }
    q
}

/// `U diag(λ) U†` with λ uniform in `[lo, hi]`.
pub fn random_effect_in<R: Rng + ?Sized>(rng: &mut R, dim: usize, lo: f64, hi: f64) -> Mat {
    let u = random_unitary(rng, dim);
    let d = Mat::from_diagonal(&Vector::from_fn(dim, |_, _| re(rng.gen_range(lo..=hi))));
    linalg::hermitize(&(&u * d * u.adjoint()))
}

pub fn random_effect<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Mat {
    random_effect_in(rng, dim, 0.0, 1.0)
}

/// Projector onto a random `rank`-dimensional subspace.
pub fn random_projector<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> Mat {
    let u = random_unitary(rng, dim);
    let cols = u.columns(0, rank.min(dim)).into_owned();
    &cols * cols.adjoint()
}
