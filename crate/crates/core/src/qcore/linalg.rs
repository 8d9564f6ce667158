//! Dense complex linear algebra shared by every simulator in the crate.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;
pub type Vector = DVector<C64>;

/// Tolerance for construction invariants (hermiticity, trace, spectrum).
pub const TOL: f64 = 1e-9;
/// Residual tolerance for eigenpairs.
pub const EIG_TOL: f64 = 1e-8;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn identity(dim: usize) -> Mat {
    Mat::identity(dim, dim)
}

pub fn trace(m: &Mat) -> C64 {
    m.diagonal().iter().sum()
}

/// Largest entrywise deviation of `m` from its conjugate transpose.
pub fn hermitian_deviation(m: &Mat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

pub fn ensure_square(m: &Mat) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(m.nrows(), m.ncols()));
    }
    Ok(m.nrows())
}

pub fn ensure_hermitian(m: &Mat) -> Result<()> {
    ensure_square(m)?;
    let dev = hermitian_deviation(m);
    if dev > TOL {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

/// Symmetrize a numerically Hermitian matrix.
pub fn hermitize(m: &Mat) -> Mat {
    (m + m.adjoint()) * re(0.5)
}

/// Full Hermitian eigendecomposition with eigenvalues in ascending order.
/// Column `k` of the returned matrix is the eigenvector for eigenvalue `k`.
pub fn eigh(m: &Mat) -> (Vec<f64>, Mat) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = Mat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn eigvalsh(m: &Mat) -> Vec<f64> {
    eigh(m).0
}

/// Apply a real function to the spectrum of a Hermitian matrix.
pub fn spectral_map(m: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let (vals, vecs) = eigh(m);
    let n = m.nrows();
    let mut scaled = vecs.clone();
    for k in 0..n {
        let s = re(f(vals[k]));
        for i in 0..n {
            scaled[(i, k)] *= s;
        }
    }
    &scaled * vecs.adjoint()
}

/// Principal square root of a PSD matrix; tiny negative eigenvalues are clamped.
pub fn psd_sqrt(m: &Mat) -> Mat {
    spectral_map(m, |x| x.max(0.0).sqrt())
}

/// Sum of singular values.
pub fn trace_norm(m: &Mat) -> f64 {
    m.clone().svd(false, false).singular_values.iter().sum()
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

pub fn outer(v: &Vector) -> Mat {
    v * v.adjoint()
}

pub fn is_power_of_two(n: usize) -> bool {
    n != 0 && n & (n - 1) == 0
}

pub fn log2_exact(n: usize) -> Option<usize> {
    is_power_of_two(n).then(|| n.trailing_zeros() as usize)
}

/// Maximum deviation of `m^† m` from the identity.
pub fn unitarity_deviation(m: &Mat) -> f64 {
    let prod = m.adjoint() * m;
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - re(target)).norm());
        }
    }
    worst
}

/// Largest eigenvalue and a unit eigenvector of a Hermitian matrix.
pub fn top_eigen(h: &Mat) -> Result<(f64, Vector)> {
    ensure_hermitian(h)?;
    let (vals, vecs) = eigh(h);
    let k = vals.len() - 1;
    let v: Vector = vecs.column(k).into_owned();
    Ok((vals[k], v))
}

/// Matrices as nested arrays of `[re, im]` pairs, row-major.
pub fn matrix_to_pairs(m: &Mat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_pairs(rows: &[Vec<[f64; 2]>]) -> Result<Mat> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Format("ragged matrix".into()));
    }
    Ok(Mat::from_fn(n, m, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

pub fn vector_to_pairs(v: &Vector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn vector_from_pairs(v: &[[f64; 2]]) -> Vector {
    Vector::from_iterator(v.len(), v.iter().map(|p| c(p[0], p[1])))
}

/// Serde adapter for [`Mat`] fields.
pub mod mat_serde {
    use super::*;

    pub fn serialize<S: Serializer>(m: &Mat, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_pairs(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Mat, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        matrix_from_pairs(&rows).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for [`Vector`] fields.
pub mod vec_serde {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Vector, s: S) -> std::result::Result<S::Ok, S::Error> {
        vector_to_pairs(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vector, D::Error> {
        let v = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(vector_from_pairs(&v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_squares_back() {
        let m = Mat::from_row_slice(2, 2, &[re(0.75), c(0.1, 0.2), c(0.1, -0.2), re(0.25)]);
        let s = psd_sqrt(&m);
        assert!((&s * &s - &m).norm() < 1e-12);
    }

    #[test]
    fn eigh_sorted_ascending() {
        let m = Mat::from_diagonal(&Vector::from_vec(vec![re(0.9), re(0.2), re(0.5)]));
        let (vals, _) = eigh(&m);
        assert_eq!(vals.len(), 3);
        assert!((vals[0] - 0.2).abs() < 1e-12 && (vals[2] - 0.9).abs() < 1e-12);
    }

    #[test]
    fn pairs_roundtrip() {
        let m = Mat::from_row_slice(2, 2, &[c(1.0, 2.0), c(3.0, -1.0), re(0.0), c(0.5, 0.5)]);
        assert_eq!(matrix_from_pairs(&matrix_to_pairs(&m)).unwrap(), m);
    }
}
