use super::linalg::{self, Mat, Vector};
use super::state::{DensityMatrix, Layout, StateVector};
use crate::error::{Error, Result};

fn same_dim(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(())
}

/// Uhlmann fidelity `‖√ρ √σ‖₁` (not squared), clamped to `[0, 1]`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    let prod = linalg::psd_sqrt(rho.matrix()) * linalg::psd_sqrt(sigma.matrix());
    Ok(linalg::trace_norm(&prod).clamp(0.0, 1.0))
}

/// Half the sum of absolute eigenvalues of `ρ − σ`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    Ok(trace_distance_raw(rho.matrix(), sigma.matrix()).clamp(0.0, 1.0))
}

/// Trace distance on raw (possibly unnormalized) Hermitian matrices.
pub fn trace_distance_raw(a: &Mat, b: &Mat) -> f64 {
    0.5 * linalg::eigvalsh(&(a - b)).iter().map(|x| x.abs()).sum::<f64>()
}

/// Largest eigenvalue with a unit eigenvector, wrapped as a state on a single
/// register named `v`.
pub fn top_eigenpair(h: &Mat) -> Result<(f64, StateVector)> {
    let (lambda, v) = linalg::top_eigen(h)?;
    let residual = (h * &v - &v * linalg::re(lambda)).norm();
    debug_assert!(residual <= linalg::EIG_TOL, "eigen residual {residual}");
    let layout = Layout::for_dim("v", h.nrows())?;
    Ok((lambda, StateVector::new(v, layout)?))
}

/// Residual `‖H v − λ v‖`.
pub fn eigen_residual(h: &Mat, lambda: f64, v: &Vector) -> f64 {
    (h * v - v * linalg::re(lambda)).norm()
}
