use serde::{Deserialize, Serialize};

use super::linalg::{self, Mat, TOL};
use super::state::DensityMatrix;
use crate::error::{Error, Result};

/// Branch probabilities at or below this are treated as impossible.
pub const ZERO_PROB: f64 = 1e-15;

/// A two-outcome POVM `{I − E, E}` with the square-root Kraus pair
/// `M1 = √E`, `M0 = √(I − E)` precomputed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TwoOutcomeMeasurement {
    #[serde(with = "linalg::mat_serde")]
    effect: Mat,
    #[serde(with = "linalg::mat_serde")]
    m0: Mat,
    #[serde(with = "linalg::mat_serde")]
    m1: Mat,
}

impl TwoOutcomeMeasurement {
    pub fn new(effect: Mat) -> Result<Self> {
        linalg::ensure_hermitian(&effect)?;
        let effect = linalg::hermitize(&effect);
        let (vals, _) = linalg::eigh(&effect);
        if vals[0] < -TOL || vals[vals.len() - 1] > 1.0 + TOL {
            return Err(Error::InvalidEffect(format!(
                "spectrum [{}, {}] not inside [0, 1]",
                vals[0],
                vals[vals.len() - 1]
            )));
        }
        let m1 = linalg::spectral_map(&effect, |x| x.clamp(0.0, 1.0).sqrt());
        let m0 = linalg::spectral_map(&effect, |x| (1.0 - x.clamp(0.0, 1.0)).sqrt());
        Ok(Self { effect, m0, m1 })
    }

    pub fn scaled_identity(dim: usize, p: f64) -> Result<Self> {
        Self::new(linalg::identity(dim) * linalg::re(p))
    }

    pub fn effect(&self) -> &Mat {
        &self.effect
    }

    pub fn kraus0(&self) -> &Mat {
        &self.m0
    }

    pub fn kraus1(&self) -> &Mat {
        &self.m1
    }

    pub fn dim(&self) -> usize {
        self.effect.nrows()
    }

    /// `tr(E ρ)` on a raw matrix.
    pub fn accept_probability(&self, rho: &Mat) -> f64 {
        linalg::trace(&(&self.effect * rho)).re
    }

    /// `M0 ρ M0†`, unnormalized.
    pub fn apply_reject(&self, rho: &Mat) -> Mat {
        &self.m0 * rho * self.m0.adjoint()
    }

    /// `M1 ρ M1†`, unnormalized.
    pub fn apply_accept(&self, rho: &Mat) -> Mat {
        &self.m1 * rho * self.m1.adjoint()
    }
}

#[derive(Clone, Debug)]
pub struct MeasurementResult {
    pub p0: f64,
    pub p1: f64,
    /// `None` when the outcome has zero probability.
    pub post0: Option<DensityMatrix>,
    pub post1: Option<DensityMatrix>,
}

pub fn measure_two_outcome(rho: &DensityMatrix, m: &TwoOutcomeMeasurement) -> Result<MeasurementResult> {
    if rho.dim() != m.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), m.dim()));
    }
    let p1 = m.accept_probability(rho.matrix()).clamp(0.0, 1.0);
    let p0 = 1.0 - p1;
    let post = |raw: Mat, p: f64| {
        (p > ZERO_PROB).then(|| {
            DensityMatrix::from_parts_unchecked(linalg::hermitize(&raw.unscale(p)), rho.layout().clone())
        })
    };
    Ok(MeasurementResult {
        p0,
        p1,
        post0: post(m.apply_reject(rho.matrix()), p0),
        post1: post(m.apply_accept(rho.matrix()), p1),
    })
}
