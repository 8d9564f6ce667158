//! Turning randomized or quantum advice into something fixed.
//!
//! `fix` derandomizes advice for Merlin-Arthur verifiers by boosting and
//! counting. `train` replaces quantum advice with a list of classical
//! training pairs that carve the true advice out of the maximally mixed
//! state by postselection.

pub mod fix;
pub mod toys;
pub mod train;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::qcore::linalg::{re, Mat};
use crate::qcore::TwoOutcomeMeasurement;

pub use fix::{ma_fix_advice, qma_fix_advice, MaFix, QmaFix};
pub use train::{j_fold_decision, qcma_train, s_decision, QcmaVerifier, TrainingSet};

pub const MAX_INPUT_BITS: usize = 4;
pub const MAX_WITNESS_BITS: usize = 4;

pub type ClassicalFn = Arc<dyn Fn(u64, usize, u64) -> bool + Send + Sync>;
pub type OperatorFn = Arc<dyn Fn(u64, usize) -> Mat + Send + Sync>;

/// How the verifier treats `(x, advice, witness)`.
#[derive(Clone)]
pub enum Evaluator {
    /// Deterministic Arthur `A(x, r, z)`; his coins live in the advice.
    Classical(ClassicalFn),
    /// Accept operator `M_{x,r}` on the witness register.
    Quantum(OperatorFn),
}

/// A verifier with a language table and a finite advice distribution.
#[derive(Clone)]
pub struct AdvisedVerifier {
    n: usize,
    w: usize,
    language: Vec<bool>,
    advice: Vec<f64>,
    eval: Evaluator,
}

impl fmt::Debug for AdvisedVerifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.eval {
            Evaluator::Classical(_) => "classical",
            Evaluator::Quantum(_) => "quantum",
        };
        f.debug_struct("AdvisedVerifier")
            .field("n", &self.n)
            .field("w", &self.w)
            .field("language", &self.language)
            .field("advice", &self.advice)
            .field("kind", &kind)
            .finish()
    }
}

impl AdvisedVerifier {
    /// `language[x]` is membership of `x`; `advice[r]` is the probability of
    /// advice value `r`. Every operator is checked to be a valid effect.
    pub fn new(n: usize, w: usize, language: Vec<bool>, advice: Vec<f64>, eval: Evaluator) -> Result<Self> {
        if n == 0 || n > MAX_INPUT_BITS {
            return Err(Error::OutOfDomain(format!("input length {n} outside 1..={MAX_INPUT_BITS}")));
        }
        if w > MAX_WITNESS_BITS {
            return Err(Error::OutOfDomain(format!("witness width {w} above {MAX_WITNESS_BITS}")));
        }
        if language.len() != 1 << n {
            return Err(Error::DimensionMismatch(language.len(), 1 << n));
        }
        if advice.is_empty() || advice.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (advice.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::OutOfDomain("advice probabilities must be nonnegative and sum to 1".into()));
        }
        let v = Self { n, w, language, advice, eval };
        if let Evaluator::Quantum(_) = v.eval {
            for x in 0..1u64 << n {
                for r in 0..v.advice.len() {
                    let m = v.operator(x, r);
                    if m.nrows() != 1 << w {
                        return Err(Error::DimensionMismatch(m.nrows(), 1 << w));
                    }
                    TwoOutcomeMeasurement::new(m)?;
                }
            }
        }
        Ok(v)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn in_language(&self, x: u64) -> bool {
        self.language[x as usize]
    }

    pub fn advice_distribution(&self) -> &[f64] {
        &self.advice
    }

    pub fn evaluator(&self) -> &Evaluator {
        &self.eval
    }

    pub fn is_classical(&self) -> bool {
        matches!(self.eval, Evaluator::Classical(_))
    }

    /// Accept operator for fixed advice; diagonal for a classical Arthur.
    pub fn operator(&self, x: u64, r: usize) -> Mat {
        match &self.eval {
            Evaluator::Quantum(f) => f(x, r),
            Evaluator::Classical(a) => {
                let d = 1usize << self.w;
                Mat::from_fn(d, d, |i, j| if i == j && a(x, r, i as u64) { re(1.0) } else { re(0.0) })
            }
        }
    }

    /// Accept operator averaged over the advice distribution.
    pub fn mean_operator(&self, x: u64) -> Mat {
        let d = 1usize << self.w;
        self.advice.iter().enumerate().fold(Mat::zeros(d, d), |acc, (r, &p)| acc + self.operator(x, r).scale(p))
    }
}
