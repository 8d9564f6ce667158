//! Two-outcome instruments induced on a subsystem by "run, read one qubit,
//! uncompute" circuits.
//!
//! Given a circuit `U`, a set of system qubits, a fixed basis input on the
//! remaining qubits and an accept qubit, the instrument has Kraus operators
//! `K_{b,r}[s, a] = <s, r| U^† Π_b U |a, fixed>` where `r` ranges over basis
//! states of the non-system qubits. Blocks that vanish are dropped.

use rayon::prelude::*;

use super::circuit::UnitaryCircuit;
use super::linalg::{Mat, Vector, C64};
use super::state::{gather_bits, scatter_bits};
use crate::error::{Error, Result};

const BLOCK_EPS: f64 = 1e-13;

#[derive(Clone, Debug)]
pub struct Instrument {
    dim: usize,
    kraus: [Vec<Mat>; 2],
}

impl Instrument {
    pub fn from_kraus(dim: usize, reject: Vec<Mat>, accept: Vec<Mat>) -> Result<Self> {
        for k in reject.iter().chain(&accept) {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(Error::DimensionMismatch(k.nrows(), dim));
            }
        }
        Ok(Self { dim, kraus: [reject, accept] })
    }

    /// Extract the instrument from a circuit.
    ///
    /// `fixed` is a full basis index whose bits on the system qubits must be 0.
    pub fn from_circuit(
        circuit: &UnitaryCircuit,
        system: &[usize],
        fixed: usize,
        accept_qubit: usize,
    ) -> Result<Self> {
        let n = circuit.n_qubits();
        if system.iter().any(|&q| q >= n) {
            return Err(Error::InvalidLayout("qubit index out of range".into()));
        }
        if gather_bits(fixed, system, n) != 0 {
            return Err(Error::Precondition("fixed input overlaps system register".into()));
        }
        let inputs: Vec<Vector> = (0..1usize << system.len())
            .map(|a| {
                let mut v = Vector::zeros(1 << n);
                v[scatter_bits(a, system, n) | fixed] = C64::new(1.0, 0.0);
                v
            })
            .collect();
        Self::from_circuit_inputs(circuit, system, &inputs, accept_qubit)
    }

    /// Like [`Instrument::from_circuit`], but the environment may be in
    /// superposition: `inputs[a]` is the full input vector for system basis
    /// state `a`, which must equal `|a⟩` tensored with one common
    /// environment state.
    pub fn from_circuit_inputs(
        circuit: &UnitaryCircuit,
        system: &[usize],
        inputs: &[Vector],
        accept_qubit: usize,
    ) -> Result<Self> {
        let n = circuit.n_qubits();
        if accept_qubit >= n || system.iter().any(|&q| q >= n) {
            return Err(Error::InvalidLayout("qubit index out of range".into()));
        }
        let ds = 1usize << system.len();
        if inputs.len() != ds {
            return Err(Error::DimensionMismatch(inputs.len(), ds));
        }
        let rest: Vec<usize> = (0..n).filter(|q| !system.contains(q)).collect();
        let dr = 1usize << rest.len();
        let inverse = circuit.inverse();
        let acc_bit = 1usize << (n - 1 - accept_qubit);

        // columns[a][b] = U^† Π_b U inputs[a]
        let columns: Vec<[Vector; 2]> = inputs
            .par_iter()
            .map(|input| -> Result<[Vector; 2]> {
                let out = circuit.run(input)?;
                let mut parts = [out.clone(), out];
                for (i, z) in parts[0].iter_mut().enumerate() {
                    if i & acc_bit != 0 {
                        *z = C64::new(0.0, 0.0);
                    }
                }
                for (i, z) in parts[1].iter_mut().enumerate() {
                    if i & acc_bit == 0 {
                        *z = C64::new(0.0, 0.0);
                    }
                }
                inverse.apply(parts[0].as_mut_slice());
                inverse.apply(parts[1].as_mut_slice());
                Ok(parts)
            })
            .collect::<Result<_>>()?;

        let sys_idx: Vec<usize> = (0..ds).map(|s| scatter_bits(s, system, n)).collect();
        let mut kraus: [Vec<Mat>; 2] = [Vec::new(), Vec::new()];
        for b in 0..2 {
            for r in 0..dr {
                let base = scatter_bits(r, &rest, n);
                let k = Mat::from_fn(ds, ds, |s, a| columns[a][b][sys_idx[s] | base]);
                if k.norm() > BLOCK_EPS {
                    kraus[b].push(k);
                }
            }
        }
        Ok(Self { dim: ds, kraus })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self, outcome: u8) -> &[Mat] {
        &self.kraus[outcome as usize & 1]
    }

    /// Unnormalized post-measurement operator for `outcome`.
    pub fn apply(&self, outcome: u8, rho: &Mat) -> Mat {
        let mut out = Mat::zeros(self.dim, self.dim);
        for k in self.kraus(outcome) {
            out += k * rho * k.adjoint();
        }
        out
    }

    pub fn probability(&self, outcome: u8, rho: &Mat) -> f64 {
        self.kraus(outcome)
            .iter()
            .map(|k| (k * rho * k.adjoint()).trace().re)
            .sum()
    }

    /// Effect operator `Σ K^† K` for `outcome`.
    pub fn effect(&self, outcome: u8) -> Mat {
        let mut e = Mat::zeros(self.dim, self.dim);
        for k in self.kraus(outcome) {
            e += k.adjoint() * k;
        }
        e
    }

    /// Largest deviation of the completeness relation from the identity.
    pub fn completeness_deviation(&self) -> f64 {
        let total = self.effect(0) + self.effect(1);
        (total - Mat::identity(self.dim, self.dim)).camax()
    }
}

/// A channel given by an explicit Kraus list (weights folded in).
#[derive(Clone, Debug, Default)]
pub struct KrausChannel {
    kraus: Vec<Mat>,
}

impl KrausChannel {
    pub fn new(kraus: Vec<Mat>) -> Self {
        Self { kraus }
    }

    /// Uniform mixture of the given branches of several instruments.
    pub fn average(branches: &[(&Instrument, u8)]) -> Self {
        let w = C64::new((1.0 / branches.len() as f64).sqrt(), 0.0);
        let kraus = branches
            .iter()
            .flat_map(|(ins, b)| ins.kraus(*b).iter().map(move |k| k * w))
            .collect();
        Self { kraus }
    }

    pub fn kraus(&self) -> &[Mat] {
        &self.kraus
    }

    pub fn apply(&self, rho: &Mat) -> Mat {
        let d = rho.nrows();
        let mut out = Mat::zeros(d, d);
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        out
    }

    /// Apply `t` times, returning every intermediate operator (index 0 is `rho`).
    pub fn iterate(&self, rho: &Mat, t: usize) -> Vec<Mat> {
        let mut out = Vec::with_capacity(t + 1);
        out.push(rho.clone());
        for _ in 0..t {
            let next = self.apply(out.last().unwrap());
            out.push(next);
        }
        out
    }
}
