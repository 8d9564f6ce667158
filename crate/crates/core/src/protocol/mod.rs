//! One-way Merlin-aided protocols: Alice encodes her input into an advice
//! register, Merlin supplies a witness, and Bob runs a unitary verifier whose
//! designated accept qubit is read at the end.
//!
//! Qubits are laid out as `bob_input | advice | witness | ancilla`, most
//! significant first. Ancillas start in `|0⟩`.

mod json;
pub mod toys;

use std::collections::BTreeMap;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::circuit::{UnitaryCircuit, MAX_STATEVECTOR_QUBITS};
use crate::qcore::linalg::{self, Mat, Vector, C64, TOL};
use crate::qcore::metrics::top_eigenpair;
use crate::qcore::state::StateVector;

pub use json::{ProtocolFile, PROTOCOL_SCHEMA};

/// Acceptance threshold for yes-instances.
pub const COMPLETENESS: f64 = 2.0 / 3.0;
/// Acceptance ceiling for no-instances.
pub const SOUNDNESS: f64 = 1.0 / 3.0;

/// A partial Boolean function of Alice's and Bob's inputs. Absent entries are
/// outside the promise.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunicationFunction {
    n_bits_alice: usize,
    m_bits_bob: usize,
    table: BTreeMap<(u64, u64), bool>,
}

impl CommunicationFunction {
    pub fn new(n_bits_alice: usize, m_bits_bob: usize, table: BTreeMap<(u64, u64), bool>) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::OutOfDomain("empty domain".into()));
        }
        let (nx, ny) = (1u64 << n_bits_alice, 1u64 << m_bits_bob);
        if let Some(((x, y), _)) = table.iter().find(|((x, y), _)| *x >= nx || *y >= ny) {
            return Err(Error::OutOfDomain(format!("entry ({x}, {y}) exceeds declared widths")));
        }
        Ok(Self { n_bits_alice, m_bits_bob, table })
    }

    /// Tabulate `f` over every input pair; `None` leaves the pair undefined.
    pub fn from_fn(n_bits_alice: usize, m_bits_bob: usize, f: impl Fn(u64, u64) -> Option<bool>) -> Result<Self> {
        let mut table = BTreeMap::new();
        for x in 0..1u64 << n_bits_alice {
            for y in 0..1u64 << m_bits_bob {
                if let Some(v) = f(x, y) {
                    table.insert((x, y), v);
                }
            }
        }
        Self::new(n_bits_alice, m_bits_bob, table)
    }

    pub fn n_bits_alice(&self) -> usize {
        self.n_bits_alice
    }

    pub fn m_bits_bob(&self) -> usize {
        self.m_bits_bob
    }

    pub fn get(&self, x: u64, y: u64) -> Option<bool> {
        self.table.get(&(x, y)).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (u64, u64, bool)> + '_ {
        self.table.iter().map(|(&(x, y), &v)| (x, y, v))
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

/// How Alice maps her input to the advice register.
#[derive(Clone, Debug, PartialEq)]
pub enum AliceEncoder {
    /// `X ↦ |X⟩` on the advice register.
    Basis,
    /// Explicit amplitudes per input.
    Table(BTreeMap<u64, Vector>),
    /// `k` copies of another encoder's message.
    Power(Box<AliceEncoder>, usize),
}

impl AliceEncoder {
    /// Inputs this encoder accepts, given the advice width it feeds.
    pub fn domain(&self, advice_qubits: usize) -> Vec<u64> {
        match self {
            AliceEncoder::Basis => (0..1u64 << advice_qubits).collect(),
            AliceEncoder::Table(t) => t.keys().copied().collect(),
            AliceEncoder::Power(base, k) => base.domain(advice_qubits / k.max(&1)),
        }
    }

    fn encode_width(&self, x: u64, advice_qubits: usize) -> Result<Vector> {
        let d = 1usize << advice_qubits;
        match self {
            AliceEncoder::Basis => {
                if x as usize >= d {
                    return Err(Error::MissingEncoding(x));
                }
                let mut v = Vector::zeros(d);
                v[x as usize] = linalg::re(1.0);
                Ok(v)
            }
            AliceEncoder::Table(t) => t.get(&x).cloned().ok_or(Error::MissingEncoding(x)),
            AliceEncoder::Power(base, k) => {
                if *k == 0 || !advice_qubits.is_multiple_of(*k) {
                    return Err(Error::InvalidLayout(format!("{advice_qubits} advice qubits do not split into {k} copies")));
                }
                let one = base.encode_width(x, advice_qubits / k)?;
                let mut v = one.clone();
                for _ in 1..*k {
                    v = v.kronecker(&one);
                }
                Ok(v)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterSizes {
    pub bob_input: usize,
    pub advice: usize,
    pub witness: usize,
    pub ancilla: usize,
}

impl RegisterSizes {
    pub fn total(&self) -> usize {
        self.bob_input + self.advice + self.witness + self.ancilla
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OneWayQmaProtocol {
    sizes: RegisterSizes,
    alice: AliceEncoder,
    circuit: UnitaryCircuit,
    accept: usize,
}

impl OneWayQmaProtocol {
    pub fn new(sizes: RegisterSizes, alice: AliceEncoder, circuit: UnitaryCircuit, accept: usize) -> Result<Self> {
        let n = sizes.total();
        if n == 0 || circuit.n_qubits() != n {
            return Err(Error::InvalidLayout(format!(
                "register sizes sum to {n} but circuit has {} qubits",
                circuit.n_qubits()
            )));
        }
        if accept >= n {
            return Err(Error::InvalidLayout(format!("accept qubit {accept} out of range")));
        }
        circuit.validate()?;
        if let AliceEncoder::Table(t) = &alice {
            let d = 1usize << sizes.advice;
            for (x, v) in t {
                if v.len() != d {
                    return Err(Error::DimensionMismatch(v.len(), d));
                }
                if (v.norm() - 1.0).abs() > TOL {
                    return Err(Error::InvalidState(format!("encoding of {x} has norm {}", v.norm())));
                }
            }
        }
        Ok(Self { sizes, alice, circuit, accept })
    }

    pub fn sizes(&self) -> RegisterSizes {
        self.sizes
    }

    pub fn n_qubits(&self) -> usize {
        self.sizes.total()
    }

    pub fn circuit(&self) -> &UnitaryCircuit {
        &self.circuit
    }

    pub fn alice(&self) -> &AliceEncoder {
        &self.alice
    }

    pub fn accept_qubit(&self) -> usize {
        self.accept
    }

    pub fn bob_qubits(&self) -> Range<usize> {
        0..self.sizes.bob_input
    }

    pub fn advice_qubits(&self) -> Range<usize> {
        let s = self.sizes.bob_input;
        s..s + self.sizes.advice
    }

    pub fn witness_qubits(&self) -> Range<usize> {
        let s = self.sizes.bob_input + self.sizes.advice;
        s..s + self.sizes.witness
    }

    pub fn ancilla_qubits(&self) -> Range<usize> {
        let s = self.sizes.bob_input + self.sizes.advice + self.sizes.witness;
        s..s + self.sizes.ancilla
    }

    /// Alice's message for input `x`.
    pub fn encode(&self, x: u64) -> Result<Vector> {
        let v = self.alice.encode_width(x, self.sizes.advice)?;
        if v.len() != 1 << self.sizes.advice {
            return Err(Error::DimensionMismatch(v.len(), 1 << self.sizes.advice));
        }
        Ok(v)
    }

    fn check_bob_input(&self, y: u64) -> Result<()> {
        if y >> self.sizes.bob_input != 0 {
            return Err(Error::OutOfDomain(format!("Bob input {y} needs more than {} bits", self.sizes.bob_input)));
        }
        Ok(())
    }

    /// Full input `|y⟩|advice⟩|j⟩|0⟩`.
    pub fn input_state(&self, y: u64, advice: &Vector, witness_index: usize) -> Result<Vector> {
        self.check_bob_input(y)?;
        let da = 1usize << self.sizes.advice;
        if advice.len() != da {
            return Err(Error::DimensionMismatch(advice.len(), da));
        }
        if witness_index >= 1 << self.sizes.witness {
            return Err(Error::DimensionMismatch(witness_index, 1 << self.sizes.witness));
        }
        let n = self.n_qubits();
        if n > MAX_STATEVECTOR_QUBITS {
            return Err(Error::QubitBudget { needed: n, limit: MAX_STATEVECTOR_QUBITS });
        }
        let (w, anc) = (self.sizes.witness, self.sizes.ancilla);
        let mut v = Vector::zeros(1 << n);
        let base = ((y as usize) << (self.sizes.advice + w + anc)) | (witness_index << anc);
        for (s, amp) in advice.iter().enumerate() {
            v[base | (s << (w + anc))] = *amp;
        }
        Ok(v)
    }

    fn project_accept(&self, v: &mut Vector, outcome: bool) {
        let bit = 1usize << (self.n_qubits() - 1 - self.accept);
        for (i, z) in v.iter_mut().enumerate() {
            if (i & bit != 0) != outcome {
                *z = C64::new(0.0, 0.0);
            }
        }
    }

    /// Accepting components `Π₁ U |y, advice, j, 0⟩` for every witness basis state `j`.
    fn accepting_columns(&self, y: u64, advice: &Vector) -> Result<Vec<Vector>> {
        (0..1usize << self.sizes.witness)
            .into_par_iter()
            .map(|j| {
                let mut v = self.circuit.run(&self.input_state(y, advice, j)?)?;
                self.project_accept(&mut v, true);
                Ok(v)
            })
            .collect()
    }

    /// Witness operator for an explicit (pure, possibly unnormalized) advice vector.
    pub fn witness_operator_for_advice(&self, y: u64, advice: &Vector) -> Result<Mat> {
        let cols = self.accepting_columns(y, advice)?;
        let dw = cols.len();
        let m = Mat::from_fn(dw, dw, |i, j| cols[i].dotc(&cols[j]));
        Ok(linalg::hermitize(&m))
    }

    /// Witness operator when Alice's message is the mixed state `rho`.
    pub fn witness_operator_for_mixed_advice(&self, y: u64, rho: &Mat) -> Result<Mat> {
        let da = 1usize << self.sizes.advice;
        if rho.nrows() != da || rho.ncols() != da {
            return Err(Error::DimensionMismatch(rho.nrows(), da));
        }
        let (vals, vecs) = linalg::eigh(rho);
        let dw = 1usize << self.sizes.witness;
        let mut out = Mat::zeros(dw, dw);
        for (k, &p) in vals.iter().enumerate() {
            if p > 1e-14 {
                let v: Vector = vecs.column(k).into_owned();
                out += self.witness_operator_for_advice(y, &v)? * linalg::re(p);
            }
        }
        Ok(out)
    }

    /// Whether every "run, read accept, uncompute" branch returns Bob's
    /// input, the witness basis state and the ancillas unchanged. Protocols
    /// with this property read the witness as classical data.
    pub fn is_classical_readout(&self, x: u64, y: u64) -> Result<bool> {
        let advice = self.encode(x)?;
        let n = self.n_qubits();
        let (w, anc) = (self.sizes.witness, self.sizes.ancilla);
        let adv_mask = ((1usize << self.sizes.advice) - 1) << (w + anc);
        let inverse = self.circuit.inverse();
        for j in 0..1usize << w {
            let input = self.input_state(y, &advice, j)?;
            let out = self.circuit.run(&input)?;
            for b in [false, true] {
                let mut v = out.clone();
                self.project_accept(&mut v, b);
                inverse.apply(v.as_mut_slice());
                let expected_rest = input.iter().position(|z| z.norm() > 0.0).unwrap_or(0) & !adv_mask;
                let leak: f64 = v
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| i & !adv_mask != expected_rest)
                    .map(|(_, z)| z.norm_sqr())
                    .sum();
                if leak > 1e-18 * (1 << n) as f64 {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// `W` with `⟨φ|W|φ⟩` = acceptance probability for witness `|φ⟩`.
pub fn induced_witness_operator(p: &OneWayQmaProtocol, x: u64, y: u64) -> Result<Mat> {
    p.witness_operator_for_advice(y, &p.encode(x)?)
}

/// Best achievable acceptance and a witness attaining it.
pub fn optimal_witness(p: &OneWayQmaProtocol, x: u64, y: u64) -> Result<(f64, StateVector)> {
    let w = induced_witness_operator(p, x, y)?;
    let (lambda, v) = top_eigenpair(&w)?;
    Ok((lambda.clamp(0.0, 1.0), v))
}

/// Acceptance probability for a specific witness density matrix.
pub fn acceptance_for_witness(p: &OneWayQmaProtocol, x: u64, y: u64, witness: &Mat) -> Result<f64> {
    let w = induced_witness_operator(p, x, y)?;
    if witness.nrows() != w.nrows() {
        return Err(Error::DimensionMismatch(witness.nrows(), w.nrows()));
    }
    Ok(linalg::trace(&(w * witness)).re)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Complete,
    Sound,
    Violated,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AuditRecord {
    pub x: u64,
    pub y: u64,
    pub f: bool,
    pub lambda: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuccessAudit {
    pub records: Vec<AuditRecord>,
    pub pass: bool,
}

impl SuccessAudit {
    pub fn violations(&self) -> impl Iterator<Item = &AuditRecord> {
        self.records.iter().filter(|r| r.verdict == Verdict::Violated)
    }

    /// Smallest λ over yes-instances, if any.
    pub fn min_yes(&self) -> Option<f64> {
        self.records.iter().filter(|r| r.f).map(|r| r.lambda).reduce(f64::min)
    }

    /// Largest λ over no-instances, if any.
    pub fn max_no(&self) -> Option<f64> {
        self.records.iter().filter(|r| !r.f).map(|r| r.lambda).reduce(f64::max)
    }
}

pub fn verdict(f: bool, lambda: f64) -> Verdict {
    match f {
        true if lambda >= COMPLETENESS - TOL => Verdict::Complete,
        false if lambda <= SOUNDNESS + TOL => Verdict::Sound,
        _ => Verdict::Violated,
    }
}

/// Exhaustive success audit over the defined entries of `f`.
pub fn audit_protocol(p: &OneWayQmaProtocol, f: &CommunicationFunction) -> Result<SuccessAudit> {
    let entries: Vec<(u64, u64, bool)> = f.entries().collect();
    for &(x, _, _) in &entries {
        p.encode(x)?;
    }
    let records: Vec<AuditRecord> = entries
        .par_iter()
        .map(|&(x, y, fv)| {
            let (lambda, _) = optimal_witness(p, x, y)?;
            Ok(AuditRecord { x, y, f: fv, lambda, verdict: verdict(fv, lambda) })
        })
        .collect::<Result<_>>()?;
    let pass = records.iter().all(|r| r.verdict != Verdict::Violated);
    Ok(SuccessAudit { records, pass })
}

/// Programmatic construction of verifiers with named registers.
#[derive(Clone, Debug)]
pub struct ProtocolBuilder {
    sizes: RegisterSizes,
    circuit: UnitaryCircuit,
}

impl ProtocolBuilder {
    pub fn new(bob_input: usize, advice: usize, witness: usize, ancilla: usize) -> Self {
        let sizes = RegisterSizes { bob_input, advice, witness, ancilla };
        Self { sizes, circuit: UnitaryCircuit::new(sizes.total()) }
    }

    pub fn bob(&self, k: usize) -> usize {
        assert!(k < self.sizes.bob_input);
        k
    }

    pub fn advice(&self, k: usize) -> usize {
        assert!(k < self.sizes.advice);
        self.sizes.bob_input + k
    }

    pub fn witness(&self, k: usize) -> usize {
        assert!(k < self.sizes.witness);
        self.sizes.bob_input + self.sizes.advice + k
    }

    pub fn ancilla(&self, k: usize) -> usize {
        assert!(k < self.sizes.ancilla);
        self.sizes.bob_input + self.sizes.advice + self.sizes.witness + k
    }

    pub fn gate(mut self, g: crate::qcore::circuit::Gate) -> Result<Self> {
        self.circuit.push(g)?;
        Ok(self)
    }

    pub fn gates(mut self, gs: impl IntoIterator<Item = crate::qcore::circuit::Gate>) -> Result<Self> {
        self.circuit.extend(gs)?;
        Ok(self)
    }

    pub fn build(self, alice: AliceEncoder, accept: usize) -> Result<OneWayQmaProtocol> {
        OneWayQmaProtocol::new(self.sizes, alice, self.circuit, accept)
    }
}
