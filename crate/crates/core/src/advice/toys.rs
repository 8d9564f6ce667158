//! Small verifiers for tests and the command line.

use std::f64::consts::PI;
use std::sync::Arc;

use super::train::QcmaVerifier;
use super::{AdvisedVerifier, Evaluator};
use crate::error::{Error, Result};
use crate::protocol::{AliceEncoder, ProtocolBuilder};
use crate::qcore::circuit::Gate;
use crate::qcore::linalg::{re, Mat, Vector};

fn parity(x: u64) -> bool {
    x.count_ones() % 2 == 1
}

/// `L = parity` on `n` bits, `w` witness bits, four equally likely advice
/// values. Arthur wants the all-ones witness and answers parity, except that
/// advice 0 flips him. Each input sees the wrong answer with probability 1/4.
pub fn parity_ma(n: usize, w: usize) -> Result<AdvisedVerifier> {
    let language = (0..1u64 << n).map(parity).collect();
    let ones = (1u64 << w) - 1;
    let a = Arc::new(move |x: u64, r: usize, z: u64| z == ones && (parity(x) ^ (r == 0)));
    AdvisedVerifier::new(n, w, language, vec![0.25; 4], Evaluator::Classical(a))
}

/// Arthur ignores both advice and witness and answers `L(x) = [x ≥ 2]`.
pub fn advice_free_ma() -> AdvisedVerifier {
    let language = (0..4).map(|x| x >= 2).collect();
    let a = Arc::new(|x: u64, _r: usize, _z: u64| x >= 2);
    AdvisedVerifier::new(2, 1, language, vec![1.0], Evaluator::Classical(a)).expect("valid toy")
}

fn rotated(x: u64, diag: [f64; 2]) -> Mat {
    let t = (x as f64 + 1.0) * PI / 7.0;
    let (c, s) = (t.cos(), t.sin());
    let u = Mat::from_row_slice(2, 2, &[re(c), re(-s), re(s), re(c)]);
    let d = Mat::from_diagonal(&Vector::from_vec(vec![re(diag[0]), re(diag[1])]));
    &u * d * u.adjoint()
}

/// `L = parity` on `n ≤ 3` bits with a one-qubit quantum witness and three
/// equally likely advice values. Each accept operator is diagonal in a basis
/// rotated by an input-dependent angle, so the best witness is never a basis
/// state.
pub fn rotated_qma(n: usize) -> Result<AdvisedVerifier> {
    if n > 3 {
        return Err(Error::OutOfDomain(format!("rotated toy has n ≤ 3, got {n}")));
    }
    let language: Vec<bool> = (0..1u64 << n).map(parity).collect();
    let yes_a = [1.0, 1.0, 0.1];
    let yes_b = [0.05, 0.0, 0.0];
    let no_a = [0.6, 0.0, 0.0];
    let no_b = [0.0, 0.1, 0.0];
    let lang = language.clone();
    let f = Arc::new(move |x: u64, r: usize| {
        if lang[x as usize] { rotated(x, [yes_a[r], yes_b[r]]) } else { rotated(x, [no_a[r], no_b[r]]) }
    });
    AdvisedVerifier::new(n, 1, language, vec![1.0 / 3.0; 3], Evaluator::Quantum(f))
}

/// Accept operator `c·I` whatever the input or advice; `L = [x = 3]`, with
/// `c` chosen by membership.
pub fn witness_independent_qma() -> AdvisedVerifier {
    let language: Vec<bool> = (0..4).map(|x| x == 3).collect();
    let lang = language.clone();
    let f = Arc::new(move |x: u64, _r: usize| Mat::identity(2, 2).scale(if lang[x as usize] { 0.9 } else { 0.1 }));
    AdvisedVerifier::new(2, 1, language, vec![0.5, 0.5], Evaluator::Quantum(f)).expect("valid toy")
}

/// Two-qubit Bell advice and one witness bit. Bob undoes the Bell
/// preparation, tilts the low advice qubit slightly, and accepts on `z = 1`
/// when a table `f_x` of the resulting basis state says so. `f_x(00)` is the
/// parity of `x`; the other entries add a little noise.
pub fn bell_qcma() -> QcmaVerifier {
    let language: Vec<bool> = (0..4).map(parity).collect();
    let b = ProtocolBuilder::new(2, 2, 1, 1);
    let (x0, x1) = (b.bob(0), b.bob(1));
    let (a0, a1) = (b.advice(0), b.advice(1));
    let (z, acc) = (b.witness(0), b.ancilla(0));
    let mut gates = vec![Gate::cnot(a0, a1), Gate::h(a0), Gate::ry(a1, 0.3)];
    for x in 0..4u64 {
        let table: Vec<u64> = if parity(x) {
            vec![0, 1 + x % 3]
        } else {
            (1..4).filter(|&c| c != 1 + x % 3).collect()
        };
        for cell in table {
            let mut on = vec![z];
            let mut off = Vec::new();
            for (q, bit) in [(x0, x >> 1 & 1), (x1, x & 1), (a0, cell >> 1 & 1), (a1, cell & 1)] {
                if bit == 1 { on.push(q) } else { off.push(q) }
            }
            gates.push(Gate::mcx(&on, &off, acc));
        }
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bell = Vector::from_vec(vec![re(h), re(0.0), re(0.0), re(h)]);
    let protocol = b
        .gates(gates)
        .expect("valid gates")
        .build(AliceEncoder::Table([(0, bell)].into()), acc)
        .expect("valid protocol");
    QcmaVerifier::new(language, protocol).expect("valid toy")
}

/// Bob ignores his advice qubit and accepts on `z = 1` exactly when `x = 1`,
/// so no training pair can teach him anything.
pub fn advice_blind_qcma() -> QcmaVerifier {
    let b = ProtocolBuilder::new(1, 1, 1, 1);
    let (x, z, acc) = (b.bob(0), b.witness(0), b.ancilla(0));
    let protocol = b
        .gate(Gate::mcx(&[x, z], &[], acc))
        .expect("valid gate")
        .build(AliceEncoder::Basis, acc)
        .expect("valid protocol");
    QcmaVerifier::new(vec![false, true], protocol).expect("valid toy")
}
