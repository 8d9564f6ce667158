//! Small hand-built protocols used by tests, audits and the command line.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::{AliceEncoder, CommunicationFunction, OneWayQmaProtocol, ProtocolBuilder};
use crate::qcore::circuit::Gate;
use crate::qcore::linalg::{re, Vector};

fn real_vector(v: &[f64]) -> Vector {
    Vector::from_iterator(v.len(), v.iter().map(|&x| re(x)))
}

/// Bit `i` of an `n`-bit string, counting from the most significant end.
pub fn bit_msb(x: u64, i: usize, n: usize) -> bool {
    (x >> (n - 1 - i)) & 1 == 1
}

/// Accepts with probability `p` whatever the witness.
pub fn witness_independent(p: f64) -> OneWayQmaProtocol {
    let b = ProtocolBuilder::new(0, 0, 1, 1);
    let acc = b.ancilla(0);
    let theta = 2.0 * p.clamp(0.0, 1.0).sqrt().asin();
    b.gate(Gate::ry(acc, theta)).unwrap().build(AliceEncoder::Basis, acc).unwrap()
}

/// Accepts exactly when the single witness qubit is `|1⟩`.
pub fn accept_on_witness_one() -> OneWayQmaProtocol {
    let b = ProtocolBuilder::new(0, 0, 1, 1);
    let (w, acc) = (b.witness(0), b.ancilla(0));
    b.gate(Gate::cnot(w, acc)).unwrap().build(AliceEncoder::Basis, acc).unwrap()
}

/// Never accepts.
pub fn always_reject(witness: usize) -> OneWayQmaProtocol {
    ProtocolBuilder::new(0, 0, witness, 1).build(AliceEncoder::Basis, witness).unwrap()
}

/// One advice qubit whose `|1⟩` weight is 2/3 on yes-inputs and 1/3 on
/// no-inputs; Bob accepts when both the advice and the witness read 1.
/// Completeness 2/3, soundness 1/3.
pub fn coin_toy() -> OneWayQmaProtocol {
    let b = ProtocolBuilder::new(0, 1, 1, 1);
    let (a, w, acc) = (b.advice(0), b.witness(0), b.ancilla(0));
    let (lo, hi) = ((1.0f64 / 3.0).sqrt(), (2.0f64 / 3.0).sqrt());
    let table = BTreeMap::from([(0, real_vector(&[hi, lo])), (1, real_vector(&[lo, hi]))]);
    b.gate(Gate::mcx(&[a, w], &[], acc)).unwrap().build(AliceEncoder::Table(table), acc).unwrap()
}

pub fn coin_function() -> CommunicationFunction {
    CommunicationFunction::from_fn(1, 0, |x, _| Some(x == 1)).unwrap()
}

/// Index function on `n` bits: `f(X, i) = x_i`, bits numbered MSB first.
pub fn index_function(n_bits: usize, index_bits: usize) -> CommunicationFunction {
    CommunicationFunction::from_fn(n_bits, index_bits, |x, i| {
        ((i as usize) < n_bits).then(|| bit_msb(x, i as usize, n_bits))
    })
    .unwrap()
}

/// Two-bit index function with Alice's bits sent in the clear and the
/// witness unused.
pub fn rac_basis() -> OneWayQmaProtocol {
    let b = ProtocolBuilder::new(1, 2, 0, 1);
    let (i, a0, a1, acc) = (b.bob(0), b.advice(0), b.advice(1), b.ancilla(0));
    b.gates([Gate::mcx(&[a0], &[i], acc), Gate::mcx(&[a1, i], &[], acc)])
        .unwrap()
        .build(AliceEncoder::Basis, acc)
        .unwrap()
}

/// [`rac_basis`] with one extra accepting branch that fires only on
/// `X = 10`, `i = 1`, a no-instance.
pub fn rac_basis_perturbed() -> OneWayQmaProtocol {
    let b = ProtocolBuilder::new(1, 2, 0, 1);
    let (i, a0, a1, acc) = (b.bob(0), b.advice(0), b.advice(1), b.ancilla(0));
    b.gates([
        Gate::mcx(&[a0], &[i], acc),
        Gate::mcx(&[a1, i], &[], acc),
        Gate::mcx(&[a0, i], &[a1], acc),
    ])
    .unwrap()
    .build(AliceEncoder::Basis, acc)
    .unwrap()
}

/// Single-qubit code for two bits: Z reads the first with probability
/// cos²(π/8), X reads the second with the same probability.
pub fn qrac_state(b0: bool, b1: bool) -> Vector {
    let phi = match (b0, b1) {
        (false, false) => PI / 4.0,
        (false, true) => -PI / 4.0,
        (true, false) => 3.0 * PI / 4.0,
        (true, true) => -3.0 * PI / 4.0,
    };
    real_vector(&[(phi / 2.0).cos(), (phi / 2.0).sin()])
}

/// Four-bit index function over two qubits of quantum random-access code.
/// Bob's index `i` picks qubit `⌊i/2⌋` and the Z or X basis by `i mod 2`;
/// he accepts when the readout and the one-bit witness are both 1.
/// Yes-instances reach cos²(π/8) ≈ 0.854, no-instances sin²(π/8) ≈ 0.146.
pub fn rac2() -> OneWayQmaProtocol {
    let b = ProtocolBuilder::new(2, 2, 1, 1);
    let (hi, lo) = (b.bob(0), b.bob(1));
    let (a0, a1, w, acc) = (b.advice(0), b.advice(1), b.witness(0), b.ancilla(0));
    let mut table = BTreeMap::new();
    for x in 0..16u64 {
        let q0 = qrac_state(bit_msb(x, 0, 4), bit_msb(x, 1, 4));
        let q1 = qrac_state(bit_msb(x, 2, 4), bit_msb(x, 3, 4));
        table.insert(x, q0.kronecker(&q1));
    }
    b.gates([
        Gate::h(a0).controlled(lo).anti_controlled(hi),
        Gate::h(a1).controlled(lo).controlled(hi),
        Gate::mcx(&[a0, w], &[hi], acc),
        Gate::mcx(&[a1, w, hi], &[], acc),
    ])
    .unwrap()
    .build(AliceEncoder::Table(table), acc)
    .unwrap()
}

pub fn rac2_function() -> CommunicationFunction {
    index_function(4, 2)
}
