//! Gate-level circuits and a dense state-vector interpreter.
//!
//! Qubit `q` of an `n`-qubit register is bit `n - 1 - q` of a basis index, so
//! qubit 0 is the most significant. Multi-target gate matrices use the same
//! convention over their target list.

use serde::{Deserialize, Serialize};

use super::linalg::{self, c, re, Mat, Vector, C64, TOL};
use crate::error::{Error, Result};

/// State-vector simulations refuse registers wider than this.
pub const MAX_STATEVECTOR_QUBITS: usize = 24;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GateSpec", into = "GateSpec")]
pub struct Gate {
    name: String,
    targets: Vec<usize>,
    controls: Vec<usize>,
    neg_controls: Vec<usize>,
    params: Vec<f64>,
    matrix: Mat,
}

/// Wire format for a gate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GateSpec {
    pub name: String,
    pub targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub controls: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub neg_controls: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
}

fn standard_matrix(name: &str, params: &[f64]) -> Result<Mat> {
    let need = |k: usize| -> Result<()> {
        if params.len() != k {
            return Err(Error::InvalidGate(format!("{name} expects {k} parameter(s)")));
        }
        Ok(())
    };
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let m2 = |a: C64, b: C64, cc: C64, d: C64| Mat::from_row_slice(2, 2, &[a, b, cc, d]);
    let z0 = re(0.0);
    let one = re(1.0);
    Ok(match name {
        "x" => { need(0)?; m2(z0, one, one, z0) }
        "y" => { need(0)?; m2(z0, c(0.0, -1.0), c(0.0, 1.0), z0) }
        "z" => { need(0)?; m2(one, z0, z0, re(-1.0)) }
        "h" => { need(0)?; m2(re(h), re(h), re(h), re(-h)) }
        "s" => { need(0)?; m2(one, z0, z0, c(0.0, 1.0)) }
        "sdg" => { need(0)?; m2(one, z0, z0, c(0.0, -1.0)) }
        "t" => { need(0)?; m2(one, z0, z0, C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)) }
        "tdg" => { need(0)?; m2(one, z0, z0, C64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)) }
        "rx" => {
            need(1)?;
            let (s, co) = (params[0] / 2.0).sin_cos();
            m2(re(co), c(0.0, -s), c(0.0, -s), re(co))
        }
        "ry" => {
            need(1)?;
            let (s, co) = (params[0] / 2.0).sin_cos();
            m2(re(co), re(-s), re(s), re(co))
        }
        "rz" => {
            need(1)?;
            let t = params[0] / 2.0;
            m2(C64::from_polar(1.0, -t), z0, z0, C64::from_polar(1.0, t))
        }
        "phase" => { need(1)?; m2(one, z0, z0, C64::from_polar(1.0, params[0])) }
        "swap" => {
            need(0)?;
            let mut m = Mat::zeros(4, 4);
            m[(0, 0)] = one;
            m[(1, 2)] = one;
            m[(2, 1)] = one;
            m[(3, 3)] = one;
            m
        }
        other => return Err(Error::InvalidGate(format!("unknown gate {other}"))),
    })
}

impl TryFrom<GateSpec> for Gate {
    type Error = Error;

    fn try_from(spec: GateSpec) -> Result<Self> {
        let matrix = match &spec.matrix {
            Some(rows) => linalg::matrix_from_pairs(rows)?,
            None => standard_matrix(&spec.name, &spec.params)?,
        };
        let gate = Gate {
            name: spec.name,
            targets: spec.targets,
            controls: spec.controls,
            neg_controls: spec.neg_controls,
            params: spec.params,
            matrix,
        };
        gate.check_shape()?;
        Ok(gate)
    }
}

impl From<Gate> for GateSpec {
    fn from(g: Gate) -> Self {
        let standard = standard_matrix(&g.name, &g.params).is_ok();
        GateSpec {
            matrix: (!standard).then(|| linalg::matrix_to_pairs(&g.matrix)),
            name: g.name,
            targets: g.targets,
            controls: g.controls,
            neg_controls: g.neg_controls,
            params: g.params,
        }
    }
}

impl Gate {
    fn standard(name: &str, targets: Vec<usize>, params: Vec<f64>) -> Self {
        let matrix = standard_matrix(name, &params).expect("standard gate");
        Gate { name: name.into(), targets, controls: vec![], neg_controls: vec![], params, matrix }
    }

    pub fn x(t: usize) -> Self { Self::standard("x", vec![t], vec![]) }
    pub fn y(t: usize) -> Self { Self::standard("y", vec![t], vec![]) }
    pub fn z(t: usize) -> Self { Self::standard("z", vec![t], vec![]) }
    pub fn h(t: usize) -> Self { Self::standard("h", vec![t], vec![]) }
    pub fn s(t: usize) -> Self { Self::standard("s", vec![t], vec![]) }
    pub fn rx(t: usize, theta: f64) -> Self { Self::standard("rx", vec![t], vec![theta]) }
    pub fn ry(t: usize, theta: f64) -> Self { Self::standard("ry", vec![t], vec![theta]) }
    pub fn rz(t: usize, theta: f64) -> Self { Self::standard("rz", vec![t], vec![theta]) }
    pub fn swap(a: usize, b: usize) -> Self { Self::standard("swap", vec![a, b], vec![]) }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self::x(target).controlled(control)
    }

    /// X on `target` conditioned on every qubit in `on` being 1 and every qubit
    /// in `off` being 0.
    pub fn mcx(on: &[usize], off: &[usize], target: usize) -> Self {
        let mut g = Self::x(target);
        g.controls = on.to_vec();
        g.neg_controls = off.to_vec();
        g
    }

    pub fn custom(targets: Vec<usize>, matrix: Mat) -> Result<Self> {
        let g = Gate { name: "custom".into(), targets, controls: vec![], neg_controls: vec![], params: vec![], matrix };
        g.check_shape()?;
        let dev = linalg::unitarity_deviation(&g.matrix);
        if dev > TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(g)
    }

    pub fn controlled(mut self, q: usize) -> Self {
        self.controls.push(q);
        self
    }

    pub fn anti_controlled(mut self, q: usize) -> Self {
        self.neg_controls.push(q);
        self
    }

    pub fn name(&self) -> &str { &self.name }
    pub fn targets(&self) -> &[usize] { &self.targets }
    pub fn controls(&self) -> &[usize] { &self.controls }
    pub fn neg_controls(&self) -> &[usize] { &self.neg_controls }
    pub fn matrix(&self) -> &Mat { &self.matrix }

    /// Every qubit the gate touches.
    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.targets.iter().chain(&self.controls).chain(&self.neg_controls).copied()
    }

    pub fn inverse(&self) -> Gate {
        let mut g = self.clone();
        g.matrix = self.matrix.adjoint();
        match self.name.as_str() {
            "x" | "y" | "z" | "h" | "swap" => {}
            "s" => g.name = "sdg".into(),
            "sdg" => g.name = "s".into(),
            "t" => g.name = "tdg".into(),
            "tdg" => g.name = "t".into(),
            "rx" | "ry" | "rz" | "phase" => g.params = vec![-self.params[0]],
            _ => g.name = "custom".into(),
        }
        g
    }

    /// Renumber qubits through `map` (old index → new index).
    pub fn remapped(&self, map: &[usize]) -> Gate {
        let f = |v: &[usize]| v.iter().map(|&q| map[q]).collect();
        Gate { targets: f(&self.targets), controls: f(&self.controls), neg_controls: f(&self.neg_controls), ..self.clone() }
    }

    fn check_shape(&self) -> Result<()> {
        if self.targets.is_empty() {
            return Err(Error::InvalidGate("gate without targets".into()));
        }
        let dim = 1usize << self.targets.len();
        if self.matrix.nrows() != dim || self.matrix.ncols() != dim {
            return Err(Error::InvalidGate(format!(
                "{} on {} target(s) needs a {dim}x{dim} matrix",
                self.name,
                self.targets.len()
            )));
        }
        let all: Vec<usize> = self.qubits().collect();
        for (k, q) in all.iter().enumerate() {
            if all[..k].contains(q) {
                return Err(Error::InvalidGate(format!("qubit {q} used twice")));
            }
        }
        Ok(())
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        self.check_shape()?;
        if let Some(q) = self.qubits().find(|&q| q >= n_qubits) {
            return Err(Error::InvalidGate(format!("qubit {q} out of range {n_qubits}")));
        }
        let dev = linalg::unitarity_deviation(&self.matrix);
        if dev > TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitaryCircuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl UnitaryCircuit {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, gates: Vec::new() }
    }

    pub fn from_gates(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Self::new(n_qubits);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn n_qubits(&self) -> usize { self.n_qubits }
    pub fn gates(&self) -> &[Gate] { &self.gates }
    pub fn gate_count(&self) -> usize { self.gates.len() }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    /// Append `other` with its qubit `k` relabelled to `map[k]`.
    pub fn append_mapped(&mut self, other: &UnitaryCircuit, map: &[usize]) -> Result<()> {
        if map.len() != other.n_qubits {
            return Err(Error::DimensionMismatch(map.len(), other.n_qubits));
        }
        self.extend(other.gates.iter().map(|g| g.remapped(map)))
    }

    pub fn inverse(&self) -> UnitaryCircuit {
        UnitaryCircuit { n_qubits: self.n_qubits, gates: self.gates.iter().rev().map(Gate::inverse).collect() }
    }

    /// Check every gate again (used after deserialization).
    pub fn validate(&self) -> Result<()> {
        self.gates.iter().try_for_each(|g| g.validate(self.n_qubits))
    }

    pub fn apply(&self, amps: &mut [C64]) {
        debug_assert_eq!(amps.len(), 1 << self.n_qubits);
        for g in &self.gates {
            apply_gate(amps, self.n_qubits, g);
        }
    }

    /// Run the circuit on basis state `index`.
    pub fn run_basis(&self, index: usize) -> Result<Vector> {
        if self.n_qubits > MAX_STATEVECTOR_QUBITS {
            return Err(Error::QubitBudget { needed: self.n_qubits, limit: MAX_STATEVECTOR_QUBITS });
        }
        let mut v = Vector::zeros(1 << self.n_qubits);
        v[index] = re(1.0);
        self.apply(v.as_mut_slice());
        Ok(v)
    }

    pub fn run(&self, input: &Vector) -> Result<Vector> {
        if input.len() != 1 << self.n_qubits {
            return Err(Error::DimensionMismatch(input.len(), 1 << self.n_qubits));
        }
        let mut v = input.clone();
        self.apply(v.as_mut_slice());
        Ok(v)
    }

    /// Full unitary matrix; only sensible for a handful of qubits.
    pub fn to_matrix(&self) -> Result<Mat> {
        if self.n_qubits > 12 {
            return Err(Error::QubitBudget { needed: self.n_qubits, limit: 12 });
        }
        let d = 1 << self.n_qubits;
        let mut m = Mat::zeros(d, d);
        for j in 0..d {
            m.set_column(j, &self.run_basis(j)?);
        }
        Ok(m)
    }
}

#[inline]
fn bit(n: usize, q: usize) -> usize {
    1 << (n - 1 - q)
}

/// Apply one gate in place.
pub fn apply_gate(amps: &mut [C64], n: usize, gate: &Gate) {
    let k = gate.targets.len();
    let dk = 1usize << k;
    let tmask: usize = gate.targets.iter().map(|&q| bit(n, q)).sum();
    let on: usize = gate.controls.iter().map(|&q| bit(n, q)).sum();
    let off: usize = gate.neg_controls.iter().map(|&q| bit(n, q)).sum();
    let cmask = on | off;
    let offsets: Vec<usize> = (0..dk)
        .map(|s| {
            gate.targets
                .iter()
                .enumerate()
                .filter(|&(j, _)| (s >> (k - 1 - j)) & 1 == 1)
                .map(|(_, &q)| bit(n, q))
                .sum()
        })
        .collect();
    let m = &gate.matrix;
    if k == 1 {
        let (a, b, cc, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        let hi = offsets[1];
        for i in 0..amps.len() {
            if i & tmask != 0 || i & cmask != on {
                continue;
            }
            let (x0, x1) = (amps[i], amps[i | hi]);
            amps[i] = a * x0 + b * x1;
            amps[i | hi] = cc * x0 + d * x1;
        }
        return;
    }
    let mut buf = vec![C64::new(0.0, 0.0); dk];
    for i in 0..amps.len() {
        if i & tmask != 0 || i & cmask != on {
            continue;
        }
        for s in 0..dk {
            buf[s] = amps[i | offsets[s]];
        }
        for r in 0..dk {
            let mut acc = C64::new(0.0, 0.0);
            for s in 0..dk {
                acc += m[(r, s)] * buf[s];
            }
            amps[i | offsets[r]] = acc;
        }
    }
}

/// Qubits needed to hold values `0..=max`.
pub fn counter_width(max: usize) -> usize {
    (usize::BITS - max.leading_zeros()).max(1) as usize
}

/// Reversible `counter += 1` (mod 2^len), conditioned on `controls`.
/// `counter` lists qubits most significant first.
pub fn increment(counter: &[usize], controls: &[usize]) -> Vec<Gate> {
    let len = counter.len();
    (0..len)
        .map(|j| {
            let mut on: Vec<usize> = controls.to_vec();
            on.extend_from_slice(&counter[j + 1..]);
            Gate::mcx(&on, &[], counter[j])
        })
        .collect()
}

/// Flip `target` iff the counter value lies in `lo..=hi`.
pub fn flip_if_in_range(counter: &[usize], lo: usize, hi: usize, target: usize) -> Vec<Gate> {
    let len = counter.len();
    let top = hi.min((1 << len) - 1);
    (lo..=top)
        .map(|v| {
            let (mut on, mut off) = (Vec::new(), Vec::new());
            for (j, &q) in counter.iter().enumerate() {
                if (v >> (len - 1 - j)) & 1 == 1 { on.push(q) } else { off.push(q) }
            }
            Gate::mcx(&on, &off, target)
        })
        .collect()
}

/// Reversible strict-majority vote of `bits` into `target`, using a clean
/// scratch `counter` that is restored to zero afterwards.
pub fn majority(bits: &[usize], counter: &[usize], target: usize) -> Vec<Gate> {
    let mut gates = Vec::new();
    for &b in bits {
        gates.extend(increment(counter, &[b]));
    }
    let threshold = bits.len() / 2 + 1;
    gates.extend(flip_if_in_range(counter, threshold, bits.len(), target));
    for &b in bits.iter().rev() {
        gates.extend(increment(counter, &[b]).iter().rev().map(Gate::inverse));
    }
    gates
}
