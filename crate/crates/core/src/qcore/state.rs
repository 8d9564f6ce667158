use serde::{Deserialize, Serialize};

use super::linalg::{self, c, re, Mat, Vector, TOL};
use crate::error::{Error, Result};

/// Dense simulations refuse joint density matrices wider than this.
pub const MAX_DENSITY_QUBITS: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub qubits: usize,
}

impl Register {
    pub fn new(name: impl Into<String>, qubits: usize) -> Self {
        Self { name: name.into(), qubits }
    }
}

/// Ordered named registers. The first register holds the most significant
/// qubits of a basis index, so `tensor_product` matches the Kronecker order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    registers: Vec<Register>,
}

impl Layout {
    pub fn new(registers: Vec<Register>) -> Result<Self> {
        if registers.is_empty() {
            return Err(Error::InvalidLayout("no registers".into()));
        }
        for (k, r) in registers.iter().enumerate() {
            if r.qubits == 0 {
                return Err(Error::InvalidLayout(format!("register {} has no qubits", r.name)));
            }
            if registers[..k].iter().any(|o| o.name == r.name) {
                return Err(Error::RegisterCollision(r.name.clone()));
            }
        }
        Ok(Self { registers })
    }

    pub fn single(name: impl Into<String>, qubits: usize) -> Self {
        Self::new(vec![Register::new(name, qubits)]).expect("single register layout")
    }

    /// The zero-qubit layout of a one-dimensional space, e.g. an absent witness.
    pub fn scalar() -> Self {
        Self { registers: Vec::new() }
    }

    /// Layout for an arbitrary power-of-two dimension.
    pub fn for_dim(name: &str, dim: usize) -> Result<Self> {
        let n = linalg::log2_exact(dim)
            .ok_or_else(|| Error::InvalidLayout(format!("dimension {dim} is not a power of two")))?;
        if n == 0 {
            return Ok(Self::scalar());
        }
        Ok(Self::single(name, n))
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn total_qubits(&self) -> usize {
        self.registers.iter().map(|r| r.qubits).sum()
    }

    pub fn dim(&self) -> usize {
        1 << self.total_qubits()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.registers.iter().any(|r| r.name == name)
    }

    /// Global qubit indices occupied by `name`.
    pub fn qubits_of(&self, name: &str) -> Result<std::ops::Range<usize>> {
        let mut start = 0;
        for r in &self.registers {
            if r.name == name {
                return Ok(start..start + r.qubits);
            }
            start += r.qubits;
        }
        Err(Error::UnknownRegister(name.to_string()))
    }

    pub fn concat(&self, other: &Layout) -> Result<Layout> {
        let mut regs = self.registers.clone();
        regs.extend(other.registers.iter().cloned());
        Layout::new(regs)
    }

    fn restricted(&self, keep: &[&str]) -> Result<Layout> {
        let regs = self
            .registers
            .iter()
            .filter(|r| keep.contains(&r.name.as_str()))
            .cloned()
            .collect();
        Layout::new(regs)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    #[serde(with = "linalg::vec_serde")]
    amplitudes: Vector,
    layout: Layout,
}

impl StateVector {
    pub fn new(amplitudes: Vector, layout: Layout) -> Result<Self> {
        if amplitudes.len() != layout.dim() {
            return Err(Error::DimensionMismatch(amplitudes.len(), layout.dim()));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > TOL {
            return Err(Error::InvalidState(format!("norm {norm} != 1")));
        }
        Ok(Self { amplitudes, layout })
    }

    /// Normalizes `amplitudes` before validating.
    pub fn normalized(amplitudes: Vector, layout: Layout) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(amplitudes.unscale(norm), layout)
    }

    pub fn basis(layout: Layout, index: usize) -> Result<Self> {
        let dim = layout.dim();
        if index >= dim {
            return Err(Error::InvalidState(format!("basis index {index} out of range {dim}")));
        }
        let mut v = Vector::zeros(dim);
        v[index] = re(1.0);
        Ok(Self { amplitudes: v, layout })
    }

    pub fn amplitudes(&self) -> &Vector {
        &self.amplitudes
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix { matrix: linalg::outer(&self.amplitudes), layout: self.layout.clone() }
    }

    pub fn inner(&self, other: &StateVector) -> Result<num_complex::Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn kron(&self, other: &StateVector) -> Result<StateVector> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(StateVector { amplitudes: self.amplitudes.kronecker(&other.amplitudes), layout })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    #[serde(with = "linalg::mat_serde")]
    matrix: Mat,
    layout: Layout,
}

impl DensityMatrix {
    /// Validates hermiticity, unit trace and positivity.
    pub fn new(matrix: Mat, layout: Layout) -> Result<Self> {
        let n = linalg::ensure_square(&matrix)?;
        if n != layout.dim() {
            return Err(Error::DimensionMismatch(n, layout.dim()));
        }
        linalg::ensure_hermitian(&matrix)?;
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > TOL || tr.im.abs() > TOL {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let min = linalg::eigvalsh(&matrix)[0];
        if min < -TOL {
            return Err(Error::InvalidState(format!("minimum eigenvalue {min} < 0")));
        }
        Ok(Self { matrix: linalg::hermitize(&matrix), layout })
    }

    /// Rescales a nonzero PSD matrix to unit trace.
    pub fn from_unnormalized(matrix: Mat, layout: Layout) -> Result<Self> {
        let tr = linalg::trace(&matrix).re;
        if tr <= 0.0 {
            return Err(Error::InvalidState(format!("trace {tr} is not positive")));
        }
        Self::new(matrix.unscale(tr), layout)
    }

    pub(crate) fn from_parts_unchecked(matrix: Mat, layout: Layout) -> Self {
        Self { matrix, layout }
    }

    pub fn maximally_mixed(layout: Layout) -> Self {
        let d = layout.dim();
        Self { matrix: linalg::identity(d).unscale(d as f64), layout }
    }

    pub fn pure(state: &StateVector) -> Self {
        state.to_density()
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    pub fn purity(&self) -> f64 {
        linalg::trace(&(&self.matrix * &self.matrix)).re
    }

    pub fn into_matrix(self) -> Mat {
        self.matrix
    }
}

/// `a ⊗ b`, with `b`'s registers appended after `a`'s.
pub fn tensor_product(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    let layout = a.layout.concat(&b.layout)?;
    if layout.total_qubits() > MAX_DENSITY_QUBITS {
        return Err(Error::QubitBudget { needed: layout.total_qubits(), limit: MAX_DENSITY_QUBITS });
    }
    Ok(DensityMatrix { matrix: linalg::kron(&a.matrix, &b.matrix), layout })
}

/// Keeps the listed registers (in layout order) and traces out the rest.
pub fn partial_trace(rho: &DensityMatrix, keep: &[&str]) -> Result<DensityMatrix> {
    for name in keep {
        if !rho.layout.contains(name) {
            return Err(Error::UnknownRegister(name.to_string()));
        }
    }
    let mut kept_qubits = Vec::new();
    for r in rho.layout.registers() {
        if keep.contains(&r.name.as_str()) {
            kept_qubits.extend(rho.layout.qubits_of(&r.name)?);
        }
    }
    let layout = rho.layout.restricted(keep)?;
    let matrix = partial_trace_qubits(&rho.matrix, rho.layout.total_qubits(), &kept_qubits);
    Ok(DensityMatrix { matrix: linalg::hermitize(&matrix), layout })
}

/// Scatter the bits of `value` (MSB first) onto the given qubit positions of an
/// `n`-qubit basis index.
#[inline]
pub fn scatter_bits(value: usize, qubits: &[usize], n: usize) -> usize {
    let k = qubits.len();
    let mut out = 0usize;
    for (j, &q) in qubits.iter().enumerate() {
        if (value >> (k - 1 - j)) & 1 == 1 {
            out |= 1 << (n - 1 - q);
        }
    }
    out
}

/// Gather the bits at the given qubit positions into a value, MSB first.
#[inline]
pub fn gather_bits(index: usize, qubits: &[usize], n: usize) -> usize {
    let mut out = 0usize;
    for &q in qubits {
        out = (out << 1) | ((index >> (n - 1 - q)) & 1);
    }
    out
}

/// Partial trace on raw matrices; `keep` lists qubits in the order they should
/// appear in the result.
pub fn partial_trace_qubits(m: &Mat, n: usize, keep: &[usize]) -> Mat {
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let dk = 1usize << keep.len();
    let dt = 1usize << traced.len();
    let keep_idx: Vec<usize> = (0..dk).map(|v| scatter_bits(v, keep, n)).collect();
    let tr_idx: Vec<usize> = (0..dt).map(|v| scatter_bits(v, &traced, n)).collect();
    let mut out = Mat::zeros(dk, dk);
    for i in 0..dk {
        for j in 0..dk {
            let mut acc = c(0.0, 0.0);
            for &t in &tr_idx {
                acc += m[(keep_idx[i] | t, keep_idx[j] | t)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}
