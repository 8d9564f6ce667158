//! Dense states, measurements, circuits and the distance measures between them.

pub mod circuit;
pub mod instrument;
pub mod linalg;
pub mod measure;
pub mod metrics;
pub mod random;
pub mod state;

pub use circuit::{Gate, UnitaryCircuit};
pub use instrument::{Instrument, KrausChannel};
pub use linalg::{Mat, Vector, C64, EIG_TOL, TOL};
pub use measure::{measure_two_outcome, MeasurementResult, TwoOutcomeMeasurement};
pub use metrics::{fidelity, top_eigenpair, trace_distance};
pub use state::{partial_trace, tensor_product, DensityMatrix, Layout, Register, StateVector};
