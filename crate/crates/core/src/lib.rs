//! A virtual quantum processor.
//!
//! The crate is layered bottom-up:
//!
//! - [`bloch`]: amplitudes, Bloch angles, state vectors, fixed-point quantization.
//! - [`resolution`]: the qubit resolution calculator.
//! - [`circuit`]: the QASM-subset intermediate representation and gate library.
//! - [`entropy`]: counter-based random streams for measurement.
//! - [`engine`]: Bloch registers and the state-vector ALU.
//! - [`runtime`]: backends, the registry and the job scheduler.
//!
//! With the default `parallel` feature, amplitude kernels and shot sampling
//! run on rayon; without it every path is sequential. Results are
//! bit-identical either way.

pub mod bloch;
pub mod circuit;
pub mod engine;
pub mod entropy;
pub mod linalg;
pub mod resolution;
pub mod runtime;

/// Default engine capacity in qubits (2^26 amplitudes, 1 GiB).
pub const DEFAULT_MAX_QUBITS: usize = 26;
