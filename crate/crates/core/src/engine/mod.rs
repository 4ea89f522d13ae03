//! The arithmetic unit of the virtual processor: Bloch registers and the
//! operations that initialize, transform, measure and read them.

pub mod kernels;
mod oracle;
mod sample;

use std::ops::Range;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::bloch::{self, BlochAngles, BlochError, PrecisionMode, StateVector};
use crate::circuit::{CircuitIR, FlatGate, FlatOp, GateKind, LowerError};
use crate::entropy::EntropyStream;
use crate::DEFAULT_MAX_QUBITS;

pub use kernels::ExecPolicy;
pub use oracle::{full_circuit_unitary, MAX_ORACLE_QUBITS};
pub use sample::{bitstring, sample_shots, Histogram, Workers};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("{requested} qubits exceed the engine capacity of {max}")]
    CapacityExceeded { requested: usize, max: usize },
    #[error("a register needs at least one qubit")]
    NoQubits,
    #[error("expected {expected} initial angle pairs, got {got}")]
    InvalidAngles { expected: usize, got: usize },
    #[error("invalid operand: {0}")]
    InvalidOperand(String),
    #[error("register has {have} qubits and {have_bits} classical bits, circuit declares {want} and {want_bits}")]
    ShapeMismatch {
        have: usize,
        have_bits: usize,
        want: usize,
        want_bits: usize,
    },
    #[error("instruction not supported here: {0}")]
    UnsupportedInstruction(&'static str),
    #[error("shot count must be at least 1")]
    NoShots,
    #[error(transparent)]
    Lower(#[from] LowerError),
    #[error(transparent)]
    Bloch(#[from] BlochError),
    #[error("worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QubitMeta {
    /// Stored resolution of this qubit's amplitudes, in bits per component.
    pub resolution_bits: u32,
    pub last_measured: Option<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurementRecord {
    pub qubit: usize,
    pub outcome: u8,
    /// Probability of `outcome` just before the measurement.
    pub probability: f64,
    /// Index of the entropy draw that decided the outcome.
    pub draw_index: u64,
}

/// A register file holding classical bits next to the classical image of
/// an n-qubit state.
///
/// Cloning is a deep copy; the classical image of quantum information can be
/// duplicated freely.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochRegister {
    state: StateVector,
    classical_bits: Vec<u8>,
    precision: PrecisionMode,
    qubit_meta: Vec<QubitMeta>,
    policy: ExecPolicy,
}

impl BlochRegister {
    /// Product state of per-qubit Bloch points, all classical bits 0.
    pub fn init_qubits(
        n: usize,
        angles: &[BlochAngles],
        classical_bits: usize,
        precision: PrecisionMode,
    ) -> Result<Self, EngineError> {
        Self::init_with_capacity(n, angles, classical_bits, precision, DEFAULT_MAX_QUBITS)
    }

    pub fn init_with_capacity(
        n: usize,
        angles: &[BlochAngles],
        classical_bits: usize,
        precision: PrecisionMode,
        max_qubits: usize,
    ) -> Result<Self, EngineError> {
        if n == 0 {
            return Err(EngineError::NoQubits);
        }
        if n > max_qubits {
            return Err(EngineError::CapacityExceeded {
                requested: n,
                max: max_qubits,
            });
        }
        if angles.len() != n {
            return Err(EngineError::InvalidAngles {
                expected: n,
                got: angles.len(),
            });
        }
        if let PrecisionMode::Fixed(bits) = precision {
            PrecisionMode::fixed(bits)?;
        }
        let mut amps = Vec::with_capacity(1 << n);
        amps.push(Complex64::new(1.0, 0.0));
        // qubit q becomes bit q of the index: its |1> branch is the upper half
        for &a in angles {
            let [zero, one] = bloch::angles_to_pair(a);
            let len = amps.len();
            amps.extend_from_within(..len);
            let (lo, hi) = amps.split_at_mut(len);
            lo.iter_mut().for_each(|x| *x *= zero);
            hi.iter_mut().for_each(|x| *x *= one);
        }
        let mut breg = Self {
            state: StateVector::from_raw(n, amps),
            classical_bits: vec![0; classical_bits],
            precision,
            qubit_meta: vec![
                QubitMeta {
                    resolution_bits: precision.resolution_bits(),
                    last_measured: None,
                };
                n
            ],
            policy: ExecPolicy::default(),
        };
        breg.settle()?;
        Ok(breg)
    }

    /// Register shaped for `ir`, all qubits at |0>.
    pub fn for_circuit(ir: &CircuitIR, precision: PrecisionMode) -> Result<Self, EngineError> {
        let n = ir.num_qubits();
        Self::init_qubits(n, &vec![BlochAngles::zero(); n], ir.num_clbits(), precision)
    }

    pub fn with_policy(mut self, policy: ExecPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn num_qubits(&self) -> usize {
        self.state.num_qubits()
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn classical_bits(&self) -> &[u8] {
        &self.classical_bits
    }

    pub fn precision(&self) -> PrecisionMode {
        self.precision
    }

    pub fn qubit_meta(&self) -> &[QubitMeta] {
        &self.qubit_meta
    }

    pub fn policy(&self) -> ExecPolicy {
        self.policy
    }

    /// Deep copy.
    pub fn copy_breg(&self) -> Self {
        self.clone()
    }

    /// Identity of the amplitude buffer; stable for the register's lifetime.
    pub fn buffer_token(&self) -> usize {
        self.state.buffer_token()
    }

    /// Re-establishes the precision invariant after a state update.
    fn settle(&mut self) -> Result<(), EngineError> {
        if let PrecisionMode::Fixed(bits) = self.precision {
            bloch::quantize_in_place(self.state.amplitudes_mut(), bits)?;
        }
        Ok(())
    }

    fn check_qubit(&self, q: usize) -> Result<(), EngineError> {
        if q < self.num_qubits() {
            Ok(())
        } else {
            Err(EngineError::InvalidOperand(format!(
                "qubit {q} out of range for {} qubits",
                self.num_qubits()
            )))
        }
    }

    pub fn apply_gate(&mut self, gate: &FlatGate) -> Result<(), EngineError> {
        for &q in &gate.qubits {
            self.check_qubit(q)?;
        }
        let m = gate.matrix.as_matrix().as_slice();
        match (gate.qubits.as_slice(), gate.matrix.dim()) {
            ([q], 2) => kernels::apply_single(self.state.amplitudes_mut(), *q, m, self.policy),
            ([a, b], 4) if a != b => {
                kernels::apply_pair(self.state.amplitudes_mut(), *a, *b, m, self.policy)
            }
            _ => {
                return Err(EngineError::InvalidOperand(format!(
                    "`{}` on qubits {:?}",
                    gate.kind, gate.qubits
                )))
            }
        }
        self.settle()
    }

    /// Draws an outcome for qubit `q`, projects onto it and renormalizes.
    pub fn measure_qubit(
        &mut self,
        q: usize,
        stream: &mut EntropyStream,
    ) -> Result<MeasurementRecord, EngineError> {
        self.check_qubit(q)?;
        self.settle()?;
        let (w0, w1) = kernels::qubit_weights(self.state.amplitudes(), q, self.policy);
        let draw_index = stream.draw_index();
        let r = stream.next_f64();
        let total = w0 + w1;
        let outcome = if w1 == 0.0 {
            false
        } else if w0 == 0.0 {
            true
        } else {
            r * total >= w0
        };
        let kept = if outcome { w1 } else { w0 };
        kernels::project(
            self.state.amplitudes_mut(),
            q,
            outcome,
            kept.sqrt().recip(),
            self.policy,
        );
        self.settle()?;
        self.qubit_meta[q].last_measured = Some(outcome as u8);
        Ok(MeasurementRecord {
            qubit: q,
            outcome: outcome as u8,
            probability: kept / total,
            draw_index,
        })
    }

    /// Measures `q` and flips it back to |0> if it read 1.
    pub fn reset_qubit(&mut self, q: usize, stream: &mut EntropyStream) -> Result<(), EngineError> {
        let rec = self.measure_qubit(q, stream)?;
        if rec.outcome == 1 {
            let x = FlatGate {
                kind: GateKind::X,
                qubits: vec![q],
                matrix: GateKind::X.matrix(&[]).map_err(LowerError::Gate)?,
            };
            self.apply_gate(&x)?;
        }
        self.qubit_meta[q].last_measured = None;
        Ok(())
    }

    /// Little-endian value of `bits` (bit `start` least significant)
    /// compared against `value`.
    fn register_equals(&self, bits: &Range<usize>, value: u64) -> bool {
        bits.clone().enumerate().all(|(i, b)| {
            let want = if i < 64 { (value >> i) & 1 } else { 0 };
            u64::from(self.classical_bits[b]) == want
        }) && (bits.len() >= 64 || value >> bits.len() == 0)
    }

    /// Runs `ir` in order. Conditionals see the classical bits as they are at
    /// that point in the program.
    pub fn apply_circuit(
        &mut self,
        ir: &CircuitIR,
        stream: &mut EntropyStream,
    ) -> Result<Vec<MeasurementRecord>, EngineError> {
        if ir.num_qubits() != self.num_qubits() || ir.num_clbits() != self.classical_bits.len() {
            return Err(EngineError::ShapeMismatch {
                have: self.num_qubits(),
                have_bits: self.classical_bits.len(),
                want: ir.num_qubits(),
                want_bits: ir.num_clbits(),
            });
        }
        self.apply_ops(&ir.lower()?, stream)
    }

    /// Runs already-lowered instructions.
    pub fn apply_ops(
        &mut self,
        ops: &[FlatOp],
        stream: &mut EntropyStream,
    ) -> Result<Vec<MeasurementRecord>, EngineError> {
        let mut records = Vec::new();
        for op in ops {
            match op {
                FlatOp::Gate(g) => self.apply_gate(g)?,
                FlatOp::Measure { qubit, clbit } => {
                    if *clbit >= self.classical_bits.len() {
                        return Err(EngineError::InvalidOperand(format!("classical bit {clbit}")));
                    }
                    let rec = self.measure_qubit(*qubit, stream)?;
                    self.classical_bits[*clbit] = rec.outcome;
                    records.push(rec);
                }
                FlatOp::Reset(q) => self.reset_qubit(*q, stream)?,
                FlatOp::Conditional { clbits, value, gate } => {
                    if clbits.end > self.classical_bits.len() {
                        return Err(EngineError::InvalidOperand(format!("classical bits {clbits:?}")));
                    }
                    if self.register_equals(clbits, *value) {
                        self.apply_gate(gate)?;
                    }
                }
                FlatOp::Barrier => {}
            }
        }
        Ok(records)
    }

    /// `|a_k|^2` for every basis state, read straight from the classical
    /// image without disturbing it.
    pub fn aqic_probabilities(&self) -> Vec<f64> {
        kernels::probabilities(self.state.amplitudes(), self.policy)
    }

    /// `P(q = 0) - P(q = 1)`.
    pub fn expectation_z(&self, q: usize) -> Result<f64, EngineError> {
        self.check_qubit(q)?;
        let (w0, w1) = kernels::qubit_weights(self.state.amplitudes(), q, self.policy);
        Ok(((w0 - w1) / (w0 + w1)).clamp(-1.0, 1.0))
    }

    /// Classical bits as a string, highest index leftmost.
    pub fn bitstring(&self) -> String {
        bitstring(&self.classical_bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{parse_qasm, GateKind};
    use crate::entropy::EntropySource;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn gate(kind: GateKind, params: &[f64], qubits: &[usize]) -> FlatGate {
        FlatGate {
            kind,
            qubits: qubits.to_vec(),
            matrix: kind.matrix(params).unwrap(),
        }
    }

    fn zeros(n: usize, clbits: usize) -> BlochRegister {
        BlochRegister::init_qubits(n, &vec![BlochAngles::zero(); n], clbits, PrecisionMode::Full).unwrap()
    }

    fn amps(b: &BlochRegister) -> Vec<(f64, f64)> {
        b.state().amplitudes().iter().map(|a| (a.re, a.im)).collect()
    }

    #[test]
    fn init_examples() {
        assert_eq!(amps(&zeros(1, 0)), vec![(1.0, 0.0), (0.0, 0.0)]);
        assert_eq!(
            amps(&zeros(2, 0)),
            vec![(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]
        );
        let b = BlochRegister::init_qubits(
            2,
            &[BlochAngles::new(PI / 2.0, 0.0).unwrap(), BlochAngles::zero()],
            0,
            PrecisionMode::Full,
        )
        .unwrap();
        // q0 in superposition: indices 0 (|00>) and 1 (q0 = 1)
        let a = amps(&b);
        assert!((a[0].0 - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((a[1].0 - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(a[2], (0.0, 0.0));
        assert_eq!(a[3], (0.0, 0.0));
        assert_eq!(b.classical_bits(), &[] as &[u8]);
    }

    #[test]
    fn init_errors() {
        assert_eq!(
            BlochRegister::init_qubits(27, &vec![BlochAngles::zero(); 27], 0, PrecisionMode::Full),
            Err(EngineError::CapacityExceeded { requested: 27, max: 26 })
        );
        assert_eq!(
            BlochRegister::init_qubits(2, &[BlochAngles::zero()], 0, PrecisionMode::Full),
            Err(EngineError::InvalidAngles { expected: 2, got: 1 })
        );
        assert_eq!(
            BlochRegister::init_qubits(0, &[], 0, PrecisionMode::Full),
            Err(EngineError::NoQubits)
        );
        assert!(matches!(
            BlochRegister::init_qubits(1, &[BlochAngles::zero()], 0, PrecisionMode::Fixed(2)),
            Err(EngineError::Bloch(BlochError::InvalidBits(2)))
        ));
    }

    #[test]
    fn gate_examples() {
        let mut b = zeros(1, 0);
        b.apply_gate(&gate(GateKind::X, &[], &[0])).unwrap();
        assert_eq!(amps(&b), vec![(0.0, 0.0), (1.0, 0.0)]);

        let mut b = zeros(1, 0);
        let h = gate(GateKind::H, &[], &[0]);
        b.apply_gate(&h).unwrap();
        b.apply_gate(&h).unwrap();
        let a = amps(&b);
        assert!((a[0].0 - 1.0).abs() < 1e-12 && a[1].0.abs() < 1e-12);

        let mut b = zeros(2, 0);
        b.apply_gate(&h).unwrap();
        b.apply_gate(&gate(GateKind::Cx, &[], &[0, 1])).unwrap();
        let a = amps(&b);
        assert!((a[0].0 - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((a[3].0 - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!((a[1], a[2]), ((0.0, 0.0), (0.0, 0.0)));
    }

    #[test]
    fn gate_operand_errors() {
        let mut b = zeros(2, 0);
        assert!(b.apply_gate(&gate(GateKind::X, &[], &[2])).is_err());
        assert!(b.apply_gate(&gate(GateKind::Cx, &[], &[1, 1])).is_err());
        let mut bad = gate(GateKind::Cx, &[], &[0, 1]);
        bad.qubits.pop();
        assert!(b.apply_gate(&bad).is_err());
    }

    #[test]
    fn measure_basis_state() {
        let mut b = zeros(1, 0);
        let mut s = EntropySource::seeded(3).stream(0);
        let before = b.clone();
        let r = b.measure_qubit(0, &mut s).unwrap();
        assert_eq!((r.outcome, r.probability, r.draw_index), (0, 1.0, 0));
        assert_eq!(b.state(), before.state());
        assert_eq!(b.qubit_meta()[0].last_measured, Some(0));
    }

    #[test]
    fn bell_collapse_fixes_partner() {
        let ir = parse_qasm("OPENQASM 2.0; qreg q[2]; h q[0]; cx q[0],q[1];").unwrap();
        for seed in 0..20 {
            let mut b = zeros(2, 0);
            let mut s = EntropySource::seeded(seed).stream(0);
            b.apply_circuit(&ir, &mut s).unwrap();
            let r0 = b.measure_qubit(0, &mut s).unwrap();
            assert!((r0.probability - 0.5).abs() < 1e-12);
            let expect = if r0.outcome == 0 { 0 } else { 3 };
            assert!((b.state().amplitudes()[expect].norm() - 1.0).abs() < 1e-12);
            let r1 = b.measure_qubit(1, &mut s).unwrap();
            assert_eq!(r1.outcome, r0.outcome);
            assert_eq!(r1.probability, 1.0);
        }
    }

    #[test]
    fn seeded_superposition_golden() {
        // frozen from the ChaCha8 counter stream: draw 0 of (seed 0, stream 0)
        let r = crate::entropy::counter_draw(0, 0, 0);
        let expect = u8::from(r >= 0.5);
        let mut b = zeros(1, 0);
        b.apply_gate(&gate(GateKind::H, &[], &[0])).unwrap();
        let rec = b.measure_qubit(0, &mut EntropySource::seeded(0).stream(0)).unwrap();
        assert_eq!(rec.outcome, expect);
        assert_eq!(rec.outcome, GOLDEN_SEED0_OUTCOME);
    }

    const GOLDEN_SEED0_OUTCOME: u8 = 1;

    #[test]
    fn aqic_readout() {
        let b = zeros(1, 0);
        assert_eq!(b.aqic_probabilities(), vec![1.0, 0.0]);

        let mut b = zeros(1, 0);
        b.apply_gate(&gate(GateKind::Rx, &[2.0 * PI / 3.0], &[0])).unwrap();
        let snapshot = b.clone();
        let p = b.aqic_probabilities();
        assert!((p[0] - 0.25).abs() < 1e-15 && (p[1] - 0.75).abs() < 1e-15);
        assert_eq!(b, snapshot);
    }

    #[test]
    fn expectation_examples() {
        let mut b = zeros(1, 0);
        assert_eq!(b.expectation_z(0).unwrap(), 1.0);
        b.apply_gate(&gate(GateKind::X, &[], &[0])).unwrap();
        assert_eq!(b.expectation_z(0).unwrap(), -1.0);
        let mut b = zeros(1, 0);
        b.apply_gate(&gate(GateKind::H, &[], &[0])).unwrap();
        assert!(b.expectation_z(0).unwrap().abs() < 1e-12);
        assert!(b.expectation_z(1).is_err());
    }

    #[test]
    fn conditional_trace() {
        let ir = parse_qasm(
            "OPENQASM 2.0; qreg q[2]; creg c[2]; x q[0]; measure q[0] -> c[0]; \
             if (c==1) x q[1]; measure q[1] -> c[1];",
        )
        .unwrap();
        let mut b = BlochRegister::for_circuit(&ir, PrecisionMode::Full).unwrap();
        let recs = b.apply_circuit(&ir, &mut EntropySource::seeded(1).stream(0)).unwrap();
        assert_eq!(b.classical_bits(), &[1, 1]);
        assert_eq!(b.bitstring(), "11");
        assert_eq!(recs.len(), 2);
    }

    #[test]
    fn conditional_value_is_little_endian() {
        let ir = parse_qasm(
            "OPENQASM 2.0; qreg q[3]; creg c[2]; x q[1]; measure q[1] -> c[1]; \
             if (c==2) x q[2]; if (c==1) x q[0];",
        )
        .unwrap();
        let mut b = BlochRegister::for_circuit(&ir, PrecisionMode::Full).unwrap();
        b.apply_circuit(&ir, &mut EntropySource::seeded(1).stream(0)).unwrap();
        // c = 0b10 = 2: q2 flipped, q0 untouched
        assert_eq!(b.aqic_probabilities()[0b110], 1.0);
    }

    #[test]
    fn empty_circuit_is_identity() {
        let ir = CircuitIR::new().with_qreg("q", 2).with_creg("c", 1);
        let mut b = BlochRegister::for_circuit(&ir, PrecisionMode::Full).unwrap();
        let before = b.clone();
        let recs = b.apply_circuit(&ir, &mut EntropySource::seeded(0).stream(0)).unwrap();
        assert!(recs.is_empty());
        assert_eq!(b, before);
    }

    #[test]
    fn shape_mismatch() {
        let ir = CircuitIR::new().with_qreg("q", 2);
        let mut b = zeros(3, 0);
        assert!(matches!(
            b.apply_circuit(&ir, &mut EntropySource::seeded(0).stream(0)),
            Err(EngineError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn reset_returns_to_zero() {
        let ir = parse_qasm("OPENQASM 2.0; qreg q[1]; h q[0]; reset q[0];").unwrap();
        for seed in 0..10 {
            let mut b = zeros(1, 0);
            b.apply_circuit(&ir, &mut EntropySource::seeded(seed).stream(0)).unwrap();
            assert!((b.aqic_probabilities()[0] - 1.0).abs() < 1e-15);
            assert_eq!(b.qubit_meta()[0].last_measured, None);
        }
    }

    #[test]
    fn copies_are_independent() {
        let ir = parse_qasm("OPENQASM 2.0; qreg q[1]; creg c[1]; h q[0]; measure q[0] -> c[0];").unwrap();
        let mut b = BlochRegister::for_circuit(&ir, PrecisionMode::Fixed(16)).unwrap();
        b.apply_circuit(&ir, &mut EntropySource::seeded(5).stream(0)).unwrap();
        let mut c = b.copy_breg();
        assert_eq!(c.precision(), PrecisionMode::Fixed(16));
        assert_eq!(c.qubit_meta(), b.qubit_meta());
        assert_ne!(c.buffer_token(), b.buffer_token());
        c.apply_gate(&gate(GateKind::X, &[], &[0])).unwrap();
        assert_ne!(c.state(), b.state());
        assert_eq!(b.qubit_meta()[0].resolution_bits, 16);
    }

    #[test]
    fn buffer_is_never_reallocated() {
        let ir = parse_qasm(
            "OPENQASM 2.0; qreg q[3]; creg c[3]; h q; cx q[0],q[2]; measure q -> c; reset q[1]; \
             if (c==5) swap q[0],q[1];",
        )
        .unwrap();
        let mut b = BlochRegister::for_circuit(&ir, PrecisionMode::Fixed(12)).unwrap();
        let token = b.buffer_token();
        b.apply_circuit(&ir, &mut EntropySource::seeded(2).stream(0)).unwrap();
        assert_eq!(b.buffer_token(), token);
    }

    #[test]
    fn fixed_precision_is_maintained() {
        let ir = parse_qasm("OPENQASM 2.0; qreg q[2]; rx(0.3) q[0]; cx q[0],q[1]; ry(1.1) q[1];").unwrap();
        let mut b = BlochRegister::for_circuit(&ir, PrecisionMode::Fixed(8)).unwrap();
        b.apply_circuit(&ir, &mut EntropySource::seeded(0).stream(0)).unwrap();
        let requantized = bloch::quantize_state(b.state(), 8).unwrap();
        for (x, y) in requantized.amplitudes().iter().zip(b.state().amplitudes()) {
            assert!((x - y).norm() < 2f64.powi(-7));
        }
        assert!((b.state().norm() - 1.0).abs() < 1e-12);
    }
}
