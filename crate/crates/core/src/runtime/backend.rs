//! The backend contract and the three built-in backends.
//!
//! A backend is the ALU role of a processing unit: it takes a validated
//! circuit plus job config and returns raw results. Interface adaptation and
//! result caching (the driver role) live in the registry entry wrapping it.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use serde::Serialize;

use super::{ExecutionMode, JobConfig};
use crate::bloch::{angles_to_state, BlochAngles, PrecisionMode};
use crate::circuit::{CircuitIR, FlatOp, Instruction};
use crate::engine::{
    bitstring, full_circuit_unitary, sample_shots, BlochRegister, EngineError, Histogram,
    MAX_ORACLE_QUBITS,
};
use crate::entropy::EntropySource;
use crate::DEFAULT_MAX_QUBITS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    VirtualStatevector,
    ReferenceOracle,
    StubNative,
}

/// Precision family a backend accepts; `Fixed` covers every legal bit count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrecisionKind {
    Full,
    Fixed,
}

impl From<PrecisionMode> for PrecisionKind {
    fn from(p: PrecisionMode) -> Self {
        match p {
            PrecisionMode::Full => Self::Full,
            PrecisionMode::Fixed(_) => Self::Fixed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BackendDescriptor {
    pub id: String,
    pub kind: BackendKind,
    pub max_qubits: usize,
    pub supports_aqic: bool,
    pub supports_conditionals: bool,
    /// Resets, or gates after a measurement.
    pub supports_mid_circuit: bool,
    pub precision_modes: BTreeSet<PrecisionKind>,
}

/// Raw output of one execution. Which fields are set depends on the mode.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Execution {
    pub histogram: Option<Histogram>,
    /// Basis-state probabilities of the pre-readout state, index = basis index.
    pub exact_distribution: Option<Vec<f64>>,
    /// The exact distribution pushed through the terminal measurements onto
    /// classical bitstrings.
    pub outcome_distribution: Option<BTreeMap<String, f64>>,
    pub expectation_values: Option<Vec<f64>>,
}

pub trait Backend: Send + Sync {
    fn descriptor(&self) -> &BackendDescriptor;

    /// Runs a circuit that has already passed validation and the capability
    /// checks against [`Backend::descriptor`].
    fn execute(&self, ir: &CircuitIR, config: &JobConfig) -> Result<Execution, EngineError>;
}

fn entropy_for(config: &JobConfig) -> EntropySource {
    match config.seed {
        Some(s) => EntropySource::seeded(s),
        None => EntropySource::SystemEntropy,
    }
}

fn initial_angles(ir: &CircuitIR, config: &JobConfig) -> Vec<BlochAngles> {
    config
        .initial_angles
        .clone()
        .unwrap_or_else(|| vec![BlochAngles::zero(); ir.num_qubits()])
}

fn initial_register(ir: &CircuitIR, config: &JobConfig, max: usize) -> Result<BlochRegister, EngineError> {
    BlochRegister::init_with_capacity(
        ir.num_qubits(),
        &initial_angles(ir, config),
        ir.num_clbits(),
        config.precision,
        max,
    )
}

/// Maps basis-state probabilities onto classical bitstrings through the
/// terminal `(qubit, clbit)` measurements. Later measurements into the same
/// clbit win, as they would when run in order.
pub(crate) fn clbit_distribution(
    probs: &[f64],
    measures: &[(usize, usize)],
    num_clbits: usize,
) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for (k, &p) in probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let mut bits = vec![0u8; num_clbits];
        for &(q, c) in measures {
            bits[c] = ((k >> q) & 1) as u8;
        }
        *out.entry(bitstring(&bits)).or_insert(0.0) += p;
    }
    out
}

/// The state-vector engine.
pub struct StatevectorBackend {
    descriptor: BackendDescriptor,
}

impl StatevectorBackend {
    pub fn new(id: impl Into<String>) -> Self {
        Self::with_capacity(id, DEFAULT_MAX_QUBITS)
    }

    pub fn with_capacity(id: impl Into<String>, max_qubits: usize) -> Self {
        Self {
            descriptor: BackendDescriptor {
                id: id.into(),
                kind: BackendKind::VirtualStatevector,
                max_qubits,
                supports_aqic: true,
                supports_conditionals: true,
                supports_mid_circuit: true,
                precision_modes: BTreeSet::from([PrecisionKind::Full, PrecisionKind::Fixed]),
            },
        }
    }
}

impl Backend for StatevectorBackend {
    fn descriptor(&self) -> &BackendDescriptor {
        &self.descriptor
    }

    fn execute(&self, ir: &CircuitIR, config: &JobConfig) -> Result<Execution, EngineError> {
        let start = initial_register(ir, config, self.descriptor.max_qubits)?;
        let mut exec = Execution::default();
        if config.mode.wants_sampling() {
            let hist = sample_shots(&start, ir, config.shots, &entropy_for(config), config.workers)?;
            exec.histogram = Some(hist);
        }
        if config.mode.wants_exact() {
            let mut breg = start;
            let token = breg.buffer_token();
            let ops: Vec<FlatOp> = ir
                .lower()?
                .into_iter()
                .filter(|op| !matches!(op, FlatOp::Measure { .. }))
                .collect();
            // gate-only after dropping the terminal readout: no draws happen
            breg.apply_ops(&ops, &mut EntropySource::seeded(0).stream(u64::MAX))?;
            debug_assert_eq!(token, breg.buffer_token(), "register buffer moved during the job");
            let probs = breg.aqic_probabilities();
            let expect = (0..breg.num_qubits())
                .map(|q| breg.expectation_z(q))
                .collect::<Result<Vec<_>, _>>()?;
            if ir.num_clbits() > 0 {
                exec.outcome_distribution = Some(clbit_distribution(
                    &probs,
                    &ir.terminal_measurements()?,
                    ir.num_clbits(),
                ));
            }
            exec.exact_distribution = Some(probs);
            exec.expectation_values = Some(expect);
        }
        Ok(exec)
    }
}

/// Sampling-only stand-in for a physical processor: the same engine, but
/// the state is never read out directly and never copied mid-run.
pub struct StubNativeBackend {
    descriptor: BackendDescriptor,
}

impl StubNativeBackend {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            descriptor: BackendDescriptor {
                id: id.into(),
                kind: BackendKind::StubNative,
                max_qubits: DEFAULT_MAX_QUBITS,
                supports_aqic: false,
                supports_conditionals: true,
                supports_mid_circuit: true,
                precision_modes: BTreeSet::from([PrecisionKind::Full]),
            },
        }
    }
}

impl Backend for StubNativeBackend {
    fn descriptor(&self) -> &BackendDescriptor {
        &self.descriptor
    }

    fn execute(&self, ir: &CircuitIR, config: &JobConfig) -> Result<Execution, EngineError> {
        if config.mode != ExecutionMode::Sampled {
            return Err(EngineError::UnsupportedInstruction("direct state readout"));
        }
        let entropy = entropy_for(config);
        let start = initial_register(ir, config, self.descriptor.max_qubits)?;
        let ops = ir.lower()?;
        // every shot starts from the prepared input and runs the whole program
        let mut hist = Histogram::new();
        for shot in 0..config.shots {
            let mut b = start.clone();
            b.apply_ops(&ops, &mut entropy.stream(shot))?;
            *hist.entry(b.bitstring()).or_default() += 1;
        }
        Ok(Execution {
            histogram: Some(hist),
            ..Execution::default()
        })
    }
}

/// Dense-matrix reference. Builds the whole circuit unitary and applies it
/// to the product input state; sampling draws from the exact distribution.
pub struct ReferenceOracleBackend {
    descriptor: BackendDescriptor,
}

impl ReferenceOracleBackend {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            descriptor: BackendDescriptor {
                id: id.into(),
                kind: BackendKind::ReferenceOracle,
                max_qubits: MAX_ORACLE_QUBITS,
                supports_aqic: true,
                supports_conditionals: false,
                supports_mid_circuit: false,
                precision_modes: BTreeSet::from([PrecisionKind::Full]),
            },
        }
    }

    fn final_state(&self, ir: &CircuitIR, config: &JobConfig) -> Result<Vec<Complex64>, EngineError> {
        let n = ir.num_qubits();
        let gates_only = CircuitIR {
            quantum_registers: ir.quantum_registers.clone(),
            classical_registers: ir.classical_registers.clone(),
            instructions: ir
                .instructions
                .iter()
                .filter(|i| !matches!(i, Instruction::Measure { .. }))
                .cloned()
                .collect(),
        };
        let u = full_circuit_unitary(&gates_only, n)?;
        let angles = initial_angles(ir, config);
        if angles.len() != n {
            return Err(EngineError::InvalidAngles {
                expected: n,
                got: angles.len(),
            });
        }
        // highest qubit is the leftmost tensor factor
        let mut psi = vec![Complex64::new(1.0, 0.0)];
        for a in angles.iter().rev() {
            let s = angles_to_state(*a);
            let s = s.amplitudes();
            psi = psi.iter().flat_map(|&x| [x * s[0], x * s[1]]).collect();
        }
        Ok(u.mul_vec(&psi))
    }
}

impl Backend for ReferenceOracleBackend {
    fn descriptor(&self) -> &BackendDescriptor {
        &self.descriptor
    }

    fn execute(&self, ir: &CircuitIR, config: &JobConfig) -> Result<Execution, EngineError> {
        let n = ir.num_qubits();
        let psi = self.final_state(ir, config)?;
        let probs: Vec<f64> = psi.iter().map(|a| a.norm_sqr()).collect();
        let expect: Vec<f64> = (0..n)
            .map(|q| {
                probs
                    .iter()
                    .enumerate()
                    .map(|(k, p)| if (k >> q) & 1 == 0 { *p } else { -*p })
                    .sum()
            })
            .collect();
        let outcomes = clbit_distribution(&probs, &ir.terminal_measurements()?, ir.num_clbits());
        let mut exec = Execution::default();
        if config.mode.wants_sampling() {
            let entropy = entropy_for(config);
            let keys: Vec<(&String, f64)> = outcomes.iter().map(|(k, &p)| (k, p)).collect();
            let total: f64 = keys.iter().map(|(_, p)| p).sum();
            let mut hist = Histogram::new();
            for shot in 0..config.shots {
                let r = entropy.stream(shot).next_f64() * total;
                let mut acc = 0.0;
                let mut pick = keys.last().map(|(k, _)| *k);
                for (k, p) in &keys {
                    acc += p;
                    if r < acc {
                        pick = Some(*k);
                        break;
                    }
                }
                if let Some(k) = pick {
                    *hist.entry(k.clone()).or_default() += 1;
                }
            }
            exec.histogram = Some(hist);
        }
        if config.mode.wants_exact() {
            if ir.num_clbits() > 0 {
                exec.outcome_distribution = Some(outcomes);
            }
            exec.exact_distribution = Some(probs);
            exec.expectation_values = Some(expect);
        }
        Ok(exec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_qasm;

    #[test]
    fn clbit_mapping_follows_measures() {
        // q0 -> c1, q1 -> c0: basis |q1 q0> = |01> reads as c = "10"
        let probs = [0.0, 1.0, 0.0, 0.0];
        let d = clbit_distribution(&probs, &[(0, 1), (1, 0)], 2);
        assert_eq!(d, BTreeMap::from([("10".to_owned(), 1.0)]));
        // unmeasured qubits marginalize away
        let d = clbit_distribution(&[0.25; 4], &[(1, 0)], 1);
        assert_eq!(d, BTreeMap::from([("0".to_owned(), 0.5), ("1".to_owned(), 0.5)]));
    }

    #[test]
    fn oracle_and_engine_agree_on_bell() {
        let ir = parse_qasm("OPENQASM 2.0; qreg q[2]; creg c[2]; h q[0]; cx q[0],q[1]; measure q -> c;").unwrap();
        let config = JobConfig {
            mode: ExecutionMode::Aqic,
            ..JobConfig::default()
        };
        let a = StatevectorBackend::new("a").execute(&ir, &config).unwrap();
        let b = ReferenceOracleBackend::new("b").execute(&ir, &config).unwrap();
        let (pa, pb) = (a.exact_distribution.unwrap(), b.exact_distribution.unwrap());
        for (x, y) in pa.iter().zip(&pb) {
            assert!((x - y).abs() < 1e-12);
        }
        assert_eq!(a.outcome_distribution.unwrap().len(), 2);
        assert_eq!(a.expectation_values.unwrap().len(), 2);
    }

    #[test]
    fn stub_refuses_readout() {
        let ir = parse_qasm("OPENQASM 2.0; qreg q[1]; creg c[1]; h q[0]; measure q -> c;").unwrap();
        let config = JobConfig {
            mode: ExecutionMode::Aqic,
            ..JobConfig::default()
        };
        assert!(StubNativeBackend::new("s").execute(&ir, &config).is_err());
    }
}
