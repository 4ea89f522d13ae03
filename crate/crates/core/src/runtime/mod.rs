//! Virtual processor instances: backends behind a common contract, a
//! registry to look them up, and a scheduler that runs jobs on a bounded
//! worker pool.

mod backend;
mod divergence;
mod registry;
mod scheduler;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

use crate::bloch::{BlochAngles, PrecisionMode};
use crate::circuit::{validate, CircuitIR, Diagnostic};
use crate::engine::{Histogram, Workers};

pub use backend::{
    Backend, BackendDescriptor, BackendKind, Execution, PrecisionKind, ReferenceOracleBackend,
    StatevectorBackend, StubNativeBackend,
};
pub use divergence::{empirical, total_variation, total_variation_keyed};
pub use registry::Registry;
pub use scheduler::{DualResult, Runtime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecutionMode {
    #[default]
    Sampled,
    Aqic,
    Dual,
}

impl ExecutionMode {
    pub fn wants_sampling(self) -> bool {
        matches!(self, Self::Sampled | Self::Dual)
    }

    pub fn wants_exact(self) -> bool {
        matches!(self, Self::Aqic | Self::Dual)
    }
}

impl fmt::Display for ExecutionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Sampled => "sampled",
            Self::Aqic => "aqic",
            Self::Dual => "dual",
        })
    }
}

impl FromStr for ExecutionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sampled" => Ok(Self::Sampled),
            "aqic" => Ok(Self::Aqic),
            "dual" => Ok(Self::Dual),
            _ => Err(format!("unknown mode `{s}` (expected sampled, aqic or dual)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobConfig {
    pub shots: u64,
    /// `None` draws from system entropy and is not reproducible.
    pub seed: Option<u64>,
    pub precision: PrecisionMode,
    pub mode: ExecutionMode,
    pub backend_id: String,
    /// One point per qubit; all at |0> when absent.
    pub initial_angles: Option<Vec<BlochAngles>>,
    /// Threads for shot sampling. Does not change seeded results.
    pub workers: Workers,
}

impl Default for JobConfig {
    fn default() -> Self {
        Self {
            shots: 1024,
            seed: None,
            precision: PrecisionMode::Full,
            mode: ExecutionMode::Sampled,
            backend_id: "vqpu0".to_owned(),
            initial_angles: None,
            workers: Workers::Ambient,
        }
    }
}

impl JobConfig {
    /// Everything that can change the result. Worker count is excluded
    /// because it cannot.
    fn cache_key(&self, ir_text: &str) -> String {
        let angles = self.initial_angles.as_ref().map(|a| {
            a.iter()
                .map(|x| format!("{:x}:{:x}", x.theta().to_bits(), x.phi().to_bits()))
                .collect::<Vec<_>>()
        });
        format!(
            "{}|{}|{:?}|{}|{:?}\n{}",
            self.mode, self.shots, self.seed, self.precision, angles, ir_text
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct JobId(pub u64);

impl fmt::Display for JobId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "job-{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "lowercase")]
pub enum JobStatus {
    Completed,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobResult {
    pub job_id: JobId,
    pub backend_id: String,
    pub mode: ExecutionMode,
    pub shots: Option<u64>,
    pub histogram: Option<Histogram>,
    pub exact_distribution: Option<Vec<f64>>,
    /// Exact probabilities of each classical bitstring.
    pub outcome_distribution: Option<BTreeMap<String, f64>>,
    pub expectation_values: Option<Vec<f64>>,
    /// Total variation between the exact outcome distribution and the
    /// empirical histogram (dual mode).
    pub divergence: Option<f64>,
    pub seed_used: Option<u64>,
    pub wall_time: Duration,
    pub status: JobStatus,
    /// Served from the backend's result cache.
    pub cached: bool,
}

impl JobResult {
    pub fn wall_time_ms(&self) -> f64 {
        self.wall_time.as_nanos() as f64 / 1e6
    }

    pub fn is_completed(&self) -> bool {
        self.status == JobStatus::Completed
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RuntimeError {
    #[error("backend `{0}` is already registered")]
    DuplicateBackend(String),
    #[error("no backend named `{0}`")]
    UnknownBackend(String),
    #[error("backend `{backend}` cannot run this job: {reason}")]
    CapabilityMismatch { backend: String, reason: String },
    #[error("circuit failed validation with {} diagnostic(s)", .0.len())]
    ValidationFailed(Vec<Diagnostic>),
    #[error("invalid job config: {0}")]
    InvalidConfig(String),
    #[error("unknown or already collected job {0}")]
    UnknownJob(JobId),
    #[error("scheduler has shut down")]
    Disconnected,
}

/// Everything checked before a job is handed to a backend.
pub fn check_job(
    descriptor: &BackendDescriptor,
    ir: &CircuitIR,
    config: &JobConfig,
) -> Result<(), RuntimeError> {
    let diags: Vec<Diagnostic> = validate(ir, usize::MAX)
        .into_iter()
        .filter(Diagnostic::is_error)
        .collect();
    if !diags.is_empty() {
        return Err(RuntimeError::ValidationFailed(diags));
    }
    let n = ir.num_qubits();
    let invalid = |m: String| Err(RuntimeError::InvalidConfig(m));
    if n == 0 {
        return invalid("circuit declares no qubits".into());
    }
    if config.mode.wants_sampling() {
        if config.shots == 0 {
            return invalid("shots must be at least 1".into());
        }
        if ir.num_clbits() == 0 {
            return invalid("sampling needs at least one classical bit".into());
        }
    }
    if let Some(a) = &config.initial_angles {
        if a.len() != n {
            return invalid(format!("{} initial angle pairs for {n} qubits", a.len()));
        }
    }
    if let PrecisionMode::Fixed(bits) = config.precision {
        if let Err(e) = PrecisionMode::fixed(bits) {
            return invalid(e.to_string());
        }
    }
    if config.workers == Workers::Fixed(0) {
        return invalid("workers must be at least 1".into());
    }

    let mismatch = |reason: String| {
        Err(RuntimeError::CapabilityMismatch {
            backend: descriptor.id.clone(),
            reason,
        })
    };
    if n > descriptor.max_qubits {
        return mismatch(format!("{n} qubits exceed the limit of {}", descriptor.max_qubits));
    }
    if ir.has_conditionals() && !descriptor.supports_conditionals {
        return mismatch("conditional gates are not supported".into());
    }
    let terminal = ir.is_measurement_terminal();
    if !terminal && !descriptor.supports_mid_circuit {
        return mismatch("mid-circuit measurement or reset is not supported".into());
    }
    if config.mode.wants_exact() {
        if !descriptor.supports_aqic {
            return mismatch(format!("{} mode needs direct state readout", config.mode));
        }
        if !terminal {
            return mismatch(format!(
                "{} mode needs every measurement at the end of the circuit",
                config.mode
            ));
        }
    }
    if !descriptor
        .precision_modes
        .contains(&PrecisionKind::from(config.precision))
    {
        return mismatch(format!("precision {} is not supported", config.precision));
    }
    Ok(())
}
