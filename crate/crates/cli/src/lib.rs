//! `vqpu`: run QASM circuits on the virtual processor, validate sources and
//! compute resolution reports.
//!
//! Exit codes: 0 success, 1 I/O error, 2 validation, capability or usage
//! error, 3 internal failure.

pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::sync::Arc;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use vqpu_core::bloch::{BlochAngles, PrecisionMode};
use vqpu_core::circuit::{parse_qasm_bytes, validate, Diagnostic, ParseOptions};
use vqpu_core::engine::Workers;
use vqpu_core::resolution::{third_quantization, ResolutionError, ResolutionQuery, DEFAULT_HUBBLE};
use vqpu_core::runtime::{
    BackendKind, ExecutionMode, JobConfig, JobStatus, PrecisionKind, Runtime, RuntimeError,
    StubNativeBackend,
};
use vqpu_core::DEFAULT_MAX_QUBITS;

use output::{
    BackendEntry, Counts, Document, ErrorBody, ErrorResult, FileInputs, Inputs, Num, Payload,
    ResolveInputs, ResolveResult, RunInputs, RunResult, ValidateResult,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

/// Overrides the default backend id.
pub const ENV_BACKEND: &str = "VQPU_BACKEND";
/// Any non-empty value other than `0` makes unseeded runs use system entropy.
pub const ENV_SYSTEM_ENTROPY: &str = "VQPU_SYSTEM_ENTROPY";

#[derive(Debug, Parser)]
#[command(name = "vqpu", version, about = "Virtual quantum processor")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Execute a circuit on a backend.
    Run(RunArgs),
    /// Check a circuit without running it.
    Validate(ValidateArgs),
    /// Qubit information resolution for an energy gap.
    Resolve(ResolveArgs),
    /// List the available backends.
    Backends(FormatArg),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Args)]
struct FormatArg {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug, Args)]
struct RunArgs {
    file: String,
    /// Backend id [default: $VQPU_BACKEND, then vqpu0].
    #[arg(long)]
    backend: Option<String>,
    /// Shots for sampled and dual modes [default: 1024].
    #[arg(long)]
    shots: Option<u64>,
    /// Master seed [default: 0, or system entropy if $VQPU_SYSTEM_ENTROPY is set].
    #[arg(long)]
    seed: Option<u64>,
    /// `full` or `fixed:B` with 4 <= B <= 32.
    #[arg(long, default_value = "full")]
    precision: String,
    /// sampled, aqic or dual.
    #[arg(long, default_value = "sampled")]
    mode: String,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Initial Bloch angles in radians, one `theta,phi` pair per qubit,
    /// separated by `;`.
    #[arg(long, allow_hyphen_values = true)]
    init: Option<String>,
    /// Threads for shot sampling. Never changes seeded results.
    #[arg(long)]
    workers: Option<usize>,
    /// Report wall_time_ms as null so output is byte-stable.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    file: String,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("gap").required(true).args(["frequency", "delta_e"])))]
struct ResolveArgs {
    /// Transition frequency in Hz.
    #[arg(long, allow_hyphen_values = true)]
    frequency: Option<f64>,
    /// Energy gap in joules.
    #[arg(long = "delta-e", allow_hyphen_values = true)]
    delta_e: Option<f64>,
    /// Hubble rate in 1/s.
    #[arg(long, default_value_t = DEFAULT_HUBBLE, allow_hyphen_values = true)]
    hubble: f64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

/// Environment settings that sit between flags and built-in defaults.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Env {
    pub backend: Option<String>,
    pub system_entropy: bool,
}

impl Env {
    pub fn from_process() -> Self {
        let backend = std::env::var(ENV_BACKEND).ok().filter(|s| !s.is_empty());
        let system_entropy = std::env::var(ENV_SYSTEM_ENTROPY)
            .map(|v| !v.is_empty() && v != "0")
            .unwrap_or(false);
        Self {
            backend,
            system_entropy,
        }
    }
}

struct Failure {
    code: i32,
    kind: &'static str,
    message: String,
    diagnostics: Vec<Diagnostic>,
}

impl Failure {
    fn new(code: i32, kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            kind,
            message: message.into(),
            diagnostics: Vec::new(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Self::new(EXIT_INVALID, "usage", message)
    }

    fn invalid_source(diagnostics: Vec<Diagnostic>) -> Self {
        Self {
            code: EXIT_INVALID,
            kind: "validation",
            message: format!("{} diagnostic(s)", diagnostics.len()),
            diagnostics,
        }
    }
}

/// Runs one invocation; returns the exit code.
pub fn run<I, T>(args: I, env: &Env, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    return EXIT_OK;
                }
                _ => EXIT_INVALID,
            };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    let (command, format, result) = match cli.command {
        Command::Run(a) => ("run", a.format, cmd_run(&a, env)),
        Command::Validate(a) => ("validate", a.format, cmd_validate(&a)),
        Command::Resolve(a) => ("resolve", a.format, cmd_resolve(&a)),
        Command::Backends(a) => ("backends", a.format, Ok((cmd_backends(), EXIT_OK))),
    };
    match result {
        Ok((doc, code)) => {
            emit(&doc, format, out, err);
            code
        }
        Err(f) => {
            if format == Format::Text {
                for d in &f.diagnostics {
                    let _ = writeln!(err, "{d}");
                }
                let _ = writeln!(err, "error[{}]: {}", f.kind, f.message);
            } else {
                let doc = Document::new(
                    command,
                    Inputs::None {},
                    Payload::Error(ErrorResult {
                        error: ErrorBody {
                            kind: f.kind,
                            message: f.message,
                            diagnostics: f.diagnostics,
                        },
                    }),
                );
                let _ = out.write_all(doc.to_json().as_bytes());
            }
            f.code
        }
    }
}

fn emit(doc: &Document, format: Format, out: &mut dyn Write, err: &mut dyn Write) {
    match format {
        Format::Json => {
            let _ = out.write_all(doc.to_json().as_bytes());
        }
        Format::Text => {
            let _ = out.write_all(doc.to_text().as_bytes());
            if let Payload::Validate(v) = &doc.result {
                for d in &v.diagnostics {
                    let _ = writeln!(err, "{d}");
                }
            }
        }
    }
}

fn read_source(path: &str) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::new(EXIT_IO, "io", format!("{path}: {e}")))
}

fn parse_options() -> ParseOptions {
    ParseOptions {
        max_qubits: DEFAULT_MAX_QUBITS,
        ..ParseOptions::default()
    }
}

/// `"θ,φ;θ,φ"` in radians.
fn parse_init(s: &str) -> Result<Vec<BlochAngles>, Failure> {
    s.split(';')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|pair| {
            let (t, p) = pair
                .split_once(',')
                .ok_or_else(|| Failure::usage(format!("--init: `{pair}` is not a theta,phi pair")))?;
            let num = |x: &str| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| Failure::usage(format!("--init: `{}` is not a number", x.trim())))
            };
            BlochAngles::new(num(t)?, num(p)?).map_err(|e| Failure::usage(format!("--init: {e}")))
        })
        .collect()
}

fn runtime() -> Runtime {
    let rt = Runtime::new();
    rt.register_backend(Arc::new(StubNativeBackend::new("stub-native")))
        .expect("stub-native is not a default id");
    rt
}

fn runtime_failure(e: RuntimeError) -> Failure {
    match e {
        RuntimeError::ValidationFailed(d) => Failure::invalid_source(d),
        RuntimeError::UnknownBackend(_) => Failure::new(EXIT_INVALID, "unknown-backend", e.to_string()),
        RuntimeError::CapabilityMismatch { .. } => Failure::new(EXIT_INVALID, "capability", e.to_string()),
        RuntimeError::InvalidConfig(_) => Failure::new(EXIT_INVALID, "config", e.to_string()),
        _ => Failure::new(EXIT_INTERNAL, "internal", e.to_string()),
    }
}

fn cmd_run(a: &RunArgs, env: &Env) -> Result<(Document, i32), Failure> {
    let mode: ExecutionMode = a.mode.parse().map_err(Failure::usage)?;
    let precision: PrecisionMode = a
        .precision
        .parse()
        .map_err(|e| Failure::usage(format!("--precision: {e}")))?;
    if mode == ExecutionMode::Aqic && a.shots.is_some() {
        return Err(Failure::usage("--shots has no effect with --mode aqic"));
    }
    let workers = match a.workers {
        None => Workers::Ambient,
        Some(0) => return Err(Failure::usage("--workers must be at least 1")),
        Some(n) => Workers::Fixed(n),
    };
    let init = a.init.as_deref().map(parse_init).transpose()?;
    let backend = a
        .backend
        .clone()
        .or_else(|| env.backend.clone())
        .unwrap_or_else(|| "vqpu0".to_owned());
    let seed = match a.seed {
        Some(s) => Some(s),
        None if env.system_entropy => None,
        None => Some(0),
    };
    let shots = a.shots.unwrap_or(1024);

    let bytes = read_source(&a.file)?;
    let ir = parse_qasm_bytes(&bytes, &parse_options()).map_err(Failure::invalid_source)?;
    let (num_qubits, num_clbits) = (ir.num_qubits(), ir.num_clbits());

    let config = JobConfig {
        shots,
        seed,
        precision,
        mode,
        backend_id: backend.clone(),
        initial_angles: init.clone(),
        workers,
    };
    let job = runtime().run(ir, config).map_err(runtime_failure)?;

    let (status, reason, code) = match &job.status {
        JobStatus::Completed => ("completed", None, EXIT_OK),
        JobStatus::Failed(r) => ("failed", Some(r.clone()), EXIT_INTERNAL),
    };
    let nums = |v: &Vec<f64>| v.iter().map(|&x| Num(x)).collect::<Vec<_>>();
    let result = RunResult {
        status,
        reason,
        num_qubits,
        num_clbits,
        histogram: job.histogram.as_ref().map(Counts::from),
        distribution: job.exact_distribution.as_ref().map(nums),
        outcome_distribution: job
            .outcome_distribution
            .as_ref()
            .map(|m| m.iter().map(|(k, &p)| (k.clone(), Num(p))).collect()),
        expectation_values: job.expectation_values.as_ref().map(nums),
        divergence: job.divergence.map(Num),
    };
    let inputs = RunInputs {
        file: a.file.clone(),
        backend: backend.clone(),
        mode: mode.to_string(),
        shots: mode.wants_sampling().then_some(shots),
        precision: precision.to_string(),
        seed: a.seed,
        init: init.map(|v| v.iter().map(|x| [Num(x.theta()), Num(x.phi())]).collect()),
    };
    let mut doc = Document::new("run", Inputs::Run(inputs), Payload::Run(result));
    doc.seed_used = job.seed_used;
    doc.backend_id = Some(job.backend_id.clone());
    doc.wall_time_ms = (!a.no_timing).then(|| Num(job.wall_time_ms()));
    Ok((doc, code))
}

fn cmd_validate(a: &ValidateArgs) -> Result<(Document, i32), Failure> {
    let bytes = read_source(&a.file)?;
    let diagnostics = match parse_qasm_bytes(&bytes, &parse_options()) {
        Ok(ir) => validate(&ir, DEFAULT_MAX_QUBITS),
        Err(d) => d,
    };
    let valid = !diagnostics.iter().any(Diagnostic::is_error);
    let doc = Document::new(
        "validate",
        Inputs::File(FileInputs { file: a.file.clone() }),
        Payload::Validate(ValidateResult { valid, diagnostics }),
    );
    Ok((doc, if valid { EXIT_OK } else { EXIT_INVALID }))
}

fn cmd_resolve(a: &ResolveArgs) -> Result<(Document, i32), Failure> {
    let query = match (a.frequency, a.delta_e) {
        (Some(f), None) => ResolutionQuery::frequency(f),
        (None, Some(e)) => ResolutionQuery::delta_e(e),
        _ => return Err(Failure::usage("give exactly one of --frequency and --delta-e")),
    }
    .with_hubble(a.hubble);
    let report = third_quantization(&query).map_err(|e| match e {
        ResolutionError::NonPositiveInput { .. } | ResolutionError::BelowGroundState(_) => {
            Failure::new(EXIT_INVALID, "input", e.to_string())
        }
    })?;
    let inputs = ResolveInputs {
        frequency: a.frequency.map(Num),
        delta_e: a.delta_e.map(Num),
        hubble: Num(a.hubble),
    };
    let result = ResolveResult {
        quanta_count: Num(report.quanta_count),
        min_bits: report.min_bits,
        delta_e: Num(report.delta_e),
        frequency: report.frequency.map(Num),
        hubble: Num(report.hubble),
        planck: Num(report.planck),
    };
    Ok((
        Document::new("resolve", Inputs::Resolve(inputs), Payload::Resolve(result)),
        EXIT_OK,
    ))
}

fn cmd_backends() -> Document {
    let list = runtime()
        .list_backends()
        .into_iter()
        .map(|d| BackendEntry {
            kind: match d.kind {
                BackendKind::VirtualStatevector => "virtual-statevector",
                BackendKind::ReferenceOracle => "reference-oracle",
                BackendKind::StubNative => "stub-native",
            }
            .to_owned(),
            precision_modes: d
                .precision_modes
                .iter()
                .map(|p| match p {
                    PrecisionKind::Full => "full".to_owned(),
                    PrecisionKind::Fixed => "fixed".to_owned(),
                })
                .collect(),
            id: d.id,
            max_qubits: d.max_qubits,
            supports_aqic: d.supports_aqic,
            supports_conditionals: d.supports_conditionals,
            supports_mid_circuit: d.supports_mid_circuit,
        })
        .collect();
    Document::new("backends", Inputs::None {}, Payload::Backends(list))
}
