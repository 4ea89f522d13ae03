//! The output document and its two renderings.
//!
//! Every number goes through [`Num`], which prints 17 significant digits.
//! The text rendering reads the same values as the JSON, so the two never
//! disagree.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use serde_json::value::RawValue;
use vqpu_core::circuit::Diagnostic;
use vqpu_core::engine::Histogram;

pub const SCHEMA_VERSION: &str = "1";

/// A float printed as `d.ddddddddddddddddde±x`; non-finite values become null.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Num {
    pub fn text(self) -> String {
        if self.0.is_finite() {
            format!("{:.16e}", self.0)
        } else {
            "null".to_owned()
        }
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(self.text()).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

/// Histogram entries by descending count, ties in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct Counts(pub Vec<(String, u64)>);

impl From<&Histogram> for Counts {
    fn from(h: &Histogram) -> Self {
        let mut v: Vec<(String, u64)> = h.iter().map(|(k, &c)| (k.clone(), c)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Counts(v)
    }
}

impl Serialize for Counts {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunInputs {
    pub file: String,
    pub backend: String,
    pub mode: String,
    pub shots: Option<u64>,
    pub precision: String,
    pub seed: Option<u64>,
    /// `[theta, phi]` per qubit.
    pub init: Option<Vec<[Num; 2]>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileInputs {
    pub file: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolveInputs {
    pub frequency: Option<Num>,
    pub delta_e: Option<Num>,
    pub hubble: Num,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Inputs {
    Run(RunInputs),
    File(FileInputs),
    Resolve(ResolveInputs),
    None {},
}

#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub num_qubits: usize,
    pub num_clbits: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub histogram: Option<Counts>,
    /// Basis-state probabilities, index = basis state.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distribution: Option<Vec<Num>>,
    /// Exact probability of each classical bitstring.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome_distribution: Option<BTreeMap<String, Num>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expectation_values: Option<Vec<Num>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub divergence: Option<Num>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidateResult {
    pub valid: bool,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolveResult {
    pub quanta_count: Num,
    pub min_bits: u32,
    pub delta_e: Num,
    pub frequency: Option<Num>,
    pub hubble: Num,
    pub planck: Num,
}

#[derive(Debug, Clone, Serialize)]
pub struct BackendEntry {
    pub id: String,
    pub kind: String,
    pub max_qubits: usize,
    pub supports_aqic: bool,
    pub supports_conditionals: bool,
    pub supports_mid_circuit: bool,
    pub precision_modes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorResult {
    pub error: ErrorBody,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorBody {
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Payload {
    Run(RunResult),
    Validate(ValidateResult),
    Resolve(ResolveResult),
    Backends(Vec<BackendEntry>),
    Error(ErrorResult),
}

#[derive(Debug, Clone, Serialize)]
pub struct Document {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub inputs: Inputs,
    pub result: Payload,
    pub seed_used: Option<u64>,
    pub backend_id: Option<String>,
    pub wall_time_ms: Option<Num>,
}

impl Document {
    pub fn new(command: &'static str, inputs: Inputs, result: Payload) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command,
            inputs,
            result,
            seed_used: None,
            backend_id: None,
            wall_time_ms: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let o = &mut out;
        match &self.result {
            Payload::Run(r) => render_run(o, self, r),
            Payload::Validate(v) => {
                if v.valid {
                    o.push_str("valid\n");
                } else {
                    let _ = writeln!(o, "invalid: {} diagnostic(s)", v.diagnostics.len());
                }
            }
            Payload::Resolve(r) => {
                let _ = writeln!(o, "quanta_count  {}", r.quanta_count.text());
                let _ = writeln!(o, "min_bits      {}", r.min_bits);
                let _ = writeln!(o, "delta_e       {}", r.delta_e.text());
                if let Some(f) = r.frequency {
                    let _ = writeln!(o, "frequency     {}", f.text());
                }
                let _ = writeln!(o, "hubble        {}", r.hubble.text());
                let _ = writeln!(o, "planck        {}", r.planck.text());
            }
            Payload::Backends(list) => {
                for b in list {
                    let _ = writeln!(
                        o,
                        "{:<18} {:<20} max_qubits={} aqic={} conditionals={} mid_circuit={} precision={}",
                        b.id,
                        b.kind,
                        b.max_qubits,
                        b.supports_aqic,
                        b.supports_conditionals,
                        b.supports_mid_circuit,
                        b.precision_modes.join(",")
                    );
                }
            }
            Payload::Error(e) => {
                let _ = writeln!(o, "error[{}]: {}", e.error.kind, e.error.message);
            }
        }
        out
    }
}

fn render_run(o: &mut String, doc: &Document, r: &RunResult) {
    if let Inputs::Run(i) = &doc.inputs {
        let _ = writeln!(o, "file        {}", i.file);
        let _ = writeln!(o, "backend     {}", i.backend);
        let _ = writeln!(o, "mode        {}", i.mode);
        let _ = writeln!(o, "precision   {}", i.precision);
    }
    match doc.seed_used {
        Some(s) => {
            let _ = writeln!(o, "seed        {s}");
        }
        None => o.push_str("seed        system\n"),
    }
    let _ = writeln!(o, "status      {}", r.status);
    if let Some(reason) = &r.reason {
        let _ = writeln!(o, "reason      {reason}");
    }
    if let Some(h) = &r.histogram {
        o.push_str("histogram\n");
        for (k, c) in &h.0 {
            let _ = writeln!(o, "  {k}  {c}");
        }
    }
    if let Some(d) = &r.distribution {
        o.push_str("distribution\n");
        let width = r.num_qubits;
        for (k, p) in d.iter().enumerate() {
            let _ = writeln!(o, "  |{k:0width$b}>  {}", p.text());
        }
    }
    if let Some(d) = &r.outcome_distribution {
        o.push_str("outcome_distribution\n");
        for (k, p) in d {
            let _ = writeln!(o, "  {k}  {}", p.text());
        }
    }
    if let Some(e) = &r.expectation_values {
        o.push_str("expectation_values\n");
        for (q, z) in e.iter().enumerate() {
            let _ = writeln!(o, "  q{q}  {}", z.text());
        }
    }
    if let Some(d) = r.divergence {
        let _ = writeln!(o, "divergence  {}", d.text());
    }
    if let Some(t) = doc.wall_time_ms {
        let _ = writeln!(o, "wall_time_ms  {}", t.text());
    }
}
