use std::collections::BTreeMap;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::{BlochRegister, EngineError};
use crate::circuit::{CircuitIR, FlatOp};
use crate::entropy::EntropySource;

/// Classical-register bitstring to shot count.
pub type Histogram = BTreeMap<String, u64>;

/// Shots per sequential batch. Batches are the unit of parallel work.
const SHOT_BATCH: u64 = 256;

/// How many threads shot sampling may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Workers {
    /// Whatever rayon pool the caller is running in.
    #[default]
    Ambient,
    /// A dedicated pool of this many threads; `Fixed(1)` is sequential.
    Fixed(usize),
}

/// Bits with index 0 rightmost.
pub fn bitstring(bits: &[u8]) -> String {
    bits.iter()
        .rev()
        .map(|&b| if b == 0 { '0' } else { '1' })
        .collect()
}

/// Executes `ir` `shots` times, each on a fresh copy of `breg`, and counts
/// the resulting classical bitstrings.
///
/// With a seeded source, shot `i` draws from stream `i`, so the histogram
/// does not depend on the worker count or completion order. The leading
/// run of unitary instructions is applied once and shared; measurements
/// and everything after them run per shot.
pub fn sample_shots(
    breg: &BlochRegister,
    ir: &CircuitIR,
    shots: u64,
    entropy: &EntropySource,
    workers: Workers,
) -> Result<Histogram, EngineError> {
    if shots == 0 {
        return Err(EngineError::NoShots);
    }
    if ir.num_qubits() != breg.num_qubits() || ir.num_clbits() != breg.classical_bits.len() {
        return Err(EngineError::ShapeMismatch {
            have: breg.num_qubits(),
            have_bits: breg.classical_bits.len(),
            want: ir.num_qubits(),
            want_bits: ir.num_clbits(),
        });
    }
    let ops = ir.lower()?;
    let split = ops
        .iter()
        .position(|op| !matches!(op, FlatOp::Gate(_) | FlatOp::Barrier))
        .unwrap_or(ops.len());
    let (prefix, tail) = ops.split_at(split);
    let mut prepared = breg.copy_breg();
    // the prefix holds no measurement, so it never touches the entropy stream
    prepared.apply_ops(prefix, &mut entropy.stream(u64::MAX))?;

    let batch = |start: u64| -> Result<Histogram, EngineError> {
        let mut hist = Histogram::new();
        for shot in start..(start + SHOT_BATCH).min(shots) {
            let mut b = prepared.copy_breg();
            b.apply_ops(tail, &mut entropy.stream(shot))?;
            *hist.entry(b.bitstring()).or_default() += 1;
        }
        Ok(hist)
    };
    let starts: Vec<u64> = (0..shots).step_by(SHOT_BATCH as usize).collect();
    let batches = run_batches(&starts, &batch, workers)?;

    let mut total = Histogram::new();
    for h in batches {
        for (k, v) in h {
            *total.entry(k).or_default() += v;
        }
    }
    Ok(total)
}

#[cfg(feature = "parallel")]
fn run_batches<F>(starts: &[u64], batch: &F, workers: Workers) -> Result<Vec<Histogram>, EngineError>
where
    F: Fn(u64) -> Result<Histogram, EngineError> + Sync,
{
    let run = || {
        starts
            .par_iter()
            .map(|&s| batch(s))
            .collect::<Result<Vec<_>, _>>()
    };
    match workers {
        Workers::Ambient => run(),
        Workers::Fixed(0 | 1) => starts.iter().map(|&s| batch(s)).collect(),
        Workers::Fixed(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| EngineError::Pool(e.to_string()))?
            .install(run),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_batches<F>(starts: &[u64], batch: &F, _workers: Workers) -> Result<Vec<Histogram>, EngineError>
where
    F: Fn(u64) -> Result<Histogram, EngineError> + Sync,
{
    starts.iter().map(|&s| batch(s)).collect()
}
