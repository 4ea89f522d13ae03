//! Randomness for measurement.
//!
//! A seeded source is a counter-based generator: draw `k` of stream `label`
//! is a pure function of `(master_seed, label, k)`, so work can be split
//! across threads in any order without changing a single outcome. The
//! system source reads the operating system's entropy pool and is
//! intentionally not reproducible.

use rand::rngs::OsRng;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EntropySource {
    SeededCounter { master_seed: u64 },
    SystemEntropy,
}

impl EntropySource {
    pub fn seeded(master_seed: u64) -> Self {
        Self::SeededCounter { master_seed }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Self::SeededCounter { master_seed } => Some(*master_seed),
            Self::SystemEntropy => None,
        }
    }

    /// Independent stream `label`, positioned at draw 0.
    pub fn stream(&self, label: u64) -> EntropyStream {
        let inner = match *self {
            Self::SeededCounter { master_seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
                rng.set_stream(label);
                Inner::Counter(rng)
            }
            Self::SystemEntropy => Inner::System,
        };
        EntropyStream { inner, draws: 0 }
    }
}

#[derive(Debug, Clone)]
enum Inner {
    Counter(ChaCha8Rng),
    System,
}

/// A sequence of uniform draws in `[0, 1)`.
#[derive(Debug, Clone)]
pub struct EntropyStream {
    inner: Inner,
    draws: u64,
}

impl EntropyStream {
    /// Index the next draw will have.
    pub fn draw_index(&self) -> u64 {
        self.draws
    }

    pub fn next_f64(&mut self) -> f64 {
        let bits = match &mut self.inner {
            Inner::Counter(rng) => rng.next_u64(),
            Inner::System => OsRng.next_u64(),
        };
        self.draws += 1;
        unit_f64(bits)
    }
}

/// Draw `index` of stream `label` under `master_seed`, computed directly
/// from the counter without replaying earlier draws.
pub fn counter_draw(master_seed: u64, label: u64, index: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(label);
    // each u64 consumes two 32-bit words of the block counter
    rng.set_word_pos(2 * index as u128);
    unit_f64(rng.next_u64())
}

/// Top 53 bits as a float in `[0, 1)`.
fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
