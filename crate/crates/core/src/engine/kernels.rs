//! In-place amplitude kernels.
//!
//! Gates act on amplitude pairs (one qubit) or quads (two qubits) selected
//! by splitting the buffer into blocks at the operand bits; the full
//! `2^n x 2^n` operator is never formed. Every element is computed by the
//! same expression whether the work is split across threads or not, and
//! reductions sum fixed-size chunks in a fixed order, so results are
//! bit-identical for any thread count.

use num_complex::Complex64;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Buffers shorter than this are always processed sequentially.
pub const PAR_MIN_LEN: usize = 1 << 14;
/// Elements per task in parallel kernels.
#[cfg(feature = "parallel")]
const GRAIN: usize = 1 << 12;
/// Elements per partial sum in reductions. Fixed: changing it changes the
/// summation order.
const REDUCE_CHUNK: usize = 1 << 12;

/// Whether amplitude kernels may fan out onto the rayon pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecPolicy {
    Sequential,
    /// Parallel above [`PAR_MIN_LEN`] when the `parallel` feature is on.
    #[default]
    Parallel,
}

#[cfg(feature = "parallel")]
impl ExecPolicy {
    fn parallel_for(self, len: usize) -> bool {
        self == ExecPolicy::Parallel && len >= PAR_MIN_LEN
    }
}

type C = Complex64;

/// Applies the row-major 2x2 `m` to qubit `q`.
pub fn apply_single(amps: &mut [C], q: usize, m: &[C], policy: ExecPolicy) {
    let (m00, m01, m10, m11) = (m[0], m[1], m[2], m[3]);
    let half = 1usize << q;
    let kernel = move |lo: &mut [C], hi: &mut [C]| {
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = m00 * x + m01 * y;
            *b = m10 * x + m11 * y;
        }
    };
    #[cfg(feature = "parallel")]
    if policy.parallel_for(amps.len()) {
        amps.par_chunks_mut(half << 1).for_each(|block| {
            let (lo, hi) = block.split_at_mut(half);
            lo.par_chunks_mut(GRAIN)
                .zip(hi.par_chunks_mut(GRAIN))
                .for_each(|(l, h)| kernel(l, h));
        });
        return;
    }
    let _ = policy;
    for block in amps.chunks_mut(half << 1) {
        let (lo, hi) = block.split_at_mut(half);
        kernel(lo, hi);
    }
}

/// Applies the row-major 4x4 `m` to qubits `(first, second)`, where
/// `first` is the high bit of the local index.
pub fn apply_pair(amps: &mut [C], first: usize, second: usize, m: &[C], policy: ExecPolicy) {
    debug_assert_ne!(first, second);
    let (hi, lo) = (first.max(second), first.min(second));
    let first_is_hi = first == hi;
    let mut u = [C::new(0.0, 0.0); 16];
    u.copy_from_slice(&m[..16]);
    // quad slots are (hi bit, lo bit) = 00, 01, 10, 11; map to local indices
    let slot_local: [usize; 4] = if first_is_hi { [0, 1, 2, 3] } else { [0, 2, 1, 3] };
    let lo_half = 1usize << lo;
    let kernel = move |a0: &mut [C], a1: &mut [C], b0: &mut [C], b1: &mut [C]| {
        for i in 0..a0.len() {
            let mut v = [C::new(0.0, 0.0); 4];
            v[slot_local[0]] = a0[i];
            v[slot_local[1]] = a1[i];
            v[slot_local[2]] = b0[i];
            v[slot_local[3]] = b1[i];
            let row = |r: usize| u[4 * r] * v[0] + u[4 * r + 1] * v[1] + u[4 * r + 2] * v[2] + u[4 * r + 3] * v[3];
            a0[i] = row(slot_local[0]);
            a1[i] = row(slot_local[1]);
            b0[i] = row(slot_local[2]);
            b1[i] = row(slot_local[3]);
        }
    };
    // within a hi-bit half, split into lo blocks and pair their halves
    let sweep = move |h0: &mut [C], h1: &mut [C]| {
        for (x, y) in h0.chunks_mut(lo_half << 1).zip(h1.chunks_mut(lo_half << 1)) {
            let (a0, a1) = x.split_at_mut(lo_half);
            let (b0, b1) = y.split_at_mut(lo_half);
            kernel(a0, a1, b0, b1);
        }
    };
    let hi_half = 1usize << hi;
    #[cfg(feature = "parallel")]
    if policy.parallel_for(amps.len()) {
        let grain = GRAIN.max(lo_half << 1);
        amps.par_chunks_mut(hi_half << 1).for_each(|block| {
            let (h0, h1) = block.split_at_mut(hi_half);
            h0.par_chunks_mut(grain)
                .zip(h1.par_chunks_mut(grain))
                .for_each(|(x, y)| sweep(x, y));
        });
        return;
    }
    let _ = policy;
    for block in amps.chunks_mut(hi_half << 1) {
        let (h0, h1) = block.split_at_mut(hi_half);
        sweep(h0, h1);
    }
}

/// `(P(q = 0), P(q = 1))` as unnormalized squared-norm sums.
pub fn qubit_weights(amps: &[C], q: usize, policy: ExecPolicy) -> (f64, f64) {
    let mask = 1usize << q;
    let partial = |(ci, chunk): (usize, &[C])| {
        let base = ci * REDUCE_CHUNK;
        chunk
            .iter()
            .enumerate()
            .fold((0.0, 0.0), |(p0, p1), (i, a)| {
                if (base + i) & mask == 0 {
                    (p0 + a.norm_sqr(), p1)
                } else {
                    (p0, p1 + a.norm_sqr())
                }
            })
    };
    let partials: Vec<(f64, f64)> = {
        #[cfg(feature = "parallel")]
        {
            if policy.parallel_for(amps.len()) {
                amps.par_chunks(REDUCE_CHUNK).enumerate().map(partial).collect()
            } else {
                amps.chunks(REDUCE_CHUNK).enumerate().map(partial).collect()
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = policy;
            amps.chunks(REDUCE_CHUNK).enumerate().map(partial).collect()
        }
    };
    partials
        .into_iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y))
}

/// Zeroes every amplitude whose bit `q` differs from `outcome` and scales
/// the rest by `scale`.
pub fn project(amps: &mut [C], q: usize, outcome: bool, scale: f64, policy: ExecPolicy) {
    let half = 1usize << q;
    let kernel = move |block: &mut [C]| {
        let (lo, hi) = block.split_at_mut(half);
        let (keep, drop) = if outcome { (hi, lo) } else { (lo, hi) };
        drop.fill(C::new(0.0, 0.0));
        for a in keep {
            *a *= scale;
        }
    };
    #[cfg(feature = "parallel")]
    if policy.parallel_for(amps.len()) && half >= GRAIN {
        amps.par_chunks_mut(half << 1).for_each(|block| {
            let (lo, hi) = block.split_at_mut(half);
            let (keep, drop) = if outcome { (hi, lo) } else { (lo, hi) };
            drop.par_chunks_mut(GRAIN).for_each(|c| c.fill(C::new(0.0, 0.0)));
            keep.par_chunks_mut(GRAIN).for_each(|c| c.iter_mut().for_each(|a| *a *= scale));
        });
        return;
    }
    #[cfg(feature = "parallel")]
    if policy.parallel_for(amps.len()) {
        amps.par_chunks_mut((half << 1).max(GRAIN)).for_each(|c| c.chunks_mut(half << 1).for_each(kernel));
        return;
    }
    let _ = policy;
    amps.chunks_mut(half << 1).for_each(kernel);
}

/// `|a_k|^2` for every basis index.
pub fn probabilities(amps: &[C], policy: ExecPolicy) -> Vec<f64> {
    #[cfg(feature = "parallel")]
    if policy.parallel_for(amps.len()) {
        return amps.par_iter().map(|a| a.norm_sqr()).collect();
    }
    let _ = policy;
    amps.iter().map(|a| a.norm_sqr()).collect()
}
