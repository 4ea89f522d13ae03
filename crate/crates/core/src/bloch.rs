//! Numeric foundation: complex amplitudes, Bloch angles, state vectors and
//! fixed-point amplitude quantization.

use std::f64::consts::{PI, TAU};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One complex amplitude of a state vector.
pub type ComplexAmplitude = Complex64;

/// Tolerance on `|norm - 1|` for a state to count as normalized.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Below this norm a vector is treated as corrupted rather than rescaled.
pub const ZERO_NORM_THRESHOLD: f64 = 1e-30;

/// Smallest and largest bit widths accepted by [`PrecisionMode::Fixed`].
pub const MIN_FIXED_BITS: u32 = 4;
pub const MAX_FIXED_BITS: u32 = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BlochError {
    #[error("theta {0} is outside [0, pi]")]
    ThetaOutOfRange(f64),
    #[error("angle is not finite")]
    NonFiniteAngle,
    #[error("state norm {0:e} is below the zero-norm threshold")]
    ZeroNorm(f64),
    #[error("state norm deviates from 1 by {0:e}")]
    NotNormalized(f64),
    #[error("amplitude count {0} is not a power of two")]
    BadLength(usize),
    #[error("amplitude {0} is not finite")]
    NonFiniteAmplitude(usize),
    #[error("expected a single-qubit state, got {0} qubits")]
    NotSingleQubit(usize),
    #[error("fixed precision needs {MIN_FIXED_BITS}..={MAX_FIXED_BITS} bits, got {0}")]
    InvalidBits(u32),
    #[error("every component rounds to zero at {0} bits")]
    QuantizationCollapse(u32),
}

/// A point on the Bloch sphere.
///
/// `theta` is kept in `[0, pi]`; `phi` is reduced into `[0, 2pi)` on
/// construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochAngles {
    theta: f64,
    phi: f64,
}

impl BlochAngles {
    pub fn new(theta: f64, phi: f64) -> Result<Self, BlochError> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(BlochError::NonFiniteAngle);
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(BlochError::ThetaOutOfRange(theta));
        }
        let mut phi = phi.rem_euclid(TAU);
        // rem_euclid can round up to exactly TAU for tiny negative inputs
        if phi >= TAU {
            phi = 0.0;
        }
        Ok(Self { theta, phi })
    }

    /// The north pole, |0>.
    pub const fn zero() -> Self {
        Self { theta: 0.0, phi: 0.0 }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

impl Default for BlochAngles {
    fn default() -> Self {
        Self::zero()
    }
}

/// Storage resolution of a register's amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PrecisionMode {
    /// binary64 real and imaginary parts.
    Full,
    /// Signed fraction with `bits - 1` fractional bits per component.
    Fixed(u32),
}

impl PrecisionMode {
    pub fn fixed(bits: u32) -> Result<Self, BlochError> {
        if (MIN_FIXED_BITS..=MAX_FIXED_BITS).contains(&bits) {
            Ok(Self::Fixed(bits))
        } else {
            Err(BlochError::InvalidBits(bits))
        }
    }

    /// Bits of resolution per amplitude component.
    pub fn resolution_bits(&self) -> u32 {
        match self {
            Self::Full => 64,
            Self::Fixed(bits) => *bits,
        }
    }
}

impl Default for PrecisionMode {
    fn default() -> Self {
        Self::Full
    }
}

impl fmt::Display for PrecisionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Full => f.write_str("full"),
            Self::Fixed(bits) => write!(f, "fixed:{bits}"),
        }
    }
}

impl std::str::FromStr for PrecisionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "full" {
            return Ok(Self::Full);
        }
        let bits = s
            .strip_prefix("fixed:")
            .ok_or_else(|| format!("expected `full` or `fixed:B`, got `{s}`"))?;
        let bits: u32 = bits
            .parse()
            .map_err(|_| format!("invalid bit count `{bits}`"))?;
        Self::fixed(bits).map_err(|e| e.to_string())
    }
}

/// Normalized pure state of `num_qubits` qubits.
///
/// Qubit `q` is bit `q` of the amplitude index (little-endian).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<ComplexAmplitude>,
}

impl StateVector {
    /// The all-zeros basis state.
    pub fn zero(num_qubits: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Self {
            num_qubits,
            amplitudes,
        }
    }

    /// Wraps amplitudes that are already normalized within [`NORM_TOLERANCE`].
    pub fn from_amplitudes(amplitudes: Vec<ComplexAmplitude>) -> Result<Self, BlochError> {
        let num_qubits = check_shape(&amplitudes)?;
        let norm_sq = norm_sqr(&amplitudes);
        if (norm_sq.sqrt() - 1.0).abs() > NORM_TOLERANCE {
            return Err(BlochError::NotNormalized(norm_sq.sqrt() - 1.0));
        }
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Skips the norm check; the caller guarantees the invariant.
    pub(crate) fn from_raw(num_qubits: usize, amplitudes: Vec<ComplexAmplitude>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << num_qubits);
        Self {
            num_qubits,
            amplitudes,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[ComplexAmplitude] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [ComplexAmplitude] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<ComplexAmplitude> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amplitudes).sqrt()
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        let overlap: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        overlap.norm_sqr()
    }

    /// Address of the amplitude buffer, used to check that a register is
    /// never reallocated while a job runs.
    pub fn buffer_token(&self) -> usize {
        self.amplitudes.as_ptr() as usize
    }
}

fn check_shape(amplitudes: &[ComplexAmplitude]) -> Result<usize, BlochError> {
    let len = amplitudes.len();
    if len == 0 || !len.is_power_of_two() {
        return Err(BlochError::BadLength(len));
    }
    if let Some(i) = amplitudes
        .iter()
        .position(|a| !a.re.is_finite() || !a.im.is_finite())
    {
        return Err(BlochError::NonFiniteAmplitude(i));
    }
    Ok(len.trailing_zeros() as usize)
}

fn norm_sqr(amplitudes: &[ComplexAmplitude]) -> f64 {
    amplitudes.iter().map(|a| a.norm_sqr()).sum()
}

/// Scales `amplitudes` by one positive real so the result has unit norm.
pub fn normalize(mut amplitudes: Vec<ComplexAmplitude>) -> Result<StateVector, BlochError> {
    let num_qubits = check_shape(&amplitudes)?;
    rescale(&mut amplitudes)?;
    Ok(StateVector {
        num_qubits,
        amplitudes,
    })
}

pub(crate) fn rescale(amplitudes: &mut [ComplexAmplitude]) -> Result<(), BlochError> {
    let norm = norm_sqr(amplitudes).sqrt();
    if norm < ZERO_NORM_THRESHOLD {
        return Err(BlochError::ZeroNorm(norm));
    }
    let inv = norm.recip();
    for a in amplitudes.iter_mut() {
        *a *= inv;
    }
    Ok(())
}

/// Single-qubit state for a point on the Bloch sphere:
/// `(cos(theta/2), e^{i phi} sin(theta/2))`.
pub fn angles_to_state(angles: BlochAngles) -> StateVector {
    let [zero, one] = angles_to_pair(angles);
    StateVector::from_raw(1, vec![zero, one])
}

pub(crate) fn angles_to_pair(angles: BlochAngles) -> [ComplexAmplitude; 2] {
    let half = angles.theta / 2.0;
    [
        Complex64::new(half.cos(), 0.0),
        Complex64::from_polar(half.sin(), angles.phi),
    ]
}

/// Inverse of [`angles_to_state`], up to global phase.
pub fn state_to_angles(state: &StateVector) -> Result<BlochAngles, BlochError> {
    if state.num_qubits != 1 {
        return Err(BlochError::NotSingleQubit(state.num_qubits));
    }
    let (a, b) = (state.amplitudes[0], state.amplitudes[1]);
    let (ma, mb) = (a.norm(), b.norm());
    let theta = (2.0 * mb.atan2(ma)).clamp(0.0, PI);
    // phi is the relative phase; undefined at the poles, canonicalized to 0
    let phi = if ma == 0.0 || mb == 0.0 {
        0.0
    } else {
        b.arg() - a.arg()
    };
    BlochAngles::new(theta, phi)
}

/// Probability of measuring 0: `(1 + cos theta) / 2`.
pub fn p_zero(angles: BlochAngles) -> f64 {
    (1.0 + angles.theta.cos()) / 2.0
}

/// Rounds every real and imaginary component to the nearest multiple of
/// `2^-(bits-1)` (ties to even), then renormalizes.
pub fn quantize_state(state: &StateVector, bits: u32) -> Result<StateVector, BlochError> {
    let mut out = state.clone();
    quantize_in_place(&mut out.amplitudes, bits)?;
    Ok(out)
}

pub(crate) fn quantize_in_place(
    amplitudes: &mut [ComplexAmplitude],
    bits: u32,
) -> Result<(), BlochError> {
    if !(MIN_FIXED_BITS..=MAX_FIXED_BITS).contains(&bits) {
        return Err(BlochError::InvalidBits(bits));
    }
    let scale = (1u64 << (bits - 1)) as f64;
    let round = |x: f64| (x * scale).round_ties_even() / scale;
    for a in amplitudes.iter_mut() {
        *a = Complex64::new(round(a.re), round(a.im));
    }
    if amplitudes.iter().all(|a| a.re == 0.0 && a.im == 0.0) {
        return Err(BlochError::QuantizationCollapse(bits));
    }
    rescale(amplitudes)
}
