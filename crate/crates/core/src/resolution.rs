//! Information resolution of a qubit: how many distinguishable quanta an
//! energy gap holds when the lowest possible frequency is set by the
//! Hubble rate, `I = dE / (h * H)`.

use serde::Serialize;
use thiserror::Error;

/// Planck constant in J*s (exact SI value).
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Default Hubble rate in 1/s, about 70 km/s/Mpc.
pub const DEFAULT_HUBBLE: f64 = 2.27e-18;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResolutionError {
    #[error("{name} must be a finite positive number, got {value}")]
    NonPositiveInput { name: &'static str, value: f64 },
    #[error("energy gap holds {0} quanta, fewer than the ground state")]
    BelowGroundState(f64),
}

/// The energy gap, given directly or as a transition frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyGap {
    /// Joules.
    DeltaE(f64),
    /// Hertz; converted with `dE = h * f`.
    Frequency(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionQuery {
    pub gap: EnergyGap,
    /// 1/s.
    pub hubble: f64,
}

impl ResolutionQuery {
    pub fn frequency(hz: f64) -> Self {
        Self {
            gap: EnergyGap::Frequency(hz),
            hubble: DEFAULT_HUBBLE,
        }
    }

    pub fn delta_e(joules: f64) -> Self {
        Self {
            gap: EnergyGap::DeltaE(joules),
            hubble: DEFAULT_HUBBLE,
        }
    }

    pub fn with_hubble(mut self, hubble: f64) -> Self {
        self.hubble = hubble;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolutionReport {
    /// Distinguishable quanta `I`.
    pub quanta_count: f64,
    /// `ceil(log2 I)`: classical bits needed to address every quantum.
    pub min_bits: u32,
    /// Energy gap in joules.
    pub delta_e: f64,
    /// Present only when the query was given as a frequency, in Hz.
    pub frequency: Option<f64>,
    /// 1/s.
    pub hubble: f64,
    /// J*s.
    pub planck: f64,
}

fn positive(name: &'static str, value: f64) -> Result<f64, ResolutionError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(ResolutionError::NonPositiveInput { name, value })
    }
}

pub fn third_quantization(query: &ResolutionQuery) -> Result<ResolutionReport, ResolutionError> {
    let hubble = positive("hubble", query.hubble)?;
    let (delta_e, frequency) = match query.gap {
        EnergyGap::DeltaE(e) => (positive("delta_e", e)?, None),
        EnergyGap::Frequency(f) => (PLANCK * positive("frequency", f)?, Some(f)),
    };
    let quanta_count = delta_e / (PLANCK * hubble);
    if !quanta_count.is_finite() {
        return Err(ResolutionError::NonPositiveInput {
            name: "delta_e",
            value: delta_e,
        });
    }
    if quanta_count < 1.0 {
        return Err(ResolutionError::BelowGroundState(quanta_count));
    }
    Ok(ResolutionReport {
        quanta_count,
        min_bits: quanta_count.log2().ceil() as u32,
        delta_e,
        frequency,
        hubble,
        planck: PLANCK,
    })
}
