//! The standard gate set and its unitary matrices.
//!
//! Two-qubit matrices are written in textbook order: the first operand
//! (the control, for `cx`/`cz`) is the high bit of the 4x4 local index.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::CMatrix;

/// Element-wise unitarity tolerance for gate operands.
pub const UNITARY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GateError {
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("gate `{gate}` takes {expected} parameter(s), got {got}")]
    ArityMismatch {
        gate: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("gate `{0}` produced a non-unitary matrix")]
    NotUnitary(GateKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    Id,
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    T,
    Tdg,
    Rx,
    Ry,
    Rz,
    U,
    Cx,
    Cz,
    Swap,
}

impl GateKind {
    pub const ALL: [GateKind; 16] = [
        GateKind::Id,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::H,
        GateKind::S,
        GateKind::Sdg,
        GateKind::T,
        GateKind::Tdg,
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::U,
        GateKind::Cx,
        GateKind::Cz,
        GateKind::Swap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Id => "id",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::U => "u",
            GateKind::Cx => "cx",
            GateKind::Cz => "cz",
            GateKind::Swap => "swap",
        }
    }

    pub fn num_params(self) -> usize {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz => 1,
            GateKind::U => 3,
            _ => 0,
        }
    }

    pub fn num_qubits(self) -> usize {
        match self {
            GateKind::Cx | GateKind::Cz | GateKind::Swap => 2,
            _ => 1,
        }
    }

    /// Number of leading operands that act as controls.
    pub fn num_controls(self) -> usize {
        match self {
            GateKind::Cx | GateKind::Cz => 1,
            _ => 0,
        }
    }

    pub fn matrix(self, params: &[f64]) -> Result<GateMatrix, GateError> {
        if params.len() != self.num_params() {
            return Err(GateError::ArityMismatch {
                gate: self,
                expected: self.num_params(),
                got: params.len(),
            });
        }
        let m = build(self, params);
        if !m.is_unitary(UNITARY_TOLERANCE) {
            return Err(GateError::NotUnitary(self));
        }
        Ok(GateMatrix(m))
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = GateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GateKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| GateError::UnknownGate(s.to_owned()))
    }
}

/// A 2x2 or 4x4 unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct GateMatrix(CMatrix);

impl GateMatrix {
    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    #[cfg(test)]
    pub(crate) fn entries(&self) -> &[Complex64] {
        self.0.as_slice()
    }
}

/// Looks up a gate by its lowercase QASM name.
pub fn gate_matrix(name: &str, params: &[f64]) -> Result<GateMatrix, GateError> {
    name.parse::<GateKind>()?.matrix(params)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn build(kind: GateKind, p: &[f64]) -> CMatrix {
    let o = c(0.0, 0.0);
    let l = c(1.0, 0.0);
    let phase = |t: f64| Complex64::from_polar(1.0, t);
    match kind {
        GateKind::Id => CMatrix::identity(2),
        GateKind::X => CMatrix::from_rows([[o, l], [l, o]]),
        GateKind::Y => CMatrix::from_rows([[o, c(0.0, -1.0)], [c(0.0, 1.0), o]]),
        GateKind::Z => CMatrix::from_rows([[l, o], [o, c(-1.0, 0.0)]]),
        GateKind::H => {
            let h = c(FRAC_1_SQRT_2, 0.0);
            CMatrix::from_rows([[h, h], [h, -h]])
        }
        GateKind::S => CMatrix::from_rows([[l, o], [o, c(0.0, 1.0)]]),
        GateKind::Sdg => CMatrix::from_rows([[l, o], [o, c(0.0, -1.0)]]),
        GateKind::T => CMatrix::from_rows([[l, o], [o, phase(std::f64::consts::FRAC_PI_4)]]),
        GateKind::Tdg => CMatrix::from_rows([[l, o], [o, phase(-std::f64::consts::FRAC_PI_4)]]),
        GateKind::Rx => {
            let (s, co) = (p[0] / 2.0).sin_cos();
            CMatrix::from_rows([[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]])
        }
        GateKind::Ry => {
            let (s, co) = (p[0] / 2.0).sin_cos();
            CMatrix::from_rows([[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]])
        }
        GateKind::Rz => CMatrix::from_rows([[phase(-p[0] / 2.0), o], [o, phase(p[0] / 2.0)]]),
        GateKind::U => {
            let (theta, phi, lambda) = (p[0], p[1], p[2]);
            let (s, co) = (theta / 2.0).sin_cos();
            CMatrix::from_rows([
                [c(co, 0.0), -phase(lambda) * s],
                [phase(phi) * s, phase(phi + lambda) * co],
            ])
        }
        GateKind::Cx => CMatrix::from_rows([
            [l, o, o, o],
            [o, l, o, o],
            [o, o, o, l],
            [o, o, l, o],
        ]),
        GateKind::Cz => CMatrix::from_rows([
            [l, o, o, o],
            [o, l, o, o],
            [o, o, l, o],
            [o, o, o, c(-1.0, 0.0)],
        ]),
        GateKind::Swap => CMatrix::from_rows([
            [l, o, o, o],
            [o, o, l, o],
            [o, l, o, o],
            [o, o, o, l],
        ]),
    }
}
