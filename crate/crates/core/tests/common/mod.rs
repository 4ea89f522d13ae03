#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use vqpu_core::bloch::{angles_to_state, BlochAngles};
use vqpu_core::circuit::{BitRef, CircuitIR, GateKind, GateOp, Instruction};

pub fn random_angles(rng: &mut impl Rng, n: usize) -> Vec<BlochAngles> {
    (0..n)
        .map(|_| BlochAngles::new(rng.gen_range(0.0..=PI), rng.gen_range(0.0..TAU)).unwrap())
        .collect()
}

/// Gate-only circuit on `q[n]` with `depth` random gates, plus `c[n]` when
/// `with_creg` (no measurements are added).
pub fn random_gate_circuit(rng: &mut impl Rng, n: usize, depth: usize, with_creg: bool) -> CircuitIR {
    let mut ir = CircuitIR::new().with_qreg("q", n);
    if with_creg {
        ir = ir.with_creg("c", n);
    }
    let kinds: Vec<GateKind> = GateKind::ALL
        .into_iter()
        .filter(|k| k.num_qubits() <= n)
        .collect();
    for _ in 0..depth {
        let kind = kinds[rng.gen_range(0..kinds.len())];
        let params = (0..kind.num_params()).map(|_| rng.gen_range(-TAU..TAU)).collect();
        let mut qs = Vec::new();
        while qs.len() < kind.num_qubits() {
            let q = rng.gen_range(0..n);
            if !qs.contains(&q) {
                qs.push(q);
            }
        }
        let operands = qs.into_iter().map(|q| BitRef::new("q", q)).collect();
        ir.push(Instruction::Gate(GateOp::new(kind, params, operands)));
    }
    ir
}

/// Product state with qubit 0 as the least significant index bit, built as
/// an explicit Kronecker product.
pub fn product_state(angles: &[BlochAngles]) -> Vec<Complex64> {
    let mut psi = vec![Complex64::new(1.0, 0.0)];
    for a in angles.iter().rev() {
        let s = angles_to_state(*a);
        let (s0, s1) = (s.amplitudes()[0], s.amplitudes()[1]);
        let mut next = Vec::with_capacity(psi.len() * 2);
        for &x in &psi {
            next.push(x * s0);
            next.push(x * s1);
        }
        psi = next;
    }
    psi
}

pub fn measure_all(ir: &mut CircuitIR, n: usize) {
    for i in 0..n {
        ir.measure(("q", i), ("c", i));
    }
}
