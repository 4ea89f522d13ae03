//! Brute-force reference: the whole circuit as one dense matrix.
//!
//! Each gate is embedded into the full space entry by entry from its
//! definition, `E[i][j] = U[local(i)][local(j)]` when `i` and `j` agree on
//! every non-operand bit, and the embeddings are multiplied together. None
//! of the engine's pair/quad indexing is reused.

use super::EngineError;
use crate::circuit::{CircuitIR, FlatOp};
use crate::linalg::CMatrix;

pub const MAX_ORACLE_QUBITS: usize = 8;

/// Unitary of a gate-only circuit over `n` qubits (`n >= ir.num_qubits()`).
pub fn full_circuit_unitary(ir: &CircuitIR, n: usize) -> Result<CMatrix, EngineError> {
    if n > MAX_ORACLE_QUBITS {
        return Err(EngineError::CapacityExceeded {
            requested: n,
            max: MAX_ORACLE_QUBITS,
        });
    }
    if ir.num_qubits() > n {
        return Err(EngineError::ShapeMismatch {
            have: n,
            have_bits: 0,
            want: ir.num_qubits(),
            want_bits: ir.num_clbits(),
        });
    }
    let dim = 1usize << n;
    let mut total = CMatrix::identity(dim);
    for op in ir.lower()? {
        let gate = match op {
            FlatOp::Gate(g) => g,
            FlatOp::Barrier => continue,
            FlatOp::Measure { .. } => return Err(EngineError::UnsupportedInstruction("measure")),
            FlatOp::Reset(_) => return Err(EngineError::UnsupportedInstruction("reset")),
            FlatOp::Conditional { .. } => {
                return Err(EngineError::UnsupportedInstruction("conditional"))
            }
        };
        let embedded = embed(gate.matrix.as_matrix(), &gate.qubits, n);
        total = &embedded * &total;
    }
    Ok(total)
}

/// Local index of basis state `i`: the first operand is the high bit.
fn local(i: usize, qubits: &[usize]) -> usize {
    qubits
        .iter()
        .fold(0, |acc, &q| (acc << 1) | ((i >> q) & 1))
}

fn embed(u: &CMatrix, qubits: &[usize], n: usize) -> CMatrix {
    let dim = 1usize << n;
    let mask: usize = qubits.iter().map(|&q| 1usize << q).sum();
    let mut e = CMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            if i & !mask == j & !mask {
                e[(i, j)] = u[(local(i, qubits), local(j, qubits))];
            }
        }
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{gate_matrix, parse_qasm};
    use num_complex::Complex64;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn single_hadamard() {
        let ir = parse_qasm("OPENQASM 2.0; qreg q[1]; h q[0];").unwrap();
        let u = full_circuit_unitary(&ir, 1).unwrap();
        assert_eq!(&u, gate_matrix("h", &[]).unwrap().as_matrix());
    }

    #[test]
    fn hadamard_on_low_qubit_is_kron_with_identity() {
        let ir = parse_qasm("OPENQASM 2.0; qreg q[2]; h q[0];").unwrap();
        let u = full_circuit_unitary(&ir, 2).unwrap();
        // q0 is the low bit: I (q1) ⊗ H (q0)
        let expect = CMatrix::identity(2).kron(gate_matrix("h", &[]).unwrap().as_matrix());
        assert_eq!(u, expect);
    }

    #[test]
    fn bell_from_product() {
        let ir = parse_qasm("OPENQASM 2.0; qreg q[2]; h q[0]; cx q[0],q[1];").unwrap();
        let u = full_circuit_unitary(&ir, 2).unwrap();
        let zero = Complex64::new(0.0, 0.0);
        let out = u.mul_vec(&[Complex64::new(1.0, 0.0), zero, zero, zero]);
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        assert_eq!(out, vec![s, zero, zero, s]);
        assert!(u.is_unitary(1e-12));
    }

    #[test]
    fn rejects_non_unitary_steps() {
        for src in [
            "OPENQASM 2.0; qreg q[1]; creg c[1]; measure q[0] -> c[0];",
            "OPENQASM 2.0; qreg q[1]; reset q[0];",
            "OPENQASM 2.0; qreg q[1]; creg c[1]; if (c==0) x q[0];",
        ] {
            let ir = parse_qasm(src).unwrap();
            assert!(matches!(
                full_circuit_unitary(&ir, 1),
                Err(EngineError::UnsupportedInstruction(_))
            ));
        }
        let ir = parse_qasm("OPENQASM 2.0; qreg q[2]; barrier q; h q[0];").unwrap();
        assert!(full_circuit_unitary(&ir, 2).is_ok());
        assert!(full_circuit_unitary(&ir, 9).is_err());
        assert!(full_circuit_unitary(&ir, 1).is_err());
    }
}
