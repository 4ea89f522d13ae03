use std::fmt::Write;

use super::{BitRef, CircuitIR, GateOp, Instruction};

/// Canonical QASM text for `ir`.
///
/// Parameters are printed with Rust's shortest round-trip float format, so
/// re-parsing reproduces them bit for bit.
pub fn emit_qasm(ir: &CircuitIR) -> String {
    let mut out = String::from("OPENQASM 2.0;\n");
    for r in &ir.quantum_registers {
        let _ = writeln!(out, "qreg {}[{}];", r.name, r.size);
    }
    for r in &ir.classical_registers {
        let _ = writeln!(out, "creg {}[{}];", r.name, r.size);
    }
    for inst in &ir.instructions {
        match inst {
            Instruction::Gate(g) => {
                write_gate(&mut out, g);
            }
            Instruction::Measure { qubit, clbit } => {
                let _ = write!(out, "measure {} -> {}", bit(qubit), bit(clbit));
            }
            Instruction::Reset(q) => {
                let _ = write!(out, "reset {}", bit(q));
            }
            Instruction::Conditional {
                register,
                value,
                gate,
            } => {
                let _ = write!(out, "if ({register}=={value}) ");
                write_gate(&mut out, gate);
            }
            Instruction::Barrier(qs) => {
                out.push_str("barrier ");
                out.push_str(&join(qs));
            }
        }
        out.push_str(";\n");
    }
    out
}

fn write_gate(out: &mut String, g: &GateOp) {
    out.push_str(g.kind.name());
    if !g.params.is_empty() {
        let params: Vec<String> = g.params.iter().map(|p| format!("{p:?}")).collect();
        let _ = write!(out, "({})", params.join(","));
    }
    out.push(' ');
    let ops: Vec<BitRef> = g.operands().cloned().collect();
    out.push_str(&join(&ops));
}

fn bit(b: &BitRef) -> String {
    format!("{}[{}]", b.register, b.index)
}

fn join(bits: &[BitRef]) -> String {
    bits.iter().map(bit).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{parse_qasm, GateKind};

    #[test]
    fn bell_round_trip() {
        let ir = parse_qasm("OPENQASM 2.0; qreg q[2]; creg c[2]; h q[0]; cx q[0],q[1]; measure q->c;")
            .unwrap();
        let text = emit_qasm(&ir);
        assert_eq!(
            text,
            "OPENQASM 2.0;\nqreg q[2];\ncreg c[2];\nh q[0];\ncx q[0],q[1];\n\
             measure q[0] -> c[0];\nmeasure q[1] -> c[1];\n"
        );
        assert_eq!(parse_qasm(&text).unwrap(), ir);
    }

    #[test]
    fn conditional_form() {
        let mut ir = CircuitIR::new().with_qreg("q", 1).with_creg("c", 1);
        ir.push(Instruction::Conditional {
            register: "c".into(),
            value: 1,
            gate: GateOp::new(GateKind::X, vec![], vec![BitRef::new("q", 0)]),
        });
        let text = emit_qasm(&ir);
        assert!(text.ends_with("if (c==1) x q[0];\n"), "{text}");
        assert_eq!(parse_qasm(&text).unwrap(), ir);
    }

    #[test]
    fn registers_only() {
        let ir = CircuitIR::new().with_qreg("q", 3).with_creg("c", 1);
        assert_eq!(emit_qasm(&ir), "OPENQASM 2.0;\nqreg q[3];\ncreg c[1];\n");
    }

    #[test]
    fn awkward_parameters_survive() {
        for p in [1e-300, -0.0, 1e300, -2.5e-7, std::f64::consts::PI, 0.1 + 0.2] {
            let mut ir = CircuitIR::new().with_qreg("q", 1);
            ir.gate(GateKind::Rz, &[p], &[("q", 0)]);
            let back = parse_qasm(&emit_qasm(&ir)).unwrap();
            match &back.instructions[0] {
                Instruction::Gate(g) => assert_eq!(g.params[0].to_bits(), p.to_bits()),
                other => panic!("{other:?}"),
            }
        }
    }
}
