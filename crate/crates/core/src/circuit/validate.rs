use std::collections::HashMap;

use super::diagnostic::{Diagnostic, DiagnosticCode as Code};
use super::{BitRef, CircuitIR, GateOp, Instruction, DEFAULT_MAX_CLBITS};

/// Checks every IR invariant. An empty result means the IR is valid for an
/// engine holding at most `max_qubits` qubits.
///
/// IR values carry no source positions, so diagnostics use line/column 0.
pub fn validate(ir: &CircuitIR, max_qubits: usize) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut err = |code, msg: String| out.push(Diagnostic::error(code, (0, 0), msg));

    let mut qregs = HashMap::new();
    let mut cregs = HashMap::new();
    for (regs, map) in [
        (&ir.quantum_registers, &mut qregs),
        (&ir.classical_registers, &mut cregs),
    ] {
        for r in regs {
            if r.size == 0 {
                err(Code::InvalidRegisterSize, format!("register `{}` has size 0", r.name));
            }
            map.insert(r.name.as_str(), r.size);
        }
    }
    let mut seen = HashMap::new();
    for r in ir.quantum_registers.iter().chain(&ir.classical_registers) {
        if seen.insert(r.name.as_str(), ()).is_some() {
            err(Code::DuplicateRegister, format!("register `{}` is declared twice", r.name));
        }
    }
    if ir.num_qubits() > max_qubits {
        err(
            Code::CapacityExceeded,
            format!("{} qubits exceed the engine capacity of {max_qubits}", ir.num_qubits()),
        );
    }
    if ir.num_clbits() > DEFAULT_MAX_CLBITS {
        err(
            Code::CapacityExceeded,
            format!("{} classical bits exceed the limit of {DEFAULT_MAX_CLBITS}", ir.num_clbits()),
        );
    }

    let check_bit = |map: &HashMap<&str, usize>, b: &BitRef, noun: &str| -> Option<(Code, String)> {
        match map.get(b.register.as_str()) {
            None => Some((
                Code::UndeclaredRegister,
                format!("`{}` is not a declared {noun} register", b.register),
            )),
            Some(&size) if b.index >= size => Some((
                Code::IndexOutOfRange,
                format!("{}[{}] is out of range for size {size}", b.register, b.index),
            )),
            _ => None,
        }
    };
    let check_gate = |g: &GateOp| -> Vec<(Code, String)> {
        let mut v = Vec::new();
        if g.params.len() != g.kind.num_params() {
            v.push((
                Code::ParamCount,
                format!("`{}` takes {} parameter(s), got {}", g.kind, g.kind.num_params(), g.params.len()),
            ));
        }
        if g.params.iter().any(|p| !p.is_finite()) {
            v.push((Code::InvalidParameter, format!("`{}` has a non-finite parameter", g.kind)));
        }
        if g.controls.len() != g.kind.num_controls()
            || g.controls.len() + g.targets.len() != g.kind.num_qubits()
        {
            v.push((Code::ArityMismatch, format!("`{}` has the wrong operand count", g.kind)));
        }
        let ops: Vec<&BitRef> = g.operands().collect();
        for (i, b) in ops.iter().enumerate() {
            if let Some(e) = check_bit(&qregs, b, "quantum") {
                v.push(e);
            }
            if ops[..i].contains(b) {
                v.push((
                    Code::DuplicateOperand,
                    format!("{}[{}] appears twice in `{}`", b.register, b.index, g.kind),
                ));
            }
        }
        v
    };

    for inst in &ir.instructions {
        let found = match inst {
            Instruction::Gate(g) => check_gate(g),
            Instruction::Measure { qubit, clbit } => check_bit(&qregs, qubit, "quantum")
                .into_iter()
                .chain(check_bit(&cregs, clbit, "classical"))
                .collect(),
            Instruction::Reset(q) => check_bit(&qregs, q, "quantum").into_iter().collect(),
            Instruction::Barrier(qs) => qs
                .iter()
                .filter_map(|q| check_bit(&qregs, q, "quantum"))
                .collect(),
            Instruction::Conditional { register, gate, .. } => {
                let mut v = check_gate(gate);
                if !cregs.contains_key(register.as_str()) {
                    v.insert(
                        0,
                        (
                            Code::UndeclaredRegister,
                            format!("condition reads undeclared classical register `{register}`"),
                        ),
                    );
                }
                v
            }
        };
        for (code, msg) in found {
            err(code, msg);
        }
    }
    out
}
