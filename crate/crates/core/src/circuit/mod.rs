//! Circuit intermediate representation: a flat, validated instruction
//! list over named quantum and classical registers, with a QASM-subset
//! front end and a canonical printer.

mod diagnostic;
mod emit;
mod gates;
mod lexer;
mod parser;
mod validate;

use std::collections::HashMap;
use std::ops::Range;

use serde::Serialize;

pub use diagnostic::{sort_diagnostics, Diagnostic, DiagnosticCode, Severity};
pub use emit::emit_qasm;
pub use gates::{gate_matrix, GateError, GateKind, GateMatrix, UNITARY_TOLERANCE};
pub use parser::{parse_qasm, parse_qasm_bytes, parse_qasm_with, ParseOptions};
pub use validate::validate;

/// Largest classical register file accepted by the parser and validator.
pub const DEFAULT_MAX_CLBITS: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Register {
    pub name: String,
    pub size: usize,
}

impl Register {
    pub fn new(name: impl Into<String>, size: usize) -> Self {
        Self {
            name: name.into(),
            size,
        }
    }
}

/// One bit of a named register: `q[3]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct BitRef {
    pub register: String,
    pub index: usize,
}

impl BitRef {
    pub fn new(register: impl Into<String>, index: usize) -> Self {
        Self {
            register: register.into(),
            index,
        }
    }
}

pub type QubitRef = BitRef;
pub type ClbitRef = BitRef;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateOp {
    pub kind: GateKind,
    /// Radians.
    pub params: Vec<f64>,
    pub controls: Vec<QubitRef>,
    pub targets: Vec<QubitRef>,
}

impl GateOp {
    /// Builds a gate from its operands in QASM argument order; leading
    /// operands become controls for controlled gates.
    pub fn new(kind: GateKind, params: Vec<f64>, mut operands: Vec<QubitRef>) -> Self {
        let split = kind.num_controls().min(operands.len());
        let targets = operands.split_off(split);
        Self {
            kind,
            params,
            controls: operands,
            targets,
        }
    }

    /// Operands in QASM argument order (controls first).
    pub fn operands(&self) -> impl Iterator<Item = &QubitRef> {
        self.controls.iter().chain(&self.targets)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Instruction {
    Gate(GateOp),
    Measure {
        qubit: QubitRef,
        clbit: ClbitRef,
    },
    Reset(QubitRef),
    /// Applies `gate` iff the little-endian value of `register` equals `value`.
    Conditional {
        register: String,
        value: u64,
        gate: GateOp,
    },
    Barrier(Vec<QubitRef>),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CircuitIR {
    pub quantum_registers: Vec<Register>,
    pub classical_registers: Vec<Register>,
    pub instructions: Vec<Instruction>,
}

impl CircuitIR {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_qreg(mut self, name: impl Into<String>, size: usize) -> Self {
        self.quantum_registers.push(Register::new(name, size));
        self
    }

    pub fn with_creg(mut self, name: impl Into<String>, size: usize) -> Self {
        self.classical_registers.push(Register::new(name, size));
        self
    }

    pub fn push(&mut self, instruction: Instruction) -> &mut Self {
        self.instructions.push(instruction);
        self
    }

    pub fn gate(&mut self, kind: GateKind, params: &[f64], operands: &[(&str, usize)]) -> &mut Self {
        let operands = operands.iter().map(|&(r, i)| BitRef::new(r, i)).collect();
        self.push(Instruction::Gate(GateOp::new(kind, params.to_vec(), operands)))
    }

    pub fn measure(&mut self, qubit: (&str, usize), clbit: (&str, usize)) -> &mut Self {
        self.push(Instruction::Measure {
            qubit: BitRef::new(qubit.0, qubit.1),
            clbit: BitRef::new(clbit.0, clbit.1),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.quantum_registers.iter().map(|r| r.size).sum()
    }

    pub fn num_clbits(&self) -> usize {
        self.classical_registers.iter().map(|r| r.size).sum()
    }

    pub fn has_conditionals(&self) -> bool {
        self.instructions
            .iter()
            .any(|i| matches!(i, Instruction::Conditional { .. }))
    }

    /// True when no gate, reset or conditional follows a measurement: the
    /// final state before readout is a pure function of the gates.
    pub fn is_measurement_terminal(&self) -> bool {
        let mut measured = false;
        for inst in &self.instructions {
            match inst {
                Instruction::Measure { .. } => measured = true,
                Instruction::Barrier(_) => {}
                Instruction::Gate(_) => {
                    if measured {
                        return false;
                    }
                }
                Instruction::Reset(_) | Instruction::Conditional { .. } => return false,
            }
        }
        true
    }

    /// Lowers register references to flat bit indices and resolves gate
    /// matrices. Registers are laid out in declaration order: the first
    /// declared register owns the lowest indices.
    pub fn lower(&self) -> Result<Vec<FlatOp>, LowerError> {
        let qubits = offsets(&self.quantum_registers);
        let clbits = offsets(&self.classical_registers);
        let qubit = |r: &BitRef| resolve(&qubits, r);
        let clbit = |r: &BitRef| resolve(&clbits, r);
        let gate = |g: &GateOp| -> Result<FlatGate, LowerError> {
            let qs = g.operands().map(qubit).collect::<Result<Vec<_>, _>>()?;
            if qs.len() != g.kind.num_qubits() {
                return Err(LowerError::Arity(g.kind));
            }
            Ok(FlatGate {
                kind: g.kind,
                matrix: g.kind.matrix(&g.params).map_err(LowerError::Gate)?,
                qubits: qs,
            })
        };
        self.instructions
            .iter()
            .map(|inst| {
                Ok(match inst {
                    Instruction::Gate(g) => FlatOp::Gate(gate(g)?),
                    Instruction::Measure { qubit: q, clbit: c } => FlatOp::Measure {
                        qubit: qubit(q)?,
                        clbit: clbit(c)?,
                    },
                    Instruction::Reset(q) => FlatOp::Reset(qubit(q)?),
                    Instruction::Conditional {
                        register,
                        value,
                        gate: g,
                    } => {
                        let &(start, size) = clbits
                            .get(register.as_str())
                            .ok_or_else(|| LowerError::Undeclared(register.clone()))?;
                        FlatOp::Conditional {
                            clbits: start..start + size,
                            value: *value,
                            gate: gate(g)?,
                        }
                    }
                    Instruction::Barrier(_) => FlatOp::Barrier,
                })
            })
            .collect()
    }

    /// Flat (qubit, clbit) pairs of the trailing measurement block, for
    /// measurement-terminal circuits.
    pub fn terminal_measurements(&self) -> Result<Vec<(usize, usize)>, LowerError> {
        Ok(self
            .lower()?
            .into_iter()
            .filter_map(|op| match op {
                FlatOp::Measure { qubit, clbit } => Some((qubit, clbit)),
                _ => None,
            })
            .collect())
    }
}

fn offsets(regs: &[Register]) -> HashMap<&str, (usize, usize)> {
    let mut next = 0;
    regs.iter()
        .map(|r| {
            let start = next;
            next += r.size;
            (r.name.as_str(), (start, r.size))
        })
        .collect()
}

fn resolve(map: &HashMap<&str, (usize, usize)>, r: &BitRef) -> Result<usize, LowerError> {
    let &(start, size) = map
        .get(r.register.as_str())
        .ok_or_else(|| LowerError::Undeclared(r.register.clone()))?;
    if r.index >= size {
        return Err(LowerError::OutOfRange(r.clone()));
    }
    Ok(start + r.index)
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum LowerError {
    #[error("undeclared register `{0}`")]
    Undeclared(String),
    #[error("{}[{}] is out of range", .0.register, .0.index)]
    OutOfRange(BitRef),
    #[error("wrong operand count for `{0}`")]
    Arity(GateKind),
    #[error(transparent)]
    Gate(GateError),
}

/// A gate with flat qubit indices (QASM operand order) and its matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatGate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub matrix: GateMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlatOp {
    Gate(FlatGate),
    Measure { qubit: usize, clbit: usize },
    Reset(usize),
    Conditional {
        clbits: Range<usize>,
        value: u64,
        gate: FlatGate,
    },
    Barrier,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell() -> CircuitIR {
        let mut ir = CircuitIR::new().with_qreg("q", 2).with_creg("c", 2);
        ir.gate(GateKind::H, &[], &[("q", 0)])
            .gate(GateKind::Cx, &[], &[("q", 0), ("q", 1)])
            .measure(("q", 0), ("c", 0))
            .measure(("q", 1), ("c", 1));
        ir
    }

    #[test]
    fn controls_split_off() {
        let g = GateOp::new(GateKind::Cx, vec![], vec![BitRef::new("q", 1), BitRef::new("q", 0)]);
        assert_eq!(g.controls, vec![BitRef::new("q", 1)]);
        assert_eq!(g.targets, vec![BitRef::new("q", 0)]);
        let g = GateOp::new(GateKind::Swap, vec![], vec![BitRef::new("q", 1), BitRef::new("q", 0)]);
        assert!(g.controls.is_empty());
        assert_eq!(g.operands().count(), 2);
    }

    #[test]
    fn lowering_uses_declaration_order() {
        let mut ir = CircuitIR::new()
            .with_qreg("a", 2)
            .with_qreg("b", 3)
            .with_creg("c", 1)
            .with_creg("d", 2);
        ir.gate(GateKind::Cx, &[], &[("b", 2), ("a", 1)])
            .measure(("b", 0), ("d", 1));
        let ops = ir.lower().unwrap();
        match &ops[0] {
            FlatOp::Gate(g) => assert_eq!(g.qubits, vec![4, 1]),
            other => panic!("{other:?}"),
        }
        assert_eq!(ops[1], FlatOp::Measure { qubit: 2, clbit: 2 });
    }

    #[test]
    fn terminal_detection() {
        assert!(bell().is_measurement_terminal());
        let mut ir = bell();
        ir.gate(GateKind::X, &[], &[("q", 0)]);
        assert!(!ir.is_measurement_terminal());
        let mut ir = bell();
        ir.push(Instruction::Barrier(vec![BitRef::new("q", 0)]));
        assert!(ir.is_measurement_terminal());
        assert_eq!(bell().terminal_measurements().unwrap(), vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn lowering_errors() {
        let mut ir = CircuitIR::new().with_qreg("q", 1);
        ir.gate(GateKind::X, &[], &[("q", 1)]);
        assert!(matches!(ir.lower(), Err(LowerError::OutOfRange(_))));
        let mut ir = CircuitIR::new().with_qreg("q", 1);
        ir.gate(GateKind::X, &[], &[("r", 0)]);
        assert_eq!(ir.lower(), Err(LowerError::Undeclared("r".into())));
    }
}
