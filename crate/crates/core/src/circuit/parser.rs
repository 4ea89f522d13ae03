//! Recursive-descent parser for the supported OpenQASM 2.0 subset.
//!
//! Syntax errors abandon the current statement and resume after the next
//! `;`, so one pass reports every independent problem. Semantic checks
//! (registers, indices, arities) run as each statement is parsed and carry
//! the position of the offending token.

use std::collections::HashMap;

use super::diagnostic::{sort_diagnostics, Diagnostic, DiagnosticCode as Code};
use super::lexer::{lex, Pos, Tok, Token};
use super::{BitRef, CircuitIR, GateKind, GateOp, Instruction, Register, DEFAULT_MAX_CLBITS};
use crate::DEFAULT_MAX_QUBITS;

const MAX_EXPR_DEPTH: usize = 64;
const MAX_DIAGNOSTICS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    pub max_qubits: usize,
    pub max_clbits: usize,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self {
            max_qubits: DEFAULT_MAX_QUBITS,
            max_clbits: DEFAULT_MAX_CLBITS,
        }
    }
}

pub fn parse_qasm(source: &str) -> Result<CircuitIR, Vec<Diagnostic>> {
    parse_qasm_with(source, &ParseOptions::default())
}

/// Accepts arbitrary bytes; invalid UTF-8 is reported as a diagnostic.
pub fn parse_qasm_bytes(bytes: &[u8], opts: &ParseOptions) -> Result<CircuitIR, Vec<Diagnostic>> {
    match std::str::from_utf8(bytes) {
        Ok(src) => parse_qasm_with(src, opts),
        Err(e) => {
            let valid = std::str::from_utf8(&bytes[..e.valid_up_to()]).unwrap_or_default();
            let line = 1 + valid.matches('\n').count();
            let column = 1 + valid.rsplit('\n').next().map_or(0, |l| l.chars().count());
            Err(vec![Diagnostic::error(
                Code::InvalidUtf8,
                (line, column),
                "source is not valid UTF-8",
            )])
        }
    }
}

pub fn parse_qasm_with(source: &str, opts: &ParseOptions) -> Result<CircuitIR, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let toks = lex(source, &mut diags);
    let mut p = Parser {
        toks,
        i: 0,
        diags,
        ir: CircuitIR::new(),
        regs: HashMap::new(),
        opts: *opts,
        qubits: 0,
        clbits: 0,
    };
    p.program();
    let mut diags = p.diags;
    if diags.iter().any(Diagnostic::is_error) {
        sort_diagnostics(&mut diags);
        diags.truncate(MAX_DIAGNOSTICS);
        Err(diags)
    } else {
        Ok(p.ir)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RegKind {
    Quantum,
    Classical,
}

impl RegKind {
    fn noun(self) -> &'static str {
        match self {
            RegKind::Quantum => "quantum",
            RegKind::Classical => "classical",
        }
    }
}

struct RegInfo {
    kind: RegKind,
    size: usize,
    /// False when the declaration itself was rejected; uses are skipped
    /// silently to avoid cascading errors.
    usable: bool,
}

/// `name` or `name[index]` as written.
struct Arg {
    name: String,
    pos: Pos,
    index: Option<(String, Pos)>,
}

enum Operand {
    Single(BitRef),
    Whole(String, usize),
}

/// Marker: a syntax error was reported; resynchronize.
struct Abort;

type PResult<T> = Result<T, Abort>;

struct Parser {
    toks: Vec<Token>,
    i: usize,
    diags: Vec<Diagnostic>,
    ir: CircuitIR,
    regs: HashMap<String, RegInfo>,
    opts: ParseOptions,
    qubits: usize,
    clbits: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn error(&mut self, code: Code, pos: Pos, msg: impl Into<String>) {
        self.diags.push(Diagnostic::error(code, pos, msg));
    }

    fn unexpected<T>(&mut self, what: &str) -> PResult<T> {
        let found = self.peek().describe();
        let pos = self.pos();
        self.error(Code::Syntax, pos, format!("expected {what}, found {found}"));
        Err(Abort)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<Pos> {
        if *self.peek() == tok {
            Ok(self.bump().pos)
        } else {
            self.unexpected(what)
        }
    }

    fn ident(&mut self) -> PResult<(String, Pos)> {
        match self.peek().clone() {
            Tok::Ident(s) => Ok((s, self.bump().pos)),
            _ => self.unexpected("an identifier"),
        }
    }

    fn int_literal(&mut self) -> PResult<(String, Pos)> {
        match self.peek().clone() {
            Tok::Int(s) => Ok((s, self.bump().pos)),
            _ => self.unexpected("an integer"),
        }
    }

    fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    /// Skips past the next `;` (or a stray `}`).
    fn sync(&mut self) {
        while !self.at_eof() {
            let t = self.bump().tok;
            if matches!(t, Tok::Semi | Tok::RBrace) {
                break;
            }
        }
    }

    fn program(&mut self) {
        if let Tok::Ident(s) = self.peek() {
            if s == "OPENQASM" {
                if self.header().is_err() {
                    self.sync();
                }
            } else {
                self.missing_header();
            }
        } else {
            self.missing_header();
        }
        while !self.at_eof() && self.diags.len() < MAX_DIAGNOSTICS {
            if self.statement().is_err() {
                self.sync();
            }
        }
    }

    fn missing_header(&mut self) {
        let pos = self.pos();
        self.error(Code::MissingHeader, pos, "expected `OPENQASM 2.0;` header");
    }

    fn header(&mut self) -> PResult<()> {
        self.bump();
        let pos = self.pos();
        let version = match self.peek().clone() {
            Tok::Real(v) | Tok::Int(v) => {
                self.bump();
                v
            }
            _ => return self.unexpected("a version number"),
        };
        if version.parse::<f64>().ok() != Some(2.0) {
            self.error(
                Code::UnsupportedVersion,
                pos,
                format!("OpenQASM version {version} is not supported; expected 2.0"),
            );
        }
        self.expect(Tok::Semi, "`;`")?;
        Ok(())
    }

    fn statement(&mut self) -> PResult<()> {
        let (word, pos) = match self.peek().clone() {
            Tok::Ident(s) => (s, self.pos()),
            _ => return self.unexpected("a statement"),
        };
        match word.as_str() {
            "OPENQASM" => {
                self.error(Code::Syntax, pos, "the OPENQASM header must come first");
                Err(Abort)
            }
            "include" => self.include(),
            "qreg" => self.declaration(RegKind::Quantum),
            "creg" => self.declaration(RegKind::Classical),
            "gate" => {
                self.error(
                    Code::UnsupportedConstruct,
                    pos,
                    "user-defined gate bodies are not supported",
                );
                self.skip_block();
                Ok(())
            }
            "opaque" => {
                self.error(
                    Code::UnsupportedConstruct,
                    pos,
                    "opaque gate declarations are not supported",
                );
                Err(Abort)
            }
            "measure" => {
                self.bump();
                let (q, c) = self.measure_args()?;
                self.measure(&q, &c, pos);
                Ok(())
            }
            "reset" => {
                self.bump();
                let arg = self.arg()?;
                self.expect(Tok::Semi, "`;`")?;
                if let Some(expanded) = self.expand(&[arg], RegKind::Quantum, pos) {
                    for mut ops in expanded {
                        self.ir.instructions.push(Instruction::Reset(ops.remove(0)));
                    }
                }
                Ok(())
            }
            "barrier" => {
                self.bump();
                let args = self.arg_list()?;
                self.expect(Tok::Semi, "`;`")?;
                let mut qubits = Vec::new();
                let mut ok = true;
                for arg in &args {
                    match self.operand(arg, RegKind::Quantum) {
                        Some(Operand::Single(b)) => qubits.push(b),
                        Some(Operand::Whole(name, size)) => {
                            qubits.extend((0..size).map(|i| BitRef::new(name.clone(), i)))
                        }
                        None => ok = false,
                    }
                }
                if ok {
                    self.ir.instructions.push(Instruction::Barrier(qubits));
                }
                Ok(())
            }
            "if" => self.conditional(),
            _ => {
                let call = self.gate_call()?;
                if let Some(gates) = self.build_gates(call) {
                    self.ir.instructions.extend(gates.into_iter().map(Instruction::Gate));
                }
                Ok(())
            }
        }
    }

    fn include(&mut self) -> PResult<()> {
        self.bump();
        let pos = self.pos();
        let file = match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                s
            }
            _ => return self.unexpected("a file name string"),
        };
        self.expect(Tok::Semi, "`;`")?;
        if file != "qelib1.inc" {
            self.error(
                Code::UnsupportedConstruct,
                pos,
                format!("only \"qelib1.inc\" can be included, not \"{file}\""),
            );
        }
        Ok(())
    }

    fn skip_block(&mut self) {
        while !self.at_eof() && *self.peek() != Tok::LBrace {
            if *self.peek() == Tok::Semi {
                self.bump();
                return;
            }
            self.bump();
        }
        let mut depth = 0usize;
        while !self.at_eof() {
            match self.bump().tok {
                Tok::LBrace => depth += 1,
                Tok::RBrace => {
                    depth = depth.saturating_sub(1);
                    if depth == 0 {
                        return;
                    }
                }
                _ => {}
            }
        }
    }

    fn declaration(&mut self, kind: RegKind) -> PResult<()> {
        self.bump();
        let (name, name_pos) = self.ident()?;
        self.expect(Tok::LBracket, "`[`")?;
        let (size_text, size_pos) = self.int_literal()?;
        self.expect(Tok::RBracket, "`]`")?;
        self.expect(Tok::Semi, "`;`")?;

        if self.regs.contains_key(&name) {
            self.error(
                Code::DuplicateRegister,
                name_pos,
                format!("register `{name}` is already declared"),
            );
            return Ok(());
        }
        let size = match size_text.parse::<usize>() {
            Ok(0) => {
                self.error(Code::InvalidRegisterSize, size_pos, "register size must be at least 1");
                None
            }
            Ok(n) => Some(n),
            Err(_) => {
                self.error(Code::InvalidNumber, size_pos, format!("register size `{size_text}` is too large"));
                None
            }
        };
        let (used, cap) = match kind {
            RegKind::Quantum => (self.qubits, self.opts.max_qubits),
            RegKind::Classical => (self.clbits, self.opts.max_clbits),
        };
        let size = size.filter(|&n| {
            let fits = used.checked_add(n).is_some_and(|t| t <= cap);
            if !fits {
                self.error(
                    Code::CapacityExceeded,
                    name_pos,
                    format!(
                        "declaring `{name}[{n}]` exceeds the limit of {cap} {} bits",
                        kind.noun()
                    ),
                );
            }
            fits
        });
        self.regs.insert(
            name.clone(),
            RegInfo {
                kind,
                size: size.unwrap_or(0),
                usable: size.is_some(),
            },
        );
        if let Some(size) = size {
            let reg = Register::new(name, size);
            match kind {
                RegKind::Quantum => {
                    self.qubits += size;
                    self.ir.quantum_registers.push(reg);
                }
                RegKind::Classical => {
                    self.clbits += size;
                    self.ir.classical_registers.push(reg);
                }
            }
        }
        Ok(())
    }

    fn arg(&mut self) -> PResult<Arg> {
        let (name, pos) = self.ident()?;
        let index = if *self.peek() == Tok::LBracket {
            self.bump();
            let idx = self.int_literal()?;
            self.expect(Tok::RBracket, "`]`")?;
            Some(idx)
        } else {
            None
        };
        Ok(Arg { name, pos, index })
    }

    fn arg_list(&mut self) -> PResult<Vec<Arg>> {
        let mut args = vec![self.arg()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            args.push(self.arg()?);
        }
        Ok(args)
    }

    fn measure_args(&mut self) -> PResult<(Arg, Arg)> {
        let q = self.arg()?;
        self.expect(Tok::Arrow, "`->`")?;
        let c = self.arg()?;
        self.expect(Tok::Semi, "`;`")?;
        Ok((q, c))
    }

    fn measure(&mut self, q: &Arg, c: &Arg, pos: Pos) {
        let qs = self.operand(q, RegKind::Quantum);
        let cs = self.operand(c, RegKind::Classical);
        let (Some(qs), Some(cs)) = (qs, cs) else {
            return;
        };
        let pairs: Vec<(BitRef, BitRef)> = match (qs, cs) {
            (Operand::Single(q), Operand::Single(c)) => vec![(q, c)],
            (Operand::Whole(qn, qsize), Operand::Whole(cn, csize)) if qsize == csize => (0..qsize)
                .map(|i| (BitRef::new(qn.clone(), i), BitRef::new(cn.clone(), i)))
                .collect(),
            _ => {
                self.error(
                    Code::SizeMismatch,
                    pos,
                    "measure needs two single bits or two registers of equal size",
                );
                return;
            }
        };
        self.ir.instructions.extend(
            pairs
                .into_iter()
                .map(|(qubit, clbit)| Instruction::Measure { qubit, clbit }),
        );
    }

    fn conditional(&mut self) -> PResult<()> {
        self.bump();
        self.expect(Tok::LParen, "`(`")?;
        let (reg, reg_pos) = self.ident()?;
        self.expect(Tok::EqEq, "`==`")?;
        let (value_text, value_pos) = self.int_literal()?;
        self.expect(Tok::RParen, "`)`")?;
        if let Tok::Ident(w) = self.peek() {
            if matches!(w.as_str(), "measure" | "reset" | "barrier" | "if") {
                let pos = self.pos();
                self.error(
                    Code::UnsupportedConstruct,
                    pos,
                    "only a single gate may be conditioned",
                );
                return Err(Abort);
            }
        }
        let call = self.gate_call()?;

        let mut ok = true;
        match self.regs.get(&reg) {
            Some(info) if info.kind == RegKind::Classical => ok &= info.usable,
            _ => {
                self.error(
                    Code::UndeclaredRegister,
                    reg_pos,
                    format!("`{reg}` is not a declared classical register"),
                );
                ok = false;
            }
        }
        let value = match value_text.parse::<u64>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.error(Code::InvalidNumber, value_pos, format!("`{value_text}` does not fit in 64 bits"));
                None
            }
        };
        let gates = self.build_gates(call);
        if let (true, Some(value), Some(gates)) = (ok, value, gates) {
            self.ir.instructions.extend(gates.into_iter().map(|gate| Instruction::Conditional {
                register: reg.clone(),
                value,
                gate,
            }));
        }
        Ok(())
    }

    fn gate_call(&mut self) -> PResult<GateCall> {
        let (name, pos) = self.ident()?;
        let mut params = Vec::new();
        if *self.peek() == Tok::LParen {
            self.bump();
            if *self.peek() != Tok::RParen {
                params.push(self.param()?);
                while *self.peek() == Tok::Comma {
                    self.bump();
                    params.push(self.param()?);
                }
            }
            self.expect(Tok::RParen, "`)`")?;
        }
        let args = self.arg_list()?;
        self.expect(Tok::Semi, "`;`")?;
        Ok(GateCall {
            name,
            pos,
            params,
            args,
        })
    }

    /// One parameter expression; `None` if it evaluated to a non-finite value
    /// (already reported).
    fn param(&mut self) -> PResult<Option<f64>> {
        let pos = self.pos();
        let v = self.expr(0)?;
        if v.is_finite() {
            Ok(Some(v))
        } else {
            self.error(Code::InvalidParameter, pos, "parameter does not evaluate to a finite number");
            Ok(None)
        }
    }

    fn build_gates(&mut self, call: GateCall) -> Option<Vec<GateOp>> {
        let Ok(kind) = call.name.parse::<GateKind>() else {
            self.error(
                Code::UnknownGate,
                call.pos,
                format!("unknown or unsupported gate `{}`", call.name),
            );
            return None;
        };
        let mut ok = true;
        if call.params.len() != kind.num_params() {
            self.error(
                Code::ParamCount,
                call.pos,
                format!(
                    "`{kind}` takes {} parameter(s), got {}",
                    kind.num_params(),
                    call.params.len()
                ),
            );
            ok = false;
        }
        if call.args.len() != kind.num_qubits() {
            self.error(
                Code::ArityMismatch,
                call.pos,
                format!(
                    "`{kind}` acts on {} qubit(s), got {}",
                    kind.num_qubits(),
                    call.args.len()
                ),
            );
            ok = false;
        }
        let params: Option<Vec<f64>> = call.params.into_iter().collect();
        let expanded = self.expand(&call.args, RegKind::Quantum, call.pos);
        match (ok, params, expanded) {
            (true, Some(params), Some(expanded)) => Some(
                expanded
                    .into_iter()
                    .map(|ops| GateOp::new(kind, params.clone(), ops))
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Resolves operands and expands whole-register arguments into one
    /// operand list per index.
    fn expand(&mut self, args: &[Arg], kind: RegKind, pos: Pos) -> Option<Vec<Vec<BitRef>>> {
        let resolved: Vec<Option<Operand>> = args.iter().map(|a| self.operand(a, kind)).collect();
        let resolved: Vec<Operand> = resolved.into_iter().collect::<Option<_>>()?;
        let mut width = None;
        for op in &resolved {
            if let Operand::Whole(_, size) = op {
                match width {
                    None => width = Some(*size),
                    Some(w) if w != *size => {
                        self.error(Code::SizeMismatch, pos, "broadcast registers differ in size");
                        return None;
                    }
                    _ => {}
                }
            }
        }
        let out: Vec<Vec<BitRef>> = (0..width.unwrap_or(1))
            .map(|i| {
                resolved
                    .iter()
                    .map(|op| match op {
                        Operand::Single(b) => b.clone(),
                        Operand::Whole(name, _) => BitRef::new(name.clone(), i),
                    })
                    .collect()
            })
            .collect();
        let dup = out
            .iter()
            .any(|ops| ops.iter().enumerate().any(|(i, a)| ops[..i].contains(a)));
        if dup {
            self.error(Code::DuplicateOperand, pos, "a qubit appears twice in one gate");
            return None;
        }
        Some(out)
    }

    fn operand(&mut self, arg: &Arg, kind: RegKind) -> Option<Operand> {
        let (size, usable) = match self.regs.get(&arg.name) {
            Some(info) if info.kind == kind => (info.size, info.usable),
            _ => {
                self.error(
                    Code::UndeclaredRegister,
                    arg.pos,
                    format!("`{}` is not a declared {} register", arg.name, kind.noun()),
                );
                return None;
            }
        };
        if !usable {
            return None;
        }
        let Some((text, _)) = &arg.index else {
            return Some(Operand::Whole(arg.name.clone(), size));
        };
        // integer tokens are all digits, so a parse failure means overflow
        match text.parse::<usize>() {
            Ok(i) if i < size => Some(Operand::Single(BitRef::new(arg.name.clone(), i))),
            _ => {
                self.error(
                    Code::IndexOutOfRange,
                    arg.pos,
                    format!("{}[{text}] is out of range for size {size}", arg.name),
                );
                None
            }
        }
    }

    // expr := term (('+' | '-') term)*
    fn expr(&mut self, depth: usize) -> PResult<f64> {
        let mut v = self.term(depth)?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    v += self.term(depth)?;
                }
                Tok::Minus => {
                    self.bump();
                    v -= self.term(depth)?;
                }
                _ => return Ok(v),
            }
        }
    }

    fn term(&mut self, depth: usize) -> PResult<f64> {
        let mut v = self.unary(depth)?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    v *= self.unary(depth)?;
                }
                Tok::Slash => {
                    self.bump();
                    v /= self.unary(depth)?;
                }
                _ => return Ok(v),
            }
        }
    }

    fn unary(&mut self, depth: usize) -> PResult<f64> {
        if depth > MAX_EXPR_DEPTH {
            let pos = self.pos();
            self.error(Code::NestingTooDeep, pos, "expression is nested too deeply");
            return Err(Abort);
        }
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(-self.unary(depth + 1)?)
            }
            Tok::Plus => {
                self.bump();
                self.unary(depth + 1)
            }
            _ => {
                let base = self.primary(depth)?;
                if *self.peek() == Tok::Caret {
                    self.bump();
                    Ok(base.powf(self.unary(depth + 1)?))
                } else {
                    Ok(base)
                }
            }
        }
    }

    fn primary(&mut self, depth: usize) -> PResult<f64> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(s) | Tok::Real(s) => {
                self.bump();
                match s.parse::<f64>() {
                    Ok(v) => Ok(v),
                    Err(_) => {
                        self.error(Code::InvalidNumber, pos, format!("invalid number `{s}`"));
                        Err(Abort)
                    }
                }
            }
            Tok::LParen => {
                self.bump();
                let v = self.expr(depth + 1)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(v)
            }
            Tok::Ident(name) => {
                self.bump();
                if name == "pi" {
                    return Ok(std::f64::consts::PI);
                }
                let f: fn(f64) -> f64 = match name.as_str() {
                    "sin" => f64::sin,
                    "cos" => f64::cos,
                    "tan" => f64::tan,
                    "exp" => f64::exp,
                    "ln" => f64::ln,
                    "sqrt" => f64::sqrt,
                    _ => {
                        self.error(Code::Syntax, pos, format!("unknown identifier `{name}` in expression"));
                        return Err(Abort);
                    }
                };
                self.expect(Tok::LParen, "`(`")?;
                let v = self.expr(depth + 1)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f(v))
            }
            _ => self.unexpected("an expression"),
        }
    }
}

struct GateCall {
    name: String,
    pos: Pos,
    params: Vec<Option<f64>>,
    args: Vec<Arg>,
}
