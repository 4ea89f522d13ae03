use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// Stable identifiers for every diagnostic the parser and validator emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticCode {
    InvalidUtf8,
    MissingHeader,
    UnsupportedVersion,
    UnexpectedCharacter,
    UnterminatedString,
    Syntax,
    InvalidNumber,
    InvalidParameter,
    NestingTooDeep,
    UnsupportedConstruct,
    UnknownGate,
    ParamCount,
    ArityMismatch,
    DuplicateRegister,
    InvalidRegisterSize,
    UndeclaredRegister,
    IndexOutOfRange,
    SizeMismatch,
    DuplicateOperand,
    CapacityExceeded,
}

impl DiagnosticCode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::InvalidUtf8 => "invalid-utf8",
            Self::MissingHeader => "missing-header",
            Self::UnsupportedVersion => "unsupported-version",
            Self::UnexpectedCharacter => "unexpected-character",
            Self::UnterminatedString => "unterminated-string",
            Self::Syntax => "syntax",
            Self::InvalidNumber => "invalid-number",
            Self::InvalidParameter => "invalid-parameter",
            Self::NestingTooDeep => "nesting-too-deep",
            Self::UnsupportedConstruct => "unsupported-construct",
            Self::UnknownGate => "unknown-gate",
            Self::ParamCount => "param-count",
            Self::ArityMismatch => "arity-mismatch",
            Self::DuplicateRegister => "duplicate-register",
            Self::InvalidRegisterSize => "invalid-register-size",
            Self::UndeclaredRegister => "undeclared-register",
            Self::IndexOutOfRange => "index-out-of-range",
            Self::SizeMismatch => "size-mismatch",
            Self::DuplicateOperand => "duplicate-operand",
            Self::CapacityExceeded => "capacity-exceeded",
        }
    }
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A positioned message about QASM source or an IR value.
///
/// `line` and `column` are 1-based character positions. Diagnostics from
/// [`validate`](super::validate) on an IR built in code have no source and
/// carry `0` for both.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub severity: Severity,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl Diagnostic {
    pub fn error(code: DiagnosticCode, (line, column): (usize, usize), message: impl Into<String>) -> Self {
        Self {
            code,
            severity: Severity::Error,
            line,
            column,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{}:{}: {sev}[{}]: {}",
            self.line, self.column, self.code, self.message
        )
    }
}

/// Sorts by position; stable, so same-position diagnostics keep emission order.
pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by_key(|d| (d.line, d.column));
}
