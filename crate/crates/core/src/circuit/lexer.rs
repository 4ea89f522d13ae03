use super::diagnostic::{Diagnostic, DiagnosticCode};

/// 1-based (line, column), counted in characters.
pub(crate) type Pos = (usize, usize);

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    /// Unsigned integer literal, kept as text until its use is known.
    Int(String),
    Real(String),
    Str(String),
    Semi,
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Arrow,
    EqEq,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(s) | Tok::Real(s) => format!("number `{s}`"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::Eof => "end of input".to_owned(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::Semi => ";",
            Tok::Comma => ",",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Arrow => "->",
            Tok::EqEq => "==",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Caret => "^",
            _ => "?",
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
    last: Pos,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        self.last = (self.line, self.col);
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Pos {
        (self.line, self.col)
    }

    fn eat_while(&mut self, out: &mut String, f: impl Fn(char) -> bool) {
        while let Some(c) = self.peek() {
            if !f(c) {
                break;
            }
            out.push(c);
            self.bump();
        }
    }
}

/// Tokenizes `src`. Lexical errors are reported and the offending
/// character skipped. The trailing `Eof` sits on the last character of the
/// input (or 1:1 for empty input) so every position stays inside the text.
pub(crate) fn lex(src: &str, diags: &mut Vec<Diagnostic>) -> Vec<Token> {
    let mut cur = Cursor {
        chars: src.chars().peekable(),
        line: 1,
        col: 1,
        last: (1, 1),
    };
    let mut out = Vec::new();
    while let Some(c) = cur.peek() {
        let pos = cur.pos();
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        let tok = match c {
            '/' => {
                cur.bump();
                if cur.peek() == Some('/') {
                    while cur.peek().is_some_and(|c| c != '\n') {
                        cur.bump();
                    }
                    continue;
                }
                Tok::Slash
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let mut s = String::new();
                cur.eat_while(&mut s, |c| c.is_ascii_alphanumeric() || c == '_');
                Tok::Ident(s)
            }
            '0'..='9' | '.' => lex_number(&mut cur),
            '"' => {
                cur.bump();
                let mut s = String::new();
                cur.eat_while(&mut s, |c| c != '"' && c != '\n');
                if cur.peek() == Some('"') {
                    cur.bump();
                    Tok::Str(s)
                } else {
                    diags.push(Diagnostic::error(
                        DiagnosticCode::UnterminatedString,
                        pos,
                        "unterminated string literal",
                    ));
                    continue;
                }
            }
            '-' => {
                cur.bump();
                if cur.peek() == Some('>') {
                    cur.bump();
                    Tok::Arrow
                } else {
                    Tok::Minus
                }
            }
            '=' => {
                cur.bump();
                if cur.peek() == Some('=') {
                    cur.bump();
                    Tok::EqEq
                } else {
                    diags.push(Diagnostic::error(
                        DiagnosticCode::UnexpectedCharacter,
                        pos,
                        "expected `==`",
                    ));
                    continue;
                }
            }
            _ => {
                cur.bump();
                match c {
                    ';' => Tok::Semi,
                    ',' => Tok::Comma,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '+' => Tok::Plus,
                    '*' => Tok::Star,
                    '^' => Tok::Caret,
                    _ => {
                        diags.push(Diagnostic::error(
                            DiagnosticCode::UnexpectedCharacter,
                            pos,
                            format!("unexpected character {c:?}"),
                        ));
                        continue;
                    }
                }
            }
        };
        out.push(Token { tok, pos });
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: cur.last,
    });
    out
}

fn lex_number(cur: &mut Cursor<'_>) -> Tok {
    let mut s = String::new();
    cur.eat_while(&mut s, |c| c.is_ascii_digit());
    let mut real = false;
    if cur.peek() == Some('.') {
        real = true;
        s.push('.');
        cur.bump();
        cur.eat_while(&mut s, |c| c.is_ascii_digit());
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        real = true;
        s.push('e');
        cur.bump();
        if let Some(sign @ ('+' | '-')) = cur.peek() {
            s.push(sign);
            cur.bump();
        }
        cur.eat_while(&mut s, |c| c.is_ascii_digit());
    }
    if real {
        Tok::Real(s)
    } else {
        Tok::Int(s)
    }
}
