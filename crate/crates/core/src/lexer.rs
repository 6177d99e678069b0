//! Tokenizer shared by the component DSL, the expression language and
//! state-space predicates.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Int(i) => write!(f, "integer {i}"),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {msg}")]
pub struct LexError {
    pub pos: Pos,
    pub msg: String,
}

// Longest symbols first so that `:=` wins over `:`.
const SYMBOLS: &[&str] = &[
    ":=", "->", "<=", ">=", "<>", "++", "==", "!=", "&&", "||", "{", "}", "(", ")", "[", "]", ",",
    ":", ";", ".", "!", "?", "=", "+", "-", "*", "<", ">", "#", "/", "|",
];

pub fn tokenize(src: &str) -> Result<Vec<(Tok, Pos)>, LexError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let pos = Pos { line, col };
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse::<i64>().map_err(|_| LexError {
                pos,
                msg: format!("integer literal `{text}` out of range"),
            })?;
            out.push((Tok::Int(v), pos));
            continue;
        }
        if c == '"' {
            bump!();
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None => {
                        return Err(LexError { pos, msg: "unterminated string literal".into() });
                    }
                    Some('"') => {
                        bump!();
                        break;
                    }
                    Some('\\') => {
                        bump!();
                        let esc = chars.get(i).copied().ok_or(LexError {
                            pos,
                            msg: "unterminated escape".into(),
                        })?;
                        s.push(match esc {
                            'n' => '\n',
                            't' => '\t',
                            other => other,
                        });
                        bump!();
                    }
                    Some(&ch) => {
                        s.push(ch);
                        bump!();
                    }
                }
            }
            out.push((Tok::Str(s), pos));
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        if let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            for _ in 0..sym.chars().count() {
                bump!();
            }
            out.push((Tok::Sym(sym), pos));
            continue;
        }
        return Err(LexError { pos, msg: format!("unexpected character `{c}`") });
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

/// Cursor over a token stream with the usual expect/accept helpers.
#[derive(Debug, Clone)]
pub struct Cursor {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Cursor {
    pub fn new(src: &str) -> Result<Self, LexError> {
        Ok(Cursor { toks: tokenize(src)?, at: 0 })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    pub fn peek_at(&self, n: usize) -> &Tok {
        let idx = (self.at + n).min(self.toks.len() - 1);
        &self.toks[idx].0
    }

    pub fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    pub fn next(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    pub fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == kw)
    }

    pub fn accept_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn accept_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn error(&self, msg: impl Into<String>) -> LexError {
        LexError { pos: self.pos(), msg: msg.into() }
    }

    pub fn expect_sym(&mut self, s: &str) -> Result<(), LexError> {
        if self.accept_sym(s) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{s}`, found {}", self.peek())))
        }
    }

    pub fn expect_kw(&mut self, kw: &str) -> Result<(), LexError> {
        if self.accept_kw(kw) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{kw}`, found {}", self.peek())))
        }
    }

    pub fn expect_ident(&mut self) -> Result<String, LexError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            other => Err(self.error(format!("expected identifier, found {other}"))),
        }
    }

    /// An identifier or a quoted string; used for taxonomy terms that may
    /// contain spaces or punctuation.
    pub fn expect_term(&mut self) -> Result<String, LexError> {
        match self.peek().clone() {
            Tok::Ident(s) | Tok::Str(s) => {
                self.next();
                Ok(s)
            }
            other => Err(self.error(format!("expected term, found {other}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbols_and_literals() {
        let toks: Vec<Tok> = tokenize("x := rear + 1; // bump\n\"a\\\"b\" <> <= ->")
            .unwrap()
            .into_iter()
            .map(|(t, _)| t)
            .collect();
        assert_eq!(
            toks,
            vec![
                Tok::Ident("x".into()),
                Tok::Sym(":="),
                Tok::Ident("rear".into()),
                Tok::Sym("+"),
                Tok::Int(1),
                Tok::Sym(";"),
                Tok::Str("a\"b".into()),
                Tok::Sym("<>"),
                Tok::Sym("<="),
                Tok::Sym("->"),
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn positions_track_lines() {
        let toks = tokenize("a\n  b").unwrap();
        assert_eq!(toks[1].1, Pos { line: 2, col: 3 });
    }

    #[test]
    fn rejects_stray_characters() {
        assert!(tokenize("a @ b").is_err());
        assert!(tokenize("\"open").is_err());
    }
}
