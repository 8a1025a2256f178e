//! Infix polynomial parser.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/')? unary)*      juxtaposition multiplies
//! unary   := '-' unary | power
//! power   := atom ('^' integer)?
//! atom    := integer | identifier | '(' expr ')'
//! ```
//! Division is allowed by nonzero constants only.

use std::sync::Arc;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::jet::Jet;
use crate::vars::VariableSet;

/// Parses `text` as a jet in the given ring.
pub fn parse_jet(text: &str, vars: &Arc<VariableSet>, field: Field, trunc: u32) -> Result<Jet> {
    parse_jet_at(text, vars, field, trunc, 1, 1)
}

/// As [`parse_jet`], reporting errors relative to a position in a larger
/// document.
pub fn parse_jet_at(
    text: &str,
    vars: &Arc<VariableSet>,
    field: Field,
    trunc: u32,
    line: usize,
    column: usize,
) -> Result<Jet> {
    let mut p = Parser { chars: text.chars().collect(), pos: 0, vars, field, trunc, line, column };
    p.skip_ws();
    if p.pos == p.chars.len() {
        return Err(p.error("empty polynomial"));
    }
    let j = p.expr()?;
    p.skip_ws();
    if p.pos != p.chars.len() {
        return Err(p.error(&format!("unexpected '{}'", p.chars[p.pos])));
    }
    Ok(j)
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    vars: &'a Arc<VariableSet>,
    field: Field,
    trunc: u32,
    line: usize,
    column: usize,
}

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || c == '.'
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse { line: self.line, column: self.column + self.pos, message: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Jet> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                '+' => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                '-' => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Jet> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some('/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.unary()?;
                    if d.degree().unwrap_or(0) > 0 {
                        self.pos = at;
                        return Err(self.error("division by a non-constant"));
                    }
                    let inv = d.constant_term().inv().ok_or_else(|| {
                        self.pos = at;
                        self.error("division by zero")
                    })?;
                    acc = acc.scale(&inv);
                }
                Some(c) if c == '(' || c.is_ascii_digit() || is_ident_start(c) => {
                    acc = &acc * &self.unary()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Jet> {
        if self.peek() == Some('-') {
            self.pos += 1;
            return Ok(-&self.unary()?);
        }
        if self.peek() == Some('+') {
            self.pos += 1;
            return self.unary();
        }
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let digits: String = self.chars[start..self.pos].iter().collect();
            let e: u32 = digits.parse().map_err(|_| {
                self.pos = start;
                self.error("expected a non-negative integer exponent")
            })?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Jet> {
        let Some(c) = self.peek() else {
            return Err(self.error("unexpected end of polynomial"));
        };
        if c == '(' {
            self.pos += 1;
            let e = self.expr()?;
            if self.peek() != Some(')') {
                return Err(self.error("expected ')'"));
            }
            self.pos += 1;
            return Ok(e);
        }
        if c.is_ascii_digit() {
            let start = self.pos;
            while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let digits: String = self.chars[start..self.pos].iter().collect();
            let n: BigInt = digits.parse().expect("digits");
            let s = self.field.from_ratio(&n, &BigInt::from(1)).expect("unit denominator");
            return Ok(Jet::constant(self.vars, self.field, self.trunc, s));
        }
        if is_ident_start(c) {
            let start = self.pos;
            while self.pos < self.chars.len() && is_ident_char(self.chars[self.pos]) {
                self.pos += 1;
            }
            let name: String = self.chars[start..self.pos].iter().collect();
            return match self.vars.index_of(&name) {
                Some(i) => Ok(Jet::var(self.vars, self.field, self.trunc, i)),
                None => {
                    self.pos = start;
                    Err(self.error(&format!("unknown variable '{name}'")))
                }
            };
        }
        Err(self.error(&format!("unexpected '{c}'")))
    }
}
