//! Tokenizer and parser for polynomial and divided power expressions.
//!
//! Grammar: `expr := ['+'|'-'] term (('+'|'-') term)*`, `term := factor ('*' factor)*`,
//! `factor := number ['/' number] | name ['^' int | '^[' int ']']`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("column {column}: {message}")]
pub struct SyntaxError {
    /// 1-based character column within the parsed text.
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factor {
    pub name: String,
    pub exponent: u32,
    /// `name^[k]` rather than `name^k`.
    pub divided: bool,
    pub column: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coeff: BigRational,
    pub factors: Vec<Factor>,
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor { chars: src.chars().collect(), pos: 0, _src: src }
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

    fn err<T>(&self, message: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError { column: self.pos + 1, message: message.into() })
    }

    fn number(&mut self) -> Result<BigInt, SyntaxError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a number");
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        Ok(s.parse().expect("digits"))
    }

    fn small(&mut self) -> Result<u32, SyntaxError> {
        let col = self.pos;
        let n = self.number()?;
        u32::try_from(n).map_err(|_| SyntaxError { column: col + 1, message: "exponent too large".into() })
    }

    fn name(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        if self.pos < self.chars.len() && (self.chars[self.pos].is_alphabetic() || self.chars[self.pos] == '_') {
            self.pos += 1;
            while self.pos < self.chars.len() && (self.chars[self.pos].is_alphanumeric() || self.chars[self.pos] == '_') {
                self.pos += 1;
            }
            Some(self.chars[start..self.pos].iter().collect())
        } else {
            None
        }
    }
}

/// Parses an expression into terms; column numbers are relative to `src` plus `column_offset`.
pub fn parse_terms(src: &str, column_offset: usize) -> Result<Vec<Term>, SyntaxError> {
    let mut c = Cursor::new(src);
    let mut terms = Vec::new();
    let shift = |e: SyntaxError| SyntaxError { column: e.column + column_offset, message: e.message };
    let mut first = true;
    loop {
        let mut sign = BigRational::one();
        match c.peek() {
            None if first => return c.err("empty expression").map_err(shift),
            None => return c.err("expected a term after operator").map_err(shift),
            Some('+') => c.pos += 1,
            Some('-') => {
                c.pos += 1;
                sign = -sign;
            }
            Some(_) if first => {}
            Some(ch) => return c.err(format!("unexpected character '{ch}'")).map_err(shift),
        }
        first = false;
        let t = parse_term(&mut c, sign).map_err(shift)?;
        terms.push(t);
        match c.peek() {
            None => break,
            Some('+') | Some('-') => continue,
            Some(ch) => return c.err(format!("unexpected character '{ch}'")).map_err(shift),
        }
    }
    Ok(terms)
}

fn parse_term(c: &mut Cursor<'_>, sign: BigRational) -> Result<Term, SyntaxError> {
    let mut coeff = sign;
    let mut factors = Vec::new();
    loop {
        match c.peek() {
            Some(ch) if ch.is_ascii_digit() => {
                let num = c.number()?;
                let mut q = BigRational::from_integer(num);
                if c.peek() == Some('/') {
                    c.pos += 1;
                    let col = c.pos;
                    let den = c.number()?;
                    if den.is_zero() {
                        return Err(SyntaxError { column: col + 1, message: "zero denominator".into() });
                    }
                    q /= BigRational::from_integer(den);
                }
                coeff *= q;
            }
            Some(ch) if ch.is_alphabetic() || ch == '_' => {
                let column = c.pos + 1;
                let name = c.name().expect("name start");
                let (mut exponent, mut divided) = (1, false);
                if c.peek() == Some('^') {
                    c.pos += 1;
                    if c.peek() == Some('[') {
                        let open = c.pos + 1;
                        c.pos += 1;
                        exponent = c.small()?;
                        if c.peek() != Some(']') {
                            return Err(SyntaxError { column: open, message: "unclosed '[' of a divided power".into() });
                        }
                        c.pos += 1;
                        divided = true;
                    } else {
                        exponent = c.small()?;
                    }
                }
                factors.push(Factor { name, exponent, divided, column });
            }
            Some(ch) => return c.err(format!("unexpected character '{ch}'")),
            None => return c.err("expected a factor"),
        }
        if c.peek() == Some('*') {
            c.pos += 1;
        } else {
            break;
        }
    }
    Ok(Term { coeff, factors })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_divided_and_plain_powers() {
        let t = parse_terms("3*t1^[2]*x^3 - 1/2*y + 5", 0).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t[0].factors[0], Factor { name: "t1".into(), exponent: 2, divided: true, column: 3 });
        assert_eq!(t[0].factors[1].exponent, 3);
        assert!(!t[0].factors[1].divided);
        assert_eq!(t[1].coeff, BigRational::new((-1).into(), 2.into()));
        assert!(t[2].factors.is_empty());
    }

    #[test]
    fn unclosed_bracket_is_positioned() {
        let e = parse_terms("t1^[2", 0).unwrap_err();
        assert_eq!(e.column, 4);
        let e = parse_terms("x + t1^[2", 10).unwrap_err();
        assert_eq!(e.column, 18);
    }

    #[test]
    fn rejects_dangling_operator() {
        assert!(parse_terms("x +", 0).is_err());
        assert!(parse_terms("", 0).is_err());
        assert!(parse_terms("x ) y", 0).is_err());
    }
}
