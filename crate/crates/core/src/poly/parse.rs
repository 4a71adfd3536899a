//! Recursive-descent parser for the polynomial text grammar:
//!
//! ```text
//! expr   := ['-'] term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ('^' uint)*
//! atom   := int ['/' uint] | 'x' uint | 'sqrt' '(' uint ')'
//! ```
//!
//! Variables are 1-based. `sqrt(d)` is accepted only in the session field
//! `Q(sqrt(d))`. Whitespace between tokens is ignored.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use super::{Coefficient, Field, Monomial, Polynomial};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("variable x{index} at byte {offset} exceeds n = {n}")]
    VariableOutOfRange {
        offset: usize,
        index: usize,
        n: usize,
    },
    #[error("division by zero literal at byte {offset}")]
    DivisionByZero { offset: usize },
    #[error("sqrt({radicand}) at byte {offset} is not available in field {field}")]
    RadicandNotInField {
        offset: usize,
        radicand: String,
        field: Field,
    },
    #[error("ambient dimension must be at least 1")]
    ZeroDimension,
}

impl ParseError {
    pub fn offset(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::VariableOutOfRange { offset, .. }
            | ParseError::DivisionByZero { offset }
            | ParseError::RadicandNotInField { offset, .. } => Some(*offset),
            ParseError::ZeroDimension => None,
        }
    }
}

pub fn parse(text: &str, n: usize, field: Field) -> Result<Polynomial, ParseError> {
    if n == 0 {
        return Err(ParseError::ZeroDimension);
    }
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        n,
        field,
    };
    let poly = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(poly)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n: usize,
    field: Field,
}

impl Parser<'_> {
    fn syntax(&self, message: &str) -> ParseError {
        ParseError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Polynomial, ParseError> {
        let negate = self.eat(b'-');
        let mut acc = self.term()?;
        if negate {
            acc = -acc;
        }
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Polynomial, ParseError> {
        let mut base = self.atom()?;
        while self.eat(b'^') {
            let (e, offset) = self.uint()?;
            let e: u32 = e.try_into().map_err(|_| ParseError::Syntax {
                offset,
                message: "exponent too large".into(),
            })?;
            base = base.pow(e);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial, ParseError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let (num, _) = self.digits()?;
                let den = if self.eat(b'/') {
                    let (d, offset) = self.digits()?;
                    if d.is_zero() {
                        return Err(ParseError::DivisionByZero { offset });
                    }
                    d
                } else {
                    BigInt::from(1)
                };
                Ok(Polynomial::constant(
                    self.n,
                    Coefficient::from_rational(BigRational::new(num, den), self.field),
                ))
            }
            Some(b'x') => {
                let start = self.pos;
                self.pos += 1;
                if !self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                    return Err(self.syntax("expected variable index after 'x'"));
                }
                let (idx, _) = self.uint()?;
                if idx == 0 || idx > self.n {
                    return Err(ParseError::VariableOutOfRange {
                        offset: start,
                        index: idx,
                        n: self.n,
                    });
                }
                Ok(Polynomial::monomial(
                    self.n,
                    Coefficient::one(self.field),
                    Monomial::var(self.n, idx - 1),
                ))
            }
            Some(b's') => {
                let start = self.pos;
                if !self.src[self.pos..].starts_with(b"sqrt") {
                    return Err(self.syntax("unknown identifier"));
                }
                self.pos += 4;
                if !self.eat(b'(') {
                    return Err(self.syntax("expected '(' after sqrt"));
                }
                let (radicand, _) = self.digits()?;
                if !self.eat(b')') {
                    return Err(self.syntax("expected ')'"));
                }
                match self.field {
                    Field::Quadratic(d) if radicand == BigInt::from(d) => Ok(Polynomial::constant(
                        self.n,
                        Coefficient::sqrt_radicand(self.field).expect("quadratic field"),
                    )),
                    _ => Err(ParseError::RadicandNotInField {
                        offset: start,
                        radicand: radicand.to_string(),
                        field: self.field,
                    }),
                }
            }
            Some(_) => Err(self.syntax("expected a coefficient, variable or sqrt")),
            None => Err(self.syntax("unexpected end of input")),
        }
    }

    fn digits(&mut self) -> Result<(BigInt, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.syntax("expected digits"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok((s.parse().expect("digits parse"), start))
    }

    fn uint(&mut self) -> Result<(usize, usize), ParseError> {
        let (v, offset) = self.digits()?;
        let v: usize = v.try_into().map_err(|_| ParseError::Syntax {
            offset,
            message: "integer too large".into(),
        })?;
        Ok((v, offset))
    }
}
