//! Polynomial text format.
//!
//! ```text
//! expression  := term (('+' | '-') term)*
//! term        := factor ('*' factor)*
//! factor      := coefficient | variable ('^' integer)? | '(' expression ')' ('^' integer)?
//! variable    := 'x' integer            (1-based)
//! coefficient := integer | decimal | integer '/' integer
//! ```
//!
//! Whitespace is insignificant. A leading sign on the first term of any
//! expression is accepted as well.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::monomial::ExponentVector;
use super::polynomial::Polynomial;
use crate::error::{Error, Result};
use crate::scalar::Rational;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n: usize,
    depth: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { position: self.pos, message: message.into() })
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

    fn digits(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        (self.pos > start).then(|| std::str::from_utf8(&self.src[start..self.pos]).unwrap())
    }

    fn integer(&mut self) -> Result<BigInt> {
        match self.digits() {
            Some(d) => Ok(d.parse().expect("ascii digits")),
            None => self.err("expected integer"),
        }
    }

    fn small_integer(&mut self) -> Result<u32> {
        let at = self.pos;
        let v = self.integer()?;
        u32::try_from(v).or_else(|_| {
            self.pos = at;
            self.err("integer too large")
        })
    }

    fn coefficient(&mut self) -> Result<Rational> {
        let whole = self.integer()?;
        match self.src.get(self.pos) {
            Some(b'.') => {
                self.pos += 1;
                let frac = match self.digits() {
                    Some(d) => d,
                    None => return self.err("expected digits after decimal point"),
                };
                let scale = BigInt::from(10u32).pow(frac.len() as u32);
                let num = whole * &scale + frac.parse::<BigInt>().expect("ascii digits");
                Ok(Rational::new(num, scale))
            }
            _ if self.peek() == Some(b'/') => {
                self.pos += 1;
                let at = self.pos;
                let den = self.integer()?;
                if den.is_zero() {
                    self.pos = at;
                    return self.err("zero denominator");
                }
                Ok(Rational::new(whole, den))
            }
            _ => Ok(Rational::from_integer(whole)),
        }
    }

    fn exponent(&mut self) -> Result<u32> {
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.small_integer()
        } else {
            Ok(1)
        }
    }

    fn factor(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Some(b'x') => {
                self.pos += 1;
                let at = self.pos;
                let idx = self.small_integer()? as usize;
                if idx == 0 {
                    self.pos = at;
                    return self.err("variables are numbered from 1");
                }
                if idx > self.n {
                    return Err(Error::VariableOutOfRange { index: idx, dim: self.n });
                }
                let mut exps = vec![0u32; self.n];
                exps[idx - 1] = self.exponent()?;
                Ok(Polynomial::monomial(ExponentVector::new(exps), Rational::one()))
            }
            Some(b'(') => {
                self.pos += 1;
                self.depth += 1;
                let inner = self.expression()?;
                self.depth -= 1;
                if self.peek() != Some(b')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(inner.pow(self.exponent()?))
            }
            Some(c) if c.is_ascii_digit() => Ok(Polynomial::constant(self.n, self.coefficient()?)),
            Some(c) => self.err(format!("unexpected character '{}'", c as char)),
            None => self.err("unexpected end of input"),
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = acc * self.factor()?;
        }
        Ok(acc)
    }

    fn expression(&mut self) -> Result<Polynomial> {
        let mut poly = Polynomial::zero(self.n);
        let mut negative = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                true
            }
            Some(b'+') => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        loop {
            let t = self.term()?;
            poly = poly + if negative { t.scale(&-Rational::one()) } else { t };
            match self.peek() {
                Some(b'+') => negative = false,
                Some(b'-') => negative = true,
                None => break,
                Some(b')') if self.depth > 0 => break,
                Some(c) => return self.err(format!("unexpected character '{}'", c as char)),
            }
            self.pos += 1;
        }
        Ok(poly)
    }
}

/// Parses a polynomial in the variables `x1..xn`.
pub fn parse_polynomial(text: &str, n: usize) -> Result<Polynomial> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let mut p = Parser { src: text.as_bytes(), pos: 0, n, depth: 0 };
    if p.peek().is_none() {
        return p.err("empty expression");
    }
    p.expression()
}
