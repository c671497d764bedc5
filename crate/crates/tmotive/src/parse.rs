//! Series literals.
//!
//! ```text
//! series := term (('+' | '-') term)*
//! term   := ['-'] coeff ['*' mono] | ['-'] mono | 'O(' mono ')'
//! mono   := 'T' ['^' exp]
//! exp    := int | '(' int ['/' int] ')'
//! coeff  := int | '[' int (',' int)* ']'
//! ```
//!
//! `T` stands for theta, so `T^(1/3)` has degree 1/3 and `T^-1` is small.
//! An integer coefficient is read in the prime field; a bracketed vector lists
//! F_p coordinates over the power basis of the field modulus, lowest first.
//! `O(T^e)` sets the absolute precision to `-e`.

use crate::cinf::CInf;
use crate::error::MathError;
use crate::field::{FieldConfig, FqElem};
use crate::Rat;

struct Lexer<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), MathError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn err(&self, msg: &str) -> MathError {
        MathError::Parse(format!("{msg} at offset {}", self.pos))
    }

    fn int(&mut self) -> Result<i64, MathError> {
        self.skip_ws();
        let neg = self.eat(b'-');
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        let v: i64 = std::str::from_utf8(&self.s[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("integer out of range"))?;
        Ok(if neg { -v } else { v })
    }

    fn exponent(&mut self) -> Result<Rat, MathError> {
        if !self.eat(b'^') {
            return Ok(Rat::from_integer(1));
        }
        if self.eat(b'(') {
            let n = self.int()?;
            let d = if self.eat(b'/') { self.int()? } else { 1 };
            self.expect(b')')?;
            if d == 0 {
                return Err(self.err("zero denominator"));
            }
            Ok(Rat::new(n, d))
        } else {
            Ok(Rat::from_integer(self.int()?))
        }
    }

    fn coeff(&mut self, field: &FieldConfig) -> Result<FqElem, MathError> {
        if self.eat(b'[') {
            let mut coords = Vec::new();
            loop {
                let c = self.int()?;
                coords.push(c.rem_euclid(field.p() as i64) as u32);
                if !self.eat(b',') {
                    break;
                }
            }
            self.expect(b']')?;
            field.from_coords(&coords)
        } else {
            Ok(field.from_int(self.int()?))
        }
    }
}

pub fn parse_series(field: &FieldConfig, s: &str) -> Result<CInf, MathError> {
    let mut lx = Lexer { s: s.as_bytes(), pos: 0 };
    let mut terms: Vec<(Rat, FqElem)> = Vec::new();
    let mut prec: Option<Rat> = None;
    let mut first = true;
    loop {
        let mut negate = false;
        if !first {
            match lx.peek() {
                None => break,
                Some(b'+') => {
                    lx.pos += 1;
                }
                Some(b'-') => {
                    lx.pos += 1;
                    negate = true;
                }
                Some(_) => return Err(lx.err("expected '+' or '-'")),
            }
        } else if lx.peek() == Some(b'-') {
            lx.pos += 1;
            negate = true;
        }
        first = false;
        match lx.peek() {
            Some(b'O') => {
                lx.pos += 1;
                lx.expect(b'(')?;
                lx.expect(b'T')?;
                let e = lx.exponent()?;
                lx.expect(b')')?;
                prec = Some(prec.map_or(-e, |p: Rat| p.min(-e)));
            }
            Some(b'T') => {
                lx.pos += 1;
                let e = lx.exponent()?;
                let c = if negate { field.neg(FqElem::ONE) } else { FqElem::ONE };
                terms.push((e, c));
            }
            Some(_) => {
                let mut c = lx.coeff(field)?;
                if negate {
                    c = field.neg(c);
                }
                let e = if lx.eat(b'*') {
                    lx.expect(b'T')?;
                    lx.exponent()?
                } else {
                    Rat::from_integer(0)
                };
                terms.push((e, c));
            }
            None => return Err(lx.err("unexpected end of input")),
        }
    }
    Ok(CInf::from_terms(field, &terms, prec))
}
