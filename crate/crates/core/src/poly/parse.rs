//! Text parser for polynomials such as `3/2*p11^2*s22 - p12*p21 + 1`.
//!
//! Grammar: sums and differences of products; factors are rational literals
//! (`3`, `0.25`), identifiers resolved through [`VarNames`], parenthesized
//! expressions, and powers with a nonnegative integer exponent. Division is
//! accepted only by nonzero constants.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{RationalPolynomial, VarNames};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Number(BigRational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn parse_error(offset: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        offset,
        message: message.into(),
    }
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                i += 1;
                continue;
            }
            '+' => out.push((start, Token::Plus)),
            '-' => out.push((start, Token::Minus)),
            '*' => out.push((start, Token::Star)),
            '/' => out.push((start, Token::Slash)),
            '^' => out.push((start, Token::Caret)),
            '(' => out.push((start, Token::LParen)),
            ')' => out.push((start, Token::RParen)),
            '0'..='9' | '.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                out.push((start, Token::Number(decimal(&src[start..i], start)?)));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Token::Ident(src[start..i].to_string())));
                continue;
            }
            other => return Err(parse_error(start, format!("unexpected character {other:?}"))),
        }
        i += 1;
    }
    Ok(out)
}

fn decimal(text: &str, offset: usize) -> Result<BigRational> {
    let (int, frac) = match text.split_once('.') {
        Some((a, b)) => (a, b),
        None => (text, ""),
    };
    if frac.contains('.') || (int.is_empty() && frac.is_empty()) {
        return Err(parse_error(offset, format!("malformed number {text:?}")));
    }
    let digits = format!("{int}{frac}");
    let numer: BigInt = digits
        .parse()
        .map_err(|_| parse_error(offset, format!("malformed number {text:?}")))?;
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    Ok(BigRational::new(numer, denom))
}

struct Parser<'a> {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
    names: &'a VarNames,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<RationalPolynomial> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<RationalPolynomial> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    let at = self.offset();
                    let d = self.unary()?;
                    let c = constant_value(&d)
                        .ok_or_else(|| parse_error(at, "division by a non-constant"))?;
                    if c.is_zero() {
                        return Err(parse_error(at, "division by zero"));
                    }
                    acc = acc.scale(&(BigRational::one() / c));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<RationalPolynomial> {
        match self.peek() {
            Some(Token::Minus) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(Token::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<RationalPolynomial> {
        let base = self.primary()?;
        if self.peek() == Some(&Token::Caret) {
            self.pos += 1;
            let at = self.offset();
            match self.next() {
                Some(Token::Number(n)) if n.is_integer() => {
                    let e: u32 = n
                        .to_integer()
                        .try_into()
                        .map_err(|_| parse_error(at, "exponent out of range"))?;
                    return Ok(base.pow(e));
                }
                _ => return Err(parse_error(at, "expected a nonnegative integer exponent")),
            }
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<RationalPolynomial> {
        let at = self.offset();
        match self.next() {
            Some(Token::Number(n)) => Ok(RationalPolynomial::constant(n)),
            Some(Token::Ident(name)) => {
                let v = self
                    .names
                    .resolve(&name)
                    .map_err(|_| parse_error(at, format!("unknown indeterminate {name:?}")))?;
                Ok(RationalPolynomial::var(v))
            }
            Some(Token::LParen) => {
                let inner = self.expr()?;
                match self.next() {
                    Some(Token::RParen) => Ok(inner),
                    _ => Err(parse_error(self.offset(), "expected ')'")),
                }
            }
            Some(t) => Err(parse_error(at, format!("unexpected token {t:?}"))),
            None => Err(parse_error(at, "unexpected end of input")),
        }
    }
}

fn constant_value(p: &RationalPolynomial) -> Option<BigRational> {
    if p.is_zero() {
        return Some(BigRational::zero());
    }
    match p.leading_term() {
        Some((m, c)) if m.is_one() && p.len() == 1 => Some(c.clone()),
        _ => None,
    }
}

/// Parses one polynomial, resolving names through `names`.
pub fn parse_polynomial(src: &str, names: &VarNames) -> Result<RationalPolynomial> {
    let tokens = tokenize(src)?;
    if tokens.is_empty() {
        return Err(parse_error(0, "empty polynomial"));
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: src.len(),
        names,
    };
    let poly = parser.expr()?;
    if parser.pos < parser.tokens.len() {
        return Err(parse_error(parser.offset(), "trailing input"));
    }
    Ok(poly)
}
