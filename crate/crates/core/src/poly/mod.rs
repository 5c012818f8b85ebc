//! Exact sparse polynomials over the rationals in the indeterminates
//! `p_x`, `ṗ_x`, `s_x` (one per cell) plus free parameters.
//!
//! Terms are kept in a `BTreeMap` keyed by monomials under graded
//! lexicographic order, with zero coefficients never stored, so structural
//! equality is polynomial equality.

mod algebra;
mod parse;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::simplex::SampleSpace;

pub use algebra::{
    as_binomial, binomial_score_relation, derive, face_product, model_tangent_system,
    relation_residual, FaceProduct, LinearScoreForm,
};
pub use parse::parse_polynomial;

/// Kind of an indeterminate; the declaration order is the variable order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKind {
    P,
    PDot,
    S,
    /// Free coefficient, e.g. the `x, y, z` of a generic contrast.
    Param,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Indeterminate {
    pub kind: VarKind,
    /// Cell index for `P`, `PDot`, `S`; parameter index for `Param`.
    pub index: usize,
}

impl Indeterminate {
    pub fn p(cell: usize) -> Self {
        Self {
            kind: VarKind::P,
            index: cell,
        }
    }

    pub fn p_dot(cell: usize) -> Self {
        Self {
            kind: VarKind::PDot,
            index: cell,
        }
    }

    pub fn s(cell: usize) -> Self {
        Self {
            kind: VarKind::S,
            index: cell,
        }
    }

    pub fn param(index: usize) -> Self {
        Self {
            kind: VarKind::Param,
            index,
        }
    }
}

/// Power product, stored as sorted `(variable, exponent)` pairs with exponents > 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(Indeterminate, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Self(Vec::new())
    }

    pub fn var(v: Indeterminate) -> Self {
        Self(vec![(v, 1)])
    }

    pub fn from_powers<I: IntoIterator<Item = (Indeterminate, u32)>>(powers: I) -> Self {
        let mut map: BTreeMap<Indeterminate, u32> = BTreeMap::new();
        for (v, e) in powers {
            *map.entry(v).or_default() += e;
        }
        Self(map.into_iter().filter(|&(_, e)| e > 0).collect())
    }

    /// `p^α` for an exponent vector indexed by cells.
    pub fn p_power(alpha: &[u32]) -> Self {
        Self::from_powers(alpha.iter().enumerate().map(|(i, &e)| (Indeterminate::p(i), e)))
    }

    pub fn powers(&self) -> &[(Indeterminate, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, v: Indeterminate) -> u32 {
        self.0
            .iter()
            .find(|(w, _)| *w == v)
            .map_or(0, |&(_, e)| e)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial::from_powers(self.0.iter().chain(&other.0).copied())
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::new();
        for &(v, e) in &self.0 {
            let f = other.exponent(v);
            if f > e {
                return None;
            }
            if e > f {
                out.push((v, e - f));
            }
        }
        if other.0.iter().any(|&(v, _)| self.exponent(v) == 0) {
            return None;
        }
        Some(Monomial(out))
    }
}

impl Ord for Monomial {
    /// Graded lexicographic: total degree first, then the larger exponent
    /// on the earliest variable wins.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let (mut i, mut j) = (0, 0);
            loop {
                match (self.0.get(i), other.0.get(j)) {
                    (None, None) => return Ordering::Equal,
                    (Some(_), None) => return Ordering::Greater,
                    (None, Some(_)) => return Ordering::Less,
                    (Some(&(a, ea)), Some(&(b, eb))) => match a.cmp(&b) {
                        Ordering::Less => return Ordering::Greater,
                        Ordering::Greater => return Ordering::Less,
                        Ordering::Equal => {
                            if ea != eb {
                                return ea.cmp(&eb);
                            }
                            i += 1;
                            j += 1;
                        }
                    },
                }
            }
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RationalPolynomial {
    terms: BTreeMap<Monomial, BigRational>,
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl RationalPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn integer(n: i64) -> Self {
        Self::constant(BigRational::from_integer(n.into()))
    }

    pub fn var(v: Indeterminate) -> Self {
        Self::term(BigRational::one(), Monomial::var(v))
    }

    pub fn term(c: BigRational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Self { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (BigRational, Monomial)>>(terms: I) -> Self {
        let mut out = Self::zero();
        for (c, m) in terms {
            out.add_term(c, m);
        }
        out
    }

    fn add_term(&mut self, c: BigRational, m: Monomial) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in decreasing monomial order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter().rev()
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn variables(&self) -> Vec<Indeterminate> {
        let mut vs: Vec<Indeterminate> = self
            .terms
            .keys()
            .flat_map(|m| m.0.iter().map(|&(v, _)| v))
            .collect();
        vs.sort();
        vs.dedup();
        vs
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|(m, a)| (m.clone(), a * c))
                .collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(n, a)| (n.mul(m), a.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// Replaces one occurrence of the factor `from` by `to` in every term divisible by `from`.
    pub fn replace_monomial(&self, from: &Monomial, to: &Monomial) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, c)| match m.div(from) {
            Some(rest) => (c.clone(), rest.mul(to)),
            None => (c.clone(), m.clone()),
        }))
    }

    /// Floating-point evaluation.
    pub fn eval_f64<F: Fn(Indeterminate) -> f64>(&self, value: F) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let c = c.to_f64().unwrap_or(f64::NAN);
                m.0.iter()
                    .fold(c, |acc, &(v, e)| acc * value(v).powi(e as i32))
            })
            .sum()
    }

    /// Exact evaluation.
    pub fn eval_exact<F: Fn(Indeterminate) -> BigRational>(&self, value: F) -> BigRational {
        let mut total = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(v, e) in &m.0 {
                let x = value(v);
                for _ in 0..e {
                    t *= &x;
                }
            }
            total += t;
        }
        total
    }

    /// Flips the sign so the leading coefficient is positive.
    pub fn sign_normalized(&self) -> Self {
        match self.leading_term() {
            Some((_, c)) if c.is_negative() => -self,
            _ => self.clone(),
        }
    }

    pub fn display<'a>(&'a self, names: &'a VarNames) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, names }
    }
}

impl Add for &RationalPolynomial {
    type Output = RationalPolynomial;
    fn add(self, rhs: &RationalPolynomial) -> RationalPolynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(c.clone(), m.clone());
        }
        out
    }
}

impl Sub for &RationalPolynomial {
    type Output = RationalPolynomial;
    fn sub(self, rhs: &RationalPolynomial) -> RationalPolynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(-c.clone(), m.clone());
        }
        out
    }
}

impl Mul for &RationalPolynomial {
    type Output = RationalPolynomial;
    fn mul(self, rhs: &RationalPolynomial) -> RationalPolynomial {
        let mut out = RationalPolynomial::zero();
        for (m, a) in &self.terms {
            for (n, b) in &rhs.terms {
                out.add_term(a * b, m.mul(n));
            }
        }
        out
    }
}

impl Neg for &RationalPolynomial {
    type Output = RationalPolynomial;
    fn neg(self) -> RationalPolynomial {
        RationalPolynomial {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for RationalPolynomial {
            type Output = RationalPolynomial;
            fn $f(self, rhs: RationalPolynomial) -> RationalPolynomial {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for RationalPolynomial {
    type Output = RationalPolynomial;
    fn neg(self) -> RationalPolynomial {
        -&self
    }
}

/// Names used to print and parse indeterminates: `p<label>`, `dp<label>`,
/// `s<label>` for cells and free names for parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarNames {
    space: Option<SampleSpace>,
    params: Vec<String>,
}

impl VarNames {
    pub fn new(space: SampleSpace) -> Self {
        Self {
            space: Some(space),
            params: Vec::new(),
        }
    }

    pub fn params<I, S>(params: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            space: None,
            params: params.into_iter().map(Into::into).collect(),
        }
    }

    pub fn with_params<I, S>(mut self, params: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.params = params.into_iter().map(Into::into).collect();
        self
    }

    pub fn space(&self) -> Option<&SampleSpace> {
        self.space.as_ref()
    }

    pub fn name(&self, v: Indeterminate) -> String {
        let cell = |i: usize| match &self.space {
            Some(s) if i < s.dim() => s.label(i).to_string(),
            _ => (i + 1).to_string(),
        };
        match v.kind {
            VarKind::P => format!("p{}", cell(v.index)),
            VarKind::PDot => format!("dp{}", cell(v.index)),
            VarKind::S => format!("s{}", cell(v.index)),
            VarKind::Param => self
                .params
                .get(v.index)
                .cloned()
                .unwrap_or_else(|| format!("c{}", v.index + 1)),
        }
    }

    /// Resolves an identifier. Parameters shadow cell names.
    pub fn resolve(&self, ident: &str) -> Result<Indeterminate> {
        if let Some(i) = self.params.iter().position(|p| p == ident) {
            return Ok(Indeterminate::param(i));
        }
        if let Some(space) = &self.space {
            let cell = |rest: &str| space.index_of(rest).ok();
            if let Some(c) = ident.strip_prefix("dp").and_then(cell) {
                return Ok(Indeterminate::p_dot(c));
            }
            if let Some(c) = ident.strip_prefix('p').and_then(cell) {
                return Ok(Indeterminate::p(c));
            }
            if let Some(c) = ident.strip_prefix('s').and_then(cell) {
                return Ok(Indeterminate::s(c));
            }
        }
        Err(Error::UnknownLabel(ident.to_string()))
    }
}

pub struct PolyDisplay<'a> {
    poly: &'a RationalPolynomial,
    names: &'a VarNames,
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.poly.terms().enumerate() {
            let negative = c.is_negative();
            match (k, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let a = c.abs();
            let mut first = true;
            if !a.is_one() || m.is_one() {
                write!(f, "{a}")?;
                first = false;
            }
            for &(v, e) in m.powers() {
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                write!(f, "{}", self.names.name(v))?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> RationalPolynomial {
        RationalPolynomial::var(Indeterminate::param(0))
    }

    fn y() -> RationalPolynomial {
        RationalPolynomial::var(Indeterminate::param(1))
    }

    #[test]
    fn arithmetic_cancels_exactly() {
        let a = &x() + &y();
        let b = &x() - &y();
        let prod = &a * &b;
        let expected = &x().pow(2) - &y().pow(2);
        assert_eq!(prod, expected);
        assert!((&prod - &expected).is_zero());
    }

    #[test]
    fn grlex_orders_by_degree_then_lex() {
        let names = VarNames::params(["x", "y", "z"]);
        let z = RationalPolynomial::var(Indeterminate::param(2));
        let poly = &(&(&z + &x().pow(2)) + &(&x() * &y())) + &y().pow(2);
        assert_eq!(poly.display(&names).to_string(), "x^2 + x*y + y^2 + z");
    }

    #[test]
    fn display_uses_labels_and_fractions() {
        let names = VarNames::new(SampleSpace::table2x2());
        let m = Monomial::from_powers([(Indeterminate::p(0), 2), (Indeterminate::s(3), 1)]);
        let poly = RationalPolynomial::term(rational(3, 2), m)
            - RationalPolynomial::var(Indeterminate::p_dot(1));
        assert_eq!(poly.display(&names).to_string(), "3/2*p11^2*s22 - dp12");
        assert_eq!(RationalPolynomial::zero().display(&names).to_string(), "0");
        assert_eq!(RationalPolynomial::integer(-4).display(&names).to_string(), "-4");
    }

    #[test]
    fn monomial_division() {
        let a = Monomial::from_powers([(Indeterminate::p(0), 2), (Indeterminate::p(1), 1)]);
        let b = Monomial::from_powers([(Indeterminate::p(0), 1)]);
        assert_eq!(
            a.div(&b),
            Some(Monomial::from_powers([(Indeterminate::p(0), 1), (Indeterminate::p(1), 1)]))
        );
        assert_eq!(b.div(&a), None);
        let c = Monomial::var(Indeterminate::p(2));
        assert_eq!(a.div(&c), None);
    }

    #[test]
    fn exact_and_float_evaluation_agree() {
        let poly = &(&x() * &x()) - &RationalPolynomial::constant(rational(1, 3));
        let exact = poly.eval_exact(|_| rational(1, 2));
        assert_eq!(exact, rational(-1, 12));
        assert!((poly.eval_f64(|_| 0.5) + 1.0 / 12.0).abs() < 1e-16);
    }
}
