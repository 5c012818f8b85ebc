//! Derivation `ṗ_x = s_x p_x`, binomial score relations and face products.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{Indeterminate, Monomial, RationalPolynomial, VarKind, VarNames};
use crate::curve::{score, ParamCurve};
use crate::error::{Error, Result};
use crate::simplex::{ContrastVector, SampleSpace};

fn unsupported(v: Indeterminate) -> Error {
    Error::UnsupportedIndeterminate(format!("{:?}#{}", v.kind, v.index))
}

/// Leibniz derivative of a polynomial in the `p` indeterminates, with
/// `d(p_x) = s_x p_x`. A monomial `p^α` maps to `(Σ α_x s_x) p^α`.
pub fn derive(f: &RationalPolynomial) -> Result<RationalPolynomial> {
    let mut out = RationalPolynomial::zero();
    for (m, c) in f.terms() {
        let mut linear = RationalPolynomial::zero();
        for &(v, e) in m.powers() {
            if v.kind != VarKind::P {
                return Err(unsupported(v));
            }
            linear = &linear
                + &RationalPolynomial::term(
                    BigRational::from_integer(e.into()),
                    Monomial::var(Indeterminate::s(v.index)),
                );
        }
        out = &out + &linear.mul_monomial(m).scale(c);
    }
    Ok(out)
}

/// Linear relation `Σ c_x s_x = 0` on the scores.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearScoreForm {
    coefficients: Vec<i64>,
}

impl LinearScoreForm {
    pub fn new(coefficients: Vec<i64>) -> Result<Self> {
        if coefficients.iter().all(|&c| c == 0) {
            return Err(Error::EqualExponents);
        }
        Ok(Self { coefficients })
    }

    pub fn coefficients(&self) -> &[i64] {
        &self.coefficients
    }

    pub fn evaluate(&self, s: &[f64]) -> f64 {
        self.coefficients
            .iter()
            .zip(s)
            .map(|(&c, &s)| c as f64 * s)
            .sum()
    }

    pub fn to_polynomial(&self) -> RationalPolynomial {
        RationalPolynomial::from_terms(self.coefficients.iter().enumerate().map(|(i, &c)| {
            (
                BigRational::from_integer(c.into()),
                Monomial::var(Indeterminate::s(i)),
            )
        }))
    }

    pub fn display<'a>(&'a self, space: &SampleSpace) -> impl fmt::Display + 'a {
        let names = VarNames::new(space.clone());
        let text = self.to_polynomial().display(&names).to_string();
        text
    }
}

/// For `p^α - p^β = 0`, the relation `⟨α - β, s⟩ = 0` valid on the open simplex.
pub fn binomial_score_relation(alpha: &[u32], beta: &[u32]) -> Result<LinearScoreForm> {
    if alpha.len() != beta.len() {
        return Err(Error::LengthMismatch {
            expected: alpha.len(),
            got: beta.len(),
        });
    }
    if alpha == beta {
        return Err(Error::EqualExponents);
    }
    LinearScoreForm::new(
        alpha
            .iter()
            .zip(beta)
            .map(|(&a, &b)| a as i64 - b as i64)
            .collect(),
    )
}

/// Recognizes `p^α - p^β`: exactly two terms in the `p` indeterminates with
/// coefficients `+1` and `-1`. Returns `(α, β)` with `α` from the `+1` term.
pub fn as_binomial(f: &RationalPolynomial, dim: usize) -> Option<(Vec<u32>, Vec<u32>)> {
    if f.len() != 2 {
        return None;
    }
    let mut plus = None;
    let mut minus = None;
    for (m, c) in f.terms() {
        if m.powers()
            .iter()
            .any(|&(v, _)| v.kind != VarKind::P || v.index >= dim)
        {
            return None;
        }
        let mut exps = vec![0u32; dim];
        for &(v, e) in m.powers() {
            exps[v.index] = e;
        }
        if c.is_one() {
            plus = Some(exps);
        } else if (-c).is_one() {
            minus = Some(exps);
        }
    }
    plus.zip(minus)
}

/// Factors `L_x` of the generic contrast `Σ c_i b_i` and their product.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceProduct {
    /// `L_x` for every cell, in space order.
    pub factors: Vec<RationalPolynomial>,
    /// `Π_x L_x` as written.
    pub raw: RationalPolynomial,
    /// `Π_x L_x` with every factor's leading coefficient made positive.
    pub normalized: RationalPolynomial,
}

/// Generic contrast `c = Σ coeff_i · basis_i`: reads off the linear forms
/// `L_x(coeff) = c(x)` and returns their product. `L_x = 0` is the tangent
/// plane of the face opposite cell `x`.
pub fn face_product(basis: &[ContrastVector], coeff_names: &[&str]) -> Result<FaceProduct> {
    let first = basis.first().ok_or(Error::RankDeficientBasis {
        rank: 0,
        expected: 1,
    })?;
    let space = first.space();
    let d = space.dim();
    if coeff_names.len() != basis.len() {
        return Err(Error::LengthMismatch {
            expected: basis.len(),
            got: coeff_names.len(),
        });
    }
    let rows: Vec<Vec<BigRational>> = basis
        .iter()
        .map(|b| {
            if b.space() != space {
                return Err(Error::LengthMismatch {
                    expected: d,
                    got: b.values().len(),
                });
            }
            b.values()
                .iter()
                .map(|&v| BigRational::from_float(v).ok_or(Error::NonFinite { cell: 0 }))
                .collect()
        })
        .collect::<Result<_>>()?;
    let rank = exact_rank(rows.clone());
    if rank != d - 1 {
        return Err(Error::RankDeficientBasis {
            rank,
            expected: d - 1,
        });
    }
    let factors: Vec<RationalPolynomial> = (0..d)
        .map(|x| {
            RationalPolynomial::from_terms(
                rows.iter()
                    .enumerate()
                    .map(|(i, row)| (row[x].clone(), Monomial::var(Indeterminate::param(i)))),
            )
        })
        .collect();
    let raw = factors
        .iter()
        .fold(RationalPolynomial::one(), |acc, f| &acc * f);
    let normalized = factors
        .iter()
        .fold(RationalPolynomial::one(), |acc, f| &acc * &f.sign_normalized());
    Ok(FaceProduct {
        factors,
        raw,
        normalized,
    })
}

/// Rank by fraction-exact Gaussian elimination.
pub(crate) fn exact_rank(mut rows: Vec<Vec<BigRational>>) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for r in rank + 1..rows.len() {
            if rows[r][col].is_zero() {
                continue;
            }
            let factor = &rows[r][col] / &pivot_row[col];
            for (a, b) in rows[r].iter_mut().zip(&pivot_row) {
                *a -= &factor * b;
            }
        }
        rank += 1;
    }
    rank
}

/// `max_t |Σ c_x s_x(t)|` over the grid; every grid point must be interior.
pub fn relation_residual(form: &LinearScoreForm, curve: &ParamCurve, t_grid: &[f64]) -> Result<f64> {
    if form.coefficients.len() != curve.space().dim() {
        return Err(Error::LengthMismatch {
            expected: curve.space().dim(),
            got: form.coefficients.len(),
        });
    }
    let mut worst = 0.0_f64;
    for &t in t_grid {
        let r = score(curve, t)?;
        if let Some(cell) = (0..r.base.dim()).find(|&x| !r.base.in_support(x)) {
            return Err(Error::BoundaryPoint { t, cell });
        }
        worst = worst.max(form.evaluate(r.values()).abs());
    }
    Ok(worst)
}

/// Implicit tangent-bundle presentation of a model given by polynomials in `p`:
/// the model equations, their derivatives with `ṗ = s p`, `Σ p - 1` and `Σ s p`.
pub fn model_tangent_system(
    model_polys: &[RationalPolynomial],
    space: &SampleSpace,
) -> Result<Vec<RationalPolynomial>> {
    let d = space.dim();
    let mut out: Vec<RationalPolynomial> = model_polys.to_vec();
    for f in model_polys {
        if let Some(v) = f.variables().into_iter().find(|v| v.index >= d) {
            return Err(unsupported(v));
        }
        out.push(derive(f)?);
    }
    let sum_p = RationalPolynomial::from_terms(
        (0..d).map(|x| (BigRational::one(), Monomial::var(Indeterminate::p(x)))),
    );
    out.push(&sum_p - &RationalPolynomial::one());
    out.push(RationalPolynomial::from_terms((0..d).map(|x| {
        (
            BigRational::one(),
            Monomial::from_powers([(Indeterminate::p(x), 1), (Indeterminate::s(x), 1)]),
        )
    })));
    Ok(out)
}

#[allow(dead_code)]
fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}
