//! Transports between fibres, the exponential chart and exponential geodesics.

use crate::curve::{score, ParamCurve};
use crate::error::{Error, Result};
use crate::numeric::{central_difference, default_step, log_weighted_sum_exp};
use crate::simplex::{center, inner_product, make_distribution, BundleElement, ProbabilityVector};

fn support_weights(p: &ProbabilityVector) -> Vec<f64> {
    (0..p.dim())
        .map(|i| if p.in_support(i) { p.weight(i) } else { 0.0 })
        .collect()
}

fn check_base(p: &ProbabilityVector, u: &BundleElement) -> Result<()> {
    if u.base().same_point(p) {
        Ok(())
    } else {
        Err(Error::BaseMismatch)
    }
}

fn check_nested(p: &ProbabilityVector, q: &ProbabilityVector) -> Result<()> {
    if p.space() != q.space() {
        return Err(Error::LengthMismatch {
            expected: p.dim(),
            got: q.dim(),
        });
    }
    match (0..p.dim()).find(|&x| p.in_support(x) && !q.in_support(x)) {
        Some(cell) => Err(Error::SupportNotNested { cell }),
        None => Ok(()),
    }
}

/// Exponential transport `u ↦ u - E_q[u]`, canonical at `q`.
pub fn e_transport(p: &ProbabilityVector, q: &ProbabilityVector, u: &BundleElement) -> Result<BundleElement> {
    check_base(p, u)?;
    center(u.score(), q)
}

/// Mixture transport, solving `p·u = q·v` for `v` when `supp p ⊆ supp q`.
///
/// A cell in `supp p ∖ supp q` is accepted only when `u` vanishes there.
pub fn m_transport(p: &ProbabilityVector, q: &ProbabilityVector, u: &BundleElement) -> Result<BundleElement> {
    check_base(p, u)?;
    if p.space() != q.space() {
        return Err(Error::LengthMismatch {
            expected: p.dim(),
            got: q.dim(),
        });
    }
    let mut v = vec![0.0; p.dim()];
    for (cell, out) in v.iter_mut().enumerate() {
        if !p.in_support(cell) {
            continue;
        }
        let uc = u.score()[cell];
        if q.in_support(cell) {
            *out = p.weight(cell) * uc / q.weight(cell);
        } else if uc != 0.0 {
            return Err(Error::SupportNotNested { cell });
        }
    }
    Ok(BundleElement::from_parts(q.clone(), v))
}

/// Exponential displacement `s_p(q) = log(q/p) - E_p[log(q/p)]`; needs `supp p = supp q`.
pub fn displacement(p: &ProbabilityVector, q: &ProbabilityVector) -> Result<BundleElement> {
    if p.space() != q.space() {
        return Err(Error::LengthMismatch {
            expected: p.dim(),
            got: q.dim(),
        });
    }
    if let Some(cell) = (0..p.dim()).find(|&x| p.in_support(x) != q.in_support(x)) {
        return Err(Error::SupportMismatch { cell });
    }
    let log_ratio: Vec<f64> = (0..p.dim())
        .map(|x| {
            if p.in_support(x) {
                (q.weight(x) / p.weight(x)).ln()
            } else {
                0.0
            }
        })
        .collect();
    center(&log_ratio, p)
}

/// `log E_p[e^u]` over `supp p`; values of `u` off the support are ignored.
pub fn log_mean_exp(p: &ProbabilityVector, u: &[f64]) -> f64 {
    log_weighted_sum_exp(&support_weights(p), u)
}

/// Cumulant function `K_p(u) = log E_p[e^u]`.
pub fn cumulant(p: &ProbabilityVector, u: &BundleElement) -> Result<f64> {
    check_base(p, u)?;
    Ok(log_mean_exp(p, u.score()))
}

/// `KL(p‖q) = Σ_{supp p} p log(p/q)`; needs `supp p ⊆ supp q`.
pub fn kl(p: &ProbabilityVector, q: &ProbabilityVector) -> Result<f64> {
    check_nested(p, q)?;
    let v: f64 = p
        .support()
        .cells()
        .map(|x| p.weight(x) * (p.weight(x) / q.weight(x)).ln())
        .sum();
    Ok(v.max(0.0))
}

/// Exponential geodesic `q(t) = e^{t u - ψ(t)} · q(0)` with `ψ(t) = K_{q(0)}(t u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpGeodesic {
    direction: BundleElement,
    log_base: Vec<f64>,
}

impl ExpGeodesic {
    pub fn new(direction: BundleElement) -> Self {
        let base = direction.base();
        let log_base = (0..base.dim())
            .map(|x| {
                if base.in_support(x) {
                    base.weight(x).ln()
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        Self {
            direction,
            log_base,
        }
    }

    pub fn base(&self) -> &ProbabilityVector {
        self.direction.base()
    }

    pub fn direction(&self) -> &BundleElement {
        &self.direction
    }

    /// `ψ(t) = log Σ q(0) e^{t u}`, max-shifted.
    pub fn psi(&self, t: f64) -> f64 {
        let exps: Vec<f64> = self.direction.score().iter().map(|u| t * u).collect();
        log_mean_exp(self.base(), &exps)
    }

    fn raw_point(&self, t: f64) -> Vec<f64> {
        let psi = self.psi(t);
        self.log_base
            .iter()
            .zip(self.direction.score())
            .map(|(&lp, &u)| {
                if lp == f64::NEG_INFINITY {
                    0.0
                } else {
                    (lp + t * u - psi).exp()
                }
            })
            .collect()
    }

    /// `q(t)`. Zero cells of the base stay exactly zero and the returned
    /// point counts every positive weight as support.
    pub fn point(&self, t: f64) -> ProbabilityVector {
        make_distribution(self.base().space(), &self.raw_point(t), 1e-9)
            .expect("exponential family weights are a simplex point")
            .with_support_tol(0.0)
    }

    /// Velocity predicted by the geodesic equation: `(u - E_{q(t)}[u]) q(t)`.
    pub fn ode_rhs(&self, t: f64) -> Vec<f64> {
        let q = self.point(t);
        let u = self.direction.score();
        let mean = q.expect(u);
        q.weights()
            .iter()
            .zip(u)
            .map(|(w, u)| (u - mean) * w)
            .collect()
    }
}

pub fn exp_geodesic_point(g: &ExpGeodesic, t: f64) -> ProbabilityVector {
    g.point(t)
}

/// `‖FD derivative of q(t) - (u - E_{q(t)}[u]) q(t)‖∞`.
pub fn geodesic_ode_residual(g: &ExpGeodesic, t: f64) -> f64 {
    let fd = central_difference(|s| g.raw_point(s), t, default_step(t));
    crate::numeric::max_abs_diff(&fd, &g.ode_rhs(t))
}

/// `|⟨U^m_{p,q} u, w⟩_q - ⟨u, U^e_{q,p} w⟩_p|`.
pub fn duality_gap(
    p: &ProbabilityVector,
    q: &ProbabilityVector,
    u: &BundleElement,
    w: &BundleElement,
) -> Result<f64> {
    check_nested(p, q)?;
    let lhs = inner_product(q, &m_transport(p, q, u)?, w)?;
    let rhs = inner_product(p, u, &e_transport(q, p, w)?)?;
    Ok((lhs - rhs).abs())
}

/// `E_{γ^u(t)}[s(t) + u̇(t)]` with `γ^u = e^{u - K} γ`, the derivative of
/// `t ↦ K_{γ(t)}(u(t))`. `u̇` is taken by central differences.
pub fn cumulant_flow_derivative<U>(curve: &ParamCurve, u_curve: U, t: f64) -> Result<f64>
where
    U: Fn(f64) -> Vec<f64>,
{
    let r = score(curve, t)?;
    let gamma = &r.base;
    let u = u_curve(t);
    let k = log_mean_exp(gamma, &u);
    let (lo, hi) = curve.domain();
    let h = default_step(t).min(t - lo).min(hi - t);
    if !(h > 0.0) {
        return Err(Error::OutOfDomain { t, lo, hi });
    }
    let u_dot = central_difference(&u_curve, t, h);
    Ok(gamma
        .support()
        .cells()
        .map(|x| gamma.weight(x) * (u[x] - k).exp() * (r.values()[x] + u_dot[x]))
        .sum())
}
