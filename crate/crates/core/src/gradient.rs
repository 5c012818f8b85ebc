//! Natural gradients, entropy and natural-gradient flows.
//!
//! The natural gradient of `G` at `p` is the fibre element `grad G(p)` with
//! `d/dt G(γ(t)) = ⟨grad G(γ(t)), s(t)⟩_{γ(t)}` for every curve through `p`.
//! With a Euclidean gradient at hand it is the centered gradient; otherwise
//! it is recovered from directional derivatives along exponential geodesics
//! that stay inside the current face.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::curve::{score, velocity, ParamCurve, CONTINUITY_TOL};
use crate::error::{Error, Result};
use crate::numeric::{central_difference_scalar, default_step};
use crate::simplex::{center, inner_product, BundleElement, ProbabilityVector};
use crate::transport::ExpGeodesic;

/// Flows stop once the fibre norm of the gradient drops below this.
pub const FLOW_GRADIENT_TOL: f64 = 1e-8;
/// Step halvings before a flow step is rejected.
pub const MAX_HALVINGS: usize = 30;
const ARMIJO: f64 = 1e-4;

pub type ValueFn = Arc<dyn Fn(&ProbabilityVector) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&ProbabilityVector) -> Vec<f64> + Send + Sync>;

/// A scalar functional on the simplex, optionally with its Euclidean gradient.
#[derive(Clone)]
pub struct Functional {
    name: String,
    value: ValueFn,
    gradient: Option<GradientFn>,
    fd_step: f64,
}

impl fmt::Debug for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Functional")
            .field("name", &self.name)
            .field("analytic_gradient", &self.gradient.is_some())
            .field("fd_step", &self.fd_step)
            .finish()
    }
}

impl Functional {
    pub fn new<F>(name: impl Into<String>, value: F) -> Self
    where
        F: Fn(&ProbabilityVector) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            value: Arc::new(value),
            gradient: None,
            fd_step: 1e-4,
        }
    }

    pub fn with_gradient<F>(mut self, gradient: F) -> Self
    where
        F: Fn(&ProbabilityVector) -> Vec<f64> + Send + Sync + 'static,
    {
        self.gradient = Some(Arc::new(gradient));
        self
    }

    /// Drops the analytic gradient, forcing the finite-difference route.
    pub fn without_gradient(mut self) -> Self {
        self.gradient = None;
        self
    }

    pub fn with_fd_step(mut self, step: f64) -> Self {
        self.fd_step = step;
        self
    }

    /// `G(p) = E_p[g]`, with `∇G = g`.
    pub fn expectation(g: Vec<f64>) -> Self {
        let grad = g.clone();
        Self::new("expectation", move |p| p.expect(&g)).with_gradient(move |_| grad.clone())
    }

    /// Shannon entropy, with `∇H = -(log p + 1)` on the support.
    pub fn entropy() -> Self {
        Self::new("entropy", entropy).with_gradient(|p| {
            (0..p.dim())
                .map(|x| {
                    if p.in_support(x) {
                        -(p.weight(x).ln() + 1.0)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self, p: &ProbabilityVector) -> f64 {
        (self.value)(p)
    }

    pub fn euclidean_gradient(&self, p: &ProbabilityVector) -> Option<Vec<f64>> {
        self.gradient.as_ref().map(|g| g(p))
    }

    pub fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }
}

/// `grad G(p)`, a section of the statistical bundle.
pub fn natural_gradient(g: &Functional, p: &ProbabilityVector) -> Result<BundleElement> {
    if let Some(grad) = g.euclidean_gradient(p) {
        return center(&grad, p);
    }
    let cells: Vec<usize> = p.support().cells().collect();
    if cells.len() < 2 {
        return Err(Error::GradientUnavailable(
            "finite differences at a vertex".into(),
        ));
    }
    // Directions e_{x0} - e_y centered at p span the fibre on supp p.
    let directions: Vec<BundleElement> = cells[1..]
        .iter()
        .map(|&y| {
            let mut e = vec![0.0; p.dim()];
            e[cells[0]] = 1.0;
            e[y] = -1.0;
            center(&e, p)
        })
        .collect::<Result<_>>()?;
    let n = directions.len();
    let slopes = DVector::from_iterator(
        n,
        directions.iter().map(|u| {
            let geo = ExpGeodesic::new(u.clone());
            central_difference_scalar(|e| g.value(&geo.point(e)), 0.0, g.fd_step)
        }),
    );
    let mut gram = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = inner_product(p, &directions[i], &directions[j])?;
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
    }
    let coeffs = gram
        .cholesky()
        .ok_or_else(|| Error::GradientUnavailable("singular fibre Gram matrix".into()))?
        .solve(&slopes);
    let mut out = vec![0.0; p.dim()];
    for (c, u) in coeffs.iter().zip(&directions) {
        for (o, s) in out.iter_mut().zip(u.score()) {
            *o += c * s;
        }
    }
    Ok(BundleElement::from_parts(p.clone(), out))
}

fn domain_step(curve: &ParamCurve, t: f64) -> Result<f64> {
    let (lo, hi) = curve.domain();
    let h = default_step(t).min(t - lo).min(hi - t);
    if h > 0.0 {
        Ok(h)
    } else {
        Err(Error::OutOfDomain { t, lo, hi })
    }
}

/// `|d/dt G(γ(t)) - ⟨grad G(γ(t)), s(t)⟩_{γ(t)}|` with the derivative by central differences.
pub fn directional_derivative_check(g: &Functional, curve: &ParamCurve, t: f64) -> Result<f64> {
    let r = score(curve, t)?;
    let h = domain_step(curve, t)?;
    let at = |s: f64| -> Result<f64> { Ok(g.value(&curve.point(s)?)) };
    let quotient = |h: f64| -> Result<f64> { Ok((at(t + h)? - at(t - h)?) / (2.0 * h)) };
    let fd = (4.0 * quotient(0.5 * h)? - quotient(h)?) / 3.0;
    let grad = natural_gradient(g, &r.base)?;
    let pairing = inner_product(&r.base, &grad, &r.score)?;
    Ok((fd - pairing).abs())
}

/// `H(p) = -Σ p log p`, computed as `log k - KL(p ‖ uniform on supp p)`.
///
/// The second form keeps full relative accuracy near the maximum, which the
/// entropy flow relies on for its monotonicity test.
pub fn entropy(p: &ProbabilityVector) -> f64 {
    let k = p.support_size() as f64;
    let divergence: f64 = p
        .support()
        .cells()
        .map(|x| p.weight(x) * (k * p.weight(x) - 1.0).ln_1p())
        .sum();
    k.ln() - divergence
}

/// `grad H(p) = -log p - H(p)` on the support.
pub fn entropy_gradient(p: &ProbabilityVector) -> BundleElement {
    let k = p.support_size() as f64;
    let neg_log: Vec<f64> = (0..p.dim())
        .map(|x| {
            if p.in_support(x) {
                -(k * p.weight(x) - 1.0).ln_1p()
            } else {
                0.0
            }
        })
        .collect();
    center(&neg_log, p).expect("length matches")
}

/// `dH/dt = -Σ (log γ + 1) γ̇`, with zero cells of zero velocity contributing 0.
pub fn entropy_production(curve: &ParamCurve, t: f64) -> Result<f64> {
    let p = curve.point(t)?;
    let v = velocity(curve, t)?;
    let mut total = 0.0;
    for (cell, &dv) in v.values().iter().enumerate() {
        if p.in_support(cell) {
            total -= (p.weight(cell).ln() + 1.0) * dv;
        } else if dv.abs() > CONTINUITY_TOL {
            return Err(Error::AbsoluteContinuityViolation {
                cell,
                weight: p.weight(cell),
                velocity: dv,
            });
        }
    }
    Ok(total)
}

/// Both sides of the Cramér–Rao bound at `t`:
/// `(Cov(s, g)², Var(s)·Var(g))`.
pub fn cramer_rao_gap(curve: &ParamCurve, g: &[f64], t: f64) -> Result<(f64, f64)> {
    let r = score(curve, t)?;
    let p = &r.base;
    if g.len() != p.dim() {
        return Err(Error::LengthMismatch {
            expected: p.dim(),
            got: g.len(),
        });
    }
    let g_centered = center(g, p)?;
    let cov = inner_product(p, &r.score, &g_centered)?;
    let info: f64 = r
        .determined
        .cells()
        .map(|x| r.velocity[x] * r.velocity[x] / p.weight(x))
        .sum();
    let var_g = inner_product(p, &g_centered, &g_centered)?;
    Ok((cov * cov, info * var_g))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowDirection {
    Ascent,
    Descent,
}

impl FlowDirection {
    fn sign(self) -> f64 {
        match self {
            FlowDirection::Ascent => 1.0,
            FlowDirection::Descent => -1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowPoint {
    /// Accumulated accepted step length.
    pub t: f64,
    pub point: ProbabilityVector,
    pub value: f64,
    pub grad_norm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowTrajectory {
    pub points: Vec<FlowPoint>,
    pub step: f64,
    pub direction: FlowDirection,
    pub converged: bool,
}

impl FlowTrajectory {
    pub fn last(&self) -> &FlowPoint {
        self.points.last().expect("trajectory holds the start point")
    }
}

/// Explicit Euler in the exponential chart:
/// `p_{k+1} = q(1)` on the geodesic from `p_k` with direction `±α grad G(p_k)`.
///
/// `α` starts at `step` and is halved until an Armijo test holds. When the
/// predicted gain falls below the resolution of `G`, a step is accepted as
/// soon as `G` does not move backwards.
pub fn natural_gradient_flow(
    g: &Functional,
    p0: &ProbabilityVector,
    step: f64,
    n_steps: usize,
    direction: FlowDirection,
) -> Result<FlowTrajectory> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    if p0.is_vertex() {
        return Err(Error::VertexStart);
    }
    let sign = direction.sign();
    let mut p = p0.clone();
    let mut grad = natural_gradient(g, &p)?;
    let mut value = g.value(&p);
    let mut t = 0.0;
    let mut points = vec![FlowPoint {
        t,
        point: p.clone(),
        value,
        grad_norm: grad.norm(),
    }];
    let mut converged = false;
    for iteration in 0..n_steps {
        let norm = grad.norm();
        if norm < FLOW_GRADIENT_TOL {
            converged = true;
            break;
        }
        let resolution = 4.0 * f64::EPSILON * value.abs().max(1.0);
        let mut alpha = step;
        let mut halvings = 0;
        let (next, next_value) = loop {
            let candidate = ExpGeodesic::new(grad.scaled(sign * alpha)).point(1.0);
            let candidate_value = g.value(&candidate);
            let gain = sign * (candidate_value - value);
            let required = ARMIJO * alpha * norm * norm;
            if gain >= required || (required <= resolution && gain >= 0.0) {
                break (candidate, candidate_value);
            }
            halvings += 1;
            if halvings > MAX_HALVINGS {
                return Err(Error::StepRejected {
                    iteration,
                    halvings: MAX_HALVINGS,
                });
            }
            alpha *= 0.5;
        };
        t += alpha;
        p = next;
        value = next_value;
        grad = natural_gradient(g, &p)?;
        points.push(FlowPoint {
            t,
            point: p.clone(),
            value,
            grad_norm: grad.norm(),
        });
    }
    if !converged {
        converged = grad.norm() < FLOW_GRADIENT_TOL;
    }
    Ok(FlowTrajectory {
        points,
        step,
        direction,
        converged,
    })
}
