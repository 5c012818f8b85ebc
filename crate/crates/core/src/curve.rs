//! One-parameter models `t ↦ γ(t)` in the closed simplex and their scores.
//!
//! The score at `t` is the componentwise quotient `γ̇(t)/γ(t)` on the support
//! of `γ(t)` and zero elsewhere. A zero cell must also have zero velocity:
//! a curve that touches a face transversally (typically at an endpoint of its
//! parameter domain) has no score there and yields
//! [`Error::AbsoluteContinuityViolation`].

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::{central_difference, default_step};
use crate::simplex::{
    make_distribution, BundleElement, ContrastVector, ProbabilityVector, SampleSpace,
    SupportIndicator, NORMALIZATION_TOL, SUPPORT_TOL,
};

/// Velocity magnitude above which a zero cell is a genuine boundary crossing.
pub const CONTINUITY_TOL: f64 = 1e-6;
/// Support weights below this value make the score flagged as ill-conditioned.
pub const CONDITIONING_FLOOR: f64 = 1e-8;

pub type Evaluator = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DiffMode {
    Analytic,
    /// Central differences; `None` picks [`default_step`].
    CentralFd { step: Option<f64> },
}

/// A curve in `Δ(Ω)` on a closed parameter interval.
#[derive(Clone)]
pub struct ParamCurve {
    name: String,
    space: SampleSpace,
    domain: (f64, f64),
    eval: Evaluator,
    deriv: Option<Evaluator>,
    diff_mode: DiffMode,
    support_tol: f64,
}

impl fmt::Debug for ParamCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParamCurve")
            .field("name", &self.name)
            .field("space", &self.space)
            .field("domain", &self.domain)
            .field("diff_mode", &self.diff_mode)
            .finish()
    }
}

impl ParamCurve {
    /// A curve differentiated by central finite differences.
    pub fn new<F>(name: impl Into<String>, space: SampleSpace, domain: (f64, f64), eval: F) -> Self
    where
        F: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            space,
            domain,
            eval: Arc::new(eval),
            deriv: None,
            diff_mode: DiffMode::CentralFd { step: None },
            support_tol: SUPPORT_TOL,
        }
    }

    /// Supplies an analytic derivative and switches to analytic mode.
    pub fn with_derivative<F>(mut self, deriv: F) -> Self
    where
        F: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        self.deriv = Some(Arc::new(deriv));
        self.diff_mode = DiffMode::Analytic;
        self
    }

    /// Analytic mode without a derivative falls back to finite differences.
    pub fn with_diff_mode(mut self, mode: DiffMode) -> Self {
        self.diff_mode = match (mode, &self.deriv) {
            (DiffMode::Analytic, None) => DiffMode::CentralFd { step: None },
            (m, _) => m,
        };
        self
    }

    pub fn with_support_tol(mut self, tol: f64) -> Self {
        self.support_tol = tol;
        self
    }

    /// The constant curve `γ(t) ≡ p` on the whole real line.
    pub fn constant(p: &ProbabilityVector) -> Self {
        let w = p.weights().to_vec();
        let d = w.len();
        Self::new(
            "constant",
            p.space().clone(),
            (f64::NEG_INFINITY, f64::INFINITY),
            move |_| w.clone(),
        )
        .with_derivative(move |_| vec![0.0; d])
    }

    /// Piecewise-linear curve through uniformly spaced samples.
    ///
    /// Node derivatives are second-order differences of the samples
    /// (central inside, one-sided at the ends) and are interpolated linearly.
    pub fn from_samples(
        name: impl Into<String>,
        space: SampleSpace,
        ts: Vec<f64>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = ts.len();
        if n < 2 || rows.len() != n {
            return Err(Error::InvalidModel(
                "a sampled curve needs at least two rows".into(),
            ));
        }
        let d = space.dim();
        for row in &rows {
            if row.len() != d {
                return Err(Error::LengthMismatch {
                    expected: d,
                    got: row.len(),
                });
            }
        }
        let h = (ts[n - 1] - ts[0]) / (n - 1) as f64;
        if !(h > 0.0) {
            return Err(Error::InvalidModel("sample times must increase".into()));
        }
        for (i, &t) in ts.iter().enumerate() {
            let expected = ts[0] + i as f64 * h;
            if (t - expected).abs() > 1e-9 * h.max(t.abs()) {
                return Err(Error::InvalidModel(
                    "finite differences on samples need uniform spacing".into(),
                ));
            }
        }
        let derivs: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..d)
                    .map(|x| {
                        if n == 2 {
                            (rows[1][x] - rows[0][x]) / h
                        } else if i == 0 {
                            (-3.0 * rows[0][x] + 4.0 * rows[1][x] - rows[2][x]) / (2.0 * h)
                        } else if i == n - 1 {
                            (3.0 * rows[n - 1][x] - 4.0 * rows[n - 2][x] + rows[n - 3][x])
                                / (2.0 * h)
                        } else {
                            (rows[i + 1][x] - rows[i - 1][x]) / (2.0 * h)
                        }
                    })
                    .collect()
            })
            .collect();
        let t0 = ts[0];
        let interp = move |table: &[Vec<f64>], t: f64| -> Vec<f64> {
            let pos = ((t - t0) / h).clamp(0.0, (n - 1) as f64);
            let i = (pos.floor() as usize).min(n - 2);
            let frac = pos - i as f64;
            table[i]
                .iter()
                .zip(&table[i + 1])
                .map(|(a, b)| a + frac * (b - a))
                .collect()
        };
        let interp2 = interp.clone();
        Ok(Self::new(name, space, (ts[0], ts[n - 1]), move |t| interp(&rows, t))
            .with_derivative(move |t| interp2(&derivs, t)))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &SampleSpace {
        &self.space
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn diff_mode(&self) -> DiffMode {
        self.diff_mode
    }

    pub fn support_tol(&self) -> f64 {
        self.support_tol
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.deriv.is_some()
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.domain.0 && t <= self.domain.1
    }

    /// Raw evaluator output, no validation.
    pub fn raw(&self, t: f64) -> Vec<f64> {
        (self.eval)(t)
    }

    /// `γ(t)` validated as a simplex point.
    pub fn point(&self, t: f64) -> Result<ProbabilityVector> {
        self.check_domain(t)?;
        Ok(make_distribution(&self.space, &(self.eval)(t), NORMALIZATION_TOL)?
            .with_support_tol(self.support_tol))
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        if !t.is_finite() || !self.contains(t) {
            return Err(Error::OutOfDomain {
                t,
                lo: self.domain.0,
                hi: self.domain.1,
            });
        }
        Ok(())
    }

    fn raw_velocity(&self, t: f64) -> Result<Vec<f64>> {
        self.check_domain(t)?;
        match (self.diff_mode, &self.deriv) {
            (DiffMode::Analytic, Some(deriv)) => Ok(deriv(t)),
            (mode, _) => {
                let step = match mode {
                    DiffMode::CentralFd { step } => step,
                    DiffMode::Analytic => None,
                };
                let (lo, hi) = self.domain;
                if t <= lo || t >= hi {
                    return Err(Error::OutOfDomain { t, lo, hi });
                }
                let h = step
                    .unwrap_or_else(|| default_step(t))
                    .min(t - lo)
                    .min(hi - t);
                Ok(central_difference(|s| (self.eval)(s), t, h))
            }
        }
    }
}

/// `γ̇(t)` as a contrast.
pub fn velocity(curve: &ParamCurve, t: f64) -> Result<ContrastVector> {
    let v = curve.raw_velocity(t)?;
    ContrastVector::new(curve.space.clone(), v)
}

/// Score of a curve at one parameter value.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreResult {
    pub base: ProbabilityVector,
    pub velocity: Vec<f64>,
    pub score: BundleElement,
    /// Cells where the score is uniquely defined, i.e. `supp γ(t)`.
    pub determined: SupportIndicator,
    /// Some support weight lies below [`CONDITIONING_FLOOR`].
    pub ill_conditioned: bool,
}

impl ScoreResult {
    pub fn values(&self) -> &[f64] {
        self.score.score()
    }
}

/// Fisher score `γ̇/γ` on the support, canonical zero elsewhere.
pub fn score(curve: &ParamCurve, t: f64) -> Result<ScoreResult> {
    let base = curve.point(t)?;
    let v = velocity(curve, t)?.into_values();
    let mut s = vec![0.0; base.dim()];
    let mut ill_conditioned = false;
    for (cell, (&w, &dw)) in base.weights().iter().zip(&v).enumerate() {
        if base.in_support(cell) {
            s[cell] = dw / w;
            ill_conditioned |= w < CONDITIONING_FLOOR;
        } else if dw.abs() > CONTINUITY_TOL {
            return Err(Error::AbsoluteContinuityViolation {
                cell,
                weight: w,
                velocity: dw,
            });
        }
    }
    let determined = base.support();
    Ok(ScoreResult {
        score: BundleElement::from_parts(base.clone(), s),
        base,
        velocity: v,
        determined,
        ill_conditioned,
    })
}

/// `Σ_{supp γ} γ̇²/γ`, the variance of the score.
pub fn fisher_information(curve: &ParamCurve, t: f64) -> Result<f64> {
    let r = score(curve, t)?;
    Ok(r
        .determined
        .cells()
        .map(|x| r.velocity[x] * r.velocity[x] / r.base.weight(x))
        .sum())
}

/// Square-root embedding `ρ = 2√γ` on the radius-2 sphere and `ρ̇ = ½ s ρ`.
pub fn sqrt_embedding(curve: &ParamCurve, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let r = score(curve, t)?;
    let rho: Vec<f64> = r.base.weights().iter().map(|w| 2.0 * w.sqrt()).collect();
    let rho_dot = rho
        .iter()
        .zip(r.values())
        .map(|(rho, s)| 0.5 * s * rho)
        .collect();
    Ok((rho, rho_dot))
}
