//! Built-in curves: the line through a vertex, the entropy example, mixtures,
//! the Gibbs family with its boundary contact at `β = 0`, and curves inside
//! the independence and marginal-homogeneity varieties of 2×2 tables.

use std::sync::Arc;

use serde::Deserialize;

use crate::curve::ParamCurve;
use crate::error::{Error, Result};
use crate::poly::{binomial_score_relation, parse_polynomial, LinearScoreForm, RationalPolynomial, VarNames};
use crate::simplex::{ProbabilityVector, SampleSpace};

/// Below this `|β|` the Gibbs curve drops the `U > 0` cells and keeps the
/// `{U = 0}` block as a plain exponential family in `V`.
pub const BETA_SWITCH: f64 = 0.05;

pub const NAMES: [&str; 6] = ["line", "entropy3", "mixture", "gibbs", "indep2x2", "marghomo"];

/// A zoo curve with the metadata used by the test harness.
#[derive(Clone, Debug)]
pub struct ZooCurve {
    pub name: &'static str,
    pub curve: ParamCurve,
    /// Open parameter interval on which the curve stays in the open simplex
    /// (or, for `gibbs`, a representative window).
    pub interior: (f64, f64),
    /// Linear score relations valid on `interior`.
    pub relations: Vec<LinearScoreForm>,
    /// Polynomials in `p` vanishing along the curve.
    pub implicit: Vec<RationalPolynomial>,
}

impl ZooCurve {
    /// `n` points strictly inside `interior`.
    pub fn interior_grid(&self, n: usize) -> Vec<f64> {
        let (lo, hi) = self.interior;
        (1..=n)
            .map(|i| lo + (hi - lo) * i as f64 / (n + 1) as f64)
            .collect()
    }
}

fn space3() -> SampleSpace {
    SampleSpace::numbered(3).expect("three labels")
}

/// `t ↦ (t, t, 1 − 2t)` on `[0, ½]`: a vertex at 0 and a face at ½.
pub fn line_model() -> ParamCurve {
    ParamCurve::new("line", space3(), (0.0, 0.5), |t| vec![t, t, 1.0 - 2.0 * t])
        .with_derivative(|_| vec![1.0, 1.0, -2.0])
}

/// `t ↦ (t, (t − ½)², ¾ − t²)` on `[0.1, 0.8]`, tangent to a face at `t = ½`.
pub fn entropy_curve() -> ParamCurve {
    ParamCurve::new("entropy3", space3(), (0.1, 0.8), |t| {
        vec![t, (t - 0.5) * (t - 0.5), 0.75 - t * t]
    })
    .with_derivative(|t| vec![1.0, 2.0 * (t - 0.5), -2.0 * t])
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixtureSpec {
    pub p: ProbabilityVector,
    pub q: ProbabilityVector,
}

impl MixtureSpec {
    pub fn new(p: ProbabilityVector, q: ProbabilityVector) -> Result<Self> {
        if p.space() != q.space() {
            return Err(Error::BaseMismatch);
        }
        Ok(Self { p, q })
    }
}

impl Default for MixtureSpec {
    fn default() -> Self {
        Self {
            p: ProbabilityVector::from_weights(&[0.5, 0.5]).expect("valid"),
            q: ProbabilityVector::from_weights(&[0.75, 0.25]).expect("valid"),
        }
    }
}

/// `t ↦ (1 − t)p + tq` on `[0, 1]`.
pub fn mixture_curve(spec: &MixtureSpec) -> ParamCurve {
    let p = spec.p.weights().to_vec();
    let q = spec.q.weights().to_vec();
    let dq: Vec<f64> = q.iter().zip(&p).map(|(q, p)| q - p).collect();
    ParamCurve::new("mixture", spec.p.space().clone(), (0.0, 1.0), move |t| {
        p.iter().zip(&q).map(|(p, q)| (1.0 - t) * p + t * q).collect()
    })
    .with_derivative(move |_| dq.clone())
}

/// `γ(β) ∝ exp(−β⁻² U + β V)` with `min U = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct GibbsSpec {
    u: Vec<f64>,
    v: Vec<f64>,
    space: SampleSpace,
}

impl GibbsSpec {
    pub fn new(space: SampleSpace, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let d = space.dim();
        for w in [&u, &v] {
            if w.len() != d {
                return Err(Error::LengthMismatch {
                    expected: d,
                    got: w.len(),
                });
            }
        }
        if let Some(cell) = u.iter().chain(&v).position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { cell: cell % d });
        }
        if let Some(cell) = u.iter().position(|&x| x < 0.0) {
            return Err(Error::NegativeWeight {
                cell,
                value: u[cell],
            });
        }
        if !u.iter().any(|&x| x == 0.0) {
            return Err(Error::InvalidModel("U must vanish on at least one cell".into()));
        }
        Ok(Self { u, v, space })
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn space(&self) -> &SampleSpace {
        &self.space
    }

    /// Normalized weights at `β`.
    pub fn weights(&self, beta: f64) -> Vec<f64> {
        let exps: Vec<Option<f64>> = if beta.abs() < BETA_SWITCH {
            self.u
                .iter()
                .zip(&self.v)
                .map(|(&u, &v)| (u == 0.0).then_some(beta * v))
                .collect()
        } else {
            self.u
                .iter()
                .zip(&self.v)
                .map(|(&u, &v)| Some(-u / (beta * beta) + beta * v))
                .collect()
        };
        let max = exps
            .iter()
            .flatten()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let raw: Vec<f64> = exps
            .iter()
            .map(|e| e.map_or(0.0, |e| (e - max).exp()))
            .collect();
        let z: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / z).collect()
    }

    /// `γ̇(β) = γ (e − E_γ e)` with `e = 2β⁻³U + V`; at small `|β|` only the
    /// `V` part on the `{U = 0}` block survives.
    pub fn derivative(&self, beta: f64) -> Vec<f64> {
        let w = self.weights(beta);
        let e: Vec<f64> = if beta.abs() < BETA_SWITCH {
            self.v.clone()
        } else {
            let b3 = beta * beta * beta;
            self.u
                .iter()
                .zip(&self.v)
                .map(|(&u, &v)| 2.0 * u / b3 + v)
                .collect()
        };
        let mean = expect_on_support(&w, &e);
        w.iter()
            .zip(&e)
            .map(|(&w, &e)| if w > 0.0 { w * (e - mean) } else { 0.0 })
            .collect()
    }
}

impl Default for GibbsSpec {
    fn default() -> Self {
        Self::new(space3(), vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 1.8]).expect("valid")
    }
}

fn expect_on_support(w: &[f64], e: &[f64]) -> f64 {
    w.iter()
        .zip(e)
        .filter(|(&w, _)| w > 0.0)
        .map(|(w, e)| w * e)
        .sum()
}

/// The Gibbs family on the whole real line, continuous at `β = 0` where it
/// equals the uniform distribution on `{U = 0}`.
pub fn gibbs_curve(spec: &GibbsSpec) -> ParamCurve {
    let a = Arc::new(spec.clone());
    let b = Arc::clone(&a);
    ParamCurve::new(
        "gibbs",
        spec.space.clone(),
        (f64::NEG_INFINITY, f64::INFINITY),
        move |beta| a.weights(beta),
    )
    .with_derivative(move |beta| b.derivative(beta))
}

/// `ψ̇(β) = E_β[2β⁻³U + V]`, skipping cells whose weight underflows to zero.
pub fn gibbs_cumulant_derivative(spec: &GibbsSpec, beta: f64) -> Result<f64> {
    if beta == 0.0 {
        return Err(Error::BetaZero);
    }
    if !beta.is_finite() {
        return Err(Error::NonFinite { cell: 0 });
    }
    let w = spec.weights(beta);
    let b3 = beta * beta * beta;
    let e: Vec<f64> = spec
        .u
        .iter()
        .zip(&spec.v)
        .map(|(&u, &v)| if u == 0.0 { v } else { 2.0 * u / b3 + v })
        .collect();
    Ok(expect_on_support(&w, &e))
}

/// A marginal `t ↦ (r(t), 1 − r(t))` given by `r` and `ṙ`.
#[derive(Clone)]
pub struct MarginalPath {
    value: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    derivative: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for MarginalPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("MarginalPath")
    }
}

impl MarginalPath {
    pub fn new<F, G>(value: F, derivative: G) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            value: Arc::new(value),
            derivative: Arc::new(derivative),
        }
    }

    /// `r(t) = a + b t`.
    pub fn affine(a: f64, b: f64) -> Self {
        Self::new(move |t| a + b * t, move |_| b)
    }

    pub fn constant(a: f64) -> Self {
        Self::affine(a, 0.0)
    }

    pub fn value(&self, t: f64) -> f64 {
        (self.value)(t)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        (self.derivative)(t)
    }
}

/// Product measure `(r, 1 − r) ⊗ (c, 1 − c)` on cells `11, 12, 21, 22`, on `[0, 1]`.
pub fn independence_curve(row: MarginalPath, col: MarginalPath) -> ParamCurve {
    let (row2, col2) = (row.clone(), col.clone());
    ParamCurve::new("indep2x2", SampleSpace::table2x2(), (0.0, 1.0), move |t| {
        let (r, c) = (row.value(t), col.value(t));
        vec![r * c, r * (1.0 - c), (1.0 - r) * c, (1.0 - r) * (1.0 - c)]
    })
    .with_derivative(move |t| {
        let (r, c) = (row2.value(t), col2.value(t));
        let (dr, dc) = (row2.derivative(t), col2.derivative(t));
        vec![
            dr * c + r * dc,
            dr * (1.0 - c) - r * dc,
            -dr * c + (1.0 - r) * dc,
            -dr * (1.0 - c) - (1.0 - r) * dc,
        ]
    })
}

/// Symmetric 2×2 tables `((1−θ)², θ(1−θ), θ(1−θ), θ²)` with the two
/// off-diagonal cells merged: cells `11, 12, 22` carry `((1−θ)², 2θ(1−θ), θ²)`.
pub fn marginal_homogeneity_path(theta: MarginalPath) -> ParamCurve {
    let space = SampleSpace::new(["11", "12", "22"]).expect("distinct labels");
    let th2 = theta.clone();
    ParamCurve::new("marghomo", space, (0.0, 1.0), move |t| {
        let th = theta.value(t);
        vec![(1.0 - th) * (1.0 - th), 2.0 * th * (1.0 - th), th * th]
    })
    .with_derivative(move |t| {
        let (th, dth) = (th2.value(t), th2.derivative(t));
        vec![-2.0 * (1.0 - th) * dth, (2.0 - 4.0 * th) * dth, 2.0 * th * dth]
    })
}

/// [`marginal_homogeneity_path`] with `θ = t`.
pub fn marginal_homogeneity_curve() -> ParamCurve {
    marginal_homogeneity_path(MarginalPath::affine(0.0, 1.0))
}

/// `((1+t)/4, (1−t)/4, (1−t)/4, (1+t)/4)` on `[0, 0.9]`: off the independence
/// variety for every `t > 0`.
pub fn non_independent_curve() -> ParamCurve {
    ParamCurve::new("nonindep2x2", SampleSpace::table2x2(), (0.0, 0.9), |t| {
        let (a, b) = ((1.0 + t) / 4.0, (1.0 - t) / 4.0);
        vec![a, b, b, a]
    })
    .with_derivative(|_| vec![0.25, -0.25, -0.25, 0.25])
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GibbsParams {
    #[serde(rename = "U")]
    u: Vec<f64>,
    #[serde(rename = "V")]
    v: Vec<f64>,
    labels: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MixtureParams {
    p: Vec<f64>,
    q: Vec<f64>,
    labels: Option<Vec<String>>,
}

fn params_space(labels: Option<Vec<String>>, d: usize) -> Result<SampleSpace> {
    match labels {
        Some(l) => SampleSpace::new(l),
        None => SampleSpace::numbered(d),
    }
}

fn parse_params<T: serde::de::DeserializeOwned>(json: &str) -> Result<T> {
    serde_json::from_str(json).map_err(|e| Error::InvalidModel(format!("parameter block: {e}")))
}

/// `{"U": [...], "V": [...]}` with optional `"labels"`.
pub fn gibbs_spec_from_json(json: &str) -> Result<GibbsSpec> {
    let p: GibbsParams = parse_params(json)?;
    let space = params_space(p.labels, p.u.len())?;
    GibbsSpec::new(space, p.u, p.v)
}

/// `{"p": [...], "q": [...]}` with optional `"labels"`.
pub fn mixture_spec_from_json(json: &str) -> Result<MixtureSpec> {
    let m: MixtureParams = parse_params(json)?;
    let space = params_space(m.labels, m.p.len())?;
    MixtureSpec::new(
        ProbabilityVector::new(space.clone(), m.p)?,
        ProbabilityVector::new(space, m.q)?,
    )
}

fn implicit(space: &SampleSpace, polys: &[&str]) -> Vec<RationalPolynomial> {
    let names = VarNames::new(space.clone());
    polys
        .iter()
        .map(|s| parse_polynomial(s, &names).expect("built-in polynomial"))
        .collect()
}

/// Looks up a zoo curve; `gibbs` and `mixture` accept a JSON parameter block.
pub fn zoo_curve(name: &str, params: Option<&str>) -> Result<ZooCurve> {
    if params.is_some() && !matches!(name, "gibbs" | "mixture") {
        return Err(Error::InvalidModel(format!("model {name:?} takes no parameters")));
    }
    let z = match name {
        "line" => {
            let curve = line_model();
            ZooCurve {
                name: "line",
                implicit: implicit(curve.space(), &["p1 - p2", "p3 + 2*p1 - 1"]),
                relations: vec![],
                interior: (0.0, 0.5),
                curve,
            }
        }
        "entropy3" => {
            let curve = entropy_curve();
            ZooCurve {
                name: "entropy3",
                implicit: implicit(curve.space(), &["p2 - p1^2 + p1 - 1/4", "p3 + p1^2 - 3/4"]),
                relations: vec![],
                interior: (0.1, 0.8),
                curve,
            }
        }
        "mixture" => {
            let spec = match params {
                Some(json) => mixture_spec_from_json(json)?,
                None => MixtureSpec::default(),
            };
            ZooCurve {
                name: "mixture",
                curve: mixture_curve(&spec),
                interior: (0.0, 1.0),
                relations: vec![],
                implicit: vec![],
            }
        }
        "gibbs" => {
            let spec = match params {
                Some(json) => gibbs_spec_from_json(json)?,
                None => GibbsSpec::default(),
            };
            ZooCurve {
                name: "gibbs",
                curve: gibbs_curve(&spec),
                interior: (-3.0, 3.0),
                relations: vec![],
                implicit: vec![],
            }
        }
        "indep2x2" => {
            let curve = independence_curve(MarginalPath::affine(0.0, 1.0), MarginalPath::constant(1.0 / 3.0));
            ZooCurve {
                name: "indep2x2",
                implicit: implicit(curve.space(), &["p11*p22 - p12*p21"]),
                relations: vec![binomial_score_relation(&[1, 0, 0, 1], &[0, 1, 1, 0])?],
                interior: (0.0, 1.0),
                curve,
            }
        }
        "marghomo" => {
            let curve = marginal_homogeneity_curve();
            ZooCurve {
                name: "marghomo",
                implicit: implicit(curve.space(), &["4*p11*p22 - p12^2"]),
                relations: vec![binomial_score_relation(&[1, 0, 1], &[0, 2, 0])?],
                interior: (0.0, 1.0),
                curve,
            }
        }
        other => return Err(Error::InvalidModel(format!("unknown model {other:?}"))),
    };
    Ok(z)
}

/// Every zoo curve with default parameters.
pub fn all() -> Vec<ZooCurve> {
    NAMES
        .iter()
        .map(|n| zoo_curve(n, None).expect("built-in model"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{score, velocity};
    use crate::numeric::max_abs_diff;
    use crate::poly::relation_residual;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        max_abs_diff(a, b) <= tol
    }

    #[test]
    fn line_points() {
        let c = line_model();
        assert_eq!(c.point(0.25).unwrap().weights(), &[0.25, 0.25, 0.5]);
        assert!(c.point(0.5).unwrap().support().to_bits() == "110");
        assert!(c.point(0.0).unwrap().is_vertex());
    }

    #[test]
    fn entropy_curve_points_and_scores() {
        let c = entropy_curve();
        assert_eq!(c.point(0.5).unwrap().weights(), &[0.5, 0.0, 0.5]);
        let s = score(&c, 0.3).unwrap();
        assert!(close(s.values(), &[10.0 / 3.0, -10.0, -10.0 / 11.0], 1e-12));
        assert_eq!(velocity(&c, 0.5).unwrap().values(), &[1.0, 0.0, -1.0]);
    }

    #[test]
    fn mixture_scores_at_the_ends() {
        let c = mixture_curve(&MixtureSpec::default());
        assert!(close(score(&c, 0.0).unwrap().values(), &[0.5, -0.5], 1e-15));
        assert!(close(score(&c, 1.0).unwrap().values(), &[1.0 / 3.0, -1.0], 1e-15));
        assert!(close(c.point(0.5).unwrap().weights(), &[0.625, 0.375], 1e-15));
    }

    #[test]
    fn mixture_score_is_canonical_off_support() {
        let p = ProbabilityVector::from_weights(&[0.5, 0.5, 0.0]).unwrap();
        let q = ProbabilityVector::from_weights(&[0.0, 0.5, 0.5]).unwrap();
        let c = mixture_curve(&MixtureSpec::new(p, q).unwrap());
        let s = score(&c, 0.5).unwrap();
        assert!(close(s.values(), &[-2.0, 0.0, 2.0], 1e-12));
    }

    #[test]
    fn gibbs_values() {
        let spec = GibbsSpec::default();
        let c = gibbs_curve(&spec);
        assert_eq!(c.point(0.0).unwrap().weights(), &[0.5, 0.5, 0.0]);
        let z = 1.0 + 1f64.exp() + 0.8f64.exp();
        let expected = [1.0 / z, 1f64.exp() / z, 0.8f64.exp() / z];
        assert!(close(c.point(1.0).unwrap().weights(), &expected, 1e-15));
        assert!(close(&expected, &[0.168, 0.457, 0.374], 1e-3));
        assert!(c.point(0.2).unwrap().weight(2) < 1e-10);
    }

    #[test]
    fn gibbs_is_continuous_at_zero() {
        let spec = GibbsSpec::default();
        let at0 = spec.weights(0.0);
        let mut last = f64::INFINITY;
        for k in 1..=6 {
            for sign in [-1.0, 1.0] {
                let beta = sign * 10f64.powi(-k);
                let gap = max_abs_diff(&spec.weights(beta), &at0);
                assert!(gap <= 0.6 * 10f64.powi(-k), "beta {beta}: {gap}");
                last = last.min(gap);
            }
        }
        assert!(last < 1e-6);
    }

    #[test]
    fn gibbs_contact_is_faster_than_any_power() {
        let spec = GibbsSpec::default();
        for &beta in &[0.06, 0.08, 0.1, 0.15, 0.2, 0.3, 0.5, -0.1, -0.3] {
            let w3 = spec.weights(beta)[2];
            assert!(w3 <= 3.0 * (-1.0 / (beta * beta)).exp(), "beta {beta}");
            if beta.abs() <= 0.1 {
                for k in 1..=8 {
                    assert!(w3 <= beta.abs().powi(k));
                }
            }
        }
    }

    #[test]
    fn gibbs_limits_at_large_beta() {
        let spec = GibbsSpec::default();
        assert!(spec.weights(50.0)[2] >= 1.0 - 1e-8);
        assert!(spec.weights(-50.0)[0] >= 1.0 - 1e-8);
    }

    #[test]
    fn gibbs_derivative_matches_finite_differences() {
        let spec = GibbsSpec::default();
        for &beta in &[-2.0, -0.7, -0.2, 0.3, 1.0, 2.5] {
            let h = 1e-5;
            let fd: Vec<f64> = spec
                .weights(beta + h)
                .iter()
                .zip(spec.weights(beta - h))
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect();
            assert!(close(&spec.derivative(beta), &fd, 1e-7), "beta {beta}");
        }
    }

    #[test]
    fn gibbs_derivative_at_zero_is_the_v_limit() {
        let d = GibbsSpec::default().derivative(0.0);
        assert_eq!(d, vec![-0.25, 0.25, 0.0]);
    }

    #[test]
    fn gibbs_cumulant_derivative_cases() {
        let spec = GibbsSpec::default();
        assert_eq!(gibbs_cumulant_derivative(&spec, 0.0), Err(Error::BetaZero));

        let flat = GibbsSpec::new(SampleSpace::numbered(2).unwrap(), vec![0.0, 0.0], vec![0.0, 1.0])
            .unwrap();
        let e = 1f64.exp();
        let got = gibbs_cumulant_derivative(&flat, 1.0).unwrap();
        assert!((got - e / (1.0 + e)).abs() < 1e-15);

        let small = gibbs_cumulant_derivative(&spec, 0.1).unwrap();
        let ev = 0.1f64.exp() / (1.0 + 0.1f64.exp());
        assert!((small - ev).abs() < 1e-12, "{small} vs {ev}");

        let big = gibbs_cumulant_derivative(&spec, 50.0).unwrap();
        assert!((big - (1.8 + 2.0 / 125_000.0)).abs() < 1e-8);
    }

    #[test]
    fn gibbs_cumulant_derivative_matches_log_partition() {
        let spec = GibbsSpec::default();
        let log_z = |b: f64| -> f64 {
            spec.u()
                .iter()
                .zip(spec.v())
                .map(|(u, v)| (-u / (b * b) + b * v).exp())
                .sum::<f64>()
                .ln()
        };
        for &beta in &[0.4, 1.0, -1.5] {
            let h = 1e-5;
            let fd = (log_z(beta + h) - log_z(beta - h)) / (2.0 * h);
            let got = gibbs_cumulant_derivative(&spec, beta).unwrap();
            assert!((got - fd).abs() < 1e-7);
        }
    }

    #[test]
    fn gibbs_spec_validation() {
        let s = space3();
        assert!(matches!(
            GibbsSpec::new(s.clone(), vec![1.0, 1.0, 2.0], vec![0.0; 3]),
            Err(Error::InvalidModel(_))
        ));
        assert!(matches!(
            GibbsSpec::new(s.clone(), vec![0.0, -1.0, 2.0], vec![0.0; 3]),
            Err(Error::NegativeWeight { cell: 1, .. })
        ));
        assert!(matches!(
            GibbsSpec::new(s, vec![0.0, 1.0], vec![0.0; 3]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn marginal_homogeneity_at_half() {
        let c = marginal_homogeneity_curve();
        assert!(close(c.point(0.5).unwrap().weights(), &[0.25, 0.5, 0.25], 1e-15));
    }

    #[test]
    fn implicit_polynomials_vanish_along_curves() {
        for z in all() {
            for t in z.interior_grid(25) {
                let w = z.curve.point(t).unwrap();
                for f in &z.implicit {
                    let v = f.eval_f64(|x| w.weight(x.index));
                    assert!(v.abs() <= 1e-12, "{} at {t}: {v}", z.name);
                }
            }
        }
    }

    #[test]
    fn independence_polynomial_vanishes_exactly_on_dyadic_grid() {
        let c = independence_curve(MarginalPath::affine(0.0, 1.0), MarginalPath::constant(0.25));
        for i in 1..16 {
            let w = c.raw(i as f64 / 16.0);
            assert_eq!(w[0] * w[3] - w[1] * w[2], 0.0);
        }
    }

    #[test]
    fn stored_relations_hold() {
        for z in all() {
            for form in &z.relations {
                let r = relation_residual(form, &z.curve, &z.interior_grid(50)).unwrap();
                assert!(r <= 1e-9, "{}: {r}", z.name);
            }
        }
    }

    #[test]
    fn negative_control_breaks_independence() {
        let z = zoo_curve("indep2x2", None).unwrap();
        let grid: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
        let r = relation_residual(&z.relations[0], &non_independent_curve(), &grid[..8]).unwrap();
        assert!(r >= 1e-2);
    }

    #[test]
    fn lookup_by_name_and_params() {
        for n in NAMES {
            assert_eq!(zoo_curve(n, None).unwrap().name, n);
        }
        assert!(matches!(zoo_curve("nope", None), Err(Error::InvalidModel(_))));
        assert!(matches!(zoo_curve("line", Some("{}")), Err(Error::InvalidModel(_))));

        let g = zoo_curve("gibbs", Some(r#"{"U": [0, 2], "V": [1, 0]}"#)).unwrap();
        assert_eq!(g.curve.point(0.0).unwrap().weights(), &[1.0, 0.0]);
        let m = zoo_curve("mixture", Some(r#"{"p": [1, 0], "q": [0, 1]}"#)).unwrap();
        assert_eq!(m.curve.point(0.25).unwrap().weights(), &[0.75, 0.25]);
        assert!(matches!(
            zoo_curve("gibbs", Some(r#"{"U": [1, 2], "V": [1, 0]}"#)),
            Err(Error::InvalidModel(_))
        ));
        assert!(matches!(
            zoo_curve("mixture", Some("not json")),
            Err(Error::InvalidModel(_))
        ));
    }
}
