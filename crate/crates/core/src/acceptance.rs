//! Acceptance checks with independent oracles: RK4 for the geodesic equation,
//! central differences for derivatives, closed forms, exact rational
//! arithmetic, and seeded random draws.

use std::fmt;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curve::score;
use crate::error::{Error, Result};
use crate::gradient::{
    cramer_rao_gap, directional_derivative_check, entropy_production, natural_gradient_flow,
    FlowDirection, Functional,
};
use crate::numeric::max_abs_diff;
use crate::poly::{
    binomial_score_relation, derive, face_product, model_tangent_system, parse_polynomial,
    relation_residual, Indeterminate, Monomial, RationalPolynomial, VarNames,
};
use crate::simplex::{center, contrast_basis, BundleElement, ContrastVector, ProbabilityVector, SampleSpace};
use crate::transport::{duality_gap, e_transport, exp_geodesic_point, kl, m_transport, ExpGeodesic};
use crate::zoo::{
    self, entropy_curve, independence_curve, marginal_homogeneity_path, non_independent_curve,
    GibbsSpec, MarginalPath,
};

pub const CHECK_IDS: [&str; 10] = [
    "score-identity",
    "entropy-compensation",
    "gibbs-boundary",
    "geodesic",
    "transport",
    "natural-gradient",
    "cramer-rao",
    "entropy-flow",
    "algebra",
    "relation-residuals",
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    Exactly(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Metric {
    pub label: String,
    pub value: f64,
    pub bound: Bound,
}

impl Metric {
    fn at_most(label: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            label: label.into(),
            value,
            bound: Bound::AtMost(bound),
        }
    }

    fn at_least(label: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            label: label.into(),
            value,
            bound: Bound::AtLeast(bound),
        }
    }

    fn exactly(label: impl Into<String>, value: f64, target: f64) -> Self {
        Self {
            label: label.into(),
            value,
            bound: Bound::Exactly(target),
        }
    }

    /// Pass/fail count as a metric that must be zero.
    fn failures(label: impl Into<String>, n: usize) -> Self {
        Self::exactly(label, n as f64, 0.0)
    }

    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::AtMost(b) => self.value <= b,
            Bound::AtLeast(b) => self.value >= b,
            Bound::Exactly(b) => self.value == b,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.bound {
            Bound::AtMost(b) => write!(f, "{} = {:.3e} (<= {:e})", self.label, self.value, b),
            Bound::AtLeast(b) => write!(f, "{} = {} (>= {})", self.label, self.value, b),
            Bound::Exactly(b) => write!(f, "{} = {} (== {})", self.label, self.value, b),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub id: &'static str,
    pub metrics: Vec<Metric>,
    pub error: Option<String>,
    pub elapsed: Duration,
    pub time_limit: Duration,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.error.is_none()
            && self.elapsed < self.time_limit
            && self.metrics.iter().all(Metric::passed)
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}:", if self.passed() { "PASS" } else { "FAIL" }, self.id)?;
        for m in &self.metrics {
            write!(f, " {m};")?;
        }
        if let Some(e) = &self.error {
            write!(f, " error: {e};")?;
        }
        write!(
            f,
            " time = {:.3} s (< {} s)",
            self.elapsed.as_secs_f64(),
            self.time_limit.as_secs_f64()
        )
    }
}

/// Runs one check; the seed drives every random draw.
pub fn run_check(id: &str, seed: u64) -> Result<CheckResult> {
    let index = CHECK_IDS
        .iter()
        .position(|&c| c == id)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown check {id:?}")))?;
    let (check, limit): (fn(&mut ChaCha8Rng) -> Result<Vec<Metric>>, u64) = match index {
        0 => (score_identity, 1),
        1 => (entropy_compensation, 1),
        2 => (gibbs_boundary, 1),
        3 => (geodesic, 5),
        4 => (transport_laws, 2),
        5 => (natural_gradient_identity, 5),
        6 => (cramer_rao, 2),
        7 => (entropy_flow, 1),
        8 => (algebra, 5),
        _ => (relation_residuals, 2),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64));
    let start = Instant::now();
    let outcome = check(&mut rng);
    let elapsed = start.elapsed();
    let (metrics, error) = match outcome {
        Ok(m) => (m, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    Ok(CheckResult {
        id: CHECK_IDS[index],
        metrics,
        error,
        elapsed,
        time_limit: Duration::from_secs(limit),
    })
}

/// Runs every check, or only `only` when given.
pub fn run_all(seed: u64, only: Option<&str>) -> Result<Vec<CheckResult>> {
    match only {
        Some(id) => Ok(vec![run_check(id, seed)?]),
        None => CHECK_IDS.iter().map(|id| run_check(id, seed)).collect(),
    }
}

fn score_identity(_: &mut ChaCha8Rng) -> Result<Vec<Metric>> {
    let mut worst_product = 0.0_f64;
    let mut worst_mean = 0.0_f64;
    for z in zoo::all() {
        for t in z.interior_grid(200) {
            let r = score(&z.curve, t)?;
            let s_gamma: Vec<f64> = r
                .values()
                .iter()
                .zip(r.base.weights())
                .map(|(s, w)| s * w)
                .collect();
            worst_product = worst_product.max(max_abs_diff(&r.velocity, &s_gamma));
            worst_mean = worst_mean.max(r.base.expect(r.values()).abs());
        }
    }
    Ok(vec![
        Metric::at_most("max|v - s*p|", worst_product, 1e-8),
        Metric::at_most("max|E s|", worst_mean, 1e-8),
    ])
}

/// `-dH/dt = log t + 2(t - ½) log (t - ½)² - 2t log(¾ - t²)`.
fn entropy3_production_closed_form(t: f64) -> f64 {
    let a = t - 0.5;
    -(t.ln() + 2.0 * a * (a * a).ln() - 2.0 * t * (0.75 - t * t).ln())
}

fn entropy_compensation(_: &mut ChaCha8Rng) -> Result<Vec<Metric>> {
    let c = entropy_curve();
    let at_half = entropy_production(&c, 0.5)?.abs();
    let mut worst = 0.0_f64;
    for t in [0.15, 0.3, 0.45, 0.6, 0.75] {
        worst = worst.max((entropy_production(&c, t)? - entropy3_production_closed_form(t)).abs());
    }
    Ok(vec![
        Metric::at_most("|dH/dt(1/2)|", at_half, 1e-9),
        Metric::at_most("max|dH/dt - closed form|", worst, 1e-9),
    ])
}

fn gibbs_boundary(_: &mut ChaCha8Rng) -> Result<Vec<Metric>> {
    let spec = GibbsSpec::default();
    let curve = zoo::gibbs_curve(&spec);
    let at0 = curve.point(0.0)?;
    let exact = usize::from(at0.weights() != [0.5, 0.5, 0.0]);
    let mut contact_violations = 0;
    for beta in [0.1, 0.2, 0.3] {
        if curve.point(beta)?.weight(2) > (-1.0 / (beta * beta)).exp() {
            contact_violations += 1;
        }
    }
    let top = curve.point(50.0)?.weight(2);
    let bottom = curve.point(-50.0)?.weight(0);
    Ok(vec![
        Metric::failures("gamma(0) != (1/2,1/2,0)", exact),
        Metric::failures("gamma3(b) > exp(-1/b^2)", contact_violations),
        Metric::at_least("gamma3(50)", top, 1.0 - 1e-8),
        Metric::at_least("gamma1(-50)", bottom, 1.0 - 1e-8),
    ])
}

fn random_point(rng: &mut ChaCha8Rng, d: usize, zero_prob: f64, min_support: usize) -> ProbabilityVector {
    let mut mask: Vec<bool> = (0..d).map(|_| !rng.gen_bool(zero_prob)).collect();
    let mut cells: Vec<usize> = (0..d).collect();
    cells.shuffle(rng);
    for &c in cells.iter().take(min_support) {
        mask[c] = true;
    }
    random_point_on(rng, &mask)
}

fn random_point_on(rng: &mut ChaCha8Rng, mask: &[bool]) -> ProbabilityVector {
    let raw: Vec<f64> = mask
        .iter()
        .map(|&m| if m { rng.gen_range(0.05..1.0) } else { 0.0 })
        .collect();
    let total: f64 = raw.iter().sum();
    let w: Vec<f64> = raw.iter().map(|x| x / total).collect();
    ProbabilityVector::from_weights(&w).expect("normalized")
}

fn random_fibre(rng: &mut ChaCha8Rng, p: &ProbabilityVector, scale: f64) -> BundleElement {
    let u: Vec<f64> = (0..p.dim()).map(|_| rng.gen_range(-scale..scale)).collect();
    center(&u, p).expect("length matches")
}

/// RK4 for `q̇ = (u - E_q u) q` on the support of `q(0)`, from 0 to `t`.
fn rk4_geodesic(base: &[f64], u: &[f64], t: f64, steps: usize) -> Vec<f64> {
    let rhs = |q: &[f64]| -> Vec<f64> {
        let mean: f64 = q.iter().zip(u).map(|(q, u)| q * u).sum();
        q.iter().zip(u).map(|(q, u)| (u - mean) * q).collect()
    };
    let h = t / steps as f64;
    let mut q = base.to_vec();
    let axpy = |q: &[f64], k: &[f64], a: f64| -> Vec<f64> {
        q.iter().zip(k).map(|(q, k)| q + a * k).collect()
    };
    for _ in 0..steps {
        let k1 = rhs(&q);
        let k2 = rhs(&axpy(&q, &k1, 0.5 * h));
        let k3 = rhs(&axpy(&q, &k2, 0.5 * h));
        let k4 = rhs(&axpy(&q, &k3, h));
        for i in 0..q.len() {
            q[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    q
}

fn geodesic(rng: &mut ChaCha8Rng) -> Result<Vec<Metric>> {
    let mut worst_point = 0.0_f64;
    let mut worst_psi = 0.0_f64;
    let mut defective = 0;
    for _ in 0..50 {
        let d = rng.gen_range(2..=6);
        let base = random_point(rng, d, 0.3, 2);
        if !base.is_interior() {
            defective += 1;
        }
        let u = random_fibre(rng, &base, 1.5);
        let geo = ExpGeodesic::new(u.clone());
        for k in -4i32..=4 {
            let t = 0.5 * k as f64;
            let closed = exp_geodesic_point(&geo, t);
            let oracle = if t == 0.0 {
                base.weights().to_vec()
            } else {
                rk4_geodesic(base.weights(), u.score(), t, 400 * k.unsigned_abs() as usize)
            };
            worst_point = worst_point.max(max_abs_diff(closed.weights(), &oracle));
            worst_psi = worst_psi.max((geo.psi(t) - kl(&base, &closed)?).abs());
        }
    }
    Ok(vec![
        Metric::at_most("max|q(t) - rk4|", worst_point, 1e-8),
        Metric::at_most("max|psi - KL|", worst_psi, 1e-10),
        Metric::at_least("defective bases", defective as f64, 1.0),
    ])
}

fn transport_laws(rng: &mut ChaCha8Rng) -> Result<Vec<Metric>> {
    let mut identity = 0.0_f64;
    let mut composition = 0.0_f64;
    let mut duality = 0.0_f64;
    for _ in 0..1000 {
        let d = rng.gen_range(2..=6);
        // supp p ⊆ supp q ⊆ supp r
        let r_mask: Vec<bool> = (0..d).map(|_| rng.gen_bool(0.85)).collect();
        let mut r_mask = r_mask;
        r_mask[rng.gen_range(0..d)] = true;
        let q_mask: Vec<bool> = r_mask.iter().map(|&m| m && rng.gen_bool(0.85)).collect();
        let p_mask: Vec<bool> = q_mask.iter().map(|&m| m && rng.gen_bool(0.85)).collect();
        let first = (0..d).find(|&x| r_mask[x]).expect("nonempty");
        let (mut q_mask, mut p_mask) = (q_mask, p_mask);
        q_mask[first] = true;
        p_mask[first] = true;
        let p = random_point_on(rng, &p_mask);
        let q = random_point_on(rng, &q_mask);
        let r = random_point_on(rng, &r_mask);
        let u = random_fibre(rng, &p, 2.0);
        let w = random_fibre(rng, &q, 2.0);
        let z = random_fibre(rng, &r, 2.0);

        identity = identity
            .max(max_abs_diff(e_transport(&p, &p, &u)?.score(), u.score()))
            .max(max_abs_diff(m_transport(&p, &p, &u)?.score(), u.score()));

        let m_two = m_transport(&q, &r, &m_transport(&p, &q, &u)?)?;
        let m_one = m_transport(&p, &r, &u)?;
        let e_two = e_transport(&q, &p, &e_transport(&r, &q, &z)?)?;
        let e_one = e_transport(&r, &p, &z)?;
        composition = composition
            .max(max_abs_diff(m_two.score(), m_one.score()))
            .max(max_abs_diff(e_two.score(), e_one.score()));

        duality = duality.max(duality_gap(&p, &q, &u, &w)?);
    }
    Ok(vec![
        Metric::at_most("identity gap", identity, 1e-10),
        Metric::at_most("composition gap", composition, 1e-10),
        Metric::at_most("duality gap", duality, 1e-10),
    ])
}

fn natural_gradient_identity(_: &mut ChaCha8Rng) -> Result<Vec<Metric>> {
    let mut worst = 0.0_f64;
    let mut cases = 0;
    for name in ["line", "entropy3", "mixture", "gibbs"] {
        let z = zoo::zoo_curve(name, None)?;
        let d = z.curve.space().dim();
        let g: Vec<f64> = [1.0, -2.0, 0.5, 3.0][..d].to_vec();
        for functional in [Functional::expectation(g), Functional::entropy()] {
            for t in z.interior_grid(25) {
                worst = worst.max(directional_derivative_check(&functional, &z.curve, t)?);
                cases += 1;
            }
        }
    }
    Ok(vec![
        Metric::at_most("max|dG/dt - <grad G, s>|", worst, 1e-6),
        Metric::exactly("cases", cases as f64, 200.0),
    ])
}

fn cramer_rao(rng: &mut ChaCha8Rng) -> Result<Vec<Metric>> {
    let (lhs, rhs) = cramer_rao_gap(&zoo::line_model(), &[1.0, 0.0, 0.0], 0.25)?;
    let curves = zoo::all();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let z = curves.choose(rng).expect("nonempty zoo");
        let (lo, hi) = z.interior;
        let t = lo + (hi - lo) * rng.gen_range(0.01..0.99);
        let g: Vec<f64> = (0..z.curve.space().dim())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let (l, r) = cramer_rao_gap(&z.curve, &g, t)?;
        worst = worst.max(l - r);
    }
    Ok(vec![
        Metric::exactly("line lhs", lhs, 1.0),
        Metric::exactly("line rhs", rhs, 3.0),
        Metric::at_most("max(lhs - rhs)", worst, 1e-10),
    ])
}

fn entropy_flow(_: &mut ChaCha8Rng) -> Result<Vec<Metric>> {
    let p0 = ProbabilityVector::from_weights(&[0.7, 0.3, 0.0])?;
    let traj = natural_gradient_flow(&Functional::entropy(), &p0, 0.5, 200, FlowDirection::Ascent)?;
    let dist = max_abs_diff(traj.last().point.weights(), &[0.5, 0.5, 0.0]);
    let support_changes = traj
        .points
        .iter()
        .filter(|pt| pt.point.support() != p0.support())
        .count();
    let decreases = traj
        .points
        .windows(2)
        .filter(|w| w[1].value < w[0].value)
        .count();
    Ok(vec![
        Metric::at_most("|p_final - (1/2,1/2,0)|", dist, 1e-6),
        Metric::failures("support changes", support_changes),
        Metric::failures("entropy decreases", decreases),
        Metric::failures("not converged", usize::from(!traj.converged)),
    ])
}

fn random_sparse_polynomial(rng: &mut ChaCha8Rng, d: usize) -> RationalPolynomial {
    let n_terms = rng.gen_range(1..=4);
    RationalPolynomial::from_terms((0..n_terms).map(|_| {
        let num: i64 = rng.gen_range(-9..=9);
        let den: i64 = rng.gen_range(1..=6);
        let powers: Vec<(Indeterminate, u32)> = (0..d)
            .filter_map(|x| {
                let e = rng.gen_range(0..=3u32);
                (e > 0 && rng.gen_bool(0.5)).then(|| (Indeterminate::p(x), e))
            })
            .collect();
        (
            BigRational::new(num.into(), den.into()),
            Monomial::from_powers(powers),
        )
    }))
}

fn algebra(rng: &mut ChaCha8Rng) -> Result<Vec<Metric>> {
    let mut golden_failures = 0;
    let mut expect = |ok: bool| golden_failures += usize::from(!ok);

    let table = SampleSpace::table2x2();
    let collapsed = SampleSpace::new(["11", "12", "22"])?;
    let indep = binomial_score_relation(&[1, 0, 0, 1], &[0, 1, 1, 0])?;
    expect(indep.display(&table).to_string() == "s11 - s12 - s21 + s22");
    let mh = binomial_score_relation(&[1, 0, 1], &[0, 2, 0])?;
    expect(mh.display(&collapsed).to_string() == "s11 - 2*s12 + s22");

    let xyz = VarNames::params(["x", "y", "z"]);
    let elementary = face_product(&contrast_basis(&table, &[0, 1, 2, 3])?, &["x", "y", "z"])?;
    expect(elementary.normalized == parse_polynomial("x*y*z*(x + y + z)", &xyz)?);
    let markov_basis = [
        [1.0, -1.0, 1.0, -1.0],
        [1.0, 1.0, -1.0, -1.0],
        [1.0, -1.0, -1.0, 1.0],
    ]
    .iter()
    .map(|v| ContrastVector::new(table.clone(), v.to_vec()))
    .collect::<Result<Vec<_>>>()?;
    let markov = face_product(&markov_basis, &["x", "y", "z"])?;
    expect(markov.normalized == parse_polynomial("(x+y+z)*(-x+y-z)*(x-y-z)*(-x-y+z)", &xyz)?);

    let three = SampleSpace::numbered(3)?;
    let names3 = VarNames::new(three.clone());
    let line = [
        parse_polynomial("p1 - p2", &names3)?,
        parse_polynomial("p3 + 2*p1 - 1", &names3)?,
    ];
    let system = model_tangent_system(&line, &three)?;
    expect(system.contains(&parse_polynomial("s1*p1 - s2*p2", &names3)?));
    expect(system.contains(&parse_polynomial("s3*p3 + 2*s1*p1", &names3)?));

    let mut leibniz_failures = 0;
    for _ in 0..500 {
        let d = rng.gen_range(1..=4);
        let f = random_sparse_polynomial(rng, d);
        let g = random_sparse_polynomial(rng, d);
        let lhs = derive(&(&f * &g))?;
        let rhs = &(&derive(&f)? * &g) + &(&f * &derive(&g)?);
        let linear = derive(&(&f + &g))? == &derive(&f)? + &derive(&g)?;
        leibniz_failures += usize::from(lhs != rhs || !linear);
    }
    Ok(vec![
        Metric::failures("golden mismatches", golden_failures),
        Metric::failures("Leibniz failures", leibniz_failures),
    ])
}

fn relation_residuals(rng: &mut ChaCha8Rng) -> Result<Vec<Metric>> {
    let indep_form = binomial_score_relation(&[1, 0, 0, 1], &[0, 1, 1, 0])?;
    let mh_form = binomial_score_relation(&[1, 0, 1], &[0, 2, 0])?;
    let mut worst = 0.0_f64;
    for z in zoo::all() {
        for form in &z.relations {
            worst = worst.max(relation_residual(form, &z.curve, &z.interior_grid(50))?);
        }
    }
    let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let random_path = |rng: &mut ChaCha8Rng| {
        let a = rng.gen_range(0.05..0.95);
        let b = rng.gen_range(0.05..0.95);
        MarginalPath::affine(a, b - a)
    };
    for _ in 0..20 {
        let c = independence_curve(random_path(rng), random_path(rng));
        worst = worst.max(relation_residual(&indep_form, &c, &grid)?);
        let m = marginal_homogeneity_path(random_path(rng));
        worst = worst.max(relation_residual(&mh_form, &m, &grid)?);
    }
    let control_grid: Vec<f64> = (1..=8).map(|i| i as f64 / 10.0).collect();
    let control = relation_residual(&indep_form, &non_independent_curve(), &control_grid)?;
    Ok(vec![
        Metric::at_most("max residual in varieties", worst, 1e-8),
        Metric::at_least("negative control residual", control, 1e-2),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_production_matches_at_a_generic_point() {
        let c = entropy_curve();
        let t = 0.37;
        let got = entropy_production(&c, t).unwrap();
        assert!((got - entropy3_production_closed_form(t)).abs() < 1e-12);
    }

    #[test]
    fn rk4_reproduces_a_known_exponential_family() {
        let base = [0.5, 0.5];
        let u = [1.0, -1.0];
        let q = rk4_geodesic(&base, &u, 1.0, 1000);
        let e = 2f64.exp();
        assert!(max_abs_diff(&q, &[e / (1.0 + e), 1.0 / (1.0 + e)]) < 1e-12);
    }

    #[test]
    fn unknown_check_is_rejected() {
        assert!(matches!(run_check("nope", 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn metrics_compare_against_their_bounds() {
        assert!(Metric::at_most("a", 1.0, 1.0).passed());
        assert!(!Metric::at_least("a", 0.5, 1.0).passed());
        assert!(Metric::failures("a", 0).passed());
        assert!(!Metric::failures("a", 2).passed());
    }
}
