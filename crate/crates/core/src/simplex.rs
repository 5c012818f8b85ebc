//! Points of the closed simplex, contrasts and the statistical bundle.
//!
//! Every numeric vector is indexed by the order of its [`SampleSpace`]. A
//! [`ProbabilityVector`] may sit on the boundary; its support is recomputed
//! from the weights on every query. A [`BundleElement`] is a pair `(p, u)`
//! with `E_p[u] = 0`, stored in canonical form: `u` is zero off `supp p`, so
//! two scores that agree on the support compare equal.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute threshold below which a weight is treated as zero.
pub const SUPPORT_TOL: f64 = 1e-12;
/// Tolerance on `|Σ p - 1|` and on zero-sum / zero-mean checks.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Finite, ordered set of outcome labels.
#[derive(Clone, PartialEq, Eq)]
pub struct SampleSpace {
    labels: Arc<[String]>,
}

impl SampleSpace {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptySpace);
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(Self {
            labels: labels.into(),
        })
    }

    /// Labels `"1"`, `"2"`, ..., `"d"`.
    pub fn numbered(d: usize) -> Result<Self> {
        Self::new((1..=d).map(|i| i.to_string()))
    }

    /// The four cells `11, 12, 21, 22` of a 2x2 contingency table.
    pub fn table2x2() -> Self {
        Self::new(["11", "12", "21", "22"]).expect("static labels")
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, cell: usize) -> &str {
        &self.labels[cell]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                got: len,
            });
        }
        Ok(())
    }
}

impl fmt::Debug for SampleSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.labels.iter()).finish()
    }
}

/// 0/1 indicator of a subset of the sample space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportIndicator {
    mask: Vec<bool>,
}

impl SupportIndicator {
    pub fn from_mask(mask: Vec<bool>) -> Self {
        Self { mask }
    }

    pub fn contains(&self, cell: usize) -> bool {
        self.mask[cell]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn is_subset_of(&self, other: &SupportIndicator) -> bool {
        self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }

    /// Mask as a string of `0`/`1` characters, e.g. `"101"`.
    pub fn to_bits(&self) -> String {
        self.mask.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }
}

/// A point of the closed simplex `Δ(Ω)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityVector {
    space: SampleSpace,
    weights: Vec<f64>,
    support_tol: f64,
}

impl ProbabilityVector {
    /// Validates with the default tolerances.
    pub fn new(space: SampleSpace, weights: Vec<f64>) -> Result<Self> {
        make_distribution(&space, &weights, NORMALIZATION_TOL)
    }

    /// Convenience for numbered spaces `1..=d`.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let space = SampleSpace::numbered(weights.len())?;
        make_distribution(&space, weights, NORMALIZATION_TOL)
    }

    pub fn uniform(space: SampleSpace) -> Self {
        let d = space.dim();
        Self {
            space,
            weights: vec![1.0 / d as f64; d],
            support_tol: SUPPORT_TOL,
        }
    }

    /// Replaces the support threshold; weights are unchanged.
    pub fn with_support_tol(mut self, support_tol: f64) -> Self {
        self.support_tol = support_tol.max(0.0);
        self
    }

    pub fn space(&self) -> &SampleSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, cell: usize) -> f64 {
        self.weights[cell]
    }

    pub fn support_tol(&self) -> f64 {
        self.support_tol
    }

    pub fn in_support(&self, cell: usize) -> bool {
        self.weights[cell] > self.support_tol
    }

    pub fn support(&self) -> SupportIndicator {
        SupportIndicator::from_mask((0..self.dim()).map(|i| self.in_support(i)).collect())
    }

    pub fn support_size(&self) -> usize {
        (0..self.dim()).filter(|&i| self.in_support(i)).count()
    }

    pub fn is_vertex(&self) -> bool {
        self.support_size() == 1
    }

    pub fn is_interior(&self) -> bool {
        self.support_size() == self.dim()
    }

    /// `E_p[u]`, summed over the support only.
    pub fn expect(&self, u: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(u)
            .enumerate()
            .filter(|(i, _)| self.in_support(*i))
            .map(|(_, (p, u))| p * u)
            .sum()
    }

    /// `Var_p(u)` over the support.
    pub fn variance(&self, u: &[f64]) -> f64 {
        let mean = self.expect(u);
        let centered: Vec<f64> = u.iter().map(|x| x - mean).collect();
        self.expect(&centered.iter().map(|x| x * x).collect::<Vec<_>>())
    }

    /// `true` when both points live on the same space and their weights agree to `1e-12`.
    pub fn same_point(&self, other: &ProbabilityVector) -> bool {
        self.space == other.space
            && self.support() == other.support()
            && self
                .weights
                .iter()
                .zip(&other.weights)
                .all(|(a, b)| (a - b).abs() <= 1e-12)
    }

    pub fn to_record(&self) -> DistributionRecord {
        DistributionRecord {
            labels: self.space.labels().to_vec(),
            weights: self.weights.clone(),
        }
    }

    pub fn from_record(record: &DistributionRecord) -> Result<Self> {
        let space = SampleSpace::new(record.labels.iter().cloned())?;
        make_distribution(&space, &record.weights, NORMALIZATION_TOL)
    }
}

/// JSON shape shared by every module: `{"labels": [...], "weights": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionRecord {
    pub labels: Vec<String>,
    pub weights: Vec<f64>,
}

/// Validates `weights` as a point of the closed simplex.
///
/// Weights in `[-tol, 0)` are clamped to zero and the vector is renormalized,
/// so evaluators with small negative round-off still land on the simplex.
pub fn make_distribution(space: &SampleSpace, weights: &[f64], tol: f64) -> Result<ProbabilityVector> {
    space.check_len(weights.len())?;
    let mut w = Vec::with_capacity(weights.len());
    for (cell, &x) in weights.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::NonFinite { cell });
        }
        if x < -tol {
            return Err(Error::NegativeWeight { cell, value: x });
        }
        w.push(x.max(0.0));
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(Error::NotNormalized { sum });
    }
    if sum != 1.0 {
        w.iter_mut().for_each(|x| *x /= sum);
    }
    Ok(ProbabilityVector {
        space: space.clone(),
        weights: w,
        support_tol: SUPPORT_TOL,
    })
}

/// A zero-sum vector of `C(Ω)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContrastVector {
    space: SampleSpace,
    values: Vec<f64>,
}

impl ContrastVector {
    pub fn new(space: SampleSpace, values: Vec<f64>) -> Result<Self> {
        space.check_len(values.len())?;
        let sum: f64 = values.iter().sum();
        let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        if sum.abs() > NORMALIZATION_TOL * scale {
            return Err(Error::NotContrast { sum });
        }
        Ok(Self { space, values })
    }

    pub fn space(&self) -> &SampleSpace {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// An element `(p, u)` of the statistical bundle, canonical off `supp p`.
#[derive(Clone, Debug, PartialEq)]
pub struct BundleElement {
    base: ProbabilityVector,
    score: Vec<f64>,
}

impl BundleElement {
    /// Checks `E_p[u] = 0` and zeroes `u` off the support.
    pub fn new(base: ProbabilityVector, mut score: Vec<f64>) -> Result<Self> {
        base.space.check_len(score.len())?;
        for (cell, s) in score.iter_mut().enumerate() {
            if !base.in_support(cell) {
                *s = 0.0;
            } else if !s.is_finite() {
                return Err(Error::NonFinite { cell });
            }
        }
        let mean = base.expect(&score);
        let scale = score.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        if mean.abs() > NORMALIZATION_TOL * scale {
            return Err(Error::NotCentered { mean });
        }
        Ok(Self { base, score })
    }

    pub fn zero(base: ProbabilityVector) -> Self {
        let d = base.dim();
        Self {
            base,
            score: vec![0.0; d],
        }
    }

    /// Skips the centering check; the caller guarantees the invariant.
    pub(crate) fn from_parts(base: ProbabilityVector, mut score: Vec<f64>) -> Self {
        for (cell, s) in score.iter_mut().enumerate() {
            if !base.in_support(cell) {
                *s = 0.0;
            }
        }
        Self { base, score }
    }

    pub fn base(&self) -> &ProbabilityVector {
        &self.base
    }

    pub fn score(&self) -> &[f64] {
        &self.score
    }

    pub fn into_score(self) -> Vec<f64> {
        self.score
    }

    /// Fibre norm `⟨u, u⟩_p^{1/2}`.
    pub fn norm(&self) -> f64 {
        self.base
            .expect(&self.score.iter().map(|x| x * x).collect::<Vec<_>>())
            .sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            base: self.base.clone(),
            score: self.score.iter().map(|x| factor * x).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.score.iter().all(|&x| x == 0.0)
    }
}

/// Centers `u` at `p` and zeroes it off `supp p`.
///
/// Values of `u` off the support are ignored, so they may be infinite.
pub fn center(u: &[f64], p: &ProbabilityVector) -> Result<BundleElement> {
    p.space.check_len(u.len())?;
    let mean = p.expect(u);
    let score = (0..p.dim())
        .map(|i| if p.in_support(i) { u[i] - mean } else { 0.0 })
        .collect();
    Ok(BundleElement {
        base: p.clone(),
        score,
    })
}

/// Covariance pairing `⟨u, v⟩_p = Σ p(x) u(x) v(x)` on the fibre at `p`.
pub fn inner_product(p: &ProbabilityVector, u: &BundleElement, v: &BundleElement) -> Result<f64> {
    if !u.base.same_point(p) || !v.base.same_point(p) {
        return Err(Error::BaseMismatch);
    }
    Ok(p
        .support()
        .cells()
        .map(|i| p.weights[i] * u.score[i] * v.score[i])
        .sum())
}

/// Basis `{e_{x0} - e_y : y ∈ I, y ≠ x0}` of the contrasts supported on `I`,
/// where `x0` is the first cell of `I` in space order.
pub fn contrast_basis(space: &SampleSpace, subset: &[usize]) -> Result<Vec<ContrastVector>> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let d = space.dim();
    let mut cells: Vec<usize> = subset.to_vec();
    if let Some(&bad) = cells.iter().find(|&&c| c >= d) {
        return Err(Error::LengthMismatch {
            expected: d,
            got: bad + 1,
        });
    }
    cells.sort_unstable();
    cells.dedup();
    let first = cells[0];
    Ok(cells[1..]
        .iter()
        .map(|&y| {
            let mut v = vec![0.0; d];
            v[first] = 1.0;
            v[y] = -1.0;
            ContrastVector {
                space: space.clone(),
                values: v,
            }
        })
        .collect())
}

/// Same as [`contrast_basis`], with the subset given by labels.
pub fn contrast_basis_by_labels(space: &SampleSpace, labels: &[&str]) -> Result<Vec<ContrastVector>> {
    let cells = labels
        .iter()
        .map(|l| space.index_of(l))
        .collect::<Result<Vec<_>>>()?;
    contrast_basis(space, &cells)
}

/// Whether `v` is a velocity at `p`: zero-sum with `supp v ⊆ supp p`.
pub fn tangent_membership(p: &ProbabilityVector, v: &[f64]) -> bool {
    if v.len() != p.dim() {
        return false;
    }
    let sum: f64 = v.iter().sum();
    if sum.abs() > NORMALIZATION_TOL {
        return false;
    }
    (0..p.dim()).all(|i| p.in_support(i) || v[i].abs() <= NORMALIZATION_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space3() -> SampleSpace {
        SampleSpace::numbered(3).unwrap()
    }

    #[test]
    fn distributions_validate() {
        let p = make_distribution(&space3(), &[0.25, 0.25, 0.5], 1e-9).unwrap();
        assert_eq!(p.support().to_bits(), "111");
        let v = make_distribution(&space3(), &[1.0, 0.0, 0.0], 1e-9).unwrap();
        assert!(v.is_vertex());
        assert_eq!(v.support().to_bits(), "100");
        let two = SampleSpace::numbered(2).unwrap();
        assert!(matches!(
            make_distribution(&two, &[0.6, 0.6], 1e-9),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn tiny_negatives_are_clamped() {
        let p = make_distribution(&space3(), &[0.5 + 5e-11, 0.5, -5e-11], 1e-9).unwrap();
        assert_eq!(p.weight(2), 0.0);
        assert!((p.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(matches!(
            make_distribution(&space3(), &[0.6, 0.5, -0.1], 1e-9),
            Err(Error::NegativeWeight { cell: 2, .. })
        ));
    }

    #[test]
    fn duplicate_labels_rejected() {
        assert!(matches!(
            SampleSpace::new(["a", "b", "a"]),
            Err(Error::DuplicateLabel(_))
        ));
        assert_eq!(SampleSpace::new(Vec::<String>::new()), Err(Error::EmptySpace));
    }

    #[test]
    fn centering_examples() {
        let p = ProbabilityVector::from_weights(&[0.2, 0.3, 0.5]).unwrap();
        assert!(center(&[1.0, 1.0, 1.0], &p).unwrap().is_zero());

        let p = ProbabilityVector::from_weights(&[0.5, 0.5, 0.0]).unwrap();
        assert_eq!(center(&[1.0, -1.0, 5.0], &p).unwrap().score(), &[1.0, -1.0, 0.0]);

        let p = ProbabilityVector::from_weights(&[0.5, 0.25, 0.25]).unwrap();
        assert_eq!(center(&[1.0, 0.0, 0.0], &p).unwrap().score(), &[0.5, -0.5, -0.5]);
    }

    #[test]
    fn centering_ignores_off_support_infinities() {
        let p = ProbabilityVector::from_weights(&[0.5, 0.5, 0.0]).unwrap();
        let u = center(&[1.0, 2.0, f64::INFINITY], &p).unwrap();
        assert_eq!(u.score(), &[-0.5, 0.5, 0.0]);
    }

    #[test]
    fn inner_product_examples() {
        let p = ProbabilityVector::from_weights(&[0.5, 0.5]).unwrap();
        let u = BundleElement::new(p.clone(), vec![1.0, -1.0]).unwrap();
        assert_eq!(inner_product(&p, &u, &u).unwrap(), 1.0);
        let z = BundleElement::zero(p.clone());
        assert_eq!(inner_product(&p, &z, &u).unwrap(), 0.0);

        let p3 = ProbabilityVector::from_weights(&[0.5, 0.5, 0.0]).unwrap();
        let w = BundleElement::new(p3.clone(), vec![1.0, -1.0, 0.0]).unwrap();
        assert_eq!(inner_product(&p3, &w, &w).unwrap(), 1.0);
    }

    #[test]
    fn inner_product_base_mismatch() {
        let p = ProbabilityVector::from_weights(&[0.5, 0.5]).unwrap();
        let q = ProbabilityVector::from_weights(&[0.75, 0.25]).unwrap();
        let u = BundleElement::new(p.clone(), vec![1.0, -1.0]).unwrap();
        let v = center(&[1.0, -1.0], &q).unwrap();
        assert_eq!(inner_product(&p, &u, &v), Err(Error::BaseMismatch));
    }

    #[test]
    fn bundle_element_rejects_uncentered() {
        let p = ProbabilityVector::from_weights(&[0.5, 0.5]).unwrap();
        assert!(matches!(
            BundleElement::new(p, vec![1.0, 0.0]),
            Err(Error::NotCentered { .. })
        ));
    }

    #[test]
    fn bundle_element_canonicalizes_off_support() {
        let p = ProbabilityVector::from_weights(&[0.5, 0.5, 0.0]).unwrap();
        let a = BundleElement::new(p.clone(), vec![1.0, -1.0, 7.0]).unwrap();
        let b = BundleElement::new(p, vec![1.0, -1.0, -3.0]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn contrast_basis_of_2x2_table() {
        let space = SampleSpace::table2x2();
        let basis = contrast_basis(&space, &[0, 1, 2, 3]).unwrap();
        let got: Vec<&[f64]> = basis.iter().map(|c| c.values()).collect();
        assert_eq!(
            got,
            vec![
                &[1.0, -1.0, 0.0, 0.0][..],
                &[1.0, 0.0, -1.0, 0.0][..],
                &[1.0, 0.0, 0.0, -1.0][..],
            ]
        );
    }

    #[test]
    fn contrast_basis_edge_cases() {
        let space = space3();
        assert!(contrast_basis(&space, &[1]).unwrap().is_empty());
        let pair = contrast_basis_by_labels(&space, &["2", "3"]).unwrap();
        assert_eq!(pair.len(), 1);
        assert_eq!(pair[0].values(), &[0.0, 1.0, -1.0]);
        assert_eq!(contrast_basis(&space, &[]), Err(Error::EmptySubset));
    }

    #[test]
    fn tangent_membership_examples() {
        let p = ProbabilityVector::from_weights(&[0.5, 0.5, 0.0]).unwrap();
        assert!(tangent_membership(&p, &[1.0, -1.0, 0.0]));
        assert!(!tangent_membership(&p, &[1.0, 1.0, -2.0]));

        let vertex = ProbabilityVector::from_weights(&[0.0, 1.0, 0.0]).unwrap();
        assert!(tangent_membership(&vertex, &[0.0, 0.0, 0.0]));
        assert!(!tangent_membership(&vertex, &[1.0, -1.0, 0.0]));
        assert!(!tangent_membership(&vertex, &[0.0, 1.0, -1.0]));
    }

    #[test]
    fn json_record_round_trip() {
        let json = r#"{"labels": ["a", "b", "c"], "weights": [0.25, 0.25, 0.5]}"#;
        let record: DistributionRecord = serde_json::from_str(json).unwrap();
        let p = ProbabilityVector::from_record(&record).unwrap();
        assert_eq!(p.space().label(2), "c");
        assert_eq!(p.to_record(), record);
    }
}
