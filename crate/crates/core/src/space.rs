//! Finite metric spaces as labeled square distance matrices.
//!
//! A [`FinMetricSpace`] is an ordered list of distinct labels plus a
//! row-major matrix of non-negative distances. Construction enforces
//! shape, label distinctness, and non-negativity only; whether the matrix
//! actually satisfies the metric axioms is reported by
//! [`FinMetricSpace::validate`], so broken matrices can be loaded,
//! inspected, and fault-injected in tests.
//!
//! Subsets of the space are passed around as index slices; callers working
//! with labels convert through [`FinMetricSpace::subset_from_labels`].

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::num::{le_slack, rel_eq};

#[derive(Debug, Clone, PartialEq)]
pub struct FinMetricSpace {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    dist: Vec<f64>,
    n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    NonzeroDiagonal,
    Asymmetry,
    NonpositiveOffDiagonal,
    Triangle,
    StrongTriangle,
}

/// The most violated axiom instance found by [`FinMetricSpace::validate`].
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub points: Vec<String>,
    pub slack: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub is_metric: bool,
    pub is_ultrametric: bool,
    pub worst_violation: Option<Violation>,
}

/// Closed, open, and exterior neighborhoods of a subset at one radius:
/// points with set-distance `<= eps`, `< eps`, and `>= eps` respectively.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhoods {
    pub closed: Vec<usize>,
    pub open: Vec<usize>,
    pub exterior: Vec<usize>,
}

/// Separation and density of a subset at given thresholds.
#[derive(Debug, Clone, Serialize)]
pub struct SeparationReport {
    pub is_h_separated: bool,
    pub is_eta_dense: bool,
    /// Minimum pairwise distance within the subset; `None` for singletons.
    pub min_pair_distance: Option<f64>,
    /// Largest set-distance of any point to the subset.
    pub covering_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductNorm {
    L1,
    Linf,
}

impl FinMetricSpace {
    pub fn new(labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if rows.len() != n {
            return Err(Error::structural(format!(
                "matrix has {} rows, expected {}",
                rows.len(),
                n
            )));
        }
        let mut dist = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::structural(format!(
                    "row {} has {} entries, expected {}",
                    i,
                    row.len(),
                    n
                )));
            }
            dist.extend_from_slice(row);
        }
        Self::from_flat(labels, dist)
    }

    pub fn from_flat(labels: Vec<String>, dist: Vec<f64>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::structural("label list is empty"));
        }
        if dist.len() != n * n {
            return Err(Error::structural(format!(
                "matrix has {} entries, expected {}",
                dist.len(),
                n * n
            )));
        }
        for (k, &x) in dist.iter().enumerate() {
            if !x.is_finite() || x < 0.0 {
                return Err(Error::structural(format!(
                    "row {} column {}: entry {} is not a finite non-negative number",
                    k / n,
                    k % n,
                    x
                )));
            }
        }
        let mut index = HashMap::with_capacity(n);
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::structural(format!("duplicate label {l:?}")));
            }
        }
        Ok(Self {
            labels,
            index,
            dist,
            n,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| self.dist[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    pub fn flat(&self) -> &[f64] {
        &self.dist
    }

    /// Same matrix under a fresh label sequence of equal length.
    pub fn with_labels(&self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::structural(format!(
                "relabeling needs {} labels, got {}",
                self.n,
                labels.len()
            )));
        }
        Self::from_flat(labels, self.dist.clone())
    }

    /// Induced subspace on the given indices, labels in subset order.
    pub fn restrict(&self, subset: &[usize]) -> Result<Self> {
        let subset = self.check_subset(subset)?;
        let labels = subset.iter().map(|&i| self.labels[i].clone()).collect();
        let mut dist = Vec::with_capacity(subset.len() * subset.len());
        for &i in &subset {
            for &j in &subset {
                dist.push(self.get(i, j));
            }
        }
        Self::from_flat(labels, dist)
    }

    pub fn subset_from_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len());
        for l in labels {
            match self.index_of(l.as_ref()) {
                Some(i) => out.push(i),
                None => {
                    return Err(Error::structural(format!(
                        "unknown label {:?}",
                        l.as_ref()
                    )))
                }
            }
        }
        self.check_subset(&out)
    }

    /// Sorted, deduplicated, in-range, non-empty subset indices.
    pub fn check_subset(&self, subset: &[usize]) -> Result<Vec<usize>> {
        if subset.is_empty() {
            return Err(Error::domain("subset is empty"));
        }
        let mut s = subset.to_vec();
        s.sort_unstable();
        s.dedup();
        if let Some(&bad) = s.iter().find(|&&i| i >= self.n) {
            return Err(Error::structural(format!(
                "subset index {bad} out of range for {} points",
                self.n
            )));
        }
        Ok(s)
    }

    pub fn complement(&self, subset: &[usize]) -> Vec<usize> {
        let mut inside = vec![false; self.n];
        for &i in subset {
            inside[i] = true;
        }
        (0..self.n).filter(|&i| !inside[i]).collect()
    }

    /// Distance from point `x` to the subset: the minimum over its members.
    /// Zero exactly when `x` belongs to the subset (for metric inputs).
    pub fn dist_to_set(&self, subset: &[usize], x: usize) -> Result<f64> {
        let subset = self.check_subset(subset)?;
        Ok(self.dist_to_set_unchecked(&subset, x))
    }

    fn dist_to_set_unchecked(&self, subset: &[usize], x: usize) -> f64 {
        subset
            .iter()
            .map(|&a| self.get(x, a))
            .fold(f64::INFINITY, f64::min)
    }

    /// Set-distance of every point at once.
    pub fn dist_to_set_all(&self, subset: &[usize]) -> Result<Vec<f64>> {
        let subset = self.check_subset(subset)?;
        Ok((0..self.n)
            .map(|x| self.dist_to_set_unchecked(&subset, x))
            .collect())
    }

    /// Closed/open/exterior neighborhoods of a subset at radius `eps`.
    pub fn set_neighborhoods(&self, subset: &[usize], eps: f64) -> Result<Neighborhoods> {
        if !(eps > 0.0) {
            return Err(Error::domain(format!("radius must be positive, got {eps}")));
        }
        let rho = self.dist_to_set_all(subset)?;
        let mut out = Neighborhoods {
            closed: Vec::new(),
            open: Vec::new(),
            exterior: Vec::new(),
        };
        for (i, &r) in rho.iter().enumerate() {
            if r <= eps {
                out.closed.push(i);
            }
            if r < eps {
                out.open.push(i);
            } else {
                out.exterior.push(i);
            }
        }
        Ok(out)
    }

    /// Pairwise separation of a subset at threshold `h` and density of the
    /// subset in the whole space at threshold `eta`.
    pub fn separated_and_dense(
        &self,
        subset: &[usize],
        h: f64,
        eta: f64,
    ) -> Result<SeparationReport> {
        let subset = self.check_subset(subset)?;
        let mut min_pair = None;
        for (k, &a) in subset.iter().enumerate() {
            for &b in &subset[k + 1..] {
                let d = self.get(a, b);
                min_pair = Some(min_pair.map_or(d, |m: f64| m.min(d)));
            }
        }
        let covering_radius = self
            .dist_to_set_all(&subset)?
            .into_iter()
            .fold(0.0f64, f64::max);
        Ok(SeparationReport {
            is_h_separated: min_pair.map_or(true, |m| m >= h),
            is_eta_dense: covering_radius <= eta,
            min_pair_distance: min_pair,
            covering_radius,
        })
    }

    /// Distinct positive distances, ascending. Deduplication is exact.
    pub fn distance_spectrum(&self) -> Vec<f64> {
        let mut vals: Vec<f64> = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                let d = self.get(i, j);
                if d > 0.0 {
                    vals.push(d);
                }
            }
        }
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals.dedup();
        vals
    }

    pub fn diameter(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.n {
            for j in i + 1..self.n {
                m = m.max(self.get(i, j));
            }
        }
        m
    }

    pub fn min_positive_distance(&self) -> Option<f64> {
        self.distance_spectrum().first().copied()
    }

    /// Checks the metric axioms and the strong triangle inequality, all at
    /// the global relative tolerance, and reports the worst offender.
    pub fn validate(&self) -> ValidationReport {
        let mut worst_metric: Option<Violation> = None;
        let mut worst_ultra: Option<Violation> = None;

        let consider = |dst: &mut Option<Violation>, v: Violation| {
            if dst.as_ref().map_or(true, |w| v.slack > w.slack) {
                *dst = Some(v);
            }
        };

        for i in 0..self.n {
            let d = self.get(i, i);
            if d != 0.0 {
                consider(
                    &mut worst_metric,
                    Violation {
                        kind: ViolationKind::NonzeroDiagonal,
                        points: vec![self.labels[i].clone()],
                        slack: d.abs(),
                    },
                );
            }
        }
        for i in 0..self.n {
            for j in i + 1..self.n {
                let a = self.get(i, j);
                let b = self.get(j, i);
                if !rel_eq(a, b) {
                    consider(
                        &mut worst_metric,
                        Violation {
                            kind: ViolationKind::Asymmetry,
                            points: vec![self.labels[i].clone(), self.labels[j].clone()],
                            slack: (a - b).abs(),
                        },
                    );
                }
                if a <= 0.0 || b <= 0.0 {
                    consider(
                        &mut worst_metric,
                        Violation {
                            kind: ViolationKind::NonpositiveOffDiagonal,
                            points: vec![self.labels[i].clone(), self.labels[j].clone()],
                            slack: -a.min(b),
                        },
                    );
                }
            }
        }
        for k in 0..self.n {
            for i in 0..self.n {
                if i == k {
                    continue;
                }
                let dik = self.get(i, k);
                for j in 0..self.n {
                    if j == k || j == i {
                        continue;
                    }
                    let lhs = self.get(i, j);
                    let dkj = self.get(k, j);
                    let tri = le_slack(lhs, dik + dkj);
                    if tri > 0.0 {
                        consider(
                            &mut worst_metric,
                            Violation {
                                kind: ViolationKind::Triangle,
                                points: vec![
                                    self.labels[i].clone(),
                                    self.labels[j].clone(),
                                    self.labels[k].clone(),
                                ],
                                slack: tri,
                            },
                        );
                    }
                    let strong = le_slack(lhs, dik.max(dkj));
                    if strong > 0.0 {
                        consider(
                            &mut worst_ultra,
                            Violation {
                                kind: ViolationKind::StrongTriangle,
                                points: vec![
                                    self.labels[i].clone(),
                                    self.labels[j].clone(),
                                    self.labels[k].clone(),
                                ],
                                slack: strong,
                            },
                        );
                    }
                }
            }
        }

        let is_metric = worst_metric.is_none();
        let is_ultrametric = is_metric && worst_ultra.is_none();
        ValidationReport {
            is_metric,
            is_ultrametric,
            worst_violation: worst_metric.or(worst_ultra),
        }
    }

    /// Label sequences equal and all entries equal up to relative tolerance.
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.labels == other.labels
            && self
                .dist
                .iter()
                .zip(other.dist.iter())
                .all(|(&a, &b)| rel_eq(a, b))
    }

    /// Bitwise matrix equality under equal label sequences.
    pub fn matrix_eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.dist == other.dist
    }
}

/// L1 or sup product of two spaces on the pair labels `(a,b)`.
///
/// The sup product of two ultrametrics is again an ultrametric; the L1
/// product in general is not.
pub fn product_metric(
    a: &FinMetricSpace,
    b: &FinMetricSpace,
    norm: ProductNorm,
) -> Result<FinMetricSpace> {
    let (na, nb) = (a.len(), b.len());
    let n = na
        .checked_mul(nb)
        .filter(|&n| n <= 2048)
        .ok_or_else(|| Error::capacity(format!("product of {na} x {nb} points is too large")))?;
    let mut labels = Vec::with_capacity(n);
    for x in a.labels() {
        for y in b.labels() {
            labels.push(format!("({x},{y})"));
        }
    }
    let mut dist = vec![0.0; n * n];
    for i in 0..na {
        for j in 0..nb {
            let p = i * nb + j;
            for k in 0..na {
                let da = a.get(i, k);
                for l in 0..nb {
                    let q = k * nb + l;
                    let db = b.get(j, l);
                    dist[p * n + q] = match norm {
                        ProductNorm::L1 => da + db,
                        ProductNorm::Linf => da.max(db),
                    };
                }
            }
        }
    }
    FinMetricSpace::from_flat(labels, dist)
}

/// Pointwise maximum of two metrics on the same label sequence.
pub fn join_metrics(a: &FinMetricSpace, b: &FinMetricSpace) -> Result<FinMetricSpace> {
    if a.labels() != b.labels() {
        return Err(Error::structural("join requires identical label sequences"));
    }
    let dist = a
        .flat()
        .iter()
        .zip(b.flat().iter())
        .map(|(&x, &y)| x.max(y))
        .collect();
    FinMetricSpace::from_flat(a.labels().to_vec(), dist)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn space(labels: &[&str], rows: &[&[f64]]) -> FinMetricSpace {
        FinMetricSpace::new(
            labels.iter().map(|s| s.to_string()).collect(),
            rows.iter().map(|r| r.to_vec()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn two_point_metric_is_ultra() {
        let m = space(&["a", "b"], &[&[0.0, 1.0], &[1.0, 0.0]]);
        let r = m.validate();
        assert!(r.is_metric && r.is_ultrametric);
        assert!(r.worst_violation.is_none());
    }

    #[test]
    fn triangle_violation_reported() {
        // d(a,b)=1, d(a,c)=1, d(b,c)=3 breaks 1 + 1 >= 3
        let m = space(
            &["a", "b", "c"],
            &[&[0.0, 1.0, 1.0], &[1.0, 0.0, 3.0], &[1.0, 3.0, 0.0]],
        );
        let r = m.validate();
        assert!(!r.is_metric);
        let v = r.worst_violation.unwrap();
        assert_eq!(v.kind, ViolationKind::Triangle);
        assert!((v.slack - 1.0).abs() < 1e-6);
    }

    #[test]
    fn star_triple_is_ultrametric() {
        // d(a,b)=4, d(x,a)=1, d(x,b)=4: every strong-triangle triple holds
        let m = space(
            &["a", "b", "x"],
            &[&[0.0, 4.0, 1.0], &[4.0, 0.0, 4.0], &[1.0, 4.0, 0.0]],
        );
        let r = m.validate();
        assert!(r.is_metric && r.is_ultrametric);
    }

    #[test]
    fn metric_but_not_ultra_reports_strong_triangle() {
        let m = space(
            &["a", "b", "c"],
            &[&[0.0, 1.0, 1.0], &[1.0, 0.0, 2.0], &[1.0, 2.0, 0.0]],
        );
        let r = m.validate();
        assert!(r.is_metric);
        assert!(!r.is_ultrametric);
        assert_eq!(r.worst_violation.unwrap().kind, ViolationKind::StrongTriangle);
    }

    #[test]
    fn asymmetry_names_the_pair() {
        let m = space(&["a", "b"], &[&[0.0, 1.0], &[2.0, 0.0]]);
        let r = m.validate();
        assert!(!r.is_metric);
        let v = r.worst_violation.unwrap();
        assert_eq!(v.kind, ViolationKind::Asymmetry);
        assert_eq!(v.points, vec!["a", "b"]);
    }

    #[test]
    fn dist_to_set_examples() {
        let m = space(
            &["a", "b", "x"],
            &[&[0.0, 4.0, 1.0], &[4.0, 0.0, 4.0], &[1.0, 4.0, 0.0]],
        );
        // member of the set
        assert_eq!(m.dist_to_set(&[0], 0).unwrap(), 0.0);
        // singleton set
        assert_eq!(m.dist_to_set(&[0], 1).unwrap(), 4.0);
        // min of two candidates
        assert_eq!(m.dist_to_set(&[0, 1], 2).unwrap(), 1.0);
        assert!(m.dist_to_set(&[], 0).is_err());
    }

    #[test]
    fn neighborhoods_on_a_line() {
        let m = space(
            &["p0", "p1", "p2"],
            &[&[0.0, 0.3, 1.0], &[0.3, 0.0, 0.7], &[1.0, 0.7, 0.0]],
        );
        let nb = m.set_neighborhoods(&[0], 0.3).unwrap();
        assert_eq!(nb.closed, vec![0, 1]);
        assert_eq!(nb.open, vec![0]);
        assert_eq!(nb.exterior, vec![1, 2]);

        // large radius absorbs everything
        let nb = m.set_neighborhoods(&[0], 2.0).unwrap();
        assert_eq!(nb.closed.len(), 3);
        assert!(nb.exterior.is_empty());

        // radius below every positive set-distance
        let nb = m.set_neighborhoods(&[0], 0.1).unwrap();
        assert_eq!(nb.closed, vec![0]);
    }

    #[test]
    fn product_examples() {
        let d = space(&["a", "b"], &[&[0.0, 1.0], &[1.0, 0.0]]);
        let e = space(&["p", "q"], &[&[0.0, 3.0], &[3.0, 0.0]]);
        let l1 = product_metric(&d, &e, ProductNorm::L1).unwrap();
        let li = product_metric(&d, &e, ProductNorm::Linf).unwrap();
        let i = l1.index_of("(a,p)").unwrap();
        let j = l1.index_of("(b,q)").unwrap();
        assert_eq!(l1.get(i, j), 4.0);
        assert_eq!(li.get(i, j), 3.0);
        assert!(l1.validate().is_metric);
        assert!(li.validate().is_metric);
        // both factors ultra, sup product ultra
        assert!(li.validate().is_ultrametric);
    }

    #[test]
    fn product_with_single_point_is_isometric() {
        let d = space(
            &["a", "b", "c"],
            &[&[0.0, 1.0, 2.0], &[1.0, 0.0, 2.5], &[2.0, 2.5, 0.0]],
        );
        let pt = space(&["z"], &[&[0.0]]);
        for norm in [ProductNorm::L1, ProductNorm::Linf] {
            let p = product_metric(&d, &pt, norm).unwrap();
            assert_eq!(p.len(), 3);
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(p.get(i, j), d.get(i, j));
                }
            }
        }
    }

    #[test]
    fn join_is_pointwise_max() {
        let d = space(&["a", "b"], &[&[0.0, 1.0], &[1.0, 0.0]]);
        let e = space(&["a", "b"], &[&[0.0, 3.0], &[3.0, 0.0]]);
        let j = join_metrics(&d, &e).unwrap();
        assert_eq!(j.get(0, 1), 3.0);
        // idempotence, exactly
        assert!(join_metrics(&d, &d).unwrap().matrix_eq(&d));
        // mismatched labels refused
        let f = space(&["a", "c"], &[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!(join_metrics(&d, &f).is_err());
    }

    #[test]
    fn separated_and_dense_on_integers() {
        let rows: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..4).map(|j| (i as f64 - j as f64).abs()).collect())
            .collect();
        let m = FinMetricSpace::new(
            (0..4).map(|i| format!("p{i}")).collect(),
            rows,
        )
        .unwrap();
        let r = m.separated_and_dense(&[0, 2], 2.0, 1.0).unwrap();
        assert!(r.is_h_separated);
        assert!(r.is_eta_dense);
        // the whole space is eta-dense in itself for every eta >= 0
        let r = m.separated_and_dense(&[0, 1, 2, 3], 0.5, 0.0).unwrap();
        assert!(r.is_eta_dense);
        // a singleton is not dense below the farthest distance
        let r = m.separated_and_dense(&[0], 1.0, 2.9).unwrap();
        assert!(!r.is_eta_dense);
        assert_eq!(r.covering_radius, 3.0);
    }

    #[test]
    fn spectrum_and_extremes() {
        let m = space(
            &["a", "b", "c"],
            &[&[0.0, 1.0, 2.0], &[1.0, 0.0, 1.0], &[2.0, 1.0, 0.0]],
        );
        assert_eq!(m.distance_spectrum(), vec![1.0, 2.0]);
        assert_eq!(m.diameter(), 2.0);
        assert_eq!(m.min_positive_distance(), Some(1.0));
    }

    #[test]
    fn structural_errors_name_positions() {
        let err = FinMetricSpace::new(
            vec!["a".into(), "b".into()],
            vec![vec![0.0, 1.0], vec![1.0]],
        )
        .unwrap_err();
        assert!(err.to_string().contains("row 1"));
        let err = FinMetricSpace::new(
            vec!["a".into(), "b".into()],
            vec![vec![0.0, -1.0], vec![1.0, 0.0]],
        )
        .unwrap_err();
        assert!(err.to_string().contains("column 1"));
        let err =
            FinMetricSpace::new(vec!["a".into(), "a".into()], vec![vec![0.0; 2]; 2]).unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }
}
