//! Embedding a space into subset x quotient, and the extension operators
//! it induces.
//!
//! A [`FactorizationContext`] fixes an auxiliary metric on the whole
//! space, a subset, a retraction onto the subset, the quotient collapsing
//! the subset, and a factor metric on the quotient. The embedding sends
//! `x` to the pair `(r(x), pi(x))`; it is injective and sends subset
//! members to `(a, theta)`.
//!
//! Pulling the L1 product of a subset metric `d` with the factor metric
//! back through the embedding extends `d` to the whole space:
//!
//! ```text
//! extend_l1(d)(x, y)   = d(r(x), r(y)) + v(pi(x), pi(y))
//! extend_linf(d)(x, y) = d(r(x), r(y)) ∨ v(pi(x), pi(y))
//! ```
//!
//! Both restrict back to `d` on the subset. The L1 extension preserves
//! sup distances between subset metrics exactly; the sup extension
//! preserves ultrametric distances and, when `d` and the factor are
//! ultrametrics with values in a scale set, produces an ultrametric with
//! values in the same set. Truncating the factor metric at `eta` makes
//! the subset `eta`-dense in every extension.

use crate::error::{Error, Result};
use crate::quotient::{quotient, QuotientSpace};
use crate::retraction::{retract_bdhm, retract_engelking, Retraction};
use crate::scale::ScaleSet;
use crate::space::FinMetricSpace;

/// How the context picks its retraction: `Auto` selects the order-based
/// construction (tau = 2) on ultrametric bases and the scale
/// decomposition otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContextMethod {
    Auto,
    Engelking,
    Bdhm { tau: f64 },
}

#[derive(Debug, Clone)]
pub struct FactorizationContext {
    base: FinMetricSpace,
    subset: Vec<usize>,
    retraction: Retraction,
    quotient: QuotientSpace,
    factor: FinMetricSpace,
}

/// One row of the embedding table.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedPoint {
    /// Base index of the embedded point.
    pub point: usize,
    /// Base index of its retraction image inside the subset.
    pub anchor: usize,
    /// Quotient index of its projection.
    pub class: usize,
}

impl FactorizationContext {
    /// Context with the automatic retraction choice and the quotient
    /// metric itself as the factor.
    pub fn new(base: FinMetricSpace, subset: &[usize]) -> Result<Self> {
        Self::with_method(base, subset, ContextMethod::Auto)
    }

    pub fn with_method(
        base: FinMetricSpace,
        subset: &[usize],
        method: ContextMethod,
    ) -> Result<Self> {
        let subset = base.check_subset(subset)?;
        let retraction = match method {
            ContextMethod::Auto => {
                if base.validate().is_ultrametric {
                    retract_bdhm(&base, &subset, 2.0)?
                } else {
                    retract_engelking(&base, &subset)?
                }
            }
            ContextMethod::Engelking => retract_engelking(&base, &subset)?,
            ContextMethod::Bdhm { tau } => retract_bdhm(&base, &subset, tau)?,
        };
        let q = quotient(&base, &subset)?;
        let factor = q.space.clone();
        Ok(FactorizationContext {
            base,
            subset,
            retraction,
            quotient: q,
            factor,
        })
    }

    /// Replace the factor metric; it must be a metric on exactly the
    /// quotient labels.
    pub fn set_factor(mut self, factor: FinMetricSpace) -> Result<Self> {
        if factor.labels() != self.quotient.space.labels() {
            return Err(Error::structural(
                "factor metric must live on the quotient labels",
            ));
        }
        if !factor.validate().is_metric {
            return Err(Error::domain("factor must satisfy the metric axioms"));
        }
        self.factor = factor;
        Ok(self)
    }

    /// Cap the factor metric at `eta` pointwise. Afterwards every point
    /// sits within `eta` of its retraction image in both extensions.
    pub fn truncate_factor(self, eta: f64) -> Result<Self> {
        let truncated = truncate_metric(&self.factor, eta)?;
        self.set_factor(truncated)
    }

    pub fn base(&self) -> &FinMetricSpace {
        &self.base
    }

    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    pub fn retraction(&self) -> &Retraction {
        &self.retraction
    }

    pub fn quotient(&self) -> &QuotientSpace {
        &self.quotient
    }

    pub fn factor(&self) -> &FinMetricSpace {
        &self.factor
    }

    /// The embedding table `x -> (r(x), pi(x))`.
    pub fn embedding(&self) -> Vec<EmbeddedPoint> {
        (0..self.base.len())
            .map(|x| EmbeddedPoint {
                point: x,
                anchor: self.retraction.mapping[x],
                class: self.quotient.projection[x],
            })
            .collect()
    }

    /// Positions of the subset labels inside a metric given on the subset,
    /// in subset order.
    fn subset_positions(&self, d: &FinMetricSpace) -> Result<Vec<usize>> {
        if d.len() != self.subset.len() {
            return Err(Error::structural(format!(
                "metric on the subset has {} points, subset has {}",
                d.len(),
                self.subset.len()
            )));
        }
        self.subset
            .iter()
            .map(|&a| {
                d.index_of(self.base.label(a)).ok_or_else(|| {
                    Error::structural(format!(
                        "metric on the subset is missing label {:?}",
                        self.base.label(a)
                    ))
                })
            })
            .collect()
    }

    fn extend_with(
        &self,
        d: &FinMetricSpace,
        combine: impl Fn(f64, f64) -> f64,
    ) -> Result<FinMetricSpace> {
        let pos = self.subset_positions(d)?;
        // base index of a subset member -> its position in d
        let mut in_d = vec![usize::MAX; self.base.len()];
        for (k, &a) in self.subset.iter().enumerate() {
            in_d[a] = pos[k];
        }
        let n = self.base.len();
        let mut dist = vec![0.0; n * n];
        for x in 0..n {
            let (rx, px) = (in_d[self.retraction.mapping[x]], self.quotient.projection[x]);
            for y in 0..n {
                let (ry, py) = (in_d[self.retraction.mapping[y]], self.quotient.projection[y]);
                dist[x * n + y] = combine(d.get(rx, ry), self.factor.get(px, py));
            }
        }
        FinMetricSpace::from_flat(self.base.labels().to_vec(), dist)
    }

    /// Extend a metric on the subset to the whole space through the L1
    /// product. The result restricts to `d` on the subset, exactly.
    pub fn extend_l1(&self, d: &FinMetricSpace) -> Result<FinMetricSpace> {
        self.extend_with(d, |a, b| a + b)
    }

    /// Extend a metric on the subset through the sup product. When a scale
    /// set is supplied, the factor metric must be an ultrametric taking
    /// values in it; combined with an ultrametric `d` valued in the set,
    /// the output is then an ultrametric valued in the set as well.
    pub fn extend_linf(
        &self,
        d: &FinMetricSpace,
        value_set: Option<&ScaleSet>,
    ) -> Result<FinMetricSpace> {
        if let Some(s) = value_set {
            let v = self.factor.validate();
            if !v.is_ultrametric {
                return Err(Error::domain(
                    "scale-set contract needs an ultrametric factor",
                ));
            }
            for i in 0..self.factor.len() {
                for j in i + 1..self.factor.len() {
                    let t = self.factor.get(i, j);
                    if !s.contains(t) {
                        return Err(Error::domain(format!(
                            "factor value {} at ({},{}) lies outside the scale set",
                            t,
                            self.factor.label(i),
                            self.factor.label(j)
                        )));
                    }
                }
            }
        }
        self.extend_with(d, f64::max)
    }
}

/// Composition of a map with a metric on its codomain: entry `(x, y)`
/// becomes the distance of the images. The boolean flags whether the
/// result still separates points, which happens exactly when the map is
/// injective; otherwise the matrix is a pseudmetric.
pub fn pullback(
    domain_labels: Vec<String>,
    map_to: &[usize],
    codomain: &FinMetricSpace,
) -> Result<(FinMetricSpace, bool)> {
    if map_to.len() != domain_labels.len() {
        return Err(Error::structural(format!(
            "map covers {} points, domain has {}",
            map_to.len(),
            domain_labels.len()
        )));
    }
    if let Some(&bad) = map_to.iter().find(|&&y| y >= codomain.len()) {
        return Err(Error::structural(format!(
            "map target {bad} outside the codomain"
        )));
    }
    let n = map_to.len();
    let mut dist = vec![0.0; n * n];
    for x in 0..n {
        for y in 0..n {
            dist[x * n + y] = codomain.get(map_to[x], map_to[y]);
        }
    }
    let mut seen = vec![false; codomain.len()];
    let mut injective = true;
    for &y in map_to {
        if seen[y] {
            injective = false;
        }
        seen[y] = true;
    }
    let space = FinMetricSpace::from_flat(domain_labels, dist)?;
    Ok((space, injective))
}

/// Pointwise cap of a metric at `eta`; truncation preserves the metric
/// axioms and the strong triangle inequality.
pub fn truncate_metric(v: &FinMetricSpace, eta: f64) -> Result<FinMetricSpace> {
    if !(eta > 0.0) {
        return Err(Error::domain(format!(
            "truncation level must be positive, got {eta}"
        )));
    }
    let dist = v.flat().iter().map(|&x| x.min(eta)).collect();
    FinMetricSpace::from_flat(v.labels().to_vec(), dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{product_metric, ProductNorm};

    fn star() -> FinMetricSpace {
        // F = {a, b} with x hanging near a; ultrametric
        FinMetricSpace::new(
            vec!["a".into(), "b".into(), "x".into()],
            vec![
                vec![0.0, 4.0, 1.0],
                vec![4.0, 0.0, 4.0],
                vec![1.0, 4.0, 0.0],
            ],
        )
        .unwrap()
    }

    fn on_subset(d_ab: f64) -> FinMetricSpace {
        FinMetricSpace::new(
            vec!["a".into(), "b".into()],
            vec![vec![0.0, d_ab], vec![d_ab, 0.0]],
        )
        .unwrap()
    }

    fn factor_with(theta_x: f64, ctx: &FactorizationContext) -> FinMetricSpace {
        // quotient labels are [x, theta]
        let labels = ctx.quotient().space.labels().to_vec();
        FinMetricSpace::new(
            labels,
            vec![vec![0.0, theta_x], vec![theta_x, 0.0]],
        )
        .unwrap()
    }

    #[test]
    fn embedding_sends_subset_to_anchor_theta() {
        let ctx = FactorizationContext::new(star(), &[0, 1]).unwrap();
        let theta = ctx.quotient().theta_index();
        let table = ctx.embedding();
        for row in &table {
            if [0, 1].contains(&row.point) {
                assert_eq!(row.anchor, row.point);
                assert_eq!(row.class, theta);
            }
        }
        // the free point is anchored at its star-set least element
        assert_eq!(table[2].anchor, 0);
        assert_eq!(ctx.quotient().space.label(table[2].class), "x");
        // injectivity
        let mut pairs: Vec<(usize, usize)> = table.iter().map(|r| (r.anchor, r.class)).collect();
        pairs.sort_unstable();
        pairs.dedup();
        assert_eq!(pairs.len(), 3);
    }

    #[test]
    fn pullback_examples() {
        let m = star();
        let (same, inj) = pullback(m.labels().to_vec(), &[0, 1, 2], &m).unwrap();
        assert!(inj);
        assert!(same.matrix_eq(&m));

        let (zero, inj) = pullback(m.labels().to_vec(), &[1, 1, 1], &m).unwrap();
        assert!(!inj);
        assert!(zero.flat().iter().all(|&x| x == 0.0));
        assert!(!zero.validate().is_metric);

        assert!(pullback(m.labels().to_vec(), &[0, 1], &m).is_err());
        assert!(pullback(m.labels().to_vec(), &[0, 1, 9], &m).is_err());
    }

    #[test]
    fn l1_extension_formula() {
        let ctx = FactorizationContext::new(star(), &[0, 1]).unwrap();
        let v = factor_with(0.5, &ctx);
        let ctx = ctx.set_factor(v).unwrap();
        let d = on_subset(4.0);
        let ext = ctx.extend_l1(&d).unwrap();
        let (a, b, x) = (0, 1, 2);
        assert_eq!(ext.get(x, a), 0.5);
        assert_eq!(ext.get(x, b), 4.5);
        assert_eq!(ext.get(a, b), 4.0);
        assert!(ext.validate().is_metric);

        // sup distance between extensions equals the subset-level distance
        let e = on_subset(5.0);
        let ext_e = ctx.extend_l1(&e).unwrap();
        let lhs = crate::family::sup_distance(&ext, &ext_e).unwrap();
        assert!((lhs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sup_extension_formula_and_ultrametry() {
        let ctx = FactorizationContext::new(star(), &[0, 1]).unwrap();
        let v = factor_with(0.5, &ctx);
        let ctx = ctx.set_factor(v).unwrap();
        let d = on_subset(4.0);
        let ext = ctx.extend_linf(&d, None).unwrap();
        assert_eq!(ext.get(2, 0), 0.5);
        assert_eq!(ext.get(2, 1), 4.0);
        assert_eq!(ext.get(0, 1), 4.0);
        assert!(ext.validate().is_ultrametric);
    }

    #[test]
    fn sup_extension_scale_set_contract() {
        let ctx = FactorizationContext::new(star(), &[0, 1]).unwrap();
        let geo = ScaleSet::geometric(0.5).unwrap();
        // 0.5 is a power of two, 0.3 is not
        let v = factor_with(0.5, &ctx);
        let good = ctx.clone().set_factor(v).unwrap();
        let d = on_subset(4.0);
        let ext = good.extend_linf(&d, Some(&geo)).unwrap();
        for i in 0..ext.len() {
            for j in i + 1..ext.len() {
                assert!(geo.contains(ext.get(i, j)));
            }
        }
        let v = factor_with(0.3, &ctx);
        let bad = ctx.set_factor(v).unwrap();
        assert!(matches!(
            bad.extend_linf(&d, Some(&geo)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn extensions_agree_with_pullback_of_products() {
        // cross-route check: the direct formulas match pulling the product
        // metric back through the embedding table
        let ctx = FactorizationContext::new(star(), &[0, 1]).unwrap();
        let v = factor_with(0.5, &ctx);
        let ctx = ctx.set_factor(v).unwrap();
        let d = on_subset(4.0);
        let table = ctx.embedding();
        let nq = ctx.factor().len();
        let map: Vec<usize> = table
            .iter()
            .map(|r| {
                let f_pos = d.index_of(ctx.base().label(r.anchor)).unwrap();
                f_pos * nq + r.class
            })
            .collect();
        for (norm, direct) in [
            (ProductNorm::L1, ctx.extend_l1(&d).unwrap()),
            (ProductNorm::Linf, ctx.extend_linf(&d, None).unwrap()),
        ] {
            let prod = product_metric(&d, ctx.factor(), norm).unwrap();
            let (pulled, inj) = pullback(ctx.base().labels().to_vec(), &map, &prod).unwrap();
            assert!(inj);
            assert!(pulled.matrix_eq(&direct));
        }
    }

    #[test]
    fn truncation_caps_the_factor_and_gives_density() {
        let ctx = FactorizationContext::new(star(), &[0, 1]).unwrap();
        let v = factor_with(0.5, &ctx);
        let ctx = ctx.set_factor(v).unwrap();
        // high cap leaves the factor untouched
        let same = ctx.clone().truncate_factor(10.0).unwrap();
        assert!(same.factor().matrix_eq(ctx.factor()));

        let ctx = ctx.truncate_factor(0.2).unwrap();
        assert_eq!(ctx.factor().get(0, 1), 0.2);
        let d = on_subset(4.0);
        let ext = ctx.extend_l1(&d).unwrap();
        let r_x = ctx.retraction().mapping[2];
        assert!((ext.get(2, r_x) - 0.2).abs() < 1e-15);
        let rep = ext.separated_and_dense(&[0, 1], 0.0, 0.2).unwrap();
        assert!(rep.is_eta_dense);

        assert!(truncate_metric(ctx.factor(), 0.0).is_err());
    }

    #[test]
    fn auto_method_matches_base_shape() {
        use crate::retraction::RetractionMethod;
        let ultra = star();
        let ctx = FactorizationContext::new(ultra, &[0, 1]).unwrap();
        assert!(matches!(
            ctx.retraction().method,
            RetractionMethod::Bdhm { .. }
        ));
        let line = FinMetricSpace::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                vec![0.0, 1.0, 2.0],
                vec![1.0, 0.0, 1.0],
                vec![2.0, 1.0, 0.0],
            ],
        )
        .unwrap();
        let ctx = FactorizationContext::new(line, &[0]).unwrap();
        assert!(matches!(ctx.retraction().method, RetractionMethod::Engelking));
    }
}
