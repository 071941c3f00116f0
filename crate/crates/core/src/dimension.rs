//! Covering and packing numbers, box-counting and doubling-exponent
//! dimension estimators, and the sparse-scale ultrametric.
//!
//! Exact covering numbers come from a branch-and-bound set cover over
//! closed balls (centers inside the space), exact packing numbers from a
//! branch-and-bound maximum independent set on the proximity graph; both
//! are limited to 20 points. Greedy modes give an upper bound on covering
//! (max-coverage) and a lower bound on packing (first-fit in label
//! order), and the greedy cover never exceeds `(1 + ln n)` times the
//! optimum. Estimators pick exact counts when they fit and greedy counts
//! beyond.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linkage::single_linkage;
use crate::num::pow2;
use crate::report::Report;
use crate::space::{product_metric, FinMetricSpace, ProductNorm};

pub const EXACT_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMode {
    Exact,
    Greedy,
}

fn auto_mode(n: usize) -> CountMode {
    if n <= EXACT_LIMIT {
        CountMode::Exact
    } else {
        CountMode::Greedy
    }
}

/// Least number of closed `r`-balls centered in the space that cover it.
pub fn covering_number(m: &FinMetricSpace, r: f64, mode: CountMode) -> Result<usize> {
    let all: Vec<usize> = (0..m.len()).collect();
    covering_within(m, &all, r, mode)
}

/// Covering number of the subspace on `members`, centers restricted to it.
pub fn covering_within(
    m: &FinMetricSpace,
    members: &[usize],
    r: f64,
    mode: CountMode,
) -> Result<usize> {
    if !(r > 0.0) {
        return Err(Error::domain(format!("radius must be positive, got {r}")));
    }
    if members.is_empty() {
        return Ok(0);
    }
    match mode {
        CountMode::Exact => {
            let k = members.len();
            if k > EXACT_LIMIT {
                return Err(Error::capacity(format!(
                    "exact covering limited to {EXACT_LIMIT} points, got {k}"
                )));
            }
            let full: u32 = if k == 32 { u32::MAX } else { (1u32 << k) - 1 };
            let balls: Vec<u32> = members
                .iter()
                .map(|&c| {
                    let mut mask = 0u32;
                    for (j, &x) in members.iter().enumerate() {
                        if m.get(c, x) <= r {
                            mask |= 1 << j;
                        }
                    }
                    mask
                })
                .collect();
            Ok(exact_set_cover(&balls, full))
        }
        CountMode::Greedy => Ok(greedy_cover(m, members, r)),
    }
}

fn greedy_cover(m: &FinMetricSpace, members: &[usize], r: f64) -> usize {
    let k = members.len();
    let mut covered = vec![false; k];
    let mut remaining = k;
    let mut picks = 0;
    while remaining > 0 {
        let mut best = (0usize, usize::MAX);
        for (ci, &c) in members.iter().enumerate() {
            let mut gain = 0;
            for (j, &x) in members.iter().enumerate() {
                if !covered[j] && m.get(c, x) <= r {
                    gain += 1;
                }
            }
            if gain > best.0 {
                best = (gain, ci);
            }
        }
        let c = members[best.1];
        for (j, &x) in members.iter().enumerate() {
            if !covered[j] && m.get(c, x) <= r {
                covered[j] = true;
                remaining -= 1;
            }
        }
        picks += 1;
    }
    picks
}

fn exact_set_cover(balls: &[u32], full: u32) -> usize {
    // greedy incumbent
    let mut best = {
        let mut covered = 0u32;
        let mut picks = 0;
        while covered != full {
            let add = balls
                .iter()
                .max_by_key(|&&b| (b & !covered).count_ones())
                .copied()
                .unwrap();
            covered |= add;
            picks += 1;
        }
        picks
    };
    let max_ball = balls.iter().map(|b| b.count_ones()).max().unwrap_or(1) as usize;
    fn descend(
        balls: &[u32],
        full: u32,
        covered: u32,
        used: usize,
        max_ball: usize,
        best: &mut usize,
    ) {
        if covered == full {
            *best = (*best).min(used);
            return;
        }
        let remaining = (full & !covered).count_ones() as usize;
        let lower = remaining.div_ceil(max_ball);
        if used + lower >= *best {
            return;
        }
        // branch on the uncovered element with the fewest candidate balls
        let mut pivot = usize::MAX;
        let mut fewest = usize::MAX;
        let mut missing = full & !covered;
        while missing != 0 {
            let e = missing.trailing_zeros() as usize;
            missing &= missing - 1;
            let count = balls.iter().filter(|&&b| b & (1 << e) != 0).count();
            if count < fewest {
                fewest = count;
                pivot = e;
            }
        }
        let mut candidates: Vec<u32> = balls
            .iter()
            .copied()
            .filter(|&b| b & (1 << pivot) != 0)
            .collect();
        candidates.sort_by_key(|b| std::cmp::Reverse((b & !covered).count_ones()));
        for b in candidates {
            descend(balls, full, covered | b, used + 1, max_ball, best);
        }
    }
    descend(balls, full, 0, 0, max_ball, &mut best);
    best
}

/// Size of the largest subset whose members are pairwise at distance
/// `>= r` (exact), or a greedy first-fit lower bound.
pub fn packing_number(m: &FinMetricSpace, r: f64, mode: CountMode) -> Result<usize> {
    if !(r > 0.0) {
        return Err(Error::domain(format!("radius must be positive, got {r}")));
    }
    let n = m.len();
    match mode {
        CountMode::Greedy => {
            let mut kept: Vec<usize> = Vec::new();
            for x in 0..n {
                if kept.iter().all(|&y| m.get(x, y) >= r) {
                    kept.push(x);
                }
            }
            Ok(kept.len())
        }
        CountMode::Exact => {
            if n > EXACT_LIMIT {
                return Err(Error::capacity(format!(
                    "exact packing limited to {EXACT_LIMIT} points, got {n}"
                )));
            }
            // conflict neighborhoods: pairs closer than r cannot coexist
            let conflicts: Vec<u32> = (0..n)
                .map(|i| {
                    let mut mask = 0u32;
                    for j in 0..n {
                        if j != i && m.get(i, j) < r {
                            mask |= 1 << j;
                        }
                    }
                    mask
                })
                .collect();
            let mut best = 0usize;
            fn grow(conflicts: &[u32], candidates: u32, size: usize, best: &mut usize) {
                if candidates == 0 {
                    *best = (*best).max(size);
                    return;
                }
                if size + candidates.count_ones() as usize <= *best {
                    return;
                }
                let v = candidates.trailing_zeros() as usize;
                // take v
                grow(
                    conflicts,
                    candidates & !(1 << v) & !conflicts[v],
                    size + 1,
                    best,
                );
                // skip v
                grow(conflicts, candidates & !(1 << v), size, best);
            }
            let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
            grow(&conflicts, full, 0, &mut best);
            Ok(best)
        }
    }
}

/// Covering and packing counts across a decreasing scale list.
#[derive(Debug, Clone, Serialize)]
pub struct ScaleProfile {
    pub entries: Vec<ProfileEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileEntry {
    pub radius: f64,
    pub covering: usize,
    pub packing: usize,
}

pub fn scale_profile(m: &FinMetricSpace, scales: &[f64], mode: CountMode) -> Result<ScaleProfile> {
    let mut scales: Vec<f64> = scales.to_vec();
    scales.sort_by(|a, b| b.partial_cmp(a).unwrap());
    scales.dedup();
    let mut entries = Vec::with_capacity(scales.len());
    for &r in &scales {
        entries.push(ProfileEntry {
            radius: r,
            covering: covering_number(m, r, mode)?,
            packing: packing_number(m, r, mode)?,
        });
    }
    Ok(ScaleProfile { entries })
}

impl ScaleProfile {
    /// Monotonicity of counts, `N(r) <= pack(r)` per scale, and the
    /// cross-scale bound `pack(r') <= N(r)` whenever `r' > 2r`.
    pub fn check_invariants(&self) -> Report {
        let mut rep = Report::new();
        for w in self.entries.windows(2) {
            rep.require(
                "covering_monotone_as_radius_shrinks",
                w[0].covering <= w[1].covering,
                || format!("N({}) = {} > N({}) = {}", w[0].radius, w[0].covering, w[1].radius, w[1].covering),
            );
        }
        for e in &self.entries {
            rep.require("covering_at_most_packing", e.covering <= e.packing, || {
                format!("r = {}: N = {} > pack = {}", e.radius, e.covering, e.packing)
            });
        }
        for a in &self.entries {
            for b in &self.entries {
                if a.radius > 2.0 * b.radius {
                    rep.require("packing_vs_coarser_covering", a.packing <= b.covering, || {
                        format!(
                            "pack({}) = {} > N({}) = {}",
                            a.radius, a.packing, b.radius, b.covering
                        )
                    });
                }
            }
        }
        rep
    }
}

/// Least-squares fit of `ln N(r)` against `-ln r`.
#[derive(Debug, Clone, Serialize)]
pub struct BoxDim {
    pub slope: f64,
    pub intercept: f64,
    pub points: Vec<BoxPoint>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoxPoint {
    pub radius: f64,
    pub count: usize,
    pub residual: f64,
}

fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        var += (x - mx) * (x - mx);
    }
    let slope = cov / var;
    (slope, my - slope * mx)
}

fn checked_scales(scales: &[f64]) -> Result<Vec<f64>> {
    let mut s: Vec<f64> = scales.to_vec();
    if s.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
        return Err(Error::domain("scales must be positive finite numbers"));
    }
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s.dedup();
    if s.len() < 3 {
        return Err(Error::domain(format!(
            "need at least 3 distinct scales, got {}",
            s.len()
        )));
    }
    let span = s[0] / s[s.len() - 1];
    if span < 4.0 {
        return Err(Error::domain(format!(
            "scales span a ratio of {span}, need at least 4"
        )));
    }
    Ok(s)
}

/// Box-counting slope over the given scales. Counts are exact up to
/// [`EXACT_LIMIT`] points and greedy beyond. A single point has slope 0.
pub fn ubdim_estimate(m: &FinMetricSpace, scales: &[f64]) -> Result<BoxDim> {
    slope_estimate(m, scales, covering_number)
}

/// Packing-count slope over the given scales. A finite-sample stand-in
/// for packing-type dimensions: at matched scales it tracks the covering
/// slope, and no separate finite-sample notion distinguishes them.
pub fn packing_slope(m: &FinMetricSpace, scales: &[f64]) -> Result<BoxDim> {
    slope_estimate(m, scales, packing_number)
}

fn slope_estimate(
    m: &FinMetricSpace,
    scales: &[f64],
    count: impl Fn(&FinMetricSpace, f64, CountMode) -> Result<usize>,
) -> Result<BoxDim> {
    if m.len() == 1 {
        return Ok(BoxDim {
            slope: 0.0,
            intercept: 0.0,
            points: Vec::new(),
        });
    }
    let scales = checked_scales(scales)?;
    let mode = auto_mode(m.len());
    let mut xs = Vec::with_capacity(scales.len());
    let mut ys = Vec::with_capacity(scales.len());
    let mut counts = Vec::with_capacity(scales.len());
    for &r in &scales {
        let c = count(m, r, mode)?;
        xs.push(-r.ln());
        ys.push((c as f64).ln());
        counts.push(c);
    }
    let (slope, intercept) = fit_line(&xs, &ys);
    let points = scales
        .iter()
        .zip(counts.iter())
        .zip(xs.iter().zip(ys.iter()))
        .map(|((&radius, &count), (&x, &y))| BoxPoint {
            radius,
            count,
            residual: y - (slope * x + intercept),
        })
        .collect();
    Ok(BoxDim {
        slope,
        intercept,
        points,
    })
}

/// Doubling-exponent probe: the largest `ln N(B(x, R), r) / ln(R / r)`
/// over all centers and all supplied scale pairs. With the constant fixed
/// at 1 this is a finite-sample proxy for the infimal doubling exponent,
/// not the infimum itself.
#[derive(Debug, Clone, Serialize)]
pub struct AssouadEstimate {
    pub value: f64,
    pub rows: Vec<AssouadRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssouadRow {
    pub outer_radius: f64,
    pub inner_radius: f64,
    /// Center attaining the worst ratio at this pair.
    pub center: String,
    pub count: usize,
    pub ratio: f64,
}

pub fn adim_estimate(m: &FinMetricSpace, scale_pairs: &[(f64, f64)]) -> Result<AssouadEstimate> {
    if scale_pairs.is_empty() {
        return Err(Error::domain("no scale pairs supplied"));
    }
    for &(big, small) in scale_pairs {
        if !(small > 0.0) || !(big > small) {
            return Err(Error::domain(format!(
                "scale pair ({big}, {small}) must satisfy 0 < r < R"
            )));
        }
    }
    let mut rows = Vec::with_capacity(scale_pairs.len());
    let mut value = 0.0f64;
    for &(big, small) in scale_pairs {
        let mut worst = (0.0f64, 0usize, 0usize);
        for x in 0..m.len() {
            let ball: Vec<usize> = (0..m.len()).filter(|&y| m.get(x, y) <= big).collect();
            let mode = auto_mode(ball.len());
            let count = covering_within(m, &ball, small, mode)?;
            let ratio = (count as f64).ln() / (big / small).ln();
            if ratio > worst.0 {
                worst = (ratio, x, count);
            }
        }
        value = value.max(worst.0);
        rows.push(AssouadRow {
            outer_radius: big,
            inner_radius: small,
            center: m.label(worst.1).to_string(),
            count: worst.2,
            ratio: worst.0,
        });
    }
    Ok(AssouadEstimate { value, rows })
}

/// Scale pairs anchored at the finest positive distance: `(v, v_min)` for
/// every spectrum value at least twice `v_min`. The spectrum is collapsed
/// at the global tolerance first, so float noise between equal distances
/// cannot produce near-unit spans; degenerate spectra fall back to a
/// half-scale pair.
pub fn standard_scale_pairs(m: &FinMetricSpace) -> Vec<(f64, f64)> {
    let mut spectrum = m.distance_spectrum();
    spectrum.dedup_by(|next, kept| crate::num::rel_eq(*kept, *next));
    match spectrum.len() {
        0 => vec![(1.0, 0.5)],
        _ => {
            let base = spectrum[0];
            let pairs: Vec<(f64, f64)> = spectrum[1..]
                .iter()
                .filter(|&&v| v >= 2.0 * base)
                .map(|&v| (v, base))
                .collect();
            if pairs.is_empty() {
                vec![(2.0 * base, base)]
            } else {
                pairs
            }
        }
    }
}

/// Powers of `base` strictly between the smallest positive distance and
/// the diameter, extended downward to at least three scales when the
/// window is too narrow. Decreasing order.
pub fn default_scales(m: &FinMetricSpace, base: f64) -> Vec<f64> {
    assert!(base > 1.0, "scale base must exceed 1");
    let diam = m.diameter();
    let minpos = m.min_positive_distance();
    let (lo, hi) = match (minpos, diam) {
        (Some(lo), hi) if hi > 0.0 => (lo, hi),
        _ => return vec![1.0, 1.0 / base, 1.0 / (base * base)],
    };
    let mut scales = Vec::new();
    // largest power strictly below the diameter
    let mut k = (hi.ln() / base.ln()).ceil() as i32;
    while base.powi(k) >= hi {
        k -= 1;
    }
    while base.powi(k) > lo {
        scales.push(base.powi(k));
        k -= 1;
    }
    while scales.len() < 3 {
        scales.push(base.powi(k));
        k -= 1;
    }
    scales
}

/// Sparse-scale ultrametric: the single-linkage merge structure of the
/// input with its distinct heights remapped, in increasing order, onto
/// the doubly-exponential family `2^-2^k, ..., 2^-2^1`. Between
/// consecutive values the covering number is constant, so log-count
/// growth per log-scale collapses toward zero.
pub fn sparse_ultrametric(m: &FinMetricSpace) -> Result<FinMetricSpace> {
    let dendro = single_linkage(m);
    let k = dendro.heights().len();
    if k > 10 {
        return Err(Error::capacity(format!(
            "{k} distinct merge heights; the doubly-exponential family only \
             reaches 10 before underflowing"
        )));
    }
    let values: Vec<f64> = (0..k).map(|i| pow2(-(1i64 << (k - i)) as i32)).collect();
    dendro.remapped(m.labels().to_vec(), &values)
}

/// Per-scale comparison of product covering numbers against the
/// combinatorial bound from factor covers: for the sup product
/// `N(r) <= N1(r) * N2(r)`, for the L1 product
/// `N(r) <= N1(r/2) * N2(r/2)`. Exact counts only.
#[derive(Debug, Clone, Serialize)]
pub struct ProductCoveringReport {
    pub rows: Vec<ProductCoveringRow>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProductCoveringRow {
    pub radius: f64,
    pub product_count: usize,
    pub factor_counts: (usize, usize),
    pub bound: usize,
}

pub fn product_covering_check(
    a: &FinMetricSpace,
    b: &FinMetricSpace,
    norm: ProductNorm,
    scales: &[f64],
) -> Result<ProductCoveringReport> {
    if a.len() * b.len() > EXACT_LIMIT {
        return Err(Error::capacity(format!(
            "exact product covering limited to {EXACT_LIMIT} points, got {}",
            a.len() * b.len()
        )));
    }
    let prod = product_metric(a, b, norm)?;
    let scales: Vec<f64> = if scales.is_empty() {
        prod.distance_spectrum()
    } else {
        scales.to_vec()
    };
    let mut rows = Vec::with_capacity(scales.len());
    let mut passed = true;
    for &r in &scales {
        let factor_radius = match norm {
            ProductNorm::Linf => r,
            ProductNorm::L1 => r / 2.0,
        };
        let n1 = covering_number(a, factor_radius, CountMode::Exact)?;
        let n2 = covering_number(b, factor_radius, CountMode::Exact)?;
        let np = covering_number(&prod, r, CountMode::Exact)?;
        let bound = n1 * n2;
        passed = passed && np <= bound;
        rows.push(ProductCoveringRow {
            radius: r,
            product_count: np,
            factor_counts: (n1, n2),
            bound,
        });
    }
    Ok(ProductCoveringReport { rows, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{generate, GenKind, GenSpec};

    fn integer_line(n: usize) -> FinMetricSpace {
        generate(&GenSpec {
            kind: GenKind::Line { n, step: 1.0 },
            seed: 0,
        })
        .unwrap()
    }

    #[test]
    fn covering_examples_on_integers() {
        let m = integer_line(4);
        // one ball of the diameter radius suffices
        assert_eq!(covering_number(&m, 3.0, CountMode::Exact).unwrap(), 1);
        assert_eq!(covering_number(&m, 1.0, CountMode::Exact).unwrap(), 2);
        assert_eq!(covering_number(&m, 0.5, CountMode::Exact).unwrap(), 4);
        // greedy never beats exact
        for r in [0.5, 1.0, 2.0, 3.0] {
            let e = covering_number(&m, r, CountMode::Exact).unwrap();
            let g = covering_number(&m, r, CountMode::Greedy).unwrap();
            assert!(g >= e);
        }
    }

    #[test]
    fn packing_examples_on_integers() {
        let m = integer_line(4);
        assert_eq!(packing_number(&m, 1.0, CountMode::Exact).unwrap(), 4);
        assert_eq!(packing_number(&m, 2.5, CountMode::Exact).unwrap(), 2);
        // at or below the smallest gap everything is kept
        assert_eq!(packing_number(&m, 0.5, CountMode::Exact).unwrap(), 4);
        for r in [0.5, 1.0, 2.5] {
            let e = packing_number(&m, r, CountMode::Exact).unwrap();
            let g = packing_number(&m, r, CountMode::Greedy).unwrap();
            assert!(g <= e);
        }
    }

    #[test]
    fn exact_mode_capacity() {
        let m = integer_line(21);
        assert!(matches!(
            covering_number(&m, 1.0, CountMode::Exact),
            Err(Error::Capacity(_))
        ));
        assert!(matches!(
            packing_number(&m, 1.0, CountMode::Exact),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn profile_invariants_on_a_line() {
        let m = integer_line(9);
        let profile = scale_profile(&m, &m.distance_spectrum(), CountMode::Exact).unwrap();
        let rep = profile.check_invariants();
        assert!(rep.passed(), "{rep}");
    }

    #[test]
    fn box_slope_of_integer_line_is_one() {
        let m = integer_line(16);
        let scales = default_scales(&m, 2.0);
        assert_eq!(scales, vec![8.0, 4.0, 2.0]);
        let fit = ubdim_estimate(&m, &scales).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-9, "slope {}", fit.slope);
        // residuals vanish on exact dyadic data
        assert!(fit.points.iter().all(|p| p.residual.abs() < 1e-9));
    }

    #[test]
    fn narrow_windows_extend_downward() {
        let m = integer_line(4);
        let scales = default_scales(&m, 2.0);
        assert_eq!(scales, vec![2.0, 1.0, 0.5]);
        let fit = ubdim_estimate(&m, &scales).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_scales_are_rejected() {
        let m = integer_line(8);
        assert!(ubdim_estimate(&m, &[1.0, 2.0]).is_err());
        assert!(ubdim_estimate(&m, &[1.0, 2.0, 3.0]).is_err()); // span 3 < 4
        assert!(ubdim_estimate(&m, &[1.0, 2.0, -1.0]).is_err());
    }

    #[test]
    fn single_point_has_zero_slope() {
        let m = generate(&GenSpec {
            kind: GenKind::Line { n: 1, step: 1.0 },
            seed: 0,
        })
        .unwrap();
        assert_eq!(ubdim_estimate(&m, &[1.0]).unwrap().slope, 0.0);
        let est = adim_estimate(&m, &[(1.0, 0.25)]).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn doubling_probe_on_a_unit_line() {
        // 16 uniform points on [0,1]; every unit ball is the whole space
        // and an exact quarter-radius cover needs 3 balls
        let m = generate(&GenSpec {
            kind: GenKind::Line {
                n: 16,
                step: 1.0 / 15.0,
            },
            seed: 0,
        })
        .unwrap();
        let est = adim_estimate(&m, &[(1.0, 0.25)]).unwrap();
        let expected = 3f64.ln() / 4f64.ln();
        assert!((est.value - expected).abs() < 1e-9, "{}", est.value);
        assert!(est.value > 0.7 && est.value < 1.3);
    }

    #[test]
    fn sparse_ultrametric_examples() {
        // two merge heights remap to 2^-4 and 2^-2
        let m = FinMetricSpace::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                vec![0.0, 1.0, 3.0],
                vec![1.0, 0.0, 2.0],
                vec![3.0, 2.0, 0.0],
            ],
        )
        .unwrap();
        let s = sparse_ultrametric(&m).unwrap();
        assert!(s.validate().is_ultrametric);
        assert_eq!(s.get(0, 1), 0.0625);
        assert_eq!(s.get(0, 2), 0.25);
        assert_eq!(s.get(1, 2), 0.25);

        // a single merge height gives the constant value 2^-2
        let eq = FinMetricSpace::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                vec![0.0, 5.0, 5.0],
                vec![5.0, 0.0, 5.0],
                vec![5.0, 5.0, 0.0],
            ],
        )
        .unwrap();
        let s = sparse_ultrametric(&eq).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(s.get(i, j), 0.25);
                }
            }
        }
    }

    #[test]
    fn sparse_ultrametric_keeps_merge_order() {
        let m = integer_line(12);
        let s = sparse_ultrametric(&m).unwrap();
        assert!(s.validate().is_ultrametric);
        let before = single_linkage(&m);
        let after = single_linkage(&s);
        for (hb, ha) in before.heights().iter().zip(after.heights()) {
            // same clusters at corresponding heights
            assert_eq!(before.clusters_at(*hb), after.clusters_at(*ha));
        }
    }

    #[test]
    fn sparse_ultrametric_capacity() {
        // 12 distinct gaps exceed the 10-height budget
        let pts: Vec<f64> = (0..13)
            .scan(0.0, |acc, i| {
                *acc += 1.0 + i as f64 * 0.1;
                Some(*acc)
            })
            .collect();
        let rows: Vec<Vec<f64>> = pts
            .iter()
            .map(|&x| pts.iter().map(|&y| (x - y).abs()).collect())
            .collect();
        let m =
            FinMetricSpace::new((0..13).map(|i| format!("p{i}")).collect(), rows).unwrap();
        assert!(matches!(sparse_ultrametric(&m), Err(Error::Capacity(_))));
    }

    #[test]
    fn product_covering_on_four_point_factors() {
        let a = integer_line(4);
        let b = integer_line(4);
        let rep = product_covering_check(&a, &b, ProductNorm::Linf, &[]).unwrap();
        assert!(rep.passed);
        let row1 = rep.rows.iter().find(|r| r.radius == 1.0).unwrap();
        assert_eq!(row1.factor_counts, (2, 2));
        assert_eq!(row1.product_count, 4);
        let row2 = rep.rows.iter().find(|r| r.radius == 2.0).unwrap();
        assert_eq!(row2.product_count, 1);
        // the L1 variant against half-radius factor covers
        let rep = product_covering_check(&a, &b, ProductNorm::L1, &[2.0, 4.0]).unwrap();
        assert!(rep.passed);
    }

    #[test]
    fn product_with_point_factor_matches_base_counts() {
        let a = integer_line(4);
        let pt = generate(&GenSpec {
            kind: GenKind::Line { n: 1, step: 1.0 },
            seed: 0,
        })
        .unwrap();
        let rep = product_covering_check(&a, &pt, ProductNorm::Linf, &[1.0, 2.0, 3.0]).unwrap();
        for row in &rep.rows {
            assert_eq!(row.product_count, row.factor_counts.0);
            assert_eq!(row.factor_counts.1, 1);
        }
    }

    #[test]
    fn greedy_cover_within_log_factor() {
        let m = integer_line(12);
        for &r in &m.distance_spectrum() {
            let e = covering_number(&m, r, CountMode::Exact).unwrap() as f64;
            let g = covering_number(&m, r, CountMode::Greedy).unwrap() as f64;
            assert!(g <= (1.0 + (12f64).ln()) * e);
        }
    }
}
