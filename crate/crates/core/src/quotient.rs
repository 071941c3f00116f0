//! The metric quotient collapsing a subset to a single point.
//!
//! Given a space `X` and a non-empty subset `F`, the quotient lives on
//! `(X \ F) ∪ {theta}` with distance
//! `q(x, y) = min{ d(x, y), rho_F(x) + rho_F(y) }` and
//! `q(x, theta) = rho_F(x)`, where `rho_F` is the distance-to-set
//! function. The projection sends members of `F` to `theta` and fixes
//! everything else; it is 1-Lipschitz, and below `rho_F` it is a local
//! isometry on the complement.

use crate::error::Result;
use crate::num::{eq_slack, le_slack};
use crate::report::Report;
use crate::space::FinMetricSpace;

#[derive(Debug, Clone)]
pub struct QuotientSpace {
    /// Labels of the base space.
    pub base_labels: Vec<String>,
    /// Collapsed subset, as indices into the base space.
    pub subset: Vec<usize>,
    /// Label synthesized for the collapsed point.
    pub theta: String,
    /// The quotient space: complement of the subset in base order, then theta.
    pub space: FinMetricSpace,
    /// Projection from base index to quotient index.
    pub projection: Vec<usize>,
}

impl QuotientSpace {
    pub fn theta_index(&self) -> usize {
        self.space.len() - 1
    }

    /// Quotient label of a base point.
    pub fn project_label(&self, base_index: usize) -> &str {
        self.space.label(self.projection[base_index])
    }
}

fn fresh_theta_label(m: &FinMetricSpace) -> String {
    let mut candidate = "__theta__".to_string();
    let mut k = 0u32;
    while m.index_of(&candidate).is_some() {
        k += 1;
        candidate = format!("__theta__{k}");
    }
    candidate
}

/// Collapse `subset` to a single fresh point under the quotient metric.
pub fn quotient(m: &FinMetricSpace, subset: &[usize]) -> Result<QuotientSpace> {
    let subset = m.check_subset(subset)?;
    let rho = m.dist_to_set_all(&subset)?;
    let outside = m.complement(&subset);
    let theta = fresh_theta_label(m);

    let mut labels: Vec<String> = outside.iter().map(|&i| m.label(i).to_string()).collect();
    labels.push(theta.clone());
    let nq = labels.len();

    let mut dist = vec![0.0; nq * nq];
    for (p, &x) in outside.iter().enumerate() {
        for (q, &y) in outside.iter().enumerate() {
            if p != q {
                dist[p * nq + q] = m.get(x, y).min(rho[x] + rho[y]);
            }
        }
        let t = nq - 1;
        dist[p * nq + t] = rho[x];
        dist[t * nq + p] = rho[x];
    }

    let space = FinMetricSpace::from_flat(labels, dist)?;

    let mut projection = vec![nq - 1; m.len()];
    for (q, &x) in outside.iter().enumerate() {
        projection[x] = q;
    }

    Ok(QuotientSpace {
        base_labels: m.labels().to_vec(),
        subset,
        theta,
        space,
        projection,
    })
}

/// Re-derives every quotient law from `(m, subset)` and checks the given
/// quotient against them: the defining distance formulas, the metric
/// axioms of the quotient, 1-Lipschitz continuity of the projection, and
/// the local isometry on the complement.
pub fn check_quotient_laws(
    q: &QuotientSpace,
    m: &FinMetricSpace,
    subset: &[usize],
) -> Result<Report> {
    let subset = m.check_subset(subset)?;
    let mut rep = Report::new();

    rep.require("projection_structure", q.subset == subset, || {
        "stored subset differs from the one supplied".into()
    });
    let outside = m.complement(&subset);
    let expected_len = outside.len() + 1;
    rep.require("label_structure", q.space.len() == expected_len, || {
        format!(
            "quotient has {} labels, expected {}",
            q.space.len(),
            expected_len
        )
    });
    if q.space.len() != expected_len {
        return Ok(rep);
    }

    let theta = q.theta_index();
    let mut inside = vec![false; m.len()];
    for &i in &subset {
        inside[i] = true;
    }
    for x in 0..m.len() {
        let p = q.projection[x];
        let ok = if inside[x] {
            p == theta
        } else {
            q.space.label(p) == m.label(x)
        };
        rep.require("projection_fixes_complement", ok, || {
            format!("projection of {} lands on {}", m.label(x), q.space.label(p))
        });
    }

    let rho = m.dist_to_set_all(&subset)?;

    // q(x, theta) = rho_F(x), exactly up to tolerance
    for &x in &outside {
        let lhs = q.space.get(q.projection[x], theta);
        rep.observe("distance_to_theta_is_rho", eq_slack(lhs, rho[x]), || {
            format!("point {}: {} vs rho {}", m.label(x), lhs, rho[x])
        });
    }

    // q(x, y) = min(d, rho+rho) on the complement
    for (a, &x) in outside.iter().enumerate() {
        for &y in outside.iter().skip(a + 1) {
            let lhs = q.space.get(q.projection[x], q.projection[y]);
            let want = m.get(x, y).min(rho[x] + rho[y]);
            rep.observe("shortcut_min_formula", eq_slack(lhs, want), || {
                format!("pair ({},{}): {} vs {}", m.label(x), m.label(y), lhs, want)
            });
        }
    }

    // metric axioms on the quotient
    let v = q.space.validate();
    rep.require("quotient_is_metric", v.is_metric, || {
        v.worst_violation
            .as_ref()
            .map(|w| format!("{:?} at {:?} slack {}", w.kind, w.points, w.slack))
            .unwrap_or_default()
    });

    // projection is 1-Lipschitz on every base pair
    for x in 0..m.len() {
        for y in x + 1..m.len() {
            let lhs = q.space.get(q.projection[x], q.projection[y]);
            rep.observe("projection_one_lipschitz", le_slack(lhs, m.get(x, y)), || {
                format!(
                    "pair ({},{}): quotient {} > base {}",
                    m.label(x),
                    m.label(y),
                    lhs,
                    m.get(x, y)
                )
            });
        }
    }

    // below max(rho_x, rho_y) the shortcut cannot be active
    for (a, &x) in outside.iter().enumerate() {
        for &y in outside.iter().skip(a + 1) {
            let dq = q.space.get(q.projection[x], q.projection[y]);
            if dq < rho[x].max(rho[y]) {
                rep.observe("local_isometry", eq_slack(dq, m.get(x, y)), || {
                    format!(
                        "pair ({},{}): quotient {} vs base {}",
                        m.label(x),
                        m.label(y),
                        dq,
                        m.get(x, y)
                    )
                });
            }
        }
    }

    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn three_point(dbc: f64) -> FinMetricSpace {
        // d(a,b)=1, d(a,c)=2, d(b,c)=dbc
        FinMetricSpace::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                vec![0.0, 1.0, 2.0],
                vec![1.0, 0.0, dbc],
                vec![2.0, dbc, 0.0],
            ],
        )
        .unwrap()
    }

    #[test]
    fn direct_distances_survive() {
        let m = three_point(2.5);
        let q = quotient(&m, &[0]).unwrap();
        let b = q.space.index_of("b").unwrap();
        let c = q.space.index_of("c").unwrap();
        let t = q.theta_index();
        assert_eq!(q.space.get(b, c), 2.5);
        assert_eq!(q.space.get(b, t), 1.0);
        assert_eq!(q.space.get(c, t), 2.0);
        assert!(check_quotient_laws(&q, &m, &[0]).unwrap().passed());
    }

    #[test]
    fn shortcut_through_subset_wins() {
        let m = three_point(4.0);
        let q = quotient(&m, &[0]).unwrap();
        let b = q.space.index_of("b").unwrap();
        let c = q.space.index_of("c").unwrap();
        assert_eq!(q.space.get(b, c), 3.0);
        assert!(check_quotient_laws(&q, &m, &[0]).unwrap().passed());
    }

    #[test]
    fn collapsing_everything_leaves_one_point() {
        let m = three_point(2.5);
        let q = quotient(&m, &[0, 1, 2]).unwrap();
        assert_eq!(q.space.len(), 1);
        assert_eq!(q.space.label(0), "__theta__");
        assert!(check_quotient_laws(&q, &m, &[0, 1, 2]).unwrap().passed());
    }

    #[test]
    fn empty_subset_is_rejected() {
        let m = three_point(2.5);
        assert!(matches!(quotient(&m, &[]), Err(Error::Domain(_))));
    }

    #[test]
    fn theta_label_avoids_clashes() {
        let m = FinMetricSpace::new(
            vec!["__theta__".into(), "b".into()],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        )
        .unwrap();
        let q = quotient(&m, &[0]).unwrap();
        assert_eq!(q.theta, "__theta__1");
    }

    #[test]
    fn fault_injection_names_the_offender() {
        let m = three_point(2.5);
        let mut q = quotient(&m, &[0]).unwrap();
        // perturb one side of a pair to inject asymmetry
        let mut rows = q.space.to_rows();
        rows[0][1] += 0.5;
        q.space = FinMetricSpace::new(q.space.labels().to_vec(), rows).unwrap();
        let rep = check_quotient_laws(&q, &m, &[0]).unwrap();
        assert!(!rep.passed());
        let failing = rep.first_failure().unwrap();
        let witness = failing.witness.clone().unwrap_or_default();
        assert!(witness.contains('b') || witness.contains('c'), "{witness}");
    }

    #[test]
    fn random_instances_pass_all_laws() {
        // deterministic pseudo-random euclidean instances
        let mut seed = 0x9E3779B97F4A7C15u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for round in 0..50 {
            let n = 20;
            let pts: Vec<(f64, f64)> = (0..n).map(|_| (next(), next())).collect();
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let dx = pts[i].0 - pts[j].0;
                            let dy = pts[i].1 - pts[j].1;
                            (dx * dx + dy * dy).sqrt()
                        })
                        .collect()
                })
                .collect();
            let m =
                FinMetricSpace::new((0..n).map(|i| format!("p{i}")).collect(), rows).unwrap();
            let k = 1 + (round % 7);
            let subset: Vec<usize> = (0..k).map(|i| (i * 3) % n).collect();
            let q = quotient(&m, &subset).unwrap();
            let rep = check_quotient_laws(&q, &m, &subset).unwrap();
            assert!(rep.passed(), "round {round}: {rep}");
        }
    }
}
