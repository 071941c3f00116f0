//! Distances between metrics on one label set, and named collections of
//! such metrics.
//!
//! Two distances are provided. The sup distance is the largest pointwise
//! gap between two metrics. The ultrametric distance of two ultrametrics
//! relative to a scale set `S` is the least `eps` in `S` such that each
//! metric is bounded by the other joined with `eps`; on a finite space
//! that is the ceiling in `S` of the largest value either metric takes on
//! a pair where they disagree.

use crate::error::{Error, Result};
use crate::num::rel_eq;
use crate::scale::{ExtReal, ScaleSet};
use crate::space::FinMetricSpace;

fn require_same_labels(d: &FinMetricSpace, e: &FinMetricSpace) -> Result<()> {
    if d.labels() != e.labels() {
        return Err(Error::structural(
            "metrics must share an identical label sequence",
        ));
    }
    Ok(())
}

/// Largest pointwise absolute difference between two metrics.
pub fn sup_distance(d: &FinMetricSpace, e: &FinMetricSpace) -> Result<f64> {
    require_same_labels(d, e)?;
    let n = d.len();
    let mut m = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            m = m.max((d.get(i, j) - e.get(i, j)).abs());
        }
    }
    Ok(m)
}

/// Ultrametric distance of two ultrametrics relative to a characteristic
/// scale set: 0 when they agree everywhere, otherwise the ceiling in `S`
/// of `max{ d(x,y) ∨ e(x,y) : d(x,y) ≠ e(x,y) }`.
///
/// Non-characteristic (explicit) scale sets are rejected: they would force
/// a positive distance between equal metrics and break the identity axiom.
pub fn ultra_distance(d: &FinMetricSpace, e: &FinMetricSpace, s: &ScaleSet) -> Result<ExtReal> {
    require_same_labels(d, e)?;
    if !s.is_characteristic() {
        return Err(Error::domain(
            "ultrametric distance needs a characteristic scale set",
        ));
    }
    for (name, m) in [("first", d), ("second", e)] {
        if !m.validate().is_ultrametric {
            return Err(Error::domain(format!("{name} argument is not an ultrametric")));
        }
    }
    let n = d.len();
    let mut raw = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            let a = d.get(i, j);
            let b = e.get(i, j);
            if !rel_eq(a, b) {
                raw = raw.max(a.max(b));
            }
        }
    }
    if raw == 0.0 {
        return Ok(ExtReal::Finite(0.0));
    }
    s.ceiling(raw)
}

/// A named collection of metrics over one shared label sequence. Every
/// member must pass the metric axioms on insertion.
#[derive(Debug, Clone)]
pub struct MetricFamily {
    labels: Vec<String>,
    members: Vec<(String, FinMetricSpace)>,
}

impl MetricFamily {
    pub fn new(labels: Vec<String>) -> Self {
        MetricFamily {
            labels,
            members: Vec::new(),
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn insert(&mut self, name: impl Into<String>, space: FinMetricSpace) -> Result<()> {
        let name = name.into();
        if space.labels() != self.labels {
            return Err(Error::structural(format!(
                "member {name:?} does not share the family label sequence"
            )));
        }
        if self.members.iter().any(|(n, _)| *n == name) {
            return Err(Error::structural(format!("duplicate member name {name:?}")));
        }
        if !space.validate().is_metric {
            return Err(Error::domain(format!("member {name:?} is not a metric")));
        }
        self.members.push((name, space));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&FinMetricSpace> {
        self.members
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| m)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &FinMetricSpace)> {
        self.members.iter().map(|(n, m)| (n.as_str(), m))
    }

    /// Sup distances between all member pairs, in member order.
    pub fn sup_distance_table(&self) -> Result<Vec<Vec<f64>>> {
        let k = self.members.len();
        let mut out = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in i + 1..k {
                let d = sup_distance(&self.members[i].1, &self.members[j].1)?;
                out[i][j] = d;
                out[j][i] = d;
            }
        }
        Ok(out)
    }
}
