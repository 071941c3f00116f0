//! Single-linkage merge structure of a finite metric space.
//!
//! Built from a minimum spanning tree processed in ascending edge order
//! (ties broken by index pairs, so the result is deterministic). The
//! associated ultrametric assigns to each pair the largest edge weight on
//! their tree path, i.e. the height at which their clusters merge. For an
//! input that is already an ultrametric this reproduces the input.

use crate::error::Result;
use crate::num::rel_eq;
use crate::space::FinMetricSpace;

#[derive(Debug, Clone)]
pub struct Dendrogram {
    n: usize,
    /// Minimax (merge-height) distance matrix, row-major.
    ultra: Vec<f64>,
    /// Distinct merge heights, ascending.
    heights: Vec<f64>,
}

pub fn single_linkage(m: &FinMetricSpace) -> Dendrogram {
    let n = m.len();
    let mut edges: Vec<(f64, usize, usize)> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            edges.push((m.get(i, j), i, j));
        }
    }
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut parent: Vec<usize> = (0..n).collect();
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }

    let mut ultra = vec![0.0; n * n];
    let mut heights: Vec<f64> = Vec::new();
    let mut merges = 0usize;
    for (w, i, j) in edges {
        if merges == n.saturating_sub(1) {
            break;
        }
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri == rj {
            continue;
        }
        // weights within the global tolerance count as one height; the
        // first weight of a group stands for it, so matrix entries always
        // equal a recorded height exactly
        let w = match heights.last() {
            Some(&h) if rel_eq(h, w) => h,
            _ => {
                heights.push(w);
                w
            }
        };
        for &a in &members[ri] {
            for &b in &members[rj] {
                ultra[a * n + b] = w;
                ultra[b * n + a] = w;
            }
        }
        // merge into the smaller root index for determinism
        let (keep, drop) = if ri < rj { (ri, rj) } else { (rj, ri) };
        let moved = std::mem::take(&mut members[drop]);
        members[keep].extend(moved);
        parent[drop] = keep;
        merges += 1;
    }

    Dendrogram { n, ultra, heights }
}

impl Dendrogram {
    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn merge_distance(&self, i: usize, j: usize) -> f64 {
        self.ultra[i * self.n + j]
    }

    /// The minimax ultrametric under the given labels.
    pub fn ultrametric(&self, labels: Vec<String>) -> Result<FinMetricSpace> {
        FinMetricSpace::from_flat(labels, self.ultra.clone())
    }

    /// Matrix with every merge height replaced by `values[height rank]`.
    /// `values` must be positive and increasing to preserve the merge order.
    pub fn remapped(&self, labels: Vec<String>, values: &[f64]) -> Result<FinMetricSpace> {
        assert_eq!(values.len(), self.heights.len());
        let dist: Vec<f64> = self
            .ultra
            .iter()
            .map(|&h| {
                if h == 0.0 {
                    0.0
                } else {
                    let k = self
                        .heights
                        .binary_search_by(|probe| probe.partial_cmp(&h).unwrap())
                        .expect("every matrix entry is a recorded height");
                    values[k]
                }
            })
            .collect();
        FinMetricSpace::from_flat(labels, dist)
    }

    /// Clusters at the given height: classes of merge distance `<= h`,
    /// each sorted, ordered by least member.
    pub fn clusters_at(&self, h: f64) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for i in 0..self.n {
            if seen[i] {
                continue;
            }
            let mut cluster = Vec::new();
            for j in 0..self.n {
                if !seen[j] && (j == i || self.merge_distance(i, j) <= h) {
                    cluster.push(j);
                    seen[j] = true;
                }
            }
            out.push(cluster);
        }
        out
    }
}
