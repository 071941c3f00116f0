//! Constructive retractions onto a subset, with quantitative certificates.
//!
//! Two constructions are provided. The scale-decomposition (Engelking)
//! retraction works on any metric: the space is sliced into dyadic annuli
//! by distance to the subset, each annulus is partitioned greedily into
//! pieces of diameter at most the annulus scale, and each piece is sent to
//! a nearby point of a nested maximal separated net inside the subset.
//! The order-based (BDHM) retraction works on ultrametrics: each point is
//! sent to the least-labeled subset point within `tau` times its
//! set-distance.
//!
//! Both retractions come with machine-checkable certificates:
//!
//! * displacement bounds: `d(x, r(x)) <= rho(x) + 2^(2-M(x))` and
//!   `d(x, r(x)) <= 17 * rho(x)` for the scale decomposition (`M(x)` is
//!   the annulus index of `x`), `d(x, r(x)) <= tau * rho(x)` for the
//!   order-based one;
//! * image discreteness: points at set-distance `>= 2^-i` land in the
//!   level-`i` net, and for ultrametrics the image of
//!   `{rho >= eps}` is `eps`-separated;
//! * `tau^2`-Lipschitz continuity of the order-based retraction.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::num::{le_slack, pow2};
use crate::report::Report;
use crate::space::FinMetricSpace;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RetractionMethod {
    Engelking,
    Bdhm { tau: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct Retraction {
    /// Image point index for every point; subset members map to themselves.
    pub mapping: Vec<usize>,
    pub method: RetractionMethod,
    pub trace: Option<EngelkingTrace>,
}

/// Audit record of the scale-decomposition construction.
#[derive(Debug, Clone, Serialize)]
pub struct EngelkingTrace {
    pub subset: Vec<usize>,
    pub levels: Vec<TraceLevel>,
    /// For every point outside the subset, its (level, piece) slot.
    pub assignment: Vec<Option<(usize, usize)>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceLevel {
    pub index: usize,
    /// The level scale 2^-index.
    pub radius: f64,
    /// Points at set-distance `<= radius/2`.
    pub v_set: Vec<usize>,
    /// Annulus handled at this level: previous v-set minus this one.
    pub annulus: Vec<usize>,
    /// Maximal `radius`-separated net inside the subset, nested across levels.
    pub net: Vec<usize>,
    pub pieces: Vec<TracePiece>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TracePiece {
    /// Piece members; pairwise within the level scale.
    pub members: Vec<usize>,
    /// Greedy ball center the piece was grown from.
    pub seed: usize,
    /// Piece point attaining the least distance to the subset.
    pub anchor_point: usize,
    /// Subset point attaining that least distance.
    pub anchor_subset: usize,
    /// Net point every member is mapped to.
    pub net_point: usize,
    /// The attained minimum distance from the piece to the subset.
    pub min_subset_distance: f64,
}

impl Retraction {
    pub fn fixes(&self, subset: &[usize]) -> bool {
        subset.iter().all(|&a| self.mapping[a] == a)
    }
}

/// Annulus index of a point at set-distance `rho`: 0 for `rho > 1/2`,
/// otherwise the `i >= 1` with `2^-(i+1) < rho <= 2^-i`.
pub fn annulus_index(rho: f64) -> usize {
    debug_assert!(rho > 0.0);
    if rho > 0.5 {
        return 0;
    }
    let mut i = 1;
    while rho <= pow2(-(i as i32 + 1)) {
        i += 1;
    }
    i
}

/// Nested maximal separated nets in the subset: level `i` is maximal
/// `2^-i`-separated and extends level `i-1`. Greedy in index order.
fn nested_nets(m: &FinMetricSpace, subset: &[usize], levels: usize) -> Vec<Vec<usize>> {
    let mut nets: Vec<Vec<usize>> = Vec::with_capacity(levels);
    let mut current: Vec<usize> = Vec::new();
    for i in 0..levels {
        let sep = pow2(-(i as i32));
        for &a in subset {
            if current.iter().all(|&p| m.get(a, p) >= sep) {
                current.push(a);
            }
        }
        nets.push(current.clone());
    }
    nets
}

/// Scale-decomposition retraction onto `subset`, with a full audit trace.
pub fn retract_engelking(m: &FinMetricSpace, subset: &[usize]) -> Result<Retraction> {
    let subset = m.check_subset(subset)?;
    let n = m.len();
    let rho = m.dist_to_set_all(&subset)?;
    let outside = m.complement(&subset);

    let min_rho_off = outside
        .iter()
        .map(|&x| rho[x])
        .fold(f64::INFINITY, f64::min);

    // levels run until the closed (2^-i-1)-neighborhood of the subset is
    // the subset itself
    let mut i_max = 0usize;
    while pow2(-(i_max as i32 + 1)) >= min_rho_off {
        i_max += 1;
    }

    let nets = nested_nets(m, &subset, i_max + 1);

    let mut mapping: Vec<usize> = (0..n).collect();
    let mut assignment: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut levels: Vec<TraceLevel> = Vec::with_capacity(i_max + 1);

    let mut prev_v: Vec<bool> = vec![true; n];
    for i in 0..=i_max {
        let radius = pow2(-(i as i32));
        let half = pow2(-(i as i32 + 1));
        let v: Vec<bool> = (0..n).map(|x| rho[x] <= half).collect();
        let annulus: Vec<usize> = (0..n).filter(|&x| prev_v[x] && !v[x]).collect();

        let mut pieces: Vec<TracePiece> = Vec::new();
        let mut assigned = vec![false; n];
        for &seed in &annulus {
            if assigned[seed] {
                continue;
            }
            // greedy ball of radius 2^-(i+1) keeps the piece diameter <= 2^-i
            let members: Vec<usize> = annulus
                .iter()
                .copied()
                .filter(|&u| !assigned[u] && m.get(seed, u) <= half)
                .collect();
            for &u in &members {
                assigned[u] = true;
            }

            let mut best = (f64::INFINITY, members[0], subset[0]);
            for &o in &members {
                for &a in &subset {
                    let d = m.get(o, a);
                    if d < best.0 {
                        best = (d, o, a);
                    }
                }
            }
            let (min_d, anchor_point, anchor_subset) = best;
            let net_point = nets[i]
                .iter()
                .copied()
                .find(|&p| m.get(anchor_subset, p) < radius)
                .expect("a maximal separated net reaches every subset point");

            for &u in &members {
                mapping[u] = net_point;
                assignment[u] = Some((i, pieces.len()));
            }
            pieces.push(TracePiece {
                members,
                seed,
                anchor_point,
                anchor_subset,
                net_point,
                min_subset_distance: min_d,
            });
        }

        levels.push(TraceLevel {
            index: i,
            radius,
            v_set: (0..n).filter(|&x| v[x]).collect(),
            annulus,
            net: nets[i].clone(),
            pieces,
        });
        prev_v = v;
    }

    Ok(Retraction {
        mapping,
        method: RetractionMethod::Engelking,
        trace: Some(EngelkingTrace {
            subset,
            levels,
            assignment,
        }),
    })
}

/// Order-based retraction onto a subset of an ultrametric space: each
/// point goes to the least-index subset point within `tau` times its
/// set-distance.
pub fn retract_bdhm(m: &FinMetricSpace, subset: &[usize], tau: f64) -> Result<Retraction> {
    if !(tau > 1.0) {
        return Err(Error::domain(format!("tau must exceed 1, got {tau}")));
    }
    if !m.validate().is_ultrametric {
        return Err(Error::domain("order-based retraction needs an ultrametric"));
    }
    let subset = m.check_subset(subset)?;
    let rho = m.dist_to_set_all(&subset)?;
    let mut inside = vec![false; m.len()];
    for &a in &subset {
        inside[a] = true;
    }
    let mut mapping: Vec<usize> = (0..m.len()).collect();
    for x in 0..m.len() {
        if inside[x] {
            continue;
        }
        let limit = tau * rho[x];
        mapping[x] = subset
            .iter()
            .copied()
            .find(|&a| m.get(x, a) <= limit)
            .expect("the nearest subset point is always within tau * rho");
    }
    Ok(Retraction {
        mapping,
        method: RetractionMethod::Bdhm { tau },
        trace: None,
    })
}

fn witness_pair(m: &FinMetricSpace, x: usize, y: usize, detail: String) -> String {
    format!("({},{}) {detail}", m.label(x), m.label(y))
}

/// Re-checks every certificate applicable to the retraction's method over
/// the supplied radius grid, reporting the worst slack per certificate.
///
/// For the scale decomposition, the level nets come from the trace when
/// present and are otherwise rebuilt canonically, so adversarial mappings
/// without a trace are still checkable.
pub fn verify_retraction(
    m: &FinMetricSpace,
    subset: &[usize],
    r: &Retraction,
    eps_grid: &[f64],
) -> Result<Report> {
    let subset = m.check_subset(subset)?;
    let n = m.len();
    if r.mapping.len() != n {
        return Err(Error::structural(format!(
            "mapping covers {} points, space has {}",
            r.mapping.len(),
            n
        )));
    }
    let mut inside = vec![false; n];
    for &a in &subset {
        inside[a] = true;
    }
    let rho = m.dist_to_set_all(&subset)?;
    let mut rep = Report::new();

    for &a in &subset {
        rep.require("fixes_subset", r.mapping[a] == a, || {
            format!("{} moves to {}", m.label(a), m.label(r.mapping[a]))
        });
    }
    for x in 0..n {
        rep.require("range_in_subset", inside[r.mapping[x]], || {
            format!("{} lands outside the subset", m.label(x))
        });
        rep.require("idempotent", r.mapping[r.mapping[x]] == r.mapping[x], || {
            format!("{} is not stabilized after two applications", m.label(x))
        });
    }

    match r.method {
        RetractionMethod::Engelking => {
            for x in 0..n {
                if inside[x] {
                    continue;
                }
                let moved = m.get(x, r.mapping[x]);
                let level = annulus_index(rho[x]);
                let bound = rho[x] + pow2(2 - level as i32);
                rep.observe("displacement_additive", le_slack(moved, bound), || {
                    witness_pair(m, x, r.mapping[x], format!("moved {moved} > {bound}"))
                });
                rep.observe("displacement_17_rho", le_slack(moved, 17.0 * rho[x]), || {
                    witness_pair(m, x, r.mapping[x], format!("moved {moved} > 17*{}", rho[x]))
                });
            }

            let nets: Vec<Vec<usize>> = match &r.trace {
                Some(t) => t.levels.iter().map(|l| l.net.clone()).collect(),
                None => {
                    let min_rho_off = (0..n)
                        .filter(|&x| !inside[x])
                        .map(|x| rho[x])
                        .fold(f64::INFINITY, f64::min);
                    let mut i_max = 0usize;
                    while pow2(-(i_max as i32 + 1)) >= min_rho_off {
                        i_max += 1;
                    }
                    nested_nets(m, &subset, i_max + 1)
                }
            };
            for (i, net) in nets.iter().enumerate() {
                let eps = pow2(-(i as i32));
                for x in 0..n {
                    if !inside[x] && rho[x] >= eps {
                        rep.require("exterior_image_in_net", net.contains(&r.mapping[x]), || {
                            format!(
                                "{} at set-distance {} maps outside the level-{i} net",
                                m.label(x),
                                rho[x]
                            )
                        });
                    }
                }
            }

            if let Some(t) = &r.trace {
                check_trace(m, &subset, r, t, &rho, &mut rep);
            }
        }
        RetractionMethod::Bdhm { tau } => {
            for x in 0..n {
                let moved = m.get(x, r.mapping[x]);
                rep.observe("displacement_tau_rho", le_slack(moved, tau * rho[x]), || {
                    witness_pair(m, x, r.mapping[x], format!("moved {moved} > {tau}*{}", rho[x]))
                });
                for y in x + 1..n {
                    let img = m.get(r.mapping[x], r.mapping[y]);
                    rep.observe(
                        "lipschitz_tau_squared",
                        le_slack(img, tau * tau * m.get(x, y)),
                        || witness_pair(m, x, y, format!("image gap {img}")),
                    );
                }
            }
            let mut grid: Vec<f64> = eps_grid.iter().copied().filter(|&e| e > 0.0).collect();
            grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
            grid.dedup();
            for &eps in &grid {
                let ext: Vec<usize> = (0..n).filter(|&x| rho[x] >= eps).collect();
                for (k, &x) in ext.iter().enumerate() {
                    for &y in &ext[k + 1..] {
                        if r.mapping[x] != r.mapping[y] {
                            let gap = m.get(r.mapping[x], r.mapping[y]);
                            rep.observe("exterior_image_separated", le_slack(eps, gap), || {
                                witness_pair(
                                    m,
                                    x,
                                    y,
                                    format!("images at {gap} < eps {eps}"),
                                )
                            });
                        }
                    }
                }
            }
        }
    }

    Ok(rep)
}

fn check_trace(
    m: &FinMetricSpace,
    subset: &[usize],
    r: &Retraction,
    t: &EngelkingTrace,
    rho: &[f64],
    rep: &mut Report,
) {
    let n = m.len();
    let mut inside = vec![false; n];
    for &a in subset {
        inside[a] = true;
    }

    let mut prev_v: Vec<bool> = vec![true; n];
    let mut prev_net: Vec<usize> = Vec::new();
    let mut covered = vec![false; n];
    for level in &t.levels {
        let i = level.index as i32;
        let radius = level.radius;
        rep.require("trace_radius", radius == pow2(-i), || {
            format!("level {i} radius {radius}")
        });
        let half = pow2(-(i + 1));

        let mut in_v = vec![false; n];
        for &x in &level.v_set {
            in_v[x] = true;
        }
        // sandwich: closed half-neighborhood inside v, v inside the open
        // radius-neighborhood and inside the previous v
        for x in 0..n {
            if rho[x] <= half {
                rep.require("trace_v_contains_closed_neighborhood", in_v[x], || {
                    format!("level {i}: {} missing from v", m.label(x))
                });
            }
            if in_v[x] {
                rep.require("trace_v_inside_open_neighborhood", rho[x] < radius, || {
                    format!("level {i}: {} too far for v", m.label(x))
                });
                rep.require("trace_v_nested", prev_v[x], || {
                    format!("level {i}: {} re-enters v", m.label(x))
                });
            }
        }

        // annulus = previous v minus this v
        let expected: Vec<usize> = (0..n).filter(|&x| prev_v[x] && !in_v[x]).collect();
        rep.require("trace_annulus_formula", level.annulus == expected, || {
            format!("level {i}: annulus differs from previous-v minus v")
        });

        // pieces partition the annulus with the level diameter bound
        let mut seen = vec![false; n];
        for (pi, piece) in level.pieces.iter().enumerate() {
            for &u in &piece.members {
                rep.require("trace_pieces_disjoint", !seen[u], || {
                    format!("level {i} piece {pi}: {} appears twice", m.label(u))
                });
                seen[u] = true;
            }
            for (a, &u) in piece.members.iter().enumerate() {
                for &w in piece.members.iter().skip(a + 1) {
                    rep.observe("trace_piece_diameter", le_slack(m.get(u, w), radius), || {
                        witness_pair(m, u, w, format!("piece diameter beyond {radius}"))
                    });
                }
            }
            // anchors attain the exact minimum distance to the subset
            let mut best = f64::INFINITY;
            for &u in &piece.members {
                for &a in subset {
                    best = best.min(m.get(u, a));
                }
            }
            rep.require(
                "trace_anchor_attains_min",
                piece.min_subset_distance == best
                    && m.get(piece.anchor_point, piece.anchor_subset) == best,
                || format!("level {i} piece {pi}: recorded min {}", piece.min_subset_distance),
            );
            rep.require(
                "trace_anchor_near_net",
                m.get(piece.anchor_subset, piece.net_point) < radius,
                || format!("level {i} piece {pi}: net point beyond the level radius"),
            );
            for &u in &piece.members {
                rep.require("trace_mapping_matches_pieces", r.mapping[u] == piece.net_point, || {
                    format!("level {i} piece {pi}: {} maps elsewhere", m.label(u))
                });
            }
        }
        for &x in &level.annulus {
            rep.require("trace_pieces_cover_annulus", seen[x], || {
                format!("level {i}: {} not in any piece", m.label(x))
            });
            covered[x] = true;
        }

        // nets: separated, maximal, nested
        for (a, &p) in level.net.iter().enumerate() {
            rep.require("trace_net_in_subset", inside[p], || {
                format!("level {i}: net point {} outside subset", m.label(p))
            });
            for &q in level.net.iter().skip(a + 1) {
                rep.require("trace_net_separated", m.get(p, q) >= radius, || {
                    witness_pair(m, p, q, format!("net pair below {radius}"))
                });
            }
        }
        for &a in subset {
            rep.require(
                "trace_net_maximal",
                level.net.iter().any(|&p| m.get(a, p) < radius),
                || format!("level {i}: {} beyond every net point", m.label(a)),
            );
        }
        rep.require(
            "trace_net_nested",
            prev_net.iter().all(|p| level.net.contains(p)),
            || format!("level {i}: net drops an earlier point"),
        );

        prev_net = level.net.clone();
        prev_v = in_v;
    }

    for x in 0..n {
        if !inside[x] {
            rep.require("trace_annuli_exhaust_complement", covered[x], || {
                format!("{} belongs to no annulus", m.label(x))
            });
        }
    }
}
