//! Seeded invariant suites runnable from the command line and from the
//! acceptance tests.
//!
//! Each suite walks a deterministic battery of instances (three named
//! fixtures plus seeded random spaces with random non-empty subsets),
//! re-derives the laws it owns on every instance, and aggregates the
//! worst slack per named check. The first failing instance is serialized
//! as a counterexample that replays to the same failure under the same
//! seed. Reports contain no timing or environment data, so a fixed seed
//! reproduces them byte for byte.

use serde::Serialize;

use crate::dimension::{
    adim_estimate, covering_number, default_scales, packing_number, packing_slope,
    product_covering_check, scale_profile, sparse_ultrametric, standard_scale_pairs,
    ubdim_estimate, CountMode, EXACT_LIMIT,
};
use crate::error::{Error, Result};
use crate::factorize::FactorizationContext;
use crate::family::{sup_distance, ultra_distance};
use crate::format::SpaceFile;
use crate::gen::{generate, GenKind, GenSpec, Xorshift64Star};
use crate::num::{eq_slack, le_slack};
use crate::quotient::{check_quotient_laws, quotient};
use crate::report::Report;
use crate::retraction::{retract_bdhm, retract_engelking, verify_retraction};
use crate::scale::ScaleSet;
use crate::space::{join_metrics, FinMetricSpace, ProductNorm};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    QuotientLaws,
    RetractionCertificates,
    ExtensorContracts,
    DimensionProfile,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::QuotientLaws => "quotient-laws",
            Suite::RetractionCertificates => "retraction-certificates",
            Suite::ExtensorContracts => "extensor-contracts",
            Suite::DimensionProfile => "dimension-profile",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "quotient-laws" => Some(Suite::QuotientLaws),
            "retraction-certificates" => Some(Suite::RetractionCertificates),
            "extensor-contracts" => Some(Suite::ExtensorContracts),
            "dimension-profile" => Some(Suite::DimensionProfile),
            _ => None,
        }
    }

    pub fn all() -> [Suite; 4] {
        [
            Suite::QuotientLaws,
            Suite::RetractionCertificates,
            Suite::ExtensorContracts,
            Suite::DimensionProfile,
        ]
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CheckConfig {
    pub instances: u32,
    pub seed: u64,
    pub max_size: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            instances: 50,
            seed: 7,
            max_size: 24,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub instances_requested: u32,
    pub max_size: usize,
    pub instances_checked: u32,
    pub passed: bool,
    pub checks: Vec<crate::report::Check>,
    pub counterexample: Option<Counterexample>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub instance: String,
    pub subset: Vec<String>,
    pub failed_check: String,
    pub witness: Option<String>,
    pub space: SpaceFile,
}

/// One battery entry: a space, a non-empty subset, and a seed for any
/// auxiliary randomness the suites need on top of it.
#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub space: FinMetricSpace,
    pub subset: Vec<usize>,
    pub aux_seed: u64,
}

fn random_subset(rng: &mut Xorshift64Star, n: usize) -> Vec<usize> {
    let k = 1 + rng.next_index(n);
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + rng.next_index(n - i);
        pool.swap(i, j);
    }
    let mut subset = pool[..k].to_vec();
    subset.sort_unstable();
    subset
}

/// Named fixtures shared by every suite battery.
fn fixtures(rng: &mut Xorshift64Star) -> Vec<Instance> {
    let specs = [
        ("cantor(8)", GenKind::Cantor { depth: 8 }, 0u64),
        ("line(16)", GenKind::Line { n: 16, step: 1.0 }, 0),
        (
            "random_ultra(32)",
            GenKind::RandomUltra {
                n: 32,
                height_base: 2.0,
            },
            11,
        ),
    ];
    specs
        .into_iter()
        .map(|(name, kind, seed)| {
            let space = generate(&GenSpec { kind, seed }).expect("fixture generation");
            let subset = random_subset(rng, space.len());
            Instance {
                name: name.to_string(),
                space,
                subset,
                aux_seed: rng.next_u64(),
            }
        })
        .collect()
}

/// Deterministic battery: the named fixtures followed by `count` seeded
/// random instances of size between 2 and `max_size`.
pub fn battery(seed: u64, count: u32, max_size: usize, with_fixtures: bool) -> Vec<Instance> {
    let mut rng = Xorshift64Star::new(seed);
    let max_size = max_size.max(2);
    let mut out = if with_fixtures {
        fixtures(&mut rng)
    } else {
        Vec::new()
    };
    for i in 0..count {
        let n = 2 + rng.next_index(max_size - 1);
        let kind = match i % 4 {
            0 => GenKind::RandomMetric {
                n,
                ambient_dim: 1 + (i as usize / 4) % 3,
            },
            1 => GenKind::RandomUltra {
                n,
                height_base: 2.0,
            },
            2 => GenKind::RandomMetric { n, ambient_dim: 2 },
            _ => GenKind::RandomUltra {
                n,
                height_base: 3.0,
            },
        };
        let gen_seed = rng.next_u64();
        let space = generate(&GenSpec {
            kind: kind.clone(),
            seed: gen_seed,
        })
        .expect("battery generation");
        let subset = random_subset(&mut rng, n);
        out.push(Instance {
            name: format!("random#{i} {kind:?} seed {gen_seed}"),
            space,
            subset,
            aux_seed: rng.next_u64(),
        });
    }
    out
}

pub fn run_suite(suite: Suite, cfg: &CheckConfig) -> SuiteReport {
    let instances = match suite {
        Suite::DimensionProfile => battery(cfg.seed, cfg.instances, cfg.max_size.min(12), false),
        _ => battery(cfg.seed, cfg.instances, cfg.max_size, true),
    };
    let check = |inst: &Instance| -> Result<Report> {
        match suite {
            Suite::QuotientLaws => quotient_laws(inst),
            Suite::RetractionCertificates => retraction_certificates(inst),
            Suite::ExtensorContracts => extensor_contracts(inst),
            Suite::DimensionProfile => dimension_profile(inst),
        }
    };

    let mut aggregated = Report::new();
    let mut counterexample = None;
    let mut checked = 0u32;
    for inst in &instances {
        let rep = match check(inst) {
            Ok(rep) => rep,
            Err(e) => {
                let mut rep = Report::new();
                rep.require("suite_evaluation", false, || e.to_string());
                rep
            }
        };
        checked += 1;
        let failed = rep.first_failure().map(|c| (c.name.clone(), c.witness.clone()));
        aggregated.merge(rep);
        if let Some((name, witness)) = failed {
            counterexample = Some(Counterexample {
                instance: inst.name.clone(),
                subset: inst
                    .subset
                    .iter()
                    .map(|&i| inst.space.label(i).to_string())
                    .collect(),
                failed_check: name,
                witness,
                space: SpaceFile::from_space(&inst.space),
            });
            break;
        }
    }

    if suite == Suite::DimensionProfile && counterexample.is_none() {
        let rep = dimension_fixture_report();
        let failed = rep.first_failure().map(|c| (c.name.clone(), c.witness.clone()));
        aggregated.merge(rep);
        if let Some((name, witness)) = failed {
            counterexample = Some(Counterexample {
                instance: "dimension fixtures".into(),
                subset: Vec::new(),
                failed_check: name,
                witness,
                space: SpaceFile::from_space(
                    &generate(&GenSpec {
                        kind: GenKind::Cantor { depth: 6 },
                        seed: 0,
                    })
                    .unwrap(),
                ),
            });
        }
    }

    SuiteReport {
        suite: suite.name().to_string(),
        seed: cfg.seed,
        instances_requested: cfg.instances,
        max_size: cfg.max_size,
        instances_checked: checked,
        passed: aggregated.passed() && counterexample.is_none(),
        checks: aggregated.checks,
        counterexample,
    }
}

/// Quotient laws for one instance.
pub fn quotient_laws(inst: &Instance) -> Result<Report> {
    let q = quotient(&inst.space, &inst.subset)?;
    check_quotient_laws(&q, &inst.space, &inst.subset)
}

/// Scale-decomposition certificates for one instance.
pub fn engelking_certificates(inst: &Instance) -> Result<Report> {
    let spectrum = inst.space.distance_spectrum();
    let r = retract_engelking(&inst.space, &inst.subset)?;
    verify_retraction(&inst.space, &inst.subset, &r, &spectrum)
}

/// Order-based certificates at tau in {1.5, 2, 4}; trivial on
/// non-ultrametric instances.
pub fn bdhm_certificates(inst: &Instance) -> Result<Report> {
    let mut rep = Report::new();
    if !inst.space.validate().is_ultrametric {
        return Ok(rep);
    }
    let spectrum = inst.space.distance_spectrum();
    for tau in [1.5, 2.0, 4.0] {
        let r = retract_bdhm(&inst.space, &inst.subset, tau)?;
        rep.merge(verify_retraction(&inst.space, &inst.subset, &r, &spectrum)?);
    }
    Ok(rep)
}

fn retraction_certificates(inst: &Instance) -> Result<Report> {
    let mut rep = engelking_certificates(inst)?;
    rep.merge(bdhm_certificates(inst)?);
    Ok(rep)
}

fn relabeled_random(kind: GenKind, seed: u64, labels: Vec<String>) -> Result<FinMetricSpace> {
    generate(&GenSpec { kind, seed })?.with_labels(labels)
}

/// Embedding contract for one instance: subset members land on
/// `(self, theta)` and the table is injective.
pub fn embedding_report(inst: &Instance) -> Result<Report> {
    let mut rep = Report::new();
    let m = &inst.space;
    let subset = &inst.subset;
    let ctx = FactorizationContext::new(m.clone(), subset)?;
    let theta = ctx.quotient().theta_index();

    let table = ctx.embedding();
    for row in &table {
        if subset.contains(&row.point) {
            rep.require(
                "embedding_fixes_subset",
                row.anchor == row.point && row.class == theta,
                || format!("{} embeds as ({}, {})", m.label(row.point), m.label(row.anchor), row.class),
            );
        }
    }
    let mut images: Vec<(usize, usize)> = table.iter().map(|r| (r.anchor, r.class)).collect();
    images.sort_unstable();
    images.dedup();
    rep.require("embedding_injective", images.len() == m.len(), || {
        format!("{} distinct images for {} points", images.len(), m.len())
    });
    Ok(rep)
}

/// Subset density of both extensions after truncating the factor metric.
pub fn eta_density_report(inst: &Instance) -> Result<Report> {
    let mut rep = Report::new();
    let m = &inst.space;
    let subset = &inst.subset;
    let ctx = FactorizationContext::new(m.clone(), subset)?;
    let d = relabeled_random(
        GenKind::RandomMetric {
            n: subset.len(),
            ambient_dim: 2,
        },
        inst.aux_seed ^ 0xE7A,
        subset.iter().map(|&a| m.label(a).to_string()).collect(),
    )?;
    for eta in [0.1, 1.0] {
        let ctx_eta = ctx.clone().truncate_factor(eta)?;
        for (tag, ext) in [
            ("l1", ctx_eta.extend_l1(&d)?),
            ("sup", ctx_eta.extend_linf(&d, None)?),
        ] {
            let sep = ext.separated_and_dense(subset, 0.0, eta)?;
            rep.require("eta_density_after_truncation", sep.is_eta_dense, || {
                format!("{tag} extension at eta {eta}: covering radius {}", sep.covering_radius)
            });
        }
    }
    Ok(rep)
}

/// Extension operator contracts for one instance: restriction, sup and
/// ultrametric isometry, monotonicity, join morphism, and scale-set
/// closure on the ultrametric route.
pub fn extensor_report(inst: &Instance) -> Result<Report> {
    let mut rep = Report::new();
    let m = &inst.space;
    let subset = &inst.subset;
    let ctx = FactorizationContext::new(m.clone(), subset)?;

    let sub_labels: Vec<String> = subset.iter().map(|&a| m.label(a).to_string()).collect();
    let nf = subset.len();
    let mut rng = Xorshift64Star::new(inst.aux_seed);

    // generic pair d <= e via the pointwise join
    let d = relabeled_random(
        GenKind::RandomMetric {
            n: nf,
            ambient_dim: 2,
        },
        rng.next_u64(),
        sub_labels.clone(),
    )?;
    let d2 = relabeled_random(
        GenKind::RandomMetric {
            n: nf,
            ambient_dim: 2,
        },
        rng.next_u64(),
        sub_labels.clone(),
    )?;
    let e = join_metrics(&d, &d2)?;

    let ext_d = ctx.extend_l1(&d)?;
    let ext_e = ctx.extend_l1(&e)?;

    rep.require("l1_extension_is_metric", ext_d.validate().is_metric, || {
        "extension broke the metric axioms".into()
    });
    rep.require(
        "l1_restriction_exact",
        ext_d.restrict(subset).map(|r| r.matrix_eq(&d)).unwrap_or(false),
        || "restriction to the subset differs from the input".into(),
    );
    rep.observe(
        "l1_sup_isometry",
        eq_slack(
            sup_distance(&ext_d, &ext_e)?,
            sup_distance(&d, &e)?,
        ),
        || "sup distance not preserved".into(),
    );
    for x in 0..m.len() {
        for y in 0..m.len() {
            rep.observe(
                "l1_monotone",
                le_slack(ext_d.get(x, y), ext_e.get(x, y)),
                || format!("pair ({},{})", m.label(x), m.label(y)),
            );
        }
    }
    let join_f = join_metrics(&d, &e)?;
    let lhs = ctx.extend_l1(&join_f)?;
    let rhs = join_metrics(&ext_d, &ext_e)?;
    rep.require("l1_join_morphism", lhs.matrix_eq(&rhs), || {
        "extension of the join differs from the join of extensions".into()
    });

    // sup extension restriction holds with the default factor as well
    let sup_d = ctx.extend_linf(&d, None)?;
    rep.require(
        "sup_restriction_exact",
        sup_d.restrict(subset).map(|r| r.matrix_eq(&d)).unwrap_or(false),
        || "sup restriction differs from the input".into(),
    );

    // ultrametric route: ultra base, ultra subset metrics, ultra factor
    if m.validate().is_ultrametric {
        let du = relabeled_random(
            GenKind::RandomUltra {
                n: nf,
                height_base: 2.0,
            },
            rng.next_u64(),
            sub_labels.clone(),
        )?;
        let du2 = relabeled_random(
            GenKind::RandomUltra {
                n: nf,
                height_base: 2.0,
            },
            rng.next_u64(),
            sub_labels.clone(),
        )?;
        let eu = join_metrics(&du, &du2)?;
        let v = relabeled_random(
            GenKind::RandomUltra {
                n: ctx.quotient().space.len(),
                height_base: 2.0,
            },
            rng.next_u64(),
            ctx.quotient().space.labels().to_vec(),
        )?;
        let ctx_u = ctx.clone().set_factor(v)?;
        let geo = ScaleSet::geometric(0.5).unwrap();

        let sig_d = ctx_u.extend_linf(&du, Some(&geo))?;
        let sig_e = ctx_u.extend_linf(&eu, Some(&geo))?;
        rep.require(
            "sup_ultra_restriction_exact",
            sig_d
                .restrict(subset)
                .map(|r| r.matrix_eq(&du))
                .unwrap_or(false),
            || "ultrametric restriction differs".into(),
        );
        rep.require(
            "sup_preserves_ultrametric",
            sig_d.validate().is_ultrametric,
            || "sup extension of an ultrametric lost the strong triangle".into(),
        );
        let mut off_scale = 0usize;
        for i in 0..sig_d.len() {
            for j in i + 1..sig_d.len() {
                if !geo.contains(sig_d.get(i, j)) {
                    off_scale += 1;
                }
            }
        }
        rep.require("sup_values_stay_in_scale_set", off_scale == 0, || {
            format!("{off_scale} entries left the scale set")
        });

        for (tag, set) in [("geometric", &geo), ("all_reals", &ScaleSet::all_reals())] {
            let lhs = ultra_distance(&sig_d, &sig_e, set)?;
            let rhs = ultra_distance(&du, &eu, set)?;
            rep.require("sup_ultra_isometry", lhs.approx_eq(rhs), || {
                format!("{tag}: {lhs} vs {rhs}")
            });
        }

        for x in 0..m.len() {
            for y in 0..m.len() {
                rep.observe(
                    "sup_monotone",
                    le_slack(sig_d.get(x, y), sig_e.get(x, y)),
                    || format!("pair ({},{})", m.label(x), m.label(y)),
                );
            }
        }
        let join_u = join_metrics(&du, &eu)?;
        let lhs = ctx_u.extend_linf(&join_u, Some(&geo))?;
        let rhs = join_metrics(&sig_d, &sig_e)?;
        rep.require("sup_join_morphism", lhs.matrix_eq(&rhs), || {
            "sup extension of the join differs from the join of extensions".into()
        });
    }

    Ok(rep)
}

fn extensor_contracts(inst: &Instance) -> Result<Report> {
    let mut rep = embedding_report(inst)?;
    rep.merge(extensor_report(inst)?);
    rep.merge(eta_density_report(inst)?);
    Ok(rep)
}

/// Exact/greedy bracketing and profile inequalities for one small instance.
pub fn dimension_profile(inst: &Instance) -> Result<Report> {
    let mut rep = Report::new();
    let m = &inst.space;
    if m.len() > EXACT_LIMIT {
        return Err(Error::capacity("dimension battery instances must stay exact"));
    }
    let spectrum = m.distance_spectrum();
    if spectrum.is_empty() {
        return Ok(rep);
    }
    let exact = scale_profile(m, &spectrum, CountMode::Exact)?;
    rep.merge(exact.check_invariants());
    let n = m.len() as f64;
    for entry in &exact.entries {
        let g_cov = covering_number(m, entry.radius, CountMode::Greedy)?;
        let g_pack = packing_number(m, entry.radius, CountMode::Greedy)?;
        rep.require("greedy_brackets_exact", g_cov >= entry.covering && g_pack <= entry.packing, || {
            format!(
                "r = {}: greedy ({g_cov}, {g_pack}) vs exact ({}, {})",
                entry.radius, entry.covering, entry.packing
            )
        });
        rep.require(
            "greedy_cover_log_bound",
            (g_cov as f64) <= (1.0 + n.ln()) * entry.covering as f64,
            || format!("r = {}: greedy {} vs exact {}", entry.radius, g_cov, entry.covering),
        );
    }
    Ok(rep)
}

/// Fixture checks for the dimension estimators: exact box slopes on the
/// middle-thirds and integer-line fixtures, the near-zero doubling probe
/// of the sparse-scale ultrametric, packing/covering slope agreement, and
/// the product covering bound on four-point factors.
pub fn dimension_fixture_report() -> Report {
    let mut rep = Report::new();
    let mut run = || -> Result<()> {
        let cantor8 = generate(&GenSpec {
            kind: GenKind::Cantor { depth: 8 },
            seed: 0,
        })?;
        let scales = default_scales(&cantor8, 3.0);
        let fit = ubdim_estimate(&cantor8, &scales)?;
        let expected = 2f64.ln() / 3f64.ln();
        rep.observe("cantor8_box_slope", (fit.slope - expected).abs() - 0.02, || {
            format!("slope {} vs {}", fit.slope, expected)
        });

        let line16 = generate(&GenSpec {
            kind: GenKind::Line { n: 16, step: 1.0 },
            seed: 0,
        })?;
        let scales = default_scales(&line16, 2.0);
        let fit_line16 = ubdim_estimate(&line16, &scales)?;
        rep.observe("line16_box_slope", (fit_line16.slope - 1.0).abs() - 0.05, || {
            format!("slope {}", fit_line16.slope)
        });

        // packing and covering slopes agree on the fixtures
        let cantor6 = generate(&GenSpec {
            kind: GenKind::Cantor { depth: 6 },
            seed: 0,
        })?;
        for (name, m, base) in [("cantor6", &cantor6, 3.0), ("line16", &line16, 2.0)] {
            let scales = default_scales(m, base);
            let cover = ubdim_estimate(m, &scales)?.slope;
            let pack = packing_slope(m, &scales)?.slope;
            rep.observe("pack_vs_cover_slope_agreement", (cover - pack).abs() - 0.1, || {
                format!("{name}: cover {cover} vs pack {pack}")
            });
        }

        let sparse = sparse_ultrametric(&cantor6)?;
        rep.require("sparse_output_is_ultrametric", sparse.validate().is_ultrametric, || {
            "sparse remap broke the strong triangle".into()
        });
        let est = adim_estimate(&sparse, &standard_scale_pairs(&sparse))?;
        rep.observe("sparse_cantor6_doubling_probe", est.value - 0.1, || {
            format!("estimate {}", est.value)
        });

        let four = generate(&GenSpec {
            kind: GenKind::Line { n: 4, step: 1.0 },
            seed: 0,
        })?;
        let prod = product_covering_check(&four, &four, ProductNorm::Linf, &[])?;
        rep.require("product_covering_bound", prod.passed, || {
            "a product covering count exceeded the factor product".into()
        });
        Ok(())
    };
    if let Err(e) = run() {
        rep.require("dimension_fixture_evaluation", false, || e.to_string());
    }
    rep
}
