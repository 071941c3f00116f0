//! Command-line front end: load and save spaces, run quotients,
//! retractions, embeddings, extensions, and dimension estimates, and
//! drive the seeded invariant suites.
//!
//! Exit codes: 0 on success, 1 when a contract check fails (a failing
//! suite or a non-metric input to `validate`), 2 on malformed input.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use finmet::check::{run_suite, CheckConfig, Suite};
use finmet::dimension::{
    adim_estimate, default_scales, packing_slope, standard_scale_pairs, ubdim_estimate,
};
use finmet::error::{Error, Result};
use finmet::factorize::{ContextMethod, FactorizationContext};
use finmet::format::{parse_scale_set, SpaceFile};
use finmet::gen::{generate, GenKind, GenSpec};
use finmet::quotient::quotient;
use finmet::retraction::{retract_bdhm, retract_engelking};
use finmet::space::FinMetricSpace;

/// Environment variable consulted for the default suite seed.
const SEED_ENV: &str = "FINMET_SEED";

#[derive(Parser)]
#[command(
    name = "finmet",
    version,
    about = "finite metric spaces: quotients, retractions, extensions, dimension estimates"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the metric axioms of a space file; exit 0 iff it is a metric.
    Validate {
        /// Space file (JSON, or CSV with a .csv suffix; - for stdin).
        space: String,
    },
    /// Collapse a subset to a point and write the quotient space.
    Quotient {
        space: String,
        /// Subset: a named block from the file or a comma-separated label list.
        #[arg(long)]
        subset: String,
        /// Output path for the quotient space file (stdout when absent).
        #[arg(short, long)]
        output: Option<String>,
    },
    /// Build a retraction onto a subset and print the mapping table.
    Retract {
        space: String,
        #[arg(long)]
        subset: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Engelking)]
        method: MethodArg,
        /// Expansion factor for the order-based method.
        #[arg(long, default_value_t = 2.0)]
        tau: f64,
        /// Write the construction trace (scale decomposition only).
        #[arg(long)]
        trace: Option<String>,
    },
    /// Print the embedding table x -> (r(x), pi(x)).
    Embed {
        space: String,
        #[arg(long)]
        subset: String,
        /// Auxiliary metric driving the retraction and quotient
        /// (defaults to the space itself).
        #[arg(long)]
        lambda: Option<String>,
    },
    /// Extend a metric on a subset to the whole context space.
    Extend {
        /// Metric on the subset labels.
        space: String,
        /// Space file for the whole space (the auxiliary metric).
        #[arg(long)]
        context: String,
        #[arg(long)]
        subset: String,
        #[arg(long, value_enum)]
        norm: NormArg,
        /// Factor metric on the quotient: "auto" for the quotient metric
        /// itself, otherwise a space file path.
        #[arg(long = "v", default_value = "auto")]
        factor: String,
        /// Truncate the factor metric at this level before extending.
        #[arg(long)]
        eta: Option<f64>,
        /// Enforce the scale-set contract for sup extensions
        /// (all | geometric:RATIO | explicit:V1,V2,...).
        #[arg(long)]
        scale_set: Option<String>,
        #[arg(long, value_enum, default_value_t = CtxMethodArg::Auto)]
        method: CtxMethodArg,
        #[arg(long, default_value_t = 2.0)]
        tau: f64,
        #[arg(short, long)]
        output: Option<String>,
    },
    /// Dimension estimators: box or packing slope, or the doubling probe.
    Dim {
        space: String,
        #[arg(long, value_enum)]
        estimator: EstimatorArg,
        /// Comma-separated scale list (defaults to a clipped power grid).
        #[arg(long)]
        scales: Option<String>,
        /// Comma-separated R:r pairs for the doubling probe.
        #[arg(long)]
        pairs: Option<String>,
        /// Base of the default scale grid.
        #[arg(long, default_value_t = 2.0)]
        base: f64,
    },
    /// Run a named invariant suite; exit 0 iff every check passes.
    Check {
        /// quotient-laws | retraction-certificates | extensor-contracts |
        /// dimension-profile
        suite: String,
        #[arg(long, default_value_t = 50)]
        instances: u32,
        /// Defaults to $FINMET_SEED, then 7.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 24)]
        size: usize,
        /// "json" for a machine-readable report.
        #[arg(long)]
        report: Option<String>,
    },
    /// Generate fixture spaces.
    Gen {
        #[command(subcommand)]
        kind: GenCmd,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Engelking,
    Bdhm,
}

#[derive(Clone, Copy, ValueEnum)]
enum CtxMethodArg {
    Auto,
    Engelking,
    Bdhm,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    L1,
    Linf,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Box,
    Pack,
    Assouad,
}

#[derive(Subcommand)]
enum GenCmd {
    /// Left endpoints of the depth-k middle-thirds construction.
    Cantor {
        #[arg(long)]
        depth: u32,
        #[command(flatten)]
        out: GenOut,
    },
    /// n collinear points at a fixed spacing.
    Line {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
        #[command(flatten)]
        out: GenOut,
    },
    /// A planar grid with Euclidean distances.
    Grid {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
        #[command(flatten)]
        out: GenOut,
    },
    /// Ultrametric from a seeded random recursive bipartition tree.
    RandomUltra {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 2.0)]
        base: f64,
        #[command(flatten)]
        out: GenOut,
    },
    /// Euclidean distances of seeded uniform points in the unit cube.
    RandomMetric {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[command(flatten)]
        out: GenOut,
    },
}

#[derive(Args)]
struct GenOut {
    /// Output path (stdout when absent).
    #[arg(short, long)]
    output: Option<String>,
}

fn default_seed() -> u64 {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(7)
}

fn load_space(path: &str) -> Result<(SpaceFile, FinMetricSpace)> {
    let file = SpaceFile::load(path)?;
    let space = file.to_space()?;
    Ok((file, space))
}

fn emit(file: &SpaceFile, output: &Option<String>) -> Result<()> {
    match output {
        Some(path) => file.save(path),
        None => {
            print!("{}", file.to_json());
            Ok(())
        }
    }
}

fn parse_f64_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::structural(format!("bad number {v:?}")))
        })
        .collect()
}

fn parse_pairs(text: &str) -> Result<Vec<(f64, f64)>> {
    text.split(',')
        .map(|pair| {
            let (big, small) = pair
                .split_once(':')
                .ok_or_else(|| Error::structural(format!("pair {pair:?} is not R:r")))?;
            Ok((
                big.trim()
                    .parse()
                    .map_err(|_| Error::structural(format!("bad number {big:?}")))?,
                small
                    .trim()
                    .parse()
                    .map_err(|_| Error::structural(format!("bad number {small:?}")))?,
            ))
        })
        .collect()
}

fn run(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Validate { space } => {
            let (_, m) = load_space(&space)?;
            let rep = m.validate();
            println!("points: {}", m.len());
            println!("is_metric: {}", rep.is_metric);
            println!("is_ultrametric: {}", rep.is_ultrametric);
            if let Some(v) = &rep.worst_violation {
                println!(
                    "worst_violation: {:?} at {:?} (slack {:.6e})",
                    v.kind, v.points, v.slack
                );
            }
            Ok(if rep.is_metric { 0 } else { 1 })
        }
        Cmd::Quotient {
            space,
            subset,
            output,
        } => {
            let (file, m) = load_space(&space)?;
            let subset = file.resolve_subset(&m, &subset)?;
            let q = quotient(&m, &subset)?;
            let out = SpaceFile::from_space(&q.space)
                .with_subset("theta", vec![q.theta.clone()]);
            emit(&out, &output)?;
            if output.is_some() {
                for x in 0..m.len() {
                    println!("{}\t{}", m.label(x), q.project_label(x));
                }
            }
            Ok(0)
        }
        Cmd::Retract {
            space,
            subset,
            method,
            tau,
            trace,
        } => {
            let (file, m) = load_space(&space)?;
            let subset = file.resolve_subset(&m, &subset)?;
            let r = match method {
                MethodArg::Engelking => retract_engelking(&m, &subset)?,
                MethodArg::Bdhm => retract_bdhm(&m, &subset, tau)?,
            };
            for x in 0..m.len() {
                println!("{}\t{}", m.label(x), m.label(r.mapping[x]));
            }
            if let Some(path) = trace {
                let doc = serde_json::json!({
                    "labels": m.labels(),
                    "retraction": &r,
                });
                std::fs::write(path, serde_json::to_string_pretty(&doc)? + "\n")?;
            }
            Ok(0)
        }
        Cmd::Embed {
            space,
            subset,
            lambda,
        } => {
            let (file, m) = load_space(&space)?;
            let subset = file.resolve_subset(&m, &subset)?;
            let base = match lambda {
                Some(path) => {
                    let (_, lam) = load_space(&path)?;
                    if lam.labels() != m.labels() {
                        return Err(Error::structural(
                            "auxiliary metric must share the space labels",
                        ));
                    }
                    lam
                }
                None => m.clone(),
            };
            let ctx = FactorizationContext::new(base, &subset)?;
            for row in ctx.embedding() {
                println!(
                    "{}\t({},{})",
                    m.label(row.point),
                    m.label(row.anchor),
                    ctx.quotient().space.label(row.class)
                );
            }
            Ok(0)
        }
        Cmd::Extend {
            space,
            context,
            subset,
            norm,
            factor,
            eta,
            scale_set,
            method,
            tau,
            output,
        } => {
            let (_, d) = load_space(&space)?;
            let (ctx_file, lambda) = load_space(&context)?;
            let subset = ctx_file.resolve_subset(&lambda, &subset)?;
            let method = match method {
                CtxMethodArg::Auto => ContextMethod::Auto,
                CtxMethodArg::Engelking => ContextMethod::Engelking,
                CtxMethodArg::Bdhm => ContextMethod::Bdhm { tau },
            };
            let mut ctx = FactorizationContext::with_method(lambda, &subset, method)?;
            if factor != "auto" {
                let (_, v) = load_space(&factor)?;
                ctx = ctx.set_factor(v)?;
            }
            if let Some(eta) = eta {
                ctx = ctx.truncate_factor(eta)?;
            }
            let extended = match norm {
                NormArg::L1 => ctx.extend_l1(&d)?,
                NormArg::Linf => {
                    let set = scale_set.as_deref().map(parse_scale_set).transpose()?;
                    ctx.extend_linf(&d, set.as_ref())?
                }
            };
            emit(&SpaceFile::from_space(&extended), &output)?;
            Ok(0)
        }
        Cmd::Dim {
            space,
            estimator,
            scales,
            pairs,
            base,
        } => {
            let (_, m) = load_space(&space)?;
            match estimator {
                EstimatorArg::Box | EstimatorArg::Pack => {
                    let scales = match scales {
                        Some(list) => parse_f64_list(&list)?,
                        None => default_scales(&m, base),
                    };
                    let fit = match estimator {
                        EstimatorArg::Box => ubdim_estimate(&m, &scales)?,
                        _ => packing_slope(&m, &scales)?,
                    };
                    println!("radius\tcount\tresidual");
                    for p in &fit.points {
                        println!("{}\t{}\t{:.6e}", p.radius, p.count, p.residual);
                    }
                    println!("estimate: {}", fit.slope);
                }
                EstimatorArg::Assouad => {
                    let pairs = match pairs {
                        Some(list) => parse_pairs(&list)?,
                        None => standard_scale_pairs(&m),
                    };
                    let est = adim_estimate(&m, &pairs)?;
                    println!("R\tr\tcenter\tcount\tratio");
                    for row in &est.rows {
                        println!(
                            "{}\t{}\t{}\t{}\t{:.6}",
                            row.outer_radius, row.inner_radius, row.center, row.count, row.ratio
                        );
                    }
                    println!("estimate: {}", est.value);
                }
            }
            Ok(0)
        }
        Cmd::Check {
            suite,
            instances,
            seed,
            size,
            report,
        } => {
            let suite = Suite::from_name(&suite).ok_or_else(|| {
                Error::structural(format!(
                    "unknown suite {suite:?}; expected one of quotient-laws, \
                     retraction-certificates, extensor-contracts, dimension-profile"
                ))
            })?;
            let cfg = CheckConfig {
                instances,
                seed: seed.unwrap_or_else(default_seed),
                max_size: size,
            };
            let rep = run_suite(suite, &cfg);
            if report.as_deref() == Some("json") {
                println!("{}", serde_json::to_string_pretty(&rep)?);
            } else {
                for c in &rep.checks {
                    println!(
                        "{} {} (worst slack {:.3e})",
                        if c.passed { "ok  " } else { "FAIL" },
                        c.name,
                        c.worst_slack
                    );
                }
                println!(
                    "suite {}: {} ({} instances)",
                    rep.suite,
                    if rep.passed { "PASS" } else { "FAIL" },
                    rep.instances_checked
                );
                if let Some(ce) = &rep.counterexample {
                    eprintln!("counterexample ({}):", ce.instance);
                    eprintln!("{}", serde_json::to_string_pretty(&ce)?);
                }
            }
            Ok(if rep.passed { 0 } else { 1 })
        }
        Cmd::Gen { kind } => {
            let (spec, out) = match kind {
                GenCmd::Cantor { depth, out } => (
                    GenSpec {
                        kind: GenKind::Cantor { depth },
                        seed: 0,
                    },
                    out,
                ),
                GenCmd::Line { n, step, out } => (
                    GenSpec {
                        kind: GenKind::Line { n, step },
                        seed: 0,
                    },
                    out,
                ),
                GenCmd::Grid {
                    rows,
                    cols,
                    step,
                    out,
                } => (
                    GenSpec {
                        kind: GenKind::Grid { rows, cols, step },
                        seed: 0,
                    },
                    out,
                ),
                GenCmd::RandomUltra { n, seed, base, out } => (
                    GenSpec {
                        kind: GenKind::RandomUltra {
                            n,
                            height_base: base,
                        },
                        seed: seed.unwrap_or_else(default_seed),
                    },
                    out,
                ),
                GenCmd::RandomMetric { n, seed, dim, out } => (
                    GenSpec {
                        kind: GenKind::RandomMetric { n, ambient_dim: dim },
                        seed: seed.unwrap_or_else(default_seed),
                    },
                    out,
                ),
            };
            let m = generate(&spec)?;
            emit(&SpaceFile::from_space(&m), &out.output)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
