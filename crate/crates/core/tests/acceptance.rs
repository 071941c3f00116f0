//! Release gate: every criterion runs over a fixed seeded battery of 200
//! random instances (up to 40 points, non-empty subsets) plus the named
//! fixtures, and prints one pass line. Run with `--nocapture` to see the
//! lines; any failure names the instance and the broken check.

use std::process::Command;

use finmet::check::{
    self, battery, dimension_fixture_report, Instance,
};
use finmet::dimension::{
    adim_estimate, default_scales, sparse_ultrametric, standard_scale_pairs, ubdim_estimate,
};
use finmet::error::Result;
use finmet::gen::{generate, GenKind, GenSpec};
use finmet::report::Report;

const SEED: u64 = 41;
const INSTANCES: u32 = 200;
const MAX_SIZE: usize = 40;

fn accept_battery() -> Vec<Instance> {
    battery(SEED, INSTANCES, MAX_SIZE, true)
}

fn run_criterion(name: &str, f: impl Fn(&Instance) -> Result<Report>) {
    let instances = accept_battery();
    for inst in &instances {
        let rep = f(inst).unwrap_or_else(|e| panic!("{name}: {} errored: {e}", inst.name));
        assert!(rep.passed(), "{name} failed on {}:\n{rep}", inst.name);
    }
    println!("ACCEPTANCE {name}: PASS ({} instances)", instances.len());
}

#[test]
fn criterion_quotient_laws() {
    run_criterion("quotient-laws", check::quotient_laws);
}

#[test]
fn criterion_engelking_certificates() {
    run_criterion("engelking-certificates", check::engelking_certificates);
}

#[test]
fn criterion_bdhm_certificates() {
    let instances = accept_battery();
    let mut exercised = 0;
    for inst in &instances {
        let rep = check::bdhm_certificates(inst)
            .unwrap_or_else(|e| panic!("bdhm: {} errored: {e}", inst.name));
        if !rep.checks.is_empty() {
            exercised += 1;
        }
        assert!(rep.passed(), "bdhm failed on {}:\n{rep}", inst.name);
    }
    assert!(exercised >= 50, "only {exercised} ultrametric instances");
    println!("ACCEPTANCE bdhm-certificates: PASS ({exercised} ultrametric instances)");
}

#[test]
fn criterion_embedding() {
    run_criterion("embedding", check::embedding_report);
}

#[test]
fn criterion_extensor_contracts() {
    run_criterion("extensor-contracts", check::extensor_report);
}

#[test]
fn criterion_eta_density() {
    run_criterion("eta-density", check::eta_density_report);
}

#[test]
fn criterion_covering_packing_oracles() {
    // the oracle-equivalence battery stays within the exact-search limit
    let instances = battery(SEED, INSTANCES, 12, false);
    for inst in &instances {
        let rep = check::dimension_profile(inst)
            .unwrap_or_else(|e| panic!("profiles: {} errored: {e}", inst.name));
        assert!(rep.passed(), "profiles failed on {}:\n{rep}", inst.name);
    }
    println!(
        "ACCEPTANCE covering-packing-oracles: PASS ({} instances)",
        instances.len()
    );
}

#[test]
fn criterion_dimension_fixtures() {
    let rep = dimension_fixture_report();
    assert!(rep.passed(), "dimension fixtures failed:\n{rep}");

    // the same fixture values, asserted directly
    let cantor8 = generate(&GenSpec {
        kind: GenKind::Cantor { depth: 8 },
        seed: 0,
    })
    .unwrap();
    let slope = ubdim_estimate(&cantor8, &default_scales(&cantor8, 3.0))
        .unwrap()
        .slope;
    assert!(
        (slope - 2f64.ln() / 3f64.ln()).abs() <= 0.02,
        "cantor(8) slope {slope}"
    );

    let line16 = generate(&GenSpec {
        kind: GenKind::Line { n: 16, step: 1.0 },
        seed: 0,
    })
    .unwrap();
    let slope = ubdim_estimate(&line16, &default_scales(&line16, 2.0))
        .unwrap()
        .slope;
    assert!((slope - 1.0).abs() <= 0.05, "line(16) slope {slope}");

    let cantor6 = generate(&GenSpec {
        kind: GenKind::Cantor { depth: 6 },
        seed: 0,
    })
    .unwrap();
    let sparse = sparse_ultrametric(&cantor6).unwrap();
    let est = adim_estimate(&sparse, &standard_scale_pairs(&sparse)).unwrap();
    assert!(est.value <= 0.1, "sparse doubling probe {}", est.value);
    // 32 pair-clusters inside the whole space across a 2^62 scale span
    assert!(
        (est.value - 5.0 / 62.0).abs() < 1e-9,
        "sparse doubling probe {}",
        est.value
    );

    println!("ACCEPTANCE dimension-fixtures: PASS");
}

fn run_check_suite(suite: &str) -> (Vec<u8>, bool) {
    let out = Command::new(env!("CARGO_BIN_EXE_finmet"))
        .args([
            "check", suite, "--instances", "10", "--seed", "7", "--size", "12", "--report",
            "json",
        ])
        .output()
        .expect("spawn finmet");
    (out.stdout, out.status.success())
}

#[test]
fn criterion_determinism() {
    for suite in [
        "quotient-laws",
        "retraction-certificates",
        "extensor-contracts",
        "dimension-profile",
    ] {
        let (first, ok1) = run_check_suite(suite);
        let (second, ok2) = run_check_suite(suite);
        assert!(ok1 && ok2, "suite {suite} did not pass");
        assert!(!first.is_empty());
        assert_eq!(first, second, "suite {suite} reports differ between runs");
    }

    // seeded generation is byte-stable through the CLI as well
    let gen = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_finmet"))
            .args(["gen", "random-ultra", "--n", "8", "--seed", seed])
            .output()
            .expect("spawn finmet")
            .stdout
    };
    assert_eq!(gen("5"), gen("5"));
    assert_ne!(gen("5"), gen("6"));
    println!("ACCEPTANCE determinism: PASS");
}
