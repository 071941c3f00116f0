//! Floating-point comparison helpers and exact powers of two.
//!
//! Every metric-axiom check and every "exact" matrix comparison in this
//! crate goes through the same relative tolerance, [`REL_TOL`]. The
//! tolerance scales with the magnitudes involved and has no absolute
//! floor, so comparisons stay meaningful for matrices whose entries live
//! far below 1 (doubly-exponential scale families reach 2^-1024).

/// Relative tolerance for metric-axiom checks and matrix equality.
pub const REL_TOL: f64 = 1e-9;

fn margin(a: f64, b: f64) -> f64 {
    REL_TOL * a.abs().max(b.abs())
}

/// `a <= b` up to relative tolerance.
pub fn rel_le(a: f64, b: f64) -> bool {
    a <= b + margin(a, b)
}

/// `a == b` up to relative tolerance.
pub fn rel_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= margin(a, b)
}

/// Violation amount of `a <= b` after tolerance; positive means broken.
pub fn le_slack(a: f64, b: f64) -> f64 {
    a - b - margin(a, b)
}

/// Violation amount of `a == b` after tolerance; positive means broken.
pub fn eq_slack(a: f64, b: f64) -> f64 {
    (a - b).abs() - margin(a, b)
}

/// 2^e assembled from bits, exact over the whole f64 range including the
/// subnormals. Underflows to 0 below 2^-1074 and overflows to infinity
/// above 2^1023.
pub fn pow2(e: i32) -> f64 {
    match e {
        -1022..=1023 => f64::from_bits(((e + 1023) as u64) << 52),
        -1074..=-1023 => f64::from_bits(1u64 << (e + 1074)),
        e if e < -1074 => 0.0,
        _ => f64::INFINITY,
    }
}
