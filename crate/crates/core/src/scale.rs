//! Value sets for ultrametrics and the ceiling operation on them.
//!
//! A scale set stands for a subset `S` of the non-negative reals with
//! `0 ∈ S`. Three shapes are supported: all of `[0, ∞)`, an explicit
//! finite list of positive values, and a two-sided geometric family
//! `{q^n : n ∈ Z} ∪ {0}` for a ratio `q ∈ (0, 1)`. A set is
//! *characteristic* when its positive part has infimum 0; explicit finite
//! sets have a positive minimum and are not characteristic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::rel_eq;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScaleSet {
    AllReals,
    Explicit { values: Vec<f64> },
    Geometric { ratio: f64 },
}

/// A non-negative value or infinity. Used where a ceiling may not exist;
/// never stored inside distance matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinite,
}

impl ExtReal {
    pub fn as_finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::Infinite => None,
        }
    }

    pub fn approx_eq(self, other: ExtReal) -> bool {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => rel_eq(a, b),
            (ExtReal::Infinite, ExtReal::Infinite) => true,
            _ => false,
        }
    }

    /// Order comparison treating `Infinite` as larger than every finite value.
    pub fn le(self, other: ExtReal) -> bool {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a <= b,
            (_, ExtReal::Infinite) => true,
            (ExtReal::Infinite, ExtReal::Finite(_)) => false,
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if self.le(other) {
            other
        } else {
            self
        }
    }
}

impl std::fmt::Display for ExtReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::Infinite => write!(f, "inf"),
        }
    }
}

impl ScaleSet {
    pub fn all_reals() -> Self {
        ScaleSet::AllReals
    }

    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        let s = ScaleSet::Explicit { values };
        s.validate()?;
        Ok(s)
    }

    pub fn geometric(ratio: f64) -> Result<Self> {
        let s = ScaleSet::Geometric { ratio };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ScaleSet::AllReals => Ok(()),
            ScaleSet::Explicit { values } => {
                if values.is_empty() {
                    return Err(Error::domain("explicit scale set has no positive values"));
                }
                for (i, &v) in values.iter().enumerate() {
                    if !v.is_finite() || v <= 0.0 {
                        return Err(Error::domain(format!(
                            "explicit scale value {i} must be a positive finite number, got {v}"
                        )));
                    }
                    if i > 0 && values[i - 1] >= v {
                        return Err(Error::domain(
                            "explicit scale values must be strictly increasing",
                        ));
                    }
                }
                Ok(())
            }
            ScaleSet::Geometric { ratio } => {
                if !ratio.is_finite() || *ratio <= 0.0 || *ratio >= 1.0 {
                    return Err(Error::domain(format!(
                        "geometric ratio must lie strictly between 0 and 1, got {ratio}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// True when the positive part of the set has infimum 0.
    pub fn is_characteristic(&self) -> bool {
        matches!(self, ScaleSet::AllReals | ScaleSet::Geometric { .. })
    }

    /// Least element of the set `>= t`, or infinity when none exists.
    ///
    /// Geometric sets are resolved by integer exponent search so that
    /// values which are exact powers of the ratio come back unchanged.
    pub fn ceiling(&self, t: f64) -> Result<ExtReal> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::domain(format!(
                "ceiling requires a finite non-negative argument, got {t}"
            )));
        }
        if t == 0.0 {
            return Ok(ExtReal::Finite(0.0));
        }
        match self {
            ScaleSet::AllReals => Ok(ExtReal::Finite(t)),
            ScaleSet::Explicit { values } => {
                let pos = values.partition_point(|&v| v < t);
                Ok(match values.get(pos) {
                    Some(&v) => ExtReal::Finite(v),
                    None => ExtReal::Infinite,
                })
            }
            ScaleSet::Geometric { ratio } => {
                let q = *ratio;
                // Largest n with q^n >= t; q^n decreases as n grows. The
                // log-based guess can be far off for ratios near 1, so
                // bracket by galloping and finish with a binary search.
                let guess = (t.ln() / q.ln()).floor();
                let mut n = if guess.is_finite() {
                    guess.clamp(i32::MIN as f64 / 2.0, i32::MAX as f64 / 2.0) as i32
                } else {
                    0
                };
                let mut step = 1i32;
                while q.powi(n) < t {
                    n = n.saturating_sub(step);
                    step = step.saturating_mul(2);
                }
                step = 1;
                while q.powi(n.saturating_add(step)) >= t {
                    n = n.saturating_add(step);
                    step = step.saturating_mul(2);
                }
                let (mut lo, mut hi) = (n, n.saturating_add(step));
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    if q.powi(mid) >= t {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(ExtReal::Finite(q.powi(lo)))
            }
        }
    }

    /// Membership up to the global relative tolerance: `t` belongs to the
    /// set exactly when its ceiling is `t` itself.
    pub fn contains(&self, t: f64) -> bool {
        if t == 0.0 {
            return true;
        }
        match self.ceiling(t) {
            Ok(ExtReal::Finite(c)) => rel_eq(c, t),
            _ => false,
        }
    }
}

impl std::fmt::Display for ScaleSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScaleSet::AllReals => write!(f, "all"),
            ScaleSet::Explicit { values } => {
                write!(f, "explicit:")?;
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
            ScaleSet::Geometric { ratio } => write!(f, "geometric:{ratio}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceiling_at_zero() {
        for s in [
            ScaleSet::all_reals(),
            ScaleSet::geometric(0.5).unwrap(),
            ScaleSet::explicit(vec![1.0, 5.0]).unwrap(),
        ] {
            assert_eq!(s.ceiling(0.0).unwrap(), ExtReal::Finite(0.0));
        }
    }

    #[test]
    fn ceiling_geometric_exponent_search() {
        let s = ScaleSet::geometric(0.5).unwrap();
        assert_eq!(s.ceiling(3.0).unwrap(), ExtReal::Finite(4.0));
        assert_eq!(s.ceiling(0.5).unwrap(), ExtReal::Finite(0.5));
        assert_eq!(s.ceiling(0.2).unwrap(), ExtReal::Finite(0.25));
        assert_eq!(s.ceiling(8.0).unwrap(), ExtReal::Finite(8.0));
        // exact at powers across a wide exponent range
        for k in -60..60 {
            let v = 0.5f64.powi(k);
            assert_eq!(s.ceiling(v).unwrap(), ExtReal::Finite(v), "k={k}");
        }
    }

    #[test]
    fn ceiling_explicit_above_max_is_infinite() {
        let s = ScaleSet::explicit(vec![1.0, 5.0]).unwrap();
        assert_eq!(s.ceiling(7.0).unwrap(), ExtReal::Infinite);
        assert_eq!(s.ceiling(1.0).unwrap(), ExtReal::Finite(1.0));
        assert_eq!(s.ceiling(1.5).unwrap(), ExtReal::Finite(5.0));
    }

    #[test]
    fn characteristic_kinds() {
        assert!(ScaleSet::all_reals().is_characteristic());
        assert!(ScaleSet::geometric(0.5).unwrap().is_characteristic());
        assert!(!ScaleSet::explicit(vec![1.0]).unwrap().is_characteristic());
    }

    #[test]
    fn explicit_validation_rejects_disorder() {
        assert!(ScaleSet::explicit(vec![2.0, 1.0]).is_err());
        assert!(ScaleSet::explicit(vec![0.0, 1.0]).is_err());
        assert!(ScaleSet::explicit(vec![]).is_err());
        assert!(ScaleSet::geometric(1.0).is_err());
        assert!(ScaleSet::geometric(0.0).is_err());
    }

    #[test]
    fn ceiling_handles_ratios_near_one() {
        // the exponent magnitude here is ~2e8; the search must stay fast
        let s = ScaleSet::geometric(0.999_999_9).unwrap();
        let c = s.ceiling(1.0e9).unwrap().as_finite().unwrap();
        assert!(c >= 1.0e9);
        assert!(c * 0.999_999_9 < 1.0e9);
        let c = s.ceiling(1.0e-9).unwrap().as_finite().unwrap();
        assert!(c >= 1.0e-9 && c < 1.0000001e-9);
    }

    #[test]
    fn membership_via_ceiling() {
        let s = ScaleSet::geometric(0.5).unwrap();
        assert!(s.contains(0.25));
        assert!(s.contains(4.0));
        assert!(!s.contains(3.0));
        assert!(s.contains(0.0));
    }
}
