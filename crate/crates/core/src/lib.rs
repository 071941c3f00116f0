//! Finite metric spaces and the machinery to take quotients by a subset,
//! retract onto a subset, embed into subset-times-quotient products,
//! extend metrics from a subset to the whole space, and estimate fractal
//! dimensions from covering numbers.
//!
//! The crate is organized around a handful of value types:
//!
//! * [`FinMetricSpace`]: labels plus a distance matrix, with axiom
//!   validation, set distances, neighborhoods, products, and joins;
//! * [`ScaleSet`] and the sup/ultrametric distances between metrics on a
//!   common label set;
//! * [`QuotientSpace`]: a subset collapsed to a point under the shortcut
//!   metric, with its projection;
//! * [`Retraction`]: scale-decomposition and order-based retractions with
//!   quantitative certificates;
//! * [`FactorizationContext`]: the embedding `x -> (r(x), pi(x))` and the
//!   L1/sup extension operators it induces;
//! * covering/packing counts, box-counting and doubling-exponent
//!   estimators, and the sparse-scale ultrametric in [`dimension`];
//! * deterministic fixture generators in [`gen`], the JSON space format
//!   in [`mod@format`], and the seeded invariant suites in [`check`].
//!
//! Everything operates on immutable values; all functions are pure and
//! deterministic, including the seeded generators.

pub mod check;
pub mod dimension;
pub mod error;
pub mod factorize;
pub mod family;
pub mod format;
pub mod gen;
pub mod linkage;
pub mod num;
pub mod quotient;
pub mod report;
pub mod retraction;
pub mod scale;
pub mod space;

pub use error::{Error, Result};
pub use factorize::{pullback, truncate_metric, ContextMethod, FactorizationContext};
pub use family::{sup_distance, ultra_distance, MetricFamily};
pub use format::SpaceFile;
pub use gen::{cantor_code, generate, GenKind, GenSpec, Xorshift64Star};
pub use quotient::{check_quotient_laws, quotient, QuotientSpace};
pub use report::{Check, Report};
pub use retraction::{
    retract_bdhm, retract_engelking, verify_retraction, EngelkingTrace, Retraction,
    RetractionMethod,
};
pub use scale::{ExtReal, ScaleSet};
pub use space::{
    join_metrics, product_metric, FinMetricSpace, Neighborhoods, ProductNorm, SeparationReport,
    ValidationReport,
};
