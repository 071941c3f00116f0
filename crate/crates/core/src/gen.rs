//! Deterministic fixture generators and binary ball codes.
//!
//! Every generator is a pure function of its spec: the same kind, sizes,
//! and seed produce a bit-identical matrix on any platform. Randomness
//! comes from a self-contained xorshift generator so the fixtures can be
//! reproduced outside this crate from the documented constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linkage::single_linkage;
use crate::space::FinMetricSpace;

/// Marsaglia xorshift64 with Vigna's star multiplier.
///
/// State update: `x ^= x >> 12; x ^= x << 25; x ^= x >> 27`; output is
/// `x * 0x2545F4914F6CDD1D`. A zero seed is replaced by
/// `0x9E3779B97F4A7C15` since the all-zero state is a fixed point.
/// Doubles take the top 53 bits into `[0, 1)`.
#[derive(Debug, Clone)]
pub struct Xorshift64Star {
    state: u64,
}

impl Xorshift64Star {
    pub fn new(seed: u64) -> Self {
        Xorshift64Star {
            state: if seed == 0 { 0x9E3779B97F4A7C15 } else { seed },
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545F4914F6CDD1D)
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform-ish index below `n`; the modulo bias is irrelevant for
    /// fixture generation and keeps the stream easy to reproduce.
    pub fn next_index(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub kind: GenKind,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GenKind {
    /// Left endpoints of the depth-`depth` middle-thirds intervals with
    /// the absolute-difference distance. `2^depth` points.
    Cantor { depth: u32 },
    /// `n` collinear points at the given spacing.
    Line { n: usize, step: f64 },
    /// A rows-by-cols planar grid at the given spacing, Euclidean distance.
    Grid { rows: usize, cols: usize, step: f64 },
    /// Ultrametric read off a random recursive bipartition tree; points
    /// split at level `l` sit at distance `height_base^-l`.
    RandomUltra { n: usize, height_base: f64 },
    /// Euclidean distances of `n` uniform points in the unit cube.
    RandomMetric { n: usize, ambient_dim: usize },
}

const MAX_POINTS: usize = 4096;

pub fn generate(spec: &GenSpec) -> Result<FinMetricSpace> {
    match spec.kind {
        GenKind::Cantor { depth } => {
            if depth > 12 {
                return Err(Error::capacity(format!(
                    "cantor depth limited to 12, got {depth}"
                )));
            }
            let n = 1usize << depth;
            let mut labels = Vec::with_capacity(n);
            let mut pts = Vec::with_capacity(n);
            for code in 0..n {
                let mut x = 0.0f64;
                for level in 1..=depth {
                    let bit = (code >> (depth - level)) & 1;
                    if bit == 1 {
                        x += 2.0 / 3f64.powi(level as i32);
                    }
                }
                labels.push(format!("c{code:0width$b}", width = depth as usize));
                pts.push(x);
            }
            line_space(labels, &pts)
        }
        GenKind::Line { n, step } => {
            check_size(n)?;
            check_step(step)?;
            let pts: Vec<f64> = (0..n).map(|i| i as f64 * step).collect();
            line_space((0..n).map(|i| format!("p{i}")).collect(), &pts)
        }
        GenKind::Grid { rows, cols, step } => {
            check_size(rows.saturating_mul(cols))?;
            check_step(step)?;
            let mut labels = Vec::new();
            let mut pts = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    labels.push(format!("p{r}_{c}"));
                    pts.push((r as f64 * step, c as f64 * step));
                }
            }
            let n = pts.len();
            let mut dist = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    let dx = pts[i].0 - pts[j].0;
                    let dy = pts[i].1 - pts[j].1;
                    dist[i * n + j] = (dx * dx + dy * dy).sqrt();
                }
            }
            FinMetricSpace::from_flat(labels, dist)
        }
        GenKind::RandomUltra { n, height_base } => {
            check_size(n)?;
            if !(height_base > 1.0) {
                return Err(Error::domain(format!(
                    "height base must exceed 1, got {height_base}"
                )));
            }
            let mut rng = Xorshift64Star::new(spec.seed);
            let q = 1.0 / height_base;
            let mut dist = vec![0.0; n * n];
            let indices: Vec<usize> = (0..n).collect();
            bipartition(&indices, 1, q, &mut rng, &mut dist, n);
            FinMetricSpace::from_flat((0..n).map(|i| format!("u{i}")).collect(), dist)
        }
        GenKind::RandomMetric { n, ambient_dim } => {
            check_size(n)?;
            if ambient_dim == 0 {
                return Err(Error::domain("ambient dimension must be positive"));
            }
            let mut rng = Xorshift64Star::new(spec.seed);
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..ambient_dim).map(|_| rng.next_f64()).collect())
                .collect();
            let mut dist = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    let s: f64 = pts[i]
                        .iter()
                        .zip(&pts[j])
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    dist[i * n + j] = s.sqrt();
                }
            }
            FinMetricSpace::from_flat((0..n).map(|i| format!("x{i}")).collect(), dist)
        }
    }
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("size must be positive"));
    }
    if n > MAX_POINTS {
        return Err(Error::capacity(format!(
            "at most {MAX_POINTS} points, got {n}"
        )));
    }
    Ok(())
}

fn check_step(step: f64) -> Result<()> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::domain(format!("step must be positive, got {step}")));
    }
    Ok(())
}

fn line_space(labels: Vec<String>, pts: &[f64]) -> Result<FinMetricSpace> {
    let n = pts.len();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            dist[i * n + j] = (pts[i] - pts[j]).abs();
        }
    }
    FinMetricSpace::from_flat(labels, dist)
}

fn bipartition(
    members: &[usize],
    level: i32,
    q: f64,
    rng: &mut Xorshift64Star,
    dist: &mut [f64],
    n: usize,
) {
    if members.len() <= 1 {
        return;
    }
    let (mut left, mut right); // proper bipartition, resampled until both sides fill
    loop {
        left = Vec::new();
        right = Vec::new();
        for &x in members {
            if rng.next_u64() & 1 == 0 {
                left.push(x);
            } else {
                right.push(x);
            }
        }
        if !left.is_empty() && !right.is_empty() {
            break;
        }
    }
    let h = q.powi(level);
    for &a in &left {
        for &b in &right {
            dist[a * n + b] = h;
            dist[b * n + a] = h;
        }
    }
    bipartition(&left, level + 1, q, rng, dist, n);
    bipartition(&right, level + 1, q, rng, dist, n);
}

/// One bit per distinct closed ball: the code of a point indicates which
/// balls contain it. Distinct points always receive distinct codes since
/// singletons are balls. Requires an ultrametric input, whose balls are
/// exactly the merge clusters at each distance value.
pub fn cantor_code(m: &FinMetricSpace) -> Result<Vec<(String, String)>> {
    if !m.validate().is_ultrametric {
        return Err(Error::domain("ball codes need an ultrametric input"));
    }
    let n = m.len();
    let dendro = single_linkage(m);
    let mut balls: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for &h in dendro.heights() {
        for cluster in dendro.clusters_at(h) {
            if !balls.contains(&cluster) {
                balls.push(cluster);
            }
        }
    }
    let codes = (0..n)
        .map(|i| {
            let bits: String = balls
                .iter()
                .map(|b| if b.contains(&i) { '1' } else { '0' })
                .collect();
            (m.label(i).to_string(), bits)
        })
        .collect();
    Ok(codes)
}
