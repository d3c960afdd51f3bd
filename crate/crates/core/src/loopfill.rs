//! Loop contractions and the inductive simplex filler.
//!
//! A loop contraction `Φ : G × [0,1] → G` has every time slice `Φ_t` a group
//! homomorphism, with `Φ(·,0) = id` and `Φ(·,1) = 0`. From it,
//! `F(v_0, w, t) = v_0 + Φ(w − v_0, t)` and the filler
//!
//! ```text
//! σ̂_0(v_0)(1)        = v_0
//! σ̂_{n+1}(v)(t)      = v_0                                        if t_0 = 1
//!                    = F(v_0, σ̂_n(v_1,…)(t_1/(1−t_0),…), t_0)     otherwise
//! ```
//!
//! turns vertex tuples into simplices. The checks below measure the vertex
//! property, face compatibility, additivity and diagonal constancy.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use serde::Serialize;
use thiserror::Error;

use crate::coeff::max_norm_distance;

/// Weights with `t_0` above this threshold take the `v_0` branch.
pub const BRANCH_THRESHOLD: f64 = 1.0 - 1e-12;

/// Tolerance for barycentric input validation.
pub const BARYCENTRIC_TOLERANCE: f64 = 1e-12;

/// Default number of samples on a path.
pub const DEFAULT_PATH_SAMPLES: usize = 257;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FillError {
    #[error("{vertices} vertices but {weights} weights")]
    Arity { vertices: usize, weights: usize },
    #[error("weights {0:?} are not barycentric")]
    Barycentric(Vec<f64>),
    #[error("a simplex needs at least one vertex")]
    NoVertices,
    #[error("element has dimension {found}, carrier has dimension {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("contraction {0} satisfies neither Φ(·,0)=id, Φ(·,1)=0 nor the reversed convention")]
    Orientation(String),
    #[error("a path needs at least 2 samples, got {0}")]
    PathSamples(usize),
    #[error("a path must start at the identity")]
    PathStart,
    #[error("unknown contraction kind {0}")]
    UnknownKind(String),
}

/// A group with a loop contraction, in the artifact orientation
/// `Φ(·,0) = id`, `Φ(·,1) = 0`.
pub trait LoopCarrier {
    type Elem: Clone + fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn distance(&self, a: &Self::Elem, b: &Self::Elem) -> f64;
    /// `Φ(v, t)`.
    fn contract(&self, v: &Self::Elem, t: f64) -> Self::Elem;
    fn random_elem(&self, rng: &mut dyn RngCore) -> Self::Elem;
    fn check(&self, v: &Self::Elem) -> Result<(), FillError>;
}

type ContractionFn = Arc<dyn Fn(&[f64], f64) -> Vec<f64> + Send + Sync>;

/// A loop contraction of `ℝ^d` given by a formula.
#[derive(Clone)]
pub struct LoopContraction {
    dim: usize,
    name: String,
    reversed: bool,
    f: ContractionFn,
}

impl fmt::Debug for LoopContraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LoopContraction")
            .field("dim", &self.dim)
            .field("name", &self.name)
            .field("reversed", &self.reversed)
            .finish()
    }
}

fn rotate_pairs(v: &[f64], angle: f64, scale: f64) -> Vec<f64> {
    let (s, c) = angle.sin_cos();
    let mut out = Vec::with_capacity(v.len());
    let mut chunks = v.chunks_exact(2);
    for pair in &mut chunks {
        out.push(scale * (c * pair[0] - s * pair[1]));
        out.push(scale * (s * pair[0] + c * pair[1]));
    }
    out.extend(chunks.remainder().iter().map(|x| scale * x));
    out
}

impl LoopContraction {
    /// Wraps a formula, detecting its orientation: `Φ(·,0) = id, Φ(·,1) = 0`
    /// is used as is; `Φ(·,0) = 0, Φ(·,1) = id` is reversed to `Φ(·,1−t)`.
    pub fn from_fn(
        dim: usize,
        name: impl Into<String>,
        f: impl Fn(&[f64], f64) -> Vec<f64> + Send + Sync + 'static,
    ) -> Result<Self, FillError> {
        let name = name.into();
        let probe: Vec<f64> = (0..dim).map(|k| 1.0 + k as f64 * 0.5).collect();
        let zero = vec![0.0; dim];
        let at0 = f(&probe, 0.0);
        let at1 = f(&probe, 1.0);
        let close = |a: &[f64], b: &[f64]| a.len() == b.len() && max_norm_distance(a, b) <= 1e-12;
        let reversed = if close(&at0, &probe) && close(&at1, &zero) {
            false
        } else if close(&at0, &zero) && close(&at1, &probe) {
            true
        } else {
            return Err(FillError::Orientation(name));
        };
        Ok(Self {
            dim,
            name,
            reversed,
            f: Arc::new(f),
        })
    }

    /// `Φ(v,t) = (1−t)·v`, for which `σ̂` is the barycentric combination.
    pub fn linear(dim: usize) -> Self {
        Self::from_fn(dim, "linear", |v, t| {
            v.iter().map(|x| (1.0 - t) * x).collect()
        })
        .expect("oriented")
    }

    /// `Φ(v,t) = (1−t)²·v`.
    pub fn quadratic(dim: usize) -> Self {
        Self::from_fn(dim, "quadratic", |v, t| {
            v.iter().map(|x| (1.0 - t) * (1.0 - t) * x).collect()
        })
        .expect("oriented")
    }

    /// `Φ(v,t) = (1−t)·R(2πt)·v`, rotating coordinate pairs while shrinking.
    pub fn rotating(dim: usize) -> Self {
        Self::from_fn(dim, "rotating", |v, t| {
            rotate_pairs(v, std::f64::consts::TAU * t, 1.0 - t)
        })
        .expect("oriented")
    }

    /// `Φ(v,t) = t·v`, the opposite orientation; stored reversed.
    pub fn scaling(dim: usize) -> Self {
        Self::from_fn(dim, "scaling", |v, t| v.iter().map(|x| t * x).collect()).expect("oriented")
    }

    /// `linear`, `quadratic`, `rotating` or `scaling`.
    pub fn by_name(name: &str, dim: usize) -> Result<Self, FillError> {
        match name {
            "linear" => Ok(Self::linear(dim)),
            "quadratic" => Ok(Self::quadratic(dim)),
            "rotating" => Ok(Self::rotating(dim)),
            "scaling" => Ok(Self::scaling(dim)),
            other => Err(FillError::UnknownKind(other.to_string())),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    /// `Φ(v,t)` in the normalized orientation.
    pub fn evaluate(&self, v: &[f64], t: f64) -> Vec<f64> {
        let t = if self.reversed { 1.0 - t } else { t };
        (self.f)(v, t)
    }
}

impl LoopCarrier for LoopContraction {
    type Elem = Vec<f64>;

    fn zero(&self) -> Vec<f64> {
        vec![0.0; self.dim]
    }
    fn add(&self, a: &Vec<f64>, b: &Vec<f64>) -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }
    fn sub(&self, a: &Vec<f64>, b: &Vec<f64>) -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    }
    fn distance(&self, a: &Vec<f64>, b: &Vec<f64>) -> f64 {
        max_norm_distance(a, b)
    }
    fn contract(&self, v: &Vec<f64>, t: f64) -> Vec<f64> {
        self.evaluate(v, t)
    }
    fn random_elem(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        (0..self.dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }
    fn check(&self, v: &Vec<f64>) -> Result<(), FillError> {
        if v.len() == self.dim {
            Ok(())
        } else {
            Err(FillError::Dimension {
                expected: self.dim,
                found: v.len(),
            })
        }
    }
}

/// A path `[0,1] → ℝ^d` starting at 0, sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    samples: Vec<Vec<f64>>,
}

impl SampledPath {
    pub fn new(samples: Vec<Vec<f64>>) -> Result<Self, FillError> {
        if samples.len() < 2 {
            return Err(FillError::PathSamples(samples.len()));
        }
        if samples[0].iter().any(|x| *x != 0.0) {
            return Err(FillError::PathStart);
        }
        Ok(Self { samples })
    }

    /// Samples `t ↦ f(t)` at `count` grid points; `f(0)` is forced to 0.
    pub fn from_fn(count: usize, f: impl Fn(f64) -> Vec<f64>) -> Result<Self, FillError> {
        if count < 2 {
            return Err(FillError::PathSamples(count));
        }
        let mut samples: Vec<Vec<f64>> = (0..count)
            .map(|k| f(k as f64 / (count - 1) as f64))
            .collect();
        samples[0].iter_mut().for_each(|x| *x = 0.0);
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    /// Linear interpolation at `t ∈ [0,1]`.
    pub fn at(&self, t: f64) -> Vec<f64> {
        let last = self.samples.len() - 1;
        let pos = t.clamp(0.0, 1.0) * last as f64;
        let k = (pos.floor() as usize).min(last - 1);
        let frac = pos - k as f64;
        self.samples[k]
            .iter()
            .zip(&self.samples[k + 1])
            .map(|(a, b)| a + frac * (b - a))
            .collect()
    }
}

/// `t ↦ γ((1−s)t)`: the path-group contraction in the normalized
/// orientation (`s = 0` gives `γ`, `s = 1` the constant path).
pub fn path_group_contraction(gamma: &SampledPath, s: f64) -> SampledPath {
    let last = gamma.samples.len() - 1;
    let samples = (0..=last)
        .map(|k| {
            if k == 0 {
                vec![0.0; gamma.samples[0].len()]
            } else {
                gamma.at((1.0 - s) * k as f64 / last as f64)
            }
        })
        .collect();
    SampledPath { samples }
}

/// The path group `PG` of `ℝ^d` at a fixed sampling resolution, with the
/// contraction `Φ(γ, s)(t) = γ((1−s)t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathGroup {
    dim: usize,
    samples: usize,
}

impl PathGroup {
    pub fn new(dim: usize, samples: usize) -> Result<Self, FillError> {
        if samples < 2 {
            return Err(FillError::PathSamples(samples));
        }
        Ok(Self { dim, samples })
    }
}

impl LoopCarrier for PathGroup {
    type Elem = SampledPath;

    fn zero(&self) -> SampledPath {
        SampledPath {
            samples: vec![vec![0.0; self.dim]; self.samples],
        }
    }
    fn add(&self, a: &SampledPath, b: &SampledPath) -> SampledPath {
        SampledPath {
            samples: a
                .samples
                .iter()
                .zip(&b.samples)
                .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect())
                .collect(),
        }
    }
    fn sub(&self, a: &SampledPath, b: &SampledPath) -> SampledPath {
        SampledPath {
            samples: a
                .samples
                .iter()
                .zip(&b.samples)
                .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect())
                .collect(),
        }
    }
    fn distance(&self, a: &SampledPath, b: &SampledPath) -> f64 {
        a.samples
            .iter()
            .zip(&b.samples)
            .map(|(x, y)| max_norm_distance(x, y))
            .fold(0.0, f64::max)
    }
    fn contract(&self, v: &SampledPath, t: f64) -> SampledPath {
        path_group_contraction(v, t)
    }
    /// A random smooth path: a few sine modes vanishing at 0.
    fn random_elem(&self, rng: &mut dyn RngCore) -> SampledPath {
        let modes: Vec<Vec<(f64, f64)>> = (0..self.dim)
            .map(|_| {
                (1..=3)
                    .map(|k| (rng.gen_range(-1.0..1.0), k as f64))
                    .collect()
            })
            .collect();
        SampledPath::from_fn(self.samples, |t| {
            modes
                .iter()
                .map(|m| {
                    m.iter()
                        .map(|(a, k)| a * (k * t * std::f64::consts::FRAC_PI_2).sin())
                        .sum()
                })
                .collect()
        })
        .expect("at least 2 samples")
    }
    fn check(&self, v: &SampledPath) -> Result<(), FillError> {
        if v.samples.len() != self.samples {
            return Err(FillError::Dimension {
                expected: self.samples,
                found: v.samples.len(),
            });
        }
        match v.samples.iter().find(|x| x.len() != self.dim) {
            Some(x) => Err(FillError::Dimension {
                expected: self.dim,
                found: x.len(),
            }),
            None => Ok(()),
        }
    }
}

/// `F(v_0, w, t) = v_0 + Φ(w − v_0, t)`.
pub fn filler_f<L: LoopCarrier>(carrier: &L, v0: &L::Elem, w: &L::Elem, t: f64) -> L::Elem {
    carrier.add(v0, &carrier.contract(&carrier.sub(w, v0), t))
}

fn check_barycentric(weights: &[f64]) -> Result<(), FillError> {
    let sum: f64 = weights.iter().sum();
    if weights
        .iter()
        .any(|&t| t < -BARYCENTRIC_TOLERANCE || !t.is_finite())
        || (sum - 1.0).abs() > BARYCENTRIC_TOLERANCE
    {
        return Err(FillError::Barycentric(weights.to_vec()));
    }
    Ok(())
}

fn sigma_rec<L: LoopCarrier>(carrier: &L, vertices: &[L::Elem], weights: &[f64]) -> L::Elem {
    let t0 = weights[0];
    if vertices.len() == 1 || t0 > BRANCH_THRESHOLD {
        return vertices[0].clone();
    }
    let rest: Vec<f64> = weights[1..].iter().map(|t| t / (1.0 - t0)).collect();
    let inner = sigma_rec(carrier, &vertices[1..], &rest);
    filler_f(carrier, &vertices[0], &inner, t0)
}

/// `σ̂_n(v_0,…,v_n)(t_0,…,t_n)`.
pub fn sigma_fill<L: LoopCarrier>(
    carrier: &L,
    vertices: &[L::Elem],
    weights: &[f64],
) -> Result<L::Elem, FillError> {
    if vertices.is_empty() {
        return Err(FillError::NoVertices);
    }
    if vertices.len() != weights.len() {
        return Err(FillError::Arity {
            vertices: vertices.len(),
            weights: weights.len(),
        });
    }
    check_barycentric(weights)?;
    for v in vertices {
        carrier.check(v)?;
    }
    Ok(sigma_rec(carrier, vertices, weights))
}

/// The simplex filler for a chosen loop contraction.
#[derive(Debug, Clone)]
pub struct SimplexFiller<L: LoopCarrier = LoopContraction> {
    carrier: L,
}

impl<L: LoopCarrier> SimplexFiller<L> {
    pub fn new(carrier: L) -> Self {
        Self { carrier }
    }

    pub fn carrier(&self) -> &L {
        &self.carrier
    }

    pub fn evaluate(&self, vertices: &[L::Elem], weights: &[f64]) -> Result<L::Elem, FillError> {
        sigma_fill(&self.carrier, vertices, weights)
    }
}

impl SimplexFiller<LoopContraction> {
    pub fn dim(&self) -> usize {
        self.carrier.dim()
    }
}

/// Outcome of one numeric verification sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FillReport {
    pub check: String,
    pub samples: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl FillReport {
    fn new(check: &str, samples: usize, max_deviation: f64, tolerance: f64) -> Self {
        Self {
            check: check.to_string(),
            samples,
            max_deviation,
            tolerance,
            passed: max_deviation <= tolerance,
        }
    }
}

/// Random barycentric weights of length `len`, sometimes with zero entries
/// or a vertex, to reach the boundary cases.
pub fn random_barycentric(len: usize, rng: &mut dyn RngCore) -> Vec<f64> {
    let mode = rng.gen_range(0..10);
    if mode == 0 {
        let mut t = vec![0.0; len];
        t[rng.gen_range(0..len)] = 1.0;
        return t;
    }
    let mut raw: Vec<f64> = (0..len)
        .map(|_| -rng.gen_range(f64::EPSILON..1.0).ln())
        .collect();
    if mode == 1 && len > 1 {
        raw[rng.gen_range(0..len)] = 0.0;
    }
    let total: f64 = raw.iter().sum();
    let mut t: Vec<f64> = raw.iter().map(|x| x / total).collect();
    // Put the rounding error on the largest entry so the sum is 1 to within
    // an ulp.
    let err = 1.0 - t.iter().sum::<f64>();
    let k = (0..len)
        .max_by(|&a, &b| t[a].total_cmp(&t[b]))
        .expect("nonempty");
    t[k] += err;
    t
}

fn random_vertices<L: LoopCarrier>(
    carrier: &L,
    count: usize,
    rng: &mut dyn RngCore,
) -> Vec<L::Elem> {
    (0..count).map(|_| carrier.random_elem(rng)).collect()
}

/// `σ̂_n(v)(e_i) = v_i` for `n ≤ max_n`.
pub fn check_vertex_property<L: LoopCarrier>(
    filler: &SimplexFiller<L>,
    max_n: usize,
    samples: usize,
    tol: f64,
    rng: &mut dyn RngCore,
) -> Result<FillReport, FillError> {
    let c = filler.carrier();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let n = rng.gen_range(0..=max_n);
        let v = random_vertices(c, n + 1, rng);
        for i in 0..=n {
            let mut e = vec![0.0; n + 1];
            e[i] = 1.0;
            worst = worst.max(c.distance(&filler.evaluate(&v, &e)?, &v[i]));
        }
    }
    Ok(FillReport::new("vertex", samples, worst, tol))
}

/// `σ̂_n(v without v_i)(t) = σ̂_{n+1}(v)(t with 0 inserted at i)` for
/// `n ≤ max_n`.
pub fn check_face_compatibility<L: LoopCarrier>(
    filler: &SimplexFiller<L>,
    max_n: usize,
    samples: usize,
    tol: f64,
    rng: &mut dyn RngCore,
) -> Result<FillReport, FillError> {
    let c = filler.carrier();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let n = rng.gen_range(0..=max_n);
        let v = random_vertices(c, n + 2, rng);
        let t = random_barycentric(n + 1, rng);
        let i = rng.gen_range(0..=n + 1);
        let mut face = v.clone();
        face.remove(i);
        let mut t_big = t.clone();
        t_big.insert(i, 0.0);
        let lhs = filler.evaluate(&face, &t)?;
        let rhs = filler.evaluate(&v, &t_big)?;
        worst = worst.max(c.distance(&lhs, &rhs));
    }
    Ok(FillReport::new("face", samples, worst, tol))
}

/// `σ̂_n(v + w)(t) = σ̂_n(v)(t) + σ̂_n(w)(t)`.
pub fn check_additivity<L: LoopCarrier>(
    filler: &SimplexFiller<L>,
    max_n: usize,
    samples: usize,
    tol: f64,
    rng: &mut dyn RngCore,
) -> Result<FillReport, FillError> {
    let c = filler.carrier();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let n = rng.gen_range(0..=max_n);
        let v = random_vertices(c, n + 1, rng);
        let w = random_vertices(c, n + 1, rng);
        let t = random_barycentric(n + 1, rng);
        let sum: Vec<L::Elem> = v.iter().zip(&w).map(|(a, b)| c.add(a, b)).collect();
        let lhs = filler.evaluate(&sum, &t)?;
        let rhs = c.add(&filler.evaluate(&v, &t)?, &filler.evaluate(&w, &t)?);
        worst = worst.max(c.distance(&lhs, &rhs));
    }
    Ok(FillReport::new("additivity", samples, worst, tol))
}

/// `σ̂_n(v,…,v)(t) = v`.
pub fn check_diagonal_constancy<L: LoopCarrier>(
    filler: &SimplexFiller<L>,
    max_n: usize,
    samples: usize,
    tol: f64,
    rng: &mut dyn RngCore,
) -> Result<FillReport, FillError> {
    let c = filler.carrier();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let n = rng.gen_range(0..=max_n);
        let v = c.random_elem(rng);
        let t = random_barycentric(n + 1, rng);
        let out = filler.evaluate(&vec![v.clone(); n + 1], &t)?;
        worst = worst.max(c.distance(&out, &v));
    }
    Ok(FillReport::new("diagonal", samples, worst, tol))
}

/// Compares `σ̂_n` with the barycentric combination `Σ t_i v_i`, which it
/// equals for the linear contraction.
pub fn check_linear_oracle(
    filler: &SimplexFiller<LoopContraction>,
    max_n: usize,
    samples: usize,
    tol: f64,
    rng: &mut dyn RngCore,
) -> Result<FillReport, FillError> {
    let c = filler.carrier();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let n = rng.gen_range(0..=max_n);
        let v = random_vertices(c, n + 1, rng);
        let t = random_barycentric(n + 1, rng);
        let mut combo = vec![0.0; c.dim()];
        for (vi, ti) in v.iter().zip(&t) {
            for (acc, x) in combo.iter_mut().zip(vi) {
                *acc += ti * x;
            }
        }
        worst = worst.max(max_norm_distance(&filler.evaluate(&v, &t)?, &combo));
    }
    Ok(FillReport::new("linear-oracle", samples, worst, tol))
}

/// `Φ(v + w, t) = Φ(v, t) + Φ(w, t)`, `Φ(v,0) = v`, `Φ(v,1) = 0`.
pub fn check_loop_condition<L: LoopCarrier>(
    carrier: &L,
    samples: usize,
    tol: f64,
    rng: &mut dyn RngCore,
) -> FillReport {
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let v = carrier.random_elem(rng);
        let w = carrier.random_elem(rng);
        let t = rng.gen_range(0.0..=1.0);
        let lhs = carrier.contract(&carrier.add(&v, &w), t);
        let rhs = carrier.add(&carrier.contract(&v, t), &carrier.contract(&w, t));
        worst = worst
            .max(carrier.distance(&lhs, &rhs))
            .max(carrier.distance(&carrier.contract(&v, 0.0), &v))
            .max(carrier.distance(&carrier.contract(&v, 1.0), &carrier.zero()));
    }
    FillReport::new("loop", samples, worst, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn filler_endpoints() {
        let phi = LoopContraction::linear(2);
        let v0 = vec![1.0, 0.0];
        let w = vec![0.0, 1.0];
        assert_eq!(filler_f(&phi, &v0, &w, 1.0), v0);
        assert_eq!(filler_f(&phi, &v0, &w, 0.0), w);
        assert_eq!(filler_f(&phi, &v0, &w, 0.5), vec![0.5, 0.5]);
    }

    #[test]
    fn sigma_examples() {
        let phi = LoopContraction::linear(2);
        let v = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]];
        assert_eq!(sigma_fill(&phi, &v, &[1.0, 0.0, 0.0]).unwrap(), v[0]);
        let third = 1.0 / 3.0;
        let out = sigma_fill(&phi, &v, &[third, third, third]).unwrap();
        assert!(max_norm_distance(&out, &[third, third]) < 1e-15);
        let diag = vec![vec![0.3, -2.0]; 4];
        let out = sigma_fill(&LoopContraction::rotating(2), &diag, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert!(max_norm_distance(&out, &diag[0]) < 1e-15);
    }

    #[test]
    fn input_validation() {
        let phi = LoopContraction::linear(1);
        assert!(matches!(
            sigma_fill(&phi, &[vec![1.0]], &[0.5]),
            Err(FillError::Barycentric(_))
        ));
        assert!(matches!(
            sigma_fill(&phi, &[vec![1.0]], &[1.0, 0.0]),
            Err(FillError::Arity { .. })
        ));
        assert!(matches!(
            sigma_fill(&phi, &[vec![1.0, 2.0]], &[1.0]),
            Err(FillError::Dimension { .. })
        ));
        assert!(matches!(
            sigma_fill(&phi, &[], &[]),
            Err(FillError::NoVertices)
        ));
    }

    #[test]
    fn orientation_detection() {
        assert!(!LoopContraction::linear(2).is_reversed());
        let scaled = LoopContraction::scaling(2);
        assert!(scaled.is_reversed());
        assert_eq!(scaled.evaluate(&[2.0, 4.0], 0.25), vec![1.5, 3.0]);
        let bad = LoopContraction::from_fn(1, "id", |v, _| v.to_vec());
        assert!(matches!(bad, Err(FillError::Orientation(_))));
    }

    #[test]
    fn batteries_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        for dim in 1..=3 {
            for phi in [
                LoopContraction::linear(dim),
                LoopContraction::quadratic(dim),
                LoopContraction::rotating(dim),
                LoopContraction::scaling(dim),
            ] {
                let filler = SimplexFiller::new(phi);
                for r in [
                    check_vertex_property(&filler, 4, 100, 1e-12, &mut rng).unwrap(),
                    check_face_compatibility(&filler, 3, 100, 1e-12, &mut rng).unwrap(),
                    check_additivity(&filler, 4, 100, 1e-12, &mut rng).unwrap(),
                    check_diagonal_constancy(&filler, 4, 100, 1e-12, &mut rng).unwrap(),
                ] {
                    assert!(r.passed, "{r:?}");
                }
                assert!(check_loop_condition(filler.carrier(), 100, 1e-12, &mut rng).passed);
            }
        }
        let lin = SimplexFiller::new(LoopContraction::linear(3));
        assert!(
            check_linear_oracle(&lin, 4, 200, 1e-12, &mut rng)
                .unwrap()
                .passed
        );
    }

    #[test]
    fn rotating_differs_from_linear() {
        let v = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let a = sigma_fill(&LoopContraction::rotating(2), &v, &[0.5, 0.5]).unwrap();
        let b = sigma_fill(&LoopContraction::linear(2), &v, &[0.5, 0.5]).unwrap();
        assert!(max_norm_distance(&a, &b) > 0.1);
    }

    #[test]
    fn path_group() {
        let pg = PathGroup::new(2, DEFAULT_PATH_SAMPLES).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let g = pg.random_elem(&mut rng);
        let h = pg.random_elem(&mut rng);
        assert!(pg.distance(&path_group_contraction(&g, 1.0), &pg.zero()) == 0.0);
        assert!(pg.distance(&path_group_contraction(&g, 0.0), &g) < 1e-12);
        for s in [0.1, 0.37, 0.8] {
            let lhs = path_group_contraction(&pg.add(&g, &h), s);
            let rhs = pg.add(
                &path_group_contraction(&g, s),
                &path_group_contraction(&h, s),
            );
            assert!(pg.distance(&lhs, &rhs) < 1e-12);
        }
        let filler = SimplexFiller::new(pg);
        assert!(
            check_vertex_property(&filler, 3, 20, 1e-9, &mut rng)
                .unwrap()
                .passed
        );
        assert!(
            check_additivity(&filler, 3, 20, 1e-9, &mut rng)
                .unwrap()
                .passed
        );
        assert!(
            check_diagonal_constancy(&filler, 3, 20, 1e-9, &mut rng)
                .unwrap()
                .passed
        );
        assert!(
            check_face_compatibility(&filler, 2, 20, 1e-9, &mut rng)
                .unwrap()
                .passed
        );
    }

    #[test]
    fn path_validation() {
        assert_eq!(
            SampledPath::new(vec![vec![0.0]]),
            Err(FillError::PathSamples(1))
        );
        assert_eq!(
            SampledPath::new(vec![vec![1.0], vec![0.0]]),
            Err(FillError::PathStart)
        );
        let p = SampledPath::new(vec![vec![0.0], vec![2.0]]).unwrap();
        assert_eq!(p.at(0.25), vec![0.5]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn linear_sigma_is_barycentric(
                raw in proptest::collection::vec(0.01f64..1.0, 1..6),
                coords in proptest::collection::vec(-5.0f64..5.0, 6),
            ) {
                let total: f64 = raw.iter().sum();
                let t: Vec<f64> = raw.iter().map(|x| x / total).collect();
                let v: Vec<Vec<f64>> = (0..t.len()).map(|i| vec![coords[i]]).collect();
                let expected: f64 = t.iter().zip(&v).map(|(ti, vi)| ti * vi[0]).sum();
                let phi = LoopContraction::linear(1);
                // Barycentric sums may miss 1 by a few ulps; that is within tolerance.
                let out = sigma_fill(&phi, &v, &t).unwrap();
                prop_assert!((out[0] - expected).abs() < 1e-12);
            }
        }
    }
}
