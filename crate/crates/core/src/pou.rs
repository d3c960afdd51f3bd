//! Partition-of-unity constructions, evaluated on samples.
//!
//! Families live on a [`SampledDomain`] (or on sampled tuples of it) as dense
//! arrays with a declared support per index. The constructions are the bump
//! composite, the layered family, the numerability rescue, the product family
//! on powers, tent families on pseudometric balls, and plateau families for
//! shrunken covers of `ℤ_m`.

use std::collections::BTreeSet;

use rand::{Rng, RngCore};
use serde::Serialize;
use thiserror::Error;

use crate::bicomplex::{BicomplexError, PartitionFamily};
use crate::coeff::Coefficients;
use crate::model::{
    arc_cover, left_invariant_cover, shrink_relation_check, CoverModel, ModelError, Tuple,
};

/// Below this the bump function returns 0.
pub const BUMP_FLOOR: f64 = 1e-300;

/// Default number of layers for the rescue.
pub const DEFAULT_RESCUE_LAYERS: usize = 8;

/// Tolerance for the generalized-partition precondition.
pub const PARTITION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PouError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Bicomplex(#[from] BicomplexError),
    #[error("the base family sums to {sum} at sample {sample}, not 1")]
    NotPartition { sample: usize, sum: f64 },
    #[error("{0} samples are not covered by any layer")]
    Uncovered(usize),
    #[error("the normalizer vanishes at {0:?}")]
    ZeroNormalizer(Tuple),
    #[error("the domain has no pseudometric")]
    NoMetric,
    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),
    #[error("the domain has no samples")]
    EmptyDomain,
    #[error("need at least one arc")]
    NoArcs,
    #[error("shrink relation fails for m={m}, kV={kv}, kU={ku}")]
    ShrinkFails { m: usize, kv: usize, ku: usize },
    #[error("families have different sample counts ({0} vs {1})")]
    Shape(usize, usize),
}

/// `f(x) = e^{−1/x}` for `x > 0`, else 0.
pub fn bump(x: f64) -> f64 {
    if x < BUMP_FLOOR {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Pseudometrics on sampled one-dimensional domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Metric {
    /// Arc length on the circle of circumference 1.
    Circle,
    /// `|x − y|` on the line.
    Line,
}

/// Sample points with an optional pseudometric.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledDomain {
    positions: Vec<f64>,
    metric: Option<Metric>,
}

impl SampledDomain {
    pub fn new(positions: Vec<f64>, metric: Option<Metric>) -> Result<Self, PouError> {
        if positions.is_empty() {
            return Err(PouError::EmptyDomain);
        }
        Ok(Self { positions, metric })
    }

    /// `n` equally spaced samples on the circle `[0,1)`.
    pub fn circle(n: usize) -> Result<Self, PouError> {
        Self::new(
            (0..n).map(|k| k as f64 / n as f64).collect(),
            Some(Metric::Circle),
        )
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn metric(&self) -> Option<Metric> {
        self.metric
    }

    pub fn distance(&self, a: usize, b: usize) -> Option<f64> {
        let (x, y) = (self.positions[a], self.positions[b]);
        self.metric.map(|m| metric_distance(m, x, y))
    }

    /// Largest violation of symmetry, the triangle inequality and
    /// `d(x,x) = 0` over random sample triples.
    pub fn check_pseudometric(
        &self,
        triples: usize,
        rng: &mut dyn RngCore,
    ) -> Result<f64, PouError> {
        let metric = self.metric.ok_or(PouError::NoMetric)?;
        let n = self.len();
        let d = |a: usize, b: usize| metric_distance(metric, self.positions[a], self.positions[b]);
        let mut worst: f64 = 0.0;
        for _ in 0..triples {
            let (a, b, c) = (
                rng.gen_range(0..n),
                rng.gen_range(0..n),
                rng.gen_range(0..n),
            );
            worst = worst
                .max(d(a, a).abs())
                .max((d(a, b) - d(b, a)).abs())
                .max(d(a, c) - d(a, b) - d(b, c));
        }
        Ok(worst)
    }
}

fn metric_distance(metric: Metric, x: f64, y: f64) -> f64 {
    match metric {
        Metric::Line => (x - y).abs(),
        Metric::Circle => {
            let d = (x - y).rem_euclid(1.0);
            d.min(1.0 - d)
        }
    }
}

/// A family of real functions on a set of samples, one row per index, with
/// a declared support per index.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarFamily {
    values: Vec<Vec<f64>>,
    support: Vec<Vec<bool>>,
}

impl ScalarFamily {
    pub fn new(values: Vec<Vec<f64>>, support: Vec<Vec<bool>>) -> Result<Self, PouError> {
        let n = values.first().map_or(0, Vec::len);
        for row in values.iter().chain(&support_as_lens(&support)) {
            if row.len() != n {
                return Err(PouError::Shape(n, row.len()));
            }
        }
        if values.len() != support.len() {
            return Err(PouError::Shape(values.len(), support.len()));
        }
        Ok(Self { values, support })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sample_count(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn value(&self, i: usize, s: usize) -> f64 {
        self.values[i][s]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn in_support(&self, i: usize, s: usize) -> bool {
        self.support[i][s]
    }

    pub fn sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.sample_count()];
        for row in &self.values {
            for (acc, v) in out.iter_mut().zip(row) {
                *acc += v;
            }
        }
        out
    }

    /// `max_s |Σ_i φ_i(s) − 1|`.
    pub fn max_sum_deviation(&self) -> f64 {
        self.sums()
            .iter()
            .map(|s| (s - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Number of nonzero indices per sample.
    pub fn active_counts(&self) -> Vec<usize> {
        let mut out = vec![0; self.sample_count()];
        for row in &self.values {
            for (acc, v) in out.iter_mut().zip(row) {
                if *v != 0.0 {
                    *acc += 1;
                }
            }
        }
        out
    }

    pub fn max_active(&self) -> usize {
        self.active_counts().into_iter().max().unwrap_or(0)
    }

    /// Samples where every value is zero.
    pub fn uncovered(&self) -> Vec<usize> {
        self.active_counts()
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == 0)
            .map(|(s, _)| s)
            .collect()
    }

    /// Number of `(i, s)` with a nonzero value outside the declared support.
    pub fn support_violations(&self) -> usize {
        self.values
            .iter()
            .zip(&self.support)
            .map(|(row, sup)| {
                row.iter()
                    .zip(sup)
                    .filter(|(v, ok)| **v != 0.0 && !**ok)
                    .count()
            })
            .sum()
    }

    /// Checks `Σ_i φ_i = 1` within [`PARTITION_TOLERANCE`] at every sample.
    pub fn check_partition(&self) -> Result<(), PouError> {
        match self
            .sums()
            .iter()
            .position(|s| (s - 1.0).abs() > PARTITION_TOLERANCE)
        {
            Some(sample) => Err(PouError::NotPartition {
                sample,
                sum: self.sums()[sample],
            }),
            None => Ok(()),
        }
    }

    /// Divides by the pointwise sum; supports are unchanged.
    pub fn normalized(&self) -> Result<Self, PouError> {
        let sums = self.sums();
        if let Some(s) = sums.iter().position(|x| *x == 0.0) {
            return Err(PouError::ZeroNormalizer(vec![s]));
        }
        let values = self
            .values
            .iter()
            .map(|row| row.iter().zip(&sums).map(|(v, s)| v / s).collect())
            .collect();
        Ok(Self {
            values,
            support: self.support.clone(),
        })
    }
}

fn support_as_lens(support: &[Vec<bool>]) -> Vec<Vec<f64>> {
    support.iter().map(|s| vec![0.0; s.len()]).collect()
}

/// `k` overlapping arcs on a sampled circle: arc `i` is the open arc of
/// half-width `1/k` around `i/k`, and `φ_i` the normalized tent on it. The
/// cozero sets are exactly the sampled arcs.
pub fn arc_family(domain: &SampledDomain, arcs: usize) -> Result<ScalarFamily, PouError> {
    if arcs == 0 {
        return Err(PouError::NoArcs);
    }
    let half = 1.0 / arcs as f64;
    let mut values = Vec::with_capacity(arcs);
    let mut support = Vec::with_capacity(arcs);
    for i in 0..arcs {
        let centre = i as f64 / arcs as f64;
        let row: Vec<f64> = domain
            .positions()
            .iter()
            .map(|&x| (1.0 - metric_distance(Metric::Circle, x, centre) / half).max(0.0))
            .collect();
        support.push(row.iter().map(|v| *v > 0.0).collect());
        values.push(row);
    }
    ScalarFamily::new(values, support)?.normalized()
}

/// `φ_{i,n} = f ∘ (φ_i² − 1/(n+1)²)`. Declared supports are those of the
/// base.
pub fn layered_family(base: &ScalarFamily, n: usize) -> Result<ScalarFamily, PouError> {
    base.check_partition()?;
    let threshold = 1.0 / ((n + 1) * (n + 1)) as f64;
    let values = base
        .values
        .iter()
        .map(|row| row.iter().map(|p| bump(p * p - threshold)).collect())
        .collect();
    ScalarFamily::new(values, base.support.clone())
}

/// The rescued family: one row per pair `(i, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RescueFamily {
    pub family: ScalarFamily,
    /// `(i, n)` for each row of `family`.
    pub origin: Vec<(usize, usize)>,
}

/// Builds `q_n = Σ_{i, k<n} φ_{i,k}` and `ψ_{i,n} = f ∘ (φ_{i,n} − n·q_n)`
/// for `n ≤ n_max` and normalizes.
///
/// `layers[n]` is the family `{φ_{i,n}}`. Layers with values above 1 are
/// first mapped through `φ ↦ φ²/(1+φ²)`. The normalization is carried out
/// on `log ψ = −1/a`, so that values of `ψ` below the floating-point range
/// still contribute their correct share.
pub fn numerability_rescue(
    layers: &[ScalarFamily],
    n_max: usize,
) -> Result<RescueFamily, PouError> {
    let layers = &layers[..layers.len().min(n_max + 1)];
    let Some(first) = layers.first() else {
        return Err(PouError::EmptyDomain);
    };
    let (indices, samples) = (first.len(), first.sample_count());
    for l in layers {
        if l.sample_count() != samples || l.len() != indices {
            return Err(PouError::Shape(samples, l.sample_count()));
        }
    }
    let layers: Vec<ScalarFamily> = layers
        .iter()
        .map(|l| {
            if l.values.iter().flatten().any(|v| *v > 1.0) {
                let values = l
                    .values
                    .iter()
                    .map(|row| row.iter().map(|p| p * p / (1.0 + p * p)).collect())
                    .collect();
                ScalarFamily {
                    values,
                    support: l.support.clone(),
                }
            } else {
                l.clone()
            }
        })
        .collect();

    // Arguments a_{i,n} = φ_{i,n} − n·q_n.
    let mut origin = Vec::new();
    let mut args: Vec<Vec<f64>> = Vec::new();
    let mut q = vec![0.0; samples];
    for (n, layer) in layers.iter().enumerate() {
        for i in 0..indices {
            origin.push((i, n));
            args.push(
                (0..samples)
                    .map(|s| layer.values[i][s] - n as f64 * q[s])
                    .collect(),
            );
        }
        for row in &layer.values {
            for (acc, v) in q.iter_mut().zip(row) {
                *acc += v;
            }
        }
    }

    let mut values = vec![vec![0.0; samples]; args.len()];
    let mut uncovered = 0;
    for s in 0..samples {
        let logs: Vec<Option<f64>> = args
            .iter()
            .map(|a| (a[s] > 0.0).then(|| -1.0 / a[s]))
            .collect();
        let Some(top) = logs.iter().flatten().copied().reduce(f64::max) else {
            uncovered += 1;
            continue;
        };
        let weights: Vec<f64> = logs
            .iter()
            .map(|l| l.map_or(0.0, |l| (l - top).exp()))
            .collect();
        let total: f64 = weights.iter().sum();
        for (row, w) in values.iter_mut().zip(&weights) {
            row[s] = w / total;
        }
    }
    if uncovered > 0 {
        return Err(PouError::Uncovered(uncovered));
    }
    let support = origin
        .iter()
        .map(|&(i, _)| first.support[i].clone())
        .collect();
    Ok(RescueFamily {
        family: ScalarFamily::new(values, support)?,
        origin,
    })
}

/// Layers `0..=n_max` of a base partition followed by the rescue.
pub fn rescue_from_partition(base: &ScalarFamily, n_max: usize) -> Result<RescueFamily, PouError> {
    let layers = (0..=n_max)
        .map(|n| layered_family(base, n))
        .collect::<Result<Vec<_>, _>>()?;
    numerability_rescue(&layers, n_max)
}

/// `φ_{q,i}(x) = |φ_i(x_0) ⋯ φ_i(x_q)|` on sampled tuples, normalized by
/// `φ_q = Σ_i φ_{q,i}`. Declared supports: `x ∈ U_i^{q+1}`.
pub fn product_family(base: &ScalarFamily, tuples: &[Tuple]) -> Result<ScalarFamily, PouError> {
    base.check_partition()?;
    let mut values = vec![vec![0.0; tuples.len()]; base.len()];
    let mut support = vec![vec![false; tuples.len()]; base.len()];
    for (s, x) in tuples.iter().enumerate() {
        for i in 0..base.len() {
            values[i][s] = x.iter().map(|&u| base.values[i][u]).product::<f64>().abs();
            support[i][s] = x.iter().all(|&u| base.support[i][u]);
        }
    }
    let raw = ScalarFamily::new(values, support)?;
    raw.normalized().map_err(|e| match e {
        PouError::ZeroNormalizer(s) => PouError::ZeroNormalizer(tuples[s[0]].clone()),
        other => other,
    })
}

/// Random tuples of `𝔘[q]` for the cover by the supports of `base`: pick an
/// index, then `q + 1` samples in its support.
pub fn sample_neighborhood(
    base: &ScalarFamily,
    q: usize,
    count: usize,
    rng: &mut dyn RngCore,
) -> Vec<Tuple> {
    let members: Vec<Vec<usize>> = base
        .support
        .iter()
        .map(|sup| (0..sup.len()).filter(|&s| sup[s]).collect())
        .filter(|m: &Vec<usize>| !m.is_empty())
        .collect();
    (0..count)
        .map(|_| {
            let m = &members[rng.gen_range(0..members.len())];
            (0..=q).map(|_| m[rng.gen_range(0..m.len())]).collect()
        })
        .collect()
}

/// Tents `φ_c(y) = max(0, 1 − d(c,y)/ε)` around `centres` (sample indices),
/// normalized. Cozero sets are the sampled open `ε`-balls.
pub fn ball_family(
    domain: &SampledDomain,
    eps: f64,
    centres: &[usize],
) -> Result<ScalarFamily, PouError> {
    if !(eps > 0.0) {
        return Err(PouError::InvalidEpsilon(eps));
    }
    let metric = domain.metric().ok_or(PouError::NoMetric)?;
    let pos = domain.positions();
    let mut values = Vec::with_capacity(centres.len());
    let mut support = Vec::with_capacity(centres.len());
    for &c in centres {
        let d: Vec<f64> = pos
            .iter()
            .map(|&y| metric_distance(metric, pos[c], y))
            .collect();
        values.push(d.iter().map(|x| (1.0 - x / eps).max(0.0)).collect());
        support.push(d.iter().map(|x| *x < eps).collect());
    }
    ScalarFamily::new(values, support)?.normalized()
}

/// Every `⌈n / count⌉`-th sample, at most `count` centres.
pub fn evenly_spaced_centres(domain: &SampledDomain, count: usize) -> Vec<usize> {
    let n = domain.len();
    let step = n.div_ceil(count.max(1)).max(1);
    (0..n).step_by(step).collect()
}

/// A plateau family for the shrunken cover of `ℤ_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateauFamily<S> {
    /// `ℤ_m` covered by the radius-`kU` arcs `gU`.
    pub u_model: CoverModel,
    /// `ℤ_m` covered by the radius-`kV` arcs `gV`.
    pub v_model: CoverModel,
    pub family: PartitionFamily<S>,
}

impl<S: Clone> PlateauFamily<S> {
    /// The tuples of `𝔙[q]`, where the family sums to 1.
    pub fn v_domain(&self) -> Result<BTreeSet<Tuple>, PouError> {
        Ok(self
            .v_model
            .diagonal_neighborhood(self.family.level())?
            .iter()
            .cloned()
            .collect())
    }
}

fn circular(m: usize, a: usize, b: usize) -> usize {
    let d = (a + m - b) % m;
    d.min(m - d)
}

/// `φ_{q,g}(x) = 1` iff `g = x_0` and every `x_k` is within `2·kV` of `x_0`,
/// that is `x ∈ (x_0 V⁻¹V)^{q+1}`.
///
/// Its support lies in `(gU)^{q+1}` because `V⁻¹V ⊆ U`, and it sums to 1 on
/// `𝔙[q]`: if all `x_k` lie in one `hV`, they are pairwise within `2·kV`.
pub fn plateau_family<C: Coefficients>(
    coeff: &C,
    m: usize,
    ku: usize,
    kv: usize,
    q: usize,
) -> Result<PlateauFamily<C::Scalar>, PouError> {
    if !shrink_relation_check(m, kv, ku) {
        return Err(PouError::ShrinkFails { m, kv, ku });
    }
    let u_model = left_invariant_cover(m, ku)?;
    let v_model = arc_cover(m, kv)?;
    let domain = u_model.diagonal_neighborhood(q)?;
    let entries = domain
        .iter()
        .filter(|x| x.iter().all(|&u| circular(m, u, x[0]) <= 2 * kv))
        .map(|x| (x[0], x.clone(), coeff.scalar_from_int(1)))
        .collect::<Vec<_>>();
    let family = PartitionFamily::new(coeff, &u_model, q, entries)?;
    Ok(PlateauFamily {
        u_model,
        v_model,
        family,
    })
}

/// Summary of a sampled family check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PouReport {
    pub construction: String,
    pub samples: usize,
    pub indices: usize,
    pub max_sum_deviation: f64,
    pub uncovered_samples: usize,
    pub max_active_count: usize,
    pub support_violations: usize,
    pub tolerance: f64,
    pub passed: bool,
}

impl PouReport {
    pub fn new(construction: &str, family: &ScalarFamily, tolerance: f64) -> Self {
        let max_sum_deviation = family.max_sum_deviation();
        let uncovered_samples = family.uncovered().len();
        let support_violations = family.support_violations();
        Self {
            construction: construction.to_string(),
            samples: family.sample_count(),
            indices: family.len(),
            max_sum_deviation,
            uncovered_samples,
            max_active_count: family.max_active(),
            support_violations,
            tolerance,
            passed: max_sum_deviation <= tolerance
                && uncovered_samples == 0
                && support_violations == 0,
        }
    }
}
