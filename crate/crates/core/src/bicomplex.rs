//! The Čech–local double complex `Č^p(𝔘, A^q)`, its augmentations, the
//! total complex, and the row contractions built from partition families.
//!
//! Horizontal differential: the Čech coboundary `δ`. Vertical differential:
//! `(-1)^p` times the local differential applied componentwise. Rows are
//! augmented by `i*` from `A^q(𝔘)`, columns by `j*` from classical Čech
//! cochains.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use rand::{Rng, RngCore};
use thiserror::Error;

use crate::coeff::{CoefficientSystem, Coefficients, RealVectors, DEFAULT_TOLERANCE};
use crate::complexes::{
    accumulate, power_tuples, sparse_diff, CechPage, CochainError, LocalCochain, LocalComplex,
    SimplicialComplex, SparseFunction,
};
use crate::homology::{
    cohomology_profile, BoundaryMatrix, CochainComplex, CohomologyProfile, HomologyError,
};
use crate::loopfill::{FillError, SimplexFiller};
use crate::model::{CoverModel, ModelError, Tuple};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BicomplexError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Cochain(#[from] CochainError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error(transparent)]
    Fill(#[from] FillError),
    #[error("total degree {degree} exceeds the truncation bound {max}")]
    Truncation { degree: usize, max: usize },
    #[error(
        "family weight for index {index} is nonzero at {tuple:?}, outside its declared support"
    )]
    Support { index: usize, tuple: Tuple },
    #[error("family does not sum to 1 at {0:?}")]
    NotUnity(Tuple),
    #[error("family is at level {family}, page is at level {page}")]
    LevelMismatch { family: usize, page: usize },
    #[error("row contraction needs p >= 1; use the augmentation entry point for p = 0")]
    AugmentedDegree,
    #[error("filler dimension {filler} does not match coefficient dimension {coeff}")]
    FillerMismatch { filler: usize, coeff: usize },
}

fn alternating(i: usize) -> i64 {
    if i.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// An element of `Tot^n`: one page per bidegree `(p, n − p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TotalCochain<V> {
    degree: usize,
    pieces: Vec<CechPage<V>>,
}

impl<V: Clone> TotalCochain<V> {
    pub fn zero(degree: usize) -> Self {
        Self {
            degree,
            pieces: (0..=degree)
                .map(|p| CechPage::zero(p, degree - p))
                .collect(),
        }
    }

    /// The total cochain concentrated in one page.
    pub fn from_page(page: CechPage<V>) -> Self {
        let degree = page.p() + page.q();
        let mut x = Self::zero(degree);
        let p = page.p();
        x.pieces[p] = page;
        x
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// The piece in bidegree `(p, degree − p)`.
    pub fn piece(&self, p: usize) -> &CechPage<V> {
        &self.pieces[p]
    }

    pub fn pieces(&self) -> &[CechPage<V>] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.iter().all(CechPage::is_zero)
    }

    pub fn random<C: Coefficients<Value = V>>(
        coeff: &C,
        model: &CoverModel,
        degree: usize,
        density: f64,
        rng: &mut dyn RngCore,
    ) -> Result<Self, BicomplexError> {
        let pieces = (0..=degree)
            .map(|p| CechPage::random(coeff, model, p, degree - p, density, rng))
            .collect::<Result<_, _>>()?;
        Ok(Self { degree, pieces })
    }

    pub fn add<C: Coefficients<Value = V>>(&self, coeff: &C, other: &Self) -> Self {
        assert_eq!(self.degree, other.degree, "degree mismatch");
        Self {
            degree: self.degree,
            pieces: self
                .pieces
                .iter()
                .zip(&other.pieces)
                .map(|(a, b)| a.add(coeff, b))
                .collect(),
        }
    }

    pub fn approx_eq<C: Coefficients<Value = V>>(&self, coeff: &C, other: &Self, tol: f64) -> bool {
        self.degree == other.degree
            && self
                .pieces
                .iter()
                .zip(&other.pieces)
                .all(|(a, b)| a.approx_eq(coeff, b, tol))
    }
}

/// The vertical differential `d_v = (-1)^p d` on one page.
pub fn vertical_differential<C: Coefficients>(
    coeff: &C,
    model: &CoverModel,
    page: &CechPage<C::Value>,
) -> CechPage<C::Value> {
    let d = page.componentwise_differential(coeff, model);
    if page.p() % 2 == 0 {
        d
    } else {
        d.scale_by(coeff, &coeff.scalar_from_int(-1))
    }
}

/// The horizontal differential `d_h = δ` on one page.
pub fn horizontal_differential<C: Coefficients>(
    coeff: &C,
    model: &CoverModel,
    page: &CechPage<C::Value>,
) -> CechPage<C::Value> {
    page.cech_coboundary(coeff, model)
}

/// Basis of one page: pairs `(I, x)` with `I` in the nerve and
/// `x ∈ (U_I)^{q+1}`, ordered by `I` then `x`.
#[derive(Debug)]
struct PageBasis {
    elements: Vec<(Tuple, Tuple)>,
    index: HashMap<(Tuple, Tuple), usize>,
}

/// The double complex of a model, truncated at a total degree.
///
/// Bases of the pages are built on first use and cached.
#[derive(Debug)]
pub struct DoubleComplex<'m> {
    model: &'m CoverModel,
    max_degree: usize,
    bases: Mutex<HashMap<(usize, usize), Arc<PageBasis>>>,
}

impl<'m> DoubleComplex<'m> {
    /// Pages are available up to total degree `max_degree + 1`, which is what
    /// the cohomology through `max_degree` needs.
    pub fn new(model: &'m CoverModel, max_degree: usize) -> Self {
        Self {
            model,
            max_degree,
            bases: Mutex::new(HashMap::new()),
        }
    }

    pub fn model(&self) -> &CoverModel {
        self.model
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    fn check_degree(&self, degree: usize) -> Result<(), BicomplexError> {
        if degree > self.max_degree + 1 {
            Err(BicomplexError::Truncation {
                degree,
                max: self.max_degree + 1,
            })
        } else {
            Ok(())
        }
    }

    fn basis(&self, p: usize, q: usize) -> Result<Arc<PageBasis>, ModelError> {
        if let Some(b) = self.bases.lock().expect("basis cache").get(&(p, q)) {
            return Ok(b.clone());
        }
        self.model.check_budget(q + 1)?;
        let mut elements = Vec::new();
        for indices in self.model.nerve().of_dimension(p) {
            let members = self.model.intersection_unchecked(indices);
            for x in power_tuples(&members, q + 1) {
                elements.push((indices.clone(), x));
            }
        }
        let index = elements
            .iter()
            .cloned()
            .enumerate()
            .map(|(k, e)| (e, k))
            .collect();
        let basis = Arc::new(PageBasis { elements, index });
        self.bases
            .lock()
            .expect("basis cache")
            .insert((p, q), basis.clone());
        Ok(basis)
    }

    /// Dimension of `Č^p(𝔘, A^q)` with one-dimensional coefficients.
    pub fn page_dim(&self, p: usize, q: usize) -> Result<usize, BicomplexError> {
        Ok(self.basis(p, q)?.elements.len())
    }

    /// `D = d_h + d_v`.
    pub fn total_differential<C: Coefficients>(
        &self,
        coeff: &C,
        x: &TotalCochain<C::Value>,
    ) -> Result<TotalCochain<C::Value>, BicomplexError> {
        self.check_degree(x.degree + 1)?;
        let mut out = TotalCochain::zero(x.degree + 1);
        for (p, page) in x.pieces.iter().enumerate() {
            let h = horizontal_differential(coeff, self.model, page);
            out.pieces[p + 1] = out.pieces[p + 1].add(coeff, &h);
            let v = vertical_differential(coeff, self.model, page);
            out.pieces[p] = out.pieces[p].add(coeff, &v);
        }
        Ok(out)
    }

    fn page_matrix_entries(
        &self,
        p: usize,
        q: usize,
        horizontal: bool,
        vertical: bool,
        row_offset: &dyn Fn(usize) -> Option<usize>,
        col_offset: usize,
        m: &mut BoundaryMatrix,
    ) -> Result<(), ModelError> {
        let source = self.basis(p, q)?;
        let next_h = if horizontal {
            Some(self.basis(p + 1, q)?)
        } else {
            None
        };
        let next_v = if vertical {
            Some(self.basis(p, q + 1)?)
        } else {
            None
        };
        let v_sign = alternating(p);
        for (c, (indices, x)) in source.elements.iter().enumerate() {
            let col = col_offset + c;
            if let (Some(target), Some(off)) = (&next_h, row_offset(p + 1)) {
                let mask = self.model.tuple_mask(x);
                for j in 0..self.model.cover_len() {
                    if mask >> j & 1 == 0 || indices.binary_search(&j).is_ok() {
                        continue;
                    }
                    let pos = indices.partition_point(|&i| i < j);
                    let mut bigger = indices.clone();
                    bigger.insert(pos, j);
                    let r = target.index[&(bigger, x.clone())];
                    m.add_entry(off + r, col, alternating(pos));
                }
            }
            if let (Some(target), Some(off)) = (&next_v, row_offset(p)) {
                let members = self.model.intersection_unchecked(indices);
                for pos in 0..=x.len() {
                    for &u in &members {
                        let mut y = Vec::with_capacity(x.len() + 1);
                        y.extend_from_slice(&x[..pos]);
                        y.push(u);
                        y.extend_from_slice(&x[pos..]);
                        let r = target.index[&(indices.clone(), y)];
                        m.add_entry(off + r, col, v_sign * alternating(pos));
                    }
                }
            }
        }
        Ok(())
    }

    /// Offsets of the pages `(p, n − p)` inside the basis of `Tot^n`.
    fn total_offsets(&self, n: usize) -> Result<(Vec<usize>, usize), BicomplexError> {
        let mut offsets = Vec::with_capacity(n + 1);
        let mut total = 0;
        for p in 0..=n {
            offsets.push(total);
            total += self.page_dim(p, n - p)?;
        }
        Ok((offsets, total))
    }
}

/// The total complex `Tot Č*(𝔘, A*)`.
pub struct TotalComplex<'a, 'm>(pub &'a DoubleComplex<'m>);

impl CochainComplex for TotalComplex<'_, '_> {
    fn dim(&self, n: usize) -> Result<usize, HomologyError> {
        self.0
            .check_degree(n)
            .map_err(|_| HomologyError::Truncation {
                degree: n,
                max: self.0.max_degree + 1,
            })?;
        Ok(self.0.total_offsets(n).map_err(to_homology)?.1)
    }

    fn differential(&self, n: usize) -> Result<BoundaryMatrix, HomologyError> {
        let dc = self.0;
        if n > dc.max_degree {
            return Err(HomologyError::Truncation {
                degree: n,
                max: dc.max_degree,
            });
        }
        let (src, cols) = dc.total_offsets(n).map_err(to_homology)?;
        let (dst, rows) = dc.total_offsets(n + 1).map_err(to_homology)?;
        let mut m = BoundaryMatrix::zeros(rows, cols);
        for p in 0..=n {
            let row_offset = |pp: usize| dst.get(pp).copied();
            dc.page_matrix_entries(p, n - p, true, true, &row_offset, src[p], &mut m)?;
        }
        Ok(m)
    }
}

/// Row `q` of the double complex, `Č^0(𝔘, A^q) → Č^1(𝔘, A^q) → …`,
/// without augmentation.
pub struct RowComplex<'a, 'm> {
    pub dc: &'a DoubleComplex<'m>,
    pub q: usize,
}

impl CochainComplex for RowComplex<'_, '_> {
    fn dim(&self, p: usize) -> Result<usize, HomologyError> {
        self.dc.page_dim(p, self.q).map_err(to_homology)
    }

    fn differential(&self, p: usize) -> Result<BoundaryMatrix, HomologyError> {
        let rows = self.dim(p + 1)?;
        let mut m = BoundaryMatrix::zeros(rows, self.dim(p)?);
        self.dc.page_matrix_entries(
            p,
            self.q,
            true,
            false,
            &|pp| (pp == p + 1).then_some(0),
            0,
            &mut m,
        )?;
        Ok(m)
    }
}

/// Column `p` of the double complex, `Č^p(𝔘, A^0) → Č^p(𝔘, A^1) → …`,
/// without augmentation.
pub struct ColumnComplex<'a, 'm> {
    pub dc: &'a DoubleComplex<'m>,
    pub p: usize,
}

impl CochainComplex for ColumnComplex<'_, '_> {
    fn dim(&self, q: usize) -> Result<usize, HomologyError> {
        self.dc.page_dim(self.p, q).map_err(to_homology)
    }

    fn differential(&self, q: usize) -> Result<BoundaryMatrix, HomologyError> {
        let rows = self.dim(q + 1)?;
        let mut m = BoundaryMatrix::zeros(rows, self.dim(q)?);
        let p = self.p;
        self.dc
            .page_matrix_entries(p, q, false, true, &|pp| (pp == p).then_some(0), 0, &mut m)?;
        Ok(m)
    }
}

/// The classical Čech complex `Č*(𝔘; V)`: simplicial cochains on the nerve.
pub fn cech_complex(model: &CoverModel) -> SimplicialComplex {
    SimplicialComplex::new(model.nerve().simplices())
}

fn to_homology(e: BicomplexError) -> HomologyError {
    match e {
        BicomplexError::Model(m) => HomologyError::Model(m),
        BicomplexError::Homology(h) => h,
        BicomplexError::Truncation { degree, max } => HomologyError::Truncation { degree, max },
        other => HomologyError::Shape(other.to_string()),
    }
}

/// Cohomology of `Tot Č*(𝔘, A*)` through `max_degree`.
pub fn cohomology_of_total(
    model: &CoverModel,
    system: CoefficientSystem,
    max_degree: usize,
) -> Result<CohomologyProfile, BicomplexError> {
    let dc = DoubleComplex::new(model, max_degree);
    Ok(cohomology_profile(system, &TotalComplex(&dc), max_degree)?)
}

/// Cohomology of row `q` (unaugmented): `A^q(𝔘)` in degree 0, zero above.
pub fn cohomology_of_row(
    model: &CoverModel,
    system: CoefficientSystem,
    q: usize,
    max_degree: usize,
) -> Result<CohomologyProfile, BicomplexError> {
    let dc = DoubleComplex::new(model, max_degree + q);
    Ok(cohomology_profile(
        system,
        &RowComplex { dc: &dc, q },
        max_degree,
    )?)
}

/// Cohomology of column `p` (unaugmented): `Č^p(𝔘)` in degree 0, zero above.
pub fn cohomology_of_column(
    model: &CoverModel,
    system: CoefficientSystem,
    p: usize,
    max_degree: usize,
) -> Result<CohomologyProfile, BicomplexError> {
    let dc = DoubleComplex::new(model, max_degree + p);
    Ok(cohomology_profile(
        system,
        &ColumnComplex { dc: &dc, p },
        max_degree,
    )?)
}

/// Cohomology of the local complex `A*(𝔘)`.
pub fn cohomology_of_local(
    model: &CoverModel,
    system: CoefficientSystem,
    max_degree: usize,
) -> Result<CohomologyProfile, BicomplexError> {
    Ok(cohomology_profile(
        system,
        &LocalComplex::new(model),
        max_degree,
    )?)
}

/// Cohomology of the classical Čech complex `Č*(𝔘)`.
pub fn cohomology_of_cech(
    model: &CoverModel,
    system: CoefficientSystem,
    max_degree: usize,
) -> Result<CohomologyProfile, BicomplexError> {
    Ok(cohomology_profile(
        system,
        &cech_complex(model),
        max_degree,
    )?)
}

/// `i*`: restricts a local cochain to each `U_i^{q+1}`, giving a `(0, q)` page.
pub fn augment_i<C: Coefficients>(
    coeff: &C,
    model: &CoverModel,
    f: &LocalCochain<C::Value>,
) -> CechPage<C::Value> {
    let mut page = CechPage::zero(0, f.degree());
    for (x, v) in f.values() {
        let mask = model.tuple_mask(x);
        for i in 0..model.cover_len() {
            if mask >> i & 1 == 1 {
                page.add_raw(coeff, vec![i], x.clone(), v.clone());
            }
        }
    }
    page
}

/// A classical Čech cochain: one value per nerve simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct CechCochain<V> {
    degree: usize,
    values: SparseFunction<V>,
}

impl<V: Clone> CechCochain<V> {
    /// Keys must be nerve simplices of dimension `degree`.
    pub fn new<C: Coefficients<Value = V>>(
        coeff: &C,
        model: &CoverModel,
        degree: usize,
        values: SparseFunction<V>,
    ) -> Result<Self, BicomplexError> {
        let nerve = model.nerve();
        let mut kept = SparseFunction::new();
        for (s, v) in values {
            if s.len() != degree + 1 || !nerve.contains(&s) {
                return Err(CochainError::UnknownSimplex(s).into());
            }
            coeff.check_value(&v).map_err(CochainError::from)?;
            if !coeff.is_zero(&v) {
                kept.insert(s, v);
            }
        }
        Ok(Self {
            degree,
            values: kept,
        })
    }

    pub fn random<C: Coefficients<Value = V>>(
        coeff: &C,
        model: &CoverModel,
        degree: usize,
        rng: &mut dyn RngCore,
    ) -> Self {
        let mut values = SparseFunction::new();
        for s in model.nerve().of_dimension(degree) {
            let v = coeff.random_value(rng);
            if !coeff.is_zero(&v) {
                values.insert(s.clone(), v);
            }
        }
        Self { degree, values }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn values(&self) -> &SparseFunction<V> {
        &self.values
    }

    /// The nerve coboundary.
    pub fn coboundary<C: Coefficients<Value = V>>(&self, coeff: &C, model: &CoverModel) -> Self {
        let mut out = SparseFunction::new();
        for s in model.nerve().of_dimension(self.degree + 1) {
            let mut acc = coeff.zero();
            for k in 0..s.len() {
                let face: Tuple = s
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != k)
                    .map(|(_, &x)| x)
                    .collect();
                if let Some(v) = self.values.get(&face) {
                    acc = coeff.add(&acc, &coeff.signed(alternating(k), v));
                }
            }
            if !coeff.is_zero(&acc) {
                out.insert(s.clone(), acc);
            }
        }
        Self {
            degree: self.degree + 1,
            values: out,
        }
    }
}

/// `j*`: the `(p, 0)` page of constant functions.
pub fn augment_j<C: Coefficients>(
    coeff: &C,
    model: &CoverModel,
    c: &CechCochain<C::Value>,
) -> CechPage<C::Value> {
    let mut page = CechPage::zero(c.degree(), 0);
    for (indices, v) in c.values() {
        for u in model.intersection_unchecked(indices) {
            page.add_raw(coeff, indices.clone(), vec![u], v.clone());
        }
    }
    page
}

/// A point-finite family `{φ_{q,i}}` on `𝔘[q]` with supports declared to lie
/// in `U_i^{q+1}`.
///
/// Stored per tuple: the nonzero weights in increasing index order.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionFamily<S> {
    level: usize,
    weights: BTreeMap<Tuple, Vec<(usize, S)>>,
}

impl<S: Clone> PartitionFamily<S> {
    /// Validates supports: a nonzero weight of index `i` at `x` requires
    /// `x ∈ U_i^{q+1}`. Weights given at tuples outside `𝔘[q]` are rejected
    /// by the same rule.
    pub fn new<C: Coefficients<Scalar = S>>(
        coeff: &C,
        model: &CoverModel,
        level: usize,
        entries: impl IntoIterator<Item = (usize, Tuple, S)>,
    ) -> Result<Self, BicomplexError> {
        let mut weights: BTreeMap<Tuple, Vec<(usize, S)>> = BTreeMap::new();
        for (i, x, w) in entries {
            if coeff.scalar_is_zero(&w) {
                continue;
            }
            if i >= model.cover_len() {
                return Err(ModelError::IndexOutOfRange {
                    index: i,
                    len: model.cover_len(),
                }
                .into());
            }
            if x.len() != level + 1
                || x.iter().any(|&u| u >= model.num_points())
                || !model.tuple_in_set(i, &x)
            {
                return Err(BicomplexError::Support { index: i, tuple: x });
            }
            let slot = weights.entry(x).or_default();
            match slot.binary_search_by_key(&i, |e| e.0) {
                Ok(k) => slot[k].1 = coeff.scalar_add(&slot[k].1, &w),
                Err(k) => slot.insert(k, (i, w)),
            }
        }
        for slot in weights.values_mut() {
            slot.retain(|(_, w)| !coeff.scalar_is_zero(w));
        }
        weights.retain(|_, s| !s.is_empty());
        Ok(Self { level, weights })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Nonzero weights at `x`, in increasing index order.
    pub fn active(&self, x: &[usize]) -> &[(usize, S)] {
        self.weights.get(x).map_or(&[], Vec::as_slice)
    }

    pub fn weight(&self, i: usize, x: &[usize]) -> Option<&S> {
        self.active(x).iter().find(|e| e.0 == i).map(|e| &e.1)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Tuple, &[(usize, S)])> {
        self.weights.iter().map(|(x, w)| (x, w.as_slice()))
    }

    /// Largest number of nonzero weights at one tuple.
    pub fn max_active(&self) -> usize {
        self.weights.values().map(Vec::len).max().unwrap_or(0)
    }

    /// `Σ_i φ_{q,i}(x)`.
    pub fn weight_sum<C: Coefficients<Scalar = S>>(&self, coeff: &C, x: &[usize]) -> S {
        self.active(x)
            .iter()
            .fold(coeff.scalar_from_int(0), |acc, (_, w)| {
                coeff.scalar_add(&acc, w)
            })
    }

    /// Multiplies every weight by the integer `k`.
    pub fn scaled<C: Coefficients<Scalar = S>>(&self, coeff: &C, k: i64) -> Self {
        let k = coeff.scalar_from_int(k);
        let mut weights = BTreeMap::new();
        for (x, ws) in &self.weights {
            let ws: Vec<(usize, S)> = ws
                .iter()
                .map(|(i, w)| (*i, coeff.scalar_mul(&k, w)))
                .filter(|(_, w)| !coeff.scalar_is_zero(w))
                .collect();
            if !ws.is_empty() {
                weights.insert(x.clone(), ws);
            }
        }
        Self {
            level: self.level,
            weights,
        }
    }

    /// First tuple of `domain` where the weights do not sum to 1.
    pub fn unity_defect<'a, C: Coefficients<Scalar = S>>(
        &self,
        coeff: &C,
        domain: impl IntoIterator<Item = &'a Tuple>,
        tol: f64,
    ) -> Option<Tuple> {
        let one = coeff.scalar_from_int(1);
        domain
            .into_iter()
            .find(|x| !coeff.scalar_approx_eq(&self.weight_sum(coeff, x), &one, tol))
            .cloned()
    }

    /// Checks the unity condition on all of `𝔘[q]`.
    pub fn check_unity<C: Coefficients<Scalar = S>>(
        &self,
        coeff: &C,
        model: &CoverModel,
        tol: f64,
    ) -> Result<(), BicomplexError> {
        let domain = model.diagonal_neighborhood(self.level)?;
        match self.unity_defect(coeff, domain.iter(), tol) {
            Some(x) => Err(BicomplexError::NotUnity(x)),
            None => Ok(()),
        }
    }
}

/// The first-hit family: `φ_{q,i}(x) = 1` iff `i` is the least index with
/// `x ∈ U_i^{q+1}`.
pub fn first_hit_family<C: Coefficients>(
    coeff: &C,
    model: &CoverModel,
    q: usize,
) -> Result<PartitionFamily<C::Scalar>, BicomplexError> {
    let domain = model.diagonal_neighborhood(q)?;
    let entries = domain.iter().map(|x| {
        let first = model.tuple_mask(x).trailing_zeros() as usize;
        (first, x.clone(), coeff.scalar_from_int(1))
    });
    PartitionFamily::new(coeff, model, q, entries)
}

/// A random unity family: small random integers on every containing index
/// except the first-hit index, which takes whatever restores the sum to 1.
pub fn random_unity_family<C: Coefficients>(
    coeff: &C,
    model: &CoverModel,
    q: usize,
    rng: &mut dyn RngCore,
) -> Result<PartitionFamily<C::Scalar>, BicomplexError> {
    let domain = model.diagonal_neighborhood(q)?;
    let mut entries = Vec::new();
    for x in domain.iter() {
        let mask = model.tuple_mask(x);
        let first = mask.trailing_zeros() as usize;
        let mut rest = 0i64;
        for i in first + 1..model.cover_len() {
            if mask >> i & 1 == 1 {
                let w: i64 = rng.gen_range(-3..=3);
                rest += w;
                entries.push((i, x.clone(), coeff.scalar_from_int(w)));
            }
        }
        entries.push((first, x.clone(), coeff.scalar_from_int(1 - rest)));
    }
    PartitionFamily::new(coeff, model, q, entries)
}

/// A random point-finite integer family with supports in `U_i^{q+1}`; no
/// unity condition.
pub fn random_integer_family<C: Coefficients>(
    coeff: &C,
    model: &CoverModel,
    q: usize,
    rng: &mut dyn RngCore,
) -> Result<PartitionFamily<C::Scalar>, BicomplexError> {
    let domain = model.diagonal_neighborhood(q)?;
    let mut entries = Vec::new();
    for x in domain.iter() {
        let mask = model.tuple_mask(x);
        for i in 0..model.cover_len() {
            if mask >> i & 1 == 1 {
                entries.push((i, x.clone(), coeff.scalar_from_int(rng.gen_range(-4..=4))));
            }
        }
    }
    PartitionFamily::new(coeff, model, q, entries)
}

/// A random nonnegative real unity family: uniform weights on the containing
/// indices, normalized.
pub fn random_real_family(
    model: &CoverModel,
    q: usize,
    rng: &mut dyn RngCore,
) -> Result<PartitionFamily<f64>, BicomplexError> {
    let coeff = RealVectors::new(1).expect("dimension 1");
    let domain = model.diagonal_neighborhood(q)?;
    let mut entries = Vec::new();
    for x in domain.iter() {
        let mask = model.tuple_mask(x);
        let idx: Vec<usize> = (0..model.cover_len())
            .filter(|i| mask >> i & 1 == 1)
            .collect();
        let raw: Vec<f64> = idx.iter().map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        entries.extend(
            idx.into_iter()
                .zip(raw)
                .map(|(i, w)| (i, x.clone(), w / total)),
        );
    }
    PartitionFamily::new(&coeff, model, q, entries)
}

fn check_level<S>(fam: &PartitionFamily<S>, q: usize) -> Result<(), BicomplexError> {
    if fam.level != q {
        Err(BicomplexError::LevelMismatch {
            family: fam.level,
            page: q,
        })
    } else {
        Ok(())
    }
}

/// `h_φ(F)_{i_0…i_{p−1}} = Σ_i φ_{q,i} · F_{i i_0…i_{p−1}}`, extended by zero,
/// for `p ≥ 1`. No unity condition.
fn contract_page<C: Coefficients>(
    coeff: &C,
    page: &CechPage<C::Value>,
    fam: &PartitionFamily<C::Scalar>,
) -> CechPage<C::Value> {
    let mut out = CechPage::zero(page.p() - 1, page.q());
    for (indices, f) in page.components() {
        for (x, v) in f {
            for &(i, ref w) in fam.active(x) {
                // F_{i J} = (-1)^m F_I where i sits at position m of I.
                if let Ok(m) = indices.binary_search(&i) {
                    let mut rest = indices.clone();
                    rest.remove(m);
                    out.add_raw(
                        coeff,
                        rest,
                        x.clone(),
                        coeff.signed(alternating(m), &coeff.scale(w, v)),
                    );
                }
            }
        }
    }
    out.prune();
    out
}

/// The `p = 0` contraction into the augmentation: `Σ_i φ_{q,i} F_i`.
fn contract_to_local<C: Coefficients>(
    coeff: &C,
    page: &CechPage<C::Value>,
    fam: &PartitionFamily<C::Scalar>,
) -> LocalCochain<C::Value> {
    let mut out = SparseFunction::new();
    for (indices, f) in page.components() {
        let i = indices[0];
        for (x, v) in f {
            if let Some(w) = fam.weight(i, x) {
                accumulate(coeff, &mut out, x.clone(), coeff.scale(w, v));
            }
        }
    }
    LocalCochain::from_raw(page.q(), out)
}

/// The row contraction for a unity family, `p ≥ 1`.
pub fn row_contraction<C: Coefficients>(
    coeff: &C,
    model: &CoverModel,
    page: &CechPage<C::Value>,
    fam: &PartitionFamily<C::Scalar>,
) -> Result<CechPage<C::Value>, BicomplexError> {
    check_level(fam, page.q())?;
    if page.p() == 0 {
        return Err(BicomplexError::AugmentedDegree);
    }
    fam.check_unity(coeff, model, DEFAULT_TOLERANCE)?;
    Ok(contract_page(coeff, page, fam))
}

/// The row contraction out of `p = 0`, landing in `A^q(𝔘)`.
pub fn row_contraction_to_local<C: Coefficients>(
    coeff: &C,
    model: &CoverModel,
    page: &CechPage<C::Value>,
    fam: &PartitionFamily<C::Scalar>,
) -> Result<LocalCochain<C::Value>, BicomplexError> {
    check_level(fam, page.q())?;
    if page.p() != 0 {
        return Err(BicomplexError::LevelMismatch {
            family: 0,
            page: page.p(),
        });
    }
    fam.check_unity(coeff, model, DEFAULT_TOLERANCE)?;
    Ok(contract_to_local(coeff, page, fam))
}

/// Output of a contraction with a family that need not sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub enum Contraction<V> {
    Page(CechPage<V>),
    Local(LocalCochain<V>),
}

/// `h_φ` for any point-finite family, together with the weight sum
/// `Σ_i φ_{q,i}` on `𝔘[q]`.
pub fn approximate_row_contraction<C: Coefficients>(
    coeff: &C,
    model: &CoverModel,
    page: &CechPage<C::Value>,
    fam: &PartitionFamily<C::Scalar>,
) -> Result<(Contraction<C::Value>, BTreeMap<Tuple, C::Scalar>), BicomplexError> {
    check_level(fam, page.q())?;
    let domain = model.diagonal_neighborhood(page.q())?;
    let sums = domain
        .iter()
        .map(|x| (x.clone(), fam.weight_sum(coeff, x)))
        .collect();
    let h = if page.p() == 0 {
        Contraction::Local(contract_to_local(coeff, page, fam))
    } else {
        Contraction::Page(contract_page(coeff, page, fam))
    };
    Ok((h, sums))
}

/// `δ h_φ(F) + h_φ(δF)` for a page `F` of bidegree `(p, q)`; at `p = 0` the
/// first term is `i*(h_φ F)`.
pub fn homotopy_sum<C: Coefficients>(
    coeff: &C,
    model: &CoverModel,
    page: &CechPage<C::Value>,
    fam: &PartitionFamily<C::Scalar>,
) -> Result<CechPage<C::Value>, BicomplexError> {
    check_level(fam, page.q())?;
    let first = if page.p() == 0 {
        augment_i(coeff, model, &contract_to_local(coeff, page, fam))
    } else {
        contract_page(coeff, page, fam).cech_coboundary(coeff, model)
    };
    let second = contract_page(coeff, &page.cech_coboundary(coeff, model), fam);
    Ok(first.add(coeff, &second))
}

/// `(Σ_i φ_{q,i}) · F`, pointwise.
pub fn weighted_page<C: Coefficients>(
    coeff: &C,
    page: &CechPage<C::Value>,
    fam: &PartitionFamily<C::Scalar>,
) -> CechPage<C::Value> {
    let mut out = CechPage::zero(page.p(), page.q());
    for (indices, f) in page.components() {
        for (x, v) in f {
            out.add_raw(
                coeff,
                indices.clone(),
                x.clone(),
                coeff.scale(&fam.weight_sum(coeff, x), v),
            );
        }
    }
    out.prune();
    out
}

/// First `(I, x)` where `δh_φ(F) + h_φ(δF) ≠ (Σφ)·F`.
pub fn check_approximate_identity<C: Coefficients>(
    coeff: &C,
    model: &CoverModel,
    page: &CechPage<C::Value>,
    fam: &PartitionFamily<C::Scalar>,
    tol: f64,
) -> Result<Option<(Tuple, Tuple)>, BicomplexError> {
    let lhs = homotopy_sum(coeff, model, page, fam)?;
    Ok(lhs.diff(coeff, &weighted_page(coeff, page, fam), tol))
}

/// First `(I, x)` where `δh(F) + h(δF) ≠ F` for a unity family.
pub fn check_row_identity<C: Coefficients>(
    coeff: &C,
    model: &CoverModel,
    page: &CechPage<C::Value>,
    fam: &PartitionFamily<C::Scalar>,
    tol: f64,
) -> Result<Option<(Tuple, Tuple)>, BicomplexError> {
    fam.check_unity(coeff, model, tol)?;
    let lhs = homotopy_sum(coeff, model, page, fam)?;
    Ok(lhs.diff(coeff, page, tol))
}

/// First tuple where `h(i* f) ≠ (Σφ)·f` for a local cochain `f`.
pub fn check_augmentation_identity<C: Coefficients>(
    coeff: &C,
    model: &CoverModel,
    f: &LocalCochain<C::Value>,
    fam: &PartitionFamily<C::Scalar>,
    tol: f64,
) -> Result<Option<Tuple>, BicomplexError> {
    check_level(fam, f.degree())?;
    let h = contract_to_local(coeff, &augment_i(coeff, model, f), fam);
    let mut expected = SparseFunction::new();
    for (x, v) in f.values() {
        accumulate(
            coeff,
            &mut expected,
            x.clone(),
            coeff.scale(&fam.weight_sum(coeff, x), v),
        );
    }
    Ok(sparse_diff(coeff, h.values(), &expected, tol))
}

/// The identity `δh_φ(F) + h_φ(δF) = F` restricted to the tuples of a
/// smaller domain (for families that sum to 1 only there). Returns the first
/// `(I, x)` with `x` in `domain` where it fails.
pub fn check_restricted_identity<C: Coefficients>(
    coeff: &C,
    model: &CoverModel,
    page: &CechPage<C::Value>,
    fam: &PartitionFamily<C::Scalar>,
    domain: &BTreeSet<Tuple>,
    tol: f64,
) -> Result<Option<(Tuple, Tuple)>, BicomplexError> {
    let lhs = homotopy_sum(coeff, model, page, fam)?;
    let zero = coeff.zero();
    let empty = SparseFunction::new();
    for indices in model.nerve().of_dimension(page.p()) {
        let l = lhs.component(indices).unwrap_or(&empty);
        let r = page.component(indices).unwrap_or(&empty);
        for x in power_tuples(&model.intersection_unchecked(indices), page.q() + 1) {
            if !domain.contains(&x) {
                continue;
            }
            if !coeff.approx_eq(l.get(&x).unwrap_or(&zero), r.get(&x).unwrap_or(&zero), tol) {
                return Ok(Some((indices.clone(), x)));
            }
        }
    }
    Ok(None)
}

/// The σ-based row contraction for real vector coefficients, `p ≥ 1`.
///
/// At each `x`, the active indices `α_0 < … < α_n` of the family are
/// collected and `h(F)_J(x) = σ_n(F_{α_0 J}(x), …, F_{α_n J}(x))` evaluated at
/// the barycentric weights `(φ_{α_0}(x), …, φ_{α_n}(x))`.
pub fn sigma_row_contraction(
    coeff: &RealVectors,
    model: &CoverModel,
    page: &CechPage<Vec<f64>>,
    fam: &PartitionFamily<f64>,
    filler: &SimplexFiller,
) -> Result<CechPage<Vec<f64>>, BicomplexError> {
    check_level(fam, page.q())?;
    if page.p() == 0 {
        return Err(BicomplexError::AugmentedDegree);
    }
    if filler.dim() != coeff.dim() {
        return Err(BicomplexError::FillerMismatch {
            filler: filler.dim(),
            coeff: coeff.dim(),
        });
    }
    fam.check_unity(coeff, model, DEFAULT_TOLERANCE)?;
    // Targets (J, x) that can receive a nonzero value.
    let mut targets: BTreeSet<(Tuple, Tuple)> = BTreeSet::new();
    for (indices, f) in page.components() {
        for x in f.keys() {
            for &(i, _) in fam.active(x) {
                if let Ok(m) = indices.binary_search(&i) {
                    let mut rest = indices.clone();
                    rest.remove(m);
                    targets.insert((rest, x.clone()));
                }
            }
        }
    }
    let mut out = CechPage::zero(page.p() - 1, page.q());
    for (rest, x) in targets {
        let active = fam.active(&x);
        let mut vertices = Vec::with_capacity(active.len());
        let mut weights = Vec::with_capacity(active.len());
        for (alpha, w) in active {
            let mut idx = Vec::with_capacity(rest.len() + 1);
            idx.push(*alpha);
            idx.extend_from_slice(&rest);
            vertices.push(page.evaluate_unchecked(coeff, &idx, &x));
            weights.push(*w);
        }
        let v = filler.evaluate(&vertices, &weights)?;
        out.add_raw(coeff, rest, x, v);
    }
    out.prune();
    Ok(out)
}
