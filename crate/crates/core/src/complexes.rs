//! The three cochain species and their differentials.
//!
//! * [`LocalCochain`]: a function on the diagonal neighbourhood `𝔘[n]` with
//!   the alternating-face differential.
//! * [`CechPage`]: one bidegree `(p, q)` of the Čech–local double complex,
//!   stored on strictly increasing cover-index tuples.
//! * [`SimplicialCochain`]: an ordered simplicial cochain on the model
//!   complex, the finite stand-in for singular cochains.
//!
//! All cochains are sparse maps; an absent key means zero.

use std::collections::BTreeMap;

use rand::{Rng, RngCore};
use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::coeff::{CoeffError, Coefficients};
use crate::homology::{BoundaryMatrix, CochainComplex, HomologyError};
use crate::model::{simplex_order, CoverModel, ModelError, Tuple};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CochainError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error("tuple {tuple:?} has length {found}, expected {expected}")]
    Arity {
        tuple: Tuple,
        expected: usize,
        found: usize,
    },
    #[error("tuple {0:?} is not in the diagonal neighbourhood")]
    OutsideDomain(Tuple),
    #[error("point tuple {points:?} is not in the intersection power of {indices:?}")]
    OutsideIntersection { indices: Tuple, points: Tuple },
    #[error("basepoint {0} is not in the contracted set")]
    BasepointOutside(usize),
    #[error("simplex {0:?} is not in the complex")]
    UnknownSimplex(Tuple),
    #[error("simplex {0:?} is not small for the cover")]
    NotSmall(Tuple),
    #[error("malformed cochain JSON: {0}")]
    Json(String),
}

/// Sparse function on tuples; absent keys are zero.
pub type SparseFunction<V> = BTreeMap<Tuple, V>;

/// Adds `v` into `map[key]`, dropping the entry when it cancels to zero.
pub(crate) fn accumulate<C: Coefficients>(
    coeff: &C,
    map: &mut SparseFunction<C::Value>,
    key: Tuple,
    v: C::Value,
) {
    if coeff.is_zero(&v) {
        return;
    }
    match map.entry(key) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(v);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            let sum = coeff.add(e.get(), &v);
            if coeff.is_zero(&sum) {
                e.remove();
            } else {
                *e.get_mut() = sum;
            }
        }
    }
}

/// Equality of sparse functions with missing entries read as zero.
pub fn sparse_eq<C: Coefficients>(
    coeff: &C,
    a: &SparseFunction<C::Value>,
    b: &SparseFunction<C::Value>,
    tol: f64,
) -> bool {
    sparse_diff(coeff, a, b, tol).is_none()
}

/// First key at which two sparse functions differ.
pub fn sparse_diff<C: Coefficients>(
    coeff: &C,
    a: &SparseFunction<C::Value>,
    b: &SparseFunction<C::Value>,
    tol: f64,
) -> Option<Tuple> {
    let zero = coeff.zero();
    for (k, v) in a {
        if !coeff.approx_eq(v, b.get(k).unwrap_or(&zero), tol) {
            return Some(k.clone());
        }
    }
    for (k, v) in b {
        if !a.contains_key(k) && !coeff.approx_eq(v, &zero, tol) {
            return Some(k.clone());
        }
    }
    None
}

/// Sorts `indices`, returning the sorted tuple and the permutation sign, or
/// `None` when an index repeats.
pub fn sort_with_sign(indices: &[usize]) -> Option<(Tuple, i64)> {
    let mut v = indices.to_vec();
    let mut sign = 1i64;
    // Insertion sort; the number of swaps gives the parity.
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some((v, sign))
    }
}

fn face(t: &[usize], skip: usize) -> Tuple {
    t.iter()
        .enumerate()
        .filter(|&(i, _)| i != skip)
        .map(|(_, &x)| x)
        .collect()
}

fn alternating(i: usize) -> i64 {
    if i.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `d g` for a function `g` on `U^{n+1}`, where `U` is given by its sorted
/// members: `(dg)(u_0,…,u_{n+1}) = Σ_i (-1)^i g(u_0,…,û_i,…,u_{n+1})`.
pub fn standard_differential<C: Coefficients>(
    coeff: &C,
    members: &[usize],
    g: &SparseFunction<C::Value>,
) -> SparseFunction<C::Value> {
    let mut out = SparseFunction::new();
    for (t, v) in g {
        for pos in 0..=t.len() {
            let signed = coeff.signed(alternating(pos), v);
            for &u in members {
                let mut s = Vec::with_capacity(t.len() + 1);
                s.extend_from_slice(&t[..pos]);
                s.push(u);
                s.extend_from_slice(&t[pos..]);
                accumulate(coeff, &mut out, s, signed.clone());
            }
        }
    }
    out
}

/// Result of contracting a column cochain: degree 0 lands in the
/// augmentation copy of `V`.
#[derive(Debug, Clone, PartialEq)]
pub enum Contracted<V> {
    Augmentation(V),
    Cochain(SparseFunction<V>),
}

/// The cone contraction `(s g)(u_0,…,u_{n-1}) = g(u*, u_0,…,u_{n-1})` of the
/// augmented standard complex `V → A^0(U) → A^1(U) → …`.
///
/// `degree` is `n`, the degree of `g` (a function on `U^{n+1}`).
pub fn standard_column_contraction<C: Coefficients>(
    coeff: &C,
    members: &[usize],
    g: &SparseFunction<C::Value>,
    degree: usize,
    basepoint: usize,
) -> Result<Contracted<C::Value>, CochainError> {
    if members.binary_search(&basepoint).is_err() {
        return Err(CochainError::BasepointOutside(basepoint));
    }
    if degree == 0 {
        return Ok(Contracted::Augmentation(
            g.get(&vec![basepoint])
                .cloned()
                .unwrap_or_else(|| coeff.zero()),
        ));
    }
    let mut out = SparseFunction::new();
    for (t, v) in g {
        if t[0] == basepoint {
            accumulate(coeff, &mut out, t[1..].to_vec(), v.clone());
        }
    }
    Ok(Contracted::Cochain(out))
}

/// Deterministic column-contraction basepoint: the smallest member.
pub fn column_basepoint(members: &[usize]) -> Option<usize> {
    members.first().copied()
}

/// Checks `s d + d s = id` on `g` (degree `n ≥ 0`) in the augmented standard
/// complex of `U`. Returns the first offending tuple.
pub fn check_column_contraction<C: Coefficients>(
    coeff: &C,
    members: &[usize],
    g: &SparseFunction<C::Value>,
    degree: usize,
) -> Result<Option<Tuple>, CochainError> {
    let base = column_basepoint(members).ok_or(CochainError::BasepointOutside(usize::MAX))?;
    let dg = standard_differential(coeff, members, g);
    let sdg = match standard_column_contraction(coeff, members, &dg, degree + 1, base)? {
        Contracted::Cochain(f) => f,
        Contracted::Augmentation(_) => unreachable!("degree + 1 > 0"),
    };
    let dsg = match standard_column_contraction(coeff, members, g, degree, base)? {
        // Augmentation: the constant function with value s(g).
        Contracted::Augmentation(v) => {
            let mut f = SparseFunction::new();
            for &u in members {
                accumulate(coeff, &mut f, vec![u], v.clone());
            }
            f
        }
        Contracted::Cochain(sg) => standard_differential(coeff, members, &sg),
    };
    let mut lhs = sdg;
    for (k, v) in dsg {
        accumulate(coeff, &mut lhs, k, v);
    }
    Ok(sparse_diff(coeff, &lhs, g, 0.0))
}

/// A local cochain `f : 𝔘[n] → V`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalCochain<V> {
    degree: usize,
    values: SparseFunction<V>,
}

impl<V: Clone> LocalCochain<V> {
    pub fn zero(degree: usize) -> Self {
        Self {
            degree,
            values: SparseFunction::new(),
        }
    }

    /// Validates that every key is an `(n+1)`-tuple of `𝔘[n]`; zero values
    /// are dropped.
    pub fn new<C: Coefficients<Value = V>>(
        coeff: &C,
        model: &CoverModel,
        degree: usize,
        values: SparseFunction<V>,
    ) -> Result<Self, CochainError> {
        let mut kept = SparseFunction::new();
        for (t, v) in values {
            if t.len() != degree + 1 {
                return Err(CochainError::Arity {
                    expected: degree + 1,
                    found: t.len(),
                    tuple: t,
                });
            }
            if t.iter().any(|&x| x >= model.num_points()) || !model.in_neighborhood(&t) {
                return Err(CochainError::OutsideDomain(t));
            }
            coeff.check_value(&v)?;
            if !coeff.is_zero(&v) {
                kept.insert(t, v);
            }
        }
        Ok(Self {
            degree,
            values: kept,
        })
    }

    pub(crate) fn from_raw(degree: usize, values: SparseFunction<V>) -> Self {
        Self { degree, values }
    }

    /// Random cochain: each tuple of `𝔘[n]` gets a random value with
    /// probability `density`.
    pub fn random<C: Coefficients<Value = V>>(
        coeff: &C,
        model: &CoverModel,
        degree: usize,
        density: f64,
        rng: &mut dyn RngCore,
    ) -> Result<Self, CochainError> {
        let domain = model.diagonal_neighborhood(degree)?;
        let mut values = SparseFunction::new();
        for t in domain.iter() {
            if rng.gen_bool(density) {
                let v = coeff.random_value(rng);
                if !coeff.is_zero(&v) {
                    values.insert(t.clone(), v);
                }
            }
        }
        Ok(Self { degree, values })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn values(&self) -> &SparseFunction<V> {
        &self.values
    }

    pub fn get(&self, t: &[usize]) -> Option<&V> {
        self.values.get(t)
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// The differential of a local cochain, degree `n + 1`.
    pub fn differential<C: Coefficients<Value = V>>(
        &self,
        coeff: &C,
        model: &CoverModel,
    ) -> Result<Self, CochainError> {
        local_differential(coeff, model, self)
    }

    pub fn approx_eq<C: Coefficients<Value = V>>(&self, coeff: &C, other: &Self, tol: f64) -> bool {
        self.degree == other.degree && sparse_eq(coeff, &self.values, &other.values, tol)
    }

    pub fn to_json<C: Coefficients<Value = V>>(&self, coeff: &C) -> Json {
        cochain_json(coeff, self.degree, &self.values)
    }

    pub fn from_json<C: Coefficients<Value = V>>(
        coeff: &C,
        model: &CoverModel,
        j: &Json,
    ) -> Result<Self, CochainError> {
        let (degree, values) = cochain_from_json(coeff, j)?;
        Self::new(coeff, model, degree, values)
    }
}

/// `df(u_0,…,u_{n+1}) = Σ_i (-1)^i f(u_0,…,û_i,…,u_{n+1})` on `𝔘[n+1]`.
///
/// Evaluated by pushing each nonzero value of `f` to the cofaces that lie in
/// `𝔘[n+1]`.
pub fn local_differential<C: Coefficients>(
    coeff: &C,
    model: &CoverModel,
    f: &LocalCochain<C::Value>,
) -> Result<LocalCochain<C::Value>, CochainError> {
    model.check_budget(f.degree + 2)?;
    let mut out = SparseFunction::new();
    for (t, v) in &f.values {
        let mask = model.tuple_mask(t);
        for pos in 0..=t.len() {
            let signed = coeff.signed(alternating(pos), v);
            for u in 0..model.num_points() {
                if mask & model.point_mask(u) == 0 {
                    continue;
                }
                let mut s = Vec::with_capacity(t.len() + 1);
                s.extend_from_slice(&t[..pos]);
                s.push(u);
                s.extend_from_slice(&t[pos..]);
                accumulate(coeff, &mut out, s, signed.clone());
            }
        }
    }
    Ok(LocalCochain::from_raw(f.degree + 1, out))
}

fn cochain_json<C: Coefficients>(
    coeff: &C,
    degree: usize,
    values: &SparseFunction<C::Value>,
) -> Json {
    let values: Vec<Json> = values
        .iter()
        .map(|(t, v)| json!({"tuple": t, "value": coeff.value_to_json(v)}))
        .collect();
    json!({"degree": degree, "values": values})
}

fn cochain_from_json<C: Coefficients>(
    coeff: &C,
    j: &Json,
) -> Result<(usize, SparseFunction<C::Value>), CochainError> {
    let bad = |m: &str| CochainError::Json(m.to_string());
    let degree = j
        .get("degree")
        .and_then(Json::as_u64)
        .ok_or_else(|| bad("missing degree"))? as usize;
    let entries = j
        .get("values")
        .and_then(Json::as_array)
        .ok_or_else(|| bad("missing values"))?;
    let mut values = SparseFunction::new();
    for e in entries {
        let t: Tuple = e
            .get("tuple")
            .and_then(Json::as_array)
            .and_then(|xs| xs.iter().map(|x| x.as_u64().map(|x| x as usize)).collect())
            .ok_or_else(|| bad("bad tuple"))?;
        let v = coeff.value_from_json(e.get("value").ok_or_else(|| bad("missing value"))?)?;
        values.insert(t, v);
    }
    Ok((degree, values))
}

/// One bidegree `(p, q)` of the double complex `Č^p(𝔘, A^q)`.
///
/// `components[I]` is a function on `(U_I)^{q+1}` for a strictly increasing
/// index tuple `I` of length `p + 1`. Values at unsorted index tuples are
/// obtained through [`CechPage::evaluate_alternating`].
#[derive(Debug, Clone, PartialEq)]
pub struct CechPage<V> {
    p: usize,
    q: usize,
    components: BTreeMap<Tuple, SparseFunction<V>>,
}

impl<V: Clone> CechPage<V> {
    pub fn zero(p: usize, q: usize) -> Self {
        Self {
            p,
            q,
            components: BTreeMap::new(),
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn components(&self) -> &BTreeMap<Tuple, SparseFunction<V>> {
        &self.components
    }

    pub fn component(&self, indices: &[usize]) -> Option<&SparseFunction<V>> {
        self.components.get(indices)
    }

    pub fn is_zero(&self) -> bool {
        self.components.values().all(BTreeMap::is_empty)
    }

    /// Stores `v` at `(indices, x)`, where `indices` may be unsorted; the
    /// value is sign-adjusted onto the sorted tuple. Repeated indices are
    /// rejected, as is `x` outside `(U_indices)^{q+1}`.
    pub fn insert<C: Coefficients<Value = V>>(
        &mut self,
        coeff: &C,
        model: &CoverModel,
        indices: &[usize],
        x: Tuple,
        v: V,
    ) -> Result<(), CochainError> {
        if indices.len() != self.p + 1 {
            return Err(CochainError::Arity {
                tuple: indices.to_vec(),
                expected: self.p + 1,
                found: indices.len(),
            });
        }
        if x.len() != self.q + 1 {
            return Err(CochainError::Arity {
                tuple: x,
                expected: self.q + 1,
                found: indices.len(),
            });
        }
        if let Some(&i) = indices.iter().find(|&&i| i >= model.cover_len()) {
            return Err(ModelError::IndexOutOfRange {
                index: i,
                len: model.cover_len(),
            }
            .into());
        }
        let (sorted, sign) =
            sort_with_sign(indices).ok_or_else(|| ModelError::NotIncreasing(indices.to_vec()))?;
        if x.iter().any(|&u| u >= model.num_points()) || !model.tuple_in_intersection(&sorted, &x) {
            return Err(CochainError::OutsideIntersection {
                indices: sorted,
                points: x,
            });
        }
        coeff.check_value(&v)?;
        let comp = self.components.entry(sorted).or_default();
        accumulate(coeff, comp, x, coeff.signed(sign, &v));
        Ok(())
    }

    pub(crate) fn add_raw<C: Coefficients<Value = V>>(
        &mut self,
        coeff: &C,
        sorted: Tuple,
        x: Tuple,
        v: V,
    ) {
        if coeff.is_zero(&v) {
            return;
        }
        let comp = self.components.entry(sorted).or_default();
        accumulate(coeff, comp, x, v);
    }

    /// Drops components that became empty.
    pub(crate) fn prune(&mut self) {
        self.components.retain(|_, f| !f.is_empty());
    }

    /// Random page: every `(I, x)` with `x ∈ (U_I)^{q+1}` gets a random value
    /// with probability `density`.
    pub fn random<C: Coefficients<Value = V>>(
        coeff: &C,
        model: &CoverModel,
        p: usize,
        q: usize,
        density: f64,
        rng: &mut dyn RngCore,
    ) -> Result<Self, CochainError> {
        model.check_budget(q + 1)?;
        let mut page = Self::zero(p, q);
        for indices in model.nerve().of_dimension(p) {
            let members = model.intersection_unchecked(indices);
            for x in power_tuples(&members, q + 1) {
                if rng.gen_bool(density) {
                    let v = coeff.random_value(rng);
                    page.add_raw(coeff, indices.clone(), x, v);
                }
            }
        }
        page.prune();
        Ok(page)
    }

    /// `F_{indices}(x)` for an arbitrary index tuple: sorts the indices,
    /// applies the permutation sign, and returns zero on a repeated index.
    pub fn evaluate_alternating<C: Coefficients<Value = V>>(
        &self,
        coeff: &C,
        model: &CoverModel,
        indices: &[usize],
        x: &[usize],
    ) -> Result<V, CochainError> {
        if x.len() != self.q + 1 {
            return Err(CochainError::Arity {
                tuple: x.to_vec(),
                expected: self.q + 1,
                found: x.len(),
            });
        }
        if indices.iter().any(|&i| i >= model.cover_len())
            || x.iter().any(|&u| u >= model.num_points())
            || !model.tuple_in_intersection(indices, x)
        {
            return Err(CochainError::OutsideIntersection {
                indices: indices.to_vec(),
                points: x.to_vec(),
            });
        }
        Ok(self.evaluate_unchecked(coeff, indices, x))
    }

    /// Like [`Self::evaluate_alternating`] without the domain check; points
    /// outside the intersection read as zero (extension by zero).
    pub(crate) fn evaluate_unchecked<C: Coefficients<Value = V>>(
        &self,
        coeff: &C,
        indices: &[usize],
        x: &[usize],
    ) -> V {
        match sort_with_sign(indices) {
            None => coeff.zero(),
            Some((sorted, sign)) => match self.components.get(&sorted).and_then(|f| f.get(x)) {
                Some(v) => coeff.signed(sign, v),
                None => coeff.zero(),
            },
        }
    }

    /// The Čech coboundary `(δF)_{i_0…i_{p+1}} = Σ_k (-1)^k F_{i_0…î_k…i_{p+1}}`
    /// restricted to `(U_{i_0…i_{p+1}})^{q+1}`.
    pub fn cech_coboundary<C: Coefficients<Value = V>>(
        &self,
        coeff: &C,
        model: &CoverModel,
    ) -> Self {
        let mut out = Self::zero(self.p + 1, self.q);
        for (indices, f) in &self.components {
            for (x, v) in f {
                let mask = model.tuple_mask(x);
                for j in 0..model.cover_len() {
                    if mask >> j & 1 == 0 || indices.binary_search(&j).is_ok() {
                        continue;
                    }
                    let pos = indices.partition_point(|&i| i < j);
                    let mut bigger = indices.clone();
                    bigger.insert(pos, j);
                    out.add_raw(coeff, bigger, x.clone(), coeff.signed(alternating(pos), v));
                }
            }
        }
        out.prune();
        out
    }

    /// The local differential applied to every component, without the
    /// `(-1)^p` sign of the double complex.
    pub fn componentwise_differential<C: Coefficients<Value = V>>(
        &self,
        coeff: &C,
        model: &CoverModel,
    ) -> Self {
        let mut out = Self::zero(self.p, self.q + 1);
        for (indices, f) in &self.components {
            let members = model.intersection_unchecked(indices);
            let df = standard_differential(coeff, &members, f);
            if !df.is_empty() {
                out.components.insert(indices.clone(), df);
            }
        }
        out
    }

    pub fn add<C: Coefficients<Value = V>>(&self, coeff: &C, other: &Self) -> Self {
        assert_eq!((self.p, self.q), (other.p, other.q), "bidegree mismatch");
        let mut out = self.clone();
        for (indices, f) in &other.components {
            for (x, v) in f {
                out.add_raw(coeff, indices.clone(), x.clone(), v.clone());
            }
        }
        out.prune();
        out
    }

    pub fn scale_by<C: Coefficients<Value = V>>(&self, coeff: &C, r: &C::Scalar) -> Self {
        let mut out = Self::zero(self.p, self.q);
        for (indices, f) in &self.components {
            for (x, v) in f {
                out.add_raw(coeff, indices.clone(), x.clone(), coeff.scale(r, v));
            }
        }
        out.prune();
        out
    }

    /// First `(I, x)` where the pages differ.
    pub fn diff<C: Coefficients<Value = V>>(
        &self,
        coeff: &C,
        other: &Self,
        tol: f64,
    ) -> Option<(Tuple, Tuple)> {
        let empty = SparseFunction::new();
        let keys: std::collections::BTreeSet<&Tuple> = self
            .components
            .keys()
            .chain(other.components.keys())
            .collect();
        for k in keys {
            let a = self.components.get(k).unwrap_or(&empty);
            let b = other.components.get(k).unwrap_or(&empty);
            if let Some(x) = sparse_diff(coeff, a, b, tol) {
                return Some((k.clone(), x));
            }
        }
        None
    }

    pub fn approx_eq<C: Coefficients<Value = V>>(&self, coeff: &C, other: &Self, tol: f64) -> bool {
        (self.p, self.q) == (other.p, other.q) && self.diff(coeff, other, tol).is_none()
    }
}

/// All tuples of length `arity` over `members`, lexicographic.
pub fn power_tuples(members: &[usize], arity: usize) -> Vec<Tuple> {
    let mut out = vec![Vec::with_capacity(arity)];
    for _ in 0..arity {
        let mut next = Vec::with_capacity(out.len() * members.len());
        for t in &out {
            for &m in members {
                let mut s = t.clone();
                s.push(m);
                next.push(s);
            }
        }
        out = next;
    }
    out
}

/// An ordered simplicial complex indexed by dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplicialComplex {
    by_dim: Vec<Vec<Tuple>>,
}

impl SimplicialComplex {
    /// `simplices` must be face-closed increasing vertex tuples.
    pub fn new(simplices: &[Tuple]) -> Self {
        let mut sorted = simplices.to_vec();
        sorted.sort_by(simplex_order);
        sorted.dedup();
        let top = sorted.iter().map(Vec::len).max().unwrap_or(0);
        let mut by_dim = vec![Vec::new(); top];
        for s in sorted {
            by_dim[s.len() - 1].push(s);
        }
        Self { by_dim }
    }

    pub fn of_model(model: &CoverModel) -> Result<Self, ModelError> {
        Ok(Self::new(
            model.complex().ok_or(ModelError::MissingComplex)?,
        ))
    }

    pub fn u_small(model: &CoverModel) -> Result<Self, ModelError> {
        Ok(Self::new(&model.u_small_subcomplex()?))
    }

    pub fn simplices(&self, n: usize) -> &[Tuple] {
        self.by_dim.get(n).map_or(&[], Vec::as_slice)
    }

    pub fn dimension(&self) -> Option<usize> {
        self.by_dim.len().checked_sub(1)
    }

    pub fn index_of(&self, s: &[usize]) -> Option<usize> {
        let n = s.len().checked_sub(1)?;
        self.simplices(n)
            .binary_search_by(|x| x.as_slice().cmp(s))
            .ok()
    }

    pub fn contains(&self, s: &[usize]) -> bool {
        self.index_of(s).is_some()
    }
}

impl CochainComplex for SimplicialComplex {
    fn dim(&self, n: usize) -> Result<usize, HomologyError> {
        Ok(self.simplices(n).len())
    }

    fn differential(&self, n: usize) -> Result<BoundaryMatrix, HomologyError> {
        let rows = self.simplices(n + 1);
        let mut m = BoundaryMatrix::zeros(rows.len(), self.simplices(n).len());
        for (r, s) in rows.iter().enumerate() {
            for k in 0..s.len() {
                let c = self.index_of(&face(s, k)).expect("face-closed complex");
                m.add_entry(r, c, alternating(k));
            }
        }
        Ok(m)
    }
}

/// An ordered simplicial cochain.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialCochain<V> {
    degree: usize,
    values: SparseFunction<V>,
}

impl<V: Clone> SimplicialCochain<V> {
    pub fn new<C: Coefficients<Value = V>>(
        coeff: &C,
        complex: &SimplicialComplex,
        degree: usize,
        values: SparseFunction<V>,
    ) -> Result<Self, CochainError> {
        let mut kept = SparseFunction::new();
        for (s, v) in values {
            if s.len() != degree + 1 || !complex.contains(&s) {
                return Err(CochainError::UnknownSimplex(s));
            }
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
        complex: &SimplicialComplex,
        degree: usize,
        rng: &mut dyn RngCore,
    ) -> Self {
        let mut values = SparseFunction::new();
        for s in complex.simplices(degree) {
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

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// `(δc)(σ) = Σ_k (-1)^k c(σ without its k-th vertex)`.
    pub fn coboundary<C: Coefficients<Value = V>>(
        &self,
        coeff: &C,
        complex: &SimplicialComplex,
    ) -> Self {
        let mut out = SparseFunction::new();
        for s in complex.simplices(self.degree + 1) {
            let mut acc = coeff.zero();
            for k in 0..s.len() {
                if let Some(v) = self.values.get(&face(s, k)) {
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

    pub fn approx_eq<C: Coefficients<Value = V>>(&self, coeff: &C, other: &Self, tol: f64) -> bool {
        self.degree == other.degree && sparse_eq(coeff, &self.values, &other.values, tol)
    }

    pub fn to_json<C: Coefficients<Value = V>>(&self, coeff: &C) -> Json {
        cochain_json(coeff, self.degree, &self.values)
    }
}

/// `(λ*f)(σ) = f(v_0,…,v_n)` on the cover-small simplices of the model
/// complex.
pub fn vertex_pullback<C: Coefficients>(
    coeff: &C,
    model: &CoverModel,
    f: &LocalCochain<C::Value>,
) -> Result<SimplicialCochain<C::Value>, CochainError> {
    let complex = SimplicialComplex::u_small(model)?;
    vertex_pullback_on(coeff, model, &complex, f)
}

/// [`vertex_pullback`] onto a given complex, which must consist of small
/// simplices.
pub fn vertex_pullback_on<C: Coefficients>(
    coeff: &C,
    model: &CoverModel,
    complex: &SimplicialComplex,
    f: &LocalCochain<C::Value>,
) -> Result<SimplicialCochain<C::Value>, CochainError> {
    let mut values = SparseFunction::new();
    for s in complex.simplices(f.degree()) {
        if !model.in_neighborhood(s) {
            return Err(CochainError::NotSmall(s.clone()));
        }
        if let Some(v) = f.get(s) {
            if !coeff.is_zero(v) {
                values.insert(s.clone(), v.clone());
            }
        }
    }
    Ok(SimplicialCochain {
        degree: f.degree(),
        values,
    })
}

/// The complex `A*(𝔘)` of local cochains, in the tuple basis of `𝔘[n]`.
#[derive(Debug, Clone)]
pub struct LocalComplex<'m> {
    model: &'m CoverModel,
}

impl<'m> LocalComplex<'m> {
    pub fn new(model: &'m CoverModel) -> Self {
        Self { model }
    }
}

impl CochainComplex for LocalComplex<'_> {
    fn dim(&self, n: usize) -> Result<usize, HomologyError> {
        Ok(self.model.diagonal_neighborhood(n)?.len())
    }

    fn differential(&self, n: usize) -> Result<BoundaryMatrix, HomologyError> {
        let source = self.model.diagonal_neighborhood(n)?;
        let target = self.model.diagonal_neighborhood(n + 1)?;
        let mut m = BoundaryMatrix::zeros(target.len(), source.len());
        for (c, t) in source.iter().enumerate() {
            let mask = self.model.tuple_mask(t);
            for pos in 0..=t.len() {
                for u in 0..self.model.num_points() {
                    if mask & self.model.point_mask(u) == 0 {
                        continue;
                    }
                    let mut s = Vec::with_capacity(t.len() + 1);
                    s.extend_from_slice(&t[..pos]);
                    s.push(u);
                    s.extend_from_slice(&t[pos..]);
                    let r = target.index_of(&s).expect("coface lies in 𝔘[n+1]");
                    m.add_entry(r, c, alternating(pos));
                }
            }
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{Rationals, RealVectors};
    use crate::fixtures::{hexagon, interval, solid_triangle};
    use num_rational::BigRational;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn constants_are_cocycles() {
        let m = interval();
        let f = LocalCochain::new(&Rationals, &m, 0, (0..3).map(|x| (vec![x], q(5))).collect())
            .unwrap();
        assert!(f.differential(&Rationals, &m).unwrap().is_zero());
    }

    #[test]
    fn interval_differential() {
        let m = interval();
        let f = LocalCochain::new(
            &Rationals,
            &m,
            0,
            [(vec![0], q(2)), (vec![1], q(3)), (vec![2], q(7))].into(),
        )
        .unwrap();
        let df = f.differential(&Rationals, &m).unwrap();
        assert_eq!(df.get(&[0, 1]), Some(&q(1)));
        assert_eq!(df.get(&[1, 0]), Some(&q(-1)));
        assert_eq!(df.get(&[1, 1]), None);
        assert_eq!(df.get(&[1, 2]), Some(&q(4)));
    }

    #[test]
    fn local_cochain_rejects_foreign_tuples() {
        let m = interval();
        let err = LocalCochain::new(&Rationals, &m, 1, [(vec![0, 2], q(1))].into());
        assert_eq!(err, Err(CochainError::OutsideDomain(vec![0, 2])));
        let err = LocalCochain::new(&Rationals, &m, 1, [(vec![0], q(1))].into());
        assert!(matches!(err, Err(CochainError::Arity { .. })));
    }

    #[test]
    fn dd_vanishes_on_random_local_cochains() {
        let m = hexagon();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for degree in 0..=1 {
            for _ in 0..100 {
                let f = LocalCochain::random(&Rationals, &m, degree, 0.3, &mut rng).unwrap();
                let ddf = f
                    .differential(&Rationals, &m)
                    .and_then(|g| g.differential(&Rationals, &m))
                    .unwrap();
                assert!(ddf.is_zero());
            }
        }
    }

    #[test]
    fn coboundary_of_constants_on_interval() {
        let m = interval();
        let mut page = CechPage::zero(0, 0);
        page.insert(&Rationals, &m, &[0], vec![0], q(2)).unwrap();
        page.insert(&Rationals, &m, &[0], vec![1], q(2)).unwrap();
        page.insert(&Rationals, &m, &[1], vec![1], q(9)).unwrap();
        page.insert(&Rationals, &m, &[1], vec![2], q(9)).unwrap();
        let d = page.cech_coboundary(&Rationals, &m);
        assert_eq!(d.components().len(), 1);
        let c = d.component(&[0, 1]).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.get(&vec![1]), Some(&q(7)));
    }

    #[test]
    fn coboundary_ignores_empty_intersections() {
        let m = hexagon();
        let mut page = CechPage::zero(1, 0);
        page.insert(&Rationals, &m, &[0, 1], vec![2], q(1)).unwrap();
        // {0,1,2} has empty triple intersection.
        assert!(page.cech_coboundary(&Rationals, &m).is_zero());
    }

    #[test]
    fn double_coboundary_vanishes() {
        let m = hexagon();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for p in 0..=1 {
            for qd in 0..=1 {
                for _ in 0..100 {
                    let f = CechPage::random(&Rationals, &m, p, qd, 0.4, &mut rng).unwrap();
                    let dd = f
                        .cech_coboundary(&Rationals, &m)
                        .cech_coboundary(&Rationals, &m);
                    assert!(dd.is_zero());
                }
            }
        }
    }

    #[test]
    fn alternating_evaluation() {
        let m = interval();
        let mut page = CechPage::zero(1, 0);
        page.insert(&Rationals, &m, &[0, 1], vec![1], q(4)).unwrap();
        let ev = |idx: &[usize]| {
            page.evaluate_alternating(&Rationals, &m, idx, &[1])
                .unwrap()
        };
        assert_eq!(ev(&[1, 0]), q(-4));
        assert_eq!(ev(&[0, 1]), q(4));
        assert_eq!(ev(&[0, 0]), q(0));
        assert!(matches!(
            page.evaluate_alternating(&Rationals, &m, &[0, 1], &[0]),
            Err(CochainError::OutsideIntersection { .. })
        ));
    }

    #[test]
    fn insert_uses_sign_extension() {
        let m = interval();
        let mut page = CechPage::zero(1, 0);
        page.insert(&Rationals, &m, &[1, 0], vec![1], q(3)).unwrap();
        assert_eq!(page.component(&[0, 1]).unwrap().get(&vec![1]), Some(&q(-3)));
        assert!(page.insert(&Rationals, &m, &[1, 1], vec![1], q(3)).is_err());
    }

    #[test]
    fn simplicial_coboundaries() {
        let h = hexagon();
        let cx = SimplicialComplex::of_model(&h).unwrap();
        let c = SimplicialCochain::new(&Rationals, &cx, 1, [(vec![0, 1], q(1))].into()).unwrap();
        assert!(c.coboundary(&Rationals, &cx).is_zero());
        let k = SimplicialCochain::new(
            &Rationals,
            &cx,
            0,
            (0..6).map(|v| (vec![v], q(3))).collect(),
        )
        .unwrap();
        assert!(k.coboundary(&Rationals, &cx).is_zero());

        let tri = SimplicialComplex::of_model(&solid_triangle()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for degree in 0..=1 {
            for _ in 0..100 {
                let c = SimplicialCochain::random(&Rationals, &tri, degree, &mut rng);
                assert!(c
                    .coboundary(&Rationals, &tri)
                    .coboundary(&Rationals, &tri)
                    .is_zero());
            }
        }
    }

    #[test]
    fn column_contraction_examples() {
        let members = vec![0, 1];
        let g: SparseFunction<BigRational> = [(vec![0], q(3)), (vec![1], q(5))].into();
        assert_eq!(
            standard_column_contraction(&Rationals, &members, &g, 0, 0).unwrap(),
            Contracted::Augmentation(q(3))
        );
        assert!(standard_column_contraction(&Rationals, &members, &g, 0, 2).is_err());
        // Constant degree-0 cocycle.
        let c: SparseFunction<BigRational> = [(vec![0], q(2)), (vec![1], q(2))].into();
        assert_eq!(
            check_column_contraction(&Rationals, &members, &c, 0).unwrap(),
            None
        );

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let g: SparseFunction<BigRational> = power_tuples(&members, 2)
                .into_iter()
                .map(|t| (t, Rationals.random_value(&mut rng)))
                .collect();
            assert_eq!(
                check_column_contraction(&Rationals, &members, &g, 1).unwrap(),
                None
            );
        }
    }

    #[test]
    fn column_contraction_on_all_intersections() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for m in [interval(), hexagon()] {
            for idx in m.nerve().simplices() {
                let members = m.intersection(idx).unwrap();
                for degree in 0..=2 {
                    let g: SparseFunction<BigRational> = power_tuples(&members, degree + 1)
                        .into_iter()
                        .map(|t| (t, Rationals.random_value(&mut rng)))
                        .collect();
                    assert_eq!(
                        check_column_contraction(&Rationals, &members, &g, degree).unwrap(),
                        None
                    );
                }
            }
        }
    }

    #[test]
    fn vertex_pullback_examples() {
        let h = hexagon();
        let f = LocalCochain::new(
            &Rationals,
            &h,
            1,
            [(vec![0, 1], q(7)), (vec![1, 0], q(2))].into(),
        )
        .unwrap();
        let c = vertex_pullback(&Rationals, &h, &f).unwrap();
        assert_eq!(c.values().len(), 1);
        assert_eq!(c.values().get(&vec![0, 1]), Some(&q(7)));

        let g = LocalCochain::new(
            &Rationals,
            &h,
            0,
            (0..6).map(|x| (vec![x], q(x as i64))).collect(),
        )
        .unwrap();
        let c0 = vertex_pullback(&Rationals, &h, &g).unwrap();
        assert_eq!(c0.values(), g.values());
    }

    #[test]
    fn vertex_pullback_is_a_chain_map() {
        let h = hexagon();
        let cx = SimplicialComplex::u_small(&h).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let f = LocalCochain::random(&Rationals, &h, 0, 0.7, &mut rng).unwrap();
            let lhs =
                vertex_pullback(&Rationals, &h, &f.differential(&Rationals, &h).unwrap()).unwrap();
            let rhs = vertex_pullback(&Rationals, &h, &f)
                .unwrap()
                .coboundary(&Rationals, &cx);
            assert!(lhs.approx_eq(&Rationals, &rhs, 0.0));
        }
    }

    #[test]
    fn pullback_rejects_large_simplices() {
        let h = hexagon();
        let big = SimplicialComplex::new(&[vec![0], vec![3], vec![0, 3]]);
        let f = LocalCochain::<BigRational>::zero(1);
        assert_eq!(
            vertex_pullback_on(&Rationals, &h, &big, &f),
            Err(CochainError::NotSmall(vec![0, 3]))
        );
    }

    #[test]
    fn cochain_json_round_trip() {
        let h = hexagon();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = LocalCochain::random(&Rationals, &h, 1, 0.5, &mut rng).unwrap();
        let back = LocalCochain::from_json(&Rationals, &h, &f.to_json(&Rationals)).unwrap();
        assert_eq!(back, f);
        let r2 = RealVectors::new(2).unwrap();
        let g = LocalCochain::random(&r2, &h, 0, 1.0, &mut rng).unwrap();
        let back = LocalCochain::from_json(&r2, &h, &g.to_json(&r2)).unwrap();
        assert!(back.approx_eq(&r2, &g, 0.0));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn permutation_sign(perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle(), len in 1usize..=4) {
                let m = crate::fixtures::cyclic(12, 3);
                // U_0..U_3 share the points 0 and 1 (arcs of radius 3).
                let base: Vec<usize> = (0..len).collect();
                let x = vec![1usize, 0];
                let mut page = CechPage::zero(len - 1, 1);
                page.insert(&Rationals, &m, &base, x.clone(), q(5)).unwrap();
                let shuffled: Vec<usize> = perm.iter().copied().filter(|&i| i < len).collect();
                let (_, sign) = sort_with_sign(&shuffled).unwrap();
                let lhs = page.evaluate_alternating(&Rationals, &m, &shuffled, &x).unwrap();
                let rhs = page.evaluate_alternating(&Rationals, &m, &base, &x).unwrap();
                prop_assert_eq!(lhs, Rationals.signed(sign, &rhs));
            }
        }
    }
}
