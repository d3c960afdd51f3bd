//! Exact cohomology of finite cochain complexes.
//!
//! Differentials are integer matrices in a fixed tuple basis. Ranks over a
//! field come from sparse column reduction; integer cohomology comes from a
//! Smith normal form with a checked unimodular certificate.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Map, Value as Json};
use thiserror::Error;

use crate::coeff::{CoefficientSystem, PrimeField, Rationals};
use crate::model::ModelError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomologyError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("coefficient system {0} is not a field; use the integer path")]
    NonField(CoefficientSystem),
    #[error("degree {degree} exceeds the truncation bound {max}")]
    Truncation { degree: usize, max: usize },
    #[error("Smith normal form certificate failed: {0}")]
    Certificate(String),
    #[error("matrix shapes do not compose: {0}")]
    Shape(String),
}

/// Integer matrix of a differential `C^n → C^{n+1}`, stored column-major and
/// sparse: `rows = dim C^{n+1}`, `cols = dim C^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryMatrix {
    rows: usize,
    columns: Vec<BTreeMap<usize, i64>>,
}

impl BoundaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            columns: vec![BTreeMap::new(); cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn add_entry(&mut self, row: usize, col: usize, v: i64) {
        assert!(row < self.rows, "row {row} out of range");
        let column = &mut self.columns[col];
        let e = column.entry(row).or_insert(0);
        *e += v;
        if *e == 0 {
            column.remove(&row);
        }
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.columns[col].get(&row).copied().unwrap_or(0)
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = (usize, i64)> + '_ {
        self.columns[col].iter().map(|(&r, &v)| (r, v))
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(BTreeMap::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(BTreeMap::is_empty)
    }

    /// `self · other`.
    pub fn compose(&self, other: &BoundaryMatrix) -> Result<BoundaryMatrix, HomologyError> {
        if self.cols() != other.rows {
            return Err(HomologyError::Shape(format!(
                "{}x{} after {}x{}",
                self.rows,
                self.cols(),
                other.rows,
                other.cols()
            )));
        }
        let mut out = BoundaryMatrix::zeros(self.rows, other.cols());
        for (c, col) in other.columns.iter().enumerate() {
            for (&k, &b) in col {
                for (&r, &a) in &self.columns[k] {
                    out.add_entry(r, c, a * b);
                }
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> Vec<Vec<BigInt>> {
        let mut d = vec![vec![BigInt::zero(); self.cols()]; self.rows];
        for (c, col) in self.columns.iter().enumerate() {
            for (&r, &v) in col {
                d[r][c] = BigInt::from(v);
            }
        }
        d
    }

    pub fn from_dense(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if v != 0 {
                    m.add_entry(r, c, v);
                }
            }
        }
        m
    }
}

/// A finite-type cochain complex `C^0 → C^1 → …` in a fixed basis.
pub trait CochainComplex {
    fn dim(&self, n: usize) -> Result<usize, HomologyError>;
    /// The differential `C^n → C^{n+1}` as a `dim(n+1) × dim(n)` matrix.
    fn differential(&self, n: usize) -> Result<BoundaryMatrix, HomologyError>;
}

/// The degree-`n` differential of `complex` in its canonical basis.
pub fn assemble_matrix(
    complex: &dyn CochainComplex,
    n: usize,
) -> Result<BoundaryMatrix, HomologyError> {
    complex.differential(n)
}

/// A complex given directly by its differentials `d_0, d_1, …`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixComplex {
    matrices: Vec<BoundaryMatrix>,
}

impl MatrixComplex {
    pub fn new(matrices: Vec<BoundaryMatrix>) -> Result<Self, HomologyError> {
        for w in matrices.windows(2) {
            if w[0].rows() != w[1].cols() {
                return Err(HomologyError::Shape(format!(
                    "d has {} rows but the next differential has {} columns",
                    w[0].rows(),
                    w[1].cols()
                )));
            }
        }
        Ok(Self { matrices })
    }
}

impl CochainComplex for MatrixComplex {
    fn dim(&self, n: usize) -> Result<usize, HomologyError> {
        if let Some(m) = self.matrices.get(n) {
            Ok(m.cols())
        } else if n > 0 {
            Ok(self.matrices.get(n - 1).map_or(0, BoundaryMatrix::rows))
        } else {
            Ok(0)
        }
    }

    fn differential(&self, n: usize) -> Result<BoundaryMatrix, HomologyError> {
        match self.matrices.get(n) {
            Some(m) => Ok(m.clone()),
            None => Ok(BoundaryMatrix::zeros(0, self.dim(n)?)),
        }
    }
}

/// Exact field arithmetic for elimination.
pub trait Field {
    type E: Clone + PartialEq + fmt::Debug;
    fn from_i64(&self, n: i64) -> Self::E;
    fn is_zero(&self, a: &Self::E) -> bool;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E;
    /// `a / b` for nonzero `b`.
    fn div(&self, a: &Self::E, b: &Self::E) -> Self::E;
}

impl Field for Rationals {
    type E = BigRational;

    fn from_i64(&self, n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn div(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a / b
    }
}

impl Field for PrimeField {
    type E = u64;

    fn from_i64(&self, n: i64) -> u64 {
        self.reduce(n)
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        PrimeField::mul(self, *a, *b)
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        let p = self.modulus();
        (a + (p - b % p)) % p
    }
    fn div(&self, a: &u64, b: &u64) -> u64 {
        PrimeField::mul(self, *a, self.inverse(*b).expect("nonzero divisor"))
    }
}

/// Sparse vector with strictly increasing indices.
pub type SparseVec<E> = Vec<(usize, E)>;

/// `a − f·b`.
fn axpy<F: Field>(
    field: &F,
    a: &SparseVec<F::E>,
    f: &F::E,
    b: &SparseVec<F::E>,
) -> SparseVec<F::E> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ai = a.get(i).map(|x| x.0);
        let bj = b.get(j).map(|x| x.0);
        match (ai, bj) {
            (Some(x), Some(y)) if x == y => {
                let v = field.sub(&a[i].1, &field.mul(f, &b[j].1));
                if !field.is_zero(&v) {
                    out.push((x, v));
                }
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x < y => {
                out.push(a[i].clone());
                i += 1;
            }
            (Some(_), None) => {
                out.push(a[i].clone());
                i += 1;
            }
            (_, Some(y)) => {
                let zero = field.from_i64(0);
                out.push((y, field.sub(&zero, &field.mul(f, &b[j].1))));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// Result of reducing a list of columns left to right.
#[derive(Debug, Clone)]
pub struct Reduction<E> {
    /// Reduced columns; a zero column lies in the span of its predecessors.
    pub reduced: Vec<SparseVec<E>>,
    /// `reduced[j] = Σ_k transforms[j][k] · original[k]`, when tracked.
    pub transforms: Option<Vec<SparseVec<E>>>,
}

impl<E> Reduction<E> {
    pub fn rank(&self) -> usize {
        self.reduced.iter().filter(|c| !c.is_empty()).count()
    }

    /// Indices of columns that are not in the span of earlier columns.
    pub fn independent(&self) -> Vec<usize> {
        (0..self.reduced.len())
            .filter(|&j| !self.reduced[j].is_empty())
            .collect()
    }
}

/// Column reduction that clears each column's lowest nonzero entry against
/// earlier pivots.
pub fn reduce_columns<F: Field>(
    field: &F,
    columns: Vec<SparseVec<F::E>>,
    track: bool,
) -> Reduction<F::E> {
    let mut pivot_of: HashMap<usize, usize> = HashMap::new();
    let mut reduced: Vec<SparseVec<F::E>> = Vec::with_capacity(columns.len());
    let mut transforms: Vec<SparseVec<F::E>> = Vec::new();
    for (j, mut v) in columns.into_iter().enumerate() {
        let mut t = if track {
            vec![(j, field.from_i64(1))]
        } else {
            Vec::new()
        };
        while let Some((low, val)) = v.last().cloned() {
            match pivot_of.get(&low) {
                Some(&k) => {
                    let f = field.div(&val, &reduced[k].last().expect("pivot column").1);
                    v = axpy(field, &v, &f, &reduced[k]);
                    if track {
                        t = axpy(field, &t, &f, &transforms[k]);
                    }
                }
                None => {
                    pivot_of.insert(low, j);
                    break;
                }
            }
        }
        reduced.push(v);
        if track {
            transforms.push(t);
        }
    }
    Reduction {
        reduced,
        transforms: track.then_some(transforms),
    }
}

pub fn matrix_columns<F: Field>(field: &F, m: &BoundaryMatrix) -> Vec<SparseVec<F::E>> {
    (0..m.cols())
        .map(|c| {
            m.column(c)
                .map(|(r, v)| (r, field.from_i64(v)))
                .filter(|(_, v)| !field.is_zero(v))
                .collect()
        })
        .collect()
}

/// Rank of an integer matrix over `field`.
pub fn rank<F: Field>(field: &F, m: &BoundaryMatrix) -> usize {
    reduce_columns(field, matrix_columns(field, m), false).rank()
}

/// A basis of the kernel of `m` over `field`.
pub fn kernel_basis<F: Field>(field: &F, m: &BoundaryMatrix) -> Vec<SparseVec<F::E>> {
    let red = reduce_columns(field, matrix_columns(field, m), true);
    let transforms = red.transforms.expect("tracked");
    red.reduced
        .iter()
        .zip(transforms)
        .filter(|(r, _)| r.is_empty())
        .map(|(_, t)| t)
        .collect()
}

/// Applies `m` to a sparse vector over `field`.
pub fn apply<F: Field>(field: &F, m: &BoundaryMatrix, v: &SparseVec<F::E>) -> SparseVec<F::E> {
    let mut acc: BTreeMap<usize, F::E> = BTreeMap::new();
    let zero = field.from_i64(0);
    for (c, x) in v {
        for (r, e) in m.column(*c) {
            let cur = acc.remove(&r).unwrap_or_else(|| zero.clone());
            // cur + e·x, written as cur − (−e)·x.
            let next = field.sub(&cur, &field.mul(&field.from_i64(-e), x));
            if !field.is_zero(&next) {
                acc.insert(r, next);
            }
        }
    }
    acc.into_iter().collect()
}

/// Cocycles of degree `n` whose classes form a basis of `H^n`.
///
/// `d_prev` is the differential into degree `n` (`None` in degree 0) and
/// `d_n` the differential out of it.
pub fn cohomology_representatives<F: Field>(
    field: &F,
    d_prev: Option<&BoundaryMatrix>,
    d_n: &BoundaryMatrix,
) -> Vec<SparseVec<F::E>> {
    let kernel = kernel_basis(field, d_n);
    let boundaries = d_prev.map(|m| matrix_columns(field, m)).unwrap_or_default();
    let nb = boundaries.len();
    let mut all = boundaries;
    all.extend(kernel.iter().cloned());
    let red = reduce_columns(field, all, false);
    red.independent()
        .into_iter()
        .filter(|&j| j >= nb)
        .map(|j| kernel[j - nb].clone())
        .collect()
}

/// Cohomology of one degree: free rank and torsion invariant factors (> 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeCohomology {
    pub rank: usize,
    pub torsion: Vec<BigInt>,
}

/// Per-degree cohomology up to a truncation degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CohomologyProfile {
    pub system: CoefficientSystem,
    pub degrees: Vec<DegreeCohomology>,
}

impl CohomologyProfile {
    /// Ranks per degree (dimensions over a field).
    pub fn ranks(&self) -> Vec<usize> {
        self.degrees.iter().map(|d| d.rank).collect()
    }

    pub fn torsion(&self, n: usize) -> &[BigInt] {
        self.degrees.get(n).map_or(&[], |d| d.torsion.as_slice())
    }

    pub fn is_torsion_free(&self) -> bool {
        self.degrees.iter().all(|d| d.torsion.is_empty())
    }

    /// `{"<n>": {"rank": r, "torsion": [...]}}`, keyed by degree.
    pub fn to_json(&self) -> Json {
        let mut map = Map::new();
        for (n, d) in self.degrees.iter().enumerate() {
            let torsion: Vec<Json> = d
                .torsion
                .iter()
                .map(|t| {
                    t.to_u64()
                        .map_or_else(|| Json::String(t.to_string()), Json::from)
                })
                .collect();
            map.insert(n.to_string(), json!({"rank": d.rank, "torsion": torsion}));
        }
        Json::Object(map)
    }
}

/// Dimensions `dim H^n` for `n ≤ max_degree` over an exact field.
pub fn field_cohomology<F: Field>(
    field: &F,
    system: CoefficientSystem,
    complex: &dyn CochainComplex,
    max_degree: usize,
) -> Result<CohomologyProfile, HomologyError> {
    let mut ranks = Vec::with_capacity(max_degree + 1);
    for n in 0..=max_degree {
        ranks.push(rank(field, &complex.differential(n)?));
    }
    let mut degrees = Vec::with_capacity(max_degree + 1);
    for n in 0..=max_degree {
        let prev = if n == 0 { 0 } else { ranks[n - 1] };
        degrees.push(DegreeCohomology {
            rank: complex.dim(n)? - ranks[n] - prev,
            torsion: Vec::new(),
        });
    }
    Ok(CohomologyProfile { system, degrees })
}

/// Smith normal form `D = U·M·V` with unimodular `U`, `V`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    /// Nonzero diagonal entries of `D`, positive, each dividing the next.
    pub invariant_factors: Vec<BigInt>,
    pub u: Vec<Vec<BigInt>>,
    pub v: Vec<Vec<BigInt>>,
    pub diagonal: Vec<Vec<BigInt>>,
}

impl SmithForm {
    pub fn rank(&self) -> usize {
        self.invariant_factors.len()
    }

    /// Invariant factors greater than one.
    pub fn torsion(&self) -> Vec<BigInt> {
        self.invariant_factors
            .iter()
            .filter(|d| !d.is_one())
            .cloned()
            .collect()
    }
}

fn identity(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigInt::one()
                    } else {
                        BigInt::zero()
                    }
                })
                .collect()
        })
        .collect()
}

/// `row_a ← row_a − q·row_b`.
fn row_op(a: &mut [Vec<BigInt>], dst: usize, src: usize, q: &BigInt) {
    let (d, s) = if dst < src {
        let (lo, hi) = a.split_at_mut(src);
        (&mut lo[dst], &hi[0])
    } else {
        let (lo, hi) = a.split_at_mut(dst);
        (&mut hi[0], &lo[src])
    };
    for (x, y) in d.iter_mut().zip(s.iter()) {
        if !y.is_zero() {
            *x -= q * y;
        }
    }
}

/// `col_a ← col_a − q·col_b`.
fn col_op(a: &mut [Vec<BigInt>], dst: usize, src: usize, q: &BigInt) {
    for row in a.iter_mut() {
        if !row[src].is_zero() {
            let t = q * &row[src];
            row[dst] -= t;
        }
    }
}

fn swap_cols(a: &mut [Vec<BigInt>], i: usize, j: usize) {
    for row in a.iter_mut() {
        row.swap(i, j);
    }
}

/// Smith normal form by row and column reduction with smallest-magnitude
/// pivots. The certificate is checked before returning.
pub fn smith_normal_form(m: &BoundaryMatrix) -> Result<SmithForm, HomologyError> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.to_dense();
    let mut u = identity(rows);
    let mut v = identity(cols);
    let mut factors = Vec::new();

    for t in 0..rows.min(cols) {
        // Smallest nonzero entry of the remaining block.
        let pivot = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| !a[i][j].is_zero())
            .min_by(|&(i, j), &(k, l)| a[i][j].abs().cmp(&a[k][l].abs()));
        let Some((pi, pj)) = pivot else { break };
        a.swap(t, pi);
        u.swap(t, pi);
        swap_cols(&mut a, t, pj);
        swap_cols(&mut v, t, pj);

        loop {
            let mut clean = true;
            for i in t + 1..rows {
                if !a[i][t].is_zero() {
                    let q = a[i][t].div_floor(&a[t][t]);
                    row_op(&mut a, i, t, &q);
                    row_op(&mut u, i, t, &q);
                    clean &= a[i][t].is_zero();
                }
            }
            for j in t + 1..cols {
                if !a[t][j].is_zero() {
                    let q = a[t][j].div_floor(&a[t][t]);
                    col_op(&mut a, j, t, &q);
                    col_op(&mut v, j, t, &q);
                    clean &= a[t][j].is_zero();
                }
            }
            if !clean {
                // Move the smallest remainder in the pivot row/column to (t,t).
                let mut best = (t, t);
                for i in t + 1..rows {
                    if !a[i][t].is_zero() && a[i][t].abs() < a[best.0][best.1].abs() {
                        best = (i, t);
                    }
                }
                for j in t + 1..cols {
                    if !a[t][j].is_zero() && a[t][j].abs() < a[best.0][best.1].abs() {
                        best = (t, j);
                    }
                }
                if best.0 != t {
                    a.swap(t, best.0);
                    u.swap(t, best.0);
                } else if best.1 != t {
                    swap_cols(&mut a, t, best.1);
                    swap_cols(&mut v, t, best.1);
                }
                continue;
            }
            // Divisibility: fold a non-multiple into the pivot row.
            let bad =
                (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !a[i][j].is_multiple_of(&a[t][t])));
            match bad {
                Some(i) => {
                    let minus_one = -BigInt::one();
                    row_op(&mut a, t, i, &minus_one);
                    row_op(&mut u, t, i, &minus_one);
                }
                None => break,
            }
        }
        if a[t][t].is_negative() {
            for x in a[t].iter_mut() {
                *x = -&*x;
            }
            for x in u[t].iter_mut() {
                *x = -&*x;
            }
        }
        factors.push(a[t][t].clone());
    }

    let form = SmithForm {
        invariant_factors: factors,
        u,
        v,
        diagonal: a,
    };
    verify_smith(m, &form)?;
    Ok(form)
}

fn dense_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>], inner: usize, cols: usize) -> Vec<Vec<BigInt>> {
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut s = BigInt::zero();
                    for k in 0..inner {
                        if !row[k].is_zero() && !b[k][j].is_zero() {
                            s += &row[k] * &b[k][j];
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn determinant(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let x = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = x / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Checks `U·M·V = D`, that `D` is diagonal with the divisibility chain, and
/// that `U` and `V` are unimodular.
pub fn verify_smith(m: &BoundaryMatrix, form: &SmithForm) -> Result<(), HomologyError> {
    let (rows, cols) = (m.rows(), m.cols());
    let um = dense_mul(&form.u, &m.to_dense(), rows, cols);
    let umv = dense_mul(&um, &form.v, cols, cols);
    if umv != form.diagonal {
        return Err(HomologyError::Certificate("U·M·V differs from D".into()));
    }
    for (i, row) in form.diagonal.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            let expected = if i == j {
                form.invariant_factors
                    .get(i)
                    .cloned()
                    .unwrap_or_else(BigInt::zero)
            } else {
                BigInt::zero()
            };
            if *x != expected {
                return Err(HomologyError::Certificate(format!(
                    "D[{i}][{j}] = {x}, expected {expected}"
                )));
            }
        }
    }
    if form
        .invariant_factors
        .windows(2)
        .any(|w| !w[0].is_positive() || !w[1].is_multiple_of(&w[0]))
    {
        return Err(HomologyError::Certificate(
            "invariant factors do not form a divisibility chain".into(),
        ));
    }
    for (name, x) in [("U", &form.u), ("V", &form.v)] {
        if !determinant(x).abs().is_one() {
            return Err(HomologyError::Certificate(format!(
                "{name} is not unimodular"
            )));
        }
    }
    Ok(())
}

/// Eliminates `±1` pivots by sparse unimodular row and column operations.
///
/// Returns the number of pivots removed (each an invariant factor 1) and
/// the remaining submatrix, or `None` if an entry left the `i64` range.
fn eliminate_unit_pivots(m: &BoundaryMatrix) -> Option<(usize, BoundaryMatrix)> {
    let mut cols: Vec<BTreeMap<usize, i64>> =
        (0..m.cols()).map(|c| m.column(c).collect()).collect();
    let mut rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m.rows()];
    for (c, col) in cols.iter().enumerate() {
        for &r in col.keys() {
            rows[r].insert(c);
        }
    }
    let mut units = 0;
    let mut progress = true;
    while progress {
        progress = false;
        for c in 0..cols.len() {
            // The unit entry of column c whose row is sparsest.
            let Some(r) = cols[c]
                .iter()
                .filter(|(_, v)| v.abs() == 1)
                .map(|(&r, _)| r)
                .min_by_key(|&r| rows[r].len())
            else {
                continue;
            };
            let a = cols[c][&r];
            let pivot = std::mem::take(&mut cols[c]);
            let others: Vec<usize> = rows[r].iter().copied().filter(|&k| k != c).collect();
            for k in others {
                let f = cols[k][&r].checked_mul(a)?;
                for (&row, &x) in &pivot {
                    let cur = cols[k].get(&row).copied().unwrap_or(0);
                    let next = cur.checked_sub(f.checked_mul(x)?)?;
                    if next == 0 {
                        cols[k].remove(&row);
                        rows[row].remove(&k);
                    } else {
                        cols[k].insert(row, next);
                        rows[row].insert(k);
                    }
                }
            }
            for &row in pivot.keys() {
                rows[row].remove(&c);
            }
            units += 1;
            progress = true;
        }
    }
    let live_cols: Vec<usize> = (0..cols.len()).filter(|&c| !cols[c].is_empty()).collect();
    let live_rows: Vec<usize> = (0..rows.len()).filter(|&r| !rows[r].is_empty()).collect();
    let row_index: HashMap<usize, usize> =
        live_rows.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let mut rest = BoundaryMatrix::zeros(live_rows.len(), live_cols.len());
    for (j, &c) in live_cols.iter().enumerate() {
        for (&r, &v) in &cols[c] {
            rest.add_entry(row_index[&r], j, v);
        }
    }
    Some((units, rest))
}

/// Invariant factors of an integer matrix.
///
/// `±1` pivots are removed sparsely first; the remainder goes through
/// [`smith_normal_form`], whose certificate is checked.
pub fn invariant_factors(m: &BoundaryMatrix) -> Result<Vec<BigInt>, HomologyError> {
    match eliminate_unit_pivots(m) {
        Some((units, rest)) => {
            let mut out = vec![BigInt::one(); units];
            if !rest.is_zero() {
                out.extend(smith_normal_form(&rest)?.invariant_factors);
            }
            Ok(out)
        }
        None => Ok(smith_normal_form(m)?.invariant_factors),
    }
}

/// Free ranks and torsion of the cohomology with integer coefficients.
pub fn integer_cohomology(
    complex: &dyn CochainComplex,
    max_degree: usize,
) -> Result<CohomologyProfile, HomologyError> {
    let factors: Vec<Vec<BigInt>> = (0..=max_degree)
        .map(|n| invariant_factors(&complex.differential(n)?))
        .collect::<Result<_, _>>()?;
    let mut degrees = Vec::with_capacity(max_degree + 1);
    for n in 0..=max_degree {
        let (prev_rank, torsion) = match n.checked_sub(1) {
            Some(k) => (
                factors[k].len(),
                factors[k].iter().filter(|d| !d.is_one()).cloned().collect(),
            ),
            None => (0, Vec::new()),
        };
        degrees.push(DegreeCohomology {
            rank: complex.dim(n)? - factors[n].len() - prev_rank,
            torsion,
        });
    }
    Ok(CohomologyProfile {
        system: CoefficientSystem::Integers,
        degrees,
    })
}

/// Cohomology profile for any supported coefficient system.
///
/// Real vector coefficients of dimension `d` are handled exactly: the
/// differentials are integral, so `dim_ℝ H^n(C; ℝ^d) = d · dim_ℚ H^n(C; ℚ)`.
pub fn cohomology_profile(
    system: CoefficientSystem,
    complex: &dyn CochainComplex,
    max_degree: usize,
) -> Result<CohomologyProfile, HomologyError> {
    match system {
        CoefficientSystem::Rationals => field_cohomology(&Rationals, system, complex, max_degree),
        CoefficientSystem::PrimeField(p) => {
            let field = PrimeField::new(p).map_err(|_| HomologyError::NonField(system))?;
            field_cohomology(&field, system, complex, max_degree)
        }
        CoefficientSystem::Integers => integer_cohomology(complex, max_degree),
        CoefficientSystem::RealVectors(d) => {
            let mut profile = field_cohomology(&Rationals, system, complex, max_degree)?;
            for deg in &mut profile.degrees {
                deg.rank *= d;
            }
            Ok(profile)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn smith_examples() {
        let id = BoundaryMatrix::from_dense(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert_eq!(
            smith_normal_form(&id).unwrap().invariant_factors,
            big(&[1, 1, 1])
        );
        let d = BoundaryMatrix::from_dense(&[vec![2, 0], vec![0, 0]]);
        assert_eq!(smith_normal_form(&d).unwrap().invariant_factors, big(&[2]));
        let chain = BoundaryMatrix::from_dense(&[vec![2, 0], vec![0, 3]]);
        assert_eq!(
            smith_normal_form(&chain).unwrap().invariant_factors,
            big(&[1, 6])
        );
        let m = BoundaryMatrix::from_dense(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        assert_eq!(
            smith_normal_form(&m).unwrap().invariant_factors,
            big(&[2, 6, 12])
        );
    }

    #[test]
    fn empty_matrices() {
        let m = BoundaryMatrix::zeros(0, 3);
        assert_eq!(rank(&Rationals, &m), 0);
        assert_eq!(kernel_basis(&Rationals, &m).len(), 3);
        assert!(smith_normal_form(&m).unwrap().invariant_factors.is_empty());
    }

    #[test]
    fn determinant_examples() {
        let m = vec![big(&[2, 1]), big(&[7, 4])];
        assert_eq!(determinant(&m), BigInt::one());
        let s = vec![big(&[0, 1, 0]), big(&[1, 0, 0]), big(&[0, 0, 5])];
        assert_eq!(determinant(&s), BigInt::from(-5));
    }

    #[test]
    fn rank_over_fields() {
        // Rank 2 over Q, rank 1 over Z/2.
        let m = BoundaryMatrix::from_dense(&[vec![1, 1], vec![1, -1]]);
        assert_eq!(rank(&Rationals, &m), 2);
        assert_eq!(rank(&PrimeField::new(2).unwrap(), &m), 1);
    }

    #[test]
    fn point_profile() {
        let c = MatrixComplex::new(vec![BoundaryMatrix::zeros(0, 1)]).unwrap();
        let p = cohomology_profile(CoefficientSystem::Rationals, &c, 2).unwrap();
        assert_eq!(p.ranks(), vec![1, 0, 0]);
    }

    #[test]
    fn circle_profile_from_matrices() {
        // Triangle boundary: 3 vertices, 3 edges.
        let d0 = BoundaryMatrix::from_dense(&[vec![-1, 1, 0], vec![-1, 0, 1], vec![0, -1, 1]]);
        let c = MatrixComplex::new(vec![d0]).unwrap();
        for system in [
            CoefficientSystem::Rationals,
            CoefficientSystem::Integers,
            CoefficientSystem::PrimeField(5),
        ] {
            let p = cohomology_profile(system, &c, 1).unwrap();
            assert_eq!(p.ranks(), vec![1, 1]);
            assert!(p.is_torsion_free());
        }
        let reps = cohomology_representatives(
            &Rationals,
            Some(&c.differential(0).unwrap()),
            &c.differential(1).unwrap(),
        );
        assert_eq!(reps.len(), 1);
    }

    #[test]
    fn invariant_factors_with_torsion() {
        // Boundary of the projective plane's 2-cells picks up a factor 2.
        let m = BoundaryMatrix::from_dense(&[vec![1, 0, 0], vec![0, 2, 0], vec![1, 0, 0]]);
        assert_eq!(
            invariant_factors(&m).unwrap(),
            vec![BigInt::from(1), BigInt::from(2)]
        );
        assert_eq!(
            invariant_factors(&BoundaryMatrix::zeros(3, 2)).unwrap(),
            Vec::<BigInt>::new()
        );
    }

    #[test]
    fn profile_json_shape() {
        let p = CohomologyProfile {
            system: CoefficientSystem::Integers,
            degrees: vec![
                DegreeCohomology {
                    rank: 1,
                    torsion: vec![],
                },
                DegreeCohomology {
                    rank: 0,
                    torsion: vec![BigInt::from(2)],
                },
            ],
        };
        assert_eq!(
            p.to_json(),
            json!({"0": {"rank": 1, "torsion": []}, "1": {"rank": 0, "torsion": [2]}})
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn matrix() -> impl Strategy<Value = BoundaryMatrix> {
            (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
                proptest::collection::vec(proptest::collection::vec(-4i64..=4, c), r)
                    .prop_map(|rows| BoundaryMatrix::from_dense(&rows))
            })
        }

        proptest! {
            #[test]
            fn smith_certificate_holds(m in matrix()) {
                let f = smith_normal_form(&m).unwrap();
                prop_assert_eq!(f.rank(), rank(&Rationals, &m));
            }

            #[test]
            fn unit_elimination_keeps_invariant_factors(m in matrix()) {
                prop_assert_eq!(invariant_factors(&m).unwrap(), smith_normal_form(&m).unwrap().invariant_factors);
            }

            #[test]
            fn rank_nullity(m in matrix()) {
                for_field(&Rationals, &m)?;
                for_field(&PrimeField::new(5).unwrap(), &m)?;
            }
        }

        fn for_field<F: Field>(field: &F, m: &BoundaryMatrix) -> Result<(), TestCaseError> {
            let kernel = kernel_basis(field, m);
            prop_assert_eq!(rank(field, m) + kernel.len(), m.cols());
            for k in &kernel {
                prop_assert!(apply(field, m, k).is_empty());
            }
            Ok(())
        }
    }
}
