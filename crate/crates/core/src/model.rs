//! Finite cover models.
//!
//! A [`CoverModel`] is a finite point set `X` with an ordered open cover
//! `U_0, …, U_k` and, optionally, an ordered simplicial complex on the same
//! vertices. Points and cover sets are totally ordered by input position;
//! every enumeration in the crate follows that order.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default cap on `|X|^(n+1)` for tuple enumerations.
pub const DEFAULT_BUDGET: usize = 2_000_000;

/// Largest supported number of cover sets (membership is kept in a `u128`).
pub const MAX_COVER_SETS: usize = 128;

/// A tuple of point (or cover index) positions.
pub type Tuple = Vec<usize>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("enumeration of |X|^(n+1) = {size} tuples exceeds the budget of {budget}")]
    BudgetExceeded { size: String, budget: usize },
    #[error("point {0} is not covered by any cover set")]
    Uncovered(String),
    #[error("duplicate point identifier {0}")]
    DuplicatePoint(String),
    #[error("unknown point identifier {0}")]
    UnknownPoint(String),
    #[error("cover index {index} out of range (cover has {len} sets)")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("cover indices must be strictly increasing, got {0:?}")]
    NotIncreasing(Vec<usize>),
    #[error("the model has no simplicial complex")]
    MissingComplex,
    #[error("duplicate simplex {0:?}")]
    DuplicateSimplex(Vec<String>),
    #[error("simplex {0:?} repeats a vertex")]
    DegenerateSimplex(Vec<String>),
    #[error("cover has {0} sets; at most {MAX_COVER_SETS} are supported")]
    TooManyCoverSets(usize),
    #[error("the model has no points")]
    Empty,
    #[error("invalid arc radius {k} for the cyclic group of order {m}")]
    InvalidRadius { m: usize, k: usize },
    #[error("invalid model file: {0}")]
    Parse(String),
}

/// A point identifier as written in a model file.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointLabel {
    Int(i64),
    Name(String),
}

impl fmt::Display for PointLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Int(n) => write!(f, "{n}"),
            Self::Name(s) => write!(f, "{s}"),
        }
    }
}

impl From<i64> for PointLabel {
    fn from(n: i64) -> Self {
        Self::Int(n)
    }
}

impl From<&str> for PointLabel {
    fn from(s: &str) -> Self {
        Self::Name(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverSet {
    pub name: String,
    members: Vec<usize>,
}

impl CoverSet {
    pub fn members(&self) -> &[usize] {
        &self.members
    }
}

/// On-disk layout of a model file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub points: Vec<PointLabel>,
    pub cover: Vec<CoverEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complex: Option<Vec<Vec<PointLabel>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverEntry {
    pub name: String,
    pub members: Vec<PointLabel>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverModel {
    points: Vec<PointLabel>,
    cover: Vec<CoverSet>,
    complex: Option<Vec<Tuple>>,
    masks: Vec<u128>,
    budget: usize,
}

/// `(U_0^{n+1} ∪ … ∪ U_k^{n+1})`, enumerated lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleSet {
    arity: usize,
    tuples: Vec<Tuple>,
}

impl TupleSet {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn tuples(&self) -> &[Tuple] {
        &self.tuples
    }

    pub fn iter(&self) -> impl Iterator<Item = &Tuple> {
        self.tuples.iter()
    }

    pub fn index_of(&self, t: &[usize]) -> Option<usize> {
        self.tuples.binary_search_by(|x| x.as_slice().cmp(t)).ok()
    }

    pub fn contains(&self, t: &[usize]) -> bool {
        self.index_of(t).is_some()
    }
}

/// Nerve of a cover: increasing index tuples with nonempty intersection,
/// sorted by dimension and then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nerve {
    simplices: Vec<Tuple>,
}

impl Nerve {
    pub fn simplices(&self) -> &[Tuple] {
        &self.simplices
    }

    pub fn of_dimension(&self, p: usize) -> impl Iterator<Item = &Tuple> {
        self.simplices.iter().filter(move |s| s.len() == p + 1)
    }

    pub fn count(&self, p: usize) -> usize {
        self.of_dimension(p).count()
    }

    pub fn contains(&self, s: &[usize]) -> bool {
        self.simplices.iter().any(|t| t == s)
    }

    pub fn dimension(&self) -> Option<usize> {
        self.simplices.iter().map(|s| s.len() - 1).max()
    }
}

/// Sorts by (length, lexicographic).
pub(crate) fn simplex_order(a: &Tuple, b: &Tuple) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

/// Closes a list of simplices under taking faces.
pub fn face_closure(simplices: &[Tuple]) -> Vec<Tuple> {
    let mut all = BTreeSet::new();
    for s in simplices {
        let k = s.len();
        for mask in 1u64..(1u64 << k) {
            let face: Tuple = (0..k)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| s[i])
                .collect();
            all.insert(face);
        }
    }
    let mut out: Vec<Tuple> = all.into_iter().collect();
    out.sort_by(simplex_order);
    out
}

impl CoverModel {
    /// Builds a model from point labels, cover sets given by point
    /// positions, and an optional complex given by point positions.
    ///
    /// Cover members are sorted and deduplicated; the complex is closed under
    /// faces.
    pub fn new(
        points: Vec<PointLabel>,
        cover: Vec<(String, Vec<usize>)>,
        complex: Option<Vec<Tuple>>,
    ) -> Result<Self, ModelError> {
        if points.is_empty() {
            return Err(ModelError::Empty);
        }
        let mut seen = BTreeSet::new();
        for p in &points {
            if !seen.insert(p.clone()) {
                return Err(ModelError::DuplicatePoint(p.to_string()));
            }
        }
        if cover.len() > MAX_COVER_SETS {
            return Err(ModelError::TooManyCoverSets(cover.len()));
        }
        let n = points.len();
        let mut masks = vec![0u128; n];
        let mut sets = Vec::with_capacity(cover.len());
        for (i, (name, members)) in cover.into_iter().enumerate() {
            let mut members = members;
            members.sort_unstable();
            members.dedup();
            for &m in &members {
                if m >= n {
                    return Err(ModelError::UnknownPoint(format!("#{m}")));
                }
                masks[m] |= 1u128 << i;
            }
            sets.push(CoverSet { name, members });
        }
        if let Some(x) = masks.iter().position(|m| *m == 0) {
            return Err(ModelError::Uncovered(points[x].to_string()));
        }
        let complex = match complex {
            None => None,
            Some(list) => {
                let label = |s: &Tuple| {
                    s.iter()
                        .map(|&v| points.get(v).map_or(format!("#{v}"), |p| p.to_string()))
                        .collect::<Vec<_>>()
                };
                let mut given = BTreeSet::new();
                for s in &list {
                    if let Some(&v) = s.iter().find(|&&v| v >= n) {
                        return Err(ModelError::UnknownPoint(format!("#{v}")));
                    }
                    let mut sorted = s.clone();
                    sorted.sort_unstable();
                    if sorted.windows(2).any(|w| w[0] == w[1]) || sorted.is_empty() {
                        return Err(ModelError::DegenerateSimplex(label(s)));
                    }
                    if !given.insert(sorted) {
                        return Err(ModelError::DuplicateSimplex(label(s)));
                    }
                }
                let given: Vec<Tuple> = given.into_iter().collect();
                Some(face_closure(&given))
            }
        };
        Ok(Self {
            points,
            cover: sets,
            complex,
            masks,
            budget: DEFAULT_BUDGET,
        })
    }

    pub fn from_file(file: &ModelFile) -> Result<Self, ModelError> {
        let points = file.points.clone();
        let lookup = |p: &PointLabel| {
            points
                .iter()
                .position(|q| q == p)
                .ok_or_else(|| ModelError::UnknownPoint(p.to_string()))
        };
        let cover = file
            .cover
            .iter()
            .map(|c| {
                let members = c
                    .members
                    .iter()
                    .map(lookup)
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((c.name.clone(), members))
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        let complex = match &file.complex {
            None => None,
            Some(list) => Some(
                list.iter()
                    .map(|s| s.iter().map(lookup).collect::<Result<Tuple, _>>())
                    .collect::<Result<Vec<_>, _>>()?,
            ),
        };
        Self::new(points, cover, complex)
    }

    pub fn from_json_str(s: &str) -> Result<Self, ModelError> {
        let file: ModelFile =
            serde_json::from_str(s).map_err(|e| ModelError::Parse(e.to_string()))?;
        Self::from_file(&file)
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            points: self.points.clone(),
            cover: self
                .cover
                .iter()
                .map(|c| CoverEntry {
                    name: c.name.clone(),
                    members: c.members.iter().map(|&m| self.points[m].clone()).collect(),
                })
                .collect(),
            complex: self.complex.as_ref().map(|cx| {
                cx.iter()
                    .map(|s| s.iter().map(|&v| self.points[v].clone()).collect())
                    .collect()
            }),
        }
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[PointLabel] {
        &self.points
    }

    pub fn cover_len(&self) -> usize {
        self.cover.len()
    }

    pub fn cover(&self) -> &[CoverSet] {
        &self.cover
    }

    pub fn members(&self, i: usize) -> &[usize] {
        &self.cover[i].members
    }

    pub fn complex(&self) -> Option<&[Tuple]> {
        self.complex.as_deref()
    }

    /// Bitmask of cover indices containing point `x`.
    pub fn point_mask(&self, x: usize) -> u128 {
        self.masks[x]
    }

    /// Bitmask of cover indices `i` with `t ∈ U_i^{len(t)}`.
    pub fn tuple_mask(&self, t: &[usize]) -> u128 {
        t.iter().fold(u128::MAX, |acc, &x| acc & self.masks[x])
    }

    /// `t ∈ 𝔘[len(t) - 1]`.
    pub fn in_neighborhood(&self, t: &[usize]) -> bool {
        self.tuple_mask(t) != 0
    }

    pub fn tuple_in_set(&self, i: usize, t: &[usize]) -> bool {
        t.iter().all(|&x| self.masks[x] >> i & 1 == 1)
    }

    /// `t ∈ U_{indices}^{len(t)}`.
    pub fn tuple_in_intersection(&self, indices: &[usize], t: &[usize]) -> bool {
        let need = indices.iter().fold(0u128, |acc, &i| acc | 1u128 << i);
        self.tuple_mask(t) & need == need
    }

    /// Fails unless `|X|^arity` fits the enumeration budget.
    pub fn check_budget(&self, arity: usize) -> Result<(), ModelError> {
        let n = self.points.len();
        match u32::try_from(arity).ok().and_then(|a| n.checked_pow(a)) {
            Some(size) if size <= self.budget => Ok(()),
            Some(size) => Err(ModelError::BudgetExceeded {
                size: size.to_string(),
                budget: self.budget,
            }),
            None => Err(ModelError::BudgetExceeded {
                size: format!("{n}^{arity}"),
                budget: self.budget,
            }),
        }
    }

    /// The diagonal neighbourhood `𝔘[n]`, the domain of local `n`-cochains.
    pub fn diagonal_neighborhood(&self, n: usize) -> Result<TupleSet, ModelError> {
        self.check_budget(n + 1)?;
        let mut tuples = Vec::new();
        let mut cur = Vec::with_capacity(n + 1);
        self.extend_tuples(&mut cur, u128::MAX, n + 1, &mut tuples);
        Ok(TupleSet {
            arity: n + 1,
            tuples,
        })
    }

    fn extend_tuples(&self, cur: &mut Tuple, mask: u128, arity: usize, out: &mut Vec<Tuple>) {
        if cur.len() == arity {
            out.push(cur.clone());
            return;
        }
        for x in 0..self.points.len() {
            let m = mask & self.masks[x];
            if m != 0 {
                cur.push(x);
                self.extend_tuples(cur, m, arity, out);
                cur.pop();
            }
        }
    }

    fn check_indices(&self, indices: &[usize]) -> Result<(), ModelError> {
        if let Some(&i) = indices.iter().find(|&&i| i >= self.cover.len()) {
            return Err(ModelError::IndexOutOfRange {
                index: i,
                len: self.cover.len(),
            });
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ModelError::NotIncreasing(indices.to_vec()));
        }
        Ok(())
    }

    /// `U_{i_0} ∩ … ∩ U_{i_p}` as sorted point positions. The empty index
    /// tuple yields all of `X`.
    pub fn intersection(&self, indices: &[usize]) -> Result<Vec<usize>, ModelError> {
        self.check_indices(indices)?;
        Ok(self.intersection_unchecked(indices))
    }

    pub(crate) fn intersection_unchecked(&self, indices: &[usize]) -> Vec<usize> {
        let need = indices.iter().fold(0u128, |acc, &i| acc | 1u128 << i);
        (0..self.points.len())
            .filter(|&x| self.masks[x] & need == need)
            .collect()
    }

    pub fn nerve(&self) -> Nerve {
        let mut simplices = Vec::new();
        let all: Vec<usize> = (0..self.points.len()).collect();
        let mut cur = Vec::new();
        self.extend_nerve(&mut cur, &all, &mut simplices);
        simplices.sort_by(simplex_order);
        Nerve { simplices }
    }

    fn extend_nerve(&self, cur: &mut Tuple, common: &[usize], out: &mut Vec<Tuple>) {
        let start = cur.last().map_or(0, |&i| i + 1);
        for i in start..self.cover.len() {
            let next: Vec<usize> = common
                .iter()
                .copied()
                .filter(|&x| self.masks[x] >> i & 1 == 1)
                .collect();
            if next.is_empty() {
                continue;
            }
            cur.push(i);
            out.push(cur.clone());
            self.extend_nerve(cur, &next, out);
            cur.pop();
        }
    }

    pub fn is_small(&self, simplex: &[usize]) -> bool {
        self.in_neighborhood(simplex)
    }

    /// Simplices of the model complex whose vertices lie in a single cover
    /// set.
    pub fn u_small_subcomplex(&self) -> Result<Vec<Tuple>, ModelError> {
        let cx = self.complex.as_ref().ok_or(ModelError::MissingComplex)?;
        Ok(cx.iter().filter(|s| self.is_small(s)).cloned().collect())
    }

    /// The full subcomplex of the model complex spanned by `vertices`.
    pub fn full_subcomplex(&self, vertices: &[usize]) -> Result<Vec<Tuple>, ModelError> {
        let cx = self.complex.as_ref().ok_or(ModelError::MissingComplex)?;
        Ok(cx
            .iter()
            .filter(|s| s.iter().all(|v| vertices.binary_search(v).is_ok()))
            .cloned()
            .collect())
    }

    /// A copy of this model with a different cover on the same points.
    pub fn with_cover(&self, cover: Vec<(String, Vec<usize>)>) -> Result<Self, ModelError> {
        Ok(Self::new(self.points.clone(), cover, self.complex.clone())?.with_budget(self.budget))
    }
}

fn arc(m: usize, g: usize, k: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..=2 * k).map(|j| (g + m + j - k % m) % m).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// The cover `{g + [-k, k] | g ∈ ℤ_m}` of the cyclic group with the
/// `m`-cycle complex. Any `k` is allowed here, including `k = 0`.
pub fn arc_cover(m: usize, k: usize) -> Result<CoverModel, ModelError> {
    if m == 0 {
        return Err(ModelError::InvalidRadius { m, k });
    }
    let points = (0..m as i64).map(PointLabel::Int).collect();
    let cover = (0..m).map(|g| (format!("U{g}"), arc(m, g, k))).collect();
    let complex = if m >= 3 {
        let mut edges: Vec<Tuple> = (0..m)
            .map(|g| {
                let mut e = vec![g, (g + 1) % m];
                e.sort_unstable();
                e
            })
            .collect();
        edges.sort();
        Some(edges)
    } else {
        None
    };
    CoverModel::new(points, cover, complex)
}

/// Left-invariant cover of `ℤ_m` by translates of the arc of radius `k`.
///
/// Requires `m ≥ 3` and `1 ≤ k ≤ ⌊(m-1)/2⌋ - 1`, so arcs are proper and
/// pairwise distinct.
pub fn left_invariant_cover(m: usize, k: usize) -> Result<CoverModel, ModelError> {
    if m < 3 || k == 0 || k + 1 > (m - 1) / 2 {
        return Err(ModelError::InvalidRadius { m, k });
    }
    arc_cover(m, k)
}

/// Whether `V⁻¹V ⊆ U` for the arcs `V`, `U` of radii `k_v`, `k_u` in `ℤ_m`.
pub fn shrink_relation_check(m: usize, k_v: usize, k_u: usize) -> bool {
    if m == 0 {
        return false;
    }
    let u: BTreeSet<usize> = arc(m, 0, k_u).into_iter().collect();
    let v = arc(m, 0, k_v);
    v.iter()
        .all(|&a| v.iter().all(|&b| u.contains(&((a + m - b) % m))))
}

#[cfg(test)]
mod tests {
    use super::*;

    use crate::fixtures::{hexagon, interval};

    fn brute_force(model: &CoverModel, n: usize) -> Vec<Tuple> {
        let size = model.num_points();
        let mut out = Vec::new();
        let total = size.pow(n as u32 + 1);
        for code in 0..total {
            let mut t = vec![0; n + 1];
            let mut c = code;
            for slot in t.iter_mut().rev() {
                *slot = c % size;
                c /= size;
            }
            if (0..model.cover_len()).any(|i| t.iter().all(|x| model.members(i).contains(x))) {
                out.push(t);
            }
        }
        out
    }

    #[test]
    fn diagonal_neighborhood_examples() {
        let m = interval();
        assert_eq!(
            m.diagonal_neighborhood(0).unwrap().tuples(),
            &[vec![0], vec![1], vec![2]]
        );
        let n1 = m.diagonal_neighborhood(1).unwrap();
        assert_eq!(n1.len(), 7);
        assert_eq!(n1.tuples(), brute_force(&m, 1).as_slice());

        let single = CoverModel::new(
            vec![0.into(), 1.into(), 2.into()],
            vec![("X".into(), vec![0, 1, 2])],
            None,
        )
        .unwrap();
        assert_eq!(single.diagonal_neighborhood(2).unwrap().len(), 27);
    }

    #[test]
    fn budget_is_enforced() {
        let m = hexagon().with_budget(100);
        assert!(m.diagonal_neighborhood(1).is_ok());
        match m.diagonal_neighborhood(2) {
            Err(ModelError::BudgetExceeded { size, budget }) => {
                assert_eq!(size, "216");
                assert_eq!(budget, 100);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn intersections() {
        let m = interval();
        assert_eq!(m.intersection(&[0, 1]).unwrap(), vec![1]);
        assert_eq!(m.intersection(&[1]).unwrap(), vec![1, 2]);
        assert!(hexagon().intersection(&[0, 1, 2]).unwrap().is_empty());
        assert!(matches!(
            m.intersection(&[0, 2]),
            Err(ModelError::IndexOutOfRange { index: 2, .. })
        ));
        assert!(matches!(
            m.intersection(&[1, 0]),
            Err(ModelError::NotIncreasing(_))
        ));
    }

    #[test]
    fn nerves() {
        assert_eq!(
            interval().nerve().simplices(),
            &[vec![0], vec![1], vec![0, 1]]
        );
        let h = hexagon().nerve();
        assert_eq!(h.count(0), 3);
        assert_eq!(h.count(1), 3);
        assert_eq!(h.count(2), 0);
        let single = CoverModel::new(vec![0.into()], vec![("X".into(), vec![0])], None).unwrap();
        assert_eq!(single.nerve().simplices(), &[vec![0]]);
    }

    #[test]
    fn small_subcomplex() {
        let h = hexagon();
        assert_eq!(h.u_small_subcomplex().unwrap().len(), 12);
        // Chord {0,3} lies in no arc.
        let mut cx = h.complex().unwrap().to_vec();
        cx.push(vec![0, 3]);
        let m = CoverModel::new(
            h.points().to_vec(),
            h.cover()
                .iter()
                .map(|c| (c.name.clone(), c.members().to_vec()))
                .collect(),
            Some(cx),
        )
        .unwrap();
        let small = m.u_small_subcomplex().unwrap();
        assert!(!small.contains(&vec![0, 3]));
        assert_eq!(small.len(), 12);
        let bare = CoverModel::new(vec![0.into()], vec![("X".into(), vec![0])], None).unwrap();
        assert_eq!(bare.u_small_subcomplex(), Err(ModelError::MissingComplex));
    }

    #[test]
    fn left_invariant_covers() {
        let m = left_invariant_cover(12, 1).unwrap();
        assert_eq!(m.cover_len(), 12);
        assert!(m.cover().iter().all(|c| c.members().len() == 3));
        assert_eq!(
            m.complex().unwrap().iter().filter(|s| s.len() == 2).count(),
            12
        );
        assert!(left_invariant_cover(12, 5).is_err());
        assert!(left_invariant_cover(12, 4).is_ok());
        assert!(left_invariant_cover(12, 0).is_err());

        // ℤ_6 with radius 1: consecutive and distance-two arcs meet, and
        // the triples {g, g+1, g+2} share the middle point.
        let n = left_invariant_cover(6, 1).unwrap().nerve();
        assert_eq!(n.count(0), 6);
        assert_eq!(n.count(1), 12);
        assert_eq!(n.count(2), 6);
        assert_eq!(n.count(3), 0);
    }

    #[test]
    fn shrink_relation() {
        assert!(shrink_relation_check(12, 1, 3));
        assert!(!shrink_relation_check(12, 2, 3));
        assert!(shrink_relation_check(12, 0, 0));
        assert!(shrink_relation_check(12, 0, 5));
        assert!(shrink_relation_check(12, 2, 4));
    }

    #[test]
    fn model_file_round_trip() {
        let json = r#"{"points":["a","b",3],"cover":[{"name":"A","members":["a","b"]},{"name":"B","members":["b",3]}],"complex":[["a","b"],["b",3]]}"#;
        let m = CoverModel::from_json_str(json).unwrap();
        assert_eq!(m.num_points(), 3);
        assert_eq!(m.members(1), &[1, 2]);
        assert_eq!(m.complex().unwrap().len(), 5);
        let again = CoverModel::from_file(&m.to_file()).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn rejects_invalid_models() {
        let bad = r#"{"points":[0,1],"cover":[{"name":"A","members":[0]}]}"#;
        assert!(matches!(
            CoverModel::from_json_str(bad),
            Err(ModelError::Uncovered(_))
        ));
        let bad = r#"{"points":[0,0],"cover":[{"name":"A","members":[0]}]}"#;
        assert!(matches!(
            CoverModel::from_json_str(bad),
            Err(ModelError::DuplicatePoint(_))
        ));
        let bad = r#"{"points":[0,1],"cover":[{"name":"A","members":[0,1,2]}]}"#;
        assert!(matches!(
            CoverModel::from_json_str(bad),
            Err(ModelError::UnknownPoint(_))
        ));
        let bad =
            r#"{"points":[0,1],"cover":[{"name":"A","members":[0,1]}],"complex":[[0,1],[1,0]]}"#;
        assert!(matches!(
            CoverModel::from_json_str(bad),
            Err(ModelError::DuplicateSimplex(_))
        ));
        let bad = r#"{"points":[0,1],"cover":[{"name":"A","members":[0,1]}],"complex":[[0,0]]}"#;
        assert!(matches!(
            CoverModel::from_json_str(bad),
            Err(ModelError::DegenerateSimplex(_))
        ));
        assert!(matches!(
            CoverModel::from_json_str("{"),
            Err(ModelError::Parse(_))
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        pub(super) fn small_model() -> impl Strategy<Value = CoverModel> {
            (1usize..=6, 1usize..=4).prop_flat_map(|(n, k)| {
                (
                    Just(n),
                    proptest::collection::vec(proptest::collection::vec(any::<bool>(), n), k),
                    proptest::collection::vec(0..k, n),
                )
                    .prop_map(|(n, flags, home)| {
                        let cover = flags
                            .iter()
                            .enumerate()
                            .map(|(i, f)| {
                                let members = (0..n).filter(|&x| f[x] || home[x] == i).collect();
                                (format!("U{i}"), members)
                            })
                            .collect();
                        CoverModel::new((0..n as i64).map(PointLabel::Int).collect(), cover, None)
                            .unwrap()
                    })
            })
        }

        proptest! {
            #[test]
            fn neighborhood_matches_brute_force(m in small_model(), n in 0usize..=2) {
                let fast = m.diagonal_neighborhood(n).unwrap();
                let expected = brute_force(&m, n);
                prop_assert_eq!(fast.tuples(), expected.as_slice());
            }

            #[test]
            fn nerve_is_face_closed_and_exact(m in small_model()) {
                let nerve = m.nerve();
                let simplices = nerve.simplices().to_vec();
                prop_assert_eq!(face_closure(&simplices), simplices.clone());
                for mask in 1u32..(1 << m.cover_len()) {
                    let idx: Vec<usize> = (0..m.cover_len()).filter(|i| mask >> i & 1 == 1).collect();
                    let nonempty = !m.intersection(&idx).unwrap().is_empty();
                    prop_assert_eq!(nerve.contains(&idx), nonempty);
                }
            }

            #[test]
            fn splitting_a_set_never_adds_simplices(m in small_model(), which in 0usize..4) {
                let i = which % m.cover_len();
                let members = m.members(i).to_vec();
                if members.len() >= 2 {
                    let half = members.len() / 2;
                    let mut cover: Vec<(String, Vec<usize>)> = m.cover().iter().map(|c| (c.name.clone(), c.members().to_vec())).collect();
                    cover[i].1 = members[..half].to_vec();
                    cover.push(("split".into(), members[half..].to_vec()));
                    let refined = m.with_cover(cover).unwrap();
                    let old = m.nerve();
                    for s in refined.nerve().simplices() {
                        if s.iter().all(|&j| j < m.cover_len()) {
                            prop_assert!(old.contains(s));
                        }
                    }
                }
            }

            #[test]
            fn left_invariant_cover_is_rotation_invariant(m in 6usize..=14, k in 1usize..=5) {
                if let Ok(model) = left_invariant_cover(m, k) {
                    let sets: BTreeSet<Vec<usize>> = model.cover().iter().map(|c| c.members().to_vec()).collect();
                    let rotated: BTreeSet<Vec<usize>> = sets.iter().map(|s| {
                        let mut r: Vec<usize> = s.iter().map(|x| (x + 1) % m).collect();
                        r.sort();
                        r
                    }).collect();
                    prop_assert_eq!(sets, rotated);
                }
            }
        }
    }
}
