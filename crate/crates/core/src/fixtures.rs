//! Small reference models used across tests and bundled with the CLI.

use rand::{Rng, RngCore};

use crate::model::{arc_cover, left_invariant_cover, CoverModel, PointLabel, Tuple};

fn labels(n: usize) -> Vec<PointLabel> {
    (0..n as i64).map(PointLabel::Int).collect()
}

fn cycle_edges(m: usize) -> Vec<Tuple> {
    (0..m)
        .map(|g| {
            let mut e = vec![g, (g + 1) % m];
            e.sort_unstable();
            e
        })
        .collect()
}

/// `X = {0,1,2}`, `U0 = {0,1}`, `U1 = {1,2}`, complex the path 0–1–2.
pub fn interval() -> CoverModel {
    CoverModel::new(
        labels(3),
        vec![("U0".into(), vec![0, 1]), ("U1".into(), vec![1, 2])],
        Some(vec![vec![0, 1], vec![1, 2]]),
    )
    .expect("valid interval model")
}

/// Six points on a circle covered by three arcs, with the 6-cycle complex.
pub fn hexagon() -> CoverModel {
    CoverModel::new(
        labels(6),
        vec![
            ("U0".into(), vec![0, 1, 2]),
            ("U1".into(), vec![2, 3, 4]),
            ("U2".into(), vec![4, 5, 0]),
        ],
        Some(cycle_edges(6)),
    )
    .expect("valid hexagon model")
}

/// The hexagon with a single cover set; its cover set is not acyclic.
pub fn hexagon_single_set() -> CoverModel {
    CoverModel::new(
        labels(6),
        vec![("X".into(), (0..6).collect())],
        Some(cycle_edges(6)),
    )
    .expect("valid model")
}

/// The full 2-simplex on three vertices.
pub fn solid_triangle() -> CoverModel {
    CoverModel::new(
        labels(3),
        vec![("U0".into(), vec![0, 1, 2]), ("U1".into(), vec![1, 2])],
        Some(vec![vec![0, 1, 2]]),
    )
    .expect("valid triangle model")
}

/// Triangles of the 6-vertex minimal triangulation of the projective plane.
pub const PROJECTIVE_PLANE_TRIANGLES: [[usize; 3]; 10] = [
    [0, 1, 2],
    [0, 2, 3],
    [0, 3, 4],
    [0, 4, 5],
    [0, 1, 5],
    [1, 2, 4],
    [2, 3, 5],
    [1, 3, 4],
    [2, 4, 5],
    [1, 3, 5],
];

/// The 6-vertex projective plane, covered by the vertex sets of its
/// triangles.
pub fn projective_plane() -> CoverModel {
    let triangles: Vec<Tuple> = PROJECTIVE_PLANE_TRIANGLES
        .iter()
        .map(|t| t.to_vec())
        .collect();
    let cover = triangles
        .iter()
        .enumerate()
        .map(|(i, t)| (format!("T{i}"), t.clone()))
        .collect();
    CoverModel::new(labels(6), cover, Some(triangles)).expect("valid projective plane")
}

/// Two isolated points, each its own cover set.
pub fn two_points() -> CoverModel {
    CoverModel::new(
        labels(2),
        vec![("A".into(), vec![0]), ("B".into(), vec![1])],
        Some(vec![vec![0], vec![1]]),
    )
    .expect("valid model")
}

/// A single point.
pub fn point() -> CoverModel {
    CoverModel::new(labels(1), vec![("X".into(), vec![0])], Some(vec![vec![0]]))
        .expect("valid model")
}

/// `ℤ_m` covered by translates of the radius-`k` arc.
pub fn cyclic(m: usize, k: usize) -> CoverModel {
    left_invariant_cover(m, k).expect("valid radius")
}

/// `ℤ_m` with arcs of any radius (including 0), for shrunken covers.
pub fn cyclic_any(m: usize, k: usize) -> CoverModel {
    arc_cover(m, k).expect("valid group order")
}

/// A random model with at most `max_points` points and `max_sets` cover
/// sets; every point lies in at least one set. No complex is attached.
pub fn random_cover_model(rng: &mut dyn RngCore, max_points: usize, max_sets: usize) -> CoverModel {
    let n = rng.gen_range(1..=max_points.max(1));
    let sets = rng.gen_range(1..=max_sets.max(1));
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); sets];
    for x in 0..n {
        let mut placed = false;
        for set in members.iter_mut() {
            if rng.gen_bool(0.45) {
                set.push(x);
                placed = true;
            }
        }
        if !placed {
            members[rng.gen_range(0..sets)].push(x);
        }
    }
    // Empty sets are replaced by a random singleton.
    for set in members.iter_mut().filter(|s| s.is_empty()) {
        set.push(rng.gen_range(0..n));
    }
    let cover = members
        .into_iter()
        .enumerate()
        .map(|(i, m)| (format!("U{i}"), m))
        .collect();
    CoverModel::new(labels(n), cover, None).expect("valid random model")
}
