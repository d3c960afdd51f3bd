//! Comparison harness: local, Čech, total and simplicial cohomology on one
//! model, the map `λ*` to cover-small simplicial cochains, acyclicity of
//! intersections, and radius scans on cyclic group covers.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::bicomplex::{
    check_row_identity, cohomology_of_cech, cohomology_of_local, cohomology_of_total,
    first_hit_family, random_unity_family, BicomplexError,
};
use crate::coeff::{CoefficientSystem, Coefficients, Integers, PrimeField, Rationals, RealVectors};
use crate::complexes::{
    check_column_contraction, power_tuples, CechPage, LocalComplex, SimplicialComplex,
    SparseFunction,
};
use crate::homology::{
    cohomology_profile, cohomology_representatives, matrix_columns, reduce_columns, BoundaryMatrix,
    CochainComplex, CohomologyProfile, Field, HomologyError, SparseVec,
};
use crate::model::{left_invariant_cover, CoverModel, ModelError, Tuple};

/// Density of random pages used for the sampled contraction checks.
const SAMPLE_DENSITY: f64 = 0.5;

/// Random unity families drawn per bidegree in the sampled checks.
const SAMPLED_FAMILIES: usize = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompareError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Bicomplex(#[from] BicomplexError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error("the intersection of {indices:?} is not acyclic (reduced ranks {reduced:?})")]
    NotAcyclic { indices: Tuple, reduced: Vec<usize> },
}

/// Outcome of an acyclicity test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Acyclicity {
    Acyclic,
    /// Reduced Betti numbers of the full subcomplex.
    NotAcyclic(Vec<usize>),
    /// The intersection is empty; the hypothesis holds vacuously.
    EmptyIntersection,
}

impl Acyclicity {
    pub fn holds(&self) -> bool {
        !matches!(self, Self::NotAcyclic(_))
    }
}

/// One named verification with its outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckStatus {
    pub name: String,
    pub passed: bool,
    pub detail: Option<String>,
}

impl CheckStatus {
    fn new(name: impl Into<String>, passed: bool, detail: Option<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }

    fn to_json(&self) -> Json {
        json!({"name": self.name, "passed": self.passed, "detail": self.detail})
    }
}

/// Profiles of several complexes of one instance and whether they agree.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub label: String,
    pub system: CoefficientSystem,
    pub max_degree: usize,
    pub profiles: BTreeMap<String, CohomologyProfile>,
    /// Per degree: all profiles agree there.
    pub degree_matches: Vec<bool>,
    /// Rank of an induced map per degree, where one was computed.
    pub induced_ranks: Option<Vec<usize>>,
    pub checks: Vec<CheckStatus>,
    pub isomorphic: bool,
    pub notes: Vec<String>,
}

impl ComparisonReport {
    fn new(
        label: &str,
        system: CoefficientSystem,
        max_degree: usize,
        profiles: BTreeMap<String, CohomologyProfile>,
    ) -> Self {
        let degree_matches = (0..=max_degree)
            .map(|n| {
                let mut it = profiles.values().map(|p| &p.degrees[n]);
                let first = it.next();
                it.all(|d| Some(d) == first)
            })
            .collect::<Vec<_>>();
        let isomorphic = degree_matches.iter().all(|m| *m);
        Self {
            label: label.to_string(),
            system,
            max_degree,
            profiles,
            degree_matches,
            induced_ranks: None,
            checks: Vec::new(),
            isomorphic,
            notes: Vec::new(),
        }
    }

    /// Profiles agree, the induced map (if any) is bijective and every
    /// check passed.
    pub fn passed(&self) -> bool {
        self.isomorphic && self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> Json {
        let profiles: serde_json::Map<String, Json> = self
            .profiles
            .iter()
            .map(|(k, p)| (k.clone(), p.to_json()))
            .collect();
        json!({
            "label": self.label,
            "coefficients": self.system.to_string(),
            "max_degree": self.max_degree,
            "profiles": profiles,
            "degree_matches": self.degree_matches,
            "induced_ranks": self.induced_ranks,
            "checks": self.checks.iter().map(CheckStatus::to_json).collect::<Vec<_>>(),
            "isomorphic": self.isomorphic,
            "passed": self.passed(),
            "notes": self.notes,
        })
    }
}

/// Compares `H(A*(𝔘))`, `H(Tot)` and `H(Č*(𝔘))` through `max_degree`, and
/// checks the column and row contraction identities on seeded random pages.
pub fn verify_local_vs_cech(
    model: &CoverModel,
    system: CoefficientSystem,
    max_degree: usize,
    seed: u64,
) -> Result<ComparisonReport, CompareError> {
    let mut profiles = BTreeMap::new();
    profiles.insert(
        "local".to_string(),
        cohomology_of_local(model, system, max_degree)?,
    );
    profiles.insert(
        "total".to_string(),
        cohomology_of_total(model, system, max_degree)?,
    );
    profiles.insert(
        "cech".to_string(),
        cohomology_of_cech(model, system, max_degree)?,
    );
    let mut report = ComparisonReport::new("local-vs-cech", system, max_degree, profiles);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    report.checks = match system {
        CoefficientSystem::Rationals => {
            contraction_checks(&Rationals, model, max_degree, &mut rng)?
        }
        CoefficientSystem::Integers => contraction_checks(&Integers, model, max_degree, &mut rng)?,
        CoefficientSystem::PrimeField(p) => {
            let field = PrimeField::new(p).map_err(|_| HomologyError::NonField(system))?;
            contraction_checks(&field, model, max_degree, &mut rng)?
        }
        CoefficientSystem::RealVectors(d) => {
            let coeff = RealVectors::new(d).map_err(|_| HomologyError::NonField(system))?;
            contraction_checks(&coeff, model, max_degree, &mut rng)?
        }
    };
    if matches!(system, CoefficientSystem::PrimeField(2)) {
        report
            .notes
            .push("over Z_2 alternating and skew-symmetric cochains differ; Cech pages use the alternating convention".into());
    }
    Ok(report)
}

/// Column identity `sd + ds = id` on every nonempty `U_I` and row identity
/// `δh + hδ = id` for the first-hit family and random unity families.
fn contraction_checks<C: Coefficients>(
    coeff: &C,
    model: &CoverModel,
    max_degree: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<CheckStatus>, CompareError> {
    let mut checks = Vec::new();
    let tol = if coeff.system().is_approximate() {
        1e-9
    } else {
        0.0
    };

    let mut column_failure = None;
    'column: for indices in model.nerve().simplices() {
        if indices.len() > max_degree + 1 {
            continue;
        }
        let members = model.intersection_unchecked(indices);
        for n in 0..=max_degree {
            model.check_budget(n + 2)?;
            let mut g = SparseFunction::new();
            for x in power_tuples(&members, n + 1) {
                if rand::Rng::gen_bool(rng, SAMPLE_DENSITY) {
                    g.insert(x, coeff.random_value(rng));
                }
            }
            let bad =
                check_column_contraction(coeff, &members, &g, n).map_err(BicomplexError::from)?;
            if let Some(x) = bad {
                column_failure = Some(format!("U_{indices:?}, degree {n}, tuple {x:?}"));
                break 'column;
            }
        }
    }
    checks.push(CheckStatus::new(
        "column-contraction",
        column_failure.is_none(),
        column_failure,
    ));

    let mut row_failure = None;
    'row: for q in 0..=max_degree {
        let mut families = vec![first_hit_family(coeff, model, q)?];
        for _ in 0..SAMPLED_FAMILIES {
            families.push(random_unity_family(coeff, model, q, rng)?);
        }
        for p in 0..=max_degree.saturating_sub(q) {
            for fam in &families {
                let page = CechPage::random(coeff, model, p, q, SAMPLE_DENSITY, rng)
                    .map_err(BicomplexError::from)?;
                if let Some((i, x)) = check_row_identity(coeff, model, &page, fam, tol)? {
                    row_failure = Some(format!("bidegree ({p},{q}), component {i:?}, tuple {x:?}"));
                    break 'row;
                }
            }
        }
    }
    checks.push(CheckStatus::new(
        "row-contraction",
        row_failure.is_none(),
        row_failure,
    ));
    Ok(checks)
}

/// Whether the full subcomplex on `U_{i_0…i_p}` has vanishing reduced
/// cohomology over `system` (ranks only; computed over ℚ for ℤ and `ℝ^d`).
pub fn is_acyclic(
    model: &CoverModel,
    indices: &[usize],
    system: CoefficientSystem,
) -> Result<Acyclicity, CompareError> {
    let members = model.intersection(indices)?;
    if members.is_empty() {
        return Ok(Acyclicity::EmptyIntersection);
    }
    let complex = SimplicialComplex::new(&model.full_subcomplex(&members)?);
    let top = complex.dimension().unwrap_or(0);
    let mut reduced = match system {
        CoefficientSystem::PrimeField(_) => cohomology_profile(system, &complex, top)?.ranks(),
        CoefficientSystem::Integers => {
            let profile = cohomology_profile(system, &complex, top)?;
            if !profile.is_torsion_free() {
                let mut ranks = profile.ranks();
                ranks[0] = ranks[0].saturating_sub(1);
                // Torsion alone already breaks acyclicity over ℤ.
                return Ok(Acyclicity::NotAcyclic(ranks));
            }
            profile.ranks()
        }
        _ => cohomology_profile(CoefficientSystem::Rationals, &complex, top)?.ranks(),
    };
    reduced[0] = reduced[0].saturating_sub(1);
    if reduced.iter().all(|r| *r == 0) {
        Ok(Acyclicity::Acyclic)
    } else {
        Ok(Acyclicity::NotAcyclic(reduced))
    }
}

/// The matrix of `λ*` in degree `n`: tuple basis of `𝔘[n]` to the
/// `n`-simplices of `complex`.
fn lambda_matrix(
    model: &CoverModel,
    complex: &SimplicialComplex,
    n: usize,
) -> Result<BoundaryMatrix, CompareError> {
    let tuples = model.diagonal_neighborhood(n)?;
    let simplices = complex.simplices(n);
    let mut m = BoundaryMatrix::zeros(simplices.len(), tuples.len());
    for (r, s) in simplices.iter().enumerate() {
        let c = tuples.index_of(s).ok_or_else(|| {
            CompareError::Homology(HomologyError::Shape(format!(
                "simplex {s:?} is not cover-small"
            )))
        })?;
        m.add_entry(r, c, 1);
    }
    Ok(m)
}

/// Rank of the map induced by `lam` from `H^n` of the source to `H^n` of
/// the target: `rank[B | λ(reps)] − rank B`, with `B` the target
/// coboundaries.
fn induced_rank<F: Field>(
    field: &F,
    source_prev: Option<&BoundaryMatrix>,
    source_n: &BoundaryMatrix,
    target_prev: Option<&BoundaryMatrix>,
    lam: &BoundaryMatrix,
) -> usize {
    let reps = cohomology_representatives(field, source_prev, source_n);
    let images: Vec<SparseVec<F::E>> = reps
        .iter()
        .map(|r| crate::homology::apply(field, lam, r))
        .collect();
    let boundaries = target_prev
        .map(|m| matrix_columns(field, m))
        .unwrap_or_default();
    let base = reduce_columns(field, boundaries.clone(), false).rank();
    let mut all = boundaries;
    all.extend(images);
    reduce_columns(field, all, false).rank() - base
}

/// Checks that `λ*` from local cochains to cover-small simplicial cochains
/// is a chain map and induces isomorphisms through `max_degree`.
///
/// Requires every nonempty `U_{i_0…i_p}` to be acyclic. Induced ranks are
/// computed over the field of `system`, or over ℚ for ℤ and `ℝ^d`.
pub fn verify_lambda_iso(
    model: &CoverModel,
    system: CoefficientSystem,
    max_degree: usize,
) -> Result<ComparisonReport, CompareError> {
    for indices in model.nerve().simplices() {
        if let Acyclicity::NotAcyclic(reduced) = is_acyclic(model, indices, system)? {
            return Err(CompareError::NotAcyclic {
                indices: indices.clone(),
                reduced,
            });
        }
    }
    let simplicial = SimplicialComplex::u_small(model)?;
    let local = LocalComplex::new(model);

    let mut profiles = BTreeMap::new();
    profiles.insert(
        "local".to_string(),
        cohomology_profile(system, &local, max_degree)?,
    );
    profiles.insert(
        "simplicial".to_string(),
        cohomology_profile(system, &simplicial, max_degree)?,
    );
    let mut report = ComparisonReport::new("lambda", system, max_degree, profiles);
    report
        .notes
        .push("singular cochains are replaced by ordered cochains on the cover-small subcomplex of the model".into());

    // Chain map: Λ_{n+1} · d_local = d_simp · Λ_n, exactly over ℤ.
    let mut lambdas = Vec::with_capacity(max_degree + 2);
    for n in 0..=max_degree + 1 {
        lambdas.push(lambda_matrix(model, &simplicial, n)?);
    }
    let mut local_d = Vec::with_capacity(max_degree + 1);
    let mut simp_d = Vec::with_capacity(max_degree + 1);
    let mut chain_failure = None;
    for n in 0..=max_degree {
        let dl = local.differential(n)?;
        let ds = simplicial.differential(n)?;
        if lambdas[n + 1].compose(&dl)? != ds.compose(&lambdas[n])? && chain_failure.is_none() {
            chain_failure = Some(format!("degree {n}"));
        }
        local_d.push(dl);
        simp_d.push(ds);
    }
    report.checks.push(CheckStatus::new(
        "lambda-chain-map",
        chain_failure.is_none(),
        chain_failure,
    ));

    let ranks: Vec<usize> = (0..=max_degree)
        .map(|n| {
            let sp = n.checked_sub(1).map(|k| &local_d[k]);
            let tp = n.checked_sub(1).map(|k| &simp_d[k]);
            match system {
                CoefficientSystem::PrimeField(p) => {
                    let field = PrimeField::new(p).expect("validated prime");
                    induced_rank(&field, sp, &local_d[n], tp, &lambdas[n])
                }
                _ => induced_rank(&Rationals, sp, &local_d[n], tp, &lambdas[n]),
            }
        })
        .collect();
    let scale = match system {
        CoefficientSystem::RealVectors(d) => d,
        _ => 1,
    };
    let ranks: Vec<usize> = ranks.into_iter().map(|r| r * scale).collect();
    let bijective = (0..=max_degree).all(|n| {
        report
            .profiles
            .values()
            .all(|p| p.degrees[n].rank == ranks[n])
    });
    report.isomorphic = report.isomorphic && bijective;
    report.induced_ranks = Some(ranks);
    Ok(report)
}

/// Result of [`colimit_scan`].
#[derive(Debug, Clone, PartialEq)]
pub struct ColimitScan {
    pub m: usize,
    pub reports: Vec<(usize, ComparisonReport)>,
    /// All radii give the same total profile.
    pub stabilized: bool,
}

impl ColimitScan {
    pub fn passed(&self) -> bool {
        self.stabilized && self.reports.iter().all(|(_, r)| r.passed())
    }

    pub fn to_json(&self) -> Json {
        json!({
            "m": self.m,
            "radii": self.reports.iter().map(|(k, r)| json!({"k": k, "report": r.to_json()})).collect::<Vec<_>>(),
            "stabilized": self.stabilized,
            "passed": self.passed(),
        })
    }
}

/// For each radius `k`, the total-complex profile of the left-invariant
/// cover of `ℤ_m` by arcs of radius `k`, compared with the simplicial
/// profile of the `m`-cycle.
pub fn colimit_scan(
    m: usize,
    radii: &[usize],
    system: CoefficientSystem,
    max_degree: usize,
) -> Result<ColimitScan, CompareError> {
    let results: Vec<Result<ComparisonReport, CompareError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = radii
            .iter()
            .map(|&k| {
                scope.spawn(move || {
                    let model = left_invariant_cover(m, k)?;
                    let cycle = SimplicialComplex::of_model(&model)?;
                    let mut profiles = BTreeMap::new();
                    profiles.insert(
                        "total".to_string(),
                        cohomology_of_total(&model, system, max_degree)?,
                    );
                    profiles.insert(
                        "simplicial".to_string(),
                        cohomology_profile(system, &cycle, max_degree)?,
                    );
                    Ok(ComparisonReport::new(
                        &format!("Z{m}, k={k}"),
                        system,
                        max_degree,
                        profiles,
                    ))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scan worker panicked"))
            .collect()
    });
    let mut reports = Vec::with_capacity(radii.len());
    for (&k, r) in radii.iter().zip(results) {
        reports.push((k, r?));
    }
    let stabilized = reports
        .windows(2)
        .all(|w| w[0].1.profiles["total"] == w[1].1.profiles["total"]);
    Ok(ColimitScan {
        m,
        reports,
        stabilized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{hexagon, hexagon_single_set, interval, projective_plane};
    use crate::model::arc_cover;

    fn q() -> CoefficientSystem {
        CoefficientSystem::Rationals
    }

    #[test]
    fn local_vs_cech_examples() {
        let r = verify_local_vs_cech(&interval(), q(), 1, 0).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.profiles.values().all(|p| p.ranks() == vec![1, 0]));
        let r = verify_local_vs_cech(&hexagon(), q(), 1, 0).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.profiles.values().all(|p| p.ranks() == vec![1, 1]));
        let r = verify_local_vs_cech(&arc_cover(6, 1).unwrap(), q(), 1, 0).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.profiles.values().all(|p| p.ranks() == vec![1, 1]));
    }

    #[test]
    fn local_vs_cech_other_coefficients() {
        for system in [
            CoefficientSystem::PrimeField(5),
            CoefficientSystem::Integers,
            CoefficientSystem::RealVectors(2),
        ] {
            let r = verify_local_vs_cech(&hexagon(), system, 2, 3).unwrap();
            assert!(r.passed(), "{system}: {r:?}");
        }
    }

    #[test]
    fn acyclicity_examples() {
        let h = hexagon();
        assert_eq!(is_acyclic(&h, &[0], q()).unwrap(), Acyclicity::Acyclic);
        for indices in h.nerve().of_dimension(1) {
            assert_eq!(is_acyclic(&h, indices, q()).unwrap(), Acyclicity::Acyclic);
        }
        assert_eq!(
            is_acyclic(&h, &[0, 1, 2], q()).unwrap(),
            Acyclicity::EmptyIntersection
        );
        assert_eq!(
            is_acyclic(&hexagon_single_set(), &[0], q()).unwrap(),
            Acyclicity::NotAcyclic(vec![0, 1])
        );
    }

    #[test]
    fn lambda_examples() {
        let r = verify_lambda_iso(&hexagon(), q(), 1).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.induced_ranks, Some(vec![1, 1]));
        let r = verify_lambda_iso(&interval(), q(), 1).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.induced_ranks, Some(vec![1, 0]));
        assert!(matches!(
            verify_lambda_iso(&hexagon_single_set(), q(), 1),
            Err(CompareError::NotAcyclic { .. })
        ));
    }

    #[test]
    fn lambda_over_z5() {
        let r = verify_lambda_iso(&hexagon(), CoefficientSystem::PrimeField(5), 2).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.induced_ranks, Some(vec![1, 1, 0]));
    }

    #[test]
    fn projective_plane_acyclicity_over_z() {
        // The whole triangulation as one set: H² has ℤ/2 torsion.
        let rp2 = projective_plane();
        let whole = rp2
            .with_cover(vec![("X".into(), (0..rp2.num_points()).collect())])
            .unwrap();
        assert!(matches!(
            is_acyclic(&whole, &[0], CoefficientSystem::Integers).unwrap(),
            Acyclicity::NotAcyclic(_)
        ));
        assert_eq!(is_acyclic(&whole, &[0], q()).unwrap(), Acyclicity::Acyclic);
    }

    #[test]
    fn colimit_examples() {
        let scan = colimit_scan(12, &[1, 2], q(), 1).unwrap();
        assert!(scan.passed());
        for (_, r) in &scan.reports {
            assert_eq!(r.profiles["total"].ranks(), vec![1, 1]);
        }
        let scan = colimit_scan(6, &[1], q(), 1).unwrap();
        assert!(scan.passed());
        assert!(matches!(
            colimit_scan(6, &[2], q(), 1),
            Err(CompareError::Model(_))
        ));
    }

    #[test]
    fn report_json_is_stable() {
        let a = verify_local_vs_cech(&hexagon(), q(), 1, 9)
            .unwrap()
            .to_json()
            .to_string();
        let b = verify_local_vs_cech(&hexagon(), q(), 1, 9)
            .unwrap()
            .to_json()
            .to_string();
        assert_eq!(a, b);
    }
}
