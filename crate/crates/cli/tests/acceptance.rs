//! Acceptance suite: one pass/fail line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the summary lines are
//! always printed; exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::Parser;
use locco::bicomplex::{
    check_approximate_identity, check_restricted_identity, check_row_identity, cohomology_of_cech,
    cohomology_of_local, cohomology_of_total, first_hit_family, random_integer_family,
    random_real_family, random_unity_family, row_contraction, sigma_row_contraction,
};
use locco::compare::{colimit_scan, verify_lambda_iso};
use locco::complexes::{
    check_column_contraction, power_tuples, CechPage, SimplicialComplex, SparseFunction,
};
use locco::fixtures::random_cover_model;
use locco::homology::cohomology_profile;
use locco::loopfill::{
    check_additivity, check_diagonal_constancy, check_face_compatibility, check_linear_oracle,
    check_vertex_property, LoopContraction, SimplexFiller,
};
use locco::pou::{
    arc_family, ball_family, evenly_spaced_centres, plateau_family, product_family,
    rescue_from_partition, sample_neighborhood, SampledDomain, DEFAULT_RESCUE_LAYERS,
};
use locco::{CoefficientSystem, Coefficients, CoverModel, Rationals, RealVectors};
use locco_cli::catalog::load_model;
use locco_cli::{render, run, RunConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn bundled(name: &str) -> CoverModel {
    load_model(&format!("bundled:{name}"))
        .expect("bundled model loads")
        .model
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || {
        format!("took {elapsed:.2?}, budget {limit:?}")
    })
}

/// Local, total and Čech profiles agree through degree 2 over ℚ and ℤ_5.
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut models: Vec<(String, CoverModel)> = (0..20u64)
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (format!("random-{seed}"), random_cover_model(&mut rng, 8, 4))
        })
        .collect();
    for name in ["interval", "hexagon", "z6-k1", "z12-k1", "z12-k2"] {
        models.push((name.to_string(), bundled(name)));
    }
    for (name, m) in &models {
        for system in [
            CoefficientSystem::Rationals,
            CoefficientSystem::PrimeField(5),
        ] {
            let local = cohomology_of_local(m, system, 2).map_err(|e| format!("{name}: {e}"))?;
            let total = cohomology_of_total(m, system, 2).map_err(|e| format!("{name}: {e}"))?;
            let cech = cohomology_of_cech(m, system, 2).map_err(|e| format!("{name}: {e}"))?;
            ensure(local == total && total == cech, || {
                format!(
                    "{name} {system}: local {:?}, total {:?}, cech {:?}",
                    local.ranks(),
                    total.ranks(),
                    cech.ranks()
                )
            })?;
        }
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!(
        "{} models, Q and Z5, degrees <= 2, {:.2?}",
        models.len(),
        start.elapsed()
    ))
}

const CONTRACTION_MODELS: [&str; 7] = [
    "interval",
    "hexagon",
    "hexagon-single-set",
    "z6-k1",
    "z12-k1",
    "solid-triangle",
    "projective-plane",
];

/// Exact row identities for first-hit and random unity families, and the
/// column identity on every `U_I`.
fn criterion_2() -> Outcome {
    let q_ = &Rationals;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut checked = 0usize;
    for name in CONTRACTION_MODELS {
        let m = bundled(name);
        for q in 0..=2 {
            let mut families = vec![first_hit_family(q_, &m, q).map_err(|e| e.to_string())?];
            for _ in 0..10 {
                families.push(random_unity_family(q_, &m, q, &mut rng).map_err(|e| e.to_string())?);
            }
            for p in 1..=2 {
                for (k, fam) in families.iter().enumerate() {
                    let page =
                        CechPage::random(q_, &m, p, q, 0.5, &mut rng).map_err(|e| e.to_string())?;
                    let bad =
                        check_row_identity(q_, &m, &page, fam, 0.0).map_err(|e| e.to_string())?;
                    ensure(bad.is_none(), || {
                        format!("{name} ({p},{q}) family {k}: {bad:?}")
                    })?;
                    checked += 1;
                }
            }
        }
        for indices in m.nerve().simplices() {
            let members = m.intersection(indices).map_err(|e| e.to_string())?;
            for degree in 0..=2 {
                let mut g = SparseFunction::new();
                for x in power_tuples(&members, degree + 1) {
                    if rng.gen_bool(0.6) {
                        g.insert(x, q_.random_value(&mut rng));
                    }
                }
                let bad = check_column_contraction(q_, &members, &g, degree)
                    .map_err(|e| e.to_string())?;
                ensure(bad.is_none(), || {
                    format!("{name} column U_{indices:?} degree {degree}: {bad:?}")
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!(
        "{checked} exact identity checks on {} models",
        CONTRACTION_MODELS.len()
    ))
}

/// `δh + hδ = (Σφ)·F` for integer families, and the restricted identity for
/// plateau families on `ℤ_12`.
fn criterion_3() -> Outcome {
    let q_ = &Rationals;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0usize;
    for name in CONTRACTION_MODELS {
        let m = bundled(name);
        for q in 0..=2 {
            for _ in 0..3 {
                let fam = random_integer_family(q_, &m, q, &mut rng).map_err(|e| e.to_string())?;
                for p in 0..=2 {
                    let page =
                        CechPage::random(q_, &m, p, q, 0.5, &mut rng).map_err(|e| e.to_string())?;
                    let bad = check_approximate_identity(q_, &m, &page, &fam, 0.0)
                        .map_err(|e| e.to_string())?;
                    ensure(bad.is_none(), || format!("{name} ({p},{q}): {bad:?}"))?;
                    checked += 1;
                }
            }
        }
    }
    let mut restricted = 0usize;
    for q in 0..=2 {
        let pf = plateau_family(q_, 12, 3, 1, q).map_err(|e| e.to_string())?;
        let domain: BTreeSet<_> = pf.v_domain().map_err(|e| e.to_string())?;
        for p in 1..=2 {
            for _ in 0..3 {
                let page = CechPage::random(q_, &pf.u_model, p, q, 0.3, &mut rng)
                    .map_err(|e| e.to_string())?;
                let bad =
                    check_restricted_identity(q_, &pf.u_model, &page, &pf.family, &domain, 0.0)
                        .map_err(|e| e.to_string())?;
                ensure(bad.is_none(), || format!("plateau ({p},{q}): {bad:?}"))?;
                restricted += 1;
            }
        }
    }
    Ok(format!("{checked} integer-family checks, {restricted} restricted plateau checks on Z12 (kU=3, kV=1)"))
}

/// Hexagon profiles in four complexes, λ* certified, ℤ/2 torsion for ℝP².
fn criterion_4() -> Outcome {
    let start = Instant::now();
    let q = CoefficientSystem::Rationals;
    let h = bundled("hexagon");
    let u_small = SimplicialComplex::u_small(&h).map_err(|e| e.to_string())?;
    let profiles = [
        (
            "local",
            cohomology_of_local(&h, q, 1).map_err(|e| e.to_string())?,
        ),
        (
            "cech",
            cohomology_of_cech(&h, q, 1).map_err(|e| e.to_string())?,
        ),
        (
            "total",
            cohomology_of_total(&h, q, 1).map_err(|e| e.to_string())?,
        ),
        (
            "u-small",
            cohomology_profile(q, &u_small, 1).map_err(|e| e.to_string())?,
        ),
    ];
    for (name, p) in &profiles {
        ensure(p.ranks() == vec![1, 1], || {
            format!("hexagon {name}: {:?}", p.ranks())
        })?;
    }
    let lambda = verify_lambda_iso(&h, q, 1).map_err(|e| e.to_string())?;
    ensure(
        lambda.passed() && lambda.induced_ranks == Some(vec![1, 1]),
        || format!("lambda: {:?}", lambda.to_json()),
    )?;
    let rp2 = bundled("projective-plane");
    let complex = SimplicialComplex::of_model(&rp2).map_err(|e| e.to_string())?;
    let z =
        cohomology_profile(CoefficientSystem::Integers, &complex, 2).map_err(|e| e.to_string())?;
    let h2_torsion: Vec<String> = z.torsion(2).iter().map(|t| t.to_string()).collect();
    ensure(
        z.ranks() == vec![1, 0, 0] && h2_torsion == ["2"] && z.torsion(1).is_empty(),
        || format!("RP2 over Z: {:?}", z.to_json()),
    )?;
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!(
        "hexagon (1,1) in local/cech/total/u-small, lambda ranks [1,1], RP2 H2 = Z/2, {:.2?}",
        start.elapsed()
    ))
}

/// The simplex-filler battery and the σ-based row contraction.
fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut reports = 0;
    for d in 1..=3 {
        for name in ["linear", "quadratic", "rotating", "scaling"] {
            let filler =
                SimplexFiller::new(LoopContraction::by_name(name, d).map_err(|e| e.to_string())?);
            let mut batch = vec![
                check_vertex_property(&filler, 4, 500, 1e-12, &mut rng),
                check_face_compatibility(&filler, 3, 500, 1e-12, &mut rng),
                check_additivity(&filler, 4, 500, 1e-12, &mut rng),
                check_diagonal_constancy(&filler, 4, 500, 1e-12, &mut rng),
            ];
            if name == "linear" || name == "scaling" {
                batch.push(check_linear_oracle(&filler, 4, 500, 1e-12, &mut rng));
            }
            for r in batch {
                let r = r.map_err(|e| e.to_string())?;
                ensure(r.passed, || {
                    format!("{name} d={d} {}: {:e}", r.check, r.max_deviation)
                })?;
                worst = worst.max(r.max_deviation);
                reports += 1;
            }
        }
    }
    let h = bundled("hexagon");
    let mut sigma_worst: f64 = 0.0;
    for d in 1..=3 {
        let coeff = RealVectors::new(d).map_err(|e| e.to_string())?;
        let filler = SimplexFiller::new(LoopContraction::linear(d));
        for q in 0..=1 {
            let fam = random_real_family(&h, q, &mut rng).map_err(|e| e.to_string())?;
            for p in 1..=2 {
                let page =
                    CechPage::random(&coeff, &h, p, q, 0.7, &mut rng).map_err(|e| e.to_string())?;
                let s = sigma_row_contraction(&coeff, &h, &page, &fam, &filler)
                    .map_err(|e| e.to_string())?;
                let l = row_contraction(&coeff, &h, &page, &fam).map_err(|e| e.to_string())?;
                for (indices, f) in s.components().iter().chain(l.components()) {
                    for x in f.keys() {
                        let a = s
                            .evaluate_alternating(&coeff, &h, indices, x)
                            .map_err(|e| e.to_string())?;
                        let b = l
                            .evaluate_alternating(&coeff, &h, indices, x)
                            .map_err(|e| e.to_string())?;
                        sigma_worst = sigma_worst.max(locco::coeff::max_norm_distance(&a, &b));
                    }
                }
            }
        }
    }
    ensure(sigma_worst < 1e-9, || {
        format!("sigma vs linear row contraction: {sigma_worst:e}")
    })?;
    Ok(format!(
        "{reports} battery reports, max deviation {worst:.1e}; sigma vs linear contraction {sigma_worst:.1e}"
    ))
}

/// Sampled partitions of unity on the 10⁴-sample circle.
fn criterion_6() -> Outcome {
    let domain = SampledDomain::circle(10_000).map_err(|e| e.to_string())?;
    let base = arc_family(&domain, 3).map_err(|e| e.to_string())?;
    let rescue = rescue_from_partition(&base, DEFAULT_RESCUE_LAYERS).map_err(|e| e.to_string())?;
    let psi = &rescue.family;
    let dev = psi.max_sum_deviation();
    ensure(dev <= 1e-9, || format!("rescue sum deviation {dev:e}"))?;
    ensure(psi.uncovered().is_empty(), || {
        format!("{} uncovered samples", psi.uncovered().len())
    })?;
    ensure(psi.support_violations() == 0, || {
        format!("{} support violations", psi.support_violations())
    })?;
    // Every ψ_{i,n} lives inside U_i, and every sample is seen by some U_i.
    for (row, &(i, _)) in rescue.origin.iter().enumerate() {
        for s in 0..domain.len() {
            if psi.value(row, s) != 0.0 {
                ensure(base.in_support(i, s), || {
                    format!("psi_{row} escapes U_{i} at {s}")
                })?;
            }
        }
    }
    let bound = 3 * (DEFAULT_RESCUE_LAYERS + 1);
    ensure(psi.max_active() <= bound, || {
        format!("active count {} > {bound}", psi.max_active())
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let tuples = sample_neighborhood(&base, 1, 20_000, &mut rng);
    let product = product_family(&base, &tuples).map_err(|e| e.to_string())?;
    let pdev = product.max_sum_deviation();
    ensure(pdev <= 1e-9 && product.support_violations() == 0, || {
        format!("product deviation {pdev:e}")
    })?;

    let centres = evenly_spaced_centres(&domain, 256);
    let ball = ball_family(&domain, 0.25, &centres).map_err(|e| e.to_string())?;
    let bdev = ball.max_sum_deviation();
    ensure(bdev <= 1e-9 && ball.support_violations() == 0, || {
        format!("ball deviation {bdev:e}")
    })?;
    Ok(format!(
        "rescue {dev:.1e} (max active {}), product q=1 {pdev:.1e} on 20000 tuples, ball {bdev:.1e}",
        psi.max_active()
    ))
}

/// Radius scan on `ℤ_12`.
fn criterion_7() -> Outcome {
    let scan =
        colimit_scan(12, &[1, 2], CoefficientSystem::Rationals, 1).map_err(|e| e.to_string())?;
    for (k, r) in &scan.reports {
        ensure(r.profiles["total"].ranks() == vec![1, 1], || {
            format!("k={k}: {:?}", r.profiles["total"].ranks())
        })?;
        ensure(r.profiles["simplicial"].ranks() == vec![1, 1], || {
            format!("12-cycle: {:?}", r.profiles["simplicial"])
        })?;
    }
    ensure(scan.passed(), || "scan did not stabilize".to_string())?;
    Ok("Z12, k in {1,2}: total (1,1) = 12-cycle (1,1), stabilized".to_string())
}

/// Identical configuration and seed give identical report bytes.
fn criterion_8() -> Outcome {
    let configs: [&[&str]; 6] = [
        &[
            "locco",
            "compare",
            "bundled:hexagon",
            "--lambda",
            "--seed",
            "11",
        ],
        &[
            "locco",
            "verify-contraction",
            "bundled:z6-k1",
            "--family",
            "random:4",
            "--seed",
            "3",
        ],
        &[
            "locco",
            "verify-contraction",
            "bundled:interval",
            "--family",
            "integer:2",
            "--coeff",
            "Rd:2",
        ],
        &[
            "locco",
            "sigma-check",
            "--carrier",
            "Rd:3",
            "--contraction",
            "rotating",
            "--seed",
            "8",
        ],
        &[
            "locco",
            "pou-check",
            "--construction",
            "product:q=1",
            "--tuples",
            "5000",
            "--seed",
            "5",
        ],
        &[
            "locco",
            "cohomology",
            "bundled:projective-plane",
            "--coeff",
            "Z",
            "--complex",
            "total",
        ],
    ];
    for args in configs {
        let config = RunConfig::try_parse_from(args).map_err(|e| e.to_string())?;
        let a = render(&run(&config).map_err(|e| e.to_string())?.report);
        let b = render(&run(&config).map_err(|e| e.to_string())?.report);
        ensure(a == b, || format!("reports differ for {args:?}"))?;
    }
    Ok(format!(
        "{} configurations reproduced byte for byte",
        configs.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("local, total and Cech profiles agree", criterion_1),
        ("exact contraction identities", criterion_2),
        ("approximate and restricted contractions", criterion_3),
        ("good-cover comparisons", criterion_4),
        ("simplex-filler battery", criterion_5),
        ("partition-of-unity constructions", criterion_6),
        ("radius scan on Z12", criterion_7),
        ("deterministic reports", criterion_8),
    ];
    let mut failed = 0;
    for (n, (title, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {title}: {detail} [{secs:.2}s]", n + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {title}: {why} [{secs:.2}s]", n + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
