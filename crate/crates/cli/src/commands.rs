//! The subcommands.

use std::collections::BTreeMap;
use std::io::Read;

use anyhow::{anyhow, bail, ensure, Context, Result};
use locco::bicomplex::{
    cech_complex, check_approximate_identity, check_row_identity, first_hit_family,
    random_integer_family, random_unity_family, DoubleComplex, PartitionFamily, TotalComplex,
};
use locco::compare::{colimit_scan, verify_lambda_iso, verify_local_vs_cech};
use locco::complexes::{
    check_column_contraction, power_tuples, CechPage, LocalComplex, SimplicialComplex,
    SparseFunction,
};
use locco::homology::cohomology_profile;
use locco::loopfill::{
    check_additivity, check_diagonal_constancy, check_face_compatibility, check_linear_oracle,
    check_loop_condition, check_vertex_property, FillReport, LoopCarrier, LoopContraction,
    PathGroup, SimplexFiller,
};
use locco::model::PointLabel;
use locco::pou::{
    arc_family, ball_family, evenly_spaced_centres, layered_family, product_family,
    rescue_from_partition, sample_neighborhood, PouReport, SampledDomain,
};
use locco::{
    CoefficientSystem, Coefficients, CoverModel, Integers, PrimeField, Rationals, RealVectors,
    Tuple,
};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value as Json};

use crate::catalog::{self, DomainFile};
use crate::{
    CohomologyArgs, Command, CompareArgs, ComplexKind, ContractionArgs, ExamplesArgs, PouArgs,
    RunConfig, SigmaCheckArgs, SigmaEvalArgs,
};

/// What a command contributes to the report.
#[derive(Debug, Clone, Default)]
pub struct CommandOutput {
    pub model: Option<Json>,
    pub checks: Vec<Json>,
    pub result: Json,
    pub warnings: Vec<String>,
    pub passed: bool,
}

impl CommandOutput {
    fn finish(mut self) -> Self {
        self.passed = self
            .checks
            .iter()
            .all(|c| c["passed"].as_bool() == Some(true));
        self
    }
}

fn check(name: &str, passed: bool, detail: Json) -> Json {
    json!({"name": name, "passed": passed, "detail": detail})
}

pub fn dispatch(config: &RunConfig) -> Result<CommandOutput> {
    match &config.command {
        Command::Cohomology(a) => cohomology(a),
        Command::Compare(a) => compare(a, config.seed),
        Command::VerifyContraction(a) => verify_contraction(a, config.seed),
        Command::SigmaCheck(a) => sigma_check(a, config.seed),
        Command::SigmaEval(a) => sigma_eval(a),
        Command::PouCheck(a) => pou_check(a, config.seed),
        Command::Examples(a) => examples(a),
    }
}

fn parse_system(s: &str) -> Result<(CoefficientSystem, Vec<String>)> {
    let system: CoefficientSystem = s.parse().map_err(|e| anyhow!("{e}"))?;
    let mut warnings = Vec::new();
    if system == CoefficientSystem::PrimeField(2) {
        warnings.push(
            "over Z_2 alternating and skew-symmetric cochains differ; Cech pages here are alternating".to_string(),
        );
    }
    Ok((system, warnings))
}

fn cohomology(a: &CohomologyArgs) -> Result<CommandOutput> {
    let loaded = catalog::load_model(&a.model)?;
    let (system, warnings) = parse_system(&a.coeff)?;
    let m = &loaded.model;
    let profile = match a.complex {
        ComplexKind::Local => cohomology_profile(system, &LocalComplex::new(m), a.max_degree)?,
        ComplexKind::Cech | ComplexKind::Nerve => {
            cohomology_profile(system, &cech_complex(m), a.max_degree)?
        }
        ComplexKind::Total => {
            let dc = DoubleComplex::new(m, a.max_degree);
            cohomology_profile(system, &TotalComplex(&dc), a.max_degree)?
        }
        ComplexKind::Simplicial => {
            cohomology_profile(system, &SimplicialComplex::of_model(m)?, a.max_degree)?
        }
        ComplexKind::USmall => {
            cohomology_profile(system, &SimplicialComplex::u_small(m)?, a.max_degree)?
        }
    };
    Ok(CommandOutput {
        model: Some(loaded.to_json()),
        result: json!({"ranks": profile.ranks(), "profile": profile.to_json()}),
        warnings,
        ..Default::default()
    }
    .finish())
}

/// `m=12,k=1..3` or `m=6,k=1,2`.
fn parse_scan(s: &str) -> Result<(usize, Vec<usize>)> {
    let (m_part, k_part) = s
        .split_once(",k=")
        .ok_or_else(|| anyhow!("scan must look like m=12,k=1..3, got {s:?}"))?;
    let m: usize = m_part
        .strip_prefix("m=")
        .ok_or_else(|| anyhow!("scan must start with m=, got {s:?}"))?
        .parse()
        .context("invalid group order")?;
    let radii = if let Some((lo, hi)) = k_part.split_once("..") {
        let (lo, hi): (usize, usize) = (lo.parse()?, hi.parse()?);
        ensure!(lo <= hi, "empty radius range {k_part}");
        (lo..=hi).collect()
    } else {
        k_part
            .split(',')
            .map(|k| k.trim().parse())
            .collect::<Result<Vec<usize>, _>>()?
    };
    Ok((m, radii))
}

fn compare(a: &CompareArgs, seed: u64) -> Result<CommandOutput> {
    let (system, warnings) = parse_system(&a.coeff)?;
    ensure!(
        a.model.is_some() || a.scan.is_some(),
        "compare needs a model or --scan"
    );
    let mut out = CommandOutput {
        warnings,
        ..Default::default()
    };
    let mut result = serde_json::Map::new();
    if let Some(spec) = &a.model {
        let loaded = catalog::load_model(spec)?;
        let r = verify_local_vs_cech(&loaded.model, system, a.max_degree, seed)?;
        out.checks
            .push(check("local-vs-cech", r.passed(), json!(r.degree_matches)));
        result.insert("local_vs_cech".into(), r.to_json());
        if a.lambda {
            match verify_lambda_iso(&loaded.model, system, a.max_degree) {
                Ok(r) => {
                    out.checks
                        .push(check("lambda-iso", r.passed(), json!(r.induced_ranks)));
                    result.insert("lambda".into(), r.to_json());
                }
                Err(e) => {
                    out.checks
                        .push(check("lambda-iso", false, json!(e.to_string())));
                    result.insert("lambda".into(), json!({"error": e.to_string()}));
                }
            }
        }
        out.model = Some(loaded.to_json());
    }
    if let Some(scan) = &a.scan {
        let (m, radii) = parse_scan(scan)?;
        let s = colimit_scan(m, &radii, system, a.max_degree)?;
        out.checks.push(check(
            "colimit-scan",
            s.passed(),
            json!({"stabilized": s.stabilized}),
        ));
        result.insert("scan".into(), s.to_json());
    }
    out.result = Json::Object(result);
    Ok(out.finish())
}

/// Coefficients whose family weights can be read from JSON.
trait FamilyCoefficients: Coefficients {
    fn parse_weight(&self, j: &Json) -> Result<Self::Scalar>;
}

impl FamilyCoefficients for Rationals {
    fn parse_weight(&self, j: &Json) -> Result<Self::Scalar> {
        Ok(self.value_from_json(j)?)
    }
}

impl FamilyCoefficients for Integers {
    fn parse_weight(&self, j: &Json) -> Result<Self::Scalar> {
        Ok(self.value_from_json(j)?)
    }
}

impl FamilyCoefficients for PrimeField {
    fn parse_weight(&self, j: &Json) -> Result<Self::Scalar> {
        Ok(self.value_from_json(j)?)
    }
}

impl FamilyCoefficients for RealVectors {
    fn parse_weight(&self, j: &Json) -> Result<Self::Scalar> {
        j.as_f64()
            .ok_or_else(|| anyhow!("weight must be a number, got {j}"))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyFile {
    level: usize,
    entries: Vec<FamilyEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyEntry {
    /// Cover index or cover-set name.
    index: Json,
    tuple: Vec<PointLabel>,
    weight: Json,
}

fn load_family<C: FamilyCoefficients>(
    coeff: &C,
    model: &CoverModel,
    path: &str,
) -> Result<PartitionFamily<C::Scalar>> {
    let text = catalog::read_source(path)?;
    let file: FamilyFile =
        serde_json::from_str(&text).with_context(|| format!("invalid family file {path}"))?;
    let mut entries = Vec::with_capacity(file.entries.len());
    for e in &file.entries {
        let index = match &e.index {
            Json::Number(n) => {
                n.as_u64()
                    .ok_or_else(|| anyhow!("invalid cover index {n}"))? as usize
            }
            Json::String(name) => model
                .cover()
                .iter()
                .position(|s| &s.name == name)
                .ok_or_else(|| anyhow!("unknown cover set {name:?}"))?,
            other => bail!("invalid cover index {other}"),
        };
        let tuple: Tuple = e
            .tuple
            .iter()
            .map(|l| {
                model
                    .points()
                    .iter()
                    .position(|p| p == l)
                    .ok_or_else(|| anyhow!("unknown point {l:?}"))
            })
            .collect::<Result<_>>()?;
        entries.push((index, tuple, coeff.parse_weight(&e.weight)?));
    }
    Ok(PartitionFamily::new(coeff, model, file.level, entries)?)
}

enum FamilySpec {
    FirstHit,
    Random(u64),
    Integer(u64),
    File(String),
}

fn parse_family(s: &str) -> Result<FamilySpec> {
    if s == "first-hit" {
        return Ok(FamilySpec::FirstHit);
    }
    if let Some(seed) = s.strip_prefix("random:") {
        return Ok(FamilySpec::Random(
            seed.parse().context("invalid family seed")?,
        ));
    }
    if let Some(seed) = s.strip_prefix("integer:") {
        return Ok(FamilySpec::Integer(
            seed.parse().context("invalid family seed")?,
        ));
    }
    if let Some(path) = s.strip_prefix("file:") {
        return Ok(FamilySpec::File(path.to_string()));
    }
    bail!("unknown family {s:?}; expected first-hit, random:<seed>, integer:<seed> or file:<path>")
}

fn parse_pq(s: &str) -> Result<(usize, usize)> {
    let (p, q) = s
        .split_once(',')
        .ok_or_else(|| anyhow!("--pq must look like 1,1"))?;
    Ok((p.trim().parse()?, q.trim().parse()?))
}

fn verify_contraction(a: &ContractionArgs, seed: u64) -> Result<CommandOutput> {
    let loaded = catalog::load_model(&a.model)?;
    let (system, warnings) = parse_system(&a.coeff)?;
    ensure!(
        (0.0..=1.0).contains(&a.density),
        "density must lie in [0, 1]"
    );
    let family = parse_family(&a.family)?;
    let bidegrees = match &a.pq {
        Some(s) => vec![parse_pq(s)?],
        None => (0..=2).flat_map(|p| (0..=2).map(move |q| (p, q))).collect(),
    };
    let m = &loaded.model;
    let results = match system {
        CoefficientSystem::Rationals => {
            contraction_runs(&Rationals, m, &family, &bidegrees, a, seed)?
        }
        CoefficientSystem::Integers => {
            contraction_runs(&Integers, m, &family, &bidegrees, a, seed)?
        }
        CoefficientSystem::PrimeField(p) => contraction_runs(
            &PrimeField::new(p).map_err(|e| anyhow!("{e}"))?,
            m,
            &family,
            &bidegrees,
            a,
            seed,
        )?,
        CoefficientSystem::RealVectors(d) => contraction_runs(
            &RealVectors::new(d).map_err(|e| anyhow!("{e}"))?,
            m,
            &family,
            &bidegrees,
            a,
            seed,
        )?,
    };
    let mut checks = Vec::new();
    for r in &results {
        let (p, q) = (r["p"].as_u64().unwrap_or(0), r["q"].as_u64().unwrap_or(0));
        checks.push(check(
            &format!("row ({p},{q})"),
            r["row"]["passed"] == json!(true),
            r["row"]["counterexample"].clone(),
        ));
        checks.push(check(
            &format!("column ({p},{q})"),
            r["column"]["passed"] == json!(true),
            r["column"]["counterexample"].clone(),
        ));
    }
    Ok(CommandOutput {
        model: Some(loaded.to_json()),
        checks,
        result: json!({"family": a.family, "bidegrees": results}),
        warnings,
        passed: false,
    }
    .finish())
}

fn contraction_runs<C: FamilyCoefficients>(
    coeff: &C,
    model: &CoverModel,
    family: &FamilySpec,
    bidegrees: &[(usize, usize)],
    a: &ContractionArgs,
    seed: u64,
) -> Result<Vec<Json>> {
    let tol = if coeff.system().is_approximate() {
        1e-9
    } else {
        0.0
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut families: BTreeMap<usize, PartitionFamily<C::Scalar>> = BTreeMap::new();
    let mut out = Vec::new();
    for &(p, q) in bidegrees {
        if let std::collections::btree_map::Entry::Vacant(e) = families.entry(q) {
            let fam = match family {
                FamilySpec::FirstHit => first_hit_family(coeff, model, q)?,
                FamilySpec::Random(s) => {
                    random_unity_family(coeff, model, q, &mut ChaCha8Rng::seed_from_u64(*s))?
                }
                FamilySpec::Integer(s) => {
                    random_integer_family(coeff, model, q, &mut ChaCha8Rng::seed_from_u64(*s))?
                }
                FamilySpec::File(path) => load_family(coeff, model, path)?,
            };
            ensure!(
                fam.level() == q,
                "family level {} does not match bidegree ({p},{q})",
                fam.level()
            );
            e.insert(fam);
        }
        let fam = &families[&q];
        let unity = fam.check_unity(coeff, model, tol).is_ok();
        let mut row_bad = None;
        for _ in 0..a.pages {
            let page = CechPage::random(coeff, model, p, q, a.density, &mut rng)?;
            let bad = if unity {
                check_row_identity(coeff, model, &page, fam, tol)?
            } else {
                check_approximate_identity(coeff, model, &page, fam, tol)?
            };
            if let Some((i, x)) = bad {
                row_bad = Some(json!({"indices": i, "tuple": x}));
                break;
            }
        }
        let column_bad = column_check(coeff, model, p, q, a.pages, a.density, &mut rng)?;
        out.push(json!({
            "p": p,
            "q": q,
            "unity": unity,
            "identity": if unity { "dh+hd=F" } else { "dh+hd=(sum phi)F" },
            "pages": a.pages,
            "row": {"passed": row_bad.is_none(), "counterexample": row_bad},
            "column": {"passed": column_bad.is_none(), "counterexample": column_bad},
        }));
    }
    Ok(out)
}

/// `sd + ds = id` on random degree-`q` functions on every `U_I`, `|I| = p+1`.
fn column_check<C: Coefficients>(
    coeff: &C,
    model: &CoverModel,
    p: usize,
    q: usize,
    pages: usize,
    density: f64,
    rng: &mut dyn RngCore,
) -> Result<Option<Json>> {
    model.check_budget(q + 2)?;
    for indices in model.nerve().of_dimension(p) {
        let members = model.intersection(indices)?;
        for _ in 0..pages {
            let mut g = SparseFunction::new();
            for x in power_tuples(&members, q + 1) {
                if rng.gen_bool(density) {
                    g.insert(x, coeff.random_value(rng));
                }
            }
            if let Some(x) = check_column_contraction(coeff, &members, &g, q)? {
                return Ok(Some(json!({"indices": indices, "tuple": x})));
            }
        }
    }
    Ok(None)
}

fn parse_carrier(s: &str) -> Result<(&str, usize)> {
    let (kind, d) = s
        .split_once(':')
        .ok_or_else(|| anyhow!("carrier must look like Rd:2 or PG:2"))?;
    let d: usize = d.parse().context("invalid carrier dimension")?;
    ensure!(d >= 1, "carrier dimension must be positive");
    ensure!(kind == "Rd" || kind == "PG", "unknown carrier {kind:?}");
    Ok((kind, d))
}

fn battery<L: LoopCarrier>(
    filler: &SimplexFiller<L>,
    n: usize,
    samples: usize,
    tol: f64,
    rng: &mut dyn RngCore,
) -> Result<Vec<FillReport>> {
    Ok(vec![
        check_loop_condition(filler.carrier(), samples, tol, rng),
        check_vertex_property(filler, n, samples, tol, rng)?,
        check_face_compatibility(filler, n.saturating_sub(1), samples, tol, rng)?,
        check_additivity(filler, n, samples, tol, rng)?,
        check_diagonal_constancy(filler, n, samples, tol, rng)?,
    ])
}

fn sigma_check(a: &SigmaCheckArgs, seed: u64) -> Result<CommandOutput> {
    let (kind, d) = parse_carrier(&a.carrier)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reports = if kind == "Rd" {
        let tol = a.tol.unwrap_or(1e-12);
        let phi = LoopContraction::by_name(&a.contraction, d)?;
        let linear = matches!(a.contraction.as_str(), "linear" | "scaling");
        let filler = SimplexFiller::new(phi);
        let mut r = battery(&filler, a.n, a.samples, tol, &mut rng)?;
        if linear {
            r.push(check_linear_oracle(&filler, a.n, a.samples, tol, &mut rng)?);
        }
        r
    } else {
        let tol = a.tol.unwrap_or(1e-9);
        let filler = SimplexFiller::new(PathGroup::new(d, a.path_samples)?);
        battery(&filler, a.n, a.samples, tol, &mut rng)?
    };
    let checks = reports
        .iter()
        .map(|r| {
            check(
                &r.check,
                r.passed,
                json!({"max_deviation": r.max_deviation, "tolerance": r.tolerance}),
            )
        })
        .collect();
    let worst = reports.iter().map(|r| r.max_deviation).fold(0.0, f64::max);
    Ok(CommandOutput {
        checks,
        result: json!({"reports": reports, "max_deviation": worst}),
        ..Default::default()
    }
    .finish())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SigmaInput {
    n: usize,
    vertices: Vec<Vec<f64>>,
    weights: Vec<f64>,
    #[serde(default)]
    contraction: Option<String>,
}

fn sigma_eval(a: &SigmaEvalArgs) -> Result<CommandOutput> {
    let text = if a.input == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        catalog::read_source(&a.input)?
    };
    let input: SigmaInput = serde_json::from_str(&text).context("invalid sigma-eval input")?;
    ensure!(
        input.vertices.len() == input.n + 1,
        "expected {} vertices for n = {}, got {}",
        input.n + 1,
        input.n,
        input.vertices.len()
    );
    let d = input.vertices.first().map_or(0, Vec::len);
    ensure!(d >= 1, "vertices must be nonempty vectors");
    ensure!(
        input.vertices.iter().all(|v| v.len() == d),
        "vertices have different dimensions"
    );
    let name = input.contraction.as_deref().unwrap_or("linear");
    let filler = SimplexFiller::new(LoopContraction::by_name(name, d)?);
    let value = filler.evaluate(&input.vertices, &input.weights)?;
    Ok(CommandOutput {
        checks: vec![check("evaluate", true, Json::Null)],
        result: json!({"n": input.n, "contraction": name, "value": value}),
        ..Default::default()
    }
    .finish())
}

fn parse_param<T: std::str::FromStr>(s: &str, prefix: &str) -> Result<T> {
    s.strip_prefix(prefix)
        .ok_or_else(|| anyhow!("expected {prefix}<value>, got {s:?}"))?
        .parse()
        .map_err(|_| anyhow!("invalid value in {s:?}"))
}

fn pou_check(a: &PouArgs, seed: u64) -> Result<CommandOutput> {
    let (samples, file_arcs) = if let Some(n) = a.domain.strip_prefix("circle:") {
        (n.parse::<usize>().context("invalid sample count")?, None)
    } else {
        let d = DomainFile::parse(&catalog::read_source(&a.domain)?)?;
        (d.samples, Some(d.cover.arcs))
    };
    let arcs = match (&a.cover, file_arcs) {
        (Some(c), _) => parse_param::<usize>(c, "arcs:")?,
        (None, Some(k)) => k,
        (None, None) => bail!("--cover arcs:<k> is required for circle:<n> domains"),
    };
    let domain = SampledDomain::circle(samples)?;
    let base = arc_family(&domain, arcs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = a.construction.as_str();
    let mut extra = Vec::new();
    let (name, family) = if c == "rescue" {
        let r = rescue_from_partition(&base, a.layers)?;
        ("rescue", r.family)
    } else if c.starts_with("layered:") {
        (
            "layered",
            layered_family(&base, parse_param(c, "layered:n=")?)?,
        )
    } else if c.starts_with("product:") {
        let q: usize = parse_param(c, "product:q=")?;
        let tuples = sample_neighborhood(&base, q, a.tuples, &mut rng);
        ("product", product_family(&base, &tuples)?)
    } else if c.starts_with("ball:") {
        let eps: f64 = parse_param(c, "ball:eps=")?;
        let centres = evenly_spaced_centres(&domain, a.centres);
        let worst = domain.check_pseudometric(1000, &mut rng)?;
        extra.push(check(
            "pseudometric",
            worst <= 1e-12,
            json!({"max_violation": worst}),
        ));
        ("ball", ball_family(&domain, eps, &centres)?)
    } else {
        bail!("unknown construction {c:?}");
    };
    let report = PouReport::new(name, &family, a.tol);
    // Layered families are not partitions; only their supports are checked.
    let mut checks = Vec::new();
    if name != "layered" {
        checks.push(check(
            "sum-to-one",
            report.max_sum_deviation <= a.tol,
            json!(report.max_sum_deviation),
        ));
        checks.push(check(
            "covered",
            report.uncovered_samples == 0,
            json!(report.uncovered_samples),
        ));
    }
    checks.push(check(
        "supports",
        report.support_violations == 0,
        json!(report.support_violations),
    ));
    checks.extend(extra);
    Ok(CommandOutput {
        checks,
        result: json!({
            "construction": a.construction,
            "samples": samples,
            "arcs": arcs,
            "max_sum_deviation": report.max_sum_deviation,
            "uncovered_samples": report.uncovered_samples,
            "max_active_count": report.max_active_count,
            "support_violations": report.support_violations,
            "indices": report.indices,
            "family_samples": report.samples,
        }),
        ..Default::default()
    }
    .finish())
}

fn examples(a: &ExamplesArgs) -> Result<CommandOutput> {
    let entries = catalog::list_examples(a.extra_dir.as_deref())?;
    let checks = entries
        .iter()
        .map(|e| {
            check(
                e["name"].as_str().unwrap_or("?"),
                e["valid"] == json!(true),
                e["error"].clone(),
            )
        })
        .collect();
    let exported = match &a.export {
        Some(dir) => Some(catalog::export(dir)?),
        None => None,
    };
    Ok(CommandOutput {
        checks,
        result: json!({"catalog": entries, "exported": exported}),
        ..Default::default()
    }
    .finish())
}
