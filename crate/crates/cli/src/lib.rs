//! Command-line front end: argument parsing, dispatch to the `locco`
//! pipelines and deterministic JSON reports.

pub mod catalog;
mod commands;

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value as Json};

pub use commands::CommandOutput;

/// Exit status for a run whose verifications failed.
pub const EXIT_FAILED: u8 = 1;
/// Exit status for invalid input or configuration.
pub const EXIT_ERROR: u8 = 2;

#[derive(Debug, Clone, Parser, Serialize)]
#[command(
    name = "locco",
    version,
    about = "Local cochains, Čech double complexes and explicit contractions on finite cover models"
)]
pub struct RunConfig {
    /// Seed for every random draw of the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long, short, global = true)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
    /// Also print a short human-readable summary on standard error.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub table: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Cohomology profile of one complex of a model.
    Cohomology(CohomologyArgs),
    /// Compare local, Čech and total cohomology; optionally λ* and scans.
    Compare(CompareArgs),
    /// Check the row and column contraction identities.
    VerifyContraction(ContractionArgs),
    /// Run the simplex-filler verification battery.
    SigmaCheck(SigmaCheckArgs),
    /// Evaluate the simplex filler on JSON input.
    SigmaEval(SigmaEvalArgs),
    /// Check a sampled partition-of-unity construction.
    PouCheck(PouArgs),
    /// List (and optionally export) the bundled models.
    Examples(ExamplesArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Cohomology(_) => "cohomology",
            Self::Compare(_) => "compare",
            Self::VerifyContraction(_) => "verify-contraction",
            Self::SigmaCheck(_) => "sigma-check",
            Self::SigmaEval(_) => "sigma-eval",
            Self::PouCheck(_) => "pou-check",
            Self::Examples(_) => "examples",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComplexKind {
    /// Local cochains on the diagonal neighbourhoods.
    Local,
    /// Classical Čech cochains of the cover.
    Cech,
    /// Total complex of the Čech double complex.
    Total,
    /// The model's simplicial complex.
    Simplicial,
    /// The cover-small subcomplex of the model's complex.
    USmall,
    /// The nerve of the cover as a simplicial complex.
    Nerve,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CohomologyArgs {
    /// Model file, or `bundled:<name>`.
    pub model: String,
    #[arg(long, value_enum, default_value_t = ComplexKind::Local)]
    pub complex: ComplexKind,
    /// Q, Z, Zp:<p> or Rd:<d>.
    #[arg(long, default_value = "Q")]
    pub coeff: String,
    #[arg(long, default_value_t = 2)]
    pub max_degree: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompareArgs {
    /// Model file, or `bundled:<name>`; optional with `--scan`.
    pub model: Option<String>,
    #[arg(long, default_value = "Q")]
    pub coeff: String,
    #[arg(long, default_value_t = 2)]
    pub max_degree: usize,
    /// Also check that λ* induces isomorphisms.
    #[arg(long)]
    pub lambda: bool,
    /// Radius scan on a cyclic group, e.g. `m=12,k=1..2` or `m=6,k=1`.
    #[arg(long)]
    pub scan: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ContractionArgs {
    /// Model file, or `bundled:<name>`.
    pub model: String,
    /// first-hit, random:<seed>, integer:<seed> or file:<family.json>.
    #[arg(long, default_value = "first-hit")]
    pub family: String,
    #[arg(long, default_value = "Q")]
    pub coeff: String,
    /// Bidegree `p,q`; all bidegrees with `p, q ≤ 2` when absent.
    #[arg(long)]
    pub pq: Option<String>,
    /// Random pages per bidegree.
    #[arg(long, default_value_t = 3)]
    pub pages: usize,
    /// Probability that a page entry is nonzero.
    #[arg(long, default_value_t = 0.5)]
    pub density: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SigmaCheckArgs {
    /// Rd:<d> (vectors) or PG:<d> (sampled paths in ℝ^d).
    #[arg(long, default_value = "Rd:2")]
    pub carrier: String,
    /// linear, quadratic, rotating or scaling (vector carriers).
    #[arg(long, default_value = "linear")]
    pub contraction: String,
    /// Largest simplex dimension.
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    /// Defaults to 1e-12 for vectors and 1e-9 for paths.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Samples per path for PG carriers.
    #[arg(long, default_value_t = locco::loopfill::DEFAULT_PATH_SAMPLES)]
    pub path_samples: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SigmaEvalArgs {
    /// JSON file with {n, vertices, weights[, contraction]}, or `-` for stdin.
    pub input: String,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PouArgs {
    /// circle:<samples> (with `--cover`), a domain file, or `bundled:<name>`.
    #[arg(long, default_value = "bundled:circle-arcs3")]
    pub domain: String,
    /// arcs:<k>; taken from the domain file when absent.
    #[arg(long)]
    pub cover: Option<String>,
    /// rescue, layered:n=<n>, product:q=<q> or ball:eps=<ε>.
    #[arg(long, default_value = "rescue")]
    pub construction: String,
    /// Number of layers for the rescue.
    #[arg(long, default_value_t = locco::pou::DEFAULT_RESCUE_LAYERS)]
    pub layers: usize,
    /// Sampled tuples for product families.
    #[arg(long, default_value_t = 20_000)]
    pub tuples: usize,
    /// Centres for ball families.
    #[arg(long, default_value_t = 256)]
    pub centres: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExamplesArgs {
    /// Also list the `*.json` files in this directory.
    #[arg(long)]
    pub extra_dir: Option<PathBuf>,
    /// Write the bundled files into this directory.
    #[arg(long)]
    pub export: Option<PathBuf>,
}

/// A finished run: the report and whether every verification passed.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Json,
    pub passed: bool,
    pub warnings: Vec<String>,
}

/// Runs one command and assembles its report.
pub fn run(config: &RunConfig) -> Result<Outcome> {
    let out = commands::dispatch(config)?;
    let report = json!({
        "tool": "locco",
        "versions": {"cli": env!("CARGO_PKG_VERSION"), "core": locco::VERSION},
        "command": config.command.name(),
        "config": serde_json::to_value(config).context("config serializes")?,
        "model": out.model,
        "checks": out.checks,
        "result": out.result,
        "warnings": out.warnings,
        "passed": out.passed,
    });
    Ok(Outcome {
        report,
        passed: out.passed,
        warnings: out.warnings,
    })
}

/// Pretty JSON with a trailing newline.
pub fn render(report: &Json) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// One line per check, for `--table`.
pub fn summary_table(report: &Json) -> String {
    let mut lines = Vec::new();
    if let Some(checks) = report["checks"].as_array() {
        for c in checks {
            let status = if c["passed"].as_bool() == Some(true) {
                "pass"
            } else {
                "FAIL"
            };
            lines.push(format!("{status:<5} {}", c["name"].as_str().unwrap_or("?")));
        }
    }
    let overall = if report["passed"].as_bool() == Some(true) {
        "pass"
    } else {
        "FAIL"
    };
    lines.push(format!("{overall:<5} overall"));
    lines.join("\n") + "\n"
}

/// Writes the report to the configured destination.
pub fn emit(config: &RunConfig, outcome: &Outcome) -> Result<()> {
    let text = render(&outcome.report);
    match &config.output {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
