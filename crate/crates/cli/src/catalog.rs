//! Bundled example models and sampled domains, and model loading.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use locco::CoverModel;
use serde::Deserialize;
use serde_json::{json, Value as Json};
use sha2::{Digest, Sha256};

/// Prefix selecting a bundled entry instead of a file path.
pub const BUNDLED_PREFIX: &str = "bundled:";

/// Environment variable overriding the enumeration budget.
pub const BUDGET_ENV: &str = "LOCCO_BUDGET";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryKind {
    Model,
    Domain,
}

impl EntryKind {
    fn as_str(self) -> &'static str {
        match self {
            Self::Model => "model",
            Self::Domain => "domain",
        }
    }
}

pub struct Bundled {
    pub name: &'static str,
    pub kind: EntryKind,
    pub description: &'static str,
    pub contents: &'static str,
}

pub const BUNDLED: &[Bundled] = &[
    Bundled {
        name: "interval",
        kind: EntryKind::Model,
        description: "three points on a path, two overlapping sets",
        contents: include_str!("../models/interval.json"),
    },
    Bundled {
        name: "hexagon",
        kind: EntryKind::Model,
        description: "six-point circle covered by three arcs",
        contents: include_str!("../models/hexagon.json"),
    },
    Bundled {
        name: "hexagon-single-set",
        kind: EntryKind::Model,
        description: "six-point circle as a single (non-acyclic) cover set",
        contents: include_str!("../models/hexagon-single-set.json"),
    },
    Bundled {
        name: "z6-k1",
        kind: EntryKind::Model,
        description: "cyclic group of order 6, left-invariant arcs of radius 1",
        contents: include_str!("../models/z6-k1.json"),
    },
    Bundled {
        name: "z12-k1",
        kind: EntryKind::Model,
        description: "12-cycle group cover, arcs of radius 1",
        contents: include_str!("../models/z12-k1.json"),
    },
    Bundled {
        name: "z12-k2",
        kind: EntryKind::Model,
        description: "12-cycle group cover, arcs of radius 2",
        contents: include_str!("../models/z12-k2.json"),
    },
    Bundled {
        name: "solid-triangle",
        kind: EntryKind::Model,
        description: "full 2-simplex covered by itself and one edge",
        contents: include_str!("../models/solid-triangle.json"),
    },
    Bundled {
        name: "projective-plane",
        kind: EntryKind::Model,
        description: "six-vertex triangulation of the real projective plane",
        contents: include_str!("../models/projective-plane.json"),
    },
    Bundled {
        name: "circle-arcs3",
        kind: EntryKind::Domain,
        description: "10000-sample circle with three overlapping arcs",
        contents: include_str!("../models/circle-arcs3.json"),
    },
];

pub fn bundled(name: &str) -> Option<&'static Bundled> {
    BUNDLED.iter().find(|b| b.name == name)
}

/// A sampled one-dimensional domain with an arc cover.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainFile {
    pub domain: String,
    pub samples: usize,
    pub cover: DomainCover,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainCover {
    pub arcs: usize,
}

impl DomainFile {
    pub fn parse(text: &str) -> Result<Self> {
        let d: Self = serde_json::from_str(text).context("invalid domain file")?;
        if d.domain != "circle" {
            bail!(
                "unsupported domain kind {:?} (expected \"circle\")",
                d.domain
            );
        }
        Ok(d)
    }
}

/// A loaded model with the text it came from.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub model: CoverModel,
    pub source: String,
}

impl LoadedModel {
    /// SHA-256 of the canonical compact JSON form of the model.
    pub fn hash(&self) -> String {
        model_hash(&self.model)
    }

    pub fn to_json(&self) -> Json {
        json!({
            "source": self.source,
            "sha256": self.hash(),
            "points": self.model.num_points(),
            "cover_sets": self.model.cover_len(),
            "has_complex": self.model.complex().is_some(),
            "budget": self.model.budget(),
        })
    }
}

pub fn model_hash(model: &CoverModel) -> String {
    let canonical = serde_json::to_string(&model.to_file()).expect("model serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

/// Reads `path` or a `bundled:<name>` entry.
pub fn read_source(spec: &str) -> Result<String> {
    if let Some(name) = spec.strip_prefix(BUNDLED_PREFIX) {
        let entry = bundled(name).with_context(|| format!("no bundled entry named {name:?}"))?;
        return Ok(entry.contents.to_string());
    }
    fs::read_to_string(spec).with_context(|| format!("cannot read {spec}"))
}

/// Budget from the environment, if set.
pub fn budget_override() -> Result<Option<usize>> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .with_context(|| format!("{BUDGET_ENV} must be a positive integer, got {v:?}")),
        Err(_) => Ok(None),
    }
}

pub fn load_model(spec: &str) -> Result<LoadedModel> {
    let text = read_source(spec)?;
    let mut model =
        CoverModel::from_json_str(&text).with_context(|| format!("cannot load model {spec}"))?;
    if let Some(b) = budget_override()? {
        model = model.with_budget(b);
    }
    Ok(LoadedModel {
        model,
        source: spec.to_string(),
    })
}

fn validate(kind: EntryKind, text: &str) -> Result<Json> {
    match kind {
        EntryKind::Model => {
            let m = CoverModel::from_json_str(text)?;
            // Round trip through the file format.
            let again = CoverModel::from_file(&m.to_file())?;
            if again != m {
                bail!("model does not round-trip");
            }
            Ok(
                json!({"points": m.num_points(), "cover_sets": m.cover_len(), "sha256": model_hash(&m)}),
            )
        }
        EntryKind::Domain => {
            let d = DomainFile::parse(text)?;
            Ok(json!({"samples": d.samples, "arcs": d.cover.arcs}))
        }
    }
}

/// The catalog: bundled entries, then `*.json` files of `extra_dir`.
pub fn list_examples(extra_dir: Option<&Path>) -> Result<Vec<Json>> {
    let mut out = Vec::new();
    for b in BUNDLED {
        let status = validate(b.kind, b.contents);
        out.push(entry_json(
            b.name,
            b.kind,
            b.description,
            &format!("{BUNDLED_PREFIX}{}", b.name),
            status,
        ));
    }
    if let Some(dir) = extra_dir {
        let mut paths: Vec<_> = fs::read_dir(dir)
            .with_context(|| format!("cannot read {}", dir.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "json"))
            .collect();
        paths.sort();
        for p in paths {
            let text = fs::read_to_string(&p)?;
            let kind = if serde_json::from_str::<Json>(&text)
                .ok()
                .and_then(|j| j.get("domain").cloned())
                .is_some()
            {
                EntryKind::Domain
            } else {
                EntryKind::Model
            };
            let name = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            out.push(entry_json(
                &name,
                kind,
                "",
                &p.display().to_string(),
                validate(kind, &text),
            ));
        }
    }
    Ok(out)
}

fn entry_json(
    name: &str,
    kind: EntryKind,
    description: &str,
    source: &str,
    status: Result<Json>,
) -> Json {
    let (valid, info, error) = match status {
        Ok(info) => (true, info, None),
        Err(e) => (false, Json::Null, Some(format!("{e:#}"))),
    };
    json!({
        "name": name,
        "kind": kind.as_str(),
        "description": description,
        "source": source,
        "valid": valid,
        "info": info,
        "error": error,
    })
}

/// Writes every bundled file into `dir`.
pub fn export(dir: &Path) -> Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for b in BUNDLED {
        let path = dir.join(format!("{}.json", b.name));
        fs::write(&path, b.contents)?;
        written.push(path.display().to_string());
    }
    Ok(written)
}
