//! Per-grid-point result records.
//!
//! One pretty-printed JSON file per grid point,
//! `records/j{J2 index}_l{λ̄ index}.json`. Every record carries its own
//! lattice, model, sector and solver settings so it can be re-run alone.
//!
//! Schema (version 1):
//!
//! | field | type |
//! |-------|------|
//! | `schema_version` | integer |
//! | `point` | `{j2_index, lambda_index, j2_over_j1, lambda_bar}` |
//! | `lattice` | `{kind, t1, t2}` or `{cluster}` |
//! | `model` | model parameters at this point |
//! | `sector` | `{two_m, momenta, parity}` |
//! | `eigen` | solver request, with the per-point seed |
//! | `spectra` | list of `{label, dim, eigenvalues, converged, iterations, matvecs}` |
//! | `ground` | `{energy, label}` or null |
//! | `structure_factors` | list of `{component, momenta, values, stars}` or null |
//! | `fidelity` | `{chi (number or null), delta, degenerate}` or null |
//! | `total_spin` | `⟨S²⟩` per level of the ground sector, or null |
//! | `mapping` | TCI/Heisenberg level comparison or null |
//! | `error` | string or null |
//! | `provenance` | `{seed, code_version, started_unix, finished_unix, wall_seconds, fidelity_delta}` |

use serde::{Deserialize, Serialize};

use crate::basis::SectorLabel;
use crate::eigensolve::EigenRequest;
use crate::observables::{SpectrumComparison, StructureFactorResult};
use crate::operators::ModelParams;

use super::config::{ClusterSpec, SectorSelection};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub j2_index: usize,
    pub lambda_index: usize,
    pub j2_over_j1: f64,
    pub lambda_bar: f64,
}

impl GridPoint {
    pub fn file_name(&self) -> String {
        format!("j{:03}_l{:03}.json", self.j2_index, self.lambda_index)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorSpectrum {
    pub label: SectorLabel,
    pub dim: usize,
    pub eigenvalues: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub matvecs: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundState {
    pub energy: f64,
    pub label: SectorLabel,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityPoint {
    /// `None` when the two ground spaces are orthogonal (level crossing).
    pub chi: Option<f64>,
    pub delta: f64,
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub code_version: String,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub wall_seconds: f64,
    pub fidelity_delta: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub point: GridPoint,
    pub lattice: ClusterSpec,
    pub model: ModelParams,
    pub sector: SectorSelection,
    pub eigen: EigenRequest,
    pub spectra: Vec<SectorSpectrum>,
    pub ground: Option<GroundState>,
    pub structure_factors: Option<Vec<StructureFactorResult>>,
    pub fidelity: Option<FidelityPoint>,
    pub total_spin: Option<Vec<f64>>,
    pub mapping: Option<SpectrumComparison>,
    pub error: Option<String>,
    pub provenance: Provenance,
}

impl ResultRecord {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Checks a parsed JSON value against the version-1 layout: required keys,
/// their JSON types, and the version number.
pub fn validate_schema(value: &serde_json::Value) -> Result<(), String> {
    use serde_json::Value as V;
    let obj = value.as_object().ok_or("record is not an object")?;
    let kind = |v: &V| match v {
        V::Null => "null",
        V::Bool(_) => "bool",
        V::Number(_) => "number",
        V::String(_) => "string",
        V::Array(_) => "array",
        V::Object(_) => "object",
    };
    let required: &[(&str, &[&str])] = &[
        ("schema_version", &["number"]),
        ("point", &["object"]),
        ("lattice", &["object"]),
        ("model", &["object"]),
        ("sector", &["object"]),
        ("eigen", &["object"]),
        ("spectra", &["array"]),
        ("ground", &["object", "null"]),
        ("structure_factors", &["array", "null"]),
        ("fidelity", &["object", "null"]),
        ("total_spin", &["array", "null"]),
        ("mapping", &["object", "null"]),
        ("error", &["string", "null"]),
        ("provenance", &["object"]),
    ];
    for (key, types) in required {
        let v = obj.get(*key).ok_or_else(|| format!("missing field {key}"))?;
        if !types.contains(&kind(v)) {
            return Err(format!("field {key} has type {}, expected one of {types:?}", kind(v)));
        }
    }
    if obj.len() != required.len() {
        let extra: Vec<&String> = obj.keys().filter(|k| !required.iter().any(|(r, _)| r == k)).collect();
        return Err(format!("unexpected fields {extra:?}"));
    }
    match obj["schema_version"].as_u64() {
        Some(v) if v == SCHEMA_VERSION as u64 => {}
        other => return Err(format!("schema_version {other:?}, expected {SCHEMA_VERSION}")),
    }
    for key in ["j2_index", "lambda_index", "j2_over_j1", "lambda_bar"] {
        if !obj["point"].get(key).is_some_and(V::is_number) {
            return Err(format!("point.{key} missing or not a number"));
        }
    }
    for key in ["seed", "code_version", "started_unix", "finished_unix", "wall_seconds"] {
        if obj["provenance"].get(key).is_none() {
            return Err(format!("provenance.{key} missing"));
        }
    }
    Ok(())
}
