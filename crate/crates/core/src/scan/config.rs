//! Declarative run configuration, read from TOML.
//!
//! ```toml
//! output_dir = "runs/square-4x4"
//! seed = 7
//!
//! [lattice]
//! kind = "square"
//! t1 = [4, 0]
//! t2 = [0, 4]
//!
//! [model]
//! variant = "tci"
//! rescaled = true
//! j1 = 1.0
//!
//! [grid]
//! j2_over_j1 = [0.0, 0.25, 0.5]
//! lambda_bar = { start = 0.0, stop = 0.2, steps = 11 }
//!
//! [sector]
//! two_m = 0
//! momenta = [0]
//! parity = 1
//!
//! [observables]
//! spectrum = true
//! structure_factors = true
//! fidelity = true
//!
//! [eigen]
//! n_eigenpairs = 4
//! ```
//!
//! `[lattice]` may instead read `cluster = "dimer"` for the two-site
//! cluster. Every section except `lattice` and `grid` has defaults. An empty
//! `momenta` list keeps the plain fixed-magnetization basis. Relative
//! `output_dir` values resolve against `$TCI_OUTPUT_ROOT` when it is set.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::eigensolve::EigenRequest;
use crate::lattice::{LatticeCluster, LatticeSpec};
use crate::observables::MappingSectors;
use crate::operators::{ModelParams, Variant};
use crate::{Error, Result};

/// Environment variable overriding the root of relative output directories.
pub const OUTPUT_ROOT_VAR: &str = "TCI_OUTPUT_ROOT";

/// A periodic torus, or a named special cluster.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClusterSpec {
    Torus(LatticeSpec),
    Named { cluster: NamedCluster },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedCluster {
    /// Two sites joined by a single J₁ bond.
    Dimer,
}

impl ClusterSpec {
    pub fn build(&self) -> Result<LatticeCluster> {
        match self {
            ClusterSpec::Torus(spec) => LatticeCluster::build(*spec),
            ClusterSpec::Named { cluster: NamedCluster::Dimer } => Ok(LatticeCluster::dimer()),
        }
    }
}

/// Explicit values or an inclusive linear range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Range { start: f64, stop: f64, steps: usize },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Values(v) => v.clone(),
            Grid::Range { start, stop, steps } => match steps {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..*n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default = "tci_variant")]
    pub variant: Variant,
    #[serde(default = "yes")]
    pub rescaled: bool,
    #[serde(default = "one")]
    pub j1: f64,
    #[serde(default = "yes")]
    pub third_scaled_heisenberg: bool,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self { variant: Variant::Tci, rescaled: true, j1: 1.0, third_scaled_heisenberg: true }
    }
}

fn tci_variant() -> Variant {
    Variant::Tci
}
fn yes() -> bool {
    true
}
fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub j2_over_j1: Grid,
    pub lambda_bar: Grid,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SectorSelection {
    pub two_m: i32,
    pub momenta: Vec<usize>,
    pub parity: Option<i8>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObservableSet {
    pub spectrum: bool,
    pub structure_factors: bool,
    pub fidelity: bool,
    pub total_spin: bool,
    pub mapping_check: bool,
}

impl Default for ObservableSet {
    fn default() -> Self {
        Self { spectrum: true, structure_factors: true, fidelity: false, total_spin: false, mapping_check: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MappingSection {
    pub levels: usize,
    pub sectors: MappingSectors,
}

impl Default for MappingSection {
    fn default() -> Self {
        Self { levels: 5, sectors: MappingSectors::ZeroAndOne }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    pub lattice: ClusterSpec,
    #[serde(default)]
    pub model: ModelSection,
    pub grid: GridSection,
    #[serde(default)]
    pub sector: SectorSelection,
    #[serde(default)]
    pub observables: ObservableSet,
    #[serde(default)]
    pub eigen: EigenRequest,
    #[serde(default)]
    pub mapping: MappingSection,
    #[serde(default = "default_delta")]
    pub fidelity_delta: f64,
}

fn default_delta() -> f64 {
    1e-4
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Model parameters at one grid point.
    pub fn params_at(&self, j2_over_j1: f64, lambda_bar: f64) -> ModelParams {
        ModelParams {
            j1: self.model.j1,
            j2: j2_over_j1 * self.model.j1,
            lambda: lambda_bar * self.model.j1,
            rescaled: self.model.rescaled,
            variant: self.model.variant,
            third_scaled_heisenberg: self.model.third_scaled_heisenberg,
            allow_negative: false,
        }
    }

    /// Output directory after applying [`OUTPUT_ROOT_VAR`].
    pub fn resolved_output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_ROOT_VAR) {
            Some(root) if self.output_dir.is_relative() => PathBuf::from(root).join(&self.output_dir),
            _ => self.output_dir.clone(),
        }
    }

    /// Checks everything that can be checked without running: grids,
    /// cluster, sector, parameters, solver settings.
    pub fn validate(&self) -> Result<Arc<LatticeCluster>> {
        let j2s = self.grid.j2_over_j1.values();
        let lams = self.grid.lambda_bar.values();
        if j2s.is_empty() || lams.is_empty() {
            return Err(Error::Config("both grids must be non-empty".into()));
        }
        if j2s.iter().chain(&lams).any(|v| !v.is_finite()) {
            return Err(Error::Config("grid values must be finite".into()));
        }
        let cluster = Arc::new(self.lattice.build()?);
        let n = cluster.n_sites() as i32;
        let s = &self.sector;
        if s.two_m.abs() > n || (s.two_m + n) % 2 != 0 {
            return Err(Error::Config(format!("two_m = {} impossible for {n} sites", s.two_m)));
        }
        if let Some(&k) = s.momenta.iter().find(|&&k| k >= cluster.momenta().len()) {
            return Err(Error::Config(format!("momentum index {k} out of range ({} momenta)", cluster.momenta().len())));
        }
        if let Some(p) = s.parity {
            if p != 1 && p != -1 {
                return Err(Error::Config(format!("parity must be ±1, got {p}")));
            }
            if s.two_m != 0 || s.momenta.is_empty() {
                return Err(Error::Config("parity needs two_m = 0 and an explicit momentum list".into()));
            }
        }
        for &j2 in &j2s {
            for &l in &lams {
                self.params_at(j2, l).validate()?;
            }
        }
        if self.eigen.n_eigenpairs == 0 {
            return Err(Error::Config("eigen.n_eigenpairs must be at least 1".into()));
        }
        if self.fidelity_delta <= 0.0 || self.fidelity_delta.is_nan() {
            return Err(Error::Config("fidelity_delta must be positive".into()));
        }
        if self.observables.mapping_check && s.two_m != 0 {
            return Err(Error::Config("mapping_check compares M = 0 spectra".into()));
        }
        Ok(cluster)
    }

    /// `validate` plus a write probe in the output directory.
    pub fn check(&self) -> Result<Arc<LatticeCluster>> {
        let cluster = self.validate()?;
        let dir = self.resolved_output_dir();
        std::fs::create_dir_all(&dir)?;
        let probe = dir.join(".write-probe");
        std::fs::write(&probe, b"")?;
        std::fs::remove_file(&probe)?;
        Ok(cluster)
    }
}
