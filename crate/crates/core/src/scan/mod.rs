//! Parameter sweeps over `(J₂/J₁, λ̄/J₁)` grids.
//!
//! Grid points are independent: each is solved in its own thread pool and
//! its record written through a single appender as soon as it finishes, so
//! an interrupted scan resumes where it stopped.

mod config;
mod emit;
mod record;

use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

pub use config::{ClusterSpec, NamedCluster, Grid, GridSection, MappingSection, ModelSection, ObservableSet, RunConfig, SectorSelection, OUTPUT_ROOT_VAR};
pub use emit::{emit_plotdata, peaks_by_column, write_matrix_csv, Figure, PanelPeak, PEAK_METHOD};
pub use record::{
    validate_schema, FidelityPoint, GridPoint, GroundState, Provenance, ResultRecord, SectorSpectrum, SCHEMA_VERSION,
};

use crate::basis::{SectorBasis, StateVector};
use crate::eigensolve::{lowest_eigenpairs, EigenRequest};
use crate::lattice::LatticeCluster;
use crate::observables::{
    fidelity_susceptibility, heisenberg_mapping_check, resolve_total_spin, structure_factor, Component,
};
use crate::operators::SpinOperator;
use crate::{Error, Result};

/// Execution knobs that do not change results.
#[derive(Clone, Debug)]
pub struct ScanOptions {
    /// Grid points solved concurrently.
    pub workers: usize,
    /// Threads available to each point's matvecs.
    pub threads_per_point: usize,
    /// Recompute points that already have a record.
    pub force: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { workers: 1, threads_per_point: 1, force: false }
    }
}

#[derive(Debug)]
pub struct ScanOutcome {
    /// All records of the grid, in `(J₂ index, λ̄ index)` order.
    pub records: Vec<ResultRecord>,
    pub computed: usize,
    pub skipped: usize,
}

impl ScanOutcome {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| !r.is_ok()).count()
    }
}

pub fn records_dir(output_dir: &Path) -> PathBuf {
    output_dir.join("records")
}

/// Reads every record under `output_dir/records`, sorted by grid index.
pub fn load_records(output_dir: &Path) -> Result<Vec<ResultRecord>> {
    let dir = records_dir(output_dir);
    let mut out = Vec::new();
    if !dir.exists() {
        return Ok(out);
    }
    for entry in std::fs::read_dir(&dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "json") {
            out.push(read_record(&path)?);
        }
    }
    out.sort_by_key(|r| (r.point.j2_index, r.point.lambda_index));
    Ok(out)
}

fn read_record(path: &Path) -> Result<ResultRecord> {
    let value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    validate_schema(&value).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_value(value)?)
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

/// Deterministic per-point seed.
fn point_seed(seed: u64, j: usize, l: usize) -> u64 {
    seed ^ ((j as u64) << 32 | l as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Runs every missing grid point (all of them with `force`).
pub fn run_scan(config: &RunConfig, options: &ScanOptions) -> Result<ScanOutcome> {
    let cluster = config.check()?;
    let out_dir = config.resolved_output_dir();
    let rec_dir = records_dir(&out_dir);
    std::fs::create_dir_all(&rec_dir)?;
    std::fs::write(out_dir.join("config.toml"), config.to_toml()?)?;

    let j2s = config.grid.j2_over_j1.values();
    let lams = config.grid.lambda_bar.values();
    let points: Vec<GridPoint> = j2s
        .iter()
        .enumerate()
        .flat_map(|(j, &jv)| {
            lams.iter()
                .enumerate()
                .map(move |(l, &lv)| GridPoint { j2_index: j, lambda_index: l, j2_over_j1: jv, lambda_bar: lv })
        })
        .collect();

    let mut existing = Vec::new();
    let mut todo = Vec::new();
    for p in points {
        let path = rec_dir.join(p.file_name());
        match (options.force, path.exists()) {
            (false, true) => match read_record(&path) {
                Ok(r) => existing.push(r),
                Err(_) => todo.push(p),
            },
            _ => todo.push(p),
        }
    }
    let skipped = existing.len();

    let appender = Mutex::new(());
    let write = |r: &ResultRecord| -> Result<()> {
        let text = serde_json::to_string_pretty(r)?;
        let _guard = appender.lock().unwrap_or_else(|e| e.into_inner());
        let path = rec_dir.join(r.point.file_name());
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, text)?;
        std::fs::rename(&tmp, &path)?;
        Ok(())
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let computed: Vec<Result<ResultRecord>> = pool.install(|| {
        todo.par_iter()
            .map(|&p| {
                let inner = rayon::ThreadPoolBuilder::new()
                    .num_threads(options.threads_per_point.max(1))
                    .build()
                    .map_err(|e| Error::Config(e.to_string()))?;
                let rec = inner.install(|| run_point(config, cluster.clone(), p));
                write(&rec)?;
                Ok(rec)
            })
            .collect()
    });
    let mut records = existing;
    for r in computed {
        records.push(r?);
    }
    records.sort_by_key(|r| (r.point.j2_index, r.point.lambda_index));
    Ok(ScanOutcome { computed: records.len() - skipped, skipped, records })
}

/// Solves one grid point; failures land in the record's `error` field.
pub fn run_point(config: &RunConfig, cluster: Arc<LatticeCluster>, point: GridPoint) -> ResultRecord {
    let started = Instant::now();
    let started_unix = unix_now();
    let params = config.params_at(point.j2_over_j1, point.lambda_bar);
    let seed = point_seed(config.seed, point.j2_index, point.lambda_index);
    let eigen = EigenRequest { seed, ..config.eigen.clone() };
    let mut rec = ResultRecord {
        schema_version: SCHEMA_VERSION,
        point,
        lattice: config.lattice,
        model: params,
        sector: config.sector.clone(),
        eigen: eigen.clone(),
        spectra: Vec::new(),
        ground: None,
        structure_factors: None,
        fidelity: None,
        total_spin: None,
        mapping: None,
        error: None,
        provenance: Provenance {
            seed,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix,
            finished_unix: 0.0,
            wall_seconds: 0.0,
            fidelity_delta: config.fidelity_delta,
        },
    };
    if let Err(e) = fill_point(config, cluster, &eigen, &mut rec) {
        rec.error = Some(e.to_string());
    }
    rec.provenance.finished_unix = unix_now();
    rec.provenance.wall_seconds = started.elapsed().as_secs_f64();
    rec
}

fn sector_bases(config: &RunConfig, cluster: Arc<LatticeCluster>) -> Result<Vec<Arc<SectorBasis>>> {
    let plain = SectorBasis::enumerate(cluster, config.sector.two_m)?;
    if config.sector.momenta.is_empty() {
        return Ok(vec![Arc::new(plain)]);
    }
    config
        .sector
        .momenta
        .iter()
        .map(|&k| plain.reduce(k, config.sector.parity).map(Arc::new))
        .collect()
}

fn fill_point(config: &RunConfig, cluster: Arc<LatticeCluster>, eigen: &EigenRequest, rec: &mut ResultRecord) -> Result<()> {
    let params = rec.model;
    let bases = sector_bases(config, cluster.clone())?;
    let mut best: Option<(f64, usize, crate::eigensolve::EigenResult)> = None;
    for (i, basis) in bases.iter().enumerate() {
        if basis.dim() == 0 {
            continue;
        }
        let op = SpinOperator::hamiltonian(&params, basis.clone())?;
        let req = EigenRequest { n_eigenpairs: eigen.n_eigenpairs.min(basis.dim()), ..eigen.clone() };
        let res = lowest_eigenpairs(&op, &req)?;
        rec.spectra.push(SectorSpectrum {
            label: basis.label(),
            dim: basis.dim(),
            eigenvalues: res.eigenvalues.clone(),
            converged: res.converged,
            iterations: res.iterations,
            matvecs: res.matvecs,
        });
        let e0 = res.eigenvalues[0];
        if best.as_ref().is_none_or(|b| e0 < b.0) {
            best = Some((e0, i, res));
        }
    }
    let Some((energy, gi, mut ground)) = best else {
        return Err(Error::InvalidSector("every selected sector is empty".into()));
    };
    let basis = bases[gi].clone();
    rec.ground = Some(GroundState { energy, label: basis.label() });
    if !config.observables.spectrum {
        rec.spectra.clear();
    }
    if config.observables.total_spin {
        rec.total_spin = Some(resolve_total_spin(&basis, &mut ground, 1e-8));
    }
    if config.observables.structure_factors {
        let state = StateVector::new(basis.clone(), ground.eigenvectors[0].clone())?;
        rec.structure_factors = Some(
            [Component::Zz, Component::Xx].iter().map(|&c| structure_factor(&state, c)).collect::<Result<_>>()?,
        );
    }
    if config.observables.fidelity {
        let curve = fidelity_susceptibility(&params, basis.clone(), &[params.lambda], config.fidelity_delta * config.model.j1, eigen)?;
        rec.fidelity = Some(FidelityPoint {
            chi: Some(curve.chi[0]).filter(|c| c.is_finite()),
            delta: curve.delta,
            degenerate: curve.degenerate[0],
        });
    }
    if config.observables.mapping_check {
        rec.mapping =
            Some(heisenberg_mapping_check(&params, cluster, config.mapping.levels, &config.mapping.sectors, eigen)?);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dimer_config(dir: &Path) -> RunConfig {
        RunConfig::from_toml(&format!(
            r#"
            output_dir = "{}"
            [lattice]
            cluster = "dimer"
            [model]
            rescaled = false
            [grid]
            j2_over_j1 = [0.0]
            lambda_bar = [1.0]
            [eigen]
            n_eigenpairs = 4
            "#,
            dir.display()
        ))
        .unwrap()
    }

    #[test]
    fn two_spin_point() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = dimer_config(dir.path());
        cfg.sector.two_m = 0;
        let out = run_scan(&cfg, &ScanOptions::default()).unwrap();
        assert_eq!(out.records.len(), 1);
        let r = &out.records[0];
        assert!(r.is_ok(), "{:?}", r.error);
        // M = 0 holds −1/4 and 7/4; the ±1 sectors hold the two 5/4 levels
        let e = &r.spectra[0].eigenvalues;
        assert!((e[0] + 0.25).abs() < 1e-12 && (e[1] - 1.75).abs() < 1e-12);
        let json: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(records_dir(dir.path()).join(r.point.file_name())).unwrap(),
        )
        .unwrap();
        validate_schema(&json).unwrap();
    }

    #[test]
    fn full_two_spin_spectrum_over_sectors() {
        let dir = tempfile::tempdir().unwrap();
        let mut levels = Vec::new();
        for two_m in [-2, 0, 2] {
            let mut cfg = dimer_config(&dir.path().join(format!("m{two_m}")));
            cfg.sector.two_m = two_m;
            let out = run_scan(&cfg, &ScanOptions::default()).unwrap();
            levels.extend(out.records[0].spectra[0].eigenvalues.iter().copied());
        }
        levels.sort_by(f64::total_cmp);
        for (a, b) in levels.iter().zip([-0.25, 1.25, 1.25, 1.75]) {
            assert!((a - b).abs() < 1e-12, "{levels:?}");
        }
    }

    #[test]
    fn resume_skips_existing_points() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = dimer_config(dir.path());
        cfg.grid.lambda_bar = Grid::Values(vec![0.5, 1.0, 1.5]);
        let first = run_scan(&cfg, &ScanOptions::default()).unwrap();
        assert_eq!((first.computed, first.skipped), (3, 0));
        std::fs::remove_file(records_dir(dir.path()).join("j000_l001.json")).unwrap();
        let second = run_scan(&cfg, &ScanOptions::default()).unwrap();
        assert_eq!((second.computed, second.skipped), (1, 2));
        let forced = run_scan(&cfg, &ScanOptions { force: true, ..Default::default() }).unwrap();
        assert_eq!(forced.computed, 3);
        for (a, b) in first.records.iter().zip(&forced.records) {
            assert_eq!(a.spectra, b.spectra);
        }
    }

    #[test]
    fn failures_are_recorded_in_band() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = dimer_config(dir.path());
        cfg.observables.fidelity = true;
        cfg.sector.two_m = 2;
        // the polarized sector has a single state, so χ_F needs no second level
        let out = run_scan(&cfg, &ScanOptions::default()).unwrap();
        assert!(out.records[0].is_ok());
        cfg.observables.mapping_check = true;
        cfg.sector.two_m = 0;
        cfg.observables.fidelity = false;
        cfg.mapping.levels = 3;
        let out = run_scan(&cfg, &ScanOptions { force: true, ..Default::default() }).unwrap();
        assert_eq!(out.failures(), 1);
        assert!(out.records[0].error.as_deref().unwrap().contains("singlet"));
    }

    #[test]
    fn output_root_override() {
        let cfg = RunConfig { output_dir: PathBuf::from("rel/out"), ..dimer_config(Path::new("x")) };
        let root = tempfile::tempdir().unwrap();
        std::env::set_var(OUTPUT_ROOT_VAR, root.path());
        let resolved = cfg.resolved_output_dir();
        std::env::remove_var(OUTPUT_ROOT_VAR);
        assert_eq!(resolved, root.path().join("rel/out"));
    }
}
