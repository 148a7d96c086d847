use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use tci::basis::SectorBasis;
use tci::eigensolve::{lowest_eigenpairs, EigenRequest};
use tci::lattice::{LatticeCluster, LatticeKind, LatticeSpec};
use tci::operators::{ModelParams, SpinOperator, Variant};
use tci::scan::{self, Figure, RunConfig, ScanOptions};
use tci::variational::{self as var, AfmPhase, AnsatzSpec, HeisenbergReference};

#[derive(Parser)]
#[command(name = "tci", version, about = "Exact diagonalization and squeezed-AFM tools for the TCI spin model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster geometry and sector dimensions as JSON.
    Describe(DescribeArgs),
    /// Lowest levels of one sector.
    Spectrum(SpectrumArgs),
    /// Squeezed-AFM optimum, θ curves, or crossover line as CSV.
    Variational(VariationalArgs),
    /// Run a parameter sweep from a config file.
    Scan(ScanArgs),
    /// Derive plot CSVs from scan records.
    Emit(EmitArgs),
    /// Validate a config file.
    CheckConfig {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct LatticeArgs {
    #[arg(long, value_parser = parse_kind, default_value = "square")]
    lattice: LatticeKind,
    /// First torus vector, e.g. `4,0`.
    #[arg(long, value_parser = parse_pair, default_value = "4,0")]
    t1: [i64; 2],
    #[arg(long, value_parser = parse_pair, default_value = "0,4")]
    t2: [i64; 2],
}

impl LatticeArgs {
    fn build(&self) -> tci::Result<LatticeCluster> {
        LatticeCluster::build(LatticeSpec::new(self.lattice, self.t1, self.t2))
    }
}

#[derive(Args)]
struct DescribeArgs {
    #[command(flatten)]
    lattice: LatticeArgs,
    /// Also list (momentum, parity) block dimensions of M = 0.
    #[arg(long)]
    blocks: bool,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    lattice: LatticeArgs,
    #[arg(long, default_value_t = 1.0)]
    j1: f64,
    #[arg(long, default_value_t = 0.0)]
    j2: f64,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// Interpret `--lambda` as λ̄ = λ/N.
    #[arg(long)]
    rescaled: bool,
    #[arg(long, default_value = "tci")]
    variant: Variant,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    two_m: i32,
    #[arg(long)]
    momentum: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    parity: Option<i8>,
    #[arg(long, short, default_value_t = 6)]
    n: usize,
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
}

#[derive(Args)]
struct VariationalArgs {
    #[arg(long, default_value_t = 100)]
    sites: usize,
    #[arg(long, default_value_t = 1.0)]
    j1: f64,
    #[arg(long, default_value_t = 0.0)]
    j2: f64,
    /// Comma-separated λ̄ (or λ with `--unrescaled`) values.
    #[arg(long, value_delimiter = ',', default_value = "0.01")]
    lambda: Vec<f64>,
    #[arg(long)]
    unrescaled: bool,
    #[arg(long, value_parser = parse_phase, default_value = "square-neel")]
    phase: AfmPhase,
    /// Print E(θ) on this many θ points for the first λ instead of optima.
    #[arg(long)]
    curve: Option<usize>,
    /// Crossover line: comma-separated Heisenberg amplitudes A, one per
    /// `--j2-grid` value.
    #[arg(long, value_delimiter = ',')]
    crossover: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    j2_grid: Vec<f64>,
    /// Where the Heisenberg amplitudes come from.
    #[arg(long, default_value = "user-supplied")]
    provenance: String,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 1)]
    threads_per_point: usize,
    #[arg(long)]
    force: bool,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct EmitArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "phase-diagram")]
    figure: Figure,
    /// Defaults to `<output_dir>/plots`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_pair(s: &str) -> Result<[i64; 2], String> {
    let v: Vec<i64> = s.split(',').map(|x| x.trim().parse::<i64>().map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
    v.try_into().map_err(|_| format!("expected two integers, got {s}"))
}

fn parse_kind(s: &str) -> Result<LatticeKind, String> {
    serde_json::from_value(serde_json::Value::String(s.to_lowercase())).map_err(|e| e.to_string())
}

fn parse_phase(s: &str) -> Result<AfmPhase, String> {
    serde_json::from_value(serde_json::Value::String(s.to_lowercase())).map_err(|e| e.to_string())
}

fn describe(a: &DescribeArgs) -> tci::Result<()> {
    let cluster = Arc::new(a.lattice.build()?);
    let n = cluster.n_sites() as i32;
    let mut json = cluster.to_json();
    let dims: Vec<serde_json::Value> = (-n..=n)
        .step_by(2)
        .map(|two_m| {
            let up = ((n + two_m) / 2) as u64;
            serde_json::json!({"two_m": two_m, "n_up": up, "dim": tci::basis::binomial(n as u64, up).to_string()})
        })
        .collect();
    json["sector_dims"] = serde_json::Value::Array(dims);
    if a.blocks {
        let plain = SectorBasis::enumerate(cluster.clone(), 0)?;
        let parities: Vec<Option<i8>> = if cluster.spin_inversion() { vec![Some(1), Some(-1)] } else { vec![None] };
        let mut blocks = Vec::new();
        for k in 0..cluster.momenta().len() {
            for &p in &parities {
                let b = plain.reduce(k, p)?;
                blocks.push(serde_json::json!({"momentum": k, "parity": p, "dim": b.dim()}));
            }
        }
        json["m0_blocks"] = serde_json::Value::Array(blocks);
    }
    println!("{}", serde_json::to_string_pretty(&json)?);
    Ok(())
}

fn spectrum(a: &SpectrumArgs) -> tci::Result<()> {
    let cluster = Arc::new(a.lattice.build()?);
    let params = ModelParams {
        j1: a.j1,
        j2: a.j2,
        lambda: a.lambda,
        rescaled: a.rescaled,
        variant: a.variant,
        third_scaled_heisenberg: true,
        allow_negative: false,
    };
    params.validate()?;
    let mut basis = SectorBasis::enumerate(cluster, a.two_m)?;
    if let Some(k) = a.momentum {
        basis = basis.reduce(k, a.parity)?;
    }
    let basis = Arc::new(basis);
    let op = SpinOperator::hamiltonian(&params, basis.clone())?;
    let req = EigenRequest { n_eigenpairs: a.n.min(basis.dim()), seed: a.seed, ..EigenRequest::default() };
    let res = lowest_eigenpairs(&op, &req)?;
    println!("# sector {} dim {} converged {} matvecs {}", basis.label(), basis.dim(), res.converged, res.matvecs);
    println!("level,energy,residual");
    for (i, (e, r)) in res.eigenvalues.iter().zip(&res.residuals).enumerate() {
        println!("{i},{e},{r:e}");
    }
    Ok(())
}

fn variational(a: &VariationalArgs) -> tci::Result<()> {
    let coupling = a.phase.effective_coupling(a.j1, a.j2);
    if !a.crossover.is_empty() {
        let refs: Vec<HeisenbergReference> = a
            .crossover
            .iter()
            .map(|&amplitude| HeisenbergReference { amplitude, provenance: a.provenance.clone() })
            .collect();
        let line = var::crossover_boundary(&a.j2_grid, &refs, a.sites, !a.unrescaled, a.phase)?;
        println!("j2_over_j1,coupling,amplitude,critical_lambda,provenance,note");
        for p in line {
            println!(
                "{},{},{},{},{},{}",
                p.j2_over_j1,
                p.coupling,
                p.amplitude,
                p.critical_lambda.map_or(String::new(), |v| v.to_string()),
                p.provenance,
                p.note.unwrap_or_default().replace(',', ";")
            );
        }
        return Ok(());
    }
    let specs: Vec<AnsatzSpec> = a
        .lambda
        .iter()
        .map(|&l| AnsatzSpec::new(a.sites, coupling, l, !a.unrescaled, a.phase))
        .collect::<tci::Result<_>>()?;
    if let Some(points) = a.curve {
        let spec = &specs[0];
        println!("theta,energy,energy_bosonic,energy_leading_order,e_plus,e_minus,bosonic_valid");
        for i in 0..points.max(2) {
            let th = spec.theta_max() * i as f64 / (points.max(2) - 1) as f64;
            let sym = var::symmetrized_energies(spec, th);
            println!(
                "{th},{},{},{},{},{},{}",
                var::variational_energy(spec, th),
                var::bosonic_energy(spec, th),
                var::leading_order_energy(spec, th),
                sym.e_plus,
                sym.e_minus,
                var::bosonic_structure_factors(spec.n_sites, th).valid
            );
        }
        return Ok(());
    }
    println!("sites,lambda,rescaled,theta_star,energy,sxx0,sxx_q,szz_q,at_boundary,e_plus,e_minus,gap,gap_reminimized,asymptotic_theta,asymptotic_energy,asymptotic_gap,bosonic_minimum");
    for spec in &specs {
        let r = var::minimize_theta(spec);
        let sym = r.symmetrized.expect("exact-sum results carry parity energies");
        let asym = var::asymptotic_quantities(spec).ok();
        let agap = var::asymptotic_gap(spec).ok();
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        println!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            spec.n_sites,
            spec.lambda,
            spec.rescaled,
            r.theta_star,
            r.energy,
            r.sxx0,
            r.sxx_q,
            r.szz_q,
            r.at_boundary,
            sym.at_theta_star.e_plus,
            sym.at_theta_star.e_minus,
            sym.at_theta_star.gap,
            sym.gap_reminimized,
            opt(asym.map(|x| x.theta_star)),
            opt(asym.map(|x| x.energy)),
            opt(agap),
            opt(var::bosonic_minimum(spec).map(|b| b.theta_star)),
        );
    }
    Ok(())
}

fn load_config(path: &Path) -> tci::Result<RunConfig> {
    RunConfig::load(path)
}

fn run_scan(a: &ScanArgs) -> tci::Result<bool> {
    let mut cfg = load_config(&a.config)?;
    if let Some(dir) = &a.output_dir {
        cfg.output_dir = dir.clone();
    }
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let opts = ScanOptions { workers: a.workers, threads_per_point: a.threads_per_point, force: a.force };
    let out = scan::run_scan(&cfg, &opts)?;
    let failures = out.failures();
    eprintln!(
        "{} points: {} computed, {} reused, {} failed -> {}",
        out.records.len(),
        out.computed,
        out.skipped,
        failures,
        cfg.resolved_output_dir().display()
    );
    for r in out.records.iter().filter(|r| !r.is_ok()) {
        eprintln!("  ({}, {}): {}", r.point.j2_over_j1, r.point.lambda_bar, r.error.as_deref().unwrap_or(""));
    }
    Ok(failures == 0)
}

fn emit(a: &EmitArgs) -> tci::Result<()> {
    let cfg = load_config(&a.config)?;
    let dir = cfg.resolved_output_dir();
    let records = scan::load_records(&dir)?;
    let out = a.out.clone().unwrap_or_else(|| dir.join("plots"));
    let files =
        scan::emit_plotdata(&records, &cfg.grid.j2_over_j1.values(), &cfg.grid.lambda_bar.values(), a.figure, &out)?;
    for f in files {
        println!("{}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Describe(a) => describe(a).map(|_| true),
        Command::Spectrum(a) => spectrum(a).map(|_| true),
        Command::Variational(a) => variational(a).map(|_| true),
        Command::Scan(a) => run_scan(a),
        Command::Emit(a) => emit(a).map(|_| true),
        Command::CheckConfig { config } => load_config(config).and_then(|c| {
            let cluster = c.check()?;
            println!("ok: {} sites, {} grid points", cluster.n_sites(), c.grid.j2_over_j1.values().len() * c.grid.lambda_bar.values().len());
            Ok(true)
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
