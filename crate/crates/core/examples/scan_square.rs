//! A small resumable sweep over (J₂/J₁, λ̄) on the tilted 8-site square
//! cluster, followed by the plot CSVs. Run it twice: the second pass reuses
//! every record.

use std::path::PathBuf;

use tci::scan::{emit_plotdata, run_scan, Figure, RunConfig, ScanOptions};

const CONFIG: &str = r#"
output_dir = "target/example-scan"
seed = 1

[lattice]
kind = "square"
t1 = [2, 2]
t2 = [2, -2]

[grid]
j2_over_j1 = { start = 0.0, stop = 1.0, steps = 6 }
lambda_bar = { start = 0.0, stop = 0.3, steps = 7 }

[sector]
momenta = [0]
parity = 1

[observables]
fidelity = true
total_spin = true
"#;

fn main() -> tci::Result<()> {
    let config = RunConfig::from_toml(CONFIG)?;
    let outcome = run_scan(&config, &ScanOptions { workers: 2, threads_per_point: 1, force: false })?;
    println!("{} computed, {} reused, {} failed", outcome.computed, outcome.skipped, outcome.failures());
    let plots: PathBuf = config.resolved_output_dir().join("plots");
    let files = emit_plotdata(
        &outcome.records,
        &config.grid.j2_over_j1.values(),
        &config.grid.lambda_bar.values(),
        Figure::PhaseDiagram,
        &plots,
    )?;
    for f in files {
        println!("wrote {}", f.display());
    }
    print!("{}", std::fs::read_to_string(plots.join("peaks.csv"))?);
    Ok(())
}
