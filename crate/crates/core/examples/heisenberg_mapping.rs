//! Strong-cavity TCI levels against the singlets of the J/3 Heisenberg
//! model. The residual falls off like J²/λ.
//!
//! Pass `--big` for the 4x4 square cluster (best with `--release`).

use std::sync::Arc;

use tci::eigensolve::EigenRequest;
use tci::lattice::{LatticeCluster, LatticeKind, LatticeSpec};
use tci::observables::{heisenberg_mapping_check, MappingSectors};
use tci::operators::ModelParams;

fn main() -> tci::Result<()> {
    let big = std::env::args().any(|a| a == "--big");
    let spec = if big {
        LatticeSpec::new(LatticeKind::Square, [4, 0], [0, 4])
    } else {
        LatticeSpec::new(LatticeKind::Square, [2, 2], [2, -2])
    };
    let cluster = Arc::new(LatticeCluster::build(spec)?);
    let req = EigenRequest { dense_below: 2048, ..EigenRequest::lowest(5) };
    for lambda in [1e1, 1e2, 1e3, 1e4] {
        let cmp = heisenberg_mapping_check(&ModelParams::tci(1.0, 0.5, lambda), cluster.clone(), 5, &MappingSectors::All, &req)?;
        println!("λ = {lambda:>7}: max |ΔE| = {:.3e} (tolerance {:.1e})", cmp.max_difference(), cmp.tolerance);
        if lambda == 1e4 {
            for l in &cmp.levels {
                println!("    {:>12.8} {:>12.8}  k#{} p={:+}", l.tci, l.heisenberg, l.tci_sector.0, l.tci_sector.1);
            }
        }
    }
    Ok(())
}
