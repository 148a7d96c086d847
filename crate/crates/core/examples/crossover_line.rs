//! Critical cavity coupling above which the J/3 Heisenberg singlet of a
//! small cluster beats the squeezed antiferromagnet, along J₂/J₁.

use std::sync::Arc;

use tci::basis::SectorBasis;
use tci::eigensolve::{lowest_eigenpairs, EigenRequest};
use tci::lattice::{LatticeCluster, LatticeKind, LatticeSpec};
use tci::operators::{ModelParams, SpinOperator};
use tci::variational::{self as var, AfmPhase, HeisenbergReference};

fn main() -> tci::Result<()> {
    let cluster = Arc::new(LatticeCluster::build(LatticeSpec::new(LatticeKind::Square, [4, 0], [0, 4]))?);
    let n = cluster.n_sites();
    let basis = Arc::new(SectorBasis::enumerate(cluster, 0)?.reduce(0, Some(1))?);
    let grid = [0.0, 0.1, 0.2, 0.3, 0.4];
    let mut refs = Vec::new();
    for &j2 in &grid {
        let op = SpinOperator::hamiltonian(&ModelParams::heisenberg(1.0, j2), basis.clone())?;
        let e = lowest_eigenpairs(&op, &EigenRequest::lowest(1))?.eigenvalues[0];
        let coupling = AfmPhase::SquareNeel.effective_coupling(1.0, j2);
        refs.push(HeisenbergReference { amplitude: -2.0 * e / (coupling * n as f64), provenance: format!("ED N={n}") });
    }
    for p in var::crossover_boundary(&grid, &refs, 1000, true, AfmPhase::SquareNeel)? {
        match p.critical_lambda {
            Some(l) => println!("J2/J1 = {:.2}: A = {:.4}, critical λ̄/J1 = {l:.5}", p.j2_over_j1, p.amplitude),
            None => println!("J2/J1 = {:.2}: A = {:.4}, {}", p.j2_over_j1, p.amplitude, p.note.unwrap_or_default()),
        }
    }
    Ok(())
}
