//! Every level of the two-site model, sector by sector, next to the closed
//! forms -J/4, λ+J/4 (twice) and 2λ-J/4.

use std::sync::Arc;

use tci::basis::SectorBasis;
use tci::eigensolve::dense_oracle;
use tci::lattice::LatticeCluster;
use tci::operators::{ModelParams, SpinOperator};

fn main() -> tci::Result<()> {
    let dimer = Arc::new(LatticeCluster::dimer());
    let (j, lambda) = (1.0, 0.6);
    let params = ModelParams::tci(j, 0.0, lambda);
    for two_m in [-2, 0, 2] {
        let basis = Arc::new(SectorBasis::enumerate(dimer.clone(), two_m)?);
        let levels = dense_oracle(&SpinOperator::hamiltonian(&params, basis)?)?.eigenvalues;
        println!("2M = {two_m:2}: {levels:?}");
    }
    println!("expected: {:?}", [-j / 4.0, lambda + j / 4.0, lambda + j / 4.0, 2.0 * lambda - j / 4.0]);
    Ok(())
}
