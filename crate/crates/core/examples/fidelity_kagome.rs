//! Fidelity susceptibility along λ̄ on the 12-site kagome cluster, checked
//! against second-order perturbation theory at one point.

use std::sync::Arc;

use tci::basis::SectorBasis;
use tci::eigensolve::EigenRequest;
use tci::lattice::{LatticeCluster, LatticeKind, LatticeSpec};
use tci::observables::{fidelity_perturbative, fidelity_susceptibility};
use tci::operators::ModelParams;

fn main() -> tci::Result<()> {
    let cluster = Arc::new(LatticeCluster::build(LatticeSpec::new(LatticeKind::Kagome, [2, 0], [0, 2]))?);
    let basis = Arc::new(SectorBasis::enumerate(cluster, 0)?.reduce(0, Some(1))?);
    println!("k = 0, p = +1 block: {} states", basis.dim());

    let params = ModelParams::tci(1.0, 0.0, 0.0).with_rescaled(true);
    // at λ̄ = 0 the Ising ground space is degenerate and χ_F is infinite
    let lambdas: Vec<f64> = (1..=15).map(|i| i as f64 * 0.02).collect();
    let curve = fidelity_susceptibility(&params, basis.clone(), &lambdas, 1e-4, &EigenRequest::lowest(1))?;
    for (l, chi) in curve.lambdas.iter().zip(&curve.chi) {
        println!("λ̄ = {l:.2}  χ_F = {chi:.6e}");
    }
    println!("interior peaks: {}", curve.peaks.len());

    let at = ModelParams { lambda: 0.1, ..params };
    let overlap = fidelity_susceptibility(&at, basis.clone(), &[0.1], 1e-4, &EigenRequest::lowest(1).dense())?.chi[0];
    println!("λ̄ = 0.1: overlap {overlap:.6e}, perturbative {:.6e}", fidelity_perturbative(&at, basis)?);
    Ok(())
}
