//! SU(2) averaging: the rotated Ising model averages to the J/3 Heisenberg
//! model, and the averaged rotation is the singlet projector.

use tci::fullspace::heisenberg_matrix;
use tci::lattice::{LatticeCluster, LatticeSpec};
use tci::projector::{singlet_projector_haar, singlet_projector_spectral, symmetrize_hamiltonian, EulerQuadrature};

fn main() -> tci::Result<()> {
    let chain = LatticeCluster::build(LatticeSpec::chain(6))?;
    let quad = EulerQuadrature::for_sites(6);
    let averaged = symmetrize_hamiltonian(&chain, 1.0, 0.4, &quad)?;
    let heisenberg = heisenberg_matrix(&chain, 1.0, 0.4, 1.0 / 3.0);
    println!("max |<H_Ising>_SU(2) - H_Heis/3| = {:.2e}", (&averaged - &heisenberg).camax());

    for n in [2, 4, 6] {
        let quad = EulerQuadrature::for_sites(n);
        let haar = singlet_projector_haar(n, &quad)?;
        let spectral = singlet_projector_spectral(n)?;
        println!(
            "N = {n}: {} quadrature nodes, trace P = {:.6}, |P_haar - P_spectral| = {:.2e}",
            quad.nodes().len(),
            haar.trace().re,
            (&haar - &spectral).camax()
        );
    }
    Ok(())
}
