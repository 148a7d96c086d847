//! Structure factors of strong- and weak-cavity ground states on the 4x4
//! square lattice at J₂/J₁ = 0 and 1.

use std::sync::Arc;

use tci::basis::{SectorBasis, StateVector};
use tci::eigensolve::{lowest_eigenpairs, EigenRequest};
use tci::lattice::{LatticeCluster, LatticeKind, LatticeSpec, WavevectorLabel};
use tci::observables::{structure_factor, total_spin, Component};
use tci::operators::{ModelParams, SpinOperator};

fn main() -> tci::Result<()> {
    let cluster = Arc::new(LatticeCluster::build(LatticeSpec::new(LatticeKind::Square, [4, 0], [0, 4]))?);
    let basis = Arc::new(SectorBasis::enumerate(cluster, 0)?);
    for (j2, lambda_bar) in [(0.0, 0.0), (0.0, 0.5), (1.0, 0.0), (1.0, 0.5)] {
        let params = ModelParams::tci(1.0, j2, lambda_bar).with_rescaled(true);
        let op = SpinOperator::hamiltonian(&params, basis.clone())?;
        let ground = lowest_eigenpairs(&op, &EigenRequest::lowest(1))?;
        let state = StateVector::new(basis.clone(), ground.eigenvectors[0].clone())?;
        let zz = structure_factor(&state, Component::Zz)?;
        let xx = structure_factor(&state, Component::Xx)?;
        let at = |f: &tci::observables::StructureFactorResult, l| f.star(l).unwrap_or(f64::NAN);
        println!(
            "J2 = {j2}, λ̄ = {lambda_bar}: E0 = {:>10.6}, <S²> = {:.3}, Szz(M) = {:.4}, Szz(X) = {:.4}, Sxx(M) = {:.4}, mean Szz = {:.6}",
            ground.eigenvalues[0],
            total_spin(&state)?.s_squared,
            at(&zz, WavevectorLabel::M),
            at(&zz, WavevectorLabel::X),
            at(&xx, WavevectorLabel::M),
            zz.mean()
        );
    }
    Ok(())
}
