//! Fixed-magnetization and symmetry-reduced bases of a 4x4 square cluster:
//! block dimensions, orbit sizes, and the round trip between a reduced
//! vector and its plain-basis expansion.

use std::sync::Arc;

use tci::basis::{SectorBasis, StateVector};
use tci::lattice::{LatticeCluster, LatticeKind, LatticeSpec};
use tci::variational::AfmPhase;

fn main() -> tci::Result<()> {
    let cluster = Arc::new(LatticeCluster::build(LatticeSpec::new(LatticeKind::Square, [4, 0], [0, 4]))?);
    let plain = SectorBasis::enumerate(cluster.clone(), 0)?;
    println!("M = 0: {} states", plain.dim());

    let mut total = 0;
    for k in 0..cluster.momenta().len() {
        for parity in [1, -1] {
            let block = plain.reduce(k, Some(parity))?;
            total += block.dim();
            let largest = (0..block.dim()).map(|i| block.orbit_size(i)).max().unwrap_or(0);
            println!("  {:<20} dim {:4}  largest orbit {largest}", block.label().to_string(), block.dim());
        }
    }
    println!("sum over blocks: {total}");

    // Néel state: one reduced amplitude, expanded over its orbit
    let zero = Arc::new(plain.reduce(0, Some(1))?);
    let a_sites = AfmPhase::SquareNeel.sublattices(&cluster)?;
    let neel: u64 = a_sites.iter().enumerate().filter(|(_, &a)| a).map(|(i, _)| 1u64 << i).sum();
    let state = StateVector::basis_state(zero.clone(), neel)?;
    let index = zero.locate(neel).unwrap().0;
    let full = state.expand()?;
    let nonzero = full.amplitudes.iter().filter(|a| a.norm() > 1e-12).count();
    println!("Néel in k=0, p=+1 spreads over {nonzero} configurations, norm {:.12}", full.norm());
    let back = zero.project(&full.amplitudes, &full.basis)?;
    println!("projected back: |amplitude| = {:.12}", back[index].norm());
    Ok(())
}
