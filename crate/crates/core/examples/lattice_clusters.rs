//! Builds the periodic clusters used in the phase diagrams and prints their
//! geometry: site count, bond counts, momenta and ordering wavevectors.

use tci::lattice::{LatticeCluster, LatticeKind, LatticeSpec};

fn main() -> tci::Result<()> {
    let specs = [
        ("square 4x4", LatticeSpec::new(LatticeKind::Square, [4, 0], [0, 4])),
        ("square tilted N=8", LatticeSpec::new(LatticeKind::Square, [2, 2], [2, -2])),
        ("triangular 3x3", LatticeSpec::new(LatticeKind::Triangular, [3, 0], [0, 3])),
        ("kagome 2x2", LatticeSpec::new(LatticeKind::Kagome, [2, 0], [0, 2])),
        ("chain 10", LatticeSpec::chain(10)),
    ];
    for (name, spec) in specs {
        let c = LatticeCluster::build(spec)?;
        println!(
            "{name:>18}: N = {:2}, {} J1 bonds, {} J2 bonds, {} momenta, coordination {:?}",
            c.n_sites(),
            c.bonds1().len(),
            c.bonds2().len(),
            c.momenta().len(),
            c.coordination(1)
        );
        for &label in c.wavevector_labels() {
            match c.ordering_wavevector(label) {
                Ok(q) => println!("{:>22} {label}: q = ({:.3}, {:.3}), star of {}", "", q.q[0], q.q[1], q.star.len()),
                Err(e) => println!("{:>22} {label}: {e}", ""),
            }
        }
    }
    // tori that do not tile the lattice are rejected
    let bad = LatticeCluster::build(LatticeSpec::new(LatticeKind::Square, [2, 0], [4, 0]));
    println!("degenerate torus: {}", bad.unwrap_err());
    Ok(())
}
