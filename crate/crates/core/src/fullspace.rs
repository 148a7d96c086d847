//! Dense operators on the full `2^N` Hilbert space, for oracles.
//!
//! Index `c` of a full-space vector is the configuration itself, so bit `i`
//! of the index is the spin at site `i` (1 = up), as in the sector bases.

use nalgebra::DMatrix;

use crate::basis::SectorBasis;
use crate::lattice::LatticeCluster;
use crate::operators::ModelParams;
use crate::{Error, Result, C64};

/// Largest site count accepted by the full-space builders.
pub const MAX_SITES: usize = 14;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Spin-1/2 matrices in the (down, up) = (bit 0, bit 1) ordering.
pub fn pauli_half() -> [[[C64; 2]; 2]; 3] {
    let h = C64::new(0.5, 0.0);
    let ih = C64::new(0.0, 0.5);
    [[[ZERO, h], [h, ZERO]], [[ZERO, ih], [-ih, ZERO]], [[-h, ZERO], [ZERO, h]]]
}

/// Classical Ising energy `Σ J_ij s_i s_j` of a configuration.
pub fn ising_energy(cluster: &LatticeCluster, j1: f64, j2: f64, c: u64) -> f64 {
    let mut e = 0.0;
    for (bonds, j) in [(cluster.bonds1(), j1), (cluster.bonds2(), j2)] {
        for b in bonds {
            let s = if (c >> b.i ^ c >> b.j) & 1 == 0 { 0.25 } else { -0.25 };
            e += j * b.multiplicity as f64 * s;
        }
    }
    e
}

fn check_size(n: usize) -> Result<()> {
    if n > MAX_SITES {
        return Err(Error::DimensionTooLargeForOracle { dim: 1 << n.min(63), limit: 1 << MAX_SITES });
    }
    Ok(())
}

/// `Σ_ij a_i b_j S^α_i S^β_j`-type two-site operator placed on sites `i`,
/// `j` with the 4×4 matrix `op` indexed `(bit_i + 2 bit_j)`.
pub fn add_two_site(m: &mut DMatrix<C64>, n: usize, i: usize, j: usize, op: &[[C64; 4]; 4], scale: f64) {
    for c in 0..1usize << n {
        let col = (c >> i & 1) | (c >> j & 1) << 1;
        for (row, line) in op.iter().enumerate() {
            let v = line[col];
            if v == ZERO {
                continue;
            }
            let r = (c & !(1 << i) & !(1 << j)) | (row & 1) << i | (row >> 1 & 1) << j;
            m[(r, c)] += v * scale;
        }
    }
}

/// Kronecker product `a ⊗ b` of two single-site operators as a two-site
/// operator indexed `(bit_first + 2 bit_second)`.
pub fn two_site_product(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> [[C64; 4]; 4] {
    let mut out = [[ZERO; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            out[r][c] = a[r & 1][c & 1] * b[r >> 1][c >> 1];
        }
    }
    out
}

/// Bond list `(i, j, J·multiplicity)`.
pub fn weighted_bonds(cluster: &LatticeCluster, j1: f64, j2: f64) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for (bonds, j) in [(cluster.bonds1(), j1), (cluster.bonds2(), j2)] {
        out.extend(bonds.iter().map(|b| (b.i, b.j, j * b.multiplicity as f64)));
    }
    out
}

/// Collective `S^α = Σ_i S^α_i`.
pub fn collective(n: usize, alpha: usize) -> DMatrix<C64> {
    let s = pauli_half()[alpha];
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for c in 0..dim {
        for i in 0..n {
            let b = c >> i & 1;
            for (r_bit, row) in s.iter().enumerate() {
                let v = row[b];
                if v != ZERO {
                    m[((c & !(1 << i)) | r_bit << i, c)] += v;
                }
            }
        }
    }
    m
}

/// Matrix-free `Σ_i w_i S^α_i v` on a full-space vector.
pub fn apply_weighted_spin(v: &[C64], n: usize, weights: &[f64], alpha: usize) -> Vec<C64> {
    let s = pauli_half()[alpha];
    let mut out = vec![ZERO; v.len()];
    for (c, &a) in v.iter().enumerate() {
        if a == ZERO {
            continue;
        }
        for (i, &w) in weights.iter().enumerate().take(n) {
            if w == 0.0 {
                continue;
            }
            let b = c >> i & 1;
            for (r_bit, row) in s.iter().enumerate() {
                let m = row[b];
                if m != ZERO {
                    out[(c & !(1 << i)) | r_bit << i] += m * a * w;
                }
            }
        }
    }
    out
}

/// Full-space TCI Hamiltonian from its defining sum of squares.
pub fn tci_matrix(cluster: &LatticeCluster, params: &ModelParams) -> DMatrix<C64> {
    let n = cluster.n_sites();
    let lam = params.effective_lambda(n);
    let sx = collective(n, 0);
    let sy = collective(n, 1);
    let mut h = (&sx * &sx + &sy * &sy) * C64::new(lam, 0.0);
    let z = pauli_half()[2];
    let zz = two_site_product(&z, &z);
    let (j1, j2) = match params.variant {
        crate::operators::Variant::CavityOnly => (0.0, 0.0),
        _ => (params.j1, params.j2),
    };
    for (i, j, k) in weighted_bonds(cluster, j1, j2) {
        add_two_site(&mut h, n, i, j, &zz, k);
    }
    h
}

/// Full-space `scale · Σ J_ij S_i·S_j`.
pub fn heisenberg_matrix(cluster: &LatticeCluster, j1: f64, j2: f64, scale: f64) -> DMatrix<C64> {
    let n = cluster.n_sites();
    let dim = 1usize << n;
    let mut h = DMatrix::zeros(dim, dim);
    let s = pauli_half();
    let dot: [[C64; 4]; 4] = {
        let mut acc = [[ZERO; 4]; 4];
        for a in &s {
            let t = two_site_product(a, a);
            for r in 0..4 {
                for c in 0..4 {
                    acc[r][c] += t[r][c];
                }
            }
        }
        acc
    };
    for (i, j, k) in weighted_bonds(cluster, j1, j2) {
        add_two_site(&mut h, n, i, j, &dot, k * scale);
    }
    h
}

/// Full-space `S²`.
pub fn s_squared(n: usize) -> DMatrix<C64> {
    (0..3).map(|a| {
        let s = collective(n, a);
        &s * &s
    })
    .fold(DMatrix::zeros(1 << n, 1 << n), |acc, m| acc + m)
}

/// Places amplitudes over `basis` into the full space, expanding reduced
/// bases.
pub fn embed(basis: &SectorBasis, amplitudes: &[C64]) -> Vec<C64> {
    let mut out = vec![ZERO; 1usize << basis.n_sites()];
    for (i, &a) in amplitudes.iter().enumerate() {
        for (c, w) in basis.orbit_amplitudes(i) {
            out[c as usize] += a * w;
        }
    }
    out
}

/// Restricts a full-space vector to a plain sector basis.
pub fn restrict(basis: &SectorBasis, full: &[C64]) -> Result<Vec<C64>> {
    if basis.is_reduced() {
        return Err(Error::BasisMismatch);
    }
    Ok(basis.states().iter().map(|&c| full[c as usize]).collect())
}

/// `⊗_i u` for a single-site unitary `u`.
pub fn uniform_product(n: usize, u: &[[C64; 2]; 2]) -> Result<DMatrix<C64>> {
    check_size(n)?;
    let dim = 1usize << n;
    Ok(DMatrix::from_fn(dim, dim, |r, c| {
        (0..n).map(|i| u[r >> i & 1][c >> i & 1]).product()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spin_algebra() {
        let n = 3;
        let [x, y, z] = [0, 1, 2].map(|a| collective(n, a));
        let comm = &x * &y - &y * &x;
        let iz = &z * C64::new(0.0, 1.0);
        assert!((comm - iz).norm() < 1e-13);
        let s2 = s_squared(n);
        // 3 spins: S = 3/2 (×4 states) and S = 1/2 (×4 states)
        let mut e: Vec<f64> = s2.symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        assert!(e[..4].iter().all(|v| (v - 0.75).abs() < 1e-12));
        assert!(e[4..].iter().all(|v| (v - 3.75).abs() < 1e-12));
    }

    #[test]
    fn two_spin_full_space() {
        let cl = LatticeCluster::dimer();
        let h = tci_matrix(&cl, &ModelParams::tci(1.0, 0.0, 1.0));
        let mut e: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        for (a, b) in e.iter().zip([-0.25, 1.25, 1.25, 1.75]) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn product_rotation_is_unitary() {
        let (s, c) = 0.3f64.sin_cos();
        let u = [[C64::new(c, 0.0), C64::new(-s, 0.0)], [C64::new(s, 0.0), C64::new(c, 0.0)]];
        let r = uniform_product(4, &u).unwrap();
        assert!((&r * r.adjoint() - DMatrix::identity(16, 16)).norm() < 1e-13);
        assert!(uniform_product(MAX_SITES + 1, &u).is_err());
    }
}
