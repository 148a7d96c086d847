//! Dense singlet-sector oracles for small spin systems.
//!
//! The SU(2) average of a rotation `R(ψ,φ,ϕ) = e^{-iψS_z} e^{-iφS_y} e^{-iϕS_z}`
//! is evaluated with a product quadrature: uniform nodes in the two
//! azimuthal angles and Gauss–Legendre nodes in `cos φ`. For integer total
//! spin the integrand is a trigonometric polynomial of bounded degree, so
//! enough nodes make the rule exact.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::basis::SectorBasis;
use crate::eigensolve::dense_eigen;
use crate::fullspace::{self, pauli_half};
use crate::lattice::LatticeCluster;
use crate::operators::{ModelParams, SpinOperator};
use crate::{Error, Result, C64};
use std::sync::Arc;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Largest site count for the Haar-quadrature builders.
pub const HAAR_MAX_SITES: usize = 10;
/// Largest site count for the spectral projector.
pub const SPECTRAL_MAX_SITES: usize = 12;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    // P_n(z) and its derivative by the three-term recurrence
    let legendre = |z: f64| {
        let (mut p0, mut p1) = (1.0, z);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        (p1, n as f64 * (z * p1 - p0) / (z * z - 1.0))
    };
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let dp = legendre(z).1;
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Product rule for the normalized Haar measure `dψ sinφ dφ dϕ / 8π²`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EulerQuadrature {
    pub n_psi: usize,
    pub n_phi: usize,
    pub n_polar: usize,
    psi: Vec<f64>,
    phi: Vec<f64>,
    polar: Vec<f64>,
    polar_weights: Vec<f64>,
}

impl EulerQuadrature {
    pub fn new(n_psi: usize, n_phi: usize, n_polar: usize) -> Self {
        let uniform = |n: usize| (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
        let (x, w) = gauss_legendre(n_polar);
        Self {
            n_psi,
            n_phi,
            n_polar,
            psi: uniform(n_psi),
            phi: uniform(n_phi),
            polar: x.iter().map(|c| c.acos()).collect(),
            polar_weights: w.iter().map(|w| w / 2.0).collect(),
        }
    }

    /// Smallest rule that is exact for `n_sites` spins.
    pub fn for_sites(n_sites: usize) -> Self {
        Self::new(n_sites + 1, n_sites + 1, n_sites.div_ceil(2) + 1)
    }

    pub fn doubled(&self) -> Self {
        Self::new(2 * self.n_psi, 2 * self.n_phi, 2 * self.n_polar)
    }

    pub fn exact_for(&self, n_sites: usize) -> bool {
        self.n_psi > n_sites && self.n_phi > n_sites && self.n_polar > n_sites.div_ceil(2)
    }

    /// `(ψ, φ, ϕ, weight)` for every node.
    pub fn nodes(&self) -> Vec<(f64, f64, f64, f64)> {
        let w_az = 1.0 / (self.n_psi * self.n_phi) as f64;
        let mut out = Vec::with_capacity(self.n_psi * self.n_phi * self.n_polar);
        for &a in &self.psi {
            for (&b, &wb) in self.polar.iter().zip(&self.polar_weights) {
                for &c in &self.phi {
                    out.push((a, b, c, wb * w_az));
                }
            }
        }
        out
    }
}

fn mat2_mul(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let mut c = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn adjoint2(a: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

fn z_rotation(angle: f64) -> [[C64; 2]; 2] {
    // e^{-iθ S_z} in the (down, up) ordering
    [[C64::from_polar(1.0, angle / 2.0), ZERO], [ZERO, C64::from_polar(1.0, -angle / 2.0)]]
}

fn y_rotation(angle: f64) -> [[C64; 2]; 2] {
    let (s, c) = (angle / 2.0).sin_cos();
    [[C64::new(c, 0.0), C64::new(s, 0.0)], [C64::new(-s, 0.0), C64::new(c, 0.0)]]
}

/// Single-site factor of `R(ψ, φ, ϕ)`.
pub fn site_rotation(psi: f64, phi: f64, varphi: f64) -> [[C64; 2]; 2] {
    mat2_mul(&mat2_mul(&z_rotation(psi), &y_rotation(phi)), &z_rotation(varphi))
}

/// Full-space rotation `R = ⊗_i r(ψ, φ, ϕ)`.
pub fn rotation(n_sites: usize, psi: f64, phi: f64, varphi: f64) -> Result<DMatrix<C64>> {
    fullspace::uniform_product(n_sites, &site_rotation(psi, phi, varphi))
}

fn check_even(n: usize, max: usize) -> Result<()> {
    if !n.is_multiple_of(2) || n == 0 {
        return Err(Error::InvalidParams(format!("singlets need an even number of sites, got {n}")));
    }
    if n > max {
        return Err(Error::DimensionTooLargeForOracle { dim: 1 << n, limit: 1 << max });
    }
    Ok(())
}

fn magnetization(c: usize, n: usize) -> f64 {
    c.count_ones() as f64 - n as f64 / 2.0
}

/// Projector onto `S = 0` from the null space of `S²` in the `M = 0` sector,
/// as a full-space matrix.
pub fn singlet_projector_spectral(n_sites: usize) -> Result<DMatrix<C64>> {
    check_even(n_sites, SPECTRAL_MAX_SITES)?;
    let cluster = Arc::new(LatticeCluster::free_spins(n_sites));
    let basis = SectorBasis::enumerate(cluster, 0)?;
    let s2 = SpinOperator::s_squared(Arc::new(basis.clone())).dense();
    let eig = dense_eigen(s2, 1e-8, 0);
    let dim = 1usize << n_sites;
    let mut p = DMatrix::zeros(dim, dim);
    for (val, vec) in eig.eigenvalues.iter().zip(&eig.eigenvectors) {
        if val.abs() > 1e-9 {
            continue;
        }
        for (a, &ca) in basis.states().iter().enumerate() {
            for (b, &cb) in basis.states().iter().enumerate() {
                p[(ca as usize, cb as usize)] += vec[a] * vec[b].conj();
            }
        }
    }
    Ok(p)
}

/// Singlet projector as the quadrature average of `R(Ω)`.
///
/// The rotation factorizes, so the average is the product of the three
/// one-angle averages: two diagonal phase averages around the polar one.
pub fn singlet_projector_haar(n_sites: usize, quad: &EulerQuadrature) -> Result<DMatrix<C64>> {
    check_even(n_sites, HAAR_MAX_SITES)?;
    let dim = 1usize << n_sites;
    let phase_average = |angles: &[f64]| -> Vec<C64> {
        (0..dim)
            .map(|c| {
                let m = magnetization(c, n_sites);
                angles.iter().map(|&a| C64::from_polar(1.0, -a * m)).sum::<C64>() / angles.len() as f64
            })
            .collect()
    };
    let left = phase_average(&quad.psi);
    let right = phase_average(&quad.phi);
    let factors: Vec<([[C64; 2]; 2], f64)> =
        quad.polar.iter().zip(&quad.polar_weights).map(|(&b, &w)| (y_rotation(b), w)).collect();
    let mut p = DMatrix::zeros(dim, dim);
    let cols: Vec<Vec<C64>> = (0..dim)
        .into_par_iter()
        .map(|c| {
            (0..dim)
                .map(|r| {
                    if left[r].norm() < 1e-15 || right[c].norm() < 1e-15 {
                        return ZERO;
                    }
                    let ry: C64 = factors
                        .iter()
                        .map(|(u, w)| (0..n_sites).map(|i| u[r >> i & 1][c >> i & 1]).product::<C64>() * *w)
                        .sum();
                    left[r] * ry * right[c]
                })
                .collect()
        })
        .collect();
    for (c, col) in cols.into_iter().enumerate() {
        for (r, v) in col.into_iter().enumerate() {
            p[(r, c)] = v;
        }
    }
    Ok(p)
}

/// SU(2) average of `Σ J_ij S^z_i S^z_j`.
///
/// Under the product rotation each bond term becomes `(r†σr)_i ⊗ (r†σr)_j`
/// with `σ = S^z`, so the average is assembled from one averaged two-site
/// operator.
pub fn symmetrize_hamiltonian(
    cluster: &LatticeCluster,
    j1: f64,
    j2: f64,
    quad: &EulerQuadrature,
) -> Result<DMatrix<C64>> {
    let n = cluster.n_sites();
    if n > HAAR_MAX_SITES {
        return Err(Error::DimensionTooLargeForOracle { dim: 1 << n, limit: 1 << HAAR_MAX_SITES });
    }
    let sz = pauli_half()[2];
    let mut avg = [[ZERO; 4]; 4];
    for (a, b, c, w) in quad.nodes() {
        let r = site_rotation(a, b, c);
        let o = mat2_mul(&adjoint2(&r), &mat2_mul(&sz, &r));
        let t = fullspace::two_site_product(&o, &o);
        for i in 0..4 {
            for j in 0..4 {
                avg[i][j] += t[i][j] * w;
            }
        }
    }
    let dim = 1usize << n;
    let mut h = DMatrix::zeros(dim, dim);
    for (i, j, k) in fullspace::weighted_bonds(cluster, j1, j2) {
        fullspace::add_two_site(&mut h, n, i, j, &avg, k);
    }
    Ok(h)
}

/// Same average taken over full-space rotations of the full Ising matrix.
pub fn symmetrize_hamiltonian_dense(
    cluster: &LatticeCluster,
    j1: f64,
    j2: f64,
    quad: &EulerQuadrature,
) -> Result<DMatrix<C64>> {
    let n = cluster.n_sites();
    if n > 8 {
        return Err(Error::DimensionTooLargeForOracle { dim: 1 << n, limit: 1 << 8 });
    }
    let ising = fullspace::tci_matrix(cluster, &ModelParams::ising(j1, j2));
    let dim = 1usize << n;
    let mut acc = DMatrix::zeros(dim, dim);
    for (a, b, c, w) in quad.nodes() {
        let r = rotation(n, a, b, c)?;
        acc += (r.adjoint() * &ising * &r) * C64::new(w, 0.0);
    }
    Ok(acc)
}

#[derive(Clone, Debug, Serialize)]
pub struct ProjectedSpectrumCheck {
    pub total_spin: usize,
    pub two_m: i32,
    /// `λ[S(S+1) − M²]`.
    pub cavity_energy: f64,
    /// Exact TCI levels attributed to this `(S, M)` block.
    pub exact: Vec<f64>,
    /// `E_{S,M}` plus the spectrum of the projected Ising block.
    pub projected: Vec<f64>,
    pub max_deviation: f64,
}

/// Compares the exact TCI spectrum in sector `M` with the first-order
/// picture `E_{S,M} + P_{S,M} H_Ising P_{S,M}` for total spin `S`.
pub fn projected_hamiltonian_check(
    params: &ModelParams,
    cluster: Arc<LatticeCluster>,
    total_spin: usize,
    two_m: i32,
) -> Result<ProjectedSpectrumCheck> {
    let n = cluster.n_sites();
    if n > HAAR_MAX_SITES {
        return Err(Error::DimensionTooLargeForOracle { dim: 1 << n, limit: 1 << HAAR_MAX_SITES });
    }
    let m = two_m as f64 / 2.0;
    let s = total_spin as f64;
    if 2 * total_spin > n || two_m.unsigned_abs() as usize > 2 * total_spin || !(2 * total_spin + n).is_multiple_of(2) {
        return Err(Error::InvalidSector(format!("S={total_spin}, 2M={two_m} impossible for {n} sites")));
    }
    let lam = params.effective_lambda(n);
    let basis = Arc::new(SectorBasis::enumerate(cluster.clone(), two_m)?);
    let s2 = dense_eigen(SpinOperator::s_squared(basis.clone()).dense(), 1e-8, 0);
    let target = s * (s + 1.0);
    let block: Vec<&Vec<C64>> = s2
        .eigenvalues
        .iter()
        .zip(&s2.eigenvectors)
        .filter(|(v, _)| (*v - target).abs() < 1e-8)
        .map(|(_, vec)| vec)
        .collect();
    let ising = SpinOperator::hamiltonian(&ModelParams::ising(params.j1, params.j2), basis.clone())?.dense();
    let d = block.len();
    let q = DMatrix::from_fn(basis.dim(), d, |r, c| block[c][r]);
    let proj = q.adjoint() * ising * &q;
    let cavity_energy = lam * (target - m * m);
    let mut projected: Vec<f64> =
        dense_eigen(proj, 1e-8, 0).eigenvalues.into_iter().map(|e| e + cavity_energy).collect();
    projected.sort_by(f64::total_cmp);

    let tci = ModelParams { variant: crate::operators::Variant::Tci, ..*params };
    let full = dense_eigen(SpinOperator::hamiltonian(&tci, basis)?.dense(), 1e-8, 0);
    let s_min = m.abs();
    let nearest_spin = |e: f64| -> f64 {
        let mut best = (f64::INFINITY, s_min);
        let mut sp = s_min;
        while sp <= n as f64 / 2.0 + 1e-9 {
            let d = (e - lam * (sp * (sp + 1.0) - m * m)).abs();
            if d < best.0 {
                best = (d, sp);
            }
            sp += 1.0;
        }
        best.1
    };
    let exact: Vec<f64> =
        full.eigenvalues.iter().copied().filter(|&e| (nearest_spin(e) - s).abs() < 1e-9).collect();
    let max_deviation = if exact.len() == projected.len() {
        exact.iter().zip(&projected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    Ok(ProjectedSpectrumCheck { total_spin, two_m, cavity_energy, exact, projected, max_deviation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{LatticeKind, LatticeSpec};

    fn trace(m: &DMatrix<C64>) -> f64 {
        m.trace().re
    }

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(5);
        for k in 0..10 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "degree {k}");
        }
    }

    #[test]
    fn spectral_ranks() {
        for (n, rank) in [(2, 1.0), (4, 2.0), (6, 5.0)] {
            let p = singlet_projector_spectral(n).unwrap();
            assert!((trace(&p) - rank).abs() < 1e-10);
        }
    }

    #[test]
    fn haar_matches_spectral() {
        for n in [2, 4, 6] {
            let quad = EulerQuadrature::for_sites(n);
            let h = singlet_projector_haar(n, &quad).unwrap();
            let s = singlet_projector_spectral(n).unwrap();
            assert!((&h - &s).camax() < 1e-10, "N={n}");
            assert!((&h * &h - &h).norm() < 1e-9);
            assert!((&h - h.adjoint()).norm() < 1e-10);
            let doubled = singlet_projector_haar(n, &quad.doubled()).unwrap();
            assert!((&doubled - &h).camax() < 1e-12);
        }
    }

    #[test]
    fn haar_projector_commutes_with_translations() {
        let cl = LatticeCluster::build(LatticeSpec::new(LatticeKind::Square, [2, 0], [0, 3])).unwrap();
        let p = singlet_projector_haar(6, &EulerQuadrature::for_sites(6)).unwrap();
        for perm in cl.translations() {
            let t = DMatrix::from_fn(64, 64, |r, c| {
                let img: usize = (0..6).filter(|&s| c >> s & 1 == 1).map(|s| 1 << perm[s]).sum();
                if img == r { C64::new(1.0, 0.0) } else { ZERO }
            });
            assert!((&t * &p - &p * &t).norm() < 1e-9);
        }
    }

    #[test]
    fn rotations_are_unitary() {
        let quad = EulerQuadrature::for_sites(4);
        for (a, b, c, _) in quad.nodes().into_iter().step_by(7) {
            let r = rotation(4, a, b, c).unwrap();
            assert!((&r * r.adjoint() - DMatrix::identity(16, 16)).camax() < 1e-12);
        }
    }

    #[test]
    fn rotation_generators() {
        // d/dφ at φ = 0 of the y factor gives -i S_y
        let eps = 1e-6;
        let r = y_rotation(eps);
        let sy = pauli_half()[1];
        for i in 0..2 {
            for j in 0..2 {
                let id = if i == j { 1.0 } else { 0.0 };
                let deriv = (r[i][j] - C64::new(id, 0.0)) / eps;
                assert!((deriv - C64::new(0.0, -1.0) * sy[i][j]).norm() < 1e-5);
            }
        }
    }

    #[test]
    fn bond_average_is_a_third_of_the_heisenberg_coupling() {
        let dimer = LatticeCluster::dimer();
        let avg = symmetrize_hamiltonian(&dimer, 1.0, 0.0, &EulerQuadrature::for_sites(2)).unwrap();
        let heis = fullspace::heisenberg_matrix(&dimer, 1.0, 0.0, 1.0 / 3.0);
        assert!((&avg - &heis).camax() < 1e-13);
        let zero = symmetrize_hamiltonian(&dimer, 0.0, 0.0, &EulerQuadrature::for_sites(2)).unwrap();
        assert!(zero.camax() == 0.0);
    }

    #[test]
    fn two_site_route_matches_full_rotation() {
        let ring = LatticeCluster::build(LatticeSpec::chain(4)).unwrap();
        let quad = EulerQuadrature::for_sites(4);
        let a = symmetrize_hamiltonian(&ring, 1.0, 0.3, &quad).unwrap();
        let b = symmetrize_hamiltonian_dense(&ring, 1.0, 0.3, &quad).unwrap();
        assert!((&a - &b).camax() < 1e-12);
    }

    #[test]
    fn uncoupled_projection_is_exact() {
        let ring = Arc::new(LatticeCluster::build(LatticeSpec::chain(6)).unwrap());
        for (s, m) in [(0, 0), (1, 0), (2, 2), (3, -6)] {
            let c = projected_hamiltonian_check(&ModelParams::cavity_only(2.0), ring.clone(), s, m).unwrap();
            assert!(c.max_deviation < 1e-10, "{c:?}");
            assert!(c.exact.iter().all(|e| (e - c.cavity_energy).abs() < 1e-10));
        }
    }

    #[test]
    fn projected_deviation_scales_inversely_with_lambda() {
        let ring = Arc::new(LatticeCluster::build(LatticeSpec::chain(6)).unwrap());
        let dev = |lam: f64| {
            projected_hamiltonian_check(&ModelParams::tci(1.0, 0.5, lam), ring.clone(), 0, 0).unwrap().max_deviation
        };
        let (a, b) = (dev(1e3), dev(1e4));
        assert!(a < 1e-2);
        assert!((a / b - 10.0).abs() < 1.0, "{a} {b}");
    }
}
