//! Matrix-free spin Hamiltonians on sector bases.
//!
//! Every operator here has the shape
//!
//! ```text
//! D(c) + g Σ_{i≠j} S⁺_i S⁻_j + Σ_b h_b (S⁺_i S⁻_j + S⁻_i S⁺_j)
//! ```
//!
//! with `D` diagonal in the configuration basis. The collective piece uses
//! `S_x² + S_y² = N/2 + Σ_{i≠j} S⁺_i S⁻_j` and `S² = N/2 + M² + Σ_{i≠j} S⁺_i S⁻_j`.
//! Rows are evaluated independently (gather pattern), so `apply` is
//! parallel over output indices without write contention. One TCI apply
//! costs O(dim · N²).

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{SectorBasis, StateVector};
use crate::lattice::LatticeCluster;
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Tci,
    Heisenberg,
    Ising,
    CavityOnly,
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "tci" => Ok(Variant::Tci),
            "heisenberg" => Ok(Variant::Heisenberg),
            "ising" => Ok(Variant::Ising),
            "cavity-only" | "cavity" => Ok(Variant::CavityOnly),
            other => Err(Error::InvalidParams(format!("unknown model variant {other}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub j1: f64,
    pub j2: f64,
    /// Cavity coupling, or the rescaled coupling λ̄ when `rescaled` is set.
    pub lambda: f64,
    /// Use `λ = N λ̄`.
    #[serde(default)]
    pub rescaled: bool,
    pub variant: Variant,
    /// Heisenberg couplings carry the 1/3 of the SU(2)-averaged Ising model.
    #[serde(default = "default_true")]
    pub third_scaled_heisenberg: bool,
    /// Permit negative couplings.
    #[serde(default)]
    pub allow_negative: bool,
}

fn default_true() -> bool {
    true
}

impl ModelParams {
    pub fn tci(j1: f64, j2: f64, lambda: f64) -> Self {
        Self { j1, j2, lambda, rescaled: false, variant: Variant::Tci, third_scaled_heisenberg: true, allow_negative: false }
    }

    /// Heisenberg model with the 1/3-normalized couplings.
    pub fn heisenberg(j1: f64, j2: f64) -> Self {
        Self { variant: Variant::Heisenberg, ..Self::tci(j1, j2, 0.0) }
    }

    /// Heisenberg model `Σ J_ij S_i·S_j` without the 1/3.
    pub fn heisenberg_conventional(j1: f64, j2: f64) -> Self {
        Self { third_scaled_heisenberg: false, ..Self::heisenberg(j1, j2) }
    }

    pub fn ising(j1: f64, j2: f64) -> Self {
        Self { variant: Variant::Ising, ..Self::tci(j1, j2, 0.0) }
    }

    pub fn cavity_only(lambda: f64) -> Self {
        Self { variant: Variant::CavityOnly, ..Self::tci(0.0, 0.0, lambda) }
    }

    pub fn with_rescaled(mut self, rescaled: bool) -> Self {
        self.rescaled = rescaled;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("J1", self.j1), ("J2", self.j2), ("lambda", self.lambda)] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} = {v} is not finite")));
            }
            if v < 0.0 && !self.allow_negative {
                return Err(Error::InvalidParams(format!("{name} = {v} is negative")));
            }
        }
        Ok(())
    }

    /// Cavity coupling actually multiplying `S_x² + S_y²` on `n_sites` spins.
    pub fn effective_lambda(&self, n_sites: usize) -> f64 {
        match self.variant {
            Variant::Tci | Variant::CavityOnly if self.rescaled => self.lambda * n_sites as f64,
            Variant::Tci | Variant::CavityOnly => self.lambda,
            Variant::Heisenberg | Variant::Ising => 0.0,
        }
    }

    fn ising_couplings(&self) -> (f64, f64) {
        match self.variant {
            Variant::CavityOnly => (0.0, 0.0),
            _ => (self.j1, self.j2),
        }
    }
}

/// A linear map on `C^dim`.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// `y ← A x`.
    fn apply(&self, x: &[C64], y: &mut [C64]);

    fn is_hermitian(&self) -> bool {
        true
    }

    /// Dense matrix via unit-vector products. Implementors with cheap row
    /// access should override.
    fn to_dense(&self) -> DMatrix<C64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        let mut e = vec![C64::new(0.0, 0.0); n];
        let mut col = vec![C64::new(0.0, 0.0); n];
        for j in 0..n {
            e[j] = C64::new(1.0, 0.0);
            self.apply(&e, &mut col);
            e[j] = C64::new(0.0, 0.0);
            for i in 0..n {
                m[(i, j)] = col[i];
            }
        }
        m
    }
}

impl LinearOperator for DMatrix<C64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let n = self.nrows();
        for i in 0..n {
            y[i] = (0..n).map(|j| self[(i, j)] * x[j]).sum();
        }
    }

    fn to_dense(&self) -> DMatrix<C64> {
        self.clone()
    }
}

/// Spin operator of the form described in the module docs, bound to a
/// basis.
#[derive(Clone, Debug)]
pub struct SpinOperator {
    basis: Arc<SectorBasis>,
    diagonal: Vec<f64>,
    collective: f64,
    flip_flops: Vec<(u64, f64)>,
    /// sqrt of orbit sizes, cached for reduced bases.
    orbit_sqrt: Option<Vec<f64>>,
}

/// Terms of a spin operator before binding to a basis.
#[derive(Clone, Debug, Default)]
struct Terms {
    constant: f64,
    m_squared: f64,
    collective: f64,
    zz: Vec<(usize, usize, f64)>,
    flip_flops: Vec<(usize, usize, f64)>,
}

fn shell_terms(cluster: &LatticeCluster, j1: f64, j2: f64) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for (bonds, j) in [(cluster.bonds1(), j1), (cluster.bonds2(), j2)] {
        if j == 0.0 {
            continue;
        }
        out.extend(bonds.iter().map(|b| (b.i, b.j, j * b.multiplicity as f64)));
    }
    out
}

impl SpinOperator {
    fn bind(basis: Arc<SectorBasis>, terms: Terms) -> Self {
        let m = basis.two_m() as f64 / 2.0;
        let base = terms.constant + terms.m_squared * m * m;
        let diagonal = basis
            .states()
            .par_iter()
            .map(|&c| {
                base + terms
                    .zz
                    .iter()
                    .map(|&(i, j, k)| if (c >> i ^ c >> j) & 1 == 0 { 0.25 * k } else { -0.25 * k })
                    .sum::<f64>()
            })
            .collect();
        let flip_flops = terms
            .flip_flops
            .iter()
            .filter(|t| t.2 != 0.0)
            .map(|&(i, j, h)| ((1u64 << i) | (1u64 << j), h))
            .collect();
        let orbit_sqrt = basis
            .is_reduced()
            .then(|| (0..basis.dim()).map(|i| (basis.orbit_size(i) as f64).sqrt()).collect());
        Self { basis, diagonal, collective: terms.collective, flip_flops, orbit_sqrt }
    }

    /// The Hamiltonian selected by `params.variant`.
    pub fn hamiltonian(params: &ModelParams, basis: Arc<SectorBasis>) -> Result<Self> {
        params.validate()?;
        let cluster = basis.cluster().clone();
        let n = basis.n_sites() as f64;
        let (j1, j2) = params.ising_couplings();
        let bonds = shell_terms(&cluster, j1, j2);
        let lam = params.effective_lambda(basis.n_sites());
        let terms = match params.variant {
            Variant::Tci | Variant::CavityOnly => {
                Terms { constant: lam * n / 2.0, collective: lam, zz: bonds, ..Default::default() }
            }
            Variant::Ising => Terms { zz: bonds, ..Default::default() },
            Variant::Heisenberg => {
                let scale = if params.third_scaled_heisenberg { 1.0 / 3.0 } else { 1.0 };
                let zz: Vec<_> = bonds.iter().map(|&(i, j, k)| (i, j, k * scale)).collect();
                let flip_flops = zz.iter().map(|&(i, j, k)| (i, j, 0.5 * k)).collect();
                Terms { zz, flip_flops, ..Default::default() }
            }
        };
        Ok(Self::bind(basis, terms))
    }

    /// `S_x² + S_y²` scaled by `lambda`.
    pub fn cavity(lambda: f64, basis: Arc<SectorBasis>) -> Self {
        let n = basis.n_sites() as f64;
        Self::bind(basis, Terms { constant: lambda * n / 2.0, collective: lambda, ..Default::default() })
    }

    pub fn s_squared(basis: Arc<SectorBasis>) -> Self {
        let n = basis.n_sites() as f64;
        Self::bind(basis, Terms { constant: n / 2.0, m_squared: 1.0, collective: 1.0, ..Default::default() })
    }

    /// Derivative of the Hamiltonian with respect to its `lambda` parameter.
    pub fn lambda_derivative(params: &ModelParams, basis: Arc<SectorBasis>) -> Self {
        let scale = if params.rescaled { basis.n_sites() as f64 } else { 1.0 };
        match params.variant {
            Variant::Tci | Variant::CavityOnly => Self::cavity(scale, basis),
            _ => Self::cavity(0.0, basis),
        }
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// Calls `emit(col, value)` for every nonzero entry of row `row`,
    /// possibly several times per column.
    #[inline]
    pub fn for_each_in_row(&self, row: usize, mut emit: impl FnMut(usize, C64)) {
        let basis = &*self.basis;
        let a = basis.states()[row];
        emit(row, C64::new(self.diagonal[row], 0.0));
        let mut push = |c: u64, h: f64| {
            if let Some((col, chi)) = basis.locate(c) {
                let w = match &self.orbit_sqrt {
                    Some(s) => h * s[row] / s[col],
                    None => h,
                };
                emit(col, chi * w);
            }
        };
        if self.collective != 0.0 {
            let n = basis.n_sites();
            let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            let mut ups = a;
            while ups != 0 {
                let j = ups & ups.wrapping_neg();
                ups ^= j;
                let mut downs = !a & full;
                while downs != 0 {
                    let i = downs & downs.wrapping_neg();
                    downs ^= i;
                    push(a ^ i ^ j, self.collective);
                }
            }
        }
        for &(mask, h) in &self.flip_flops {
            let bits = a & mask;
            if bits != 0 && bits != mask {
                push(a ^ mask, h);
            }
        }
    }

    /// Dense matrix built row by row.
    pub fn dense(&self) -> DMatrix<C64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for r in 0..n {
            self.for_each_in_row(r, |c, v| m[(r, c)] += v);
        }
        m
    }

    /// `⟨v|A|v⟩` for a normalized `v`.
    pub fn expectation(&self, v: &[C64]) -> f64 {
        let mut w = vec![C64::new(0.0, 0.0); v.len()];
        self.apply(v, &mut w);
        crate::basis::dot(v, &w).re
    }

    pub fn apply_state(&self, v: &StateVector) -> Result<StateVector> {
        if !self.basis.same_space(&v.basis) {
            return Err(Error::BasisMismatch);
        }
        let mut out = StateVector::zeros(v.basis.clone());
        self.apply(&v.amplitudes, &mut out.amplitudes);
        Ok(out)
    }
}

impl LinearOperator for SpinOperator {
    fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.par_iter_mut().with_min_len(64).enumerate().for_each(|(row, out)| {
            let mut acc = C64::new(0.0, 0.0);
            self.for_each_in_row(row, |col, v| acc += v * x[col]);
            *out = acc;
        });
    }

    fn to_dense(&self) -> DMatrix<C64> {
        self.dense()
    }
}

fn apply_variant(params: ModelParams, v: &StateVector) -> Result<StateVector> {
    SpinOperator::hamiltonian(&params, v.basis.clone())?.apply_state(v)
}

/// `H_TCI v` with `params.variant` forced to TCI.
pub fn apply_tci(params: &ModelParams, v: &StateVector) -> Result<StateVector> {
    apply_variant(ModelParams { variant: Variant::Tci, ..*params }, v)
}

pub fn apply_heisenberg(params: &ModelParams, v: &StateVector) -> Result<StateVector> {
    apply_variant(ModelParams { variant: Variant::Heisenberg, ..*params }, v)
}

pub fn apply_cavity_only(lambda: f64, v: &StateVector) -> Result<StateVector> {
    SpinOperator::cavity(lambda, v.basis.clone()).apply_state(v)
}

pub fn apply_s_squared(v: &StateVector) -> Result<StateVector> {
    SpinOperator::s_squared(v.basis.clone()).apply_state(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fullspace;
    use crate::lattice::{LatticeKind, LatticeSpec};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn eigvals(m: DMatrix<C64>) -> Vec<f64> {
        let mut e: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    fn random_vec(n: usize, seed: u64) -> Vec<C64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect()
    }

    fn dimer_full() -> Vec<Arc<SectorBasis>> {
        let cl = Arc::new(LatticeCluster::dimer());
        [-2, 0, 2].map(|m| Arc::new(SectorBasis::enumerate(cl.clone(), m).unwrap())).to_vec()
    }

    fn square_2x4() -> Arc<LatticeCluster> {
        Arc::new(LatticeCluster::build(LatticeSpec::new(LatticeKind::Square, [2, 0], [0, 4])).unwrap())
    }

    #[test]
    fn two_spin_tci_spectrum() {
        let p = ModelParams::tci(1.0, 0.0, 1.0);
        let mut all: Vec<f64> = dimer_full()
            .into_iter()
            .flat_map(|b| eigvals(SpinOperator::hamiltonian(&p, b).unwrap().dense()))
            .collect();
        all.sort_by(f64::total_cmp);
        for (e, x) in all.iter().zip([-0.25, 1.25, 1.25, 1.75]) {
            assert!((e - x).abs() < 1e-12, "{all:?}");
        }
    }

    #[test]
    fn two_spin_heisenberg() {
        let b = dimer_full().remove(1);
        let e = eigvals(SpinOperator::hamiltonian(&ModelParams::heisenberg(1.0, 0.0), b.clone()).unwrap().dense());
        assert!((e[0] + 0.25).abs() < 1e-14);
        assert!((e[1] - 1.0 / 12.0).abs() < 1e-14);
        let e = eigvals(SpinOperator::hamiltonian(&ModelParams::heisenberg_conventional(1.0, 0.0), b).unwrap().dense());
        assert!((e[0] + 0.75).abs() < 1e-14);
    }

    #[test]
    fn lambda_zero_is_ising_diagonal() {
        let cl = square_2x4();
        let b = Arc::new(SectorBasis::enumerate(cl.clone(), 0).unwrap());
        let h = SpinOperator::hamiltonian(&ModelParams::tci(1.0, 0.6, 0.0), b.clone()).unwrap();
        for (r, &c) in b.states().iter().enumerate().step_by(7) {
            let v = StateVector::basis_state(b.clone(), c).unwrap();
            let hv = h.apply_state(&v).unwrap();
            let expect = fullspace::ising_energy(&cl, 1.0, 0.6, c);
            for (i, a) in hv.amplitudes.iter().enumerate() {
                let target = if i == r { expect } else { 0.0 };
                assert!((a - target).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn polarized_heisenberg_has_no_flip_flops() {
        let cl = square_2x4();
        let b = Arc::new(SectorBasis::enumerate(cl, 8).unwrap());
        let h = SpinOperator::hamiltonian(&ModelParams::heisenberg_conventional(1.0, 0.5), b).unwrap();
        // 16 J₁ + 16 J₂ bonds counted with multiplicity, each +1/4
        let total: f64 = h.diagonal()[0];
        assert!((total - (16.0 * 0.25 + 16.0 * 0.5 * 0.25)).abs() < 1e-14);
    }

    #[test]
    fn ring4_conventional_heisenberg_ground_state() {
        let cl = Arc::new(LatticeCluster::build(LatticeSpec::chain(4)).unwrap());
        let b = Arc::new(SectorBasis::enumerate(cl, 0).unwrap());
        let e = eigvals(SpinOperator::hamiltonian(&ModelParams::heisenberg_conventional(1.0, 0.0), b).unwrap().dense());
        assert!((e[0] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn cavity_spectrum_four_spins() {
        let cl = Arc::new(LatticeCluster::build(LatticeSpec::chain(4)).unwrap());
        let b = Arc::new(SectorBasis::enumerate(cl, 0).unwrap());
        let e = eigvals(SpinOperator::cavity(1.0, b).dense());
        for (x, y) in e.iter().zip([0.0, 0.0, 2.0, 2.0, 2.0, 6.0]) {
            assert!((x - y).abs() < 1e-12, "{e:?}");
        }
    }

    #[test]
    fn s_squared_values() {
        let cl = Arc::new(LatticeCluster::build(LatticeSpec::chain(4)).unwrap());
        let b = Arc::new(SectorBasis::enumerate(cl, 4).unwrap());
        assert!((SpinOperator::s_squared(b).dense()[(0, 0)].re - 6.0).abs() < 1e-14);
        let b = dimer_full().remove(1);
        let singlet = [C64::new(0.5f64.sqrt(), 0.0), C64::new(-(0.5f64.sqrt()), 0.0)];
        assert!(SpinOperator::s_squared(b).expectation(&singlet).abs() < 1e-14);
    }

    #[test]
    fn matches_full_space_construction() {
        let cl = square_2x4();
        let b = Arc::new(SectorBasis::enumerate(cl.clone(), 0).unwrap());
        let p = ModelParams::tci(1.0, 0.4, 0.7);
        let h = SpinOperator::hamiltonian(&p, b.clone()).unwrap();
        let full = fullspace::tci_matrix(&cl, &p);
        let v = random_vec(b.dim(), 3);
        let mut hv = vec![C64::new(0.0, 0.0); b.dim()];
        h.apply(&v, &mut hv);
        let vf = fullspace::embed(&b, &v);
        let hvf = &full * nalgebra::DVector::from_vec(vf);
        for (r, &c) in b.states().iter().enumerate() {
            assert!((hv[r] - hvf[c as usize]).norm() < 1e-12);
        }
    }

    #[test]
    fn reduced_sectors_reassemble_spectrum() {
        let cl = square_2x4();
        let plain = Arc::new(SectorBasis::enumerate(cl.clone(), 0).unwrap());
        let p = ModelParams::tci(1.0, 0.3, 0.9);
        let full = eigvals(SpinOperator::hamiltonian(&p, plain.clone()).unwrap().dense());
        let mut parts = Vec::new();
        for k in 0..cl.momenta().len() {
            for par in [1, -1] {
                let red = Arc::new(plain.reduce(k, Some(par)).unwrap());
                let h = SpinOperator::hamiltonian(&p, red).unwrap().dense();
                assert!((&h - h.adjoint()).norm() < 1e-12);
                parts.extend(eigvals(h));
            }
        }
        parts.sort_by(f64::total_cmp);
        assert_eq!(parts.len(), full.len());
        for (a, b) in parts.iter().zip(&full) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn reduced_matrix_elements_match_expanded_states() {
        let cl = square_2x4();
        let plain = Arc::new(SectorBasis::enumerate(cl.clone(), 0).unwrap());
        let p = ModelParams::tci(1.0, 0.5, 1.3);
        let hp = SpinOperator::hamiltonian(&p, plain.clone()).unwrap();
        for (k, par) in [(1, 1), (3, -1), (5, 1)] {
            let red = Arc::new(plain.reduce(k, Some(par)).unwrap());
            let hr = SpinOperator::hamiltonian(&p, red.clone()).unwrap();
            let u = random_vec(red.dim(), 10 + k as u64);
            let v = random_vec(red.dim(), 20 + k as u64);
            let mut hv = vec![C64::new(0.0, 0.0); red.dim()];
            hr.apply(&v, &mut hv);
            let ue = red.expand(&u, &plain).unwrap();
            let ve = red.expand(&v, &plain).unwrap();
            let mut hve = vec![C64::new(0.0, 0.0); plain.dim()];
            hp.apply(&ve, &mut hve);
            let lhs = crate::basis::dot(&ue, &hve);
            let rhs = crate::basis::dot(&u, &hv);
            assert!((lhs - rhs).norm() < 1e-10, "{lhs} {rhs}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn hermitian_on_random_vectors(seed in any::<u64>(), variant in 0usize..4, k in 0usize..8, lam in 0.0f64..5.0) {
            let cl = square_2x4();
            let plain = SectorBasis::enumerate(cl, 0).unwrap();
            let basis = Arc::new(plain.reduce(k, Some(1)).unwrap());
            let v = [Variant::Tci, Variant::Heisenberg, Variant::Ising, Variant::CavityOnly][variant];
            let p = ModelParams { variant: v, ..ModelParams::tci(1.0, 0.5, lam) };
            let h = SpinOperator::hamiltonian(&p, basis.clone()).unwrap();
            let x = random_vec(basis.dim(), seed);
            let y = random_vec(basis.dim(), seed ^ 0xabcdef);
            let (mut hx, mut hy) = (vec![C64::new(0.0, 0.0); x.len()], vec![C64::new(0.0, 0.0); x.len()]);
            h.apply(&x, &mut hx);
            h.apply(&y, &mut hy);
            let a = crate::basis::dot(&y, &hx);
            let b = crate::basis::dot(&hy, &x);
            prop_assert!((a - b).norm() < 1e-10);
        }

        #[test]
        fn s_squared_lower_bound(seed in any::<u64>(), two_m in prop_oneof![Just(-2), Just(0), Just(2), Just(4)]) {
            let cl = Arc::new(LatticeCluster::build(LatticeSpec::chain(6)).unwrap());
            let b = Arc::new(SectorBasis::enumerate(cl, two_m).unwrap());
            let mut v = random_vec(b.dim(), seed);
            let n = crate::basis::norm(&v);
            v.iter_mut().for_each(|a| *a /= n);
            let m = two_m as f64 / 2.0;
            prop_assert!(SpinOperator::s_squared(b).expectation(&v) >= m * m + m.abs() - 1e-12);
        }
    }
}
