//! Diagnostics on eigenstates: structure factors, total spin, the
//! strong-cavity Heisenberg mapping and the fidelity susceptibility.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{dot, SectorBasis, StateVector};
use crate::eigensolve::{dense_eigen, lowest_eigenpairs, EigenRequest, EigenResult};
use crate::lattice::{LatticeCluster, WavevectorLabel};
use crate::operators::{LinearOperator, ModelParams, SpinOperator, Variant};
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    Xx,
    Yy,
    Zz,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StarSum {
    pub label: WavevectorLabel,
    pub value: f64,
    pub star_size: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StructureFactorResult {
    pub component: Component,
    /// Cartesian momenta, in cluster order.
    pub momenta: Vec<[f64; 2]>,
    pub values: Vec<f64>,
    /// Sums over the star of each commensurate labeled wavevector.
    pub stars: Vec<StarSum>,
}

impl StructureFactorResult {
    pub fn star(&self, label: WavevectorLabel) -> Option<f64> {
        self.stars.iter().find(|s| s.label == label).map(|s| s.value)
    }

    /// `(1/N_q) Σ_q 𝒮(q)`.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// `⟨S^α_i S^α_j⟩` for a state over a plain basis (reduced states are
/// expanded first).
pub fn correlation_matrix(state: &StateVector, component: Component) -> Result<DMatrix<f64>> {
    let state = state.expand()?;
    let basis = &*state.basis;
    let n = basis.n_sites();
    let amps = &state.amplitudes;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let mask = (1u64 << i) | (1u64 << j);
            let mut acc = C64::new(0.0, 0.0);
            for (idx, &c) in basis.states().iter().enumerate() {
                let a = amps[idx];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let differ = (c >> i ^ c >> j) & 1 == 1;
                match component {
                    Component::Zz => {
                        acc += a.norm_sqr() * if differ { -0.25 } else { 0.25 };
                    }
                    Component::Xx | Component::Yy => {
                        let Some(k) = basis.index_of(c ^ mask) else { continue };
                        // σ^y σ^y picks up -1 when both spins point the same way
                        let sign = if component == Component::Yy && !differ { -1.0 } else { 1.0 };
                        acc += amps[k].conj() * a * (0.25 * sign);
                    }
                }
            }
            acc.re
        })
        .collect();
    let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    let mut m = DMatrix::from_diagonal_element(n, n, 0.25);
    for (&(i, j), v) in pairs.iter().zip(values) {
        m[(i, j)] = v / norm2;
        m[(j, i)] = v / norm2;
    }
    Ok(m)
}

/// Fourier transform of a correlation matrix over the cluster momenta.
pub fn structure_factor_from_correlations(
    corr: &DMatrix<f64>,
    cluster: &LatticeCluster,
    component: Component,
) -> StructureFactorResult {
    let n = cluster.n_sites();
    let pos = cluster.positions();
    let momenta: Vec<[f64; 2]> = cluster.momenta().iter().map(|m| m.k).collect();
    let values = momenta
        .iter()
        .map(|k| {
            let phase: Vec<C64> = pos.iter().map(|r| C64::from_polar(1.0, k[0] * r[0] + k[1] * r[1])).collect();
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    acc += phase[i] * phase[j].conj() * corr[(i, j)];
                }
            }
            acc.re / n as f64
        })
        .collect::<Vec<f64>>();
    let stars = cluster
        .wavevector_labels()
        .iter()
        .filter_map(|&label| cluster.ordering_wavevector(label).ok())
        .map(|w| StarSum { label: w.label, value: w.star.iter().map(|&i| values[i]).sum(), star_size: w.star.len() })
        .collect();
    StructureFactorResult { component, momenta, values, stars }
}

/// `𝒮_αα(q) = N⁻¹ Σ_ij e^{iq·(r_i − r_j)} ⟨S^α_i S^α_j⟩` at every cluster
/// momentum.
pub fn structure_factor(state: &StateVector, component: Component) -> Result<StructureFactorResult> {
    let corr = correlation_matrix(state, component)?;
    Ok(structure_factor_from_correlations(&corr, state.basis.cluster(), component))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TotalSpin {
    pub s_squared: f64,
    pub variance: f64,
    /// `S` solving `S(S+1) = ⟨S²⟩`, when the variance is below threshold.
    pub spin: Option<f64>,
}

/// `⟨S²⟩`, its variance, and the implied total spin.
pub fn total_spin(state: &StateVector) -> Result<TotalSpin> {
    let op = SpinOperator::s_squared(state.basis.clone());
    let mut w = vec![C64::new(0.0, 0.0); state.amplitudes.len()];
    op.apply(&state.amplitudes, &mut w);
    let norm2: f64 = state.amplitudes.iter().map(|a| a.norm_sqr()).sum();
    let mean = dot(&state.amplitudes, &w).re / norm2;
    let second: f64 = w.iter().map(|a| a.norm_sqr()).sum::<f64>() / norm2;
    let variance = (second - mean * mean).max(0.0);
    let spin = (variance < 1e-6 * mean.abs().max(1.0)).then(|| ((1.0 + 4.0 * mean.max(0.0)).sqrt() - 1.0) / 2.0);
    Ok(TotalSpin { s_squared: mean, variance, spin })
}

/// `⟨S²⟩` for each eigenvector, with degenerate clusters rotated so that
/// each member has sharp total spin.
pub fn resolve_total_spin(basis: &Arc<SectorBasis>, result: &mut EigenResult, cluster_tol: f64) -> Vec<f64> {
    let s2 = SpinOperator::s_squared(basis.clone());
    let n = result.eigenvalues.len();
    let scale = result.eigenvalues.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let mut out = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (result.eigenvalues[end] - result.eigenvalues[end - 1]).abs() <= cluster_tol * scale {
            end += 1;
        }
        let block: Vec<Vec<C64>> = result.eigenvectors[start..end].to_vec();
        let applied: Vec<Vec<C64>> = block
            .iter()
            .map(|v| {
                let mut w = vec![C64::new(0.0, 0.0); v.len()];
                s2.apply(v, &mut w);
                w
            })
            .collect();
        let k = end - start;
        let m = DMatrix::from_fn(k, k, |a, b| dot(&block[a], &applied[b]));
        let eig = dense_eigen(m, 1e-8, 0);
        for (r, (val, coeffs)) in eig.eigenvalues.iter().zip(&eig.eigenvectors).enumerate() {
            let mut v = vec![C64::new(0.0, 0.0); block[0].len()];
            for (c, b) in coeffs.iter().zip(&block) {
                v.iter_mut().zip(b).for_each(|(o, x)| *o += c * x);
            }
            result.eigenvectors[start + r] = v;
            out[start + r] = *val;
        }
        start = end;
    }
    out
}

/// Which `(momentum, parity)` blocks of `M = 0` the mapping check visits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MappingSectors {
    /// Every momentum, both parities.
    All,
    /// Zero momentum and the first nonzero momentum, both parities.
    ZeroAndOne,
    Explicit(Vec<(usize, i8)>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatchedLevel {
    pub tci: f64,
    pub heisenberg: f64,
    pub difference: f64,
    pub matched: bool,
    /// `(momentum index, parity)` of the TCI and Heisenberg levels.
    pub tci_sector: (usize, i8),
    pub heisenberg_sector: (usize, i8),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumComparison {
    pub lambda: f64,
    pub tolerance: f64,
    pub sectors: Vec<(usize, i8)>,
    pub levels: Vec<MatchedLevel>,
}

impl SpectrumComparison {
    pub fn max_difference(&self) -> f64 {
        self.levels.iter().map(|l| l.difference.abs()).fold(0.0, f64::max)
    }

    pub fn all_matched(&self) -> bool {
        self.levels.iter().all(|l| l.matched)
    }
}

/// Default tolerance `10 J₁² / λ`.
pub fn mapping_tolerance(j1: f64, lambda: f64) -> f64 {
    10.0 * j1 * j1 / lambda
}

fn solve_in(op: &SpinOperator, count: usize, req: &EigenRequest) -> Result<EigenResult> {
    let dim = op.dim();
    let req = EigenRequest { n_eigenpairs: count.min(dim), ..req.clone() };
    lowest_eigenpairs(op, &req)
}

/// An energy with the `(momentum, parity)` block it came from.
type TaggedLevel = (f64, (usize, i8));

/// Pairs the lowest `M = 0` TCI levels with the lowest singlets of the
/// 1/3-normalized Heisenberg model on the same cluster.
pub fn heisenberg_mapping_check(
    params: &ModelParams,
    cluster: Arc<LatticeCluster>,
    n_levels: usize,
    sectors: &MappingSectors,
    req: &EigenRequest,
) -> Result<SpectrumComparison> {
    let lambda = params.effective_lambda(cluster.n_sites());
    let plain = SectorBasis::enumerate(cluster.clone(), 0)?;
    let n_k = cluster.momenta().len();
    let list: Vec<(usize, i8)> = match sectors {
        MappingSectors::All => (0..n_k).flat_map(|k| [(k, 1), (k, -1)]).collect(),
        MappingSectors::ZeroAndOne => {
            let mut v = vec![(0, 1), (0, -1)];
            if n_k > 1 {
                v.extend([(1, 1), (1, -1)]);
            }
            v
        }
        MappingSectors::Explicit(v) => v.clone(),
    };
    let singlet_parity: i8 = if (cluster.n_sites() / 2).is_multiple_of(2) { 1 } else { -1 };
    let tci_params = ModelParams { variant: Variant::Tci, ..*params };
    let heis_params = ModelParams { variant: Variant::Heisenberg, third_scaled_heisenberg: true, ..*params };

    let per_sector: Vec<Result<(Vec<TaggedLevel>, Vec<TaggedLevel>)>> = list
        .par_iter()
        .map(|&(k, p)| {
            let basis = Arc::new(plain.reduce(k, Some(p))?);
            if basis.dim() == 0 {
                return Ok((Vec::new(), Vec::new()));
            }
            let tci = SpinOperator::hamiltonian(&tci_params, basis.clone())?;
            let t = solve_in(&tci, n_levels, req)?;
            let tci_levels = t.eigenvalues.iter().map(|&e| (e, (k, p))).collect();
            if p != singlet_parity {
                return Ok((tci_levels, Vec::new()));
            }
            let heis = SpinOperator::hamiltonian(&heis_params, basis.clone())?;
            let mut want = (4 * n_levels).min(basis.dim());
            loop {
                let mut h = solve_in(&heis, want, req)?;
                let s2 = resolve_total_spin(&basis, &mut h, 1e-8);
                let singlets: Vec<(f64, (usize, i8))> = h
                    .eigenvalues
                    .iter()
                    .zip(&s2)
                    .filter(|(_, s)| s.abs() < 1e-6)
                    .map(|(&e, _)| (e, (k, p)))
                    .take(n_levels)
                    .collect();
                if singlets.len() >= n_levels || want == basis.dim() {
                    return Ok((tci_levels, singlets));
                }
                want = (2 * want).min(basis.dim());
            }
        })
        .collect();

    let mut tci_all = Vec::new();
    let mut heis_all = Vec::new();
    for r in per_sector {
        let (t, h) = r?;
        tci_all.extend(t);
        heis_all.extend(h);
    }
    tci_all.sort_by(|a, b| a.0.total_cmp(&b.0));
    heis_all.sort_by(|a, b| a.0.total_cmp(&b.0));
    if heis_all.len() < n_levels {
        return Err(Error::InsufficientSingletLevels { found: heis_all.len(), searched: list.len(), needed: n_levels });
    }
    let tolerance = mapping_tolerance(params.j1.max(f64::MIN_POSITIVE), lambda);
    let levels = tci_all
        .iter()
        .zip(&heis_all)
        .take(n_levels)
        .map(|(&(t, ts), &(h, hs))| MatchedLevel {
            tci: t,
            heisenberg: h,
            difference: t - h,
            matched: (t - h).abs() <= tolerance,
            tci_sector: ts,
            heisenberg_sector: hs,
        })
        .collect();
    Ok(SpectrumComparison { lambda, tolerance, sectors: list, levels })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Peak {
    pub index: usize,
    /// Parabola-refined position and height.
    pub x: f64,
    pub y: f64,
}

/// Interior local maxima of `ys` over `xs`, refined by a parabola through
/// each maximum and its two neighbors.
pub fn find_peaks(xs: &[f64], ys: &[f64]) -> Vec<Peak> {
    let mut out = Vec::new();
    for i in 1..ys.len().saturating_sub(1) {
        if !(ys[i] > ys[i - 1] && ys[i] >= ys[i + 1]) {
            continue;
        }
        let (x0, x1, x2) = (xs[i - 1], xs[i], xs[i + 1]);
        let (y0, y1, y2) = (ys[i - 1], ys[i], ys[i + 1]);
        let d01 = (y1 - y0) / (x1 - x0);
        let d12 = (y2 - y1) / (x2 - x1);
        let a = (d12 - d01) / (x2 - x0);
        let (x, y) = if a < 0.0 {
            let xv = ((x0 + x1) / 2.0 - d01 / (2.0 * a)).clamp(x0, x2);
            (xv, y0 + d01 * (xv - x0) + a * (xv - x0) * (xv - x1))
        } else {
            (x1, y1)
        };
        out.push(Peak { index: i, x, y });
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FidelityCurve {
    pub lambdas: Vec<f64>,
    pub chi: Vec<f64>,
    pub delta: f64,
    /// Grid points where the ground state was degenerate and the overlap was
    /// replaced by the principal-angle determinant.
    pub degenerate: Vec<bool>,
    pub peaks: Vec<Peak>,
}

/// Ground-state subspace at one parameter point.
fn ground_space(op: &SpinOperator, req: &EigenRequest, degeneracy: f64) -> Result<(Vec<Vec<C64>>, f64)> {
    let probe = 4.min(op.dim());
    let r = solve_in(op, probe, req)?;
    let scale = r.eigenvalues.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let count = r.eigenvalues.iter().take_while(|&&e| e - r.eigenvalues[0] <= degeneracy * scale).count();
    let gap = r.eigenvalues.get(count).map_or(f64::INFINITY, |e| e - r.eigenvalues[0]);
    Ok((r.eigenvectors.into_iter().take(count).collect(), gap))
}

/// `|det(U†V)|` for orthonormal column sets of equal size.
fn subspace_overlap(u: &[Vec<C64>], v: &[Vec<C64>]) -> f64 {
    if u.len() != v.len() {
        return 0.0;
    }
    let m = DMatrix::from_fn(u.len(), v.len(), |a, b| dot(&u[a], &v[b]));
    m.determinant().norm()
}

/// `χ_F = −2 ln|⟨ψ(λ)|ψ(λ+δλ)⟩| / δλ²` along a grid of `params.lambda`
/// values, in the sector `basis`.
pub fn fidelity_susceptibility(
    params: &ModelParams,
    basis: Arc<SectorBasis>,
    lambdas: &[f64],
    delta: f64,
    req: &EigenRequest,
) -> Result<FidelityCurve> {
    let degeneracy = 1e-9;
    let points: Vec<Result<(f64, bool)>> = lambdas
        .iter()
        .map(|&lam| {
            let at = |l: f64| -> Result<(Vec<Vec<C64>>, f64)> {
                let p = ModelParams { lambda: l, ..*params };
                ground_space(&SpinOperator::hamiltonian(&p, basis.clone())?, req, degeneracy)
            };
            let (u, _) = at(lam)?;
            let (v, _) = at(lam + delta)?;
            let overlap = if u.len() == 1 && v.len() == 1 { dot(&u[0], &v[0]).norm() } else { subspace_overlap(&u, &v) };
            let chi = (-2.0 * overlap.min(1.0).ln() / (delta * delta)).max(0.0);
            Ok((chi, u.len() > 1))
        })
        .collect();
    let mut chi = Vec::with_capacity(lambdas.len());
    let mut degenerate = Vec::with_capacity(lambdas.len());
    for p in points {
        let (c, d) = p?;
        chi.push(c);
        degenerate.push(d);
    }
    let peaks = find_peaks(lambdas, &chi);
    Ok(FidelityCurve { lambdas: lambdas.to_vec(), chi, delta, degenerate, peaks })
}

/// Second-order perturbative `χ_F = Σ_{n≠0} |⟨n|∂H|0⟩|² / (E_n − E_0)²`
/// from a full dense diagonalization.
pub fn fidelity_perturbative(params: &ModelParams, basis: Arc<SectorBasis>) -> Result<f64> {
    let h = SpinOperator::hamiltonian(params, basis.clone())?;
    let full = crate::eigensolve::dense_oracle(&h)?;
    let gap = full.eigenvalues[1] - full.eigenvalues[0];
    if gap < 1e-9 * full.eigenvalues[0].abs().max(1.0) {
        return Err(Error::DegenerateGroundState { gap });
    }
    let dh = SpinOperator::lambda_derivative(params, basis);
    let mut w = vec![C64::new(0.0, 0.0); dh.dim()];
    dh.apply(&full.eigenvectors[0], &mut w);
    Ok(full
        .eigenvectors
        .iter()
        .zip(&full.eigenvalues)
        .skip(1)
        .map(|(v, e)| dot(v, &w).norm_sqr() / (e - full.eigenvalues[0]).powi(2))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{LatticeKind, LatticeSpec};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn square(a: i64, b: i64) -> Arc<LatticeCluster> {
        Arc::new(LatticeCluster::build(LatticeSpec::new(LatticeKind::Square, [a, 0], [0, b])).unwrap())
    }

    #[test]
    fn neel_product_state() {
        let cl = square(4, 4);
        let b = Arc::new(SectorBasis::enumerate(cl.clone(), 0).unwrap());
        let neel: u64 = (0..16).filter(|&s| (s % 4 + s / 4) % 2 == 0).map(|s| 1u64 << s).sum();
        let v = StateVector::basis_state(b, neel).unwrap();
        let zz = structure_factor(&v, Component::Zz).unwrap();
        let m = cl.ordering_wavevector(WavevectorLabel::M).unwrap().star[0];
        for (i, &s) in zz.values.iter().enumerate() {
            let target = if i == m { 4.0 } else { 0.0 };
            assert!((s - target).abs() < 1e-12, "q#{i}: {s}");
        }
        assert!((zz.star(WavevectorLabel::M).unwrap() - 4.0).abs() < 1e-12);
        let xx = structure_factor(&v, Component::Xx).unwrap();
        assert!(xx.values.iter().all(|&s| (s - 0.25).abs() < 1e-12));
    }

    #[test]
    fn two_spin_singlet() {
        let cl = Arc::new(LatticeCluster::dimer());
        let b = Arc::new(SectorBasis::enumerate(cl, 0).unwrap());
        let h = 0.5f64.sqrt();
        let v = StateVector::new(b, vec![C64::new(h, 0.0), C64::new(-h, 0.0)]).unwrap();
        let zz = structure_factor(&v, Component::Zz).unwrap();
        assert!(zz.values[0].abs() < 1e-14);
        assert!((zz.values[1] - 0.5).abs() < 1e-14);
        assert_eq!(total_spin(&v).unwrap().spin, Some(0.0));
    }

    #[test]
    fn polarized_total_spin() {
        let cl = Arc::new(LatticeCluster::build(LatticeSpec::chain(6)).unwrap());
        let b = Arc::new(SectorBasis::enumerate(cl, 6).unwrap());
        let v = StateVector::basis_state(b, 0b111111).unwrap();
        let s = total_spin(&v).unwrap();
        assert!((s.spin.unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn correlations_match_full_space() {
        let cl = square(2, 4);
        let plain = Arc::new(SectorBasis::enumerate(cl.clone(), 0).unwrap());
        let h = SpinOperator::hamiltonian(&ModelParams::tci(1.0, 0.5, 0.7), plain.clone()).unwrap();
        let g = crate::eigensolve::dense_oracle(&h).unwrap();
        let v = StateVector::new(plain.clone(), g.eigenvectors[0].clone()).unwrap();
        let full = nalgebra::DVector::from_vec(crate::fullspace::embed(&plain, &v.amplitudes));
        let ops: Vec<Vec<DMatrix<C64>>> = (0..3)
            .map(|a| {
                (0..8)
                    .map(|i| {
                        let mut m = DMatrix::zeros(256, 256);
                        let s = crate::fullspace::pauli_half()[a];
                        for c in 0..256usize {
                            let bit = c >> i & 1;
                            for r_bit in 0..2 {
                                m[((c & !(1 << i)) | r_bit << i, c)] += s[r_bit][bit];
                            }
                        }
                        m
                    })
                    .collect()
            })
            .collect();
        for (a, comp) in [Component::Xx, Component::Yy, Component::Zz].into_iter().enumerate() {
            let corr = correlation_matrix(&v, comp).unwrap();
            for i in 0..8 {
                for j in 0..8 {
                    let e = (full.adjoint() * &ops[a][i] * &ops[a][j] * &full)[(0, 0)].re;
                    assert!((corr[(i, j)] - e).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn cavity_eigenstates_have_sharp_spin() {
        let cl = square(2, 4);
        let plain = SectorBasis::enumerate(cl, 0).unwrap();
        let b = Arc::new(plain.reduce(0, Some(1)).unwrap());
        let mut r = crate::eigensolve::dense_oracle(&SpinOperator::cavity(1.0, b.clone())).unwrap();
        let s2 = resolve_total_spin(&b, &mut r, 1e-8);
        for (v, e) in r.eigenvectors.iter().zip(&s2) {
            let t = total_spin(&StateVector::new(b.clone(), v.clone()).unwrap()).unwrap();
            assert!(t.variance < 1e-9);
            assert!((t.s_squared - e).abs() < 1e-9);
        }
    }

    #[test]
    fn peak_refinement_recovers_vertex() {
        let xs: Vec<f64> = (0..21).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - (x - 1.23f64).powi(2)).collect();
        let p = find_peaks(&xs, &ys);
        assert_eq!(p.len(), 1);
        assert!((p[0].x - 1.23).abs() < 1e-12);
        assert!((p[0].y - 3.0).abs() < 1e-12);
        let mono: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!(find_peaks(&xs, &mono).is_empty());
    }

    #[test]
    fn two_spin_fidelity_vanishes() {
        let cl = Arc::new(LatticeCluster::dimer());
        let b = Arc::new(SectorBasis::enumerate(cl, 0).unwrap());
        let p = ModelParams::tci(1.0, 0.0, 0.0);
        let grid = [0.1, 0.5, 1.0, 2.0];
        let f = fidelity_susceptibility(&p, b, &grid, 1e-4, &EigenRequest::default().dense()).unwrap();
        assert!(f.chi.iter().all(|&c| c.abs() < 1e-6), "{:?}", f.chi);
    }

    #[test]
    fn flat_hamiltonian_has_zero_susceptibility() {
        let cl = square(2, 4);
        let plain = SectorBasis::enumerate(cl, 0).unwrap();
        let b = Arc::new(plain.reduce(0, Some(1)).unwrap());
        let p = ModelParams { j1: 1.0, j2: 0.5, ..ModelParams::heisenberg(1.0, 0.5) };
        let f = fidelity_susceptibility(&p, b, &[0.5, 1.0], 1e-4, &EigenRequest::default().dense()).unwrap();
        assert!(f.chi.iter().all(|&c| c.abs() < 1e-8));
    }

    fn random_state(b: Arc<SectorBasis>, seed: u64) -> StateVector {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let amps = (0..b.dim()).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        let mut v = StateVector::new(b, amps).unwrap();
        v.normalize();
        v
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn sum_rule_on_random_states(seed in any::<u64>(), two_m in prop_oneof![Just(0), Just(2), Just(-4)]) {
            let b = Arc::new(SectorBasis::enumerate(square(3, 4), two_m).unwrap());
            let v = random_state(b, seed);
            for c in [Component::Xx, Component::Yy, Component::Zz] {
                let s = structure_factor(&v, c).unwrap();
                prop_assert!((s.mean() - 0.25).abs() < 1e-9);
            }
        }
    }
}
