//! Two-sublattice squeezed antiferromagnet ansatz.
//!
//! The state interpolates between the classical Néel/stripe product state
//! (θ = 0) and the singlet-projected antiferromagnet (θ → ∞):
//!
//! ```text
//! |θ⟩ = 𝒜 Σ_{n=0}^{2s} (−tanh θ)^n |s−n⟩_A |n−s⟩_B,   s = N/4
//! ```
//!
//! Energies are evaluated from the sublattice structure factors through
//! `E(θ) = λN[𝒮_xx(0) + 𝒮_yy(0)] − 2J 𝒮_zz(Q)`. The exact Dicke sums are
//! accumulated in the log domain so that `N = 10⁴` and `θ ≈ 20` are safe.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::basis::{binomial, SectorBasis, StateVector};
use crate::lattice::{LatticeCluster, LatticeKind};
use crate::{Error, Result, C64};

/// Grid resolution of the coarse θ scan preceding golden-section refinement.
const GRID_POINTS: usize = 4000;
const THETA_TOL: f64 = 1e-10;

/// Classical order the two sublattices describe.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AfmPhase {
    SquareNeel,
    SquareStripe,
    TriangularStripe,
}

impl AfmPhase {
    /// Effective Ising coupling between the two sublattices.
    pub fn effective_coupling(self, j1: f64, j2: f64) -> f64 {
        match self {
            AfmPhase::SquareNeel => j1 - j2,
            AfmPhase::SquareStripe => j2,
            AfmPhase::TriangularStripe => 0.5 * (j1 + j2),
        }
    }

    /// Sublattice-A membership of every site: checkerboard for square
    /// Néel, alternating columns for square stripe, alternating rows along
    /// the second primitive axis for triangular stripe.
    pub fn sublattices(self, cluster: &LatticeCluster) -> Result<Vec<bool>> {
        let want = match self {
            AfmPhase::SquareNeel | AfmPhase::SquareStripe => LatticeKind::Square,
            AfmPhase::TriangularStripe => LatticeKind::Triangular,
        };
        let spec = cluster.spec().filter(|_| cluster.kind() == want).ok_or_else(|| {
            Error::InvalidLattice(format!("{self:?} needs a {want:?} torus, got {:?}", cluster.kind()))
        })?;
        let parity = |c: [i64; 2]| -> i64 {
            match self {
                AfmPhase::SquareNeel => c[0] + c[1],
                AfmPhase::SquareStripe => c[0],
                AfmPhase::TriangularStripe => c[1],
            }
            .rem_euclid(2)
        };
        if parity(spec.t1) != 0 || parity(spec.t2) != 0 {
            return Err(Error::InvalidLattice(format!("torus {:?}, {:?} frustrates {self:?} order", spec.t1, spec.t2)));
        }
        Ok(cluster.cells().iter().map(|&c| parity(c) == 0).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub n_sites: usize,
    /// Effective sublattice coupling `J`, see [`AfmPhase::effective_coupling`].
    pub coupling: f64,
    /// `λ`, or `λ̄` when `rescaled`.
    pub lambda: f64,
    pub rescaled: bool,
    pub phase: AfmPhase,
}

impl AnsatzSpec {
    pub fn new(n_sites: usize, coupling: f64, lambda: f64, rescaled: bool, phase: AfmPhase) -> Result<Self> {
        let spec = Self { n_sites, coupling, lambda, rescaled, phase };
        spec.validate()?;
        Ok(spec)
    }

    /// Rescaled square-Néel spec with `J = 1`.
    pub fn rescaled(n_sites: usize, lambda_bar: f64) -> Result<Self> {
        Self::new(n_sites, 1.0, lambda_bar, true, AfmPhase::SquareNeel)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 4 || !self.n_sites.is_multiple_of(4) {
            return Err(Error::InvalidParams(format!("N = {} must be a positive multiple of 4", self.n_sites)));
        }
        if self.coupling <= 0.0 || !self.coupling.is_finite() {
            return Err(Error::InvalidParams(format!("coupling J = {} must be positive", self.coupling)));
        }
        if self.lambda < 0.0 || !self.lambda.is_finite() {
            return Err(Error::InvalidParams(format!("cavity coupling {} must be non-negative", self.lambda)));
        }
        Ok(())
    }

    /// Cavity coupling `λ` as it enters the Hamiltonian.
    pub fn cavity_lambda(&self) -> f64 {
        if self.rescaled {
            self.lambda * self.n_sites as f64
        } else {
            self.lambda
        }
    }

    /// `λ̄ = λ/N`.
    pub fn lambda_bar(&self) -> f64 {
        self.cavity_lambda() / self.n_sites as f64
    }

    /// Upper end of the θ search bracket, `ln N + 5`.
    pub fn theta_max(&self) -> f64 {
        (self.n_sites as f64).ln() + 5.0
    }

    fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..*self }
    }

    fn energy_from(&self, sxx0: f64, szz_q: f64) -> f64 {
        2.0 * self.cavity_lambda() * self.n_sites as f64 * sxx0 - 2.0 * self.coupling * szz_q
    }
}

/// Sublattice structure factors of `|θ⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureFactors {
    pub sxx0: f64,
    pub sxx_q: f64,
    pub szz_q: f64,
    /// Normalization `𝒜`.
    pub normalization: f64,
}

/// Dicke-sum weights `p_n = 𝒜² tanh^{2n} θ` and the powers of `tanh θ`.
struct DickeWeights {
    s: f64,
    ln_tanh: f64,
    tanh: f64,
    /// `ln 𝒜²`.
    ln_norm2: f64,
    probs: Vec<f64>,
}

impl DickeWeights {
    fn new(n_sites: usize, theta: f64) -> Self {
        let two_s = n_sites / 2;
        let e = (-2.0 * theta).exp();
        // ln tanh θ without cancellation at large θ
        let ln_tanh = (-e).ln_1p() - e.ln_1p();
        let w: Vec<f64> = (0..=two_s).map(|k| if k == 0 { 1.0 } else { (2.0 * k as f64 * ln_tanh).exp() }).collect();
        let z: f64 = w.iter().sum();
        Self {
            s: two_s as f64 / 2.0,
            ln_tanh,
            tanh: theta.tanh(),
            ln_norm2: -z.ln(),
            probs: w.into_iter().map(|x| x / z).collect(),
        }
    }

    /// `tanh^p θ` for `p > 0`.
    fn tanh_pow(&self, p: f64) -> f64 {
        (p * self.ln_tanh).exp()
    }
}

/// Exact finite sums for `𝒮_xx(0)`, `𝒮_xx(Q)`, `𝒮_zz(Q)` and `𝒜`.
pub fn exact_structure_factors(n_sites: usize, theta: f64) -> StructureFactors {
    let d = DickeWeights::new(n_sites, theta);
    let (s, t) = (d.s, d.tanh);
    let (mut sxx0, mut sxx_q, mut szz) = (0.0, 0.0, 0.0);
    for (k, &p) in d.probs.iter().enumerate() {
        let m = s - k as f64;
        let diag = s * (s + 1.0) - m * m;
        let hop = s * (s + 1.0) - m * (m - 1.0);
        sxx0 += p * (diag - t * hop);
        sxx_q += p * (diag + t * hop);
        szz += p * m * m;
    }
    let n = n_sites as f64;
    StructureFactors { sxx0: sxx0 / n, sxx_q: sxx_q / n, szz_q: 4.0 * szz / n, normalization: (0.5 * d.ln_norm2).exp() }
}

/// `E(θ)` from the exact Dicke sums, with `𝒮_yy = 𝒮_xx`.
pub fn variational_energy(spec: &AnsatzSpec, theta: f64) -> f64 {
    let f = exact_structure_factors(spec.n_sites, theta);
    spec.energy_from(f.sxx0, f.szz_q)
}

/// Cross terms `⟨θ|O|θ̄⟩/N` between the ansatz and its spin-flipped
/// partner, together with the overlap `⟨θ|θ̄⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffDiagonalFactors {
    pub overlap: f64,
    pub sxx0: f64,
    pub syy0: f64,
    pub sxx_q: f64,
    pub szz_q: f64,
}

pub fn off_diagonal_factors(n_sites: usize, theta: f64) -> OffDiagonalFactors {
    let d = DickeWeights::new(n_sites, theta);
    let s = d.s;
    let n = n_sites as f64;
    let f = s * (s + 1.0) * (2.0 * s + 1.0) / 3.0;
    let e = (-2.0 * theta).exp();
    let one_minus_t = 2.0 * e / (1.0 + e);
    let one_plus_t = 2.0 / (1.0 + e);
    let common = d.ln_norm2.exp() * f / n;
    let odd = d.tanh_pow(2.0 * s - 1.0);
    let even = d.tanh_pow(2.0 * s);
    let sxx0 = -common * odd * one_minus_t * one_minus_t;
    OffDiagonalFactors {
        overlap: d.ln_norm2.exp() * (2.0 * s + 1.0) * even,
        sxx0,
        syy0: sxx0,
        sxx_q: common * odd * one_plus_t * one_plus_t,
        szz_q: 4.0 * common * even,
    }
}

/// Energies of the parity-symmetrized states `|θ,±⟩ ∝ |θ⟩ ± |θ̄⟩` at a
/// common θ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizedEnergies {
    pub e_plus: f64,
    pub e_minus: f64,
    /// `|E₊ − E₋|`, evaluated without the cancellation in the difference.
    pub gap: f64,
}

pub fn symmetrized_energies(spec: &AnsatzSpec, theta: f64) -> SymmetrizedEnergies {
    let diag = exact_structure_factors(spec.n_sites, theta);
    let off = off_diagonal_factors(spec.n_sites, theta);
    let e11 = spec.energy_from(diag.sxx0, diag.szz_q);
    let e12 = spec.energy_from(off.sxx0, off.szz_q);
    let ov = off.overlap;
    let plus = symmetrized_structure_factors(spec.n_sites, theta, 1);
    let minus = symmetrized_structure_factors(spec.n_sites, theta, -1);
    let e_plus = spec.energy_from(plus.sxx0, plus.szz_q);
    let e_minus = spec.energy_from(minus.sxx0, minus.szz_q);
    // the closed form loses all digits once the overlap approaches one
    let gap = if ov < 0.5 { 2.0 * (e12 - ov * e11).abs() / (1.0 - ov * ov) } else { (e_plus - e_minus).abs() };
    SymmetrizedEnergies { e_plus, e_minus, gap }
}

/// Structure factors of `|θ,±⟩`, summed over the Dicke coefficients
/// `tanh^n θ ± tanh^{2s−n} θ` so that no cancellation occurs as the
/// overlap goes to one.
pub fn symmetrized_structure_factors(n_sites: usize, theta: f64, parity: i8) -> StructureFactors {
    let d = DickeWeights::new(n_sites, theta);
    let two_s = n_sites / 2;
    let s = d.s;
    let coeff: Vec<f64> = (0..=two_s)
        .map(|k| {
            let (lo, hi) = (k.min(two_s - k), k.max(two_s - k));
            let power = |p: usize| if p == 0 { 0.0 } else { p as f64 * d.ln_tanh };
            let base = power(lo).exp();
            let rest = power(hi - lo);
            if parity >= 0 {
                base * (1.0 + rest.exp())
            } else {
                // antisymmetric: sign flips across the midpoint
                let v = -base * rest.exp_m1();
                if k <= two_s - k { v } else { -v }
            }
        })
        .collect();
    let z: f64 = coeff.iter().map(|c| c * c).sum();
    let (mut sxx0, mut sxx_q, mut szz) = (0.0, 0.0, 0.0);
    for k in 0..=two_s {
        let m = s - k as f64;
        let c2 = coeff[k] * coeff[k] / z;
        let diag = s * (s + 1.0) - m * m;
        let hop = if k < two_s { coeff[k] * coeff[k + 1] / z * (s * (s + 1.0) - m * (m - 1.0)) } else { 0.0 };
        sxx0 += c2 * diag - hop;
        sxx_q += c2 * diag + hop;
        szz += c2 * m * m;
    }
    let n = n_sites as f64;
    let off = off_diagonal_factors(n_sites, theta);
    let sign = if parity >= 0 { 1.0 } else { -1.0 };
    StructureFactors {
        sxx0: sxx0 / n,
        sxx_q: sxx_q / n,
        szz_q: 4.0 * szz / n,
        normalization: (1.0 / (1.0 + sign * off.overlap)).sqrt(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactSum,
    Bosonic,
    Asymptotic,
}

/// Parity-resolved summary at the optimum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizedSummary {
    /// `E₊`, `E₋` and their splitting at the symmetry-broken optimum θ*.
    pub at_theta_star: SymmetrizedEnergies,
    pub theta_plus: f64,
    pub e_plus_min: f64,
    pub theta_minus: f64,
    pub e_minus_min: f64,
    /// `|min E₊ − min E₋|` with θ re-minimized per parity.
    pub gap_reminimized: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationalResult {
    pub theta_star: f64,
    pub energy: f64,
    pub sxx0: f64,
    pub sxx_q: f64,
    pub szz_q: f64,
    pub method: Method,
    /// The minimum sits at the upper end of the search bracket.
    pub at_boundary: bool,
    pub symmetrized: Option<SymmetrizedSummary>,
}

/// Minimum of a scalar curve on `[0, theta_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveMinimum {
    pub theta: f64,
    pub energy: f64,
    pub at_boundary: bool,
}

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > THETA_TOL {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

fn sample(f: &impl Fn(f64) -> f64, theta_max: f64, points: usize) -> (Vec<f64>, Vec<f64>) {
    let xs: Vec<f64> = (0..points).map(|i| theta_max * i as f64 / (points - 1) as f64).collect();
    let ys = xs.iter().map(|&x| f(x)).collect();
    (xs, ys)
}

/// Global minimum on `[0, theta_max]`: coarse grid, then golden section in
/// the bracketing cells.
pub fn minimize_curve(f: impl Fn(f64) -> f64, theta_max: f64) -> CurveMinimum {
    let (xs, ys) = sample(&f, theta_max, GRID_POINTS);
    let i = ys.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap_or(0);
    let last = xs.len() - 1;
    if i == last {
        return CurveMinimum { theta: theta_max, energy: ys[last], at_boundary: true };
    }
    let (theta, energy) = golden_section(&f, xs[i.saturating_sub(1)], xs[i + 1]);
    if energy <= ys[i] {
        CurveMinimum { theta, energy, at_boundary: false }
    } else {
        CurveMinimum { theta: xs[i], energy: ys[i], at_boundary: false }
    }
}

/// Strict interior local minima of a curve sampled on `points` nodes.
pub fn interior_minima(f: impl Fn(f64) -> f64, theta_max: f64, points: usize) -> Vec<CurveMinimum> {
    let (xs, ys) = sample(&f, theta_max, points);
    (1..xs.len() - 1)
        .filter(|&i| ys[i] < ys[i - 1] && ys[i] < ys[i + 1])
        .map(|i| {
            let (theta, energy) = golden_section(&f, xs[i - 1], xs[i + 1]);
            CurveMinimum { theta, energy, at_boundary: false }
        })
        .collect()
}

/// Minimizes the exact-sum energy and fills in the parity-resolved
/// energies.
pub fn minimize_theta(spec: &AnsatzSpec) -> VariationalResult {
    let theta_max = spec.theta_max();
    let min = minimize_curve(|x| variational_energy(spec, x), theta_max);
    let factors = exact_structure_factors(spec.n_sites, min.theta);
    let plus = minimize_curve(|x| symmetrized_energies(spec, x).e_plus, theta_max);
    let minus = minimize_curve(|x| symmetrized_energies(spec, x).e_minus, theta_max);
    VariationalResult {
        theta_star: min.theta,
        energy: min.energy,
        sxx0: factors.sxx0,
        sxx_q: factors.sxx_q,
        szz_q: factors.szz_q,
        method: Method::ExactSum,
        at_boundary: min.at_boundary,
        symmetrized: Some(SymmetrizedSummary {
            at_theta_star: symmetrized_energies(spec, min.theta),
            theta_plus: plus.theta,
            e_plus_min: plus.energy,
            theta_minus: minus.theta,
            e_minus_min: minus.energy,
            gap_reminimized: (plus.energy - minus.energy).abs(),
        }),
    }
}

/// Dyson–Maleev structure factors, with the spin-wave validity flag
/// `sinh²θ ≤ 2s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BosonicFactors {
    pub sxx0: f64,
    pub sxx_q: f64,
    pub szz_q: f64,
    pub valid: bool,
}

pub fn bosonic_structure_factors(n_sites: usize, theta: f64) -> BosonicFactors {
    let n = n_sites as f64;
    let sh2 = theta.sinh().powi(2);
    let depletion = 1.0 - 4.0 * sh2 / n;
    BosonicFactors {
        sxx0: 0.25 * (-2.0 * theta).exp() * depletion,
        sxx_q: 0.25 * (2.0 * theta).exp() * depletion,
        szz_q: n / 4.0 - 2.0 * sh2 * (1.0 - 2.0 * (2.0 * theta).cosh() / n),
        valid: sh2 <= n / 2.0,
    }
}

pub fn bosonic_energy(spec: &AnsatzSpec, theta: f64) -> f64 {
    let f = bosonic_structure_factors(spec.n_sites, theta);
    spec.energy_from(f.sxx0, f.szz_q)
}

/// Large-N expansion of the bosonic energy keeping the terms that decide
/// whether an interior minimum exists.
pub fn leading_order_energy(spec: &AnsatzSpec, theta: f64) -> f64 {
    let (n, j, lam) = (spec.n_sites as f64, spec.coupling, spec.cavity_lambda());
    let u = (2.0 * theta).exp();
    -0.5 * j * n + 0.5 * lam * n / u + j * u - j * u * u / n - 0.5 * lam - 2.0 * j
}

/// `27λ̄/2J ≥ 1`: the bosonic description is expected to lose its minimum.
pub fn bosonic_breakdown(spec: &AnsatzSpec) -> bool {
    breakdown_ratio(spec) >= 1.0
}

/// `27λ̄/2J`.
pub fn breakdown_ratio(spec: &AnsatzSpec) -> f64 {
    13.5 * spec.lambda_bar() / spec.coupling
}

/// Lowest interior minimum of the bosonic curve, if there is one.
pub fn bosonic_minimum(spec: &AnsatzSpec) -> Option<VariationalResult> {
    let min = interior_minima(|x| bosonic_energy(spec, x), spec.theta_max(), 4 * GRID_POINTS)
        .into_iter()
        .min_by(|a, b| a.energy.total_cmp(&b.energy))?;
    let f = bosonic_structure_factors(spec.n_sites, min.theta);
    Some(VariationalResult {
        theta_star: min.theta,
        energy: min.energy,
        sxx0: f.sxx0,
        sxx_q: f.sxx_q,
        szz_q: f.szz_q,
        method: Method::Bosonic,
        at_boundary: false,
        symmetrized: None,
    })
}

pub fn leading_order_minimum(spec: &AnsatzSpec) -> Option<CurveMinimum> {
    interior_minima(|x| leading_order_energy(spec, x), spec.theta_max(), 4 * GRID_POINTS)
        .into_iter()
        .min_by(|a, b| a.energy.total_cmp(&b.energy))
}

/// Large-N optimum of the rescaled model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Asymptotics {
    pub beta: f64,
    pub eta: f64,
    pub theta_star: f64,
    pub energy: f64,
    pub szz_q: f64,
    pub sxx_q: f64,
}

fn beta_eta(spec: &AnsatzSpec) -> Result<(f64, f64)> {
    let x = breakdown_ratio(spec);
    if x >= 1.0 {
        return Err(Error::OutOfValidity(format!("27λ̄/2J = {x:.4} ≥ 1")));
    }
    let beta = 2.0 / 3f64.sqrt()
        * ((std::f64::consts::FRAC_PI_2 + (x.sqrt() / (1.0 - x).sqrt()).atan()) / 3.0).cos();
    // stationarity of the leading-order curve: β² = 1 − 2√η
    let eta = spec.lambda_bar() / (2.0 * spec.coupling * beta * beta);
    Ok((beta, eta))
}

pub fn asymptotic_quantities(spec: &AnsatzSpec) -> Result<Asymptotics> {
    let (beta, eta) = beta_eta(spec)?;
    let (n, j, lb) = (spec.n_sites as f64, spec.coupling, spec.lambda_bar());
    let root = eta.sqrt();
    Ok(Asymptotics {
        beta,
        eta,
        theta_star: 0.25 * (eta * n * n).ln(),
        energy: -0.5 * j * n + 0.5 * n * (beta + 1.0 / beta) * (2.0 * j * lb).sqrt()
            - 0.5 * lb * n * (1.0 + 1.0 / (beta * beta)),
        szz_q: 0.25 * n * (1.0 - 2.0 * (root - eta)),
        sxx_q: 0.25 * n * (root - eta),
    })
}

pub fn asymptotic_gap(spec: &AnsatzSpec) -> Result<f64> {
    let (beta, eta) = beta_eta(spec)?;
    let root = eta.sqrt();
    let b2 = beta * beta;
    Ok(4.0 * spec.coupling * spec.n_sites as f64
        * (-1.0 / root).exp()
        * ((1.0 - root) * (1.0 + b2) - (1.0 - b2) / (3.0 * root)))
}

/// Asymptotics packaged as a [`VariationalResult`].
pub fn asymptotic_result(spec: &AnsatzSpec) -> Result<VariationalResult> {
    let a = asymptotic_quantities(spec)?;
    let gap = asymptotic_gap(spec)?;
    Ok(VariationalResult {
        theta_star: a.theta_star,
        energy: a.energy,
        sxx0: f64::NAN,
        sxx_q: a.sxx_q,
        szz_q: a.szz_q,
        method: Method::Asymptotic,
        at_boundary: false,
        symmetrized: Some(SymmetrizedSummary {
            at_theta_star: SymmetrizedEnergies { e_plus: f64::NAN, e_minus: f64::NAN, gap },
            theta_plus: f64::NAN,
            e_plus_min: f64::NAN,
            theta_minus: f64::NAN,
            e_minus_min: f64::NAN,
            gap_reminimized: gap,
        }),
    })
}

/// Heisenberg singlet energy `E_Heis = −A J N/2` together with where `A`
/// came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeisenbergReference {
    pub amplitude: f64,
    pub provenance: String,
}

/// Cavity coupling, `λ̄` or `λ` as `template` is rescaled or not, at which
/// `E(θ*) = −A J N/2`.
pub fn crossover_coupling(template: &AnsatzSpec, amplitude: f64) -> Result<f64> {
    let n = template.n_sites as f64;
    let j = template.coupling;
    let target = -0.5 * amplitude * j * n;
    let excess = |lam: f64| minimize_theta_energy(&template.with_lambda(lam)) - target;
    // E(θ*) rises from −JN/2 at λ = 0 towards the singlet limit −J(N+4)/6
    let singlet = -j * (n + 4.0) / 6.0;
    if amplitude >= 1.0 {
        return Err(Error::NoCrossing(format!("A = {amplitude} ≥ 1: the squeezed state is at or below E_Heis for all λ")));
    }
    if singlet <= target {
        return Err(Error::NoCrossing(format!("A = {amplitude}: squeezed AFM stays below E_Heis = {target:.6}")));
    }
    let mut hi = 1e-3 * j;
    while excess(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e12 * j {
            return Err(Error::NoCrossing(format!("A = {amplitude}: no sign change up to λ = {hi:e}")));
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-12 * hi.max(1e-12) {
        let mid = 0.5 * (lo + hi);
        if excess(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn minimize_theta_energy(spec: &AnsatzSpec) -> f64 {
    minimize_curve(|x| variational_energy(spec, x), spec.theta_max()).energy
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossoverPoint {
    pub j2_over_j1: f64,
    pub coupling: f64,
    pub amplitude: f64,
    pub provenance: String,
    /// Critical `λ̄/J₁` (or `λ/J₁` unrescaled); `None` when there is no
    /// crossing, with the reason in `note`.
    pub critical_lambda: Option<f64>,
    pub note: Option<String>,
}

/// Crossover line over a `J₂/J₁` grid, one Heisenberg reference per grid
/// point. `J₁ = 1`.
pub fn crossover_boundary(
    j2_over_j1: &[f64],
    references: &[HeisenbergReference],
    n_sites: usize,
    rescaled: bool,
    phase: AfmPhase,
) -> Result<Vec<CrossoverPoint>> {
    if j2_over_j1.len() != references.len() {
        return Err(Error::InvalidParams("one Heisenberg reference per grid point is required".into()));
    }
    j2_over_j1
        .iter()
        .zip(references)
        .map(|(&ratio, r)| {
            let coupling = phase.effective_coupling(1.0, ratio);
            let spec = AnsatzSpec::new(n_sites, coupling, 0.0, rescaled, phase)?;
            let (critical_lambda, note) = match crossover_coupling(&spec, r.amplitude) {
                Ok(l) => (Some(l), None),
                Err(Error::NoCrossing(msg)) => (None, Some(msg)),
                Err(e) => return Err(e),
            };
            Ok(CrossoverPoint {
                j2_over_j1: ratio,
                coupling,
                amplitude: r.amplitude,
                provenance: r.provenance.clone(),
                critical_lambda,
                note,
            })
        })
        .collect()
}

/// `|θ⟩` (or `|θ,±⟩`) over the `M = 0` sector of `basis`, with
/// `sublattice_a[i]` marking the A sites.
pub fn ansatz_state(basis: Arc<SectorBasis>, sublattice_a: &[bool], theta: f64, parity: Option<i8>) -> Result<StateVector> {
    let n = basis.n_sites();
    let a_mask: u64 = sublattice_a.iter().enumerate().filter(|(_, &a)| a).map(|(i, _)| 1u64 << i).sum();
    if sublattice_a.len() != n || a_mask.count_ones() as usize * 2 != n || !n.is_multiple_of(4) {
        return Err(Error::InvalidParams("ansatz needs N ≡ 0 mod 4 split into equal sublattices".into()));
    }
    if basis.is_reduced() || basis.two_m() != 0 {
        return Err(Error::BasisMismatch);
    }
    let two_s = (n / 2) as u32;
    let t = theta.tanh();
    let amp = |c: u64| -> f64 {
        let up_b = (c & !a_mask).count_ones();
        (-t).powi(up_b as i32) / binomial(two_s as u64, up_b as u64) as f64
    };
    let full = (1u64 << n) - 1;
    let sign = parity.map(|p| if p >= 0 { 1.0 } else { -1.0 });
    let amplitudes = basis
        .states()
        .iter()
        .map(|&c| {
            let v = match sign {
                None => amp(c),
                Some(sg) => amp(c) + sg * amp(!c & full),
            };
            C64::new(v, 0.0)
        })
        .collect();
    let mut state = StateVector::new(basis, amplitudes)?;
    if state.normalize() == 0.0 {
        return Err(Error::InvalidParams(format!("|θ,{parity:?}⟩ vanishes at θ = {theta}")));
    }
    Ok(state)
}

/// Explicit `|θ⟩` on `N ≤ 16` free spins, A = even sites, B = odd sites.
pub fn brute_force_ansatz_state(n_sites: usize, theta: f64, parity: Option<i8>) -> Result<StateVector> {
    if n_sites > 16 {
        return Err(Error::DimensionTooLargeForOracle { dim: 1 << n_sites.min(63), limit: 1 << 16 });
    }
    let basis = Arc::new(SectorBasis::enumerate(Arc::new(LatticeCluster::free_spins(n_sites)), 0)?);
    let a: Vec<bool> = (0..n_sites).map(|i| i % 2 == 0).collect();
    ansatz_state(basis, &a, theta, parity)
}
