//! Finite periodic clusters of the chain, square, triangular and kagome
//! lattices.
//!
//! A cluster is the quotient of the infinite lattice by the superlattice
//! spanned by two torus vectors `t1`, `t2`, given in integer units of the
//! primitive vectors. Sites are indexed `cell * n_sub + sublattice`, with
//! cells ordered by their canonical representative inside the torus
//! parallelogram.
//!
//! Primitive vectors and sublattice offsets (nearest-neighbor distance 1):
//!
//! ```text
//! square      a1 = (1, 0)   a2 = (0, 1)
//! triangular  a1 = (1, 0)   a2 = (1/2, √3/2)
//! kagome      a1 = (2, 0)   a2 = (1, √3)     offsets 0, a1/2, a2/2
//! chain       a1 = (1, 0)                    (t2 must be (0, 1))
//! ```
//!
//! J₁ connects nearest neighbors. J₂ connects the second shell: the
//! diagonals of the square plaquette, the √3 neighbors of the triangular
//! lattice, and on the kagome lattice the √3 pairs across each hexagon:
//!
//! ```text
//!          C───────C                 o = the site,  x = its four J₂ partners
//!         / \     / \                (two sites apart along the hexagon,
//!        /   \   /   \                 distance √3, not the distance-2
//!   ────B─────A─────B────             diameter across it)
//!        \   / \   /
//!         \ /   \ /
//!          C     C
//! ```
//!
//! Bonds are stored once per unordered site pair. On small tori two
//! distinct displacement vectors can join the same pair; the bond then
//! carries multiplicity 2 (or more). A displacement that wraps a site onto
//! itself is rejected with [`Error::SelfBond`].

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const SQRT3: f64 = 1.732_050_807_568_877_2;
const GEOM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeKind {
    Chain,
    Square,
    Triangular,
    Kagome,
}

impl LatticeKind {
    pub fn primitive_vectors(self) -> [[f64; 2]; 2] {
        match self {
            LatticeKind::Chain | LatticeKind::Square => [[1.0, 0.0], [0.0, 1.0]],
            LatticeKind::Triangular => [[1.0, 0.0], [0.5, SQRT3 / 2.0]],
            LatticeKind::Kagome => [[2.0, 0.0], [1.0, SQRT3]],
        }
    }

    /// Cartesian offsets of the sites inside one unit cell.
    pub fn sublattice_offsets(self) -> Vec<[f64; 2]> {
        match self {
            LatticeKind::Kagome => vec![[0.0, 0.0], [1.0, 0.0], [0.5, SQRT3 / 2.0]],
            _ => vec![[0.0, 0.0]],
        }
    }

    /// (J₁, J₂) shell distances.
    fn shell_distances(self) -> (f64, f64) {
        match self {
            LatticeKind::Chain => (1.0, 2.0),
            LatticeKind::Square => (1.0, 2f64.sqrt()),
            LatticeKind::Triangular | LatticeKind::Kagome => (1.0, SQRT3),
        }
    }

    /// Reciprocal primitive vectors with a_i · b_j = 2π δ_ij.
    pub fn reciprocal_vectors(self) -> [[f64; 2]; 2] {
        let [a1, a2] = self.primitive_vectors();
        let det = a1[0] * a2[1] - a1[1] * a2[0];
        let s = 2.0 * PI / det;
        [[a2[1] * s, -a2[0] * s], [-a1[1] * s, a1[0] * s]]
    }

    /// Point-group operations as 2×2 Cartesian matrices.
    fn point_group(self) -> Vec<[[f64; 2]; 2]> {
        let (order, mirror): (usize, [[f64; 2]; 2]) = match self {
            LatticeKind::Chain => (2, [[1.0, 0.0], [0.0, -1.0]]),
            LatticeKind::Square => (4, [[1.0, 0.0], [0.0, -1.0]]),
            LatticeKind::Triangular | LatticeKind::Kagome => (6, [[1.0, 0.0], [0.0, -1.0]]),
        };
        let mut ops = Vec::with_capacity(2 * order);
        for k in 0..order {
            let phi = 2.0 * PI * k as f64 / order as f64;
            let (s, c) = phi.sin_cos();
            let rot = [[c, -s], [s, c]];
            ops.push(rot);
            ops.push(mat_mul(rot, mirror));
        }
        ops
    }
}

fn mat_mul(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub kind: LatticeKind,
    pub t1: [i64; 2],
    pub t2: [i64; 2],
}

impl LatticeSpec {
    pub fn new(kind: LatticeKind, t1: [i64; 2], t2: [i64; 2]) -> Self {
        Self { kind, t1, t2 }
    }

    /// Periodic chain of `length` sites.
    pub fn chain(length: i64) -> Self {
        Self::new(LatticeKind::Chain, [length, 0], [0, 1])
    }

    pub fn determinant(&self) -> i64 {
        self.t1[0] * self.t2[1] - self.t1[1] * self.t2[0]
    }

    pub fn n_sites(&self) -> usize {
        self.determinant().unsigned_abs() as usize * self.kind.sublattice_offsets().len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bond {
    pub i: usize,
    pub j: usize,
    pub multiplicity: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Momentum {
    /// Reduced coordinates along the reciprocal vectors, as numerators over
    /// `|det(t1, t2)|`, each in `[0, |det|)`.
    pub frac: [i64; 2],
    /// Cartesian momentum, folded into the first Brillouin zone.
    pub k: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WavevectorLabel {
    Gamma,
    M,
    X,
    K,
}

impl std::fmt::Display for WavevectorLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            WavevectorLabel::Gamma => "Gamma",
            WavevectorLabel::M => "M",
            WavevectorLabel::X => "X",
            WavevectorLabel::K => "K",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for WavevectorLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gamma" | "g" | "0" => Ok(WavevectorLabel::Gamma),
            "m" => Ok(WavevectorLabel::M),
            "x" => Ok(WavevectorLabel::X),
            "k" => Ok(WavevectorLabel::K),
            _ => Err(Error::InvalidLattice(format!("unknown wavevector label {s}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderingWavevector {
    pub label: WavevectorLabel,
    pub q: [f64; 2],
    /// Indices into [`LatticeCluster::momenta`] of the symmetry-equivalent
    /// momenta, `q` first.
    pub star: Vec<usize>,
}

/// A finite periodic cluster. Immutable once built.
#[derive(Clone, Debug, Serialize)]
pub struct LatticeCluster {
    kind: LatticeKind,
    spec: Option<LatticeSpec>,
    n_sub: usize,
    positions: Vec<[f64; 2]>,
    cells: Vec<[i64; 2]>,
    bonds1: Vec<Bond>,
    bonds2: Vec<Bond>,
    /// `translations[t][i]` is the image of site `i` under translation by
    /// `cells[t]`.
    translations: Vec<Vec<usize>>,
    momenta: Vec<Momentum>,
    spin_inversion: bool,
}

/// Integer bookkeeping for the quotient Z² / T Z².
struct Torus {
    t: [[i64; 2]; 2],
    adj: [[i64; 2]; 2],
    det: i64,
}

impl Torus {
    /// `cols` are the generating vectors.
    fn new(c1: [i64; 2], c2: [i64; 2]) -> Self {
        let t = [[c1[0], c2[0]], [c1[1], c2[1]]];
        let mut det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
        let mut adj = [[t[1][1], -t[0][1]], [-t[1][0], t[0][0]]];
        if det < 0 {
            det = -det;
            for row in adj.iter_mut() {
                for v in row.iter_mut() {
                    *v = -*v;
                }
            }
        }
        Self { t, adj, det }
    }

    /// Canonical representative with fractional coordinates in [0, 1).
    fn reduce(&self, n: [i64; 2]) -> [i64; 2] {
        let f0 = self.adj[0][0] * n[0] + self.adj[0][1] * n[1];
        let f1 = self.adj[1][0] * n[0] + self.adj[1][1] * n[1];
        let q0 = f0.div_euclid(self.det);
        let q1 = f1.div_euclid(self.det);
        [
            n[0] - self.t[0][0] * q0 - self.t[0][1] * q1,
            n[1] - self.t[1][0] * q0 - self.t[1][1] * q1,
        ]
    }

    fn representatives(&self) -> Vec<[i64; 2]> {
        let mut reps: Vec<[i64; 2]> = Vec::with_capacity(self.det as usize);
        let mut seen = std::collections::HashSet::new();
        for a in 0..self.det {
            for b in 0..self.det {
                let r = self.reduce([a, b]);
                if seen.insert(r) {
                    reps.push(r);
                }
            }
        }
        reps.sort();
        reps
    }
}

impl LatticeCluster {
    /// Builds the cluster for `spec`.
    pub fn build(spec: LatticeSpec) -> Result<Self> {
        let kind = spec.kind;
        let det = spec.determinant();
        if det == 0 {
            return Err(Error::SingularTorus);
        }
        if kind == LatticeKind::Chain && spec.t2 != [0, 1] {
            return Err(Error::InvalidLattice("chain clusters need t2 = (0, 1)".into()));
        }
        let torus = Torus::new(spec.t1, spec.t2);
        let cells = torus.representatives();
        debug_assert_eq!(cells.len() as i64, det.abs());
        let cell_index: HashMap<[i64; 2], usize> =
            cells.iter().enumerate().map(|(i, c)| (*c, i)).collect();

        let [a1, a2] = kind.primitive_vectors();
        let offsets = kind.sublattice_offsets();
        let n_sub = offsets.len();
        let site = |cell: [i64; 2], sub: usize| cell_index[&torus.reduce(cell)] * n_sub + sub;

        let positions: Vec<[f64; 2]> = cells
            .iter()
            .flat_map(|c| {
                let base = [
                    c[0] as f64 * a1[0] + c[1] as f64 * a2[0],
                    c[0] as f64 * a1[1] + c[1] as f64 * a2[1],
                ];
                offsets.iter().map(move |o| [base[0] + o[0], base[1] + o[1]])
            })
            .collect();

        let (d1, d2) = kind.shell_distances();
        let shell1 = shell_displacements(kind, d1);
        let shell2 = shell_displacements(kind, d2);

        let build_shell = |shell: &[([i64; 2], usize, usize)], name: &'static str| {
            let mut counts: BTreeMap<(usize, usize), u32> = BTreeMap::new();
            for cell in &cells {
                for &(dn, from, to) in shell {
                    let i = site(*cell, from);
                    let j = site([cell[0] + dn[0], cell[1] + dn[1]], to);
                    if i == j {
                        return Err(Error::SelfBond { shell: name, site: i });
                    }
                    *counts.entry((i.min(j), i.max(j))).or_default() += 1;
                }
            }
            Ok(counts
                .into_iter()
                .map(|((i, j), c)| Bond { i, j, multiplicity: c / 2 })
                .collect::<Vec<_>>())
        };
        let bonds1 = build_shell(&shell1, "J1")?;
        let bonds2 = build_shell(&shell2, "J2")?;

        let translations: Vec<Vec<usize>> = cells
            .iter()
            .map(|d| {
                let mut perm = vec![0; cells.len() * n_sub];
                for c in &cells {
                    for sub in 0..n_sub {
                        perm[site(*c, sub)] = site([c[0] + d[0], c[1] + d[1]], sub);
                    }
                }
                perm
            })
            .collect();

        // Momenta: κ with κ·t1, κ·t2 integer, i.e. κ = (Tᵀ)⁻¹ m.
        let dual = Torus::new([spec.t1[0], spec.t2[0]], [spec.t1[1], spec.t2[1]]);
        let dual_adj = dual.adj;
        let mut fracs: Vec<[i64; 2]> = dual
            .representatives()
            .into_iter()
            .map(|m| {
                [
                    (dual_adj[0][0] * m[0] + dual_adj[0][1] * m[1]).rem_euclid(dual.det),
                    (dual_adj[1][0] * m[0] + dual_adj[1][1] * m[1]).rem_euclid(dual.det),
                ]
            })
            .collect();
        fracs.sort();
        fracs.dedup();
        let det_abs = det.abs();
        let momenta = fracs
            .into_iter()
            .map(|frac| Momentum {
                frac,
                k: fold_to_bz(kind, [frac[0] as f64 / det_abs as f64, frac[1] as f64 / det_abs as f64]),
            })
            .collect();

        Ok(Self {
            kind,
            spec: Some(spec),
            n_sub,
            positions,
            cells,
            bonds1,
            bonds2,
            translations,
            momenta,
            spin_inversion: true,
        })
    }

    /// Two sites joined by a single J₁ bond, with the swap as its only
    /// non-trivial translation and momenta {0, π}.
    pub fn dimer() -> Self {
        let momenta = vec![
            Momentum { frac: [0, 0], k: [0.0, 0.0] },
            Momentum { frac: [1, 0], k: [PI, 0.0] },
        ];
        Self {
            kind: LatticeKind::Chain,
            spec: None,
            n_sub: 1,
            positions: vec![[0.0, 0.0], [1.0, 0.0]],
            cells: vec![[0, 0], [1, 0]],
            bonds1: vec![Bond { i: 0, j: 1, multiplicity: 1 }],
            bonds2: Vec::new(),
            translations: vec![vec![0, 1], vec![1, 0]],
            momenta,
            spin_inversion: true,
        }
    }

    /// `n` uncoupled sites with only the identity translation.
    pub fn free_spins(n: usize) -> Self {
        Self {
            kind: LatticeKind::Chain,
            spec: None,
            n_sub: n,
            positions: (0..n).map(|i| [i as f64, 0.0]).collect(),
            cells: vec![[0, 0]],
            bonds1: Vec::new(),
            bonds2: Vec::new(),
            translations: vec![(0..n).collect()],
            momenta: vec![Momentum { frac: [0, 0], k: [0.0, 0.0] }],
            spin_inversion: true,
        }
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn spec(&self) -> Option<LatticeSpec> {
        self.spec
    }

    pub fn n_sites(&self) -> usize {
        self.positions.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn sites_per_cell(&self) -> usize {
        self.n_sub
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn cells(&self) -> &[[i64; 2]] {
        &self.cells
    }

    pub fn bonds1(&self) -> &[Bond] {
        &self.bonds1
    }

    pub fn bonds2(&self) -> &[Bond] {
        &self.bonds2
    }

    pub fn translations(&self) -> &[Vec<usize>] {
        &self.translations
    }

    pub fn momenta(&self) -> &[Momentum] {
        &self.momenta
    }

    pub fn spin_inversion(&self) -> bool {
        self.spin_inversion
    }

    /// Number of momenta (= number of unit cells), the denominator of the
    /// reduced momentum coordinates.
    fn denom(&self) -> i64 {
        self.momenta.len() as i64
    }

    /// Phase angle κ·d (in units of 2π, as an exact fraction reduced to
    /// [0,1)) of momentum `m` against translation `t`.
    pub fn phase_fraction(&self, momentum: usize, translation: usize) -> f64 {
        let frac = self.momenta[momentum].frac;
        let d = self.cells[translation];
        let den = self.denom();
        ((frac[0] * d[0] + frac[1] * d[1]).rem_euclid(den)) as f64 / den as f64
    }

    /// Index of the momentum `-k`.
    pub fn negated_momentum(&self, momentum: usize) -> usize {
        let den = self.denom();
        let f = self.momenta[momentum].frac;
        let neg = [(-f[0]).rem_euclid(den), (-f[1]).rem_euclid(den)];
        self.momenta
            .iter()
            .position(|m| m.frac == neg)
            .expect("momentum set is closed under negation")
    }

    /// Index of the momentum with the given reduced coordinates (taken
    /// modulo 1), if the cluster contains it.
    pub fn momentum_index(&self, kappa: [f64; 2]) -> Option<usize> {
        let den = self.denom() as f64;
        let mut num = [0i64; 2];
        for a in 0..2 {
            let x = kappa[a].rem_euclid(1.0) * den;
            let r = x.round();
            if (x - r).abs() > 1e-6 {
                return None;
            }
            num[a] = (r as i64).rem_euclid(self.denom());
        }
        self.momenta.iter().position(|m| m.frac == num)
    }

    /// Bond incidence per site for a shell, counted with multiplicity.
    pub fn coordination(&self, shell: usize) -> Vec<u32> {
        let bonds = if shell == 1 { &self.bonds1 } else { &self.bonds2 };
        let mut z = vec![0; self.n_sites()];
        for b in bonds {
            z[b.i] += b.multiplicity;
            z[b.j] += b.multiplicity;
        }
        z
    }

    /// The ordering wavevector `label` and its star under the lattice point
    /// group, restricted to momenta of this cluster.
    pub fn ordering_wavevector(&self, label: WavevectorLabel) -> Result<OrderingWavevector> {
        let kappa = match (self.kind, label) {
            (_, WavevectorLabel::Gamma) => [0.0, 0.0],
            (LatticeKind::Square, WavevectorLabel::M) => [0.5, 0.5],
            (LatticeKind::Square, WavevectorLabel::X) => [0.5, 0.0],
            (LatticeKind::Triangular | LatticeKind::Kagome, WavevectorLabel::M) => [0.5, 0.0],
            (LatticeKind::Triangular | LatticeKind::Kagome, WavevectorLabel::K) => [2.0 / 3.0, 1.0 / 3.0],
            (LatticeKind::Chain, WavevectorLabel::M) => [0.5, 0.0],
            _ => {
                return Err(Error::InvalidLattice(format!(
                    "wavevector {label} is not defined for {:?}",
                    self.kind
                )))
            }
        };
        let incommensurate = || Error::Incommensurate { label: label.to_string() };
        let [b1, b2] = self.kind.reciprocal_vectors();
        let [a1, a2] = self.kind.primitive_vectors();
        let q = [kappa[0] * b1[0] + kappa[1] * b2[0], kappa[0] * b1[1] + kappa[1] * b2[1]];
        let first = self.momentum_index(kappa).ok_or_else(incommensurate)?;
        let mut star = vec![first];
        for g in self.kind.point_group() {
            let gq = [g[0][0] * q[0] + g[0][1] * q[1], g[1][0] * q[0] + g[1][1] * q[1]];
            let gk = [
                (gq[0] * a1[0] + gq[1] * a1[1]) / (2.0 * PI),
                (gq[0] * a2[0] + gq[1] * a2[1]) / (2.0 * PI),
            ];
            let idx = self.momentum_index(gk).ok_or_else(incommensurate)?;
            if !star.contains(&idx) {
                star.push(idx);
            }
        }
        Ok(OrderingWavevector { label, q: self.momenta[first].k, star })
    }

    /// Labels that make sense for this lattice, in display order.
    pub fn wavevector_labels(&self) -> &'static [WavevectorLabel] {
        match self.kind {
            LatticeKind::Square => &[WavevectorLabel::Gamma, WavevectorLabel::M, WavevectorLabel::X],
            LatticeKind::Triangular | LatticeKind::Kagome => {
                &[WavevectorLabel::Gamma, WavevectorLabel::M, WavevectorLabel::K]
            }
            LatticeKind::Chain => &[WavevectorLabel::Gamma, WavevectorLabel::M],
        }
    }

    /// JSON summary: sites, bonds with multiplicities, momenta.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": self.kind,
            "spec": self.spec,
            "n_sites": self.n_sites(),
            "n_cells": self.n_cells(),
            "sites": self.positions,
            "bonds1": self.bonds1,
            "bonds2": self.bonds2,
            "momenta": self.momenta,
            "spin_inversion": self.spin_inversion,
        })
    }
}

/// All (cell displacement, from-sublattice, to-sublattice) triples at
/// Cartesian distance `dist` on the infinite lattice.
fn shell_displacements(kind: LatticeKind, dist: f64) -> Vec<([i64; 2], usize, usize)> {
    let [a1, a2] = kind.primitive_vectors();
    let offsets = kind.sublattice_offsets();
    let range2 = if kind == LatticeKind::Chain { 0 } else { 3 };
    let mut out = Vec::new();
    for from in 0..offsets.len() {
        for to in 0..offsets.len() {
            for n1 in -3i64..=3 {
                for n2 in -range2..=range2 {
                    let dx = offsets[to][0] - offsets[from][0] + n1 as f64 * a1[0] + n2 as f64 * a2[0];
                    let dy = offsets[to][1] - offsets[from][1] + n1 as f64 * a1[1] + n2 as f64 * a2[1];
                    if ((dx * dx + dy * dy).sqrt() - dist).abs() < GEOM_TOL {
                        out.push(([n1, n2], from, to));
                    }
                }
            }
        }
    }
    out
}

/// Cartesian momentum of reduced coordinates `kappa`, shifted by a
/// reciprocal lattice vector to the shortest representative.
fn fold_to_bz(kind: LatticeKind, kappa: [f64; 2]) -> [f64; 2] {
    let [b1, b2] = kind.reciprocal_vectors();
    let mut best = [f64::INFINITY, 0.0, 0.0];
    for g1 in -1..=1 {
        for g2 in -1..=1 {
            let (x, y) = (kappa[0] - g1 as f64, kappa[1] - g2 as f64);
            let k = [x * b1[0] + y * b2[0], x * b1[1] + y * b2[1]];
            let norm = k[0] * k[0] + k[1] * k[1];
            if norm < best[0] - 1e-9 {
                best = [norm, k[0], k[1]];
            }
        }
    }
    if kind == LatticeKind::Chain {
        return [best[1], 0.0];
    }
    [best[1], best[2]]
}
