//! Bit-encoded spin-1/2 bases at fixed magnetization, optionally reduced to
//! translation-momentum and spin-inversion-parity representatives.
//!
//! Bit `i` of a configuration is the spin at site `i` (1 = up). A reduced
//! basis stores one representative per symmetry orbit: the smallest
//! integer reachable by a group element `g = Π^f T_d`. The symmetric state
//! built on a representative `r` carries amplitude `χ(g)/√|orbit|` on each
//! configuration `c` with `g·c = r`, where
//!
//! ```text
//! χ(Π^f T_d) = p^f · exp(-2πi κ·d)
//! ```
//!
//! so that `T_d |ψ⟩ = e^{-i k·d} |ψ⟩` and `Π |ψ⟩ = p |ψ⟩`.

use std::sync::Arc;

use crate::lattice::LatticeCluster;
use crate::{Error, Result, C64};

/// Default cap on basis storage.
pub const DEFAULT_MEMORY_BUDGET: u64 = 2 << 30;

const LIN_MAX_SITES: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct SectorLabel {
    pub two_m: i32,
    pub momentum: Option<usize>,
    pub parity: Option<i8>,
}

impl SectorLabel {
    pub fn magnetization(two_m: i32) -> Self {
        Self { two_m, momentum: None, parity: None }
    }

    pub fn reduced(two_m: i32, momentum: usize, parity: Option<i8>) -> Self {
        Self { two_m, momentum: Some(momentum), parity }
    }
}

impl std::fmt::Display for SectorLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "2M={}", self.two_m)?;
        if let Some(k) = self.momentum {
            write!(f, " k#{k}")?;
        }
        match self.parity {
            Some(p) if p > 0 => write!(f, " p=+"),
            Some(_) => write!(f, " p=-"),
            None => Ok(()),
        }
    }
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Site permutation applied to bit strings via per-byte lookup tables.
#[derive(Clone, Debug)]
struct BitPermutation {
    tables: Vec<[u64; 256]>,
}

impl BitPermutation {
    fn new(perm: &[usize]) -> Self {
        let n_bytes = perm.len().div_ceil(8);
        let mut tables = vec![[0u64; 256]; n_bytes];
        for (b, table) in tables.iter_mut().enumerate() {
            for (byte, slot) in table.iter_mut().enumerate() {
                let mut out = 0u64;
                for bit in 0..8 {
                    let site = 8 * b + bit;
                    if site < perm.len() && byte >> bit & 1 == 1 {
                        out |= 1 << perm[site];
                    }
                }
                *slot = out;
            }
        }
        Self { tables }
    }

    #[inline]
    fn apply(&self, c: u64) -> u64 {
        let mut out = 0;
        for (b, table) in self.tables.iter().enumerate() {
            out |= table[(c >> (8 * b) & 0xff) as usize];
        }
        out
    }
}

/// Symmetry group data for one momentum/parity sector.
#[derive(Clone, Debug)]
struct SectorSymmetry {
    perms: Vec<BitPermutation>,
    /// Flip mask when spin inversion is part of the group.
    flip: Option<u64>,
    /// `χ(g)` for `g = Π^f T_t`, indexed `f * n_t + t`.
    characters: Vec<C64>,
}

impl SectorSymmetry {
    fn order(&self) -> usize {
        self.characters.len()
    }

    fn image(&self, g: usize, c: u64) -> u64 {
        let n_t = self.perms.len();
        let out = self.perms[g % n_t].apply(c);
        if g >= n_t {
            out ^ self.flip.expect("flip element without flip mask")
        } else {
            out
        }
    }

    /// Representative of `c` and the character of the group element that
    /// maps `c` onto it.
    #[inline]
    fn representative(&self, c: u64) -> (u64, C64) {
        let mut best = c;
        let mut chi = self.characters[0];
        let n_t = self.perms.len();
        for (t, perm) in self.perms.iter().enumerate().skip(1) {
            let img = perm.apply(c);
            if img < best {
                best = img;
                chi = self.characters[t];
            }
        }
        if let Some(mask) = self.flip {
            for (t, perm) in self.perms.iter().enumerate() {
                let img = perm.apply(c) ^ mask;
                if img < best {
                    best = img;
                    chi = self.characters[n_t + t];
                }
            }
        }
        (best, chi)
    }
}

#[derive(Clone, Debug)]
enum Lookup {
    /// Two-table combinatorial index for sorted fixed-popcount states.
    Lin { low_bits: u32, low: Vec<u32>, high: Vec<u32> },
    Search,
}

#[derive(Clone, Debug)]
struct Reduction {
    symmetry: SectorSymmetry,
    orbit_sizes: Vec<u32>,
    zero_norm_dropped: usize,
}

/// Ordered configuration basis of one sector.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    cluster: Arc<LatticeCluster>,
    label: SectorLabel,
    n_sites: usize,
    n_up: usize,
    states: Vec<u64>,
    lookup: Lookup,
    reduction: Option<Reduction>,
}

impl SectorBasis {
    /// All configurations with magnetization `two_m / 2`.
    pub fn enumerate(cluster: Arc<LatticeCluster>, two_m: i32) -> Result<Self> {
        Self::enumerate_with_budget(cluster, two_m, DEFAULT_MEMORY_BUDGET)
    }

    pub fn enumerate_with_budget(cluster: Arc<LatticeCluster>, two_m: i32, budget_bytes: u64) -> Result<Self> {
        let n = cluster.n_sites();
        if n > 63 {
            return Err(Error::InvalidSector(format!("{n} sites exceed the 63-bit encoding")));
        }
        if two_m.unsigned_abs() as usize > n || (n as i32 + two_m) % 2 != 0 {
            return Err(Error::InvalidSector(format!("2M={two_m} is not reachable with {n} sites")));
        }
        let n_up = ((n as i32 + two_m) / 2) as usize;
        let dim = binomial(n as u64, n_up as u64);
        if dim.saturating_mul(8) > budget_bytes as u128 {
            return Err(Error::DimensionOverflow { dim, budget_bytes });
        }
        let dim = dim as usize;
        let mut states = Vec::with_capacity(dim);
        if n_up == 0 {
            states.push(0);
        } else {
            // Gosper's hack walks fixed-popcount words in increasing order.
            let mut c: u64 = (1u64 << n_up) - 1;
            let limit = 1u64 << n;
            while c < limit {
                states.push(c);
                let lowest = c & c.wrapping_neg();
                let ripple = c + lowest;
                c = (((ripple ^ c) >> 2) / lowest) | ripple;
            }
        }
        debug_assert_eq!(states.len(), dim);
        let lookup = if n <= LIN_MAX_SITES { lin_tables(n, &states) } else { Lookup::Search };
        Ok(Self {
            cluster,
            label: SectorLabel::magnetization(two_m),
            n_sites: n,
            n_up,
            states,
            lookup,
            reduction: None,
        })
    }

    /// Momentum (and parity) reduction of a plain basis.
    pub fn reduce(&self, momentum: usize, parity: Option<i8>) -> Result<Self> {
        if self.reduction.is_some() {
            return Err(Error::InvalidSector("basis is already reduced".into()));
        }
        let cluster = &self.cluster;
        if momentum >= cluster.momenta().len() {
            return Err(Error::InvalidSector(format!("momentum index {momentum} out of range")));
        }
        if let Some(p) = parity {
            if self.label.two_m != 0 || !cluster.spin_inversion() {
                return Err(Error::InvalidSector("parity needs 2M = 0".into()));
            }
            if p != 1 && p != -1 {
                return Err(Error::InvalidSector(format!("parity must be ±1, got {p}")));
            }
        }
        let n_t = cluster.translations().len();
        let mut characters: Vec<C64> = (0..n_t)
            .map(|t| C64::from_polar(1.0, -2.0 * std::f64::consts::PI * cluster.phase_fraction(momentum, t)))
            .collect();
        let flip = parity.map(|p| {
            let pf = p as f64;
            let flipped: Vec<C64> = characters.iter().map(|c| c * pf).collect();
            characters.extend(flipped);
            if self.n_sites == 64 { u64::MAX } else { (1u64 << self.n_sites) - 1 }
        });
        let symmetry = SectorSymmetry {
            perms: cluster.translations().iter().map(|p| BitPermutation::new(p)).collect(),
            flip,
            characters,
        };

        let mut states = Vec::new();
        let mut orbit_sizes = Vec::new();
        let mut dropped = 0;
        let mut images = Vec::with_capacity(symmetry.order());
        for &c in &self.states {
            if symmetry.representative(c).0 != c {
                continue;
            }
            let mut chi_sum = C64::new(0.0, 0.0);
            images.clear();
            for g in 0..symmetry.order() {
                let img = symmetry.image(g, c);
                if img == c {
                    chi_sum += symmetry.characters[g];
                }
                images.push(img);
            }
            images.sort_unstable();
            images.dedup();
            if chi_sum.norm() < 1e-8 {
                dropped += 1;
                continue;
            }
            states.push(c);
            orbit_sizes.push(images.len() as u32);
        }
        Ok(Self {
            cluster: self.cluster.clone(),
            label: SectorLabel::reduced(self.label.two_m, momentum, parity),
            n_sites: self.n_sites,
            n_up: self.n_up,
            states,
            lookup: Lookup::Search,
            reduction: Some(Reduction { symmetry, orbit_sizes, zero_norm_dropped: dropped }),
        })
    }

    pub fn cluster(&self) -> &Arc<LatticeCluster> {
        &self.cluster
    }

    pub fn label(&self) -> SectorLabel {
        self.label
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_up(&self) -> usize {
        self.n_up
    }

    /// Twice the total magnetization.
    pub fn two_m(&self) -> i32 {
        self.label.two_m
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// Configurations, or representatives for a reduced basis, ascending.
    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn is_reduced(&self) -> bool {
        self.reduction.is_some()
    }

    /// Orbit sizes of the representatives (all 1 for a plain basis).
    pub fn orbit_size(&self, index: usize) -> usize {
        self.reduction.as_ref().map_or(1, |r| r.orbit_sizes[index] as usize)
    }

    /// Representatives excluded by destructive interference.
    pub fn zero_norm_dropped(&self) -> usize {
        self.reduction.as_ref().map_or(0, |r| r.zero_norm_dropped)
    }

    /// Index of a stored configuration.
    #[inline]
    pub fn index_of(&self, c: u64) -> Option<usize> {
        match &self.lookup {
            Lookup::Lin { low_bits, low, high } => {
                if c.count_ones() as usize != self.n_up || c >> self.n_sites != 0 {
                    return None;
                }
                let lo = (c & ((1u64 << low_bits) - 1)) as usize;
                let hi = (c >> low_bits) as usize;
                Some((high[hi] + low[lo]) as usize)
            }
            Lookup::Search => self.states.binary_search(&c).ok(),
        }
    }

    /// For any configuration `c` of this magnetization, the index of its
    /// representative together with `χ(g)` for the element `g` that maps `c`
    /// onto it. `None` when the orbit carries no state in this sector.
    #[inline]
    pub fn locate(&self, c: u64) -> Option<(usize, C64)> {
        match &self.reduction {
            None => self.index_of(c).map(|i| (i, C64::new(1.0, 0.0))),
            Some(red) => {
                let (rep, chi) = red.symmetry.representative(c);
                self.index_of(rep).map(|i| (i, chi))
            }
        }
    }

    /// The symmetric state on representative `index` as a list of
    /// `(configuration, amplitude)` pairs.
    pub fn orbit_amplitudes(&self, index: usize) -> Vec<(u64, C64)> {
        let r = self.states[index];
        let Some(red) = &self.reduction else {
            return vec![(r, C64::new(1.0, 0.0))];
        };
        let norm = (red.orbit_sizes[index] as f64).sqrt();
        let mut out: Vec<(u64, C64)> = (0..red.symmetry.order())
            .map(|g| (red.symmetry.image(g, r), red.symmetry.characters[g].conj() / norm))
            .collect();
        out.sort_by_key(|&(c, _)| c);
        out.dedup_by_key(|&mut (c, _)| c);
        out
    }

    pub fn same_space(&self, other: &SectorBasis) -> bool {
        std::ptr::eq(self, other)
            || (self.label == other.label
                && self.states.len() == other.states.len()
                && Arc::ptr_eq(&self.cluster, &other.cluster))
    }

    /// The plain basis of the same magnetization.
    pub fn plain(&self) -> Result<SectorBasis> {
        SectorBasis::enumerate(self.cluster.clone(), self.label.two_m)
    }

    /// Lifts reduced amplitudes onto the plain basis `plain`.
    pub fn expand(&self, amplitudes: &[C64], plain: &SectorBasis) -> Result<Vec<C64>> {
        if plain.is_reduced() || plain.two_m() != self.two_m() || plain.n_sites != self.n_sites {
            return Err(Error::BasisMismatch);
        }
        if amplitudes.len() != self.dim() {
            return Err(Error::BasisMismatch);
        }
        let mut out = vec![C64::new(0.0, 0.0); plain.dim()];
        for (i, &a) in amplitudes.iter().enumerate() {
            if a == C64::new(0.0, 0.0) {
                continue;
            }
            for (c, w) in self.orbit_amplitudes(i) {
                out[plain.index_of(c).ok_or(Error::BasisMismatch)?] += a * w;
            }
        }
        Ok(out)
    }

    /// Projects plain-basis amplitudes onto this reduced basis.
    pub fn project(&self, amplitudes: &[C64], plain: &SectorBasis) -> Result<Vec<C64>> {
        if plain.is_reduced() || plain.two_m() != self.two_m() || amplitudes.len() != plain.dim() {
            return Err(Error::BasisMismatch);
        }
        (0..self.dim())
            .map(|i| {
                self.orbit_amplitudes(i)
                    .into_iter()
                    .map(|(c, w)| Ok(w.conj() * amplitudes[plain.index_of(c).ok_or(Error::BasisMismatch)?]))
                    .sum()
            })
            .collect()
    }
}

fn lin_tables(n: usize, states: &[u64]) -> Lookup {
    let low_bits = (n / 2) as u32;
    let mut low = vec![0u32; 1 << low_bits];
    let mut rank_by_pop = vec![0u32; low_bits as usize + 1];
    for (lo, slot) in low.iter_mut().enumerate() {
        let pop = lo.count_ones() as usize;
        *slot = rank_by_pop[pop];
        rank_by_pop[pop] += 1;
    }
    let mut high = vec![0u32; 1 << (n as u32 - low_bits)];
    // first index of each high pattern; states are sorted so scan once
    let mut prev_hi = usize::MAX;
    for (i, &c) in states.iter().enumerate() {
        let hi = (c >> low_bits) as usize;
        if hi != prev_hi {
            high[hi] = i as u32;
            prev_hi = hi;
        }
    }
    Lookup::Lin { low_bits, low, high }
}

/// Amplitudes over a sector basis.
#[derive(Clone, Debug)]
pub struct StateVector {
    pub basis: Arc<SectorBasis>,
    pub amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(basis: Arc<SectorBasis>, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::BasisMismatch);
        }
        Ok(Self { basis, amplitudes })
    }

    pub fn zeros(basis: Arc<SectorBasis>) -> Self {
        let amplitudes = vec![C64::new(0.0, 0.0); basis.dim()];
        Self { basis, amplitudes }
    }

    /// The configuration `c` as a unit vector.
    pub fn basis_state(basis: Arc<SectorBasis>, c: u64) -> Result<Self> {
        let (i, _) = basis.locate(c).ok_or(Error::BasisMismatch)?;
        let mut v = Self::zeros(basis);
        v.amplitudes[i] = C64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    pub fn normalize(&mut self) -> f64 {
        let n = self.norm();
        if n > 0.0 {
            self.amplitudes.iter_mut().for_each(|a| *a /= n);
        }
        n
    }

    pub fn dot(&self, other: &StateVector) -> Result<C64> {
        if !self.basis.same_space(&other.basis) {
            return Err(Error::BasisMismatch);
        }
        Ok(dot(&self.amplitudes, &other.amplitudes))
    }

    /// The same state over the plain basis of its magnetization.
    pub fn expand(&self) -> Result<StateVector> {
        if !self.basis.is_reduced() {
            return Ok(self.clone());
        }
        let plain = Arc::new(self.basis.plain()?);
        let amplitudes = self.basis.expand(&self.amplitudes, &plain)?;
        Ok(StateVector { basis: plain, amplitudes })
    }
}

/// `⟨a|b⟩`, conjugating the left argument.
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}
