//! Exact diagonalization and variational tools for the Tavis–Cummings–Ising
//! (TCI) spin model
//!
//! ```text
//! H = λ (S_x² + S_y²) + Σ_{i<j} J_ij S_z^i S_z^j
//! ```
//!
//! on finite periodic square, triangular and kagome clusters with J₁/J₂
//! Ising couplings. The crate is organised bottom-up:
//!
//! - [`lattice`]: torus clusters, bond shells, cluster momenta and
//!   high-symmetry ordering wavevectors.
//! - [`basis`]: bit-encoded fixed-magnetization bases, optionally reduced to
//!   translation-momentum and spin-inversion-parity representatives.
//! - [`operators`]: matrix-free TCI, Heisenberg, Ising, cavity-only and S²
//!   operators on plain or reduced bases.
//! - [`fullspace`]: dense Kronecker-product operators on the full 2^N
//!   Hilbert space; the independent oracle path for small systems.
//! - [`eigensolve`]: thick-restart Lanczos with full reorthogonalization and a
//!   dense hermitian oracle.
//! - [`observables`]: structure factors, total spin, fidelity susceptibility
//!   and the strong-cavity Heisenberg singlet mapping check.
//! - [`variational`]: the two-sublattice squeezed antiferromagnet ansatz,
//!   its bosonic approximation, asymptotics and symmetrized gap.
//! - [`projector`]: SU(2) singlet projectors (spectral and Haar quadrature)
//!   and the rotational averaging of Ising Hamiltonians.
//! - [`scan`]: declarative parameter sweeps, JSON records and plot-ready CSV.

pub mod basis;
pub mod eigensolve;
mod error;
pub mod fullspace;
pub mod lattice;
pub mod observables;
pub mod operators;
pub mod projector;
pub mod scan;
pub mod variational;

pub use error::{Error, Result};

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;

pub use basis::{SectorBasis, SectorLabel, StateVector};
pub use eigensolve::{EigenRequest, EigenResult};
pub use lattice::{LatticeCluster, LatticeKind, LatticeSpec};
pub use operators::{LinearOperator, ModelParams, SpinOperator, Variant};
