use thiserror::Error;

use crate::eigensolve::EigenResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("torus vectors are linearly dependent (det = 0)")]
    SingularTorus,
    #[error("cluster too small: {shell} bond wraps site {site} onto itself")]
    SelfBond { shell: &'static str, site: usize },
    #[error("invalid lattice spec: {0}")]
    InvalidLattice(String),
    #[error("wavevector {label} is not commensurate with the cluster")]
    Incommensurate { label: String },
    #[error("invalid sector: {0}")]
    InvalidSector(String),
    #[error("sector dimension {dim} exceeds the basis memory budget of {budget_bytes} bytes")]
    DimensionOverflow { dim: u128, budget_bytes: u64 },
    #[error("state and operator live on different bases")]
    BasisMismatch,
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("dimension {dim} exceeds the dense oracle limit {limit}")]
    DimensionTooLargeForOracle { dim: usize, limit: usize },
    #[error("Lanczos did not converge after {} restarts", .partial.iterations)]
    NoConvergence { partial: Box<EigenResult> },
    #[error("only {found} singlet levels among {searched} converged Heisenberg levels, {needed} requested")]
    InsufficientSingletLevels { found: usize, searched: usize, needed: usize },
    #[error("ground state is degenerate within the sector (gap {gap:.3e})")]
    DegenerateGroundState { gap: f64 },
    #[error("outside the validity of the asymptotic expansion: {0}")]
    OutOfValidity(String),
    #[error("no crossing between squeezed AFM and Heisenberg energies: {0}")]
    NoCrossing(String),
    #[error("incomplete grid, missing points: {missing:?}")]
    IncompleteGrid { missing: Vec<(usize, usize)> },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
