//! Lowest eigenpairs of hermitian operators.
//!
//! [`lowest_eigenpairs`] runs a thick-restart Lanczos iteration with full
//! (twice-applied) Gram–Schmidt reorthogonalization. After the requested
//! pairs converge, a degeneracy sweep deflates them and restarts from a
//! fresh random vector until no further level below the highest accepted
//! one turns up, so exact multiplets come back complete.
//! [`dense_oracle`] diagonalizes the full matrix and serves as the
//! reference for small systems.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{dot, norm};
use crate::operators::LinearOperator;
use crate::{Error, Result, C64};

/// Largest dimension accepted by [`dense_oracle`].
pub const ORACLE_LIMIT: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EigenRequest {
    pub n_eigenpairs: usize,
    /// Residual threshold, relative to `max(1, |λ|)`.
    pub tolerance: f64,
    /// Restart cycles allowed per Lanczos run.
    pub max_iterations: usize,
    pub seed: u64,
    /// Force the dense path.
    pub oracle: bool,
    /// Use the dense path automatically at or below this dimension.
    pub dense_below: usize,
    /// Cap on stored Krylov vectors.
    pub max_basis: usize,
    /// Relative gap below which neighboring levels are flagged degenerate.
    pub degeneracy_tol: f64,
}

impl Default for EigenRequest {
    fn default() -> Self {
        Self {
            n_eigenpairs: 1,
            tolerance: 1e-10,
            max_iterations: 500,
            seed: 0x5eed,
            oracle: false,
            dense_below: 0,
            max_basis: 400,
            degeneracy_tol: 1e-8,
        }
    }
}

impl EigenRequest {
    pub fn lowest(n: usize) -> Self {
        Self { n_eigenpairs: n, ..Self::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn dense(mut self) -> Self {
        self.oracle = true;
        self
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct EigenResult {
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<C64>>,
    /// `‖A v − λ v‖` per pair, recomputed from the returned vectors.
    pub residuals: Vec<f64>,
    /// Restart cycles across all Lanczos runs.
    pub iterations: usize,
    pub matvecs: usize,
    /// `degenerate[i]` marks a level within tolerance of a neighbor.
    pub degenerate: Vec<bool>,
    /// Smallest Ritz value after each restart of the main run.
    pub ritz_history: Vec<f64>,
    pub seed: u64,
    pub converged: bool,
    pub dense: bool,
}

/// Dense diagonalization of the whole operator.
pub fn dense_oracle(op: &dyn LinearOperator) -> Result<EigenResult> {
    let n = op.dim();
    if n > ORACLE_LIMIT {
        return Err(Error::DimensionTooLargeForOracle { dim: n, limit: ORACLE_LIMIT });
    }
    let m = op.to_dense();
    Ok(dense_eigen(m, 1e-8, 0))
}

/// Sorted eigen-decomposition of a hermitian matrix.
pub fn dense_eigen(m: DMatrix<C64>, degeneracy_tol: f64, seed: u64) -> EigenResult {
    let n = m.nrows();
    let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors: Vec<Vec<C64>> =
        order.iter().map(|&i| eig.eigenvectors.column(i).iter().copied().collect()).collect();
    let residuals = eigenvectors
        .iter()
        .zip(&eigenvalues)
        .map(|(v, &l)| {
            let mv = &m * nalgebra::DVector::from_column_slice(v);
            mv.iter().zip(v).map(|(a, b)| (a - b * l).norm_sqr()).sum::<f64>().sqrt()
        })
        .collect();
    let degenerate = degeneracy_flags(&eigenvalues, degeneracy_tol);
    EigenResult {
        eigenvalues,
        eigenvectors,
        residuals,
        iterations: 1,
        matvecs: 0,
        degenerate,
        ritz_history: Vec::new(),
        seed,
        converged: true,
        dense: true,
    }
}

fn degeneracy_flags(values: &[f64], tol: f64) -> Vec<bool> {
    let scale = values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    (0..values.len())
        .map(|i| {
            let close = |j: usize| (values[i] - values[j]).abs() <= tol * scale;
            (i > 0 && close(i - 1)) || (i + 1 < values.len() && close(i + 1))
        })
        .collect()
}

/// Lowest `req.n_eigenpairs` eigenpairs, ascending.
pub fn lowest_eigenpairs(op: &dyn LinearOperator, req: &EigenRequest) -> Result<EigenResult> {
    let dim = op.dim();
    if req.n_eigenpairs == 0 || req.n_eigenpairs > dim {
        return Err(Error::InvalidParams(format!(
            "requested {} eigenpairs of a {dim}-dimensional operator",
            req.n_eigenpairs
        )));
    }
    if req.oracle || dim <= req.dense_below {
        if dim > ORACLE_LIMIT {
            return Err(Error::DimensionTooLargeForOracle { dim, limit: ORACLE_LIMIT });
        }
        let mut full = dense_eigen(op.to_dense(), req.degeneracy_tol, req.seed);
        full.eigenvalues.truncate(req.n_eigenpairs);
        full.eigenvectors.truncate(req.n_eigenpairs);
        full.residuals.truncate(req.n_eigenpairs);
        full.degenerate = degeneracy_flags(&full.eigenvalues, req.degeneracy_tol);
        return Ok(full);
    }

    let mut solver = Lanczos::new(op, req);
    let nev = req.n_eigenpairs;
    let (mut values, mut vectors, converged) = solver.run(nev, &[], true);
    let mut ok = converged;

    // Degeneracy sweep: look for missed levels orthogonal to what we have.
    while ok && values.len() < dim {
        let (v2, w2, c2) = solver.run(1, &vectors, false);
        if !c2 {
            ok = false;
            break;
        }
        let top = values[nev - 1];
        let tol = sweep_tolerance(req, top);
        if v2[0] >= top - tol {
            break;
        }
        let pos = values.partition_point(|&x| x <= v2[0]);
        values.insert(pos, v2[0]);
        vectors.insert(pos, w2.into_iter().next().unwrap());
        values.truncate(nev);
        vectors.truncate(nev);
    }

    let mut result = solver.finish(values, vectors);
    result.converged = ok;
    if ok {
        Ok(result)
    } else {
        Err(Error::NoConvergence { partial: Box::new(result) })
    }
}

fn sweep_tolerance(req: &EigenRequest, value: f64) -> f64 {
    (req.tolerance * value.abs().max(1.0)).max(1e-12) * 10.0
}

struct Lanczos<'a> {
    op: &'a dyn LinearOperator,
    req: &'a EigenRequest,
    rng: ChaCha8Rng,
    matvecs: usize,
    restarts: usize,
    history: Vec<f64>,
}

impl<'a> Lanczos<'a> {
    fn new(op: &'a dyn LinearOperator, req: &'a EigenRequest) -> Self {
        Self {
            op,
            req,
            rng: ChaCha8Rng::seed_from_u64(req.seed),
            matvecs: 0,
            restarts: 0,
            history: Vec::new(),
        }
    }

    fn random_vector(&mut self) -> Vec<C64> {
        (0..self.op.dim())
            .map(|_| C64::new(self.rng.random::<f64>() - 0.5, self.rng.random::<f64>() - 0.5))
            .collect()
    }

    /// Random unit vector orthogonal to `against`, or `None` if they span
    /// the space.
    fn fresh_direction(&mut self, against: &[&[C64]]) -> Option<Vec<C64>> {
        for _ in 0..5 {
            let mut v = self.random_vector();
            let before = norm(&v);
            orthogonalize(&mut v, against);
            orthogonalize(&mut v, against);
            let after = norm(&v);
            if after > 1e-8 * before {
                v.iter_mut().for_each(|a| *a /= after);
                return Some(v);
            }
        }
        None
    }

    fn matvec(&mut self, x: &[C64], locked: &[Vec<C64>]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); x.len()];
        self.op.apply(x, &mut y);
        self.matvecs += 1;
        let refs: Vec<&[C64]> = locked.iter().map(|v| v.as_slice()).collect();
        orthogonalize(&mut y, &refs);
        y
    }

    /// Lowest `nev` eigenpairs of the operator restricted to the orthogonal
    /// complement of `locked`.
    fn run(&mut self, nev: usize, locked: &[Vec<C64>], record: bool) -> (Vec<f64>, Vec<Vec<C64>>, bool) {
        let dim = self.op.dim();
        let avail = dim - locked.len();
        let nev = nev.min(avail);
        let m_max = self.req.max_basis.min((3 * nev).max(nev + 30)).max(nev + 1).min(avail);
        let keep = ((nev + m_max) / 2).max(nev).min(m_max.saturating_sub(1)).max(1);

        let locked_refs: Vec<&[C64]> = locked.iter().map(|v| v.as_slice()).collect();
        let Some(start) = self.fresh_direction(&locked_refs) else {
            return (Vec::new(), Vec::new(), false);
        };
        let mut basis: Vec<Vec<C64>> = vec![start];
        let mut t = DMatrix::<C64>::zeros(m_max, m_max);
        let mut k = 0;
        let mut cycles = 0;
        loop {
            // expand from column k to m_max
            let mut residual: Option<Vec<C64>> = None;
            let mut beta = 0.0;
            let mut j = k;
            while j < m_max {
                let mut w = self.matvec(&basis[j], locked);
                for _pass in 0..2 {
                    for (i, v) in basis.iter().enumerate() {
                        let h = dot(v, &w);
                        w.iter_mut().zip(v).for_each(|(a, b)| *a -= h * b);
                        t[(i, j)] += h;
                    }
                }
                for i in 0..j {
                    t[(j, i)] = t[(i, j)].conj();
                }
                t[(j, j)] = C64::new(t[(j, j)].re, 0.0);
                beta = norm(&w);
                if j + 1 == m_max {
                    residual = Some(w);
                    break;
                }
                let scale = t[(j, j)].norm().max(1.0);
                if beta > 1e-12 * scale {
                    w.iter_mut().for_each(|a| *a /= beta);
                    t[(j + 1, j)] = C64::new(beta, 0.0);
                    basis.push(w);
                } else {
                    // invariant subspace found; continue with a fresh direction
                    let all: Vec<&[C64]> =
                        locked_refs.iter().copied().chain(basis.iter().map(|v| v.as_slice())).collect();
                    match self.fresh_direction(&all) {
                        Some(v) => basis.push(v),
                        None => {
                            beta = 0.0;
                            residual = Some(vec![C64::new(0.0, 0.0); dim]);
                            break;
                        }
                    }
                }
                j += 1;
            }
            let m = basis.len();
            let sub = t.view((0, 0), (m, m)).into_owned();
            let eig = SymmetricEigen::new((&sub + sub.adjoint()) * C64::new(0.5, 0.0));
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let theta: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
            if record {
                self.history.push(theta[0]);
            }
            let resid: Vec<f64> = order.iter().map(|&i| (beta * eig.eigenvectors[(m - 1, i)]).norm()).collect();
            let done = (0..nev).all(|i| resid[i] <= self.req.tolerance * theta[i].abs().max(1.0));
            cycles += 1;
            self.restarts += 1;
            let exhausted = m == avail;
            if done || exhausted || cycles >= self.req.max_iterations {
                let count = nev.min(m);
                let vecs = (0..count).map(|r| combine(&basis, eig.eigenvectors.column(order[r]))).collect();
                return (theta[..count].to_vec(), vecs, done || exhausted);
            }

            // thick restart: keep the lowest `keep` Ritz vectors
            let kk = keep.min(m - 1).max(1);
            let new_basis: Vec<Vec<C64>> =
                (0..kk).map(|r| combine(&basis, eig.eigenvectors.column(order[r]))).collect();
            let mut r = residual.expect("residual present at full basis");
            let r_norm = norm(&r);
            t.fill(C64::new(0.0, 0.0));
            for (i, &th) in theta.iter().take(kk).enumerate() {
                t[(i, i)] = C64::new(th, 0.0);
            }
            basis = new_basis;
            if r_norm > 0.0 {
                r.iter_mut().for_each(|a| *a /= r_norm);
                let refs: Vec<&[C64]> = basis.iter().map(|v| v.as_slice()).collect();
                orthogonalize(&mut r, &refs);
                let nn = norm(&r);
                r.iter_mut().for_each(|a| *a /= nn);
                basis.push(r);
            } else {
                let all: Vec<&[C64]> = locked_refs.iter().copied().chain(basis.iter().map(|v| v.as_slice())).collect();
                match self.fresh_direction(&all) {
                    Some(v) => basis.push(v),
                    None => return (theta[..nev].to_vec(), basis[..nev].to_vec(), true),
                }
            }
            k = kk;
        }
    }

    fn finish(&mut self, values: Vec<f64>, vectors: Vec<Vec<C64>>) -> EigenResult {
        let residuals = vectors
            .iter()
            .zip(&values)
            .map(|(v, &l)| {
                let mut av = vec![C64::new(0.0, 0.0); v.len()];
                self.op.apply(v, &mut av);
                self.matvecs += 1;
                av.iter().zip(v).map(|(a, b)| (a - b * l).norm_sqr()).sum::<f64>().sqrt()
            })
            .collect();
        EigenResult {
            degenerate: degeneracy_flags(&values, self.req.degeneracy_tol),
            eigenvalues: values,
            eigenvectors: vectors,
            residuals,
            iterations: self.restarts,
            matvecs: self.matvecs,
            ritz_history: std::mem::take(&mut self.history),
            seed: self.req.seed,
            converged: true,
            dense: false,
        }
    }
}

fn orthogonalize(w: &mut [C64], against: &[&[C64]]) {
    for v in against {
        let h = dot(v, w);
        w.iter_mut().zip(v.iter()).for_each(|(a, b)| *a -= h * b);
    }
}

fn combine(basis: &[Vec<C64>], coeffs: nalgebra::DVectorView<C64>) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); basis[0].len()];
    for (v, &c) in basis.iter().zip(coeffs.iter()) {
        out.iter_mut().zip(v).for_each(|(o, x)| *o += c * x);
    }
    let n = norm(&out);
    out.iter_mut().for_each(|a| *a /= n);
    out
}
