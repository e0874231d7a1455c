//! Block thick-restart Lanczos for the smallest eigenpairs of a symmetric operator.
//!
//! The basis `V` is kept fully orthonormal (classical Gram-Schmidt, two passes)
//! and the images `W = A V` are stored, so the projected matrix `T = V^T A V`
//! and the Ritz residuals `A x - theta x` are available exactly. On restart the
//! lowest Ritz vectors are kept and the next Krylov block is appended. A block
//! size above one lets the solver resolve repeated eigenvalues up to that
//! multiplicity.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// A symmetric linear map `y = A x` on `R^size`.
pub trait SymmetricOperator: Sync {
    fn size(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Convergence: `||A x - theta x|| <= tolerance * max(1, |theta|)`.
    pub tolerance: f64,
    /// Matrix-vector product budget; `None` means `50 * k`.
    pub max_matvecs: Option<usize>,
    pub block_size: usize,
    /// Maximum basis size; `None` picks `max(2k, k + 16 * block)` capped at `n`.
    pub basis_size: Option<usize>,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            tolerance: 1e-8,
            max_matvecs: None,
            block_size: 4,
            basis_size: None,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenPairs {
    /// Ascending.
    pub values: Vec<f64>,
    /// Unit-norm, mutually orthogonal.
    pub vectors: Vec<Vec<f64>>,
    /// `||A x_i - theta_i x_i||_2` from a fresh product.
    pub residuals: Vec<f64>,
    pub matvecs: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Two passes of classical Gram-Schmidt against `basis`; returns the final norm.
fn orthogonalize(basis: &[Vec<f64>], v: &mut [f64]) -> f64 {
    for _ in 0..2 {
        let coeffs: Vec<f64> = basis.par_iter().map(|b| dot(b, v)).collect();
        v.par_iter_mut().enumerate().for_each(|(r, x)| {
            let mut s = 0.0;
            for (c, b) in coeffs.iter().zip(basis) {
                s += c * b[r];
            }
            *x -= s;
        });
    }
    norm(v)
}

/// Columns of `[vectors] * coeffs`, where `coeffs` is `vectors.len() x cols`.
fn combine(vectors: &[Vec<f64>], coeffs: &DMatrix<f64>, cols: usize, n: usize) -> Vec<Vec<f64>> {
    let basis = DMatrix::from_fn(n, vectors.len(), |r, c| vectors[c][r]);
    let out = basis * coeffs.columns(0, cols);
    out.column_iter().map(|c| c.iter().copied().collect()).collect()
}

struct Solver<'a, A: SymmetricOperator> {
    op: &'a A,
    n: usize,
    v: Vec<Vec<f64>>,
    w: Vec<Vec<f64>>,
    t: Vec<Vec<f64>>,
    rng: ChaCha8Rng,
    matvecs: usize,
}

const DEFLATION: f64 = 1e-8;

impl<'a, A: SymmetricOperator> Solver<'a, A> {
    fn apply(&mut self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.op.apply(x, &mut y);
        self.matvecs += 1;
        y
    }

    fn random_vector(&mut self) -> Vec<f64> {
        (0..self.n).map(|_| self.rng.random::<f64>() - 0.5).collect()
    }

    /// Orthonormalizes `cand` against the basis, substituting a random direction
    /// when it is (numerically) dependent. `None` once the basis spans everything.
    fn admit(&mut self, mut cand: Vec<f64>) -> Option<Vec<f64>> {
        if self.v.len() >= self.n {
            return None;
        }
        for attempt in 0..3 {
            let before = norm(&cand);
            if before > 0.0 {
                let after = orthogonalize(&self.v, &mut cand);
                if after > DEFLATION * before {
                    cand.iter_mut().for_each(|x| *x /= after);
                    return Some(cand);
                }
            }
            if attempt < 2 {
                cand = self.random_vector();
            }
        }
        None
    }

    /// Appends an orthonormal vector, its image and the new row/column of `T`.
    fn push(&mut self, v: Vec<f64>) {
        let w = self.apply(&v);
        let col: Vec<f64> = self.v.par_iter().map(|b| dot(b, &w)).collect();
        let diag = dot(&v, &w);
        for (row, c) in self.t.iter_mut().zip(&col) {
            row.push(*c);
        }
        let mut last = col;
        last.push(diag);
        self.t.push(last);
        self.v.push(v);
        self.w.push(w);
    }

    /// Next block of the Krylov sequence from the images of `block`.
    fn next_block(&mut self, block: std::ops::Range<usize>) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        for j in block {
            let cand = self.w[j].clone();
            match self.admit(cand) {
                Some(v) => {
                    // Pending vectors must also be orthogonal to each other.
                    self.v.push(v.clone());
                    out.push(v);
                }
                None => break,
            }
        }
        let keep = self.v.len() - out.len();
        self.v.truncate(keep);
        out
    }
}

/// Ritz decomposition of `T`, ascending.
fn ritz(t: &[Vec<f64>]) -> (Vec<f64>, DMatrix<f64>) {
    let p = t.len();
    let mat = DMatrix::from_fn(p, p, |i, j| 0.5 * (t[i][j] + t[j][i]));
    let eig = SymmetricEigen::new(mat);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(p, p, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Computes the `k` algebraically smallest eigenpairs of `op`.
pub fn smallest_eigenpairs<A: SymmetricOperator>(op: &A, k: usize, opts: &LanczosOptions) -> Result<EigenPairs> {
    let n = op.size();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("requested {k} eigenpairs of a {n}x{n} operator")));
    }
    let block = opts.block_size.clamp(1, n);
    let basis = opts
        .basis_size
        .unwrap_or_else(|| (2 * k).max(k + 16 * block))
        .max(k + block)
        .min(n);
    let keep = if basis >= n { basis } else { (k + (basis - k) / 2).min(basis - block).max(k) };
    let budget = opts.max_matvecs.unwrap_or(50 * k);

    let mut s = Solver {
        op,
        n,
        v: Vec::with_capacity(basis),
        w: Vec::with_capacity(basis),
        t: Vec::with_capacity(basis),
        rng: ChaCha8Rng::seed_from_u64(opts.seed),
        matvecs: 0,
    };

    let mut pending = Vec::new();
    for _ in 0..block {
        let r = s.random_vector();
        if let Some(v) = s.admit(r) {
            s.v.push(v.clone());
            pending.push(v);
        }
    }
    s.v.clear();

    let mut worst: f64;
    let mut converged: usize;
    loop {
        // Expand up to the basis size.
        let mut block_start = s.v.len();
        for v in pending.drain(..) {
            s.push(v);
        }
        while s.v.len() < basis {
            let blk = block_start..s.v.len();
            block_start = s.v.len();
            let room = basis - s.v.len();
            let next: Vec<Vec<f64>> = s.next_block(blk).into_iter().take(room).collect();
            if next.is_empty() {
                break;
            }
            for v in next {
                s.push(v);
            }
        }
        let exhausted = s.v.len() >= n || s.v.len() < basis;

        let (theta, y) = ritz(&s.t);
        let p = s.v.len();
        let want = k.min(p);
        let retain = if exhausted { want } else { keep.min(p) };
        let xs = combine(&s.v, &y, retain, n);
        let axs = combine(&s.w, &y, retain, n);
        let resid: Vec<f64> = (0..want)
            .map(|i| {
                let r: f64 = axs[i]
                    .iter()
                    .zip(&xs[i])
                    .map(|(a, x)| (a - theta[i] * x).powi(2))
                    .sum();
                r.sqrt()
            })
            .collect();
        let ok = |i: usize| resid[i] <= opts.tolerance * theta[i].abs().max(1.0);
        converged = (0..want).take_while(|&i| ok(i)).count();
        worst = resid.iter().copied().fold(0.0, f64::max);

        if want == k && converged == k {
            let mut vectors: Vec<Vec<f64>> = xs.into_iter().take(k).collect();
            let mut residuals = Vec::with_capacity(k);
            for (i, x) in vectors.iter_mut().enumerate() {
                let nx = norm(x);
                x.iter_mut().for_each(|v| *v /= nx);
                fix_sign(x);
                let ax = s.apply(x);
                let r: f64 = ax.iter().zip(x.iter()).map(|(a, b)| (a - theta[i] * b).powi(2)).sum();
                residuals.push(r.sqrt());
            }
            return Ok(EigenPairs {
                values: theta[..k].to_vec(),
                vectors,
                residuals,
                matvecs: s.matvecs,
            });
        }
        if exhausted || s.matvecs >= budget {
            break;
        }

        // Thick restart: lowest Ritz vectors plus the next Krylov block.
        let last_block = p.saturating_sub(block)..p;
        pending = s.next_block(last_block);
        s.v = xs;
        s.w = axs;
        s.t = (0..retain)
            .map(|i| {
                let mut row = vec![0.0; retain];
                row[i] = theta[i];
                row
            })
            .collect();
        // Pending vectors were orthogonalized against the old basis, which spans the kept ones.
        if pending.is_empty() {
            break;
        }
    }

    Err(Error::NoConvergence {
        matvecs: s.matvecs,
        worst_residual: worst,
        converged,
        requested: k,
    })
}

/// Makes the largest-magnitude entry positive (first one on ties).
fn fix_sign(x: &mut [f64]) {
    let mut best = 0usize;
    for (i, v) in x.iter().enumerate() {
        if v.abs() > x[best].abs() {
            best = i;
        }
    }
    if x[best] < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
}
