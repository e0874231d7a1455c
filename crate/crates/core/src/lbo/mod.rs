//! Discrete Laplace-Beltrami operator on a point cloud.
//!
//! `Q` holds volume-weighted Gaussian affinities with `q_ii = -sum_j q_ij`, and
//! `B` is the diagonal of Voronoi cell volumes, so the operator is `B^-1 Q`.
//! Its spectrum is obtained from the symmetric `U = B^-1/2 Q B^-1/2`; the
//! eigenvalues reported are those of `-U` (nonnegative, ascending).

mod lanczos;
mod sparse;

pub use lanczos::{smallest_eigenpairs, EigenPairs, LanczosOptions, SymmetricOperator};
pub use sparse::CsrMatrix;

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::neighborhood::{NeighborhoodGraph, Points};

/// How small affinities are dropped before the diagonal is formed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sparsity {
    /// Zero every `q_ij < T`.
    Threshold(f64),
    /// Keep the largest `fraction * (n - 1)` affinities of each row, then take
    /// the union of the row masks so the pattern stays symmetric.
    RowFraction(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LboConfig {
    /// `sigma = alpha * eta`.
    pub alpha: f64,
    pub sparsity: Sparsity,
    /// Requested eigenpairs; `None` means `min(300, n)`.
    pub n_eig: Option<usize>,
    /// Use `exp(-d^2 / (4 sigma^2))` instead of `exp(-d^2 / (4 sigma))`.
    pub exponent_sigma_squared: bool,
}

impl Default for LboConfig {
    fn default() -> Self {
        LboConfig {
            alpha: 0.5,
            sparsity: Sparsity::RowFraction(0.05),
            n_eig: None,
            exponent_sigma_squared: false,
        }
    }
}

impl LboConfig {
    pub fn eigen_count(&self, n: usize) -> usize {
        self.n_eig.unwrap_or(300.min(n))
    }

    fn validate(&self, n: usize) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::invalid(format!("alpha must be positive, got {}", self.alpha)));
        }
        match self.sparsity {
            Sparsity::Threshold(t) if !(t >= 0.0) => {
                return Err(Error::invalid(format!("threshold must be nonnegative, got {t}")))
            }
            Sparsity::RowFraction(f) if !(f > 0.0 && f <= 1.0) => {
                return Err(Error::invalid(format!("row fraction must lie in (0, 1], got {f}")))
            }
            _ => {}
        }
        let k = self.eigen_count(n);
        if k < 2 || k > n {
            return Err(Error::invalid(format!("need 2 <= n_eig <= n, got n_eig={k}, n={n}")));
        }
        Ok(())
    }
}

/// Assembled affinity matrix and its mass diagonal.
#[derive(Debug, Clone)]
pub struct Assembled {
    pub q: CsrMatrix,
    pub mass: Vec<f64>,
    pub sigma: f64,
}

const UNDERFLOW: f64 = 1e-300;

/// Builds `Q` (symmetric, zero row sums) and `B` from the graph's cell volumes.
pub fn assemble<P: Points + ?Sized>(graph: &NeighborhoodGraph, points: &P, config: &LboConfig) -> Result<Assembled> {
    assemble_with(points, &graph.cell_volume, graph.eta, config)
}

/// As [`assemble`] with explicit volumes and density scale.
pub fn assemble_with<P: Points + ?Sized>(
    points: &P,
    volumes: &[f64],
    eta: f64,
    config: &LboConfig,
) -> Result<Assembled> {
    let n = points.len();
    if volumes.len() != n {
        return Err(Error::invalid("one volume per point is required"));
    }
    if n < 2 {
        return Err(Error::invalid("need at least two points"));
    }
    config.validate(n)?;
    let sigma = config.alpha * eta;
    if !(sigma > 0.0) {
        return Err(Error::ZeroDensityScale);
    }
    if let Some(index) = volumes.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::NonPositiveMass {
            index,
            value: volumes[index],
        });
    }

    let prefactor = 1.0 / (4.0 * PI * sigma * sigma);
    let denom = if config.exponent_sigma_squared { 4.0 * sigma * sigma } else { 4.0 * sigma };
    let affinity = |i: usize, j: usize| -> f64 {
        let d2: f64 = points
            .point(i)
            .iter()
            .zip(points.point(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let q = prefactor * (volumes[i] * volumes[j]) * (-d2 / denom).exp();
        if q < UNDERFLOW {
            0.0
        } else {
            q
        }
    };

    let keep_per_row = match config.sparsity {
        Sparsity::RowFraction(f) => ((f * (n - 1) as f64).round() as usize).clamp(1, n - 1),
        Sparsity::Threshold(_) => n - 1,
    };

    // Row-local selection.
    let selected: Vec<Vec<(usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row: Vec<(usize, f64)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (j, affinity(i, j)))
                .filter(|&(_, q)| q > 0.0)
                .collect();
            match config.sparsity {
                Sparsity::Threshold(t) => row.retain(|&(_, q)| q >= t),
                Sparsity::RowFraction(_) => {
                    let order = |a: &(usize, f64), b: &(usize, f64)| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0));
                    if keep_per_row < row.len() {
                        row.select_nth_unstable_by(keep_per_row - 1, order);
                        row.truncate(keep_per_row);
                    }
                }
            }
            row.shrink_to_fit();
            row
        })
        .collect();

    // Union of the row masks.
    let mut rows: Vec<Vec<(usize, f64)>> = selected.clone();
    for (i, row) in selected.iter().enumerate() {
        for &(j, q) in row {
            rows[j].push((i, q));
        }
    }
    let rows: Vec<Vec<(usize, f64)>> = rows
        .into_par_iter()
        .enumerate()
        .map(|(i, mut row)| {
            row.sort_by(|a, b| a.0.cmp(&b.0));
            row.dedup_by(|a, b| a.0 == b.0);
            let diag = -row.iter().map(|&(_, q)| q).sum::<f64>();
            let pos = row.partition_point(|&(j, _)| j < i);
            row.insert(pos, (i, diag));
            row
        })
        .collect();

    if let Some(index) = rows.iter().position(|r| r.len() < 2) {
        return Err(Error::IsolatedPoint { index });
    }

    Ok(Assembled {
        q: CsrMatrix::from_rows(rows)?,
        mass: volumes.to_vec(),
        sigma,
    })
}

/// `U = B^-1/2 Q B^-1/2`.
pub fn symmetrize(q: &CsrMatrix, mass: &[f64]) -> Result<CsrMatrix> {
    if mass.len() != q.n() {
        return Err(Error::invalid("mass diagonal length mismatch"));
    }
    if let Some(index) = mass.iter().position(|&b| !(b > 0.0)) {
        return Err(Error::NonPositiveMass {
            index,
            value: mass[index],
        });
    }
    let root: Vec<f64> = mass.iter().map(|b| b.sqrt()).collect();
    Ok(q.map_values(|i, j, v| v / (root[i] * root[j])))
}

/// Eigenvalues `lambda_i` of `-U` with `B`-orthonormal eigenvectors `phi_i = B^-1/2 phi_hat_i`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[i]` is `phi_i` over all points.
    pub eigenvectors: Vec<Vec<f64>>,
    pub mass: Vec<f64>,
    /// `||U phi_hat_i + lambda_i phi_hat_i||`.
    pub residuals: Vec<f64>,
    pub matvecs: usize,
}

impl SpectralDecomposition {
    pub fn n(&self) -> usize {
        self.mass.len()
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Largest `|phi_i^T B phi_j - delta_ij|`.
    pub fn b_orthonormality_error(&self) -> f64 {
        let k = self.len();
        let mut worst = 0.0f64;
        for a in 0..k {
            for b in a..k {
                let g: f64 = (0..self.n())
                    .map(|p| self.mass[p] * self.eigenvectors[a][p] * self.eigenvectors[b][p])
                    .sum();
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((g - want).abs());
            }
        }
        worst
    }

    /// Spectrum dump: `index,eigenvalue`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,eigenvalue")?;
        for (i, l) in self.eigenvalues.iter().enumerate() {
            writeln!(w, "{i},{l}")?;
        }
        Ok(())
    }
}

impl SymmetricOperator for CsrMatrix {
    fn size(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y)
    }
}

struct NegatedOperator<'a>(&'a CsrMatrix);

impl SymmetricOperator for NegatedOperator<'_> {
    fn size(&self) -> usize {
        self.0.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.0.matvec(x, y);
        y.iter_mut().for_each(|v| *v = -*v);
    }
}

/// Smallest `n_eig` eigenpairs of `-U`, mapped back through `B^-1/2`.
pub fn eigendecompose(u: &CsrMatrix, mass: &[f64], n_eig: usize, opts: &LanczosOptions) -> Result<SpectralDecomposition> {
    let n = u.n();
    if mass.len() != n {
        return Err(Error::invalid("mass diagonal length mismatch"));
    }
    if n_eig == 0 || n_eig > n {
        return Err(Error::invalid(format!("n_eig must lie in [1, {n}], got {n_eig}")));
    }
    let pairs = smallest_eigenpairs(&NegatedOperator(u), n_eig, opts)?;
    let inv_root: Vec<f64> = mass.iter().map(|b| 1.0 / b.sqrt()).collect();
    let eigenvectors = pairs
        .vectors
        .iter()
        .map(|v| v.iter().zip(&inv_root).map(|(x, s)| x * s).collect())
        .collect();
    Ok(SpectralDecomposition {
        eigenvalues: pairs.values,
        eigenvectors,
        mass: mass.to_vec(),
        residuals: pairs.residuals,
        matvecs: pairs.matvecs,
    })
}
