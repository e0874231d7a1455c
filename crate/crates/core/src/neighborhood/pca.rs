use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Principal components of a small point set.
#[derive(Debug, Clone)]
pub struct LocalPca {
    /// Variances along `directions`, descending and nonnegative.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal unit vectors in ambient space, one per eigenvalue.
    pub directions: Vec<Vec<f64>>,
    /// Set when every point coincides; eigenvalues are then all zero.
    pub degenerate: bool,
}

/// PCA of `points` (each of the same ambient dimension) about their mean.
pub fn pca_of(points: &[&[f64]]) -> Result<LocalPca> {
    let count = points.len();
    if count < 2 {
        return Err(Error::invalid("PCA needs at least two points"));
    }
    let dim = points[0].len();
    let mut mean = vec![0.0; dim];
    for p in points {
        for (m, v) in mean.iter_mut().zip(p.iter()) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= count as f64;
    }

    let centered = DMatrix::from_fn(count, dim, |r, c| points[r][c] - mean[c]);
    let degenerate = centered.iter().all(|v| *v == 0.0);
    let rank_cap = count.min(dim);
    if degenerate {
        let directions = (0..rank_cap)
            .map(|k| {
                let mut e = vec![0.0; dim];
                e[k] = 1.0;
                e
            })
            .collect();
        return Ok(LocalPca {
            eigenvalues: vec![0.0; rank_cap],
            directions,
            degenerate: true,
        });
    }

    let svd = centered.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::invalid("SVD did not produce right singular vectors"))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

    let eigenvalues = order
        .iter()
        .map(|&k| svd.singular_values[k].powi(2) / count as f64)
        .collect();
    let directions = order
        .iter()
        .map(|&k| v_t.row(k).iter().copied().collect())
        .collect();
    Ok(LocalPca {
        eigenvalues,
        directions,
        degenerate: false,
    })
}

/// Number of significant principal directions: the position of the first
/// relative drop below `drop_ratio`, else the count above an absolute floor.
pub fn estimate_local_dimension(eigenvalues: &[f64], drop_ratio: f64) -> usize {
    const FLOOR: f64 = 1e-12;
    if eigenvalues.first().is_none_or(|&e| e <= 0.0) {
        return 0;
    }
    for i in 0..eigenvalues.len().saturating_sub(1) {
        if eigenvalues[i] <= 0.0 {
            return i;
        }
        if eigenvalues[i + 1] / eigenvalues[i] < drop_ratio {
            return i + 1;
        }
    }
    eigenvalues.iter().filter(|&&e| e > FLOOR).count()
}
