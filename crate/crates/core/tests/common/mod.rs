#![allow(dead_code)]

use flowhks::neighborhood::PointCloud;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Gently curved 2-D sheet in `dim`-space with a little normal noise.
pub fn sheet(n: usize, dim: usize, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(n * dim);
    for _ in 0..n {
        let u: f64 = rng.random::<f64>() * 4.0;
        let v: f64 = rng.random::<f64>() * 3.0;
        let mut p = vec![0.0; dim];
        p[0] = u;
        p[1] = v;
        p[2] = 0.15 * (u * 0.8).sin() * (v * 0.6).cos();
        for x in p.iter_mut().skip(3) {
            *x = 1e-3 * (rng.random::<f64>() - 0.5);
        }
        data.extend(p);
    }
    PointCloud::new(dim, data).unwrap()
}

/// Ascending eigenvalues and matching unit eigenvectors (columns).
pub fn dense_eigen(m: &[Vec<f64>]) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.len();
    let mat = DMatrix::from_fn(n, n, |i, j| m[i][j]);
    let eig = SymmetricEigen::new(mat);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
