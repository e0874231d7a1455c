use std::cmp::Ordering;

use rayon::prelude::*;

use super::Points;
use crate::error::{Error, Result};

/// Exact k-nearest-neighbor lists, row-major `n x k`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnLists {
    pub k: usize,
    pub neighbors: Vec<usize>,
    pub distances: Vec<f64>,
}

impl KnnLists {
    pub fn neighbors_of(&self, i: usize) -> &[usize] {
        &self.neighbors[i * self.k..(i + 1) * self.k]
    }

    pub fn distances_of(&self, i: usize) -> &[f64] {
        &self.distances[i * self.k..(i + 1) * self.k]
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Brute-force scan. Ties in distance are broken by the lower index.
pub fn knn<P: Points + ?Sized>(points: &P, k: usize) -> Result<KnnLists> {
    let n = points.len();
    if k == 0 {
        return Err(Error::invalid("neighbor count must be positive"));
    }
    if k >= n {
        return Err(Error::invalid(format!(
            "neighbor count {k} must be smaller than the number of points {n}"
        )));
    }

    let rows: Vec<Vec<(f64, usize)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let p = points.point(i);
            let mut cand: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (squared_distance(p, points.point(j)), j))
                .collect();
            let order = |a: &(f64, usize), b: &(f64, usize)| -> Ordering {
                a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
            };
            if k < cand.len() {
                cand.select_nth_unstable_by(k - 1, order);
            }
            let mut row = cand[..k].to_vec();
            row.sort_unstable_by(order);
            row
        })
        .collect();

    let mut neighbors = Vec::with_capacity(n * k);
    let mut distances = Vec::with_capacity(n * k);
    for row in rows {
        for (d2, j) in row {
            neighbors.push(j);
            distances.push(d2.sqrt());
        }
    }
    Ok(KnnLists {
        k,
        neighbors,
        distances,
    })
}
