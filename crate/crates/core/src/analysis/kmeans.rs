//! Seeded k-means (k-means++ initialization, Lloyd iterations).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// Canonical labels in `[0, k)`.
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    /// Inertia after each assignment step of the kept run.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid, lowest index on ties.
fn nearest(row: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, cent) in centroids.iter().enumerate() {
        let d = dist2(row, cent);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus(rows: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut centroids = vec![rows[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = rows.iter().map(|r| dist2(r, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if acc > target && d > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = rows[pick].clone();
        for (d, r) in d2.iter_mut().zip(rows) {
            *d = d.min(dist2(r, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Clusters `rows` into `k` groups, keeping the lowest-inertia run of
/// `restarts` k-means++ starts drawn from one seeded stream. Labels come back
/// canonicalized.
pub fn kmeans(rows: &[Vec<f64>], k: usize, seed: u64, max_iterations: usize, restarts: usize) -> Result<Clustering> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if restarts == 0 {
        return Err(Error::invalid("restarts must be at least 1"));
    }
    if rows.len() < k {
        return Err(Error::TooFewPoints {
            k,
            available: rows.len(),
        });
    }
    let dim = rows[0].len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(Error::invalid("rows have differing lengths"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Clustering> = None;
    for _ in 0..restarts {
        let start = plus_plus(rows, k, &mut rng);
        let run = lloyd(rows, start, max_iterations);
        // Strict comparison: the earliest of equal runs wins.
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    let mut best = best.expect("at least one restart");
    let (labels, centroids) = canonicalize_labels(&best.labels, &best.centroids);
    best.labels = labels;
    best.centroids = centroids;
    Ok(best)
}

fn lloyd(rows: &[Vec<f64>], mut centroids: Vec<Vec<f64>>, max_iterations: usize) -> Clustering {
    let (k, dim) = (centroids.len(), rows[0].len());
    let mut labels: Vec<usize> = vec![usize::MAX; rows.len()];
    let mut history = Vec::new();
    let mut iterations = 0;
    while iterations < max_iterations {
        iterations += 1;
        let assigned: Vec<(usize, f64)> = rows.par_iter().map(|r| nearest(r, &centroids)).collect();
        history.push(assigned.iter().map(|a| a.1).sum());
        let changed = assigned.iter().zip(&labels).any(|(a, &l)| a.0 != l);
        labels = assigned.into_iter().map(|a| a.0).collect();
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (r, &l) in rows.iter().zip(&labels) {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(r) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
    }
    let inertia = rows.iter().zip(&labels).map(|(r, &l)| dist2(r, &centroids[l])).sum();
    Clustering {
        labels,
        centroids,
        inertia,
        inertia_history: history,
        iterations,
    }
}

/// Renumbers clusters by ascending centroid mean, ties by first member index
/// (clusters without members sort last).
pub fn canonicalize_labels(labels: &[usize], centroids: &[Vec<f64>]) -> (Vec<usize>, Vec<Vec<f64>>) {
    let k = centroids.len();
    let mut first = vec![usize::MAX; k];
    for (i, &l) in labels.iter().enumerate().rev() {
        first[l] = i;
    }
    let mean = |c: &Vec<f64>| c.iter().sum::<f64>() / c.len().max(1) as f64;
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        mean(&centroids[a])
            .total_cmp(&mean(&centroids[b]))
            .then(first[a].cmp(&first[b]))
    });
    let mut rank = vec![0; k];
    for (new, &old) in order.iter().enumerate() {
        rank[old] = new;
    }
    (
        labels.iter().map(|&l| rank[l]).collect(),
        order.iter().map(|&o| centroids[o].clone()).collect(),
    )
}

/// Adjusted Rand index of two labelings of the same points.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings differ in length");
    let n = a.len();
    let ka = a.iter().max().map_or(0, |m| m + 1);
    let kb = b.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![vec![0u64; kb]; ka];
    for (&x, &y) in a.iter().zip(b) {
        table[x][y] += 1;
    }
    let c2 = |x: u64| (x * x.saturating_sub(1)) as f64 / 2.0;
    let index: f64 = table.iter().flatten().map(|&x| c2(x)).sum();
    let rows: f64 = table.iter().map(|r| c2(r.iter().sum())).sum();
    let cols: f64 = (0..kb).map(|j| c2(table.iter().map(|r| r[j]).sum())).sum();
    let total = c2(n as u64);
    let expected = rows * cols / total;
    let max = 0.5 * (rows + cols);
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}
