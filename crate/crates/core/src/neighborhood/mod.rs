//! Neighborhood structure of pathlines viewed as points in `(m*d)`-space:
//! exact kNN, local PCA dimension, tangent projection and Voronoi cell volumes.

mod knn;
mod pca;
pub mod voronoi;

pub use knn::{knn, KnnLists};
pub use pca::{estimate_local_dimension, pca_of, LocalPca};
pub use voronoi::{voronoi_volume, VoronoiVolume};

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flowfield::PathlineSet;

/// Indexed access to a cloud of equal-dimension points.
pub trait Points: Sync {
    fn len(&self) -> usize;
    fn dim(&self) -> usize;
    fn point(&self, i: usize) -> &[f64];

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Points for PathlineSet {
    fn len(&self) -> usize {
        self.n()
    }

    fn dim(&self) -> usize {
        self.ambient_dim()
    }

    fn point(&self, i: usize) -> &[f64] {
        PathlineSet::point(self, i)
    }
}

/// Plain row-major point cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    data: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.len() % dim != 0 {
            return Err(Error::invalid("point data length must be a multiple of dim"));
        }
        Ok(PointCloud { dim, data })
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

impl Points for PointCloud {
    fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborhoodConfig {
    /// Neighbor count `M`.
    pub neighbors: usize,
    /// Relative eigenvalue drop that marks the local dimension. The default
    /// of 0.3 classifies about 99% of a 200x200 ABC pathline grid as 2-D.
    pub drop_ratio: f64,
}

impl Default for NeighborhoodConfig {
    fn default() -> Self {
        NeighborhoodConfig {
            neighbors: 30,
            drop_ratio: 0.3,
        }
    }
}

/// Immutable per-point neighborhood data.
#[derive(Debug, Clone)]
pub struct NeighborhoodGraph {
    pub knn: KnnLists,
    pub local_dim: Vec<usize>,
    pub boundary: Vec<bool>,
    pub cell_volume: Vec<f64>,
    /// Distance to the farthest of the `M` neighbors.
    pub delta: Vec<f64>,
    /// Median of `delta`.
    pub eta: f64,
}

/// Boundary fraction and local-dimension histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSummary {
    pub n: usize,
    pub neighbors: usize,
    pub eta: f64,
    pub boundary_fraction: f64,
    /// `histogram[k]` counts points with estimated dimension `k`.
    pub dimension_histogram: Vec<usize>,
}

impl NeighborhoodGraph {
    pub fn n(&self) -> usize {
        self.delta.len()
    }

    pub fn neighbor_count(&self) -> usize {
        self.knn.k
    }

    pub fn neighbors_of(&self, i: usize) -> &[usize] {
        self.knn.neighbors_of(i)
    }

    pub fn summary(&self) -> GraphSummary {
        let n = self.n();
        let max_dim = self.local_dim.iter().copied().max().unwrap_or(0);
        let mut hist = vec![0usize; max_dim + 1];
        for &d in &self.local_dim {
            hist[d] += 1;
        }
        GraphSummary {
            n,
            neighbors: self.knn.k,
            eta: self.eta,
            boundary_fraction: self.boundary.iter().filter(|&&b| b).count() as f64 / n.max(1) as f64,
            dimension_histogram: hist,
        }
    }

    /// Fraction of points whose estimated dimension equals `dim`.
    pub fn dimension_fraction(&self, dim: usize) -> f64 {
        self.local_dim.iter().filter(|&&d| d == dim).count() as f64 / self.n().max(1) as f64
    }

    /// Debug dump: `index,local_dim,boundary_flag,cell_volume,delta`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,local_dim,boundary_flag,cell_volume,delta")?;
        for i in 0..self.n() {
            writeln!(
                w,
                "{i},{},{},{},{}",
                self.local_dim[i],
                u8::from(self.boundary[i]),
                self.cell_volume[i],
                self.delta[i]
            )?;
        }
        Ok(())
    }
}

/// PCA of point `i` together with its neighbors.
pub fn local_pca<P: Points + ?Sized>(i: usize, knn: &KnnLists, points: &P) -> Result<LocalPca> {
    if knn.k < 2 {
        return Err(Error::invalid("local PCA needs at least 2 neighbors"));
    }
    let mut members: Vec<&[f64]> = Vec::with_capacity(knn.k + 1);
    members.push(points.point(i));
    members.extend(knn.neighbors_of(i).iter().map(|&j| points.point(j)));
    pca_of(&members)
}

/// Coordinates of point `i`'s neighbors in its top-`dim` principal directions,
/// relative to the point itself (which maps to the origin).
pub fn project_to_tangent<P: Points + ?Sized>(
    i: usize,
    knn: &KnnLists,
    points: &P,
    pca: &LocalPca,
    dim: usize,
) -> Result<Vec<Vec<f64>>> {
    if dim > points.dim() || dim > pca.directions.len() {
        return Err(Error::invalid(format!(
            "cannot project to {dim} dimensions ({} principal directions available)",
            pca.directions.len()
        )));
    }
    let p = points.point(i);
    Ok(knn
        .neighbors_of(i)
        .iter()
        .map(|&j| {
            let q = points.point(j);
            pca.directions[..dim]
                .iter()
                .map(|dir| dir.iter().zip(q.iter().zip(p)).map(|(u, (a, b))| u * (a - b)).sum())
                .collect()
        })
        .collect())
}

struct PointResult {
    local_dim: usize,
    boundary: bool,
    volume: f64,
}

fn analyze_point<P: Points + ?Sized>(
    i: usize,
    knn: &KnnLists,
    points: &P,
    delta: f64,
    drop_ratio: f64,
) -> Result<PointResult> {
    if !(delta > 0.0) {
        return Err(Error::DegenerateNeighborhood {
            index: i,
            message: "all neighbors coincide with the point".into(),
        });
    }
    let pca = local_pca(i, knn, points)?;
    let local_dim = estimate_local_dimension(&pca.eigenvalues, drop_ratio);
    if local_dim > 2 {
        return Ok(PointResult {
            local_dim,
            boundary: true,
            volume: delta * delta,
        });
    }
    let proj_dim = 2.min(pca.directions.len());
    let projected = project_to_tangent(i, knn, points, &pca, proj_dim)?;
    let planar: Vec<[f64; 2]> = projected
        .iter()
        .map(|c| [c[0], c.get(1).copied().unwrap_or(0.0)])
        .collect();
    let cell = voronoi_volume(&planar, delta).map_err(|e| Error::DegenerateNeighborhood {
        index: i,
        message: e.to_string(),
    })?;
    if !(cell.volume > 0.0) {
        return Err(Error::DegenerateNeighborhood {
            index: i,
            message: "zero cell volume".into(),
        });
    }
    Ok(PointResult {
        local_dim,
        boundary: cell.boundary,
        volume: cell.volume,
    })
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Builds the full neighborhood graph: kNN, per-point dimension and volume, `eta`.
pub fn build_graph<P: Points + ?Sized>(points: &P, config: &NeighborhoodConfig) -> Result<NeighborhoodGraph> {
    if config.neighbors < 2 {
        return Err(Error::invalid("need at least 2 neighbors per point"));
    }
    if !(config.drop_ratio > 0.0 && config.drop_ratio < 1.0) {
        return Err(Error::invalid("drop_ratio must lie in (0, 1)"));
    }
    let knn = knn(points, config.neighbors)?;
    let delta: Vec<f64> = (0..points.len())
        .map(|i| knn.distances_of(i)[knn.k - 1])
        .collect();
    let eta = median(&delta);

    let per_point: Vec<PointResult> = (0..points.len())
        .into_par_iter()
        .map(|i| analyze_point(i, &knn, points, delta[i], config.drop_ratio))
        .collect::<Result<_>>()?;

    Ok(NeighborhoodGraph {
        local_dim: per_point.iter().map(|r| r.local_dim).collect(),
        boundary: per_point.iter().map(|r| r.boundary).collect(),
        cell_volume: per_point.iter().map(|r| r.volume).collect(),
        knn,
        delta,
        eta,
    })
}
