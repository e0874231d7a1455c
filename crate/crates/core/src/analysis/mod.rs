//! Mean maps, point similarity and clustering over one or more HKS fields.

mod kmeans;

pub use kmeans::{adjusted_rand_index, canonicalize_labels, kmeans, Clustering};

use std::io::Write;

use crate::error::{Error, Result};
use crate::flowfield::{AxisBox, PathlineSet};
use crate::hks::{sample_scales, HksField};

/// Inclusive range of scale indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScaleRange {
    lo: usize,
    hi: usize,
}

impl ScaleRange {
    pub fn new(lo: usize, hi: usize, scale_count: usize) -> Result<Self> {
        if lo > hi || hi >= scale_count {
            return Err(Error::invalid(format!(
                "scale range [{lo}, {hi}] is not within [0, {})",
                scale_count
            )));
        }
        Ok(ScaleRange { lo, hi })
    }

    pub fn full(scale_count: usize) -> Self {
        ScaleRange {
            lo: 0,
            hi: scale_count.saturating_sub(1),
        }
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn check(&self, field: &HksField) -> Result<()> {
        if self.hi >= field.scale_count() {
            return Err(Error::invalid(format!(
                "scale index {} out of range for {} scales",
                self.hi,
                field.scale_count()
            )));
        }
        Ok(())
    }
}

/// Which view of the signature distances and clustering use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Domain {
    /// `log10` of the normalized values.
    #[default]
    Log,
    /// Normalized values.
    Linear,
}

impl Domain {
    fn curve<'a>(&self, field: &'a HksField, p: usize, range: ScaleRange) -> &'a [f64] {
        let row = match self {
            Domain::Log => field.log_row(p),
            Domain::Linear => field.row(p),
        };
        &row[range.lo..=range.hi]
    }

    fn to_value(&self, x: f64) -> f64 {
        match self {
            Domain::Log => 10f64.powf(x),
            Domain::Linear => x,
        }
    }
}

/// Mean of the log-domain signature over `range`, per point.
pub fn mean_hks(field: &HksField, range: ScaleRange) -> Result<Vec<f64>> {
    range.check(field)?;
    let w = range.len() as f64;
    Ok((0..field.n())
        .map(|p| Domain::Log.curve(field, p, range).iter().sum::<f64>() / w)
        .collect())
}

/// A point within one of several datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointRef {
    pub dataset: usize,
    pub point: usize,
}

fn same_grid(fields: &[&HksField]) -> Result<()> {
    let first = fields.first().ok_or_else(|| Error::invalid("no fields given"))?;
    if fields.iter().any(|f| f.scales() != first.scales()) {
        return Err(Error::MismatchedScales);
    }
    Ok(())
}

fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// L2 distance of every point's sub-curve to the anchor's, for every dataset.
pub fn similarity_field(fields: &[&HksField], anchor: PointRef, range: ScaleRange, domain: Domain) -> Result<Vec<Vec<f64>>> {
    same_grid(fields)?;
    range.check(fields[0])?;
    let af = fields
        .get(anchor.dataset)
        .ok_or_else(|| Error::invalid(format!("no dataset {}", anchor.dataset)))?;
    if anchor.point >= af.n() {
        return Err(Error::invalid(format!("anchor point {} out of range", anchor.point)));
    }
    let a = domain.curve(af, anchor.point, range);
    Ok(fields
        .iter()
        .map(|f| (0..f.n()).map(|p| l2(a, domain.curve(f, p, range))).collect())
        .collect())
}

/// Resamples two fields onto 100 log-spaced scales over the overlap of their
/// scale intervals, interpolating linearly in `(ln s, log10 HKS)`.
/// Identical grids are returned unchanged.
pub fn align_scales(a: &HksField, b: &HksField) -> Result<(HksField, HksField)> {
    if a.scales() == b.scales() {
        return Ok((a.clone(), b.clone()));
    }
    let lo = a.s_min().max(b.s_min());
    let hi = a.s_max().min(b.s_max());
    if !(lo < hi) {
        return Err(Error::DisjointScales);
    }
    let grid = sample_scales(lo, hi, 100)?;
    Ok((resample(a, &grid)?, resample(b, &grid)?))
}

/// Interpolates `field` onto `grid`, which must lie within its scale interval.
pub fn resample(field: &HksField, grid: &[f64]) -> Result<HksField> {
    let knots: Vec<f64> = field.scales().iter().map(|s| s.ln()).collect();
    let last = knots.len() - 1;
    let weights: Vec<(usize, f64)> = grid
        .iter()
        .map(|s| {
            let x = s.ln();
            let i = knots.partition_point(|&k| k <= x).clamp(1, last) - 1;
            let t = ((x - knots[i]) / (knots[i + 1] - knots[i])).clamp(0.0, 1.0);
            (i, t)
        })
        .collect();
    let mut values = Vec::with_capacity(field.n() * grid.len());
    for p in 0..field.n() {
        let row = field.log_row(p);
        values.extend(weights.iter().map(|&(i, t)| 10f64.powf(row[i] + t * (row[i + 1] - row[i]))));
    }
    HksField::new(grid.to_vec(), values)
}

/// Indices of points whose seed lies in any of `boxes`; all points when empty.
pub fn select_by_regions(pathlines: &PathlineSet, boxes: &[AxisBox]) -> Vec<usize> {
    (0..pathlines.n())
        .filter(|&i| boxes.is_empty() || boxes.iter().any(|b| b.contains(pathlines.seed(i))))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClusterMode {
    /// One clustering over the pooled points of all datasets.
    #[default]
    Joint,
    /// An independent clustering per dataset.
    Separate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterOptions {
    pub k: usize,
    pub mode: ClusterMode,
    pub seed: u64,
    pub domain: Domain,
    pub max_iterations: usize,
    /// k-means++ starts; the lowest-inertia run is kept.
    pub restarts: usize,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        ClusterOptions {
            k: 4,
            mode: ClusterMode::Joint,
            seed: 0,
            domain: Domain::Log,
            max_iterations: 300,
            restarts: 10,
        }
    }
}

/// Labels per dataset (aligned with `selected`) and centroid curves.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    pub mode: ClusterMode,
    pub range: ScaleRange,
    pub selected: Vec<Vec<usize>>,
    pub labels: Vec<Vec<usize>>,
    /// One set for joint mode, one per dataset otherwise.
    pub centroids: Vec<Vec<Vec<f64>>>,
    pub inertia: Vec<f64>,
}

impl ClusterResult {
    /// Centroid curves of group `g` as an HKS field with `n = k` on the given scales.
    pub fn centroid_field(&self, g: usize, scales: &[f64], domain: Domain) -> Result<HksField> {
        let r = self.range;
        let values = self.centroids[g]
            .iter()
            .flat_map(|c| c.iter().map(|&x| domain.to_value(x)))
            .collect();
        HksField::new(scales[r.lo..=r.hi].to_vec(), values)
    }
}

/// k-means on sub-curves of the selected points.
pub fn kmeans_hks(
    fields: &[&HksField],
    selected: &[Vec<usize>],
    range: ScaleRange,
    opts: &ClusterOptions,
) -> Result<ClusterResult> {
    if fields.is_empty() || fields.len() != selected.len() {
        return Err(Error::invalid("need one selection per dataset"));
    }
    for (f, sel) in fields.iter().zip(selected) {
        range.check(f)?;
        if let Some(&p) = sel.iter().find(|&&p| p >= f.n()) {
            return Err(Error::invalid(format!("selected point {p} out of range")));
        }
    }
    let rows_of = |f: &HksField, sel: &[usize]| -> Vec<Vec<f64>> {
        sel.iter().map(|&p| opts.domain.curve(f, p, range).to_vec()).collect()
    };
    let mut labels = Vec::new();
    let mut centroids = Vec::new();
    let mut inertia = Vec::new();
    match opts.mode {
        ClusterMode::Joint => {
            same_grid(fields)?;
            let rows: Vec<Vec<f64>> = fields.iter().zip(selected).flat_map(|(f, s)| rows_of(f, s)).collect();
            let c = kmeans(&rows, opts.k, opts.seed, opts.max_iterations, opts.restarts)?;
            let mut start = 0;
            for sel in selected {
                labels.push(c.labels[start..start + sel.len()].to_vec());
                start += sel.len();
            }
            centroids.push(c.centroids);
            inertia.push(c.inertia);
        }
        ClusterMode::Separate => {
            for (f, sel) in fields.iter().zip(selected) {
                let c = kmeans(&rows_of(f, sel), opts.k, opts.seed, opts.max_iterations, opts.restarts)?;
                labels.push(c.labels);
                centroids.push(c.centroids);
                inertia.push(c.inertia);
            }
        }
    }
    Ok(ClusterResult {
        mode: opts.mode,
        range,
        selected: selected.to_vec(),
        labels,
        centroids,
        inertia,
    })
}

/// Baseline: k-means on the flattened pathline coordinates, with the same
/// iteration and restart settings as `opts` (its domain is ignored).
pub fn kmeans_positions(pathlines: &PathlineSet, selected: &[usize], opts: &ClusterOptions) -> Result<Clustering> {
    let rows: Vec<Vec<f64>> = selected.iter().map(|&i| pathlines.point(i).to_vec()).collect();
    kmeans(&rows, opts.k, opts.seed, opts.max_iterations, opts.restarts)
}

/// A per-point analysis outcome, exportable as CSV.
#[derive(Debug, Clone, PartialEq)]
pub enum AnalysisResult {
    Mean(Vec<Vec<f64>>),
    Similarity { anchor: PointRef, distances: Vec<Vec<f64>> },
    Clusters(ClusterResult),
}

impl AnalysisResult {
    /// Writes `index,dataset,label_or_value` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,dataset,label_or_value")?;
        match self {
            AnalysisResult::Mean(values) | AnalysisResult::Similarity { distances: values, .. } => {
                for (d, vals) in values.iter().enumerate() {
                    for (i, v) in vals.iter().enumerate() {
                        writeln!(w, "{i},{d},{v}")?;
                    }
                }
            }
            AnalysisResult::Clusters(c) => {
                for (d, (sel, labels)) in c.selected.iter().zip(&c.labels).enumerate() {
                    for (i, l) in sel.iter().zip(labels) {
                        writeln!(w, "{i},{d},{l}")?;
                    }
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}
