//! Analytic unsteady vector fields and pathline integration.
//!
//! A pathline is stored flattened: `m` positions of dimension `d`,
//! timestep-major, so the whole set is an `n x (m*d)` point cloud.

mod io;
mod wake;

pub use io::{load_pathlines, read_pathlines, write_pathlines, write_pathlines_binary};
pub use wake::{CylinderWake, WakeParams};

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Amplitudes of the unsteady ABC flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbcParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for AbcParams {
    fn default() -> Self {
        AbcParams {
            a: 3f64.sqrt(),
            b: 2f64.sqrt(),
            c: 1.0,
        }
    }
}

impl AbcParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::invalid("ABC amplitudes must be finite"));
        }
        Ok(AbcParams { a, b, c })
    }
}

/// Unsteady ABC velocity: the z coordinate of the steady flow replaced by time.
pub fn eval_abc(x: f64, y: f64, t: f64, params: &AbcParams) -> [f64; 2] {
    [
        params.a * t.sin() + params.c * y.cos(),
        params.b * x.sin() + params.a * t.cos(),
    ]
}

/// A time-dependent velocity field over `dim()`-dimensional space.
pub trait VectorField: Sync {
    fn dim(&self) -> usize;

    /// Writes the velocity at `(x, t)` into `out` (length `dim()`).
    fn velocity(&self, x: &[f64], t: f64, out: &mut [f64]);
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AbcFlow {
    pub params: AbcParams,
}

impl VectorField for AbcFlow {
    fn dim(&self) -> usize {
        2
    }

    fn velocity(&self, x: &[f64], t: f64, out: &mut [f64]) {
        let v = eval_abc(x[0], x[1], t, &self.params);
        out[0] = v[0];
        out[1] = v[1];
    }
}

/// Spatially and temporally constant velocity.
#[derive(Debug, Clone)]
pub struct ConstantField(pub Vec<f64>);

impl VectorField for ConstantField {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn velocity(&self, _x: &[f64], _t: f64, out: &mut [f64]) {
        out.copy_from_slice(&self.0);
    }
}

/// Axis-aligned box `[min, max]` per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisBox {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl AxisBox {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() || min.is_empty() {
            return Err(Error::invalid("box corners must have equal nonzero dimension"));
        }
        Ok(AxisBox { min, max })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.min.iter().zip(&self.max))
            .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }
}

/// Cell-centered uniform lattice over `domain`; the first axis varies fastest.
pub fn seed_grid(domain: &AxisBox, counts: &[usize]) -> Result<Vec<Vec<f64>>> {
    let d = domain.min.len();
    if counts.len() != d {
        return Err(Error::invalid(format!(
            "expected {d} per-axis counts, got {}",
            counts.len()
        )));
    }
    if counts.iter().any(|&c| c == 0) {
        return Err(Error::invalid("per-axis seed counts must be at least 1"));
    }
    for axis in 0..d {
        let extent = domain.max[axis] - domain.min[axis];
        if !(extent > 0.0) || !extent.is_finite() {
            return Err(Error::invalid(format!(
                "degenerate seed box: axis {axis} has extent {extent}"
            )));
        }
    }

    let total: usize = counts.iter().product();
    let mut seeds = Vec::with_capacity(total);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        let p = (0..d)
            .map(|a| {
                let h = (domain.max[a] - domain.min[a]) / counts[a] as f64;
                domain.min[a] + (idx[a] as f64 + 0.5) * h
            })
            .collect();
        seeds.push(p);
        for a in 0..d {
            idx[a] += 1;
            if idx[a] < counts[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    Ok(seeds)
}

/// A set of pathlines sharing one time discretization.
#[derive(Debug, Clone, PartialEq)]
pub struct PathlineSet {
    n: usize,
    d: usize,
    m: usize,
    t0: f64,
    tau: f64,
    timesteps: Vec<f64>,
    coords: Vec<f64>,
}

impl PathlineSet {
    /// Validates and wraps flattened coordinates (`n * m * d` values).
    pub fn new(d: usize, t0: f64, tau: f64, timesteps: Vec<f64>, coords: Vec<f64>) -> Result<Self> {
        let m = timesteps.len();
        if d == 0 {
            return Err(Error::invalid("spatial dimension must be positive"));
        }
        if m < 2 {
            return Err(Error::invalid(format!("need at least 2 timesteps, got {m}")));
        }
        if !(tau > 0.0) || !t0.is_finite() || !tau.is_finite() {
            return Err(Error::invalid(format!("invalid time interval t0={t0}, tau={tau}")));
        }
        if timesteps.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("timesteps must be strictly increasing"));
        }
        let span_tol = 1e-9 * (t0.abs() + tau.abs()).max(1.0);
        if (timesteps[0] - t0).abs() > span_tol || (timesteps[m - 1] - (t0 + tau)).abs() > span_tol
        {
            return Err(Error::invalid("timesteps must span [t0, t0 + tau]"));
        }
        let stride = m * d;
        if coords.len() % stride != 0 {
            return Err(Error::invalid(format!(
                "coordinate count {} is not a multiple of m*d = {stride}",
                coords.len()
            )));
        }
        if let Some(pos) = coords.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite coordinate in pathline {}",
                pos / stride
            )));
        }
        Ok(PathlineSet {
            n: coords.len() / stride,
            d,
            m,
            t0,
            tau,
            timesteps,
            coords,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn timesteps(&self) -> &[f64] {
        &self.timesteps
    }

    /// Dimension of the flattened point, `m * d`.
    pub fn ambient_dim(&self) -> usize {
        self.m * self.d
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Flattened pathline `i`.
    pub fn point(&self, i: usize) -> &[f64] {
        let s = self.ambient_dim();
        &self.coords[i * s..(i + 1) * s]
    }

    /// Start position `x_{t0}` of pathline `i`.
    pub fn seed(&self, i: usize) -> &[f64] {
        &self.point(i)[..self.d]
    }

    pub fn seeds(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.seed(i).to_vec()).collect()
    }

    /// Keeps only the listed timestep indices (ascending, first and last included
    /// by the caller if the span should be preserved).
    pub fn subsample_timesteps(&self, keep: &[usize]) -> Result<PathlineSet> {
        if keep.len() < 2 || keep.windows(2).any(|w| w[1] <= w[0]) || keep[keep.len() - 1] >= self.m
        {
            return Err(Error::invalid("timestep subset must be ascending with at least 2 entries"));
        }
        let timesteps: Vec<f64> = keep.iter().map(|&k| self.timesteps[k]).collect();
        let mut coords = Vec::with_capacity(self.n * keep.len() * self.d);
        for i in 0..self.n {
            let p = self.point(i);
            for &k in keep {
                coords.extend_from_slice(&p[k * self.d..(k + 1) * self.d]);
            }
        }
        let t0 = timesteps[0];
        let tau = timesteps[timesteps.len() - 1] - t0;
        PathlineSet::new(self.d, t0, tau, timesteps, coords)
    }

    /// Applies `f` to every flattened point, e.g. a rigid motion in `(m*d)`-space.
    /// The result is no longer required to have seeds in the first `d` slots
    /// geometrically, but keeps the layout.
    pub fn map_points<F>(&self, f: F) -> Result<PathlineSet>
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        let mut coords = Vec::with_capacity(self.coords.len());
        for i in 0..self.n {
            let q = f(self.point(i));
            if q.len() != self.ambient_dim() {
                return Err(Error::invalid("mapped point changed dimension"));
            }
            coords.extend(q);
        }
        PathlineSet::new(self.d, self.t0, self.tau, self.timesteps.clone(), coords)
    }

    /// Reorders pathlines so that new index `i` holds old pathline `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Result<PathlineSet> {
        if perm.len() != self.n {
            return Err(Error::invalid("permutation length mismatch"));
        }
        let mut coords = Vec::with_capacity(self.coords.len());
        for &old in perm {
            coords.extend_from_slice(self.point(old));
        }
        PathlineSet::new(self.d, self.t0, self.tau, self.timesteps.clone(), coords)
    }
}

/// Integrates pathlines with classic fixed-step RK4, recording `m` uniform samples
/// over `[t0, t0 + tau]`.
pub fn integrate_pathlines<F: VectorField>(
    field: &F,
    seeds: &[Vec<f64>],
    t0: f64,
    tau: f64,
    m: usize,
    substeps_per_sample: usize,
) -> Result<PathlineSet> {
    if m < 2 {
        return Err(Error::invalid(format!("need m >= 2 samples, got {m}")));
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::invalid(format!("duration must be positive, got {tau}")));
    }
    if substeps_per_sample == 0 {
        return Err(Error::invalid("substeps_per_sample must be at least 1"));
    }
    let d = field.dim();
    if let Some(bad) = seeds.iter().position(|s| s.len() != d) {
        return Err(Error::invalid(format!("seed {bad} does not have dimension {d}")));
    }

    let sample_dt = tau / (m - 1) as f64;
    let h = sample_dt / substeps_per_sample as f64;
    let mut timesteps: Vec<f64> = (0..m).map(|k| t0 + k as f64 * sample_dt).collect();
    timesteps[m - 1] = t0 + tau;

    let rows: Vec<Vec<f64>> = seeds
        .par_iter()
        .enumerate()
        .map(|(index, seed)| {
            let mut row = Vec::with_capacity(m * d);
            let mut x = seed.clone();
            row.extend_from_slice(&x);
            let mut stepper = Rk4::new(d);
            for k in 0..m - 1 {
                let t_k = t0 + k as f64 * sample_dt;
                for s in 0..substeps_per_sample {
                    let t = t_k + s as f64 * h;
                    if !stepper.step(field, &mut x, t, h) {
                        return Err(Error::Integration { index, time: t });
                    }
                }
                row.extend_from_slice(&x);
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let coords = rows.concat();
    PathlineSet::new(d, t0, tau, timesteps, coords)
}

struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    fn new(d: usize) -> Self {
        Rk4 {
            k1: vec![0.0; d],
            k2: vec![0.0; d],
            k3: vec![0.0; d],
            k4: vec![0.0; d],
            tmp: vec![0.0; d],
        }
    }

    /// One step in place; returns false if any stage velocity is non-finite.
    fn step<F: VectorField>(&mut self, field: &F, x: &mut [f64], t: f64, h: f64) -> bool {
        let d = x.len();
        field.velocity(x, t, &mut self.k1);
        for i in 0..d {
            self.tmp[i] = x[i] + 0.5 * h * self.k1[i];
        }
        field.velocity(&self.tmp, t + 0.5 * h, &mut self.k2);
        for i in 0..d {
            self.tmp[i] = x[i] + 0.5 * h * self.k2[i];
        }
        field.velocity(&self.tmp, t + 0.5 * h, &mut self.k3);
        for i in 0..d {
            self.tmp[i] = x[i] + h * self.k3[i];
        }
        field.velocity(&self.tmp, t + h, &mut self.k4);

        let finite = |v: &[f64]| v.iter().all(|c| c.is_finite());
        if !(finite(&self.k1) && finite(&self.k2) && finite(&self.k3) && finite(&self.k4)) {
            return false;
        }
        for i in 0..d {
            x[i] += h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
        true
    }
}
