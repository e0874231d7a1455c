//! Heat kernel signatures from a spectral decomposition.
//!
//! `HKS_s(p) = sum_i exp(-lambda_i s) phi_i(p)^2`, sampled on a log-spaced scale
//! grid whose bounds come from the spectrum, then normalized per scale.

mod io;

pub use io::{load_hks, read_hks, write_hks, write_hks_binary};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lbo::SpectralDecomposition;

/// How each scale column is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Divide by `sum_q raw[q][s]`.
    #[default]
    ColumnSum,
    /// Divide by the heat trace `sum_q b_qq raw[q][s]`.
    MassWeighted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HksConfig {
    /// Precision threshold for the scale bounds.
    pub beta: f64,
    pub scale_count: usize,
    pub normalization: Normalization,
}

impl Default for HksConfig {
    fn default() -> Self {
        HksConfig {
            beta: 0.01,
            scale_count: 100,
            normalization: Normalization::ColumnSum,
        }
    }
}

/// Normalized signatures on a scale grid, `n x |S|` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HksField {
    scales: Vec<f64>,
    values: Vec<f64>,
    log_values: Vec<f64>,
    raw: Option<Vec<f64>>,
    beta: Option<f64>,
}

impl HksField {
    /// Wraps normalized values; `values.len()` must be a multiple of `scales.len()`.
    pub fn new(scales: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if scales.len() < 2 {
            return Err(Error::invalid("an HKS field needs at least two scales"));
        }
        if scales.windows(2).any(|w| !(w[1] > w[0])) || !(scales[0] > 0.0) {
            return Err(Error::invalid("scales must be positive and strictly increasing"));
        }
        if values.len() % scales.len() != 0 {
            return Err(Error::invalid("value count is not a multiple of the scale count"));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::invalid("HKS values must be finite and nonnegative"));
        }
        let log_values = values.iter().map(|v| v.log10()).collect();
        Ok(HksField {
            scales,
            values,
            log_values,
            raw: None,
            beta: None,
        })
    }

    pub fn n(&self) -> usize {
        self.values.len() / self.scales.len()
    }

    pub fn scale_count(&self) -> usize {
        self.scales.len()
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn s_min(&self) -> f64 {
        self.scales[0]
    }

    pub fn s_max(&self) -> f64 {
        self.scales[self.scales.len() - 1]
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta
    }

    /// Normalized signature of point `p`.
    pub fn row(&self, p: usize) -> &[f64] {
        let s = self.scales.len();
        &self.values[p * s..(p + 1) * s]
    }

    /// `log10` of the normalized signature of point `p`.
    pub fn log_row(&self, p: usize) -> &[f64] {
        let s = self.scales.len();
        &self.log_values[p * s..(p + 1) * s]
    }

    /// Pre-normalization signature, when computed in this session.
    pub fn raw_row(&self, p: usize) -> Option<&[f64]> {
        let s = self.scales.len();
        self.raw.as_ref().map(|r| &r[p * s..(p + 1) * s])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n()).map(|p| self.row(p)[j]).collect()
    }

    pub fn log_column(&self, j: usize) -> Vec<f64> {
        (0..self.n()).map(|p| self.log_row(p)[j]).collect()
    }

    /// Keeps only the listed rows, in order.
    pub fn select_rows(&self, rows: &[usize]) -> HksField {
        let s = self.scales.len();
        let pick = |v: &[f64]| -> Vec<f64> { rows.iter().flat_map(|&p| v[p * s..(p + 1) * s].iter().copied()).collect() };
        HksField {
            scales: self.scales.clone(),
            values: pick(&self.values),
            log_values: pick(&self.log_values),
            raw: self.raw.as_ref().map(|r| pick(r)),
            beta: self.beta,
        }
    }

    /// Count of exactly zero raw entries (should be none for a connected operator).
    pub fn zero_raw_entries(&self) -> usize {
        self.raw.as_ref().map_or(0, |r| r.iter().filter(|&&v| v == 0.0).count())
    }
}

/// `(s_min, s_max) = (-ln beta / lambda_max, -ln beta / lambda_1)`.
pub fn scale_range(spectrum: &SpectralDecomposition, beta: f64) -> Result<(f64, f64)> {
    let lambdas = &spectrum.eigenvalues;
    if lambdas.len() < 2 {
        return Err(Error::invalid("scale bounds need at least two eigenvalues"));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::invalid(format!("beta must lie in (0, 1), got {beta}")));
    }
    let lambda_max = lambdas[lambdas.len() - 1];
    let lambda_1 = lambdas[1];
    if !(lambda_1 > 1e-8 * lambda_max.abs()) || !(lambda_1 > 0.0) {
        return Err(Error::Disconnected(lambda_1));
    }
    let c = -beta.ln();
    let (s_min, s_max) = (c / lambda_max, c / lambda_1);
    if !(s_min < s_max) {
        return Err(Error::invalid("degenerate scale range: lambda_1 equals lambda_max"));
    }
    Ok((s_min, s_max))
}

/// `count` geometrically spaced scales from `s_min` to `s_max` inclusive.
pub fn sample_scales(s_min: f64, s_max: f64, count: usize) -> Result<Vec<f64>> {
    if !(s_min > 0.0 && s_max > s_min) || !s_max.is_finite() {
        return Err(Error::invalid(format!("need 0 < s_min < s_max, got [{s_min}, {s_max}]")));
    }
    if count < 2 {
        return Err(Error::invalid("need at least two scales"));
    }
    let ratio = s_max / s_min;
    let last = (count - 1) as f64;
    let mut scales: Vec<f64> = (0..count).map(|i| s_min * ratio.powf(i as f64 / last)).collect();
    scales[0] = s_min;
    scales[count - 1] = s_max;
    Ok(scales)
}

/// Unnormalized `HKS`, `n x |scales|` row-major.
pub fn compute_hks(spectrum: &SpectralDecomposition, scales: &[f64]) -> Vec<f64> {
    let ns = scales.len();
    let decay: Vec<Vec<f64>> = spectrum
        .eigenvalues
        .iter()
        .map(|&l| scales.iter().map(|&s| (-l * s).exp()).collect())
        .collect();
    let mut raw = vec![0.0; spectrum.n() * ns];
    raw.par_chunks_mut(ns).enumerate().for_each(|(p, row)| {
        for (phi, e) in spectrum.eigenvectors.iter().zip(&decay) {
            let w = phi[p] * phi[p];
            for (r, d) in row.iter_mut().zip(e) {
                *r += d * w;
            }
        }
    });
    raw
}

/// Heat trace `sum_i exp(-lambda_i s)`.
pub fn heat_trace(spectrum: &SpectralDecomposition, s: f64) -> f64 {
    spectrum.eigenvalues.iter().map(|l| (-l * s).exp()).sum()
}

/// Per-column normalization of a raw `n x ns` matrix.
pub fn normalize_hks(raw: &[f64], ns: usize, mass: &[f64], mode: Normalization) -> Result<Vec<f64>> {
    if ns == 0 || raw.len() % ns != 0 {
        return Err(Error::invalid("raw matrix shape mismatch"));
    }
    let n = raw.len() / ns;
    if mode == Normalization::MassWeighted && mass.len() != n {
        return Err(Error::invalid("mass diagonal length mismatch"));
    }
    if raw.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::invalid("raw HKS values must be nonnegative"));
    }
    let mut sums = vec![0.0; ns];
    for p in 0..n {
        let w = match mode {
            Normalization::ColumnSum => 1.0,
            Normalization::MassWeighted => mass[p],
        };
        for j in 0..ns {
            sums[j] += w * raw[p * ns + j];
        }
    }
    if let Some(j) = sums.iter().position(|&s| !(s > 0.0)) {
        return Err(Error::ZeroColumn(j));
    }
    Ok(raw.iter().enumerate().map(|(k, v)| v / sums[k % ns]).collect())
}

/// Full evaluation: scale bounds, grid, raw signatures, normalization.
pub fn hks_field(spectrum: &SpectralDecomposition, config: &HksConfig) -> Result<HksField> {
    let (s_min, s_max) = scale_range(spectrum, config.beta)?;
    let scales = sample_scales(s_min, s_max, config.scale_count)?;
    hks_field_on(spectrum, scales, config)
}

/// As [`hks_field`] on a caller-supplied scale grid.
pub fn hks_field_on(spectrum: &SpectralDecomposition, scales: Vec<f64>, config: &HksConfig) -> Result<HksField> {
    let raw = compute_hks(spectrum, &scales);
    let values = normalize_hks(&raw, scales.len(), &spectrum.mass, config.normalization)?;
    let mut field = HksField::new(scales, values)?;
    field.raw = Some(raw);
    field.beta = Some(config.beta);
    Ok(field)
}
