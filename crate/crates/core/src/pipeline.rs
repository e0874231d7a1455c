//! End-to-end HKS computation with a flat `key=value` configuration.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::flowfield::PathlineSet;
use crate::hks::{hks_field, HksConfig, HksField, Normalization};
use crate::lbo::{assemble, eigendecompose, symmetrize, LanczosOptions, LboConfig, SpectralDecomposition, Sparsity};
use crate::neighborhood::{build_graph, NeighborhoodConfig, NeighborhoodGraph};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub neighborhood: NeighborhoodConfig,
    pub lbo: LboConfig,
    pub hks: HksConfig,
    pub tolerance: f64,
    pub max_matvecs: Option<usize>,
    /// Start vectors of the eigensolver and k-means initialization.
    pub rng_seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            neighborhood: NeighborhoodConfig::default(),
            lbo: LboConfig::default(),
            hks: HksConfig::default(),
            tolerance: 1e-8,
            max_matvecs: None,
            rng_seed: 0,
        }
    }
}

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::invalid(format!("bad value for `{key}`: `{raw}`")))
}

impl PipelineConfig {
    /// Sets one option by name.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        let raw = raw.trim();
        match key.trim() {
            "neighbors" | "M" => self.neighborhood.neighbors = value(key, raw)?,
            "drop_ratio" => self.neighborhood.drop_ratio = value(key, raw)?,
            "alpha" => self.lbo.alpha = value(key, raw)?,
            "threshold" | "T" => self.lbo.sparsity = Sparsity::Threshold(value(key, raw)?),
            "sparsity_fraction" => self.lbo.sparsity = Sparsity::RowFraction(value(key, raw)?),
            "n_eig" => self.lbo.n_eig = Some(value(key, raw)?),
            "exponent" => {
                self.lbo.exponent_sigma_squared = match raw {
                    "sigma" => false,
                    "sigma_squared" => true,
                    _ => return Err(Error::invalid(format!("exponent must be sigma or sigma_squared, got `{raw}`"))),
                }
            }
            "beta" => self.hks.beta = value(key, raw)?,
            "scales" => self.hks.scale_count = value(key, raw)?,
            "normalization" => {
                self.hks.normalization = match raw {
                    "column" => Normalization::ColumnSum,
                    "mass" => Normalization::MassWeighted,
                    _ => return Err(Error::invalid(format!("normalization must be column or mass, got `{raw}`"))),
                }
            }
            "tolerance" => self.tolerance = value(key, raw)?,
            "max_matvecs" => self.max_matvecs = Some(value(key, raw)?),
            "rng_seed" => self.rng_seed = value(key, raw)?,
            other => return Err(Error::invalid(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Applies `key=value` lines; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("line {}: expected key=value", lineno + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn lanczos(&self) -> LanczosOptions {
        LanczosOptions {
            tolerance: self.tolerance,
            max_matvecs: self.max_matvecs,
            seed: self.rng_seed ^ 0x5eed,
            ..LanczosOptions::default()
        }
    }

    /// Every option as `(key, value)`, in a form [`PipelineConfig::set`] accepts.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![
            ("neighbors", self.neighborhood.neighbors.to_string()),
            ("drop_ratio", self.neighborhood.drop_ratio.to_string()),
            ("alpha", self.lbo.alpha.to_string()),
        ];
        out.push(match self.lbo.sparsity {
            Sparsity::Threshold(t) => ("threshold", t.to_string()),
            Sparsity::RowFraction(f) => ("sparsity_fraction", f.to_string()),
        });
        if let Some(k) = self.lbo.n_eig {
            out.push(("n_eig", k.to_string()));
        }
        let exponent = if self.lbo.exponent_sigma_squared { "sigma_squared" } else { "sigma" };
        out.push(("exponent", exponent.to_string()));
        out.push(("beta", self.hks.beta.to_string()));
        out.push(("scales", self.hks.scale_count.to_string()));
        let norm = match self.hks.normalization {
            Normalization::ColumnSum => "column",
            Normalization::MassWeighted => "mass",
        };
        out.push(("normalization", norm.to_string()));
        out.push(("tolerance", self.tolerance.to_string()));
        if let Some(m) = self.max_matvecs {
            out.push(("max_matvecs", m.to_string()));
        }
        out.push(("rng_seed", self.rng_seed.to_string()));
        out
    }
}

impl FromStr for PipelineConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut c = PipelineConfig::default();
        c.apply_text(s)?;
        Ok(c)
    }
}

impl fmt::Display for PipelineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.pairs() {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// Wall-clock time per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    /// Neighbors, local PCA and Voronoi volumes.
    pub volumes: Duration,
    /// Affinity assembly and symmetrization.
    pub lbo: Duration,
    pub eigen: Duration,
    pub hks: Duration,
}

impl StageTimings {
    pub fn total(&self) -> Duration {
        self.volumes + self.lbo + self.eigen + self.hks
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub graph: NeighborhoodGraph,
    pub sigma: f64,
    pub nnz: usize,
    pub spectrum: SpectralDecomposition,
    pub hks: HksField,
    pub timings: StageTimings,
}

/// Runs neighborhood, operator, eigensolver and signature stages in order.
pub fn run_pipeline(pathlines: &PathlineSet, config: &PipelineConfig) -> Result<PipelineOutput> {
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let graph = build_graph(pathlines, &config.neighborhood).map_err(|e| e.in_stage("volumes"))?;
    timings.volumes = t.elapsed();

    let t = Instant::now();
    let assembled = assemble(&graph, pathlines, &config.lbo).map_err(|e| e.in_stage("lbo"))?;
    let u = symmetrize(&assembled.q, &assembled.mass).map_err(|e| e.in_stage("lbo"))?;
    timings.lbo = t.elapsed();

    let t = Instant::now();
    let k = config.lbo.eigen_count(pathlines.n());
    let spectrum = eigendecompose(&u, &assembled.mass, k, &config.lanczos()).map_err(|e| e.in_stage("eigendecomposition"))?;
    timings.eigen = t.elapsed();

    let t = Instant::now();
    let hks = hks_field(&spectrum, &config.hks).map_err(|e| e.in_stage("hks"))?;
    timings.hks = t.elapsed();

    Ok(PipelineOutput {
        graph,
        sigma: assembled.sigma,
        nnz: u.nnz(),
        spectrum,
        hks,
        timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_values() {
        let c: PipelineConfig = "# desk scale\nM = 20\nalpha=0.25\n\nthreshold=1e-6\nn_eig=50\nbeta=0.05\nrng_seed=7\n"
            .parse()
            .unwrap();
        assert_eq!(c.neighborhood.neighbors, 20);
        assert_eq!(c.lbo.alpha, 0.25);
        assert_eq!(c.lbo.sparsity, Sparsity::Threshold(1e-6));
        assert_eq!(c.lbo.n_eig, Some(50));
        assert_eq!(c.hks.beta, 0.05);
        assert_eq!(c.rng_seed, 7);
    }

    #[test]
    fn display_round_trips() {
        let mut c = PipelineConfig::default();
        c.set("exponent", "sigma_squared").unwrap();
        c.set("normalization", "mass").unwrap();
        c.set("max_matvecs", "999").unwrap();
        let back: PipelineConfig = c.to_string().parse().unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!("alpha".parse::<PipelineConfig>().is_err());
        assert!("alpha=abc".parse::<PipelineConfig>().is_err());
        assert!("colour=red".parse::<PipelineConfig>().is_err());
    }
}
