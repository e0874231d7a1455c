//! Flag value parsers: numbers with a `pi` suffix, grids, boxes, dataset specs.

use std::f64::consts::PI;
use std::path::PathBuf;

/// Parses `2.5`, `pi`, `8pi`, `-0.5pi`.
pub fn number(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let v = match t.strip_suffix("pi") {
        Some("") => PI,
        Some("-") => -PI,
        Some(c) => c.trim_end_matches('*').parse::<f64>().map_err(|_| format!("bad number `{s}`"))? * PI,
        None => t.parse::<f64>().map_err(|_| format!("bad number `{s}`"))?,
    };
    if !v.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(v)
}

pub fn number_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(number).collect()
}

/// Seeds per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<usize>);

/// Comma-separated numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Numbers(pub Vec<f64>);

pub fn numbers(s: &str) -> Result<Numbers, String> {
    number_list(s).map(Numbers)
}

/// Parses `50x50` (or `20x20x10`).
pub fn grid(s: &str) -> Result<Grid, String> {
    let counts: Vec<usize> = s
        .split('x')
        .map(|c| c.trim().parse::<usize>().map_err(|_| format!("bad grid `{s}`, expected e.g. 50x50")))
        .collect::<Result<_, _>>()?;
    if counts.contains(&0) {
        return Err(format!("grid `{s}` has an empty axis"));
    }
    Ok(Grid(counts))
}

/// `lo,hi` scale index pair.
pub fn index_range(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| format!("bad range `{s}`, expected lo,hi"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|_| format!("bad range `{s}`"));
    Ok((parse(lo)?, parse(hi)?))
}

/// Box corners `min..., max...`, e.g. `0,0,8pi,8pi`.
pub fn axis_box(s: &str) -> Result<(Vec<f64>, Vec<f64>), String> {
    let v = number_list(s)?;
    if v.is_empty() || v.len() % 2 != 0 {
        return Err(format!("box `{s}` needs an even number of coordinates"));
    }
    let (lo, hi) = v.split_at(v.len() / 2);
    Ok((lo.to_vec(), hi.to_vec()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub id: String,
    pub pathlines: PathBuf,
    pub hks: PathBuf,
}

/// `id=pathlines_file,hks_file`.
pub fn dataset_spec(s: &str) -> Result<DatasetSpec, String> {
    let bad = || format!("bad dataset `{s}`, expected id=pathlines,hks");
    let (id, files) = s.split_once('=').ok_or_else(bad)?;
    let (pl, hks) = files.split_once(',').ok_or_else(bad)?;
    if id.is_empty() || pl.is_empty() || hks.is_empty() {
        return Err(bad());
    }
    Ok(DatasetSpec {
        id: id.to_string(),
        pathlines: pl.into(),
        hks: hks.into(),
    })
}

/// `key=value`.
pub fn key_value(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}
