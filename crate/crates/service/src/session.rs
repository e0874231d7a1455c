//! Loaded datasets and the analysis operations served over them.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use flowhks::analysis::{
    align_scales, kmeans_hks, mean_hks, select_by_regions, similarity_field, ClusterMode, ClusterOptions,
    ClusterResult, PointRef, ScaleRange,
};
use flowhks::flowfield::{load_pathlines, AxisBox, PathlineSet};
use flowhks::hks::{load_hks, HksField};
use serde::{Deserialize, Serialize};

use crate::parse::DatasetSpec;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("unknown dataset `{0}`")]
    UnknownDataset(String),
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    BadRequest(String),
    #[error("{path}: {source}")]
    Load {
        path: PathBuf,
        #[source]
        source: flowhks::Error,
    },
    #[error(transparent)]
    Core(#[from] flowhks::Error),
}

impl ServiceError {
    fn bad(msg: impl Into<String>) -> Self {
        ServiceError::BadRequest(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, ServiceError>;

/// Sidecar written next to an HKS file by `flowhks hks`.
pub fn sidecar_path(hks: &Path) -> PathBuf {
    let mut p = hks.as_os_str().to_owned();
    p.push(".meta.json");
    PathBuf::from(p)
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub id: String,
    pub pathlines: PathlineSet,
    pub hks: Arc<HksField>,
    /// Contents of the sidecar, when one was found.
    pub meta: Option<serde_json::Value>,
}

impl Dataset {
    pub fn new(id: impl Into<String>, pathlines: PathlineSet, hks: HksField) -> Result<Self> {
        let id = id.into();
        if hks.n() != pathlines.n() {
            return Err(ServiceError::bad(format!(
                "dataset `{id}`: {} pathlines but {} HKS rows",
                pathlines.n(),
                hks.n()
            )));
        }
        Ok(Dataset {
            id,
            pathlines,
            hks: Arc::new(hks),
            meta: None,
        })
    }

    pub fn load(spec: &DatasetSpec) -> Result<Self> {
        let load_err = |path: &Path| {
            let path = path.to_path_buf();
            move |source| ServiceError::Load { path, source }
        };
        let pathlines = load_pathlines(&spec.pathlines).map_err(load_err(&spec.pathlines))?;
        let hks = load_hks(&spec.hks).map_err(load_err(&spec.hks))?;
        let mut d = Dataset::new(spec.id.clone(), pathlines, hks)?;
        let side = sidecar_path(&spec.hks);
        if side.exists() {
            let text = std::fs::read(&side).map_err(|e| ServiceError::Load {
                path: side.clone(),
                source: e.into(),
            })?;
            let value = serde_json::from_slice(&text)
                .map_err(|e| ServiceError::bad(format!("{}: {e}", side.display())))?;
            d.meta = Some(value);
        }
        Ok(d)
    }
}

type AlignedPair = Arc<(Arc<HksField>, Arc<HksField>)>;

/// Immutable datasets plus a cache of pairwise scale alignments.
#[derive(Debug, Default)]
pub struct Session {
    datasets: Vec<Dataset>,
    aligned: Mutex<HashMap<(usize, usize), AlignedPair>>,
}

/// Region selection: one box or several; points are kept when their seed is in any.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Region {
    One(BoxSpec),
    Many(Vec<BoxSpec>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Joint,
    Separate,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterRequest {
    pub datasets: Vec<String>,
    pub k: usize,
    /// Inclusive scale index range; the full grid when absent.
    #[serde(default)]
    pub range: Option<[usize; 2]>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub region: Option<Region>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterOutcome {
    pub datasets: Vec<String>,
    /// The common scale grid the range indexes.
    pub scales: Vec<f64>,
    pub result: ClusterResult,
}

#[derive(Debug, Clone)]
pub struct SimilarityRequest {
    pub anchor_dataset: String,
    pub anchor_point: usize,
    pub range: Option<(usize, usize)>,
    /// Datasets to score; just the anchor's when empty.
    pub datasets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityOutcome {
    pub datasets: Vec<String>,
    pub scales: Vec<f64>,
    pub range: ScaleRange,
    pub anchor: PointRef,
    pub distances: Vec<Vec<f64>>,
}

impl Session {
    pub fn new(datasets: Vec<Dataset>) -> Result<Self> {
        for (i, d) in datasets.iter().enumerate() {
            if datasets[..i].iter().any(|e| e.id == d.id) {
                return Err(ServiceError::bad(format!("duplicate dataset id `{}`", d.id)));
            }
        }
        Ok(Session {
            datasets,
            aligned: Mutex::new(HashMap::new()),
        })
    }

    pub fn load(specs: &[DatasetSpec]) -> Result<Self> {
        Session::new(specs.iter().map(Dataset::load).collect::<Result<_>>()?)
    }

    pub fn datasets(&self) -> &[Dataset] {
        &self.datasets
    }

    fn index(&self, id: &str) -> Result<usize> {
        self.datasets
            .iter()
            .position(|d| d.id == id)
            .ok_or_else(|| ServiceError::UnknownDataset(id.to_string()))
    }

    pub fn get(&self, id: &str) -> Result<&Dataset> {
        Ok(&self.datasets[self.index(id)?])
    }

    fn aligned_pair(&self, a: usize, b: usize) -> Result<AlignedPair> {
        let key = (a.min(b), a.max(b));
        let mut cache = self.aligned.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(hit) = cache.get(&key) {
            return Ok(hit.clone());
        }
        let (x, y) = align_scales(&self.datasets[key.0].hks, &self.datasets[key.1].hks)?;
        let pair = Arc::new((Arc::new(x), Arc::new(y)));
        cache.insert(key, pair.clone());
        Ok(pair)
    }

    /// HKS fields of `ids` on one scale grid, aligning a differing pair on demand.
    pub fn common_fields(&self, ids: &[String]) -> Result<Vec<Arc<HksField>>> {
        let idx: Vec<usize> = ids.iter().map(|id| self.index(id)).collect::<Result<_>>()?;
        let fields: Vec<Arc<HksField>> = idx.iter().map(|&i| self.datasets[i].hks.clone()).collect();
        if fields.iter().all(|f| f.scales() == fields[0].scales()) {
            return Ok(fields);
        }
        let (a, b) = match idx.as_slice() {
            [a, b] => (*a, *b),
            _ => return Err(ServiceError::bad("only two datasets with differing scale grids can be aligned")),
        };
        let pair = self.aligned_pair(a, b)?;
        Ok(if a < b {
            vec![pair.0.clone(), pair.1.clone()]
        } else {
            vec![pair.1.clone(), pair.0.clone()]
        })
    }

    pub fn mean(&self, id: &str, range: Option<(usize, usize)>) -> Result<(ScaleRange, Vec<f64>)> {
        let field = &self.get(id)?.hks;
        let r = scale_range(range, field.scale_count())?;
        Ok((r, mean_hks(field, r)?))
    }

    pub fn similarity(&self, req: &SimilarityRequest) -> Result<SimilarityOutcome> {
        let mut ids = req.datasets.clone();
        if ids.is_empty() {
            ids.push(req.anchor_dataset.clone());
        }
        self.index(&req.anchor_dataset)?;
        let dataset = ids
            .iter()
            .position(|id| *id == req.anchor_dataset)
            .ok_or_else(|| ServiceError::bad("the anchor dataset must be one of the scored datasets"))?;
        let fields = self.common_fields(&ids)?;
        let range = scale_range(req.range, fields[0].scale_count())?;
        if req.anchor_point >= fields[dataset].n() {
            return Err(ServiceError::bad(format!("anchor point {} out of range", req.anchor_point)));
        }
        let anchor = PointRef {
            dataset,
            point: req.anchor_point,
        };
        let refs: Vec<&HksField> = fields.iter().map(|f| f.as_ref()).collect();
        let distances = similarity_field(&refs, anchor, range, Default::default())?;
        Ok(SimilarityOutcome {
            datasets: ids,
            scales: fields[0].scales().to_vec(),
            range,
            anchor,
            distances,
        })
    }

    pub fn cluster(&self, req: &ClusterRequest) -> Result<ClusterOutcome> {
        if req.datasets.is_empty() {
            return Err(ServiceError::bad("no datasets given"));
        }
        let fields = self.common_fields(&req.datasets)?;
        let range = scale_range(req.range.map(|[lo, hi]| (lo, hi)), fields[0].scale_count())?;
        let boxes = match &req.region {
            None => Vec::new(),
            Some(Region::One(b)) => vec![axis_box(b)?],
            Some(Region::Many(bs)) => bs.iter().map(axis_box).collect::<Result<_>>()?,
        };
        let mut selected = Vec::with_capacity(req.datasets.len());
        for id in &req.datasets {
            let pathlines = &self.get(id)?.pathlines;
            if boxes.iter().any(|b| b.min.len() != pathlines.d()) {
                return Err(ServiceError::bad(format!("region boxes must have {} coordinates per corner", pathlines.d())));
            }
            selected.push(select_by_regions(pathlines, &boxes));
        }
        let opts = ClusterOptions {
            k: req.k,
            seed: req.seed,
            mode: match req.mode {
                Mode::Joint => ClusterMode::Joint,
                Mode::Separate => ClusterMode::Separate,
            },
            ..ClusterOptions::default()
        };
        let refs: Vec<&HksField> = fields.iter().map(|f| f.as_ref()).collect();
        let result = kmeans_hks(&refs, &selected, range, &opts)?;
        Ok(ClusterOutcome {
            datasets: req.datasets.clone(),
            scales: fields[0].scales().to_vec(),
            result,
        })
    }
}

fn scale_range(range: Option<(usize, usize)>, count: usize) -> Result<ScaleRange> {
    match range {
        None => Ok(ScaleRange::full(count)),
        Some((lo, hi)) => ScaleRange::new(lo, hi, count).map_err(|e| ServiceError::bad(e.to_string())),
    }
}

fn axis_box(b: &BoxSpec) -> Result<AxisBox> {
    AxisBox::new(b.min.clone(), b.max.clone()).map_err(|e| ServiceError::bad(e.to_string()))
}
