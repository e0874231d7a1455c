//! Read-only HTTP/JSON endpoints over a [`Session`].

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::Serialize;
use tokio::net::TcpListener;

use crate::json;
use crate::session::{ClusterOutcome, ClusterRequest, Mode, ServiceError, Session, SimilarityOutcome, SimilarityRequest};

type Params = Query<HashMap<String, String>>;
type Shared = State<Arc<Session>>;

pub fn router(session: Arc<Session>) -> Router {
    Router::new()
        .route("/datasets", get(datasets))
        .route("/dataset/{id}/meta", get(meta))
        .route("/dataset/{id}/seeds", get(seeds))
        .route("/dataset/{id}/hks", get(hks_column))
        .route("/dataset/{id}/mean", get(mean))
        .route("/dataset/{id}/curve", get(curve))
        .route("/similarity", get(similarity))
        .route("/cluster", post(cluster))
        .route("/pathline/{id}/{index}", get(pathline))
        .fallback(|| async { error(StatusCode::NOT_FOUND, "no such endpoint") })
        .with_state(session)
}

/// Binds first so a busy port is reported before serving starts.
pub async fn bind(addr: SocketAddr) -> std::io::Result<TcpListener> {
    TcpListener::bind(addr).await
}

pub async fn serve(listener: TcpListener, session: Arc<Session>) -> std::io::Result<()> {
    axum::serve(listener, router(session)).await
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
}

fn error(status: StatusCode, msg: &str) -> Response {
    let body = json::to_vec(&ErrorBody { error: msg }).unwrap_or_default();
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn reply<T: Serialize>(result: Result<T, ServiceError>) -> Response {
    match result {
        Ok(value) => match json::to_vec(&value) {
            Ok(body) => ([(header::CONTENT_TYPE, "application/json")], body).into_response(),
            Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, &e.to_string()),
        },
        Err(e) => {
            let status = match e {
                ServiceError::UnknownDataset(_) | ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
                ServiceError::Load { .. } => StatusCode::INTERNAL_SERVER_ERROR,
                _ => StatusCode::BAD_REQUEST,
            };
            error(status, &e.to_string())
        }
    }
}

fn bad(msg: String) -> ServiceError {
    ServiceError::BadRequest(msg)
}

fn param<T: std::str::FromStr>(q: &HashMap<String, String>, key: &str) -> Result<Option<T>, ServiceError> {
    q.get(key)
        .map(|v| v.trim().parse().map_err(|_| bad(format!("bad value for `{key}`: `{v}`"))))
        .transpose()
}

fn required<T: std::str::FromStr>(q: &HashMap<String, String>, key: &str) -> Result<T, ServiceError> {
    param(q, key)?.ok_or_else(|| bad(format!("missing query parameter `{key}`")))
}

/// Both `lo` and `hi`, or neither.
fn range_param(q: &HashMap<String, String>) -> Result<Option<(usize, usize)>, ServiceError> {
    match (param(q, "lo")?, param(q, "hi")?) {
        (Some(lo), Some(hi)) => Ok(Some((lo, hi))),
        (None, None) => Ok(None),
        _ => Err(bad("give both `lo` and `hi` or neither".into())),
    }
}

fn list<T: std::str::FromStr>(raw: &str, key: &str) -> Result<Vec<T>, ServiceError> {
    raw.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse().map_err(|_| bad(format!("bad entry `{s}` in `{key}`"))))
        .collect()
}

#[derive(Serialize)]
struct DatasetEntry<'a> {
    id: &'a str,
    n: usize,
    m: usize,
    d: usize,
    scale_count: usize,
    s_min: f64,
    s_max: f64,
}

#[derive(Serialize)]
struct DatasetList<'a> {
    datasets: Vec<DatasetEntry<'a>>,
}

async fn datasets(State(s): Shared) -> Response {
    let list = DatasetList {
        datasets: s
            .datasets()
            .iter()
            .map(|d| DatasetEntry {
                id: &d.id,
                n: d.pathlines.n(),
                m: d.pathlines.m(),
                d: d.pathlines.d(),
                scale_count: d.hks.scale_count(),
                s_min: d.hks.s_min(),
                s_max: d.hks.s_max(),
            })
            .collect(),
    };
    reply(Ok(list))
}

#[derive(Serialize)]
struct Meta<'a> {
    id: &'a str,
    n: usize,
    m: usize,
    d: usize,
    t0: f64,
    tau: f64,
    timesteps: &'a [f64],
    scales: &'a [f64],
    /// Sidecar written by the `hks` command, if present.
    pipeline: Option<&'a serde_json::Value>,
}

async fn meta(State(s): Shared, Path(id): Path<String>) -> Response {
    reply(s.get(&id).map(|d| Meta {
        id: &d.id,
        n: d.pathlines.n(),
        m: d.pathlines.m(),
        d: d.pathlines.d(),
        t0: d.pathlines.t0(),
        tau: d.pathlines.tau(),
        timesteps: d.pathlines.timesteps(),
        scales: d.hks.scales(),
        pipeline: d.meta.as_ref(),
    }))
}

#[derive(Serialize)]
struct Seeds<'a> {
    id: &'a str,
    d: usize,
    seeds: Vec<&'a [f64]>,
}

async fn seeds(State(s): Shared, Path(id): Path<String>) -> Response {
    reply(s.get(&id).map(|d| Seeds {
        id: &d.id,
        d: d.pathlines.d(),
        seeds: (0..d.pathlines.n()).map(|i| d.pathlines.seed(i)).collect(),
    }))
}

#[derive(Serialize)]
struct Column<'a> {
    id: &'a str,
    scale_index: usize,
    scale: f64,
    values: Vec<f64>,
    log10: Vec<f64>,
}

async fn hks_column(State(s): Shared, Path(id): Path<String>, Query(q): Params) -> Response {
    reply((|| {
        let d = s.get(&id)?;
        let j: usize = required(&q, "scale_index")?;
        if j >= d.hks.scale_count() {
            return Err(bad(format!("scale_index {j} out of range for {} scales", d.hks.scale_count())));
        }
        Ok(Column {
            id: &d.id,
            scale_index: j,
            scale: d.hks.scales()[j],
            values: d.hks.column(j),
            log10: d.hks.log_column(j),
        })
    })())
}

#[derive(Serialize)]
struct Mean<'a> {
    id: &'a str,
    lo: usize,
    hi: usize,
    values: Vec<f64>,
}

async fn mean(State(s): Shared, Path(id): Path<String>, Query(q): Params) -> Response {
    reply((|| {
        let range = range_param(&q)?;
        let (r, values) = s.mean(&id, range)?;
        Ok(Mean {
            id: &s.get(&id)?.id,
            lo: r.lo(),
            hi: r.hi(),
            values,
        })
    })())
}

#[derive(Serialize)]
struct CurveEntry<'a> {
    point: usize,
    values: &'a [f64],
    log10: &'a [f64],
}

#[derive(Serialize)]
struct Curves<'a> {
    id: &'a str,
    scales: &'a [f64],
    curves: Vec<CurveEntry<'a>>,
}

async fn curve(State(s): Shared, Path(id): Path<String>, Query(q): Params) -> Response {
    reply((|| {
        let d = s.get(&id)?;
        let raw = q.get("points").ok_or_else(|| bad("missing query parameter `points`".into()))?;
        let points: Vec<usize> = list(raw, "points")?;
        let mut curves = Vec::with_capacity(points.len());
        for p in points {
            if p >= d.hks.n() {
                return Err(ServiceError::NotFound(format!("dataset `{id}` has no point {p}")));
            }
            curves.push(CurveEntry {
                point: p,
                values: d.hks.row(p),
                log10: d.hks.log_row(p),
            });
        }
        Ok(Curves {
            id: &d.id,
            scales: d.hks.scales(),
            curves,
        })
    })())
}

#[derive(Serialize)]
pub struct SimilarityBody {
    pub anchor_dataset: String,
    pub anchor_point: usize,
    pub lo: usize,
    pub hi: usize,
    /// Scales of the common grid within `[lo, hi]`.
    pub scales: Vec<f64>,
    pub datasets: Vec<String>,
    pub distances: Vec<Vec<f64>>,
}

impl From<SimilarityOutcome> for SimilarityBody {
    fn from(o: SimilarityOutcome) -> Self {
        SimilarityBody {
            anchor_dataset: o.datasets[o.anchor.dataset].clone(),
            anchor_point: o.anchor.point,
            lo: o.range.lo(),
            hi: o.range.hi(),
            scales: o.scales[o.range.lo()..=o.range.hi()].to_vec(),
            datasets: o.datasets,
            distances: o.distances,
        }
    }
}

fn similarity_request(q: &HashMap<String, String>) -> Result<SimilarityRequest, ServiceError> {
    Ok(SimilarityRequest {
        anchor_dataset: required(q, "anchor_dataset")?,
        anchor_point: required(q, "anchor_point")?,
        range: range_param(q)?,
        datasets: q.get("datasets").map(|v| list(v, "datasets")).transpose()?.unwrap_or_default(),
    })
}

async fn similarity(State(s): Shared, Query(q): Params) -> Response {
    let req = match similarity_request(&q) {
        Ok(r) => r,
        Err(e) => return reply::<()>(Err(e)),
    };
    let out = tokio::task::spawn_blocking(move || s.similarity(&req).map(SimilarityBody::from)).await;
    match out {
        Ok(r) => reply(r),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, &e.to_string()),
    }
}

#[derive(Serialize)]
pub struct ClusterBody {
    pub datasets: Vec<String>,
    pub mode: Mode,
    pub k: usize,
    pub seed: u64,
    pub lo: usize,
    pub hi: usize,
    /// Scales of the common grid within `[lo, hi]`.
    pub scales: Vec<f64>,
    /// Point indices per dataset, aligned with `labels`.
    pub selected: Vec<Vec<usize>>,
    pub labels: Vec<Vec<usize>>,
    /// `log10` HKS centroid curves; one set in joint mode, one per dataset otherwise.
    pub centroids: Vec<Vec<Vec<f64>>>,
    pub inertia: Vec<f64>,
}

impl ClusterBody {
    pub fn new(req: &ClusterRequest, o: ClusterOutcome) -> Self {
        let r = o.result.range;
        ClusterBody {
            datasets: o.datasets,
            mode: req.mode,
            k: req.k,
            seed: req.seed,
            lo: r.lo(),
            hi: r.hi(),
            scales: o.scales[r.lo()..=r.hi()].to_vec(),
            selected: o.result.selected,
            labels: o.result.labels,
            centroids: o.result.centroids,
            inertia: o.result.inertia,
        }
    }
}

async fn cluster(State(s): Shared, body: Bytes) -> Response {
    let req: ClusterRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return error(StatusCode::BAD_REQUEST, &format!("bad cluster request: {e}")),
    };
    let out = tokio::task::spawn_blocking(move || s.cluster(&req).map(|o| ClusterBody::new(&req, o))).await;
    match out {
        Ok(r) => reply(r),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, &e.to_string()),
    }
}

#[derive(Serialize)]
struct Pathline<'a> {
    id: &'a str,
    index: usize,
    timesteps: &'a [f64],
    /// One position per timestep.
    points: Vec<&'a [f64]>,
}

async fn pathline(State(s): Shared, Path((id, index)): Path<(String, String)>) -> Response {
    reply((|| {
        let d = s.get(&id)?;
        let i: usize = index.parse().map_err(|_| bad(format!("bad pathline index `{index}`")))?;
        if i >= d.pathlines.n() {
            return Err(ServiceError::NotFound(format!("dataset `{id}` has no pathline {i}")));
        }
        let dim = d.pathlines.d();
        Ok(Pathline {
            id: &d.id,
            index: i,
            timesteps: d.pathlines.timesteps(),
            points: d.pathlines.point(i).chunks(dim).collect(),
        })
    })())
}
