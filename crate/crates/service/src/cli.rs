//! The `flowhks` command line.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::BufWriter;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use flowhks::analysis::{AnalysisResult, Domain};
use flowhks::flowfield::{integrate_pathlines, load_pathlines, seed_grid, write_pathlines, write_pathlines_binary, AbcFlow, AbcParams, AxisBox, CylinderWake, PathlineSet};
use flowhks::hks::{write_hks, write_hks_binary};
use flowhks::{run_pipeline, PipelineConfig, PipelineOutput};
use serde::Serialize;

use crate::json;
use crate::parse::{self, DatasetSpec};
use crate::server;
use crate::session::{sidecar_path, ClusterRequest, Mode, Region, BoxSpec, Session, SimilarityRequest};

#[derive(Debug, Parser)]
#[command(name = "flowhks", version, about = "Heat kernel signatures of flow pathlines")]
pub struct Cli {
    /// Pipeline configuration file with `key=value` lines.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Seed a grid and integrate pathlines.
    Integrate(IntegrateArgs),
    /// Compute the HKS of a pathline file.
    Hks(HksArgs),
    /// k-means on HKS sub-curves; writes `index,dataset,label` CSV.
    Cluster(ClusterArgs),
    /// Distances of every point's HKS curve to an anchor's; writes CSV.
    Similarity(SimilarityArgs),
    /// Serve datasets over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FieldKind {
    /// Unsteady ABC flow.
    Abc,
    /// Vortex shedding behind a unit cylinder at the origin.
    Wake,
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    #[arg(long, value_enum, default_value = "abc")]
    pub field: FieldKind,
    /// ABC amplitudes `A,B,C`.
    #[arg(long, value_parser = parse::numbers)]
    pub abc: Option<parse::Numbers>,
    /// Seeds per axis, e.g. `50x50`.
    #[arg(long, value_parser = parse::grid)]
    pub grid: parse::Grid,
    /// Seeding box `xmin,ymin,xmax,ymax`; accepts `pi` multiples.
    #[arg(long, value_parser = parse::axis_box)]
    pub domain: (Vec<f64>, Vec<f64>),
    #[arg(long, default_value = "0", value_parser = parse::number)]
    pub t0: f64,
    #[arg(long, default_value = "2pi", value_parser = parse::number)]
    pub tau: f64,
    /// Samples per pathline.
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    pub m: u32,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
    pub substeps: u32,
    /// Write the binary format.
    #[arg(long)]
    pub binary: bool,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct HksArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Config override, applied after `--config`.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse::key_value)]
    pub overrides: Vec<(String, String)>,
    #[arg(long)]
    pub binary: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Joint,
    Separate,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// `id=pathlines,hks`; once or twice.
    #[arg(long, required = true, value_parser = parse::dataset_spec)]
    pub dataset: Vec<DatasetSpec>,
    #[arg(short, long, default_value_t = 4)]
    pub k: usize,
    /// Scale index range `lo,hi`.
    #[arg(long, value_parser = parse::index_range)]
    pub range: Option<(usize, usize)>,
    #[arg(long, value_enum, default_value = "joint")]
    pub mode: ModeArg,
    /// Seed box `xmin,ymin,xmax,ymax`; repeatable.
    #[arg(long, value_parser = parse::axis_box)]
    pub region: Vec<(Vec<f64>, Vec<f64>)>,
    /// Defaults to `rng_seed` from the config.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Write centroid curves as HKS files `<PREFIX>.<group>.hks`.
    #[arg(long, value_name = "PREFIX")]
    pub centroids: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimilarityArgs {
    #[arg(long, required = true, value_parser = parse::dataset_spec)]
    pub dataset: Vec<DatasetSpec>,
    /// Anchor dataset id.
    #[arg(long)]
    pub anchor_dataset: String,
    #[arg(long)]
    pub anchor_point: usize,
    #[arg(long, value_parser = parse::index_range)]
    pub range: Option<(usize, usize)>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, required = true, value_parser = parse::dataset_spec)]
    pub dataset: Vec<DatasetSpec>,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
}

/// A failure with its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    fn failed(message: impl ToString) -> Self {
        CliError {
            code: 1,
            message: message.to_string(),
        }
    }
}

type CliResult = Result<(), CliError>;

/// Parses `args` and runs the command; clap prints usage errors itself.
pub fn main<I: IntoIterator<Item = T>, T: Into<OsString> + Clone>(args: I) -> ExitCode {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

pub fn run(cli: Cli) -> CliResult {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        builder = builder.num_threads(t as usize);
    }
    let pool = builder.build().map_err(CliError::failed)?;
    let config = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Integrate(a) => pool.install(|| integrate(&a)),
        Command::Hks(a) => pool.install(|| hks(config, &a)),
        Command::Cluster(a) => pool.install(|| cluster(&config, &a)),
        Command::Similarity(a) => pool.install(|| similarity(&a)),
        Command::Serve(a) => serve(&a, cli.threads),
    }
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig, CliError> {
    let mut config = PipelineConfig::default();
    if let Some(p) = path {
        let text = std::fs::read_to_string(p).map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?;
        config
            .apply_text(&text)
            .map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?;
    }
    Ok(config)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::failed(format!("{}: {e}", path.display())))
}

fn integrate(a: &IntegrateArgs) -> CliResult {
    let (min, max) = a.domain.clone();
    if a.grid.0.len() != min.len() {
        return Err(CliError::usage(format!(
            "--grid has {} axes but --domain has {}",
            a.grid.0.len(),
            min.len()
        )));
    }
    if min.len() != 2 {
        return Err(CliError::usage("the flow fields are two-dimensional"));
    }
    if a.abc.is_some() && !matches!(a.field, FieldKind::Abc) {
        return Err(CliError::usage("--abc only applies to --field abc"));
    }
    let domain = AxisBox::new(min, max).map_err(|e| CliError::usage(e.to_string()))?;
    let seeds = seed_grid(&domain, &a.grid.0).map_err(|e| CliError::usage(e.to_string()))?;
    let (m, substeps) = (a.m as usize, a.substeps as usize);
    let t = Instant::now();
    let set: flowhks::Result<PathlineSet> = match a.field {
        FieldKind::Abc => {
            let params = match a.abc.as_ref().map(|n| n.0.as_slice()) {
                None => AbcParams::default(),
                Some(&[x, y, z]) => AbcParams::new(x, y, z).map_err(|e| CliError::usage(e.to_string()))?,
                Some(_) => return Err(CliError::usage("--abc takes three amplitudes A,B,C")),
            };
            integrate_pathlines(&AbcFlow { params }, &seeds, a.t0, a.tau, m, substeps)
        }
        FieldKind::Wake => integrate_pathlines(&CylinderWake::default(), &seeds, a.t0, a.tau, m, substeps),
    };
    let set = set.map_err(|e| match e {
        flowhks::Error::InvalidArgument(_) => CliError::usage(e.to_string()),
        e => CliError::failed(e),
    })?;
    let elapsed = t.elapsed();
    let w = create(&a.output)?;
    let written = if a.binary {
        write_pathlines_binary(w, &set)
    } else {
        write_pathlines(w, &set)
    };
    written.map_err(|e| CliError::failed(format!("{}: {e}", a.output.display())))?;
    println!("n={} m={} d={}", set.n(), set.m(), set.d());
    println!("integration {:.3} s", elapsed.as_secs_f64());
    Ok(())
}

#[derive(Serialize)]
struct Timings {
    volumes: f64,
    lbo: f64,
    eigendecomposition: f64,
    hks: f64,
    total: f64,
}

#[derive(Serialize)]
struct Sidecar {
    n: usize,
    m: usize,
    d: usize,
    eta: f64,
    sigma: f64,
    boundary_fraction: f64,
    /// Entry `k` counts points of estimated dimension `k`.
    dimension_histogram: Vec<usize>,
    nnz: usize,
    eigenpairs: usize,
    matvecs: usize,
    lambda_1: f64,
    lambda_max: f64,
    s_min: f64,
    s_max: f64,
    config: BTreeMap<&'static str, String>,
    timings: Timings,
}

fn sidecar(out: &PipelineOutput, m: usize, d: usize, config: &PipelineConfig) -> Sidecar {
    let g = out.graph.summary();
    let lam = &out.spectrum.eigenvalues;
    let secs = Duration::as_secs_f64;
    Sidecar {
        n: g.n,
        m,
        d,
        eta: g.eta,
        sigma: out.sigma,
        boundary_fraction: g.boundary_fraction,
        dimension_histogram: g.dimension_histogram,
        nnz: out.nnz,
        eigenpairs: lam.len(),
        matvecs: out.spectrum.matvecs,
        lambda_1: lam.get(1).copied().unwrap_or(f64::NAN),
        lambda_max: lam.last().copied().unwrap_or(f64::NAN),
        s_min: out.hks.s_min(),
        s_max: out.hks.s_max(),
        config: config.pairs().into_iter().collect(),
        timings: Timings {
            volumes: secs(&out.timings.volumes),
            lbo: secs(&out.timings.lbo),
            eigendecomposition: secs(&out.timings.eigen),
            hks: secs(&out.timings.hks),
            total: secs(&out.timings.total()),
        },
    }
}

fn hks(mut config: PipelineConfig, a: &HksArgs) -> CliResult {
    for (k, v) in &a.overrides {
        config.set(k, v).map_err(|e| CliError::usage(e.to_string()))?;
    }
    let set = load_pathlines(&a.input).map_err(|e| CliError::failed(format!("{}: {e}", a.input.display())))?;
    let out = run_pipeline(&set, &config).map_err(CliError::failed)?;
    let w = create(&a.output)?;
    let written = if a.binary {
        write_hks_binary(w, &out.hks)
    } else {
        write_hks(w, &out.hks)
    };
    written.map_err(|e| CliError::failed(format!("{}: {e}", a.output.display())))?;
    let side = sidecar(&out, set.m(), set.d(), &config);
    let body = json::to_vec(&side).map_err(CliError::failed)?;
    let side_path = sidecar_path(&a.output);
    std::fs::write(&side_path, body).map_err(|e| CliError::failed(format!("{}: {e}", side_path.display())))?;

    let t = &out.timings;
    println!("n={} scales={} eigenpairs={}", out.hks.n(), out.hks.scale_count(), side.eigenpairs);
    println!("{:<20}{:>10}", "stage", "seconds");
    for (name, d) in [
        ("volumes", t.volumes),
        ("lbo", t.lbo),
        ("eigendecomposition", t.eigen),
        ("hks", t.hks),
        ("total", t.total()),
    ] {
        println!("{name:<20}{:>10.3}", d.as_secs_f64());
    }
    Ok(())
}

fn load_session(specs: &[DatasetSpec]) -> Result<Session, CliError> {
    Session::load(specs).map_err(CliError::failed)
}

fn write_csv(result: &AnalysisResult, path: &Path) -> CliResult {
    result
        .write_csv(create(path)?)
        .map_err(|e| CliError::failed(format!("{}: {e}", path.display())))
}

fn cluster(config: &PipelineConfig, a: &ClusterArgs) -> CliResult {
    let session = load_session(&a.dataset)?;
    let boxes: Vec<BoxSpec> = a
        .region
        .iter()
        .map(|(min, max)| BoxSpec {
            min: min.clone(),
            max: max.clone(),
        })
        .collect();
    let req = ClusterRequest {
        datasets: a.dataset.iter().map(|d| d.id.clone()).collect(),
        k: a.k,
        range: a.range.map(|(lo, hi)| [lo, hi]),
        mode: match a.mode {
            ModeArg::Joint => Mode::Joint,
            ModeArg::Separate => Mode::Separate,
        },
        region: (!boxes.is_empty()).then_some(Region::Many(boxes)),
        seed: a.seed.unwrap_or(config.rng_seed),
    };
    let out = session.cluster(&req).map_err(CliError::failed)?;
    if let Some(prefix) = &a.centroids {
        for g in 0..out.result.centroids.len() {
            let field = out
                .result
                .centroid_field(g, &out.scales, Domain::Log)
                .map_err(CliError::failed)?;
            let mut p = prefix.as_os_str().to_owned();
            p.push(format!(".{g}.hks"));
            let p = PathBuf::from(p);
            write_hks(create(&p)?, &field).map_err(|e| CliError::failed(format!("{}: {e}", p.display())))?;
        }
    }
    for (id, labels) in out.datasets.iter().zip(&out.result.labels) {
        let mut counts = vec![0usize; a.k];
        for &l in labels {
            counts[l] += 1;
        }
        println!("{id}: {} points, cluster sizes {counts:?}", labels.len());
    }
    write_csv(&AnalysisResult::Clusters(out.result), &a.output)
}

fn similarity(a: &SimilarityArgs) -> CliResult {
    let session = load_session(&a.dataset)?;
    let req = SimilarityRequest {
        anchor_dataset: a.anchor_dataset.clone(),
        anchor_point: a.anchor_point,
        range: a.range,
        datasets: a.dataset.iter().map(|d| d.id.clone()).collect(),
    };
    let out = session.similarity(&req).map_err(CliError::failed)?;
    write_csv(
        &AnalysisResult::Similarity {
            anchor: out.anchor,
            distances: out.distances,
        },
        &a.output,
    )
}

fn serve(a: &ServeArgs, threads: Option<u16>) -> CliResult {
    let session = Arc::new(load_session(&a.dataset)?);
    let mut rt = tokio::runtime::Builder::new_multi_thread();
    if let Some(t) = threads {
        rt.worker_threads(t as usize);
    }
    let rt = rt.enable_all().build().map_err(CliError::failed)?;
    rt.block_on(async {
        let addr = SocketAddr::new(a.host, a.port);
        let listener = server::bind(addr)
            .await
            .map_err(|e| CliError::failed(format!("cannot listen on {addr}: {e}")))?;
        println!("serving {} dataset(s) on http://{}", session.datasets().len(), listener.local_addr().map_err(CliError::failed)?);
        server::serve(listener, session).await.map_err(CliError::failed)
    })
}
