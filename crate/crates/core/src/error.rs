use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integration failed on pathline {index}: non-finite velocity at t = {time}")]
    Integration { index: usize, time: f64 },

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("degenerate neighborhood at point {index}: {message}")]
    DegenerateNeighborhood { index: usize, message: String },

    #[error("zero density scale (eta = 0); the input contains duplicated pathlines")]
    ZeroDensityScale,

    #[error(
        "point {index} is isolated after sparsification; use a smaller threshold or a larger alpha"
    )]
    IsolatedPoint { index: usize },

    #[error("nonpositive mass b_{index}{index} = {value}")]
    NonPositiveMass { index: usize, value: f64 },

    #[error("eigensolver did not converge after {matvecs} matrix-vector products (worst residual {worst_residual:e}, {converged}/{requested} pairs converged)")]
    NoConvergence {
        matvecs: usize,
        worst_residual: f64,
        converged: usize,
        requested: usize,
    },

    #[error("disconnected operator: second smallest eigenvalue {0:e} is not positive")]
    Disconnected(f64),

    #[error("all-zero HKS column at scale index {0}")]
    ZeroColumn(usize),

    #[error("scale grids differ; align the fields first")]
    MismatchedScales,

    #[error("scale intervals do not overlap")]
    DisjointScales,

    #[error("need at least {k} points for k-means, got {available}")]
    TooFewPoints { k: usize, available: usize },

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Tags an error with the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    pub(crate) fn parse(offset: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            offset,
            message: msg.into(),
        }
    }
}
