#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use flowhks::flowfield::{integrate_pathlines, seed_grid, AbcFlow, AxisBox, PathlineSet};
use flowhks::{run_pipeline, PipelineConfig};
use flowhks_service::session::{Dataset, Session};

pub fn abc_set(per_axis: usize, m: usize) -> PathlineSet {
    let dom = AxisBox::new(vec![0.0, 0.0], vec![4.0 * PI, 4.0 * PI]).unwrap();
    let seeds = seed_grid(&dom, &[per_axis, per_axis]).unwrap();
    integrate_pathlines(&AbcFlow::default(), &seeds, 0.0, 2.0 * PI, m, 10).unwrap()
}

pub fn small_config() -> PipelineConfig {
    "neighbors=12\nn_eig=60\n".parse().unwrap()
}

pub fn dataset(id: &str, per_axis: usize, m: usize) -> Dataset {
    let set = abc_set(per_axis, m);
    let out = run_pipeline(&set, &small_config()).unwrap();
    Dataset::new(id, set, out.hks).unwrap()
}

/// Two ABC datasets whose scale grids differ.
pub fn session() -> Arc<Session> {
    Arc::new(Session::new(vec![dataset("a", 12, 8), dataset("b", 10, 12)]).unwrap())
}
