mod common;

use std::f64::consts::PI;

use common::max_abs_diff;
use flowhks::flowfield::{integrate_pathlines, seed_grid, AbcFlow, AxisBox, PathlineSet};
use flowhks::{run_pipeline, PipelineConfig};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn abc_set(per_axis: usize, m: usize) -> PathlineSet {
    let dom = AxisBox::new(vec![0.0, 0.0], vec![4.0 * PI, 4.0 * PI]).unwrap();
    let seeds = seed_grid(&dom, &[per_axis, per_axis]).unwrap();
    integrate_pathlines(&AbcFlow::default(), &seeds, 0.0, 2.0 * PI, m, 10).unwrap()
}

fn config() -> PipelineConfig {
    let mut c = PipelineConfig::default();
    c.set("neighbors", "16").unwrap();
    c.set("n_eig", "120").unwrap();
    c
}

fn random_orthogonal(dim: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.random::<f64>() - 0.5);
    g.qr().q()
}

#[test]
fn rigid_motion_leaves_hks_unchanged() {
    let set = abc_set(18, 8);
    let dim = set.ambient_dim();
    let rot = random_orthogonal(dim, 3);
    let shift: Vec<f64> = (0..dim).map(|k| 5.0 - 0.7 * k as f64).collect();
    let moved = set
        .map_points(|p| {
            (0..dim)
                .map(|r| (0..dim).map(|c| rot[(r, c)] * p[c]).sum::<f64>() + shift[r])
                .collect()
        })
        .unwrap();
    let a = run_pipeline(&set, &config()).unwrap();
    let b = run_pipeline(&moved, &config()).unwrap();
    assert_eq!(a.hks.scale_count(), 100);
    let diff = max_abs_diff(a.hks.values(), b.hks.values());
    assert!(diff < 1e-8, "max abs change {diff:e}");
    let scale_diff = max_abs_diff(a.hks.scales(), b.hks.scales());
    assert!(scale_diff < 1e-8 * a.hks.s_max());
}

#[test]
fn permuting_pathlines_permutes_rows() {
    let set = abc_set(16, 6);
    let mut perm: Vec<usize> = (0..set.n()).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(8));
    let shuffled = set.permute(&perm).unwrap();
    let a = run_pipeline(&set, &config()).unwrap();
    let b = run_pipeline(&shuffled, &config()).unwrap();
    for (new, &old) in perm.iter().enumerate() {
        let d = max_abs_diff(b.hks.row(new), a.hks.row(old));
        assert!(d < 1e-8, "row {new} (was {old}) differs by {d:e}");
    }
}

#[test]
fn reruns_are_bit_identical() {
    let set = abc_set(12, 6);
    let a = run_pipeline(&set, &config()).unwrap();
    let b = run_pipeline(&set, &config()).unwrap();
    assert_eq!(a.hks.values(), b.hks.values());
    assert_eq!(a.hks.scales(), b.hks.scales());
}

#[test]
fn tiny_alpha_fails_in_the_operator_stage() {
    let set = abc_set(10, 5);
    let mut c = config();
    c.set("alpha", "1e-6").unwrap();
    c.set("threshold", "1e-12").unwrap();
    c.set("n_eig", "20").unwrap();
    match run_pipeline(&set, &c) {
        Err(flowhks::Error::Stage { stage, .. }) => assert_eq!(stage, "lbo"),
        other => panic!("expected an lbo stage error, got {other:?}"),
    }
}
