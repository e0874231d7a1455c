use std::f64::consts::PI;

use flowhks::flowfield::{
    integrate_pathlines, load_pathlines, read_pathlines, seed_grid, write_pathlines, write_pathlines_binary, AbcFlow,
    AxisBox, ConstantField,
};

fn endpoint_error(substeps: usize, reference: &[f64]) -> f64 {
    let seeds = vec![vec![1.0, 2.0], vec![4.0, 0.5], vec![-3.0, 7.0]];
    let set = integrate_pathlines(&AbcFlow::default(), &seeds, 0.0, 2.0 * PI, 5, substeps).unwrap();
    (0..3)
        .map(|i| {
            let p = set.point(i);
            let e = &p[p.len() - 2..];
            (e[0] - reference[2 * i]).hypot(e[1] - reference[2 * i + 1])
        })
        .fold(0.0, f64::max)
}

#[test]
fn rk4_converges_at_fourth_order() {
    let seeds = vec![vec![1.0, 2.0], vec![4.0, 0.5], vec![-3.0, 7.0]];
    let fine = integrate_pathlines(&AbcFlow::default(), &seeds, 0.0, 2.0 * PI, 5, 2048).unwrap();
    let reference: Vec<f64> = (0..3).flat_map(|i| fine.point(i)[8..10].to_vec()).collect();
    let e1 = endpoint_error(8, &reference);
    let e2 = endpoint_error(16, &reference);
    let e3 = endpoint_error(32, &reference);
    let r1 = e1 / e2;
    let r2 = e2 / e3;
    assert!((12.0..20.0).contains(&r1), "ratio {r1}");
    assert!((12.0..20.0).contains(&r2), "ratio {r2}");
}

#[test]
fn constant_field_is_exact_and_seeds_come_first() {
    let seeds = vec![vec![0.0, 0.0], vec![1.0, -1.0]];
    let set = integrate_pathlines(&ConstantField(vec![1.0, 0.5]), &seeds, 2.0, 4.0, 5, 1).unwrap();
    assert_eq!(set.timesteps(), &[2.0, 3.0, 4.0, 5.0, 6.0]);
    for (i, s) in seeds.iter().enumerate() {
        assert_eq!(set.seed(i), s.as_slice());
        let p = set.point(i);
        for k in 0..5 {
            assert!((p[2 * k] - (s[0] + k as f64)).abs() < 1e-14);
            assert!((p[2 * k + 1] - (s[1] + 0.5 * k as f64)).abs() < 1e-14);
        }
    }
}

#[test]
fn files_round_trip_through_disk() {
    let dom = AxisBox::new(vec![0.0, 0.0], vec![2.0 * PI, 2.0 * PI]).unwrap();
    let seeds = seed_grid(&dom, &[7, 5]).unwrap();
    let set = integrate_pathlines(&AbcFlow::default(), &seeds, 0.0, 2.0 * PI, 9, 4).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let text = dir.path().join("a.pl");
    let bin = dir.path().join("a.plb");
    write_pathlines(std::fs::File::create(&text).unwrap(), &set).unwrap();
    write_pathlines_binary(std::fs::File::create(&bin).unwrap(), &set).unwrap();
    assert_eq!(load_pathlines(&text).unwrap(), set);
    assert_eq!(load_pathlines(&bin).unwrap(), set);
    let bytes = std::fs::read(&text).unwrap();
    assert_eq!(read_pathlines(&bytes).unwrap().n(), 35);
}
