use std::path::Path;
use std::process::{Command, Output};

use flowhks::flowfield::load_pathlines;
use flowhks::hks::load_hks;

fn flowhks(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flowhks"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const DESK: &[&str] = &[
    "integrate", "--field", "abc", "--grid", "50x50", "--domain", "0,0,8pi,8pi", "--t0", "0", "--tau", "2pi", "--m",
    "30", "-o", "abc.pl",
];

#[test]
fn integrate_echoes_flags() {
    let dir = tempfile::tempdir().unwrap();
    let o = flowhks(dir.path(), DESK);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("n=2500 m=30 d=2"), "{}", stdout(&o));
    let set = load_pathlines(dir.path().join("abc.pl")).unwrap();
    assert_eq!((set.n(), set.m(), set.d()), (2500, 30, 2));
    assert_eq!(set.tau(), 2.0 * std::f64::consts::PI);
}

#[test]
fn integrates_the_cylinder_wake() {
    let dir = tempfile::tempdir().unwrap();
    let o = flowhks(
        dir.path(),
        &["integrate", "--field", "wake", "--grid", "6x4", "--domain", "1.5,-3,7.5,3", "--tau", "1", "--m", "5", "-o", "w.plb", "--binary"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let set = load_pathlines(dir.path().join("w.plb")).unwrap();
    assert_eq!((set.n(), set.m()), (24, 5));
    assert_eq!(set.timesteps()[4], 1.0);
    // Everything is carried downstream.
    assert!((0..24).all(|i| set.point(i)[8] > set.seed(i)[0]));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let without_output = &DESK[..DESK.len() - 2];
    assert_eq!(flowhks(dir.path(), without_output).status.code(), Some(2));

    let mut one_sample = DESK.to_vec();
    one_sample[12] = "1";
    let o = flowhks(dir.path(), &one_sample);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--m"), "{}", stderr(&o));

    let mut bad_grid = DESK.to_vec();
    bad_grid[4] = "50by50";
    assert_eq!(flowhks(dir.path(), &bad_grid).status.code(), Some(2));

    let mut bad_domain = DESK.to_vec();
    bad_domain[6] = "0,0,8pi";
    assert_eq!(flowhks(dir.path(), &bad_domain).status.code(), Some(2));

    let mut short_tau = DESK.to_vec();
    short_tau[10] = "-1";
    assert_eq!(flowhks(dir.path(), &short_tau).status.code(), Some(2));

    let wake_with_abc = [
        "integrate", "--field", "wake", "--abc", "1,1,1", "--grid", "4x4", "--domain", "2,-1,4,1", "--m", "3", "-o", "w.pl",
    ];
    assert_eq!(flowhks(dir.path(), &wake_with_abc).status.code(), Some(2));
    assert_eq!(flowhks(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(flowhks(dir.path(), &["--help"]).status.code(), Some(0));
}

fn small_dataset(dir: &Path) {
    let o = flowhks(
        dir,
        &["integrate", "--grid", "12x12", "--domain", "0,0,4pi,4pi", "--m", "8", "-o", "s.pl"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    std::fs::write(dir.join("desk.conf"), "# small run\nneighbors=12\nn_eig=80\n").unwrap();
}

#[test]
fn hks_writes_file_sidecar_and_timings() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_dataset(d);
    let o = flowhks(d, &["--config", "desk.conf", "--threads", "1", "hks", "-i", "s.pl", "-o", "s.hks"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    for stage in ["volumes", "lbo", "eigendecomposition", "hks", "total"] {
        assert!(out.lines().any(|l| l.starts_with(stage)), "missing {stage} in\n{out}");
    }
    let field = load_hks(d.join("s.hks")).unwrap();
    assert_eq!((field.n(), field.scale_count()), (144, 100));
    let meta: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("s.hks.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["eigenpairs"], 80);
    assert_eq!(meta["config"]["neighbors"], "12");
    assert!(meta["timings"]["total"].as_f64().unwrap() > 0.0);

    // Same config again, with more threads: the file is bit-identical.
    let o = flowhks(d, &["--config", "desk.conf", "--threads", "3", "hks", "-i", "s.pl", "-o", "t.hks"]);
    assert!(o.status.success());
    assert_eq!(std::fs::read(d.join("s.hks")).unwrap(), std::fs::read(d.join("t.hks")).unwrap());

    let o = flowhks(
        d,
        &["--config", "desk.conf", "hks", "-i", "s.pl", "-o", "u.hkb", "--binary", "--set", "beta=0.05"],
    );
    assert!(o.status.success());
    let b = load_hks(d.join("u.hkb")).unwrap();
    assert!(b.s_min() < field.s_min());
}

#[test]
fn hks_errors_name_their_stage() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_dataset(d);
    let o = flowhks(
        d,
        &["--config", "desk.conf", "hks", "-i", "s.pl", "-o", "x.hks", "--set", "alpha=1e-6", "--set", "threshold=1e-12"],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("lbo stage failed"), "{}", stderr(&o));
    assert!(!d.join("x.hks").exists());

    let o = flowhks(d, &["hks", "-i", "s.pl", "-o", "x.hks", "--set", "colour=red"]);
    assert_eq!(o.status.code(), Some(2));
    let o = flowhks(d, &["hks", "-i", "missing.pl", "-o", "x.hks"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing.pl"));
}

#[test]
fn cluster_and_similarity_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_dataset(d);
    assert!(flowhks(d, &["--config", "desk.conf", "hks", "-i", "s.pl", "-o", "s.hks"]).status.success());

    let o = flowhks(
        d,
        &[
            "cluster", "--dataset", "s=s.pl,s.hks", "-k", "3", "--range", "0,60", "--region", "0,0,2pi,2pi",
            "--seed", "7", "-o", "labels.csv", "--centroids", "cent",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(d.join("labels.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("index,dataset,label_or_value"));
    assert_eq!(lines.count(), 36);
    let cent = load_hks(d.join("cent.0.hks")).unwrap();
    assert_eq!((cent.n(), cent.scale_count()), (3, 61));

    let again = flowhks(
        d,
        &[
            "cluster", "--dataset", "s=s.pl,s.hks", "-k", "3", "--range", "0,60", "--region", "0,0,2pi,2pi",
            "--seed", "7", "-o", "again.csv",
        ],
    );
    assert!(again.status.success());
    assert_eq!(csv, std::fs::read_to_string(d.join("again.csv")).unwrap());

    let o = flowhks(
        d,
        &["similarity", "--dataset", "s=s.pl,s.hks", "--anchor-dataset", "s", "--anchor-point", "5", "-o", "sim.csv"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let sim = std::fs::read_to_string(d.join("sim.csv")).unwrap();
    assert_eq!(sim.lines().count(), 145);
    assert!(sim.contains("\n5,0,0\n"));

    let o = flowhks(d, &["cluster", "--dataset", "s=s.pl,s.hks", "-k", "500", "-o", "x.csv"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn serve_reports_a_busy_port() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_dataset(d);
    assert!(flowhks(d, &["--config", "desk.conf", "hks", "-i", "s.pl", "-o", "s.hks"]).status.success());
    let held = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = held.local_addr().unwrap().port().to_string();
    let o = flowhks(d, &["serve", "--dataset", "s=s.pl,s.hks", "--port", &port]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cannot listen"), "{}", stderr(&o));

    let o = flowhks(d, &["serve", "--dataset", "s=s.pl,nope.hks", "--port", "0"]);
    assert_eq!(o.status.code(), Some(1));
}
