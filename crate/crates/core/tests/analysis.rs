use flowhks::analysis::{
    align_scales, kmeans_hks, mean_hks, resample, similarity_field, ClusterMode, ClusterOptions, Domain, PointRef,
    ScaleRange,
};
use flowhks::hks::{normalize_hks, sample_scales, HksField, Normalization};
use proptest::prelude::*;

/// Column-normalized field from positive raw values.
fn field(n: usize, raw: &[f64], s_min: f64, s_max: f64) -> HksField {
    let ns = raw.len() / n;
    let values = normalize_hks(raw, ns, &vec![1.0; n], Normalization::ColumnSum).unwrap();
    HksField::new(sample_scales(s_min, s_max, ns).unwrap(), values).unwrap()
}

fn raw_values(n: usize, ns: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-6f64..1.0, n * ns)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn similarity_is_a_metric(raw in raw_values(6, 12), lo in 0usize..6, width in 0usize..6, a in 0usize..6, b in 0usize..6, c in 0usize..6) {
        let f = field(6, &raw, 0.01, 10.0);
        let r = ScaleRange::new(lo, lo + width, 12).unwrap();
        let at = |p| similarity_field(&[&f], PointRef { dataset: 0, point: p }, r, Domain::Log).unwrap().remove(0);
        let (da, db) = (at(a), at(b));
        prop_assert_eq!(da[a], 0.0);
        prop_assert!((da[b] - db[a]).abs() <= 1e-12 * (1.0 + da[b]));
        prop_assert!(da[c] <= da[b] + db[c] + 1e-12);
    }

    #[test]
    fn full_range_mean_is_not_positive(raw in raw_values(5, 10)) {
        let f = field(5, &raw, 0.5, 50.0);
        for v in mean_hks(&f, ScaleRange::full(10)).unwrap() {
            prop_assert!(v <= 1e-15);
        }
    }

    #[test]
    fn clustering_a_dataset_with_its_copy(raw in raw_values(24, 8), k in 1usize..5, seed in 0u64..50) {
        let f = field(24, &raw, 0.1, 1.0);
        let sel: Vec<usize> = (0..24).collect();
        let opts = ClusterOptions { k, seed, ..ClusterOptions::default() };
        let r = kmeans_hks(&[&f, &f], &[sel.clone(), sel], ScaleRange::full(8), &opts).unwrap();
        prop_assert_eq!(&r.labels[0], &r.labels[1]);
        prop_assert!(r.labels[0].iter().all(|&l| l < k));
    }

    #[test]
    fn clustering_is_deterministic(raw in raw_values(20, 6), seed in 0u64..50) {
        let f = field(20, &raw, 0.1, 1.0);
        let sel: Vec<usize> = (0..20).step_by(2).collect();
        let opts = ClusterOptions { k: 3, seed, mode: ClusterMode::Separate, ..ClusterOptions::default() };
        let a = kmeans_hks(&[&f], &[sel.clone()], ScaleRange::full(6), &opts).unwrap();
        let b = kmeans_hks(&[&f], &[sel], ScaleRange::full(6), &opts).unwrap();
        prop_assert_eq!(a, b);
    }
}

/// Smooth curves in `(ln s, log10 h)`, sampled on a dense grid.
fn smooth(s_min: f64, s_max: f64, count: usize) -> HksField {
    let scales = sample_scales(s_min, s_max, count).unwrap();
    let values = (0..3)
        .flat_map(|p| {
            scales
                .iter()
                .map(move |s| 10f64.powf(-1.0 - 0.3 * (s.ln() + p as f64).sin() - 0.1 * s.ln()))
        })
        .collect();
    HksField::new(scales, values).unwrap()
}

#[test]
fn align_round_trip_recovers_curves() {
    let a = smooth(0.01, 100.0, 400);
    let b = smooth(0.1, 1000.0, 300);
    let (ra, rb) = align_scales(&a, &b).unwrap();
    assert_eq!(ra.scales(), rb.scales());
    assert!((ra.s_min() - 0.1).abs() < 1e-12 && (ra.s_max() - 100.0).abs() < 1e-9);
    assert_eq!(ra.scale_count(), 100);
    // Back to the original grid, restricted to the overlap.
    let inside: Vec<f64> = a.scales().iter().copied().filter(|&s| s >= 0.1 && s <= 100.0).collect();
    let back = resample(&ra, &inside).unwrap();
    let offset = a.scales().iter().position(|&s| s >= 0.1).unwrap();
    for p in 0..3 {
        for (j, v) in back.log_row(p).iter().enumerate() {
            let want = a.log_row(p)[offset + j];
            assert!((v - want).abs() < 1e-3, "point {p} scale {j}: {v} vs {want}");
        }
    }
}

#[test]
fn equal_grids_are_left_alone() {
    let a = smooth(0.01, 100.0, 50);
    let (ra, rb) = align_scales(&a, &a).unwrap();
    assert_eq!(ra, a);
    assert_eq!(rb, a);
}
