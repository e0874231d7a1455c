use flowhks::neighborhood::{build_graph, NeighborhoodConfig, PointCloud};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Fraction of uniform samples in `[0,1]^2` whose nearest site is each site.
fn monte_carlo_areas(sites: &[[f64; 2]], samples: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = vec![0usize; sites.len()];
    for _ in 0..samples {
        let x: f64 = rng.random();
        let y: f64 = rng.random();
        let mut best = (0, f64::INFINITY);
        for (i, s) in sites.iter().enumerate() {
            let d = (s[0] - x).powi(2) + (s[1] - y).powi(2);
            if d < best.1 {
                best = (i, d);
            }
        }
        hits[best.0] += 1;
    }
    hits.iter().map(|&h| h as f64 / samples as f64).collect()
}

#[test]
fn interior_cells_agree_with_monte_carlo_areas() {
    for seed in [1u64, 2, 3] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sites: Vec<[f64; 2]> = (0..50).map(|_| [rng.random(), rng.random()]).collect();
        let cloud = PointCloud::new(2, sites.iter().flatten().copied().collect()).unwrap();
        let g = build_graph(&cloud, &NeighborhoodConfig { neighbors: 30, drop_ratio: 0.3 }).unwrap();
        let mc = monte_carlo_areas(&sites, 4_000_000, seed + 100);
        let mut checked = 0;
        for i in 0..sites.len() {
            if g.boundary[i] {
                continue;
            }
            let rel = (g.cell_volume[i] - mc[i]).abs() / mc[i];
            assert!(rel < 0.02, "seed {seed} site {i}: {} vs {}", g.cell_volume[i], mc[i]);
            checked += 1;
        }
        assert!(checked >= 10, "only {checked} interior cells");
    }
}

#[test]
fn unit_grid_interior_cells_are_one() {
    let side = 20;
    let data: Vec<f64> = (0..side * side)
        .flat_map(|k| [(k % side) as f64, (k / side) as f64])
        .collect();
    let cloud = PointCloud::new(2, data).unwrap();
    let g = build_graph(&cloud, &NeighborhoodConfig { neighbors: 24, drop_ratio: 0.3 }).unwrap();
    let mut interior = 0;
    for k in 0..side * side {
        let (i, j) = (k % side, k / side);
        if (2..side - 2).contains(&i) && (2..side - 2).contains(&j) {
            assert!(!g.boundary[k]);
            assert!((g.cell_volume[k] - 1.0).abs() < 1e-6, "{k}: {}", g.cell_volume[k]);
            interior += 1;
        }
    }
    assert_eq!(interior, 256);
    // Corner points need padding.
    assert!(g.boundary[0] && g.boundary[side * side - 1]);
}

#[test]
fn embedded_grid_keeps_unit_cells() {
    // The same lattice rotated into 5-D space: tangent projection recovers it.
    let side = 12;
    let (c, s) = (0.6f64, 0.8f64);
    let data: Vec<f64> = (0..side * side)
        .flat_map(|k| {
            let (x, y) = ((k % side) as f64, (k / side) as f64);
            [c * x, s * x, c * y, -s * y * 0.0 + 0.0, s * y].map(|v| v + 1.0)
        })
        .collect();
    let cloud = PointCloud::new(5, data).unwrap();
    let g = build_graph(&cloud, &NeighborhoodConfig { neighbors: 20, drop_ratio: 0.3 }).unwrap();
    for k in 0..side * side {
        let (i, j) = (k % side, k / side);
        if (2..side - 2).contains(&i) && (2..side - 2).contains(&j) {
            assert_eq!(g.local_dim[k], 2);
            assert!((g.cell_volume[k] - 1.0).abs() < 1e-6, "{k}: {}", g.cell_volume[k]);
        }
    }
}
