//! Voronoi cell of a single site by half-plane clipping.
//!
//! The site sits at the origin of the projected tangent plane. Its cell is the
//! intersection of the bisector half-planes `x . q <= |q|^2 / 2` over all
//! neighbors `q`, seeded with a bounding square. A cell that still touches the
//! bounding square is treated as unbounded.

use crate::error::{Error, Result};

pub type Point2 = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EdgeSource {
    Bound,
    Neighbor,
}

/// Convex polygon around the origin with a provenance tag per edge
/// (edge `i` runs from vertex `i` to vertex `i + 1`).
#[derive(Debug, Clone)]
pub struct Cell {
    vertices: Vec<Point2>,
    sources: Vec<EdgeSource>,
}

impl Cell {
    pub fn square(half: f64) -> Self {
        Cell {
            vertices: vec![[-half, -half], [half, -half], [half, half], [-half, half]],
            sources: vec![EdgeSource::Bound; 4],
        }
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn touches_bound(&self) -> bool {
        self.sources.contains(&EdgeSource::Bound)
    }

    pub fn area(&self) -> f64 {
        let v = &self.vertices;
        let n = v.len();
        if n < 3 {
            return 0.0;
        }
        let twice: f64 = (0..n)
            .map(|i| {
                let (a, b) = (v[i], v[(i + 1) % n]);
                a[0] * b[1] - b[0] * a[1]
            })
            .sum();
        0.5 * twice.abs()
    }

    /// Keeps the part closer to the origin than to `q`.
    pub fn clip(&mut self, q: Point2) {
        let c = 0.5 * (q[0] * q[0] + q[1] * q[1]);
        let side = |p: Point2| p[0] * q[0] + p[1] * q[1] - c;
        let n = self.vertices.len();
        let mut verts = Vec::with_capacity(n + 1);
        let mut srcs = Vec::with_capacity(n + 1);
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let (sa, sb) = (side(a), side(b));
            let a_in = sa <= 0.0;
            let b_in = sb <= 0.0;
            let cross = || {
                let t = sa / (sa - sb);
                [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
            };
            if a_in {
                verts.push(a);
                srcs.push(self.sources[i]);
                if !b_in {
                    verts.push(cross());
                    srcs.push(EdgeSource::Neighbor);
                }
            } else if b_in {
                verts.push(cross());
                srcs.push(self.sources[i]);
            }
        }
        self.vertices = verts;
        self.sources = srcs;
    }
}

/// Voronoi cell of the origin among `neighbors`, inside a square of side `bound_side`.
pub fn clip_cell(neighbors: &[Point2], bound_side: f64) -> Cell {
    let mut cell = Cell::square(0.5 * bound_side);
    for &q in neighbors {
        if q[0] == 0.0 && q[1] == 0.0 {
            continue;
        }
        cell.clip(q);
        if cell.vertices.is_empty() {
            break;
        }
    }
    cell
}

/// Counter-clockwise convex hull (Andrew's monotone chain), collinear points dropped.
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: Point2, a: Point2, b: Point2| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut hull: Vec<Point2> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Whether `p` lies inside or on the counter-clockwise convex polygon `hull`,
/// with an absolute slack `tol`.
pub fn inside_hull(hull: &[Point2], p: Point2, tol: f64) -> bool {
    if hull.len() < 3 {
        return false;
    }
    (0..hull.len()).all(|i| {
        let a = hull[i];
        let b = hull[(i + 1) % hull.len()];
        let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
        let len = (ex * ex + ey * ey).sqrt();
        let cross = ex * (p[1] - a[1]) - ey * (p[0] - a[0]);
        cross >= -tol * len
    })
}

/// Area of the site's cell plus whether boundary padding was needed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoronoiVolume {
    pub volume: f64,
    pub boundary: bool,
}

/// Cell area of the origin among projected `neighbors` (principal axes as
/// coordinate axes). `delta` sets the bounding square side `10 * delta`.
///
/// If the cell is unbounded or has a vertex outside the convex hull of the
/// neighborhood, four padding sites are added at the nearest-neighbor distance
/// along both principal axes and the cell is recomputed.
pub fn voronoi_volume(neighbors: &[Point2], delta: f64) -> Result<VoronoiVolume> {
    let nearest = neighbors
        .iter()
        .map(|q| q[0].hypot(q[1]))
        .filter(|&r| r > 0.0)
        .fold(f64::INFINITY, f64::min);

    let mut distinct: Vec<Point2> = neighbors.to_vec();
    distinct.push([0.0, 0.0]);
    distinct.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    distinct.dedup();
    if distinct.len() < 3 {
        let r = if nearest.is_finite() { nearest } else { delta };
        if !(r > 0.0) {
            return Err(Error::invalid("all projected neighbors coincide with the site"));
        }
        return Ok(VoronoiVolume {
            volume: r * r,
            boundary: true,
        });
    }

    let extent = neighbors
        .iter()
        .map(|q| q[0].hypot(q[1]))
        .fold(0.0f64, f64::max);
    let side = 10.0 * delta.max(extent);
    let cell = clip_cell(neighbors, side);

    let hull = convex_hull(&distinct);
    let tol = 1e-12 * extent;
    let bounded_inside =
        !cell.touches_bound() && cell.vertices().iter().all(|&v| inside_hull(&hull, v, tol));
    if bounded_inside {
        return Ok(VoronoiVolume {
            volume: cell.area(),
            boundary: false,
        });
    }

    let r = nearest;
    let mut padded = neighbors.to_vec();
    padded.extend([[r, 0.0], [-r, 0.0], [0.0, r], [0.0, -r]]);
    let cell = clip_cell(&padded, side);
    Ok(VoronoiVolume {
        volume: cell.area(),
        boundary: true,
    })
}
