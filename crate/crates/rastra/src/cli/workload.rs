//! Synthetic spatial workloads: seeded point clouds (uniform and clustered)
//! and random constraint polygons (convex, concave, with holes), used by the
//! benchmark harness and the verification suites.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::geometry::{validate_polygon, Point2, Polygon, Rect};

/// The fixed world box all synthetic workloads live in.
pub fn bench_extent() -> Rect {
    Rect::from_corners(Point2::new(0.0, 0.0), Point2::new(100.0, 100.0))
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_points(n: usize, extent: Rect, rng: &mut impl Rng) -> Vec<Point2> {
    (0..n)
        .map(|_| {
            Point2::new(
                rng.gen_range(extent.min.x..extent.max.x),
                rng.gen_range(extent.min.y..extent.max.y),
            )
        })
        .collect()
}

/// Gaussian clusters around uniformly placed centers, clamped just inside
/// the extent.
pub fn clustered_points(
    n: usize,
    extent: Rect,
    clusters: usize,
    rng: &mut impl Rng,
) -> Vec<Point2> {
    let clusters = clusters.max(1);
    let centers: Vec<Point2> = (0..clusters)
        .map(|_| {
            Point2::new(
                rng.gen_range(extent.min.x..extent.max.x),
                rng.gen_range(extent.min.y..extent.max.y),
            )
        })
        .collect();
    let sigma = 0.02 * extent.width().min(extent.height());
    let margin = 1e-9 * extent.width().max(1.0);
    (0..n)
        .map(|_| {
            let c = centers[rng.gen_range(0..clusters)];
            // Box-Muller.
            let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
            let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = (-2.0 * u1.ln()).sqrt() * sigma;
            Point2::new(
                (c.x + r * u2.cos()).clamp(extent.min.x + margin, extent.max.x - margin),
                (c.y + r * u2.sin()).clamp(extent.min.y + margin, extent.max.y - margin),
            )
        })
        .collect()
}

/// Half uniform, half clustered, the harness's standard point mix.
pub fn mixed_points(n: usize, extent: Rect, rng: &mut impl Rng) -> Vec<Point2> {
    let half = n / 2;
    let mut pts = uniform_points(half, extent, rng);
    pts.extend(clustered_points(n - half, extent, 32, rng));
    pts
}

/// Convex polygon: an affine image of a regular n-gon.
pub fn random_convex_polygon(center: Point2, radius: f64, rng: &mut impl Rng) -> Polygon {
    let n = rng.gen_range(5..10);
    let rx = radius * rng.gen_range(0.6..1.0);
    let ry = radius * rng.gen_range(0.6..1.0);
    let rot = rng.gen_range(0.0..std::f64::consts::TAU);
    let ring: Vec<Point2> = (0..n)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / n as f64;
            let (x, y) = (rx * a.cos(), ry * a.sin());
            Point2::new(
                center.x + x * rot.cos() - y * rot.sin(),
                center.y + x * rot.sin() + y * rot.cos(),
            )
        })
        .collect();
    validate_polygon(&[ring]).expect("affine regular polygon is simple")
}

fn star_ring(center: Point2, rmax: f64, n: usize, rng: &mut impl Rng) -> Vec<Point2> {
    // Jittered angular partition: gaps stay below pi, so the ring is
    // star-shaped around the center and simple.
    (0..n)
        .map(|k| {
            let a = std::f64::consts::TAU * (k as f64 + 0.8 * rng.gen::<f64>()) / n as f64;
            let r = rng.gen_range(0.3 * rmax..rmax);
            Point2::new(center.x + r * a.cos(), center.y + r * a.sin())
        })
        .collect()
}

/// Concave star polygon.
pub fn random_star_polygon(center: Point2, rmax: f64, rng: &mut impl Rng) -> Polygon {
    let n = rng.gen_range(8..16);
    validate_polygon(&[star_ring(center, rmax, n, rng)]).expect("star ring is simple")
}

/// Star polygon with a small star hole around the same center.
pub fn random_holed_polygon(center: Point2, rmax: f64, rng: &mut impl Rng) -> Polygon {
    let n = rng.gen_range(8..16);
    let outer = star_ring(center, rmax, n, rng);
    // The outer ring contains the disc of radius ~0.22*rmax, so a hole
    // bounded by 0.15*rmax stays strictly inside.
    let hole = star_ring(center, 0.15 * rmax, 6, rng);
    validate_polygon(&[outer, hole]).expect("hole stays strictly inside the star")
}

/// A random constraint polygon of a random kind placed inside the extent.
pub fn random_polygon(extent: Rect, rng: &mut impl Rng) -> Polygon {
    let scale = extent.width().min(extent.height());
    let rmax = scale * rng.gen_range(0.05..0.16);
    let center = Point2::new(
        rng.gen_range(extent.min.x + rmax..extent.max.x - rmax),
        rng.gen_range(extent.min.y + rmax..extent.max.y - rmax),
    );
    match rng.gen_range(0..3) {
        0 => random_convex_polygon(center, rmax, rng),
        1 => random_star_polygon(center, rmax, rng),
        _ => random_holed_polygon(center, rmax, rng),
    }
}
