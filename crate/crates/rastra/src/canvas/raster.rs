//! Rasterization of geometric objects and utility shapes into canvases.
//!
//! Fills sample the pixel center: a region pixel is set when its center lies
//! strictly inside the region, using the same crossing arithmetic as
//! `geometry::point_in_polygon` so raster fills and exact classification
//! agree bit-for-bit away from boundaries. The boundary walk is
//! conservative: a pixel is flagged whenever its closed box intersects a
//! boundary segment (or analytic boundary curve), and flagged pixels carry
//! references to the exact geometry for later refinement.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::geometry::{
    point_in_polygon, Containment, GeometricObject, Point2, Polygon, Primitive, Rect,
};

use super::{
    BoundaryEntry, Canvas, CanvasBuilder, CanvasError, GeometryRef, InfoMatrix, ObjectInfo,
    RasterFrame,
};

/// The information written into the row a rasterized primitive occupies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoSeed {
    pub id: u64,
    pub count: f64,
    pub value: f64,
}

impl InfoSeed {
    pub fn new(id: u64) -> Self {
        InfoSeed {
            id,
            count: 1.0,
            value: 0.0,
        }
    }

    pub fn with_value(id: u64, value: f64) -> Self {
        InfoSeed {
            id,
            count: 1.0,
            value,
        }
    }

    fn info(&self) -> ObjectInfo {
        ObjectInfo::new(self.id, self.count, self.value)
    }
}

/// Parametric canvas generators: circle, rectangle and half space. Their
/// membership predicates stay analytic all the way into the boundary index.
#[derive(Debug, Clone, PartialEq)]
pub enum UtilityShape {
    Circle { center: Point2, radius: f64 },
    Rect { a: Point2, b: Point2 },
    HalfSpace { a: f64, b: f64, c: f64 },
}

impl UtilityShape {
    pub fn validate(&self) -> Result<(), CanvasError> {
        match self {
            UtilityShape::Circle { radius, .. } => {
                if *radius > 0.0 {
                    Ok(())
                } else {
                    Err(CanvasError::NonPositiveRadius)
                }
            }
            UtilityShape::Rect { a, b } => {
                if Rect::from_corners(*a, *b).is_degenerate() {
                    Err(CanvasError::DegenerateExtent)
                } else {
                    Ok(())
                }
            }
            UtilityShape::HalfSpace { a, b, .. } => {
                if *a == 0.0 && *b == 0.0 {
                    Err(CanvasError::DegenerateHalfSpace)
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Bounding rectangle; `None` for the unbounded half space.
    pub fn mbr(&self) -> Option<Rect> {
        match self {
            UtilityShape::Circle { center, radius } => Some(Rect::new(
                Point2::new(center.x - radius, center.y - radius),
                Point2::new(center.x + radius, center.y + radius),
            )),
            UtilityShape::Rect { a, b } => Some(Rect::from_corners(*a, *b)),
            UtilityShape::HalfSpace { .. } => None,
        }
    }

    pub fn geometry_ref(&self) -> GeometryRef {
        match self {
            UtilityShape::Circle { center, radius } => GeometryRef::Circle {
                center: *center,
                radius: *radius,
            },
            UtilityShape::Rect { a, b } => GeometryRef::RectRegion(Rect::from_corners(*a, *b)),
            UtilityShape::HalfSpace { a, b, c } => GeometryRef::HalfSpace {
                a: *a,
                b: *b,
                c: *c,
            },
        }
    }
}

/// Rasterize one record's geometric object into a canvas. Each primitive
/// dimension writes its own information row; an object wholly outside the
/// frame yields the empty canvas.
pub fn rasterize(obj: &GeometricObject, seed: &InfoSeed, frame: &RasterFrame) -> Canvas {
    let mut builder = CanvasBuilder::new(frame.clone());
    if !obj.mbr().intersects(&frame.extent()) {
        return builder.finish();
    }
    let info = seed.info();
    let mut rows: [BTreeSet<u32>; 3] = [BTreeSet::new(), BTreeSet::new(), BTreeSet::new()];

    for prim in obj.primitives() {
        match prim {
            Primitive::Point(p) => {
                if let Some((i, j)) = frame.world_to_pixel(*p) {
                    let idx = frame.linear(i, j);
                    rows[0].insert(idx);
                    builder.add_boundary(
                        idx,
                        BoundaryEntry {
                            id: seed.id,
                            dim: 0,
                            geom: GeometryRef::Point(*p),
                        },
                    );
                }
            }
            Primitive::Line(line) => {
                let geom = GeometryRef::Line(Arc::new(line.clone()));
                let mut touched = BTreeSet::new();
                for (a, b) in line.segments() {
                    conservative_segment_pixels(frame, a, b, |idx| {
                        touched.insert(idx);
                    });
                }
                for idx in touched {
                    rows[1].insert(idx);
                    builder.add_boundary(
                        idx,
                        BoundaryEntry {
                            id: seed.id,
                            dim: 1,
                            geom: geom.clone(),
                        },
                    );
                }
            }
            Primitive::Region(poly) => {
                let arc = Arc::new(poly.clone());
                let boundary = polygon_boundary_pixels(frame, poly);
                let geom = GeometryRef::Region(arc);
                for &idx in &boundary {
                    builder.add_boundary(
                        idx,
                        BoundaryEntry {
                            id: seed.id,
                            dim: 2,
                            geom: geom.clone(),
                        },
                    );
                }
                for idx in polygon_fill_pixels(frame, poly, &boundary) {
                    rows[2].insert(idx);
                }
            }
        }
    }

    for (dim, pixels) in rows.iter().enumerate() {
        for &idx in pixels {
            builder.update_cell(idx, |m| m.with_row(dim, Some(info)));
        }
    }
    builder.finish()
}

/// Generate the canvas of a utility shape: row-2 fill by pixel-center
/// membership, boundary entries wherever the pixel box straddles the shape
/// boundary, with the analytic predicate stored for refinement.
pub fn utility_canvas(
    shape: &UtilityShape,
    seed: &InfoSeed,
    frame: &RasterFrame,
) -> Result<Canvas, CanvasError> {
    shape.validate()?;
    let mut builder = CanvasBuilder::new(frame.clone());
    let info = seed.info();
    let geom = shape.geometry_ref();

    let (fill, boundary): (Vec<u32>, BTreeSet<u32>) = match shape {
        UtilityShape::Rect { a, b } => {
            let rect = Rect::from_corners(*a, *b);
            let ring = rect.corners().to_vec();
            let poly = crate::geometry::validate_polygon(&[ring])
                .expect("non-degenerate rectangle ring is valid");
            let boundary = polygon_boundary_pixels(frame, &poly);
            let fill = polygon_fill_pixels(frame, &poly, &boundary);
            (fill, boundary)
        }
        UtilityShape::Circle { center, radius } => circle_pixels(frame, *center, *radius),
        UtilityShape::HalfSpace { a, b, c } => half_space_pixels(frame, *a, *b, *c),
    };

    for idx in fill {
        builder.set_cell(idx, InfoMatrix::single(2, info));
    }
    for idx in boundary {
        builder.add_boundary(
            idx,
            BoundaryEntry {
                id: seed.id,
                dim: 2,
                geom: geom.clone(),
            },
        );
    }
    Ok(builder.finish())
}

/// Smallest pixel index whose center is `>= x` (float estimate corrected by
/// direct comparison against the center formula).
fn first_center_ge(min: f64, step: f64, x: f64) -> i64 {
    let center = |i: i64| min + (i as f64 + 0.5) * step;
    let mut i = ((x - min) / step - 0.5).ceil() as i64;
    while center(i) < x {
        i += 1;
    }
    while center(i - 1) >= x {
        i -= 1;
    }
    i
}

/// Smallest pixel index whose center is strictly `> x`.
fn first_center_gt(min: f64, step: f64, x: f64) -> i64 {
    let center = |i: i64| min + (i as f64 + 0.5) * step;
    let mut i = ((x - min) / step - 0.5).floor() as i64 + 1;
    while center(i) <= x {
        i += 1;
    }
    while center(i - 1) > x {
        i -= 1;
    }
    i
}

/// Closed segment vs closed axis-aligned box, exact for touching contacts.
pub(crate) fn segment_box_intersects(rect: &Rect, a: Point2, b: Point2) -> bool {
    let d = Point2::new(b.x - a.x, b.y - a.y);
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    let clips = [
        (-d.x, a.x - rect.min.x),
        (d.x, rect.max.x - a.x),
        (-d.y, a.y - rect.min.y),
        (d.y, rect.max.y - a.y),
    ];
    for (p, q) in clips {
        if p == 0.0 {
            if q < 0.0 {
                return false;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    t0 <= t1
}

/// Visit every pixel whose closed box intersects the closed segment `a..b`.
/// Candidate ranges come from float estimates expanded by one pixel; the
/// exact box test makes the final call.
pub(crate) fn conservative_segment_pixels(
    frame: &RasterFrame,
    a: Point2,
    b: Point2,
    mut mark: impl FnMut(u32),
) {
    let ext = frame.extent();
    let (dx, dy) = frame.pixel_size();
    let w = frame.width() as i64;
    let h = frame.height() as i64;

    let minx = a.x.min(b.x);
    let maxx = a.x.max(b.x);
    let col_lo = ((((minx - ext.min.x) / dx).floor() as i64) - 1).clamp(0, w - 1);
    let col_hi = ((((maxx - ext.min.x) / dx).floor() as i64) + 1).clamp(0, w - 1);
    if maxx < ext.min.x || minx > ext.max.x {
        return;
    }

    let seg_dx = b.x - a.x;
    for i in col_lo..=col_hi {
        let sx0 = ext.min.x + i as f64 * dx;
        let sx1 = sx0 + dx;
        // Parameter interval of the segment within this column's slab.
        let (ty_min, ty_max) = if seg_dx == 0.0 {
            if a.x < sx0 || a.x > sx1 {
                continue;
            }
            (a.y.min(b.y), a.y.max(b.y))
        } else {
            let t0 = (sx0 - a.x) / seg_dx;
            let t1 = (sx1 - a.x) / seg_dx;
            let (tl, th) = (t0.min(t1).max(0.0), t0.max(t1).min(1.0));
            if tl > th {
                continue;
            }
            let ya = a.y + tl * (b.y - a.y);
            let yb = a.y + th * (b.y - a.y);
            (ya.min(yb), ya.max(yb))
        };
        let row_lo = ((((ty_min - ext.min.y) / dy).floor() as i64) - 1).clamp(0, h - 1);
        let row_hi = ((((ty_max - ext.min.y) / dy).floor() as i64) + 1).clamp(0, h - 1);
        for j in row_lo..=row_hi {
            let pb = frame.pixel_box(i as u32, j as u32);
            if segment_box_intersects(&pb, a, b) {
                mark(frame.linear(i as u32, j as u32));
            }
        }
    }
}

/// All pixels whose closed box is touched by any ring edge of the polygon.
pub(crate) fn polygon_boundary_pixels(frame: &RasterFrame, poly: &Polygon) -> BTreeSet<u32> {
    let mut out = BTreeSet::new();
    for (a, b) in poly.edges() {
        conservative_segment_pixels(frame, a, b, |idx| {
            out.insert(idx);
        });
    }
    out
}

/// Conservative boundary pixels of any referenced geometry; used when a
/// transform re-anchors boundary entries in a new frame.
pub(crate) fn geometry_boundary_pixels(
    frame: &RasterFrame,
    geom: &GeometryRef,
) -> BTreeSet<u32> {
    match geom {
        GeometryRef::Point(p) => frame
            .world_to_pixel(*p)
            .map(|(i, j)| frame.linear(i, j))
            .into_iter()
            .collect(),
        GeometryRef::Line(line) => {
            let mut out = BTreeSet::new();
            for (a, b) in line.segments() {
                conservative_segment_pixels(frame, a, b, |idx| {
                    out.insert(idx);
                });
            }
            out
        }
        GeometryRef::Region(poly) => polygon_boundary_pixels(frame, poly),
        GeometryRef::RectRegion(r) => {
            let mut out = BTreeSet::new();
            let c = r.corners();
            for k in 0..4 {
                conservative_segment_pixels(frame, c[k], c[(k + 1) % 4], |idx| {
                    out.insert(idx);
                });
            }
            out
        }
        GeometryRef::Circle { center, radius } => circle_pixels(frame, *center, *radius).1,
        GeometryRef::HalfSpace { a, b, c } => half_space_pixels(frame, *a, *b, *c).1,
    }
}

/// Scanline parity fill over all rings (holes flip parity). Boundary pixels
/// are re-decided with the full point-in-polygon test so a center sitting on
/// an edge never counts as inside.
pub(crate) fn polygon_fill_pixels(
    frame: &RasterFrame,
    poly: &Polygon,
    boundary: &BTreeSet<u32>,
) -> Vec<u32> {
    let ext = frame.extent();
    let (dx, dy) = frame.pixel_size();
    let w = frame.width() as i64;
    let h = frame.height() as i64;
    let mbr = poly.mbr();

    let row_lo = ((((mbr.min.y - ext.min.y) / dy).floor() as i64) - 1).clamp(0, h - 1);
    let row_hi = ((((mbr.max.y - ext.min.y) / dy).floor() as i64) + 1).clamp(0, h - 1);

    let mut fill = BTreeSet::new();
    let mut xs: Vec<f64> = Vec::new();
    for j in row_lo..=row_hi {
        let cy = ext.min.y + (j as f64 + 0.5) * dy;
        xs.clear();
        for ring in poly.rings() {
            for (a, b) in ring.edges() {
                if (a.y > cy) != (b.y > cy) {
                    xs.push(a.x + (cy - a.y) * (b.x - a.x) / (b.y - a.y));
                }
            }
        }
        xs.sort_by(f64::total_cmp);
        let mut m = 0;
        while m + 1 < xs.len() {
            let i_lo = first_center_ge(ext.min.x, dx, xs[m]).clamp(0, w);
            let i_hi = first_center_ge(ext.min.x, dx, xs[m + 1]).clamp(0, w);
            for i in i_lo..i_hi {
                fill.insert(frame.linear(i as u32, j as u32));
            }
            m += 2;
        }
    }

    for &idx in boundary {
        let (i, j) = frame.coords(idx);
        let inside = point_in_polygon(frame.pixel_center(i, j), poly) == Containment::Inside;
        if inside {
            fill.insert(idx);
        } else {
            fill.remove(&idx);
        }
    }
    fill.into_iter().collect()
}

/// Fill and boundary pixels of a circle; fill is the exact closed predicate
/// at pixel centers, boundary is the set of boxes straddling the circle.
fn circle_pixels(frame: &RasterFrame, center: Point2, r: f64) -> (Vec<u32>, BTreeSet<u32>) {
    let ext = frame.extent();
    let (dx, dy) = frame.pixel_size();
    let w = frame.width() as i64;
    let h = frame.height() as i64;
    let r2 = r * r;

    let row_lo = ((((center.y - r - ext.min.y) / dy).floor() as i64) - 1).clamp(0, h - 1);
    let row_hi = ((((center.y + r - ext.min.y) / dy).floor() as i64) + 1).clamp(0, h - 1);
    let col_lo = ((((center.x - r - ext.min.x) / dx).floor() as i64) - 1).clamp(0, w - 1);
    let col_hi = ((((center.x + r - ext.min.x) / dx).floor() as i64) + 1).clamp(0, w - 1);

    let mut fill = Vec::new();
    let mut boundary = BTreeSet::new();
    for j in row_lo..=row_hi {
        let cy = ext.min.y + (j as f64 + 0.5) * dy;
        let by0 = ext.min.y + j as f64 * dy;
        let by1 = by0 + dy;
        for i in col_lo..=col_hi {
            let cx = ext.min.x + (i as f64 + 0.5) * dx;
            let ddx = cx - center.x;
            let ddy = cy - center.y;
            if ddx * ddx + ddy * ddy <= r2 {
                fill.push(frame.linear(i as u32, j as u32));
            }
            let bx0 = ext.min.x + i as f64 * dx;
            let bx1 = bx0 + dx;
            let nx = center.x.clamp(bx0, bx1) - center.x;
            let ny = center.y.clamp(by0, by1) - center.y;
            let min2 = nx * nx + ny * ny;
            let fx = (center.x - bx0).abs().max((center.x - bx1).abs());
            let fy = (center.y - by0).abs().max((center.y - by1).abs());
            let max2 = fx * fx + fy * fy;
            if min2 <= r2 && max2 >= r2 {
                boundary.insert(frame.linear(i as u32, j as u32));
            }
        }
    }
    (fill, boundary)
}

/// Fill and boundary pixels of the half space `a*x + b*y + c <= 0`.
fn half_space_pixels(frame: &RasterFrame, a: f64, b: f64, c: f64) -> (Vec<u32>, BTreeSet<u32>) {
    let ext = frame.extent();
    let (dx, dy) = frame.pixel_size();
    let w = frame.width() as i64;
    let h = frame.height() as i64;
    let pred = |x: f64, y: f64| a * x + b * y + c <= 0.0;

    let mut fill = Vec::new();
    let mut boundary = BTreeSet::new();
    for j in 0..h {
        let cy = ext.min.y + (j as f64 + 0.5) * dy;
        let by0 = ext.min.y + j as f64 * dy;
        let by1 = by0 + dy;

        // Fill: the predicate is monotone in x along a row.
        if a == 0.0 {
            if pred(0.0, cy) {
                for i in 0..w {
                    fill.push(frame.linear(i as u32, j as u32));
                }
            }
        } else {
            let x_star = (-c - b * cy) / a;
            if a > 0.0 {
                // cx <= x_star keeps the predicate true.
                let mut i_end = first_center_gt(ext.min.x, dx, x_star).clamp(0, w);
                while i_end < w && pred(ext.min.x + (i_end as f64 + 0.5) * dx, cy) {
                    i_end += 1;
                }
                while i_end > 0 && !pred(ext.min.x + (i_end as f64 - 0.5) * dx, cy) {
                    i_end -= 1;
                }
                for i in 0..i_end {
                    fill.push(frame.linear(i as u32, j as u32));
                }
            } else {
                let mut i_start = first_center_ge(ext.min.x, dx, x_star).clamp(0, w);
                while i_start > 0 && pred(ext.min.x + (i_start as f64 - 0.5) * dx, cy) {
                    i_start -= 1;
                }
                while i_start < w && !pred(ext.min.x + (i_start as f64 + 0.5) * dx, cy) {
                    i_start += 1;
                }
                for i in i_start..w {
                    fill.push(frame.linear(i as u32, j as u32));
                }
            }
        }

        // Boundary: boxes whose corners straddle the line value.
        let straddles = |i: i64| {
            let bx0 = ext.min.x + i as f64 * dx;
            let bx1 = bx0 + dx;
            let vals = [
                a * bx0 + b * by0 + c,
                a * bx1 + b * by0 + c,
                a * bx0 + b * by1 + c,
                a * bx1 + b * by1 + c,
            ];
            let mn = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let mx = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            mn <= 0.0 && mx >= 0.0
        };
        if a == 0.0 {
            if straddles(0) {
                for i in 0..w {
                    boundary.insert(frame.linear(i as u32, j as u32));
                }
            }
        } else {
            let xa = (-c - b * by0) / a;
            let xb = (-c - b * by1) / a;
            let lo = ((((xa.min(xb) - ext.min.x) / dx).floor() as i64) - 1).clamp(0, w - 1);
            let hi = ((((xa.max(xb) - ext.min.x) / dx).floor() as i64) + 1).clamp(0, w - 1);
            for i in lo..=hi {
                if straddles(i) {
                    boundary.insert(frame.linear(i as u32, j as u32));
                }
            }
        }
    }
    fill.sort_unstable();
    (fill, boundary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{validate_polygon, GeometricObject, Polyline};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn frame(x0: f64, y0: f64, x1: f64, y1: f64, w: u32, h: u32) -> RasterFrame {
        RasterFrame::build(
            Rect::from_corners(Point2::new(x0, y0), Point2::new(x1, y1)),
            w,
            h,
        )
        .unwrap()
    }

    fn unit_square() -> Polygon {
        validate_polygon(&[vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ]])
        .unwrap()
    }

    fn random_star(rng: &mut impl Rng, n: usize, center: Point2, rmax: f64) -> Polygon {
        let n = n.max(4);
        let ring: Vec<Point2> = (0..n)
            .map(|k| {
                let a = std::f64::consts::TAU * (k as f64 + 0.8 * rng.gen::<f64>()) / n as f64;
                let r = rng.gen_range(0.3 * rmax..rmax);
                Point2::new(center.x + r * a.cos(), center.y + r * a.sin())
            })
            .collect();
        validate_polygon(&[ring]).unwrap()
    }

    #[test]
    fn point_rasterizes_to_single_pixel() {
        let f = frame(0.0, 0.0, 1.0, 1.0, 4, 4);
        let obj = GeometricObject::from_point(Point2::new(0.5, 0.5));
        let c = rasterize(&obj, &InfoSeed::new(9), &f);
        assert_eq!(c.non_null_count(), 1);
        let m = c.cell(2, 2);
        assert_eq!(m.row(0), Some(ObjectInfo::new(9, 1.0, 0.0)));
        assert_eq!(m.row(2), None);
        let entries = c.boundary_lookup(2, 2).unwrap();
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].dim, 0);
        assert_eq!(entries[0].geom, GeometryRef::Point(Point2::new(0.5, 0.5)));
    }

    #[test]
    fn square_fill_matches_center_classification() {
        let f = frame(0.0, 0.0, 2.0, 2.0, 16, 16);
        let sq = unit_square();
        let c = rasterize(&GeometricObject::from_polygon(sq.clone()), &InfoSeed::new(1), &f);
        for j in 0..16 {
            for i in 0..16 {
                let inside = point_in_polygon(f.pixel_center(i, j), &sq) == Containment::Inside;
                assert_eq!(
                    c.cell(i, j).row(2).is_some(),
                    inside,
                    "pixel ({i},{j}) fill disagrees with center classification"
                );
            }
        }
    }

    #[test]
    fn hole_covering_half_leaves_annulus() {
        let outer = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        let hole = vec![
            Point2::new(0.25, 0.25),
            Point2::new(0.75, 0.25),
            Point2::new(0.75, 0.75),
            Point2::new(0.25, 0.75),
        ];
        let poly = validate_polygon(&[outer, hole]).unwrap();
        let f = frame(0.0, 0.0, 1.0, 1.0, 16, 16);
        let c = rasterize(&GeometricObject::from_polygon(poly.clone()), &InfoSeed::new(1), &f);
        assert!(c.cell(8, 8).row(2).is_none(), "hole center must be null");
        assert!(c.cell(1, 8).row(2).is_some(), "annulus pixel must be set");
        for j in 0..16 {
            for i in 0..16 {
                let inside = point_in_polygon(f.pixel_center(i, j), &poly) == Containment::Inside;
                assert_eq!(c.cell(i, j).row(2).is_some(), inside);
            }
        }
    }

    #[test]
    fn polyline_touches_pixels_in_row1() {
        let f = frame(0.0, 0.0, 1.0, 1.0, 8, 8);
        let line = Polyline::new(vec![Point2::new(0.05, 0.05), Point2::new(0.95, 0.95)]).unwrap();
        let obj = GeometricObject::new(vec![Primitive::Line(line)]).unwrap();
        let c = rasterize(&obj, &InfoSeed::new(3), &f);
        assert!(c.cell(0, 0).row(1).is_some());
        assert!(c.cell(7, 7).row(1).is_some());
        assert!(c.cell(0, 7).row(1).is_none());
        for (idx, m) in c.iter_cells() {
            assert!(m.row(1).is_some());
            assert!(!c.boundary_linear(idx).is_empty());
        }
    }

    #[test]
    fn complex_object_fills_all_three_rows() {
        let f = frame(0.0, 0.0, 4.0, 4.0, 32, 32);
        let obj = GeometricObject::new(vec![
            Primitive::Point(Point2::new(0.5, 0.5)),
            Primitive::Line(Polyline::new(vec![Point2::new(1.0, 3.0), Point2::new(3.0, 3.0)]).unwrap()),
            Primitive::Region(
                validate_polygon(&[vec![
                    Point2::new(2.0, 0.5),
                    Point2::new(3.5, 0.5),
                    Point2::new(3.5, 2.0),
                    Point2::new(2.0, 2.0),
                ]])
                .unwrap(),
            ),
        ])
        .unwrap();
        let c = rasterize(&obj, &InfoSeed::new(4), &f);
        let dims: Vec<bool> = (0..3)
            .map(|d| c.iter_cells().any(|(_, m)| m.row(d).is_some()))
            .collect();
        assert_eq!(dims, vec![true, true, true]);
    }

    #[test]
    fn wholly_outside_object_yields_empty_canvas() {
        let f = frame(0.0, 0.0, 1.0, 1.0, 8, 8);
        let sq = unit_square().transformed(|p| Point2::new(p.x + 10.0, p.y + 10.0));
        let c = rasterize(&GeometricObject::from_polygon(sq), &InfoSeed::new(1), &f);
        assert!(c.is_empty());
        assert_eq!(c.boundary_pixel_count(), 0);
    }

    #[test]
    fn rect_utility_equals_rasterized_square() {
        let f = frame(0.0, 0.0, 2.0, 2.0, 16, 16);
        let from_shape = utility_canvas(
            &UtilityShape::Rect {
                a: Point2::new(0.0, 0.0),
                b: Point2::new(1.0, 1.0),
            },
            &InfoSeed::new(1),
            &f,
        )
        .unwrap();
        let from_poly = rasterize(&GeometricObject::from_polygon(unit_square()), &InfoSeed::new(1), &f);
        assert_eq!(
            from_shape.iter_cells().collect::<Vec<_>>(),
            from_poly.iter_cells().collect::<Vec<_>>()
        );
    }

    #[test]
    fn circle_membership_probes() {
        let f = frame(-2.0, -2.0, 2.0, 2.0, 40, 40);
        let c = utility_canvas(
            &UtilityShape::Circle {
                center: Point2::new(0.0, 0.0),
                radius: 1.0,
            },
            &InfoSeed::new(1),
            &f,
        )
        .unwrap();
        let (i, j) = f.world_to_pixel(Point2::new(0.9, 0.0)).unwrap();
        assert!(c.cell(i, j).row(2).is_some());
        let (i, j) = f.world_to_pixel(Point2::new(1.1, 0.0)).unwrap();
        assert!(c.cell(i, j).row(2).is_none());
        // Every filled or empty pixel agrees with the closed predicate.
        for jj in 0..40 {
            for ii in 0..40 {
                let p = f.pixel_center(ii, jj);
                assert_eq!(c.cell(ii, jj).row(2).is_some(), p.x * p.x + p.y * p.y <= 1.0);
            }
        }
        assert!(matches!(
            utility_canvas(
                &UtilityShape::Circle {
                    center: Point2::new(0.0, 0.0),
                    radius: 0.0
                },
                &InfoSeed::new(1),
                &f
            ),
            Err(CanvasError::NonPositiveRadius)
        ));
    }

    #[test]
    fn half_space_membership_probes() {
        let f = frame(0.0, 0.0, 1.0, 1.0, 10, 10);
        let c = utility_canvas(
            &UtilityShape::HalfSpace {
                a: 1.0,
                b: 0.0,
                c: -0.5,
            },
            &InfoSeed::new(1),
            &f,
        )
        .unwrap();
        let (i, j) = f.world_to_pixel(Point2::new(0.4, 0.5)).unwrap();
        assert!(c.cell(i, j).row(2).is_some());
        let (i, j) = f.world_to_pixel(Point2::new(0.6, 0.5)).unwrap();
        assert!(c.cell(i, j).row(2).is_none());
        // Boundary pixels hug the line x = 0.5.
        for idx in c.boundary_pixels_sorted() {
            let (i, _) = f.coords(idx);
            assert!(i == 4 || i == 5);
        }
        assert!(matches!(
            utility_canvas(
                &UtilityShape::HalfSpace {
                    a: 0.0,
                    b: 0.0,
                    c: 1.0
                },
                &InfoSeed::new(1),
                &f
            ),
            Err(CanvasError::DegenerateHalfSpace)
        ));
    }

    #[test]
    fn boundary_lookup_cases() {
        let f = frame(0.0, 0.0, 4.0, 4.0, 16, 16);
        let big = validate_polygon(&[vec![
            Point2::new(0.5, 0.5),
            Point2::new(3.5, 0.5),
            Point2::new(3.5, 3.5),
            Point2::new(0.5, 3.5),
        ]])
        .unwrap();
        let c = rasterize(&GeometricObject::from_polygon(big), &InfoSeed::new(1), &f);
        // Deep interior pixel: no boundary entries.
        let (i, j) = f.world_to_pixel(Point2::new(2.0, 2.0)).unwrap();
        assert!(c.boundary_lookup(i, j).unwrap().is_empty());
        // Pixel crossed by the right edge: exactly one entry for (id 1, dim 2).
        let (i, j) = f.world_to_pixel(Point2::new(3.5, 2.0)).unwrap();
        let entries = c.boundary_lookup(i, j).unwrap();
        assert_eq!(entries.len(), 1);
        assert_eq!((entries[0].id, entries[0].dim), (1, 2));
    }

    /// Independent SAT-based segment/box test for the conservativeness oracle.
    fn sat_segment_box(rect: &Rect, a: Point2, b: Point2) -> bool {
        // Axis tests.
        if a.x.max(b.x) < rect.min.x
            || a.x.min(b.x) > rect.max.x
            || a.y.max(b.y) < rect.min.y
            || a.y.min(b.y) > rect.max.y
        {
            return false;
        }
        // Segment-normal test: all four corners on one strict side -> miss.
        let nx = -(b.y - a.y);
        let ny = b.x - a.x;
        let proj = |p: Point2| nx * (p.x - a.x) + ny * (p.y - a.y);
        let vals = rect.corners().map(proj);
        let all_pos = vals.iter().all(|&v| v > 0.0);
        let all_neg = vals.iter().all(|&v| v < 0.0);
        !(all_pos || all_neg)
    }

    #[test]
    fn boundary_index_is_conservative() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let f = frame(-10.0, -10.0, 10.0, 10.0, 24, 24);
            let poly = random_star(&mut rng, 9, Point2::new(0.0, 0.0), 8.0);
            let c = rasterize(&GeometricObject::from_polygon(poly.clone()), &InfoSeed::new(1), &f);
            let flagged: BTreeSet<u32> = c.boundary_pixels_sorted().into_iter().collect();
            for j in 0..24 {
                for i in 0..24 {
                    let pb = f.pixel_box(i, j);
                    let touched = poly.edges().any(|(a, b)| sat_segment_box(&pb, a, b));
                    if touched {
                        assert!(
                            flagged.contains(&f.linear(i, j)),
                            "boundary pixel ({i},{j}) missing"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn non_boundary_pixels_classify_uniformly() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let f = frame(-10.0, -10.0, 10.0, 10.0, 32, 32);
            let poly = random_star(&mut rng, 10, Point2::new(0.0, 0.0), 8.0);
            let c = rasterize(&GeometricObject::from_polygon(poly.clone()), &InfoSeed::new(1), &f);
            for j in 0..32 {
                for i in 0..32 {
                    if !c.boundary_lookup(i, j).unwrap().is_empty() {
                        continue;
                    }
                    let b = f.pixel_box(i, j);
                    let center_in =
                        point_in_polygon(f.pixel_center(i, j), &poly) == Containment::Inside;
                    for _ in 0..8 {
                        let p = Point2::new(
                            b.min.x + rng.gen_range(0.05..0.95) * (b.max.x - b.min.x),
                            b.min.y + rng.gen_range(0.05..0.95) * (b.max.y - b.min.y),
                        );
                        assert_eq!(
                            point_in_polygon(p, &poly) == Containment::Inside,
                            center_in,
                            "pixel ({i},{j}) not uniform"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn resolutions_agree_on_mutually_non_boundary_pixels() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let poly = random_star(&mut rng, 11, Point2::new(0.0, 0.0), 8.0);
        let obj = GeometricObject::from_polygon(poly);
        let f1 = frame(-10.0, -10.0, 10.0, 10.0, 32, 32);
        let f2 = frame(-10.0, -10.0, 10.0, 10.0, 64, 64);
        let c1 = rasterize(&obj, &InfoSeed::new(1), &f1);
        let c2 = rasterize(&obj, &InfoSeed::new(1), &f2);
        for j in 0..64u32 {
            for i in 0..64u32 {
                let (ci, cj) = (i / 2, j / 2);
                let fine_b = !c2.boundary_lookup(i, j).unwrap().is_empty();
                let coarse_b = !c1.boundary_lookup(ci, cj).unwrap().is_empty();
                if !fine_b && !coarse_b {
                    assert_eq!(c2.cell(i, j).row(2).is_some(), c1.cell(ci, cj).row(2).is_some());
                }
            }
        }
    }
}
