//! Exact 2D vector geometry: points, polylines, polygons with holes, and the
//! predicates every other layer leans on (point-in-polygon, segment and
//! polygon intersection, bounding rectangles).
//!
//! All predicates use closed-set semantics: a point on a boundary counts as
//! contained, and touching shapes count as intersecting. Point-in-polygon
//! uses the even-odd crossing rule with a ray cast toward +x; the half-open
//! vertex rule (`a.y > p.y` vs `b.y > p.y`) plays the role of an
//! infinitesimal vertical shift of the ray, so vertices on the ray are
//! counted exactly once.

use thiserror::Error;

/// Absolute world-unit tolerance for classifying a point as on a polygon
/// boundary. Queries that need a different cutoff can call
/// [`point_in_polygon_with_tolerance`].
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("ring has fewer than 3 distinct vertices or zero area")]
    DegenerateRing,
    #[error("ring is self-intersecting")]
    SelfIntersectingRing,
    #[error("hole is not strictly inside the outer ring (or holes overlap)")]
    HoleOutsideOuter,
    #[error("polyline needs at least 2 vertices with distinct neighbors")]
    DegeneratePolyline,
    #[error("geometric object must contain at least one primitive")]
    EmptyObject,
    #[error("coordinate is not finite")]
    NonFiniteCoordinate,
}

/// A point in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Euclidean distance between two points.
pub fn distance(p: Point2, q: Point2) -> f64 {
    ((p.x - q.x).powi(2) + (p.y - q.y).powi(2)).sqrt()
}

/// Axis-aligned rectangle, `min` component-wise below `max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: Point2,
    pub max: Point2,
}

impl Rect {
    pub fn new(min: Point2, max: Point2) -> Self {
        debug_assert!(min.x <= max.x && min.y <= max.y);
        Rect { min, max }
    }

    /// Build from two diagonal end points in any order.
    pub fn from_corners(a: Point2, b: Point2) -> Self {
        Rect {
            min: Point2::new(a.x.min(b.x), a.y.min(b.y)),
            max: Point2::new(a.x.max(b.x), a.y.max(b.y)),
        }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn is_degenerate(&self) -> bool {
        self.width() <= 0.0 || self.height() <= 0.0
    }

    /// Closed containment test.
    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// Strict interior test (boundary excluded).
    pub fn contains_strict(&self, p: Point2) -> bool {
        p.x > self.min.x && p.x < self.max.x && p.y > self.min.y && p.y < self.max.y
    }

    /// Closed overlap test.
    pub fn intersects(&self, other: &Rect) -> bool {
        self.min.x <= other.max.x
            && other.min.x <= self.max.x
            && self.min.y <= other.max.y
            && other.min.y <= self.max.y
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect {
            min: Point2::new(self.min.x.min(other.min.x), self.min.y.min(other.min.y)),
            max: Point2::new(self.max.x.max(other.max.x), self.max.y.max(other.max.y)),
        }
    }

    pub fn corners(&self) -> [Point2; 4] {
        [
            self.min,
            Point2::new(self.max.x, self.min.y),
            self.max,
            Point2::new(self.min.x, self.max.y),
        ]
    }

    pub fn center(&self) -> Point2 {
        Point2::new(
            0.5 * (self.min.x + self.max.x),
            0.5 * (self.min.y + self.max.y),
        )
    }
}

fn rect_of_points(pts: &[Point2]) -> Rect {
    let mut min = pts[0];
    let mut max = pts[0];
    for p in &pts[1..] {
        min.x = min.x.min(p.x);
        min.y = min.y.min(p.y);
        max.x = max.x.max(p.x);
        max.y = max.y.max(p.y);
    }
    Rect { min, max }
}

/// An open chain of straight segments (a 1-primitive).
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    vertices: Vec<Point2>,
}

impl Polyline {
    pub fn new(vertices: Vec<Point2>) -> Result<Self, GeometryError> {
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFiniteCoordinate);
        }
        if vertices.len() < 2 || vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(GeometryError::DegeneratePolyline);
        }
        Ok(Polyline { vertices })
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn mbr(&self) -> Rect {
        rect_of_points(&self.vertices)
    }
}

/// A simple ring stored without the repeated closing vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Ring(Vec<Point2>);

impl Ring {
    pub fn vertices(&self) -> &[Point2] {
        &self.0
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.0.len();
        (0..n).map(move |i| (self.0[i], self.0[(i + 1) % n]))
    }

    fn signed_area(&self) -> f64 {
        let n = self.0.len();
        let mut acc = 0.0;
        for i in 0..n {
            let a = self.0[i];
            let b = self.0[(i + 1) % n];
            acc += a.x * b.y - b.x * a.y;
        }
        0.5 * acc
    }

    fn reverse(&mut self) {
        self.0.reverse();
    }
}

/// A polygon with holes (a 2-primitive). Construct with [`validate_polygon`],
/// which normalizes orientation to counter-clockwise outer / clockwise holes.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    outer: Ring,
    holes: Vec<Ring>,
}

impl Polygon {
    pub fn outer(&self) -> &Ring {
        &self.outer
    }

    pub fn holes(&self) -> &[Ring] {
        &self.holes
    }

    pub fn rings(&self) -> impl Iterator<Item = &Ring> {
        std::iter::once(&self.outer).chain(self.holes.iter())
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        self.rings().flat_map(|r| r.edges())
    }

    pub fn mbr(&self) -> Rect {
        rect_of_points(self.outer.vertices())
    }

    /// Apply a point map to every vertex, keeping ring structure. Intended
    /// for affine maps, which preserve simplicity and nesting.
    pub fn transformed(&self, f: impl Fn(Point2) -> Point2) -> Polygon {
        let map_ring = |r: &Ring| Ring(r.0.iter().map(|&p| f(p)).collect());
        Polygon {
            outer: map_ring(&self.outer),
            holes: self.holes.iter().map(map_ring).collect(),
        }
    }
}

fn clean_ring(raw: &[Point2]) -> Result<Ring, GeometryError> {
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(GeometryError::NonFiniteCoordinate);
    }
    let mut v: Vec<Point2> = Vec::with_capacity(raw.len());
    for &p in raw {
        if v.last() != Some(&p) {
            v.push(p);
        }
    }
    // Strip a repeated closing vertex.
    if v.len() > 1 && v.first() == v.last() {
        v.pop();
    }
    if v.len() < 3 {
        return Err(GeometryError::DegenerateRing);
    }
    Ok(Ring(v))
}

fn cross(o: Point2, a: Point2, b: Point2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn ring_is_simple(ring: &Ring) -> bool {
    let v = ring.vertices();
    let n = v.len();
    for i in 0..n {
        let e1 = (v[i], v[(i + 1) % n]);
        for j in (i + 1)..n {
            let e2 = (v[j], v[(j + 1) % n]);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // Edges sharing a vertex may only touch at that vertex; a
                // collinear backtrack folds the ring onto itself.
                let (shared, p, q) = if j == i + 1 {
                    (v[j], v[i], v[(j + 1) % n])
                } else {
                    (v[0], v[n - 1], v[1])
                };
                if cross(shared, p, q) == 0.0 {
                    let d = (p.x - shared.x) * (q.x - shared.x)
                        + (p.y - shared.y) * (q.y - shared.y);
                    if d > 0.0 {
                        return false;
                    }
                }
            } else if segments_intersect(e1, e2) {
                return false;
            }
        }
    }
    true
}

fn ring_crossings(p: Point2, ring: &Ring) -> usize {
    let mut count = 0;
    for (a, b) in ring.edges() {
        if (a.y > p.y) != (b.y > p.y) {
            let x_int = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x_int {
                count += 1;
            }
        }
    }
    count
}

fn ring_boundary_distance(p: Point2, ring: &Ring) -> f64 {
    ring.edges()
        .map(|(a, b)| dist_point_segment(p, a, b))
        .fold(f64::INFINITY, f64::min)
}

fn point_in_ring(p: Point2, ring: &Ring, tol: f64) -> Containment {
    if ring_boundary_distance(p, ring) <= tol {
        return Containment::OnBoundary;
    }
    if ring_crossings(p, ring) % 2 == 1 {
        Containment::Inside
    } else {
        Containment::Outside
    }
}

/// Validate raw rings (outer first, then holes) into a normalized polygon.
///
/// Checks simplicity of every ring, that every hole is strictly inside the
/// outer ring and that holes are pairwise disjoint; duplicated closing
/// vertices are stripped and orientation is normalized (outer CCW, holes CW).
pub fn validate_polygon(rings: &[Vec<Point2>]) -> Result<Polygon, GeometryError> {
    let (first, rest) = rings.split_first().ok_or(GeometryError::DegenerateRing)?;
    let mut outer = clean_ring(first)?;
    if !ring_is_simple(&outer) {
        return Err(GeometryError::SelfIntersectingRing);
    }
    if outer.signed_area() == 0.0 {
        return Err(GeometryError::DegenerateRing);
    }
    if outer.signed_area() < 0.0 {
        outer.reverse();
    }

    let mut holes = Vec::with_capacity(rest.len());
    for raw in rest {
        let mut hole = clean_ring(raw)?;
        if !ring_is_simple(&hole) {
            return Err(GeometryError::SelfIntersectingRing);
        }
        if hole.signed_area() == 0.0 {
            return Err(GeometryError::DegenerateRing);
        }
        if hole.signed_area() > 0.0 {
            hole.reverse();
        }
        for v in hole.vertices() {
            if point_in_ring(*v, &outer, BOUNDARY_TOLERANCE) != Containment::Inside {
                return Err(GeometryError::HoleOutsideOuter);
            }
        }
        for eh in hole.edges() {
            for eo in outer.edges() {
                if segments_intersect(eh, eo) {
                    return Err(GeometryError::HoleOutsideOuter);
                }
            }
        }
        for prev in &holes {
            let prev: &Ring = prev;
            for e1 in hole.edges() {
                for e2 in prev.edges() {
                    if segments_intersect(e1, e2) {
                        return Err(GeometryError::HoleOutsideOuter);
                    }
                }
            }
            if point_in_ring(hole.vertices()[0], prev, BOUNDARY_TOLERANCE) != Containment::Outside
                || point_in_ring(prev.vertices()[0], &hole, BOUNDARY_TOLERANCE)
                    != Containment::Outside
            {
                return Err(GeometryError::HoleOutsideOuter);
            }
        }
        holes.push(hole);
    }
    Ok(Polygon { outer, holes })
}

/// Classification of a point against a polygon region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Containment {
    Inside,
    OnBoundary,
    Outside,
}

/// Even-odd point-in-polygon test over all rings; a point inside a hole is
/// `Outside`, a point within [`BOUNDARY_TOLERANCE`] of any ring edge is
/// `OnBoundary`.
pub fn point_in_polygon(p: Point2, poly: &Polygon) -> Containment {
    point_in_polygon_with_tolerance(p, poly, BOUNDARY_TOLERANCE)
}

pub fn point_in_polygon_with_tolerance(p: Point2, poly: &Polygon, tol: f64) -> Containment {
    for ring in poly.rings() {
        if ring_boundary_distance(p, ring) <= tol {
            return Containment::OnBoundary;
        }
    }
    let crossings: usize = poly.rings().map(|r| ring_crossings(p, r)).sum();
    if crossings % 2 == 1 {
        Containment::Inside
    } else {
        Containment::Outside
    }
}

pub(crate) fn dist_point_segment(p: Point2, a: Point2, b: Point2) -> f64 {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return distance(p, a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    distance(p, Point2::new(a.x + t * dx, a.y + t * dy))
}

fn on_segment(a: Point2, b: Point2, p: Point2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed segment intersection: shared endpoints, touching and collinear
/// overlap all count.
pub fn segments_intersect(s1: (Point2, Point2), s2: (Point2, Point2)) -> bool {
    let (a, b) = s1;
    let (c, d) = s2;
    let o1 = cross(a, b, c);
    let o2 = cross(a, b, d);
    let o3 = cross(c, d, a);
    let o4 = cross(c, d, b);

    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0))
        && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
    {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

/// Closed-region intersection of two polygons with holes: true when any edge
/// pair meets, or when one region contains the other. Because each region is
/// connected, a single representative vertex decides the containment case
/// (a polygon nested inside the other's hole stays disjoint).
pub fn polygons_intersect(a: &Polygon, b: &Polygon) -> bool {
    if !a.mbr().intersects(&b.mbr()) {
        return false;
    }
    for e1 in a.edges() {
        for e2 in b.edges() {
            if segments_intersect(e1, e2) {
                return true;
            }
        }
    }
    if point_in_polygon(a.outer.vertices()[0], b) != Containment::Outside {
        return true;
    }
    if point_in_polygon(b.outer.vertices()[0], a) != Containment::Outside {
        return true;
    }
    false
}

/// One geometric primitive tagged by dimension.
#[derive(Debug, Clone, PartialEq)]
pub enum Primitive {
    /// 0-primitive.
    Point(Point2),
    /// 1-primitive.
    Line(Polyline),
    /// 2-primitive.
    Region(Polygon),
}

impl Primitive {
    pub fn dim(&self) -> usize {
        match self {
            Primitive::Point(_) => 0,
            Primitive::Line(_) => 1,
            Primitive::Region(_) => 2,
        }
    }

    pub fn mbr(&self) -> Rect {
        match self {
            Primitive::Point(p) => Rect { min: *p, max: *p },
            Primitive::Line(l) => l.mbr(),
            Primitive::Region(r) => r.mbr(),
        }
    }
}

/// A heterogeneous, non-empty collection of primitives belonging to one
/// record attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricObject {
    primitives: Vec<Primitive>,
}

impl GeometricObject {
    pub fn new(primitives: Vec<Primitive>) -> Result<Self, GeometryError> {
        if primitives.is_empty() {
            return Err(GeometryError::EmptyObject);
        }
        Ok(GeometricObject { primitives })
    }

    pub fn from_point(p: Point2) -> Self {
        GeometricObject {
            primitives: vec![Primitive::Point(p)],
        }
    }

    pub fn from_polygon(poly: Polygon) -> Self {
        GeometricObject {
            primitives: vec![Primitive::Region(poly)],
        }
    }

    pub fn from_polygons(polys: Vec<Polygon>) -> Result<Self, GeometryError> {
        GeometricObject::new(polys.into_iter().map(Primitive::Region).collect())
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    pub fn regions(&self) -> impl Iterator<Item = &Polygon> {
        self.primitives.iter().filter_map(|p| match p {
            Primitive::Region(r) => Some(r),
            _ => None,
        })
    }

    /// Smallest axis-aligned rectangle containing every primitive.
    pub fn mbr(&self) -> Rect {
        let mut it = self.primitives.iter().map(|p| p.mbr());
        let first = it.next().expect("object is non-empty");
        it.fold(first, |acc, r| acc.union(&r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::{prop_assert, prop_assert_eq, proptest};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn unit_square() -> Polygon {
        validate_polygon(&[vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ]])
        .unwrap()
    }

    fn square_with_hole() -> Polygon {
        validate_polygon(&[
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(1.0, 1.0),
                Point2::new(0.0, 1.0),
            ],
            vec![
                Point2::new(0.25, 0.25),
                Point2::new(0.75, 0.25),
                Point2::new(0.75, 0.75),
                Point2::new(0.25, 0.75),
            ],
        ])
        .unwrap()
    }

    fn random_star(rng: &mut impl Rng, n: usize, center: Point2, rmax: f64) -> Polygon {
        // Jittered angular partition keeps gaps below pi, so the ring stays
        // star-shaped around `center` and therefore simple.
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
    fn clockwise_square_reoriented() {
        let p = validate_polygon(&[vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
        ]])
        .unwrap();
        assert!(p.outer().signed_area() > 0.0);
        assert_eq!(p.outer().vertices().len(), 4);
        assert_eq!(p.mbr(), Rect::from_corners(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0)));
    }

    #[test]
    fn two_vertex_ring_is_degenerate() {
        let err = validate_polygon(&[vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]]);
        assert_eq!(err.unwrap_err(), GeometryError::DegenerateRing);
    }

    #[test]
    fn bowtie_is_self_intersecting() {
        // Independently confirm the bowtie has crossing non-adjacent edges.
        let v = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ];
        let mut crossing_pairs = 0;
        for i in 0..4 {
            for j in (i + 1)..4 {
                if j == i + 1 || (i == 0 && j == 3) {
                    continue;
                }
                if segments_intersect((v[i], v[(i + 1) % 4]), (v[j], v[(j + 1) % 4])) {
                    crossing_pairs += 1;
                }
            }
        }
        assert!(crossing_pairs > 0);
        let err = validate_polygon(&[v.to_vec()]);
        assert_eq!(err.unwrap_err(), GeometryError::SelfIntersectingRing);
    }

    #[test]
    fn pip_basic_cases() {
        let sq = unit_square();
        assert_eq!(point_in_polygon(Point2::new(0.5, 0.5), &sq), Containment::Inside);
        assert_eq!(point_in_polygon(Point2::new(1.0, 0.5), &sq), Containment::OnBoundary);
        assert_eq!(point_in_polygon(Point2::new(1.5, 0.5), &sq), Containment::Outside);
        let holed = square_with_hole();
        assert_eq!(point_in_polygon(Point2::new(0.5, 0.5), &holed), Containment::Outside);
        assert_eq!(point_in_polygon(Point2::new(0.1, 0.1), &holed), Containment::Inside);
    }

    /// Second, independent ray direction (+y) as an oracle for the crossing
    /// count used by `point_in_polygon`.
    fn pip_vertical_ray(p: Point2, poly: &Polygon) -> bool {
        let mut count = 0;
        for ring in poly.rings() {
            for (a, b) in ring.edges() {
                if (a.x > p.x) != (b.x > p.x) {
                    let y_int = a.y + (p.x - a.x) * (b.y - a.y) / (b.x - a.x);
                    if p.y < y_int {
                        count += 1;
                    }
                }
            }
        }
        count % 2 == 1
    }

    #[test]
    fn pip_matches_rotated_ray_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let poly = random_star(&mut rng, 12, Point2::new(0.0, 0.0), 10.0);
        for _ in 0..1000 {
            let p = Point2::new(rng.gen_range(-12.0..12.0), rng.gen_range(-12.0..12.0));
            match point_in_polygon(p, &poly) {
                Containment::Inside => assert!(pip_vertical_ray(p, &poly)),
                Containment::Outside => assert!(!pip_vertical_ray(p, &poly)),
                Containment::OnBoundary => {}
            }
        }
    }

    #[test]
    fn segment_cases() {
        let o = Point2::new(0.0, 0.0);
        assert!(segments_intersect(
            (o, Point2::new(1.0, 1.0)),
            (Point2::new(0.0, 1.0), Point2::new(1.0, 0.0))
        ));
        assert!(!segments_intersect(
            (o, Point2::new(1.0, 0.0)),
            (Point2::new(0.0, 1.0), Point2::new(1.0, 1.0))
        ));
        assert!(segments_intersect(
            (o, Point2::new(1.0, 0.0)),
            (Point2::new(1.0, 0.0), Point2::new(2.0, 0.0))
        ));
        // Collinear overlap.
        assert!(segments_intersect(
            (o, Point2::new(2.0, 0.0)),
            (Point2::new(1.0, 0.0), Point2::new(3.0, 0.0))
        ));
    }

    #[test]
    fn polygon_intersection_cases() {
        let sq = unit_square();
        assert!(polygons_intersect(&sq, &sq));
        let far = sq.transformed(|p| Point2::new(p.x + 5.0, p.y + 5.0));
        assert!(!polygons_intersect(&sq, &far));
        let shifted = sq.transformed(|p| Point2::new(p.x + 0.5, p.y + 0.5));
        // Edge-pair oracle for the overlapping case.
        let mut edge_hit = false;
        for e1 in sq.edges() {
            for e2 in shifted.edges() {
                edge_hit |= segments_intersect(e1, e2);
            }
        }
        assert!(edge_hit);
        assert!(polygons_intersect(&sq, &shifted));
        // Nested inside a hole: no intersection.
        let holed = square_with_hole();
        let inner = validate_polygon(&[vec![
            Point2::new(0.4, 0.4),
            Point2::new(0.6, 0.4),
            Point2::new(0.6, 0.6),
            Point2::new(0.4, 0.6),
        ]])
        .unwrap();
        assert!(!polygons_intersect(&holed, &inner));
        assert!(!polygons_intersect(&inner, &holed));
    }

    #[test]
    fn mbr_cases() {
        let obj = GeometricObject::new(vec![
            Primitive::Point(Point2::new(0.0, 0.0)),
            Primitive::Point(Point2::new(2.0, 3.0)),
        ])
        .unwrap();
        assert_eq!(obj.mbr(), Rect::from_corners(Point2::new(0.0, 0.0), Point2::new(2.0, 3.0)));
        assert_eq!(
            GeometricObject::from_polygon(unit_square()).mbr(),
            Rect::from_corners(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0))
        );
    }

    #[test]
    fn distance_cases() {
        assert_eq!(distance(Point2::new(0.0, 0.0), Point2::new(3.0, 4.0)), 5.0);
        assert_eq!(distance(Point2::new(1.0, 1.0), Point2::new(1.0, 1.0)), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = Point2::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let q = Point2::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let expect = ((p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y)).sqrt();
            assert_eq!(distance(p, q), expect);
            assert_eq!(distance(q, p), expect);
        }
    }

    #[test]
    fn hole_points_outside_edge_points_on_boundary() {
        let holed = square_with_hole();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let p = Point2::new(rng.gen_range(0.26..0.74), rng.gen_range(0.26..0.74));
            assert_eq!(point_in_polygon(p, &holed), Containment::Outside);
            let t: f64 = rng.gen_range(0.0..1.0);
            let on_edge = Point2::new(t, 0.0);
            assert_eq!(point_in_polygon(on_edge, &holed), Containment::OnBoundary);
        }
    }

    proptest! {
        #[test]
        fn pip_invariant_under_ring_rotation(shift in 0usize..12, seed in 0u64..50) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let poly = random_star(&mut rng, 12, Point2::new(0.0, 0.0), 8.0);
            let n = poly.outer().vertices().len();
            let mut rotated: Vec<Point2> = poly.outer().vertices().to_vec();
            rotated.rotate_left(shift % n);
            let rotated = validate_polygon(&[rotated]).unwrap();
            for _ in 0..50 {
                let p = Point2::new(rng.gen_range(-9.0..9.0), rng.gen_range(-9.0..9.0));
                prop_assert_eq!(point_in_polygon(p, &poly), point_in_polygon(p, &rotated));
            }
        }

        #[test]
        fn polygons_intersect_is_symmetric(seed in 0u64..100) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ca = Point2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let cb = Point2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let a = random_star(&mut rng, 8, ca, 4.0);
            let b = random_star(&mut rng, 8, cb, 4.0);
            prop_assert_eq!(polygons_intersect(&a, &b), polygons_intersect(&b, &a));
        }

        #[test]
        fn mbr_contains_every_vertex(seed in 0u64..100) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let poly = random_star(&mut rng, 10, Point2::new(1.0, -2.0), 6.0);
            let obj = GeometricObject::from_polygon(poly.clone());
            let r = obj.mbr();
            for ring in poly.rings() {
                for v in ring.vertices() {
                    prop_assert!(r.contains(*v));
                }
            }
        }
    }
}
