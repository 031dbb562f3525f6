//! Brute-force, vector-exact reference implementations of every query
//! class. These never touch canvases: each answer comes from a linear scan
//! with the exact predicates of [`crate::geometry`], so they stand as
//! independent ground truth for the canvas engine. Performance is not a
//! goal here.

use std::collections::BTreeMap;

use crate::geometry::{
    distance, dist_point_segment, point_in_polygon, polygons_intersect, Containment,
    GeometricObject, Point2, Polygon,
};
use crate::queries::{
    AggValue, AggregateSpec, Constraint, Dataset, DatasetKind, IdPairs, IdSet, JoinKind,
    QueryError, RecordGeometry, RecordId, SelectMode,
};

/// Closed containment of a point in a constraint region.
fn point_satisfies(p: Point2, q: &Constraint) -> bool {
    match q {
        Constraint::Polygon(poly) => point_in_polygon(p, poly) != Containment::Outside,
        Constraint::Rect(r) => r.contains(p),
        Constraint::Circle { center, radius } => distance(p, *center) <= *radius,
        Constraint::HalfSpace { a, b, c } => a * p.x + b * p.y + c <= 0.0,
        Constraint::PolygonSet { polygons, mode } => {
            let hit = |poly: &Polygon| point_in_polygon(p, poly) != Containment::Outside;
            match mode {
                SelectMode::Any => polygons.iter().any(hit),
                SelectMode::All => polygons.iter().all(hit),
            }
        }
    }
}

fn object_intersects(obj: &GeometricObject, q: &Constraint) -> bool {
    obj.regions().any(|poly| match q {
        Constraint::Polygon(other) => polygons_intersect(poly, other),
        Constraint::Rect(r) => {
            let ring = r.corners().to_vec();
            let rect_poly =
                crate::geometry::validate_polygon(&[ring]).expect("rectangle ring is simple");
            polygons_intersect(poly, &rect_poly)
        }
        Constraint::Circle { center, radius } => {
            point_in_polygon(*center, poly) != Containment::Outside
                || poly
                    .edges()
                    .any(|(s, e)| dist_point_segment(*center, s, e) <= *radius)
        }
        Constraint::HalfSpace { a, b, c } => poly
            .outer()
            .vertices()
            .iter()
            .any(|v| a * v.x + b * v.y + c <= 0.0),
        Constraint::PolygonSet { polygons, mode } => match mode {
            SelectMode::Any => polygons.iter().any(|other| polygons_intersect(poly, other)),
            SelectMode::All => polygons.iter().all(|other| polygons_intersect(poly, other)),
        },
    })
}

/// Linear-scan selection over any dataset kind.
pub fn oracle_select(d: &Dataset, q: &Constraint) -> Result<IdSet, QueryError> {
    q.validate()?;
    let mut out = IdSet::new();
    for (id, r) in d.iter() {
        let keep = match &r.geometry {
            RecordGeometry::Point(p) => point_satisfies(*p, q),
            RecordGeometry::Object(o) => object_intersects(o, q),
            RecordGeometry::Od { origin, .. } => point_satisfies(*origin, q),
        };
        if keep {
            out.insert(*id);
        }
    }
    Ok(out)
}

/// Origin and destination constraints both satisfied.
pub fn oracle_od_select(
    d: &Dataset,
    q1: &Constraint,
    q2: &Constraint,
) -> Result<IdSet, QueryError> {
    q1.validate()?;
    q2.validate()?;
    let mut out = IdSet::new();
    for (id, r) in d.iter() {
        if let RecordGeometry::Od {
            origin,
            destination,
        } = &r.geometry
        {
            if point_satisfies(*origin, q1) && point_satisfies(*destination, q2) {
                out.insert(*id);
            }
        }
    }
    Ok(out)
}

/// All-pairs spatial join.
pub fn oracle_join(a: &Dataset, b: &Dataset, kind: JoinKind) -> Result<IdPairs, QueryError> {
    let mut out = IdPairs::new();
    for (b_id, b_rec) in b.iter() {
        let RecordGeometry::Object(b_obj) = &b_rec.geometry else {
            continue;
        };
        for (a_id, a_rec) in a.iter() {
            let hit = match (&a_rec.geometry, kind) {
                (RecordGeometry::Point(p), JoinKind::PointsInPolygons) => b_obj
                    .regions()
                    .any(|poly| point_in_polygon(*p, poly) != Containment::Outside),
                (RecordGeometry::Object(a_obj), JoinKind::PolygonsIntersect) => a_obj
                    .regions()
                    .any(|pa| b_obj.regions().any(|pb| polygons_intersect(pa, pb))),
                _ => false,
            };
            if hit {
                out.insert((*a_id, *b_id));
            }
        }
    }
    Ok(out)
}

/// All-pairs distance join with the closed threshold.
pub fn oracle_distance_join(a: &Dataset, b: &Dataset, d: f64) -> Result<IdPairs, QueryError> {
    if d <= 0.0 {
        return Err(QueryError::NonPositiveRadius);
    }
    let mut out = IdPairs::new();
    for (a_id, a_rec) in a.iter() {
        let RecordGeometry::Point(pa) = &a_rec.geometry else {
            continue;
        };
        for (b_id, b_rec) in b.iter() {
            let RecordGeometry::Point(pb) = &b_rec.geometry else {
                continue;
            };
            if distance(*pa, *pb) <= d {
                out.insert((*a_id, *b_id));
            }
        }
    }
    Ok(out)
}

/// Neumaier-compensated sum, so the oracle's real aggregates do not depend
/// on accumulation order at f64 precision.
pub fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Group-by aggregation by exhaustive point-in-polygon testing; groups with
/// no matches are omitted.
pub fn oracle_group_aggregate(
    p: &Dataset,
    y: &Dataset,
    agg: &AggregateSpec,
) -> Result<BTreeMap<RecordId, AggValue>, QueryError> {
    let mut out = BTreeMap::new();
    for (y_id, y_rec) in y.iter() {
        let RecordGeometry::Object(obj) = &y_rec.geometry else {
            continue;
        };
        let mut members: Vec<RecordId> = Vec::new();
        for (p_id, p_rec) in p.iter() {
            let RecordGeometry::Point(pt) = &p_rec.geometry else {
                continue;
            };
            if obj
                .regions()
                .any(|poly| point_in_polygon(*pt, poly) != Containment::Outside)
            {
                members.push(*p_id);
            }
        }
        if members.is_empty() {
            continue;
        }
        let value = match agg {
            AggregateSpec::Count => AggValue::Count(members.len() as i64),
            AggregateSpec::Sum(attr) => {
                for id in &members {
                    if p.scalar(*id, attr).is_none() {
                        return Err(QueryError::MissingAttribute(*id, attr.clone()));
                    }
                }
                AggValue::Sum(compensated_sum(
                    members.iter().map(|id| p.scalar(*id, attr).unwrap()),
                ))
            }
        };
        out.insert(*y_id, value);
    }
    Ok(out)
}

/// Exact k nearest neighbors: full sort by (distance, id), take the first k.
pub fn oracle_knn(d: &Dataset, x: Point2, k: usize) -> Result<IdSet, QueryError> {
    if d.kind() != DatasetKind::Points {
        return Err(QueryError::KindMismatch { expected: "points" });
    }
    let n = d.len();
    if k == 0 || k > n {
        return Err(QueryError::KOutOfRange { k, size: n });
    }
    let mut all: Vec<(f64, RecordId)> = d
        .iter()
        .filter_map(|(id, r)| match &r.geometry {
            RecordGeometry::Point(p) => Some((distance(*p, x), *id)),
            _ => None,
        })
        .collect();
    all.sort_by(|(da, ia), (db, ib)| da.total_cmp(db).then(ia.cmp(ib)));
    Ok(all.into_iter().take(k).map(|(_, id)| id).collect())
}

/// Nearest seed index (1-based) for a point, ties to the lowest index.
pub fn oracle_voronoi_label(seeds: &[Point2], p: Point2) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, s) in seeds.iter().enumerate() {
        let d = distance(p, *s);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::validate_polygon;
    use crate::queries::Record;

    fn unit_square() -> Polygon {
        validate_polygon(&[vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ]])
        .unwrap()
    }

    #[test]
    fn select_cases() {
        let d = Dataset::from_points([(1, Point2::new(0.5, 0.5))]).unwrap();
        let q = Constraint::Polygon(unit_square());
        assert_eq!(
            oracle_select(&d, &q).unwrap(),
            [RecordId(1)].into_iter().collect()
        );
        let empty = Dataset::from_points([]).unwrap();
        assert!(oracle_select(&empty, &q).unwrap().is_empty());

        let d = Dataset::from_points([(1, Point2::new(0.4, 0.2)), (2, Point2::new(0.6, 0.2))])
            .unwrap();
        let hs = Constraint::HalfSpace {
            a: 1.0,
            b: 0.0,
            c: -0.5,
        };
        assert_eq!(
            oracle_select(&d, &hs).unwrap(),
            [RecordId(1)].into_iter().collect()
        );
    }

    #[test]
    fn group_aggregate_cases() {
        // Four points inside one polygon count as 4.
        let pts = Dataset::from_points([
            (1, Point2::new(0.2, 0.2)),
            (2, Point2::new(0.4, 0.4)),
            (3, Point2::new(0.6, 0.6)),
            (4, Point2::new(0.8, 0.8)),
        ])
        .unwrap();
        let polys = Dataset::from_polygons([(1, unit_square())]).unwrap();
        let out = oracle_group_aggregate(&pts, &polys, &AggregateSpec::Count).unwrap();
        assert_eq!(out[&RecordId(1)], AggValue::Count(4));

        // Disjoint sets give the empty map.
        let far = Dataset::from_points([(9, Point2::new(50.0, 50.0))]).unwrap();
        assert!(oracle_group_aggregate(&far, &polys, &AggregateSpec::Count)
            .unwrap()
            .is_empty());

        // Sum of 1.5 and 2.5 in one polygon.
        let mut pts = Dataset::new(DatasetKind::Points);
        for (id, x, v) in [(1u64, 0.25, 1.5f64), (2, 0.75, 2.5)] {
            pts.insert(
                RecordId(id),
                Record {
                    geometry: RecordGeometry::Point(Point2::new(x, 0.5)),
                    scalars: [("a".to_string(), v)].into_iter().collect(),
                },
            )
            .unwrap();
        }
        let out =
            oracle_group_aggregate(&pts, &polys, &AggregateSpec::Sum("a".to_string())).unwrap();
        assert_eq!(out[&RecordId(1)], AggValue::Sum(4.0));
    }

    #[test]
    fn knn_cases() {
        let d = Dataset::from_points((1..=5).map(|i| (i, Point2::new(i as f64, 0.0)))).unwrap();
        let out = oracle_knn(&d, Point2::new(0.0, 0.0), 3).unwrap();
        assert_eq!(out, (1..=3).map(RecordId).collect());
        assert_eq!(oracle_knn(&d, Point2::new(0.0, 0.0), 5).unwrap().len(), 5);
        assert!(oracle_knn(&d, Point2::new(0.0, 0.0), 6).is_err());

        // Tie at equal distance resolves to the lower id.
        let tied = Dataset::from_points([
            (7, Point2::new(1.0, 0.0)),
            (3, Point2::new(-1.0, 0.0)),
            (9, Point2::new(5.0, 0.0)),
        ])
        .unwrap();
        let out = oracle_knn(&tied, Point2::new(0.0, 0.0), 1).unwrap();
        assert_eq!(out, [RecordId(3)].into_iter().collect());
    }

    #[test]
    fn voronoi_label_cases() {
        let seeds = [Point2::new(0.0, 0.0)];
        assert_eq!(oracle_voronoi_label(&seeds, Point2::new(3.0, 4.0)), 1);
        let two = [Point2::new(-1.0, 0.0), Point2::new(1.0, 0.0)];
        // Equidistant point goes to the lower index.
        assert_eq!(oracle_voronoi_label(&two, Point2::new(0.0, 5.0)), 1);
        assert_eq!(oracle_voronoi_label(&two, Point2::new(0.9, 0.0)), 2);
    }
}
