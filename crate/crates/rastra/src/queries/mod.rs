//! Query plans over canvases: selections, joins, aggregation, nearest
//! neighbors, Voronoi labeling and origin-destination selection, each
//! compiled into the operator algebra and refined against exact geometry so
//! answers match vector semantics at any raster resolution.

mod exec;

pub(crate) use exec::RegionGeometry;
pub(crate) use exec::{build_constraint_canvas, naive_point_select, shared_frame};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{
    geometric_transform_into, multiway_blend, value_transform, AlgebraError, BlendFn,
    TransformFn, ValueFn,
};
use crate::canvas::{
    rasterize, Canvas, CanvasBuilder, CanvasError, InfoMatrix, InfoSeed, ObjectInfo, RasterFrame,
    UtilityShape,
};
use crate::geometry::{GeometricObject, GeometryError, Point2, Polygon, Rect};

use exec::{distance_selection, exact_distance_order, id_strip_frame, ConstraintCanvas};

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("constraint is invalid: {0}")]
    InvalidConstraint(String),
    #[error("radius/distance must be positive")]
    NonPositiveRadius,
    #[error("k = {k} is out of range for a dataset of {size} records")]
    KOutOfRange { k: usize, size: usize },
    #[error("duplicate seed point at index {0}")]
    DuplicateSeed(usize),
    #[error("voronoi needs at least one seed")]
    EmptySeeds,
    #[error("polygon set constraint is empty")]
    EmptyPolygonSet,
    #[error("record {0} is missing attribute `{1}`")]
    MissingAttribute(RecordId, String),
    #[error("dataset records carry no destination attribute")]
    MissingDestination,
    #[error("duplicate record id {0}")]
    DuplicateId(RecordId),
    #[error("dataset kind mismatch: expected {expected}")]
    KindMismatch { expected: &'static str },
    #[error(transparent)]
    Canvas(#[from] CanvasError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Identifier linking canvases back to their record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RecordId(pub u64);

impl fmt::Display for RecordId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    Points,
    Polygons,
    OdPoints,
}

/// The geometry attribute of one record.
#[derive(Debug, Clone)]
pub enum RecordGeometry {
    Point(Point2),
    Object(Arc<GeometricObject>),
    Od { origin: Point2, destination: Point2 },
}

#[derive(Debug, Clone)]
pub struct Record {
    pub geometry: RecordGeometry,
    pub scalars: BTreeMap<String, f64>,
}

/// Record table: id to geometry attributes plus scalar attributes.
#[derive(Debug, Clone)]
pub struct Dataset {
    kind: DatasetKind,
    records: BTreeMap<RecordId, Record>,
}

impl Dataset {
    pub fn new(kind: DatasetKind) -> Self {
        Dataset {
            kind,
            records: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, id: RecordId, record: Record) -> Result<(), QueryError> {
        let matches = matches!(
            (&self.kind, &record.geometry),
            (DatasetKind::Points, RecordGeometry::Point(_))
                | (DatasetKind::Polygons, RecordGeometry::Object(_))
                | (DatasetKind::OdPoints, RecordGeometry::Od { .. })
        );
        if !matches {
            return Err(QueryError::KindMismatch {
                expected: match self.kind {
                    DatasetKind::Points => "points",
                    DatasetKind::Polygons => "polygons",
                    DatasetKind::OdPoints => "od-points",
                },
            });
        }
        if self.records.contains_key(&id) {
            return Err(QueryError::DuplicateId(id));
        }
        self.records.insert(id, record);
        Ok(())
    }

    /// Convenience constructor for plain point data.
    pub fn from_points(points: impl IntoIterator<Item = (u64, Point2)>) -> Result<Self, QueryError> {
        let mut d = Dataset::new(DatasetKind::Points);
        for (id, p) in points {
            d.insert(
                RecordId(id),
                Record {
                    geometry: RecordGeometry::Point(p),
                    scalars: BTreeMap::new(),
                },
            )?;
        }
        Ok(d)
    }

    pub fn from_polygons(
        polygons: impl IntoIterator<Item = (u64, Polygon)>,
    ) -> Result<Self, QueryError> {
        let mut d = Dataset::new(DatasetKind::Polygons);
        for (id, poly) in polygons {
            d.insert(
                RecordId(id),
                Record {
                    geometry: RecordGeometry::Object(Arc::new(GeometricObject::from_polygon(poly))),
                    scalars: BTreeMap::new(),
                },
            )?;
        }
        Ok(d)
    }

    pub fn kind(&self) -> DatasetKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&RecordId, &Record)> {
        self.records.iter()
    }

    pub fn get(&self, id: RecordId) -> Option<&Record> {
        self.records.get(&id)
    }

    pub fn ids(&self) -> impl Iterator<Item = RecordId> + '_ {
        self.records.keys().copied()
    }

    pub fn scalar(&self, id: RecordId, name: &str) -> Option<f64> {
        self.records.get(&id)?.scalars.get(name).copied()
    }

    fn record_mbr(r: &Record) -> Rect {
        match &r.geometry {
            RecordGeometry::Point(p) => Rect { min: *p, max: *p },
            RecordGeometry::Object(o) => o.mbr(),
            RecordGeometry::Od {
                origin,
                destination,
            } => Rect::from_corners(*origin, *origin).union(&Rect::from_corners(
                *destination,
                *destination,
            )),
        }
    }

    /// Union bounding rectangle over all records (origins and destinations
    /// both, for od data); `None` for the empty dataset.
    pub fn mbr(&self) -> Option<Rect> {
        self.records
            .values()
            .map(Self::record_mbr)
            .reduce(|a, b| a.union(&b))
    }

    fn point_vec(&self) -> Vec<(u64, Point2)> {
        self.records
            .iter()
            .filter_map(|(id, r)| match &r.geometry {
                RecordGeometry::Point(p) => Some((id.0, *p)),
                _ => None,
            })
            .collect()
    }
}

/// Disjunction or conjunction over the polygons of a polygon-set constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectMode {
    Any,
    All,
}

/// A spatial query constraint.
#[derive(Debug, Clone)]
pub enum Constraint {
    Polygon(Polygon),
    Rect(Rect),
    Circle { center: Point2, radius: f64 },
    HalfSpace { a: f64, b: f64, c: f64 },
    PolygonSet { polygons: Vec<Polygon>, mode: SelectMode },
}

impl Constraint {
    pub fn validate(&self) -> Result<(), QueryError> {
        match self {
            Constraint::Circle { radius, .. } if *radius <= 0.0 => {
                Err(QueryError::NonPositiveRadius)
            }
            Constraint::HalfSpace { a, b, .. } if *a == 0.0 && *b == 0.0 => Err(
                QueryError::InvalidConstraint("half space needs a non-zero normal".into()),
            ),
            Constraint::Rect(r) if r.is_degenerate() => Err(QueryError::InvalidConstraint(
                "rectangle constraint is degenerate".into(),
            )),
            Constraint::PolygonSet { polygons, .. } if polygons.is_empty() => {
                Err(QueryError::EmptyPolygonSet)
            }
            _ => Ok(()),
        }
    }

    pub fn mbr(&self) -> Option<Rect> {
        match self {
            Constraint::Polygon(p) => Some(p.mbr()),
            Constraint::Rect(r) => Some(*r),
            Constraint::Circle { center, radius } => Some(Rect::new(
                Point2::new(center.x - radius, center.y - radius),
                Point2::new(center.x + radius, center.y + radius),
            )),
            Constraint::HalfSpace { .. } => None,
            Constraint::PolygonSet { polygons, .. } => polygons
                .iter()
                .map(Polygon::mbr)
                .reduce(|a, b| a.union(&b)),
        }
    }

    pub(crate) fn regions(&self) -> (Vec<(u64, RegionGeometry)>, SelectMode) {
        match self {
            Constraint::Polygon(p) => (
                vec![(
                    1,
                    RegionGeometry::Object(Arc::new(GeometricObject::from_polygon(p.clone()))),
                )],
                SelectMode::Any,
            ),
            Constraint::Rect(r) => (
                vec![(
                    1,
                    RegionGeometry::Shape(UtilityShape::Rect {
                        a: r.min,
                        b: r.max,
                    }),
                )],
                SelectMode::Any,
            ),
            Constraint::Circle { center, radius } => (
                vec![(
                    1,
                    RegionGeometry::Shape(UtilityShape::Circle {
                        center: *center,
                        radius: *radius,
                    }),
                )],
                SelectMode::Any,
            ),
            Constraint::HalfSpace { a, b, c } => (
                vec![(
                    1,
                    RegionGeometry::Shape(UtilityShape::HalfSpace {
                        a: *a,
                        b: *b,
                        c: *c,
                    }),
                )],
                SelectMode::Any,
            ),
            Constraint::PolygonSet { polygons, mode } => (
                polygons
                    .iter()
                    .enumerate()
                    .map(|(k, p)| {
                        (
                            k as u64 + 1,
                            RegionGeometry::Object(Arc::new(GeometricObject::from_polygon(
                                p.clone(),
                            ))),
                        )
                    })
                    .collect(),
                *mode,
            ),
        }
    }
}

/// Per-query execution knobs.
#[derive(Debug, Clone)]
pub struct ExecOptions {
    /// Pixels per frame axis.
    pub resolution: u32,
    /// Explicit frame extent; default is the padded union of participants.
    pub extent: Option<Rect>,
    /// Boundary refinement on (vector-exact results) or off (raster only).
    pub exact: bool,
    /// Evaluate independent per-record sub-plans on the rayon pool.
    pub parallel: bool,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions {
            resolution: 2048,
            extent: None,
            exact: true,
            parallel: false,
        }
    }
}

impl ExecOptions {
    pub fn at_resolution(resolution: u32) -> Self {
        ExecOptions {
            resolution,
            ..Default::default()
        }
    }
}

pub type IdSet = BTreeSet<RecordId>;
pub type IdPairs = BTreeSet<(RecordId, RecordId)>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Aggregate {
    Count,
    Sum(&'static str),
}

/// Owned variant for CLI use.
#[derive(Debug, Clone, PartialEq)]
pub enum AggregateSpec {
    Count,
    Sum(String),
}

impl AggregateSpec {
    fn attr(&self) -> Option<&str> {
        match self {
            AggregateSpec::Count => None,
            AggregateSpec::Sum(a) => Some(a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AggValue {
    Count(i64),
    Sum(f64),
}

impl AggValue {
    pub fn as_f64(&self) -> f64 {
        match self {
            AggValue::Count(c) => *c as f64,
            AggValue::Sum(s) => *s,
        }
    }
}

impl fmt::Display for AggValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AggValue::Count(c) => c.fmt(f),
            AggValue::Sum(s) => s.fmt(f),
        }
    }
}

/// Which plan realizes a group-by aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupPlan {
    /// Per-record join, then the accumulation transform and count fold.
    Canonical,
    /// Pre-merge all points into one partial-aggregate canvas, join that
    /// single canvas with each polygon, then fold.
    RasterJoin,
}

/// Group-by result plus, for the raster-join plan, the per-group count of
/// points lying in that group's boundary pixels (the error bound when
/// refinement is off).
#[derive(Debug, Clone, PartialEq)]
pub struct GroupAggregate {
    pub values: BTreeMap<RecordId, AggValue>,
    pub boundary_bound: BTreeMap<RecordId, f64>,
}

fn expect_kind(d: &Dataset, kind: DatasetKind, expected: &'static str) -> Result<(), QueryError> {
    if d.kind() == kind {
        Ok(())
    } else {
        Err(QueryError::KindMismatch { expected })
    }
}

fn collect_selected(
    points: &[(u64, Point2)],
    cc: &ConstraintCanvas,
    opts: &ExecOptions,
) -> IdSet {
    if opts.parallel {
        points
            .par_iter()
            .filter(|(_, p)| cc.point_selected(*p, opts.exact))
            .map(|(id, _)| RecordId(*id))
            .collect::<Vec<_>>()
            .into_iter()
            .collect()
    } else {
        points
            .iter()
            .filter(|(_, p)| cc.point_selected(*p, opts.exact))
            .map(|(id, _)| RecordId(*id))
            .collect()
    }
}

/// Select point records satisfying the constraint: blend each point canvas
/// with the constraint canvas over a shared frame, mask, and refine
/// boundary-pixel candidates against the exact constraint geometry.
pub fn select_points(d: &Dataset, q: &Constraint, opts: &ExecOptions) -> Result<IdSet, QueryError> {
    expect_kind(d, DatasetKind::Points, "points")?;
    q.validate()?;
    if d.is_empty() {
        return Ok(IdSet::new());
    }
    let frame = shared_frame(&[d.mbr(), q.mbr()], opts)?;
    let (regions, mode) = q.regions();
    let cc = build_constraint_canvas(regions, mode, &frame)?;
    Ok(collect_selected(&d.point_vec(), &cc, opts))
}

/// Disjunctive or conjunctive selection against a set of polygons, realized
/// by folding all constraint polygons into a single canvas first.
pub fn multi_polygon_select(
    d: &Dataset,
    polygons: &[Polygon],
    mode: SelectMode,
    opts: &ExecOptions,
) -> Result<IdSet, QueryError> {
    select_points(
        d,
        &Constraint::PolygonSet {
            polygons: polygons.to_vec(),
            mode,
        },
        opts,
    )
}

/// Select polygon records whose geometry intersects the constraint region
/// (closed-set semantics: touching counts).
pub fn select_polygons(
    d: &Dataset,
    q: &Constraint,
    opts: &ExecOptions,
) -> Result<IdSet, QueryError> {
    expect_kind(d, DatasetKind::Polygons, "polygons")?;
    q.validate()?;
    if matches!(q, Constraint::PolygonSet { .. }) {
        return Err(QueryError::InvalidConstraint(
            "polygon selection takes a single constraint region".into(),
        ));
    }
    if d.is_empty() {
        return Ok(IdSet::new());
    }
    let frame = shared_frame(&[d.mbr(), q.mbr()], opts)?;
    let (regions, mode) = q.regions();
    let cc = build_constraint_canvas(regions, mode, &frame)?;
    let q_mbr = q.mbr();

    let records: Vec<(RecordId, &Arc<GeometricObject>)> = d
        .iter()
        .filter_map(|(id, r)| match &r.geometry {
            RecordGeometry::Object(o) => Some((*id, o)),
            _ => None,
        })
        .collect();
    let test = |(id, obj): &(RecordId, &Arc<GeometricObject>)| -> Option<RecordId> {
        if let Some(qm) = q_mbr {
            if !obj.mbr().intersects(&qm) {
                return None;
            }
        }
        let rec_canvas = rasterize(obj, &InfoSeed::new(id.0), &frame);
        cc.region_intersects(&rec_canvas, obj, opts.exact)
            .then_some(*id)
    };
    let ids: Vec<RecordId> = if opts.parallel {
        records.par_iter().filter_map(test).collect()
    } else {
        records.iter().filter_map(test).collect()
    };
    Ok(ids.into_iter().collect())
}

/// Spatial join kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JoinKind {
    /// Points of `a` inside polygons of `b`.
    PointsInPolygons,
    /// Polygons of `a` intersecting polygons of `b`.
    PolygonsIntersect,
}

/// Nested-loop spatial join: one selection per `b` record with that record's
/// polygon as the constraint, with a record-MBR prefilter.
pub fn spatial_join(
    a: &Dataset,
    b: &Dataset,
    kind: JoinKind,
    opts: &ExecOptions,
) -> Result<IdPairs, QueryError> {
    expect_kind(b, DatasetKind::Polygons, "polygons")?;
    match kind {
        JoinKind::PointsInPolygons => expect_kind(a, DatasetKind::Points, "points")?,
        JoinKind::PolygonsIntersect => expect_kind(a, DatasetKind::Polygons, "polygons")?,
    }
    if a.is_empty() || b.is_empty() {
        return Ok(IdPairs::new());
    }
    let frame = shared_frame(&[a.mbr(), b.mbr()], opts)?;
    let a_mbr = a.mbr().expect("non-empty dataset has an mbr");

    let b_records: Vec<(RecordId, &Arc<GeometricObject>)> = b
        .iter()
        .filter_map(|(id, r)| match &r.geometry {
            RecordGeometry::Object(o) => Some((*id, o)),
            _ => None,
        })
        .collect();

    match kind {
        JoinKind::PointsInPolygons => {
            let points = a.point_vec();
            let run = |(b_id, obj): &(RecordId, &Arc<GeometricObject>)| -> Result<Vec<(RecordId, RecordId)>, QueryError> {
                if !obj.mbr().intersects(&a_mbr) {
                    return Ok(Vec::new());
                }
                let cc = build_constraint_canvas(
                    vec![(1, RegionGeometry::Object(Arc::clone(obj)))],
                    SelectMode::Any,
                    &frame,
                )?;
                Ok(points
                    .iter()
                    .filter(|(_, p)| cc.point_selected(*p, opts.exact))
                    .map(|(a_id, _)| (RecordId(*a_id), *b_id))
                    .collect())
            };
            let nested: Result<Vec<Vec<_>>, QueryError> = if opts.parallel {
                b_records.par_iter().map(run).collect()
            } else {
                b_records.iter().map(run).collect()
            };
            Ok(nested?.into_iter().flatten().collect())
        }
        JoinKind::PolygonsIntersect => {
            // Constraint canvases for the b side are built once and reused
            // across every a record.
            let b_side: Vec<(RecordId, Rect, ConstraintCanvas)> = b_records
                .iter()
                .map(|(b_id, obj)| {
                    build_constraint_canvas(
                        vec![(1, RegionGeometry::Object(Arc::clone(obj)))],
                        SelectMode::Any,
                        &frame,
                    )
                    .map(|cc| (*b_id, obj.mbr(), cc))
                })
                .collect::<Result<_, _>>()?;
            let a_records: Vec<(RecordId, &Arc<GeometricObject>)> = a
                .iter()
                .filter_map(|(id, r)| match &r.geometry {
                    RecordGeometry::Object(o) => Some((*id, o)),
                    _ => None,
                })
                .collect();
            let run = |(a_id, obj): &(RecordId, &Arc<GeometricObject>)| {
                let a_canvas = rasterize(obj, &InfoSeed::new(a_id.0), &frame);
                let a_rect = obj.mbr();
                b_side
                    .iter()
                    .filter(|(_, b_rect, _)| a_rect.intersects(b_rect))
                    .filter(|(_, _, cc)| cc.region_intersects(&a_canvas, obj, opts.exact))
                    .map(|(b_id, _, _)| (*a_id, *b_id))
                    .collect::<Vec<_>>()
            };
            let nested: Vec<Vec<_>> = if opts.parallel {
                a_records.par_iter().map(run).collect()
            } else {
                a_records.iter().map(run).collect()
            };
            Ok(nested.into_iter().flatten().collect())
        }
    }
}

/// Distance join: pairs within distance `dist`, as a points-in-polygons
/// join against circles of radius `dist` centered on the right-hand points,
/// refined by the exact distance.
pub fn distance_join(
    a: &Dataset,
    b: &Dataset,
    dist: f64,
    opts: &ExecOptions,
) -> Result<IdPairs, QueryError> {
    expect_kind(a, DatasetKind::Points, "points")?;
    expect_kind(b, DatasetKind::Points, "points")?;
    if dist <= 0.0 {
        return Err(QueryError::NonPositiveRadius);
    }
    if a.is_empty() || b.is_empty() {
        return Ok(IdPairs::new());
    }
    let frame = shared_frame(&[a.mbr(), b.mbr()], opts)?;
    let points = a.point_vec();
    let b_points = b.point_vec();
    let run = |(b_id, bp): &(u64, Point2)| -> Result<Vec<(RecordId, RecordId)>, QueryError> {
        let cc = build_constraint_canvas(
            vec![(
                1,
                RegionGeometry::Shape(UtilityShape::Circle {
                    center: *bp,
                    radius: dist,
                }),
            )],
            SelectMode::Any,
            &frame,
        )?;
        Ok(points
            .iter()
            .filter(|(_, p)| cc.point_selected(*p, opts.exact))
            .map(|(a_id, _)| (RecordId(*a_id), RecordId(*b_id)))
            .collect())
    };
    let nested: Result<Vec<Vec<_>>, QueryError> = if opts.parallel {
        b_points.par_iter().map(run).collect()
    } else {
        b_points.iter().map(run).collect()
    };
    Ok(nested?.into_iter().flatten().collect())
}

/// The matrix a selected point record carries into the aggregation stage:
/// row 0 identifies the point (with its attribute value), row 2 the region.
fn survivor_matrix(point_id: u64, value: f64, region_id: u64) -> InfoMatrix {
    InfoMatrix::from_rows([
        Some(ObjectInfo::new(point_id, 1.0, value)),
        None,
        Some(ObjectInfo::new(region_id, 1.0, 0.0)),
    ])
}

/// Fold selected records into the id-strip frame through the accumulation
/// transform and the count/sum blend; returns the strip canvas.
fn accumulate_survivors(
    frame: &RasterFrame,
    strip: &RasterFrame,
    survivors: impl Iterator<Item = (u64, Point2, f64, u64)>,
    sum: bool,
) -> Result<Canvas, QueryError> {
    let gamma = TransformFn::gamma_c();
    let moved = survivors
        .map(|(pid, p, value, region)| {
            let mut b = CanvasBuilder::new(frame.clone());
            if let Some((i, j)) = frame.world_to_pixel(p) {
                b.set_cell(frame.linear(i, j), survivor_matrix(pid, value, region));
            }
            geometric_transform_into(&b.finish(), &gamma, strip, None)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let blend = if sum {
        BlendFn::PlusSum
    } else {
        BlendFn::PlusCount
    };
    Ok(multiway_blend(strip, moved, &blend)?)
}

/// Aggregate a point selection: count survivors or sum one of their
/// attributes, read off the accumulation cell.
pub fn aggregate_select(
    d: &Dataset,
    q: &Constraint,
    agg: &AggregateSpec,
    opts: &ExecOptions,
) -> Result<AggValue, QueryError> {
    if let Some(attr) = agg.attr() {
        for (id, r) in d.iter() {
            if !r.scalars.contains_key(attr) {
                return Err(QueryError::MissingAttribute(*id, attr.to_string()));
            }
        }
    }
    let ids = select_points(d, q, opts)?;
    let frame = shared_frame(&[d.mbr(), q.mbr()], opts)?;
    let strip = id_strip_frame(1)?;
    let survivors = ids.iter().map(|id| {
        let p = match &d.get(*id).unwrap().geometry {
            RecordGeometry::Point(p) => *p,
            _ => unreachable!("points dataset"),
        };
        let value = agg
            .attr()
            .map(|a| d.scalar(*id, a).unwrap_or(0.0))
            .unwrap_or(0.0);
        (id.0, p, value, 1u64)
    });
    let counted = accumulate_survivors(&frame, &strip, survivors, agg.attr().is_some())?;
    let cell = counted
        .frame()
        .world_to_pixel(Point2::new(1.0, 0.0))
        .map(|(i, j)| counted.cell(i, j))
        .unwrap_or(InfoMatrix::EMPTY);
    Ok(match agg {
        AggregateSpec::Count => AggValue::Count(cell.row(0).map_or(0.0, |r| r.count) as i64),
        AggregateSpec::Sum(_) => AggValue::Sum(cell.row(0).map_or(0.0, |r| r.value)),
    })
}

/// Group-by aggregation of points per polygon record. The canonical plan
/// joins then accumulates per polygon id; the raster-join plan pre-merges
/// all points into one partial-aggregate canvas and joins that single canvas
/// with each polygon. Groups with no matches are pruned.
pub fn groupby_join_aggregate(
    p: &Dataset,
    y: &Dataset,
    agg: &AggregateSpec,
    plan: GroupPlan,
    opts: &ExecOptions,
) -> Result<GroupAggregate, QueryError> {
    expect_kind(p, DatasetKind::Points, "points")?;
    expect_kind(y, DatasetKind::Polygons, "polygons")?;
    if let Some(attr) = agg.attr() {
        for (id, r) in p.iter() {
            if !r.scalars.contains_key(attr) {
                return Err(QueryError::MissingAttribute(*id, attr.to_string()));
            }
        }
    }
    if p.is_empty() || y.is_empty() {
        return Ok(GroupAggregate {
            values: BTreeMap::new(),
            boundary_bound: BTreeMap::new(),
        });
    }
    match plan {
        GroupPlan::Canonical => groupby_canonical(p, y, agg, opts),
        GroupPlan::RasterJoin => groupby_rasterjoin(p, y, agg, opts),
    }
}

fn groupby_canonical(
    p: &Dataset,
    y: &Dataset,
    agg: &AggregateSpec,
    opts: &ExecOptions,
) -> Result<GroupAggregate, QueryError> {
    let pairs = spatial_join(p, y, JoinKind::PointsInPolygons, opts)?;
    let frame = shared_frame(&[p.mbr(), y.mbr()], opts)?;
    let max_id = y.ids().map(|r| r.0).max().unwrap_or(1);
    let strip = id_strip_frame(max_id)?;
    let sum = agg.attr().is_some();
    let survivors = pairs.iter().map(|(pid, yid)| {
        let pt = match &p.get(*pid).unwrap().geometry {
            RecordGeometry::Point(q) => *q,
            _ => unreachable!(),
        };
        let value = agg
            .attr()
            .map(|a| p.scalar(*pid, a).unwrap_or(0.0))
            .unwrap_or(0.0);
        (pid.0, pt, value, yid.0)
    });
    let counted = accumulate_survivors(&frame, &strip, survivors, sum)?;
    let mut values = BTreeMap::new();
    for (idx, cell) in counted.iter_cells() {
        let region = cell.row(2).map_or(0, |r| r.id);
        debug_assert_eq!(counted.frame().coords(idx).0 as u64, region);
        let row0 = cell.row(0).expect("accumulated cell has row 0");
        let v = if sum {
            AggValue::Sum(row0.value)
        } else {
            AggValue::Count(row0.count as i64)
        };
        if row0.count > 0.0 {
            values.insert(RecordId(region), v);
        }
    }
    Ok(GroupAggregate {
        values,
        boundary_bound: BTreeMap::new(),
    })
}

fn groupby_rasterjoin(
    p: &Dataset,
    y: &Dataset,
    agg: &AggregateSpec,
    opts: &ExecOptions,
) -> Result<GroupAggregate, QueryError> {
    let frame = shared_frame(&[p.mbr(), y.mbr()], opts)?;
    let sum = agg.attr().is_some();

    // Pre-merge every point record into one partial-aggregate canvas whose
    // boundary index keeps each point's id and exact location.
    let point_canvases = p.iter().map(|(id, r)| {
        let RecordGeometry::Point(pt) = &r.geometry else {
            unreachable!("points dataset")
        };
        let seed = match agg.attr() {
            Some(a) => InfoSeed::with_value(id.0, r.scalars.get(a).copied().unwrap_or(0.0)),
            None => InfoSeed::new(id.0),
        };
        rasterize(&GeometricObject::from_point(*pt), &seed, &frame)
    });
    let blendfn = if sum {
        BlendFn::PlusSum
    } else {
        BlendFn::PlusCount
    };
    let merged = multiway_blend(&frame, point_canvases, &blendfn)?;

    let y_records: Vec<(RecordId, &Arc<GeometricObject>)> = y
        .iter()
        .filter_map(|(id, r)| match &r.geometry {
            RecordGeometry::Object(o) => Some((*id, o)),
            _ => None,
        })
        .collect();

    let run = |(y_id, obj): &(RecordId, &Arc<GeometricObject>)| -> Result<
        (RecordId, f64, f64, f64),
        QueryError,
    > {
        let cc = build_constraint_canvas(
            vec![(1, RegionGeometry::Object(Arc::clone(obj)))],
            SelectMode::Any,
            &frame,
        )?;
        let q = &cc.canvas;
        let mut raster_count = 0.0;
        let mut raster_value = 0.0;
        // Covered pixels of the polygon canvas against the merged points.
        for (idx, m) in q.iter_cells() {
            if m.row(2).is_none() {
                continue;
            }
            if let Some(r0) = merged.cell_linear(idx).row(0) {
                raster_count += r0.count;
                raster_value += r0.value;
            }
        }
        let mut bound = 0.0;
        let mut count = raster_count;
        let mut value = raster_value;
        for idx in q.boundary_pixels_sorted() {
            let Some(r0) = merged.cell_linear(idx).row(0) else {
                continue;
            };
            bound += r0.count;
            if opts.exact {
                let (i, j) = frame.coords(idx);
                let covered = q.cell(i, j).row(2).is_some();
                if covered {
                    count -= r0.count;
                    value -= r0.value;
                }
                for e in merged.boundary_linear(idx) {
                    let crate::canvas::GeometryRef::Point(pt) = e.geom else {
                        continue;
                    };
                    let region = RegionGeometry::Object(Arc::clone(obj));
                    if region.contains(pt) {
                        count += 1.0;
                        value += agg
                            .attr()
                            .map(|a| p.scalar(RecordId(e.id), a).unwrap_or(0.0))
                            .unwrap_or(0.0);
                    }
                }
            }
        }
        Ok((*y_id, count, value, bound))
    };

    let rows: Result<Vec<_>, QueryError> = if opts.parallel {
        y_records.par_iter().map(run).collect()
    } else {
        y_records.iter().map(run).collect()
    };
    let mut values = BTreeMap::new();
    let mut boundary_bound = BTreeMap::new();
    for (y_id, count, value, bound) in rows? {
        if count > 0.0 {
            let v = if sum {
                AggValue::Sum(value)
            } else {
                AggValue::Count(count as i64)
            };
            values.insert(y_id, v);
        }
        if bound > 0.0 {
            boundary_bound.insert(y_id, bound);
        }
    }
    Ok(GroupAggregate {
        values,
        boundary_bound,
    })
}

/// The k nearest point records to `x`, exact under the deterministic
/// tie-break (equal distances order by record id). Radii are searched
/// adaptively: the monotone count-within-radius, evaluated through the
/// distance-selection machinery, brackets the k-th distance, and the final
/// candidate annulus is ordered exactly.
pub fn knn(d: &Dataset, x: Point2, k: usize, opts: &ExecOptions) -> Result<IdSet, QueryError> {
    expect_kind(d, DatasetKind::Points, "points")?;
    let n = d.len();
    if k == 0 || k > n {
        return Err(QueryError::KOutOfRange { k, size: n });
    }
    let points = d.point_vec();
    let x_rect = Rect::from_corners(x, x);
    let frame = shared_frame(&[d.mbr(), Some(x_rect)], opts)?;

    if k == n {
        return Ok(d.ids().collect());
    }

    let mut lo = 0.0f64;
    let mut lo_ids: Vec<u64> = Vec::new();
    let mut hi = frame.diagonal();
    let mut hi_ids = distance_selection(&points, x, hi, &frame)?;
    debug_assert_eq!(hi_ids.len(), n);

    const CANDIDATE_LIMIT: usize = 64;
    for _ in 0..200 {
        if hi_ids.len() - lo_ids.len() <= CANDIDATE_LIMIT {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let mid_ids = distance_selection(&points, x, mid, &frame)?;
        if mid_ids.len() >= k {
            hi = mid;
            hi_ids = mid_ids;
        } else {
            lo = mid;
            lo_ids = mid_ids;
        }
    }

    let inside: BTreeSet<u64> = lo_ids.iter().copied().collect();
    let mut candidates: Vec<(u64, Point2)> = points
        .iter()
        .filter(|(id, _)| hi_ids.contains(id) && !inside.contains(id))
        .copied()
        .collect();
    exact_distance_order(&mut candidates, x);
    let take = k - inside.len();
    Ok(inside
        .into_iter()
        .chain(candidates.into_iter().take(take).map(|(id, _)| id))
        .map(RecordId)
        .collect())
}

/// Incremental raster Voronoi diagram: fold one value transform per seed;
/// every pixel ends labeled with its nearest seed (1-based index) and the
/// distance to it. Ties keep the lowest seed index.
pub fn voronoi(seeds: &[Point2], frame: &RasterFrame) -> Result<Canvas, QueryError> {
    if seeds.is_empty() {
        return Err(QueryError::EmptySeeds);
    }
    for (i, a) in seeds.iter().enumerate() {
        for b in &seeds[..i] {
            if a == b {
                return Err(QueryError::DuplicateSeed(i));
            }
        }
    }
    let mut canvas = Canvas::empty(frame.clone());
    for (i, seed) in seeds.iter().enumerate() {
        canvas = value_transform(&canvas, &ValueFn::voronoi_step(i as u64 + 1, *seed));
    }
    Ok(canvas)
}

/// Origin-destination selection: records whose origin satisfies `q1` and
/// whose destination, reached through the destination transform, satisfies
/// `q2`; exact refinement at both stages.
pub fn od_select(
    d: &Dataset,
    q1: &Constraint,
    q2: &Constraint,
    opts: &ExecOptions,
) -> Result<IdSet, QueryError> {
    if d.kind() != DatasetKind::OdPoints {
        return Err(QueryError::MissingDestination);
    }
    q1.validate()?;
    q2.validate()?;
    if d.is_empty() {
        return Ok(IdSet::new());
    }
    let frame = shared_frame(&[d.mbr(), q1.mbr(), q2.mbr()], opts)?;
    let (r1, m1) = q1.regions();
    let cc1 = build_constraint_canvas(r1, m1, &frame)?;
    let (r2, m2) = q2.regions();
    let cc2 = build_constraint_canvas(r2, m2, &frame)?;

    let records: Vec<(RecordId, Point2, Point2)> = d
        .iter()
        .filter_map(|(id, r)| match &r.geometry {
            RecordGeometry::Od {
                origin,
                destination,
            } => Some((*id, *origin, *destination)),
            _ => None,
        })
        .collect();
    let test = |(id, origin, dest): &(RecordId, Point2, Point2)| -> Option<RecordId> {
        (cc1.point_selected(*origin, opts.exact) && cc2.point_selected(*dest, opts.exact))
            .then_some(*id)
    };
    let ids: Vec<RecordId> = if opts.parallel {
        records.par_iter().filter_map(test).collect()
    } else {
        records.iter().filter_map(test).collect()
    };
    Ok(ids.into_iter().collect())
}

/// Destination lookup table for the destination transform.
pub fn destination_map(d: &Dataset) -> Result<Arc<HashMap<u64, Point2>>, QueryError> {
    if d.kind() != DatasetKind::OdPoints {
        return Err(QueryError::MissingDestination);
    }
    Ok(Arc::new(
        d.iter()
            .filter_map(|(id, r)| match &r.geometry {
                RecordGeometry::Od { destination, .. } => Some((id.0, *destination)),
                _ => None,
            })
            .collect(),
    ))
}
