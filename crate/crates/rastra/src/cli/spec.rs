//! Query specification files: a JSON description of a query kind, its
//! datasets, constraint, parameters and frame.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::geometry::{Point2, Rect};
use crate::queries::{AggregateSpec, Constraint, GroupPlan, SelectMode};

use super::{io, CliError};

fn default_resolution() -> u32 {
    2048
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueryKind {
    SelectPoints,
    SelectPolygons,
    Join,
    DistanceJoin,
    Aggregate,
    Groupby,
    Knn,
    Voronoi,
    OdSelect,
    MultiSelect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ModeSpec {
    #[default]
    Any,
    All,
}

impl From<ModeSpec> for SelectMode {
    fn from(m: ModeSpec) -> SelectMode {
        match m {
            ModeSpec::Any => SelectMode::Any,
            ModeSpec::All => SelectMode::All,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PlanSpec {
    #[default]
    Canonical,
    Rasterjoin,
}

impl From<PlanSpec> for GroupPlan {
    fn from(p: PlanSpec) -> GroupPlan {
        match p {
            PlanSpec::Canonical => GroupPlan::Canonical,
            PlanSpec::Rasterjoin => GroupPlan::RasterJoin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AggSpec {
    Count,
    Sum { attr: String },
}

impl From<&AggSpec> for AggregateSpec {
    fn from(a: &AggSpec) -> AggregateSpec {
        match a {
            AggSpec::Count => AggregateSpec::Count,
            AggSpec::Sum { attr } => AggregateSpec::Sum(attr.clone()),
        }
    }
}

/// Inline constraint geometry or a polygon file reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintSpec {
    Polygon {
        rings: Vec<Vec<[f64; 2]>>,
    },
    Rect {
        min: [f64; 2],
        max: [f64; 2],
    },
    Circle {
        center: [f64; 2],
        radius: f64,
    },
    HalfSpace {
        a: f64,
        b: f64,
        c: f64,
    },
    PolygonFile {
        path: PathBuf,
        #[serde(default)]
        mode: ModeSpec,
        #[serde(default)]
        take: Option<usize>,
    },
}

impl ConstraintSpec {
    pub fn build(&self) -> Result<Constraint, CliError> {
        Ok(match self {
            ConstraintSpec::Polygon { rings } => {
                let raw: Vec<Vec<Point2>> = rings
                    .iter()
                    .map(|r| r.iter().map(|&[x, y]| Point2::new(x, y)).collect())
                    .collect();
                let poly = crate::geometry::validate_polygon(&raw)
                    .map_err(|e| CliError::Spec(format!("constraint polygon: {e}")))?;
                Constraint::Polygon(poly)
            }
            ConstraintSpec::Rect { min, max } => Constraint::Rect(Rect::from_corners(
                Point2::new(min[0], min[1]),
                Point2::new(max[0], max[1]),
            )),
            ConstraintSpec::Circle { center, radius } => Constraint::Circle {
                center: Point2::new(center[0], center[1]),
                radius: *radius,
            },
            ConstraintSpec::HalfSpace { a, b, c } => Constraint::HalfSpace {
                a: *a,
                b: *b,
                c: *c,
            },
            ConstraintSpec::PolygonFile { path, mode, take } => {
                let mut polygons = io::load_constraint_polygons(path)?;
                if let Some(n) = take {
                    polygons.truncate(*n);
                }
                Constraint::PolygonSet {
                    polygons,
                    mode: (*mode).into(),
                }
            }
        })
    }
}

/// A complete query description, loadable from JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct QuerySpec {
    pub kind: QueryKind,
    /// Point dataset (CSV) for point-based queries, kNN and Voronoi seeds.
    #[serde(default)]
    pub points: Option<PathBuf>,
    /// Right-hand point dataset of a distance join.
    #[serde(default)]
    pub points_b: Option<PathBuf>,
    /// Polygon dataset (GeoJSON subset).
    #[serde(default)]
    pub polygons: Option<PathBuf>,
    /// Right-hand polygon dataset of a polygon-polygon join.
    #[serde(default)]
    pub polygons_b: Option<PathBuf>,
    /// Origin-destination dataset (CSV).
    #[serde(default)]
    pub od: Option<PathBuf>,
    #[serde(default)]
    pub constraint: Option<ConstraintSpec>,
    /// Second constraint of an origin-destination selection.
    #[serde(default)]
    pub constraint2: Option<ConstraintSpec>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub distance: Option<f64>,
    #[serde(default)]
    pub agg: Option<AggSpec>,
    #[serde(default)]
    pub plan: Option<PlanSpec>,
    #[serde(default)]
    pub query_point: Option<[f64; 2]>,
    #[serde(default = "default_resolution")]
    pub resolution: u32,
    /// Explicit frame extent `[min_x, min_y, max_x, max_y]`.
    #[serde(default)]
    pub extent: Option<[f64; 4]>,
    /// Boundary refinement on (vector-exact) or off.
    #[serde(default = "default_true")]
    pub exact: bool,
}

impl QuerySpec {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        let spec: QuerySpec = serde_json::from_str(&text)
            .map_err(|e| CliError::Spec(format!("{}: {e}", path.display())))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.resolution < 16 {
            return Err(CliError::Spec("resolution must be at least 16".into()));
        }
        let need = |cond: bool, what: &str| -> Result<(), CliError> {
            if cond {
                Ok(())
            } else {
                Err(CliError::Spec(format!(
                    "query kind {:?} requires {what}",
                    self.kind
                )))
            }
        };
        match self.kind {
            QueryKind::SelectPoints | QueryKind::MultiSelect | QueryKind::Aggregate => {
                need(self.points.is_some(), "a points dataset")?;
                need(self.constraint.is_some(), "a constraint")?;
                if self.kind == QueryKind::Aggregate {
                    need(self.agg.is_some(), "an agg")?;
                }
            }
            QueryKind::SelectPolygons => {
                need(self.polygons.is_some(), "a polygons dataset")?;
                need(self.constraint.is_some(), "a constraint")?;
            }
            QueryKind::Join => {
                need(self.polygons.is_some(), "a polygons dataset")?;
                need(
                    self.points.is_some() || self.polygons_b.is_some(),
                    "points (type I) or polygons-b (type II)",
                )?;
            }
            QueryKind::DistanceJoin => {
                need(self.points.is_some() && self.points_b.is_some(), "two point datasets")?;
                need(self.distance.is_some(), "a distance")?;
            }
            QueryKind::Groupby => {
                need(self.points.is_some(), "a points dataset")?;
                need(self.polygons.is_some(), "a polygons dataset")?;
                need(self.agg.is_some(), "an agg")?;
            }
            QueryKind::Knn => {
                need(self.points.is_some(), "a points dataset")?;
                need(self.k.is_some(), "k")?;
                need(self.query_point.is_some(), "a query-point")?;
            }
            QueryKind::Voronoi => {
                need(self.points.is_some(), "a seed points dataset")?;
            }
            QueryKind::OdSelect => {
                need(self.od.is_some(), "an od dataset")?;
                need(
                    self.constraint.is_some() && self.constraint2.is_some(),
                    "constraint and constraint2",
                )?;
            }
        }
        Ok(())
    }

    pub fn extent_rect(&self) -> Option<Rect> {
        self.extent
            .map(|[x0, y0, x1, y1]| Rect::from_corners(Point2::new(x0, y0), Point2::new(x1, y1)))
    }
}
