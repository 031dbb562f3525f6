//! The user-facing surface: dataset loading, query-spec execution (engine or
//! oracle), and the benchmark harness.

pub mod bench;
pub mod io;
pub mod spec;
pub mod workload;

pub use spec::{AggSpec, ConstraintSpec, ModeSpec, PlanSpec, QueryKind, QuerySpec};

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::canvas::RasterFrame;
use crate::geometry::{Point2, Rect};
use crate::oracle;
use crate::queries::{
    self, AggregateSpec, Constraint, Dataset, ExecOptions, GroupPlan, JoinKind, QueryError,
    RecordGeometry,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("duplicate record id {0}")]
    DuplicateId(u64),
    #[error("invalid query spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Query(#[from] QueryError),
}

impl CliError {
    /// 2 for usage/parse problems, 1 for runtime query failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse { .. } | CliError::DuplicateId(_) | CliError::Spec(_) => 2,
            CliError::Io(_) | CliError::Query(_) => 1,
        }
    }
}

/// Which implementation answers the query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineChoice {
    Canvas,
    Oracle,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub rows: usize,
    pub out: PathBuf,
}

fn exec_options(spec: &QuerySpec, parallel: bool) -> ExecOptions {
    ExecOptions {
        resolution: spec.resolution,
        extent: spec.extent_rect(),
        exact: spec.exact,
        parallel,
    }
}

fn voronoi_inputs(spec: &QuerySpec) -> Result<(Vec<u64>, Vec<Point2>, RasterFrame), CliError> {
    let d = io::load_points_csv(spec.points.as_ref().expect("validated"))?;
    let mut ids = Vec::with_capacity(d.len());
    let mut seeds = Vec::with_capacity(d.len());
    for (id, r) in d.iter() {
        if let RecordGeometry::Point(p) = &r.geometry {
            ids.push(id.0);
            seeds.push(*p);
        }
    }
    let extent = spec.extent_rect().or_else(|| d.mbr()).ok_or_else(|| {
        CliError::Spec("voronoi needs seeds or an explicit extent".into())
    })?;
    let extent = if extent.is_degenerate() {
        Rect::new(
            Point2::new(extent.min.x - 0.5, extent.min.y - 0.5),
            Point2::new(extent.max.x + 0.5, extent.max.y + 0.5),
        )
    } else {
        extent
    };
    let frame = RasterFrame::build(extent, spec.resolution, spec.resolution)
        .map_err(QueryError::from)?;
    Ok((ids, seeds, frame))
}

/// Execute a query spec and write its result file. Returns the row count.
pub fn run_query(
    spec: &QuerySpec,
    out: &Path,
    engine: EngineChoice,
    parallel: bool,
) -> Result<RunSummary, CliError> {
    spec.validate()?;
    let opts = exec_options(spec, parallel);
    let load_points = |p: &Option<PathBuf>| io::load_points_csv(p.as_ref().expect("validated"));
    let load_polys = |p: &Option<PathBuf>| io::load_polygons_geojson(p.as_ref().expect("validated"));
    let constraint = |c: &Option<ConstraintSpec>| -> Result<Constraint, CliError> {
        c.as_ref().expect("validated").build()
    };

    let rows = match spec.kind {
        QueryKind::SelectPoints | QueryKind::MultiSelect => {
            let d = load_points(&spec.points)?;
            let q = constraint(&spec.constraint)?;
            let ids = match engine {
                EngineChoice::Canvas => queries::select_points(&d, &q, &opts)?,
                EngineChoice::Oracle => oracle::oracle_select(&d, &q)?,
            };
            io::write_ids(out, &ids)?
        }
        QueryKind::SelectPolygons => {
            let d = load_polys(&spec.polygons)?;
            let q = constraint(&spec.constraint)?;
            let ids = match engine {
                EngineChoice::Canvas => queries::select_polygons(&d, &q, &opts)?,
                EngineChoice::Oracle => oracle::oracle_select(&d, &q)?,
            };
            io::write_ids(out, &ids)?
        }
        QueryKind::Join => {
            let b = load_polys(&spec.polygons)?;
            let (a, kind): (Dataset, JoinKind) = if spec.points.is_some() {
                (load_points(&spec.points)?, JoinKind::PointsInPolygons)
            } else {
                (load_polys(&spec.polygons_b)?, JoinKind::PolygonsIntersect)
            };
            let pairs = match engine {
                EngineChoice::Canvas => queries::spatial_join(&a, &b, kind, &opts)?,
                EngineChoice::Oracle => oracle::oracle_join(&a, &b, kind)?,
            };
            io::write_pairs(out, &pairs)?
        }
        QueryKind::DistanceJoin => {
            let a = load_points(&spec.points)?;
            let b = load_points(&spec.points_b)?;
            let dist = spec.distance.expect("validated");
            let pairs = match engine {
                EngineChoice::Canvas => queries::distance_join(&a, &b, dist, &opts)?,
                EngineChoice::Oracle => oracle::oracle_distance_join(&a, &b, dist)?,
            };
            io::write_pairs(out, &pairs)?
        }
        QueryKind::Aggregate => {
            let d = load_points(&spec.points)?;
            let q = constraint(&spec.constraint)?;
            let agg: AggregateSpec = spec.agg.as_ref().expect("validated").into();
            let value = match engine {
                EngineChoice::Canvas => queries::aggregate_select(&d, &q, &agg, &opts)?,
                EngineChoice::Oracle => {
                    let ids = oracle::oracle_select(&d, &q)?;
                    match &agg {
                        AggregateSpec::Count => {
                            queries::AggValue::Count(ids.len() as i64)
                        }
                        AggregateSpec::Sum(attr) => queries::AggValue::Sum(
                            oracle::compensated_sum(
                                ids.iter().map(|id| d.scalar(*id, attr).unwrap_or(0.0)),
                            ),
                        ),
                    }
                }
            };
            io::write_value(out, &value)?
        }
        QueryKind::Groupby => {
            let p = load_points(&spec.points)?;
            let y = load_polys(&spec.polygons)?;
            let agg: AggregateSpec = spec.agg.as_ref().expect("validated").into();
            let plan: GroupPlan = spec.plan.unwrap_or_default().into();
            let groups = match engine {
                EngineChoice::Canvas => {
                    queries::groupby_join_aggregate(&p, &y, &agg, plan, &opts)?.values
                }
                EngineChoice::Oracle => oracle::oracle_group_aggregate(&p, &y, &agg)?,
            };
            io::write_groups(out, &groups)?
        }
        QueryKind::Knn => {
            let d = load_points(&spec.points)?;
            let [x, y] = spec.query_point.expect("validated");
            let k = spec.k.expect("validated");
            let ids = match engine {
                EngineChoice::Canvas => queries::knn(&d, Point2::new(x, y), k, &opts)?,
                EngineChoice::Oracle => oracle::oracle_knn(&d, Point2::new(x, y), k)?,
            };
            io::write_ids(out, &ids)?
        }
        QueryKind::Voronoi => {
            let (ids, seeds, frame) = voronoi_inputs(spec)?;
            match engine {
                EngineChoice::Canvas => {
                    let canvas = queries::voronoi(&seeds, &frame)?;
                    io::write_voronoi(out, &canvas, &ids)?
                }
                EngineChoice::Oracle => {
                    let labels = (0..frame.height()).flat_map(|j| {
                        let seeds = seeds.clone();
                        let frame = frame.clone();
                        (0..frame.width()).map(move |i| {
                            oracle::oracle_voronoi_label(&seeds, frame.pixel_center(i, j))
                        })
                    });
                    io::write_voronoi_labels(out, frame.width(), frame.height(), labels, &ids)?
                }
            }
        }
        QueryKind::OdSelect => {
            let d = io::load_od_csv(spec.od.as_ref().expect("validated"))?;
            let q1 = constraint(&spec.constraint)?;
            let q2 = constraint(&spec.constraint2)?;
            let ids = match engine {
                EngineChoice::Canvas => queries::od_select(&d, &q1, &q2, &opts)?,
                EngineChoice::Oracle => oracle::oracle_od_select(&d, &q1, &q2)?,
            };
            io::write_ids(out, &ids)?
        }
    };
    Ok(RunSummary {
        rows,
        out: out.to_path_buf(),
    })
}
