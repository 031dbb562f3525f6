//! Execution machinery shared by the query plans: shared frames, merged
//! constraint canvases, and the filter/refine kernels.
//!
//! Selection plans blend each record's canvas with the constraint canvas and
//! mask the result. For a point record the blend can only survive the mask
//! at the record's own pixel (the mask requires row 0, which the blend takes
//! from the record side), so the engine evaluates the plan with one cell
//! lookup per record instead of materializing per-record blends. The raster
//! verdict is decisive away from constraint boundaries; at boundary pixels
//! the exact geometry in the boundary index decides, in both directions, so
//! results are vector-exact at any resolution.

use std::collections::HashMap;
use std::sync::Arc;

use crate::algebra::{multiway_blend, BlendFn};
use crate::canvas::{rasterize, utility_canvas, Canvas, InfoSeed, RasterFrame, UtilityShape};
use crate::geometry::{
    distance, dist_point_segment, point_in_polygon, polygons_intersect, Containment,
    GeometricObject, Point2, Rect,
};

use super::{ExecOptions, QueryError, SelectMode};

/// Exact geometry of one constraint region.
#[derive(Debug, Clone)]
pub(crate) enum RegionGeometry {
    Object(Arc<GeometricObject>),
    Shape(UtilityShape),
}

impl RegionGeometry {
    pub(crate) fn mbr(&self) -> Option<Rect> {
        match self {
            RegionGeometry::Object(o) => Some(o.mbr()),
            RegionGeometry::Shape(s) => s.mbr(),
        }
    }

    /// Closed containment, the refinement predicate.
    pub(crate) fn contains(&self, p: Point2) -> bool {
        match self {
            RegionGeometry::Object(o) => o
                .regions()
                .any(|poly| point_in_polygon(p, poly) != Containment::Outside),
            RegionGeometry::Shape(s) => s.geometry_ref().contains(p),
        }
    }

    /// Whether this region's raster fill covers the pixel center, matching
    /// the rasterizer's fill rule.
    fn center_covered(&self, p: Point2) -> bool {
        match self {
            RegionGeometry::Object(o) => o
                .regions()
                .any(|poly| point_in_polygon(p, poly) == Containment::Inside),
            RegionGeometry::Shape(s) => s.geometry_ref().center_covered(p),
        }
    }

    fn canvas(&self, id: u64, frame: &RasterFrame) -> Result<Canvas, QueryError> {
        Ok(match self {
            RegionGeometry::Object(o) => rasterize(o, &InfoSeed::new(id), frame),
            RegionGeometry::Shape(s) => utility_canvas(s, &InfoSeed::new(id), frame)?,
        })
    }

    /// Exact region-vs-region intersection against a polygon object.
    pub(crate) fn intersects_object(&self, obj: &GeometricObject) -> bool {
        obj.regions().any(|poly| match self {
            RegionGeometry::Object(o) => o.regions().any(|q| polygons_intersect(q, poly)),
            RegionGeometry::Shape(UtilityShape::Rect { a, b }) => {
                let r = Rect::from_corners(*a, *b);
                let ring = r.corners().to_vec();
                let rect_poly = crate::geometry::validate_polygon(&[ring])
                    .expect("rectangle ring is simple");
                polygons_intersect(&rect_poly, poly)
            }
            RegionGeometry::Shape(UtilityShape::Circle { center, radius }) => {
                point_in_polygon(*center, poly) != Containment::Outside
                    || poly
                        .edges()
                        .any(|(a, b)| dist_point_segment(*center, a, b) <= *radius)
            }
            RegionGeometry::Shape(UtilityShape::HalfSpace { a, b, c }) => poly
                .outer()
                .vertices()
                .iter()
                .any(|v| a * v.x + b * v.y + c <= 0.0),
        })
    }
}

/// A constraint compiled to canvas form: the merged region canvas (one
/// region canvas per constraint region, folded with the region-overlay
/// blend) plus the exact geometry per region id for refinement.
#[derive(Debug)]
pub(crate) struct ConstraintCanvas {
    pub canvas: Canvas,
    pub regions: HashMap<u64, RegionGeometry>,
    pub mode: SelectMode,
    pub total: usize,
}

pub(crate) fn build_constraint_canvas(
    regions: Vec<(u64, RegionGeometry)>,
    mode: SelectMode,
    frame: &RasterFrame,
) -> Result<ConstraintCanvas, QueryError> {
    let total = regions.len();
    let canvases = regions
        .iter()
        .map(|(id, g)| g.canvas(*id, frame))
        .collect::<Result<Vec<_>, _>>()?;
    let canvas = multiway_blend(frame, canvases, &BlendFn::Oplus)?;
    Ok(ConstraintCanvas {
        canvas,
        regions: regions.into_iter().collect(),
        mode,
        total,
    })
}

impl ConstraintCanvas {
    /// Exact number of constraint regions containing `p`, combining the
    /// raster count with boundary refinement. With `exact` off the raster
    /// count is returned as-is.
    pub(crate) fn hits(&self, p: Point2, exact: bool) -> f64 {
        let frame = self.canvas.frame();
        let Some((i, j)) = frame.world_to_pixel(p) else {
            return 0.0;
        };
        let idx = frame.linear(i, j);
        let raster = self
            .canvas
            .cell_linear(idx)
            .row(2)
            .map_or(0.0, |r| r.count);
        let entries = self.canvas.boundary_linear(idx);
        if entries.is_empty() || !exact {
            return raster;
        }
        let center = frame.pixel_center(i, j);
        let mut seen: Vec<u64> = Vec::with_capacity(entries.len());
        let mut certain = raster;
        let mut exact_hits = 0.0;
        for e in entries {
            if seen.contains(&e.id) {
                continue;
            }
            seen.push(e.id);
            let region = &self.regions[&e.id];
            if region.center_covered(center) {
                certain -= 1.0;
            }
            if region.contains(p) {
                exact_hits += 1.0;
            }
        }
        certain.max(0.0) + exact_hits
    }

    pub(crate) fn selects(&self, hits: f64) -> bool {
        match self.mode {
            SelectMode::Any => hits >= 1.0,
            SelectMode::All => hits == self.total as f64,
        }
    }

    pub(crate) fn point_selected(&self, p: Point2, exact: bool) -> bool {
        self.selects(self.hits(p, exact))
    }

    /// Does the single constraint region intersect a rasterized polygon
    /// record? A pixel whose center both canvases cover witnesses the
    /// intersection outright; otherwise any shared covered-or-boundary pixel
    /// makes the pair a candidate and the exact predicate decides.
    pub(crate) fn region_intersects(
        &self,
        record_canvas: &Canvas,
        record_obj: &GeometricObject,
        exact: bool,
    ) -> bool {
        debug_assert_eq!(self.total, 1);
        let q = &self.canvas;
        for (idx, m) in record_canvas.iter_cells() {
            if m.row(2).is_none() {
                continue;
            }
            if q.cell_linear(idx).row(2).is_some() {
                return true;
            }
            if exact && !q.boundary_linear(idx).is_empty() {
                return self.exact_region_hit(record_obj);
            }
        }
        if !exact {
            return false;
        }
        for idx in record_canvas.boundary_pixels_sorted() {
            if q.cell_linear(idx).row(2).is_some() || !q.boundary_linear(idx).is_empty() {
                return self.exact_region_hit(record_obj);
            }
        }
        false
    }

    fn exact_region_hit(&self, obj: &GeometricObject) -> bool {
        self.regions.values().any(|g| g.intersects_object(obj))
    }
}

/// Frame covering the union of the participants' bounding rectangles,
/// expanded by 1% per axis (degenerate axes get a fallback pad so single
/// points still frame up).
pub(crate) fn shared_frame(
    participants: &[Option<Rect>],
    opts: &ExecOptions,
) -> Result<RasterFrame, QueryError> {
    if let Some(extent) = opts.extent {
        return Ok(RasterFrame::build(extent, opts.resolution, opts.resolution)?);
    }
    let union = participants
        .iter()
        .flatten()
        .fold(None::<Rect>, |acc, r| match acc {
            None => Some(*r),
            Some(u) => Some(u.union(r)),
        })
        .ok_or_else(|| {
            QueryError::InvalidConstraint("no bounded participant to frame the query".into())
        })?;
    let w = union.width();
    let h = union.height();
    let pad_x = if w > 0.0 {
        0.01 * w
    } else if h > 0.0 {
        0.01 * h
    } else {
        0.5
    };
    let pad_y = if h > 0.0 { 0.01 * h } else { pad_x };
    let extent = Rect::new(
        Point2::new(union.min.x - pad_x, union.min.y - pad_y),
        Point2::new(union.max.x + pad_x, union.max.y + pad_y),
    );
    Ok(RasterFrame::build(extent, opts.resolution, opts.resolution)?)
}

/// One-row frame whose pixel `i` covers the world location `(i, 0)`; the
/// target space of the id-keyed accumulation transforms.
pub(crate) fn id_strip_frame(max_id: u64) -> Result<RasterFrame, QueryError> {
    let width = max_id
        .checked_add(1)
        .filter(|w| *w <= (1 << 31))
        .ok_or_else(|| {
            QueryError::InvalidConstraint("record ids too large for an aggregation frame".into())
        })? as u32;
    Ok(RasterFrame::build(
        Rect::new(
            Point2::new(-0.5, -0.5),
            Point2::new(max_id as f64 + 0.5, 0.5),
        ),
        width,
        1,
    )?)
}

/// Ids with exact distance to `x` at most `r` (closed disc), through the
/// canvas machinery: a circle constraint canvas plus the point kernel.
pub(crate) fn distance_selection(
    points: &[(u64, Point2)],
    x: Point2,
    r: f64,
    frame: &RasterFrame,
) -> Result<Vec<u64>, QueryError> {
    let cc = build_constraint_canvas(
        vec![(
            1,
            RegionGeometry::Shape(UtilityShape::Circle {
                center: x,
                radius: r,
            }),
        )],
        SelectMode::Any,
        frame,
    )?;
    Ok(points
        .iter()
        .filter(|(_, p)| cc.point_selected(*p, true))
        .map(|(id, _)| *id)
        .collect())
}

/// The naive per-point baseline: test each point against every constraint
/// region with the exact predicates, short-circuiting per the mode.
pub(crate) fn naive_point_select(
    points: &[(u64, Point2)],
    regions: &[RegionGeometry],
    mode: SelectMode,
) -> Vec<u64> {
    points
        .iter()
        .filter(|(_, p)| match mode {
            SelectMode::Any => regions.iter().any(|g| g.contains(*p)),
            SelectMode::All => regions.iter().all(|g| g.contains(*p)),
        })
        .map(|(id, _)| *id)
        .collect()
}

pub(crate) fn exact_distance_order(
    candidates: &mut Vec<(u64, Point2)>,
    x: Point2,
) {
    candidates.sort_by(|(ida, pa), (idb, pb)| {
        distance(*pa, x)
            .total_cmp(&distance(*pb, x))
            .then(ida.cmp(idb))
    });
}
