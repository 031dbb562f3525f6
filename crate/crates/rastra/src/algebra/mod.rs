//! The canvas operator algebra: five fundamental operators (geometric
//! transform, value transform, mask, blend, dissect), the derived multiway
//! blend and map, and the built-in parameter functions.
//!
//! Every operator returns canvases, so arbitrary plans compose by
//! construction. Dissect and map are lazy streams; multiway blend folds
//! right-nested per its definition, with two exact shortcuts: blends that
//! treat the empty matrix as an identity fold in place, and the commutative
//! associative count blend accumulates in any order (its fields are an
//! integer-valued sum, a constant, and an order-free row minimum, so the
//! result is bit-identical to the sequential fold).

mod params;

pub use params::{
    builtin, Affine2, BlendFn, BuiltinArgs, MaskSet, ParamFn, TransformFn, ValueFn,
};

use std::sync::Arc;

use thiserror::Error;

use crate::canvas::raster::geometry_boundary_pixels;
use crate::canvas::{
    BoundaryEntry, Canvas, CanvasBuilder, GeometryRef, InfoMatrix, RasterFrame,
};
use crate::geometry::{validate_polygon, Point2, Polyline, Rect};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("blend operands have different frames")]
    FrameMismatch,
    #[error("transform maps two cells to pixel ({i}, {j}) and no resolver was given")]
    TransformCollision { i: u32, j: u32 },
    #[error("unknown builtin parameter function `{0}`")]
    UnknownBuiltin(String),
    #[error("builtin `{0}` is missing a required argument")]
    MissingBuiltinArg(String),
    #[error("boundary geometry cannot be carried exactly through this transform")]
    UnsupportedBoundaryCarry,
}

/// Relocate canvas content. Positional transforms move cells by their pixel
/// center; informational transforms move them by their stored matrix.
/// Targets outside the frame are dropped; two cells landing on one pixel
/// are merged by `resolver` or rejected.
pub fn geometric_transform(
    c: &Canvas,
    gamma: &TransformFn,
    resolver: Option<&BlendFn>,
) -> Result<Canvas, AlgebraError> {
    geometric_transform_into(c, gamma, c.frame(), resolver)
}

/// Like [`geometric_transform`] but placing results into an explicit target
/// frame. Aggregation plans need this: the accumulation transforms map cells
/// to id-indexed locations that live outside any geometric data frame.
pub fn geometric_transform_into(
    c: &Canvas,
    gamma: &TransformFn,
    target: &RasterFrame,
    resolver: Option<&BlendFn>,
) -> Result<Canvas, AlgebraError> {
    let mut builder = CanvasBuilder::new(target.clone());
    for (idx, cell) in c.iter_cells() {
        let (i, j) = c.frame().coords(idx);
        let dest = match gamma {
            TransformFn::Positional { f, .. } => f(c.frame().pixel_center(i, j)),
            TransformFn::Informational { f, .. } => f(&cell),
        };
        let Some((ti, tj)) = target.world_to_pixel(dest) else {
            continue;
        };
        let tidx = target.linear(ti, tj);
        let existing = builder.get_cell(tidx);
        if existing.is_empty() {
            builder.set_cell(tidx, cell);
        } else if let Some(r) = resolver {
            builder.set_cell(tidx, r.apply(&existing, &cell));
        } else {
            return Err(AlgebraError::TransformCollision { i: ti, j: tj });
        }
    }

    match gamma {
        TransformFn::Informational { f, .. } => {
            // Boundary entries ride along with their cell's information.
            for idx in c.boundary_pixels_sorted() {
                let cell = c.cell_linear(idx);
                if cell.is_empty() {
                    continue;
                }
                let Some((ti, tj)) = target.world_to_pixel(f(&cell)) else {
                    continue;
                };
                let tidx = target.linear(ti, tj);
                for e in c.boundary_linear(idx) {
                    builder.add_boundary(tidx, e.clone());
                }
            }
        }
        TransformFn::Positional { f, affine, .. } => {
            // Points re-anchor exactly through any map; other geometry is
            // mapped through the affine form and its boundary re-derived.
            let mut uniques: Vec<BoundaryEntry> = Vec::new();
            for idx in c.boundary_pixels_sorted() {
                for e in c.boundary_linear(idx) {
                    if let GeometryRef::Point(p) = e.geom {
                        let q = f(p);
                        if let Some((ti, tj)) = target.world_to_pixel(q) {
                            builder.add_boundary(
                                target.linear(ti, tj),
                                BoundaryEntry {
                                    id: e.id,
                                    dim: e.dim,
                                    geom: GeometryRef::Point(q),
                                },
                            );
                        }
                    } else if !uniques
                        .iter()
                        .any(|u| u.id == e.id && u.dim == e.dim && u.geom == e.geom)
                    {
                        uniques.push(e.clone());
                    }
                }
            }
            for e in uniques {
                let geom = carry_geometry(&e.geom, f.as_ref(), affine.as_ref())?;
                for idx in geometry_boundary_pixels(target, &geom) {
                    builder.add_boundary(
                        idx,
                        BoundaryEntry {
                            id: e.id,
                            dim: e.dim,
                            geom: geom.clone(),
                        },
                    );
                }
            }
        }
    }
    Ok(builder.finish())
}

fn carry_geometry(
    geom: &GeometryRef,
    f: &(dyn Fn(Point2) -> Point2 + Send + Sync),
    affine: Option<&Affine2>,
) -> Result<GeometryRef, AlgebraError> {
    let aff = affine.ok_or(AlgebraError::UnsupportedBoundaryCarry)?;
    Ok(match geom {
        GeometryRef::Point(p) => GeometryRef::Point(f(*p)),
        GeometryRef::Line(l) => {
            let verts = l.vertices().iter().map(|&p| f(p)).collect();
            GeometryRef::Line(Arc::new(
                Polyline::new(verts).map_err(|_| AlgebraError::UnsupportedBoundaryCarry)?,
            ))
        }
        GeometryRef::Region(poly) => GeometryRef::Region(Arc::new(poly.transformed(f))),
        GeometryRef::RectRegion(r) => {
            if aff.is_axis_aligned() {
                GeometryRef::RectRegion(Rect::from_corners(f(r.min), f(r.max)))
            } else {
                let ring: Vec<Point2> = r.corners().iter().map(|&p| f(p)).collect();
                GeometryRef::Region(Arc::new(
                    validate_polygon(&[ring])
                        .map_err(|_| AlgebraError::UnsupportedBoundaryCarry)?,
                ))
            }
        }
        GeometryRef::Circle { center, radius } => {
            let scale = aff
                .similarity_scale()
                .ok_or(AlgebraError::UnsupportedBoundaryCarry)?;
            GeometryRef::Circle {
                center: f(*center),
                radius: radius * scale,
            }
        }
        GeometryRef::HalfSpace { .. } => return Err(AlgebraError::UnsupportedBoundaryCarry),
    })
}

/// Rewrite every pixel (including empty ones) through `f`; the boundary
/// index is untouched because the referenced geometry does not move.
pub fn value_transform(c: &Canvas, f: &ValueFn) -> Canvas {
    let frame = c.frame().clone();
    let mut builder = CanvasBuilder::new(frame.clone());
    let mut cells = c.iter_cells().peekable();
    for idx in 0..frame.num_pixels() {
        let cur = match cells.peek() {
            Some(&(k, m)) if k == idx => {
                cells.next();
                m
            }
            _ => InfoMatrix::EMPTY,
        };
        let (i, j) = frame.coords(idx);
        let out = f.apply(frame.pixel_center(i, j), &cur);
        if !out.is_empty() {
            builder.set_cell(idx, out);
        }
    }
    builder.extend_boundary_from(c);
    builder.finish()
}

/// Keep cells satisfying the mask, empty out the rest; boundary entries
/// survive only at surviving pixels.
pub fn mask(c: &Canvas, m: &MaskSet) -> Canvas {
    let mut builder = CanvasBuilder::new(c.frame().clone());
    for (idx, cell) in c.iter_cells() {
        if m.eval(&cell) {
            builder.set_cell(idx, cell);
        }
    }
    for idx in c.boundary_pixels_sorted() {
        if !builder.get_cell(idx).is_empty() {
            for e in c.boundary_linear(idx) {
                builder.push_boundary(idx, e.clone());
            }
        }
    }
    builder.finish()
}

/// Per-pixel merge of two same-frame canvases; boundary indexes are unioned.
pub fn blend(c1: &Canvas, c2: &Canvas, f: &BlendFn) -> Result<Canvas, AlgebraError> {
    if c1.frame() != c2.frame() {
        return Err(AlgebraError::FrameMismatch);
    }
    let mut builder = CanvasBuilder::new(c1.frame().clone());
    let mut it1 = c1.iter_cells().peekable();
    let mut it2 = c2.iter_cells().peekable();
    loop {
        let (idx, a, b) = match (it1.peek().copied(), it2.peek().copied()) {
            (None, None) => break,
            (Some((k1, m1)), None) => {
                it1.next();
                (k1, m1, InfoMatrix::EMPTY)
            }
            (None, Some((k2, m2))) => {
                it2.next();
                (k2, InfoMatrix::EMPTY, m2)
            }
            (Some((k1, m1)), Some((k2, m2))) => {
                if k1 < k2 {
                    it1.next();
                    (k1, m1, InfoMatrix::EMPTY)
                } else if k2 < k1 {
                    it2.next();
                    (k2, InfoMatrix::EMPTY, m2)
                } else {
                    it1.next();
                    it2.next();
                    (k1, m1, m2)
                }
            }
        };
        let out = f.apply(&a, &b);
        if !out.is_empty() {
            builder.set_cell(idx, out);
        }
    }
    builder.extend_boundary_from(c1);
    builder.extend_boundary_from(c2);
    Ok(builder.finish())
}

/// Split a canvas into one single-pixel canvas per non-null pixel, in
/// row-major order. The stream is lazy; nothing is materialized up front.
pub fn dissect(c: &Canvas) -> impl Iterator<Item = Canvas> + '_ {
    c.iter_cells().map(move |(idx, cell)| {
        let mut b = CanvasBuilder::new(c.frame().clone());
        b.set_cell(idx, cell);
        for e in c.boundary_linear(idx) {
            b.push_boundary(idx, e.clone());
        }
        b.finish()
    })
}

/// Dissect followed by a geometric transform of each piece.
pub fn map_op<'a>(
    c: &'a Canvas,
    gamma: &'a TransformFn,
) -> impl Iterator<Item = Result<Canvas, AlgebraError>> + 'a {
    dissect(c).map(move |piece| geometric_transform(&piece, gamma, None))
}

/// Blend a stream of same-frame canvases into one, right-nested:
/// `B(C1, B(C2, B(C3, ...)))`. The empty stream yields the empty canvas.
pub fn multiway_blend(
    frame: &RasterFrame,
    canvases: impl IntoIterator<Item = Canvas>,
    f: &BlendFn,
) -> Result<Canvas, AlgebraError> {
    let mut iter = canvases.into_iter();
    let Some(first) = iter.next() else {
        return Ok(Canvas::empty(frame.clone()));
    };
    if first.frame() != frame {
        return Err(AlgebraError::FrameMismatch);
    }
    let Some(second) = iter.next() else {
        return Ok(first);
    };

    if f.associative() && (f.empty_transparent() || f.commutative()) {
        // In-place accumulation. For empty-transparent blends absent
        // operands change nothing, so a left fold equals the right-nested
        // fold by exact associativity. For the commutative count blend every
        // pixel is folded through the template at least once (as in the
        // right-nested fold, where singleton cells still meet an empty
        // operand), and all its fields are order-free.
        let normalize = !f.empty_transparent();
        let mut builder = CanvasBuilder::new(frame.clone());
        let absorb = |builder: &mut CanvasBuilder, c: Canvas| -> Result<(), AlgebraError> {
            if c.frame() != frame {
                return Err(AlgebraError::FrameMismatch);
            }
            for (idx, cell) in c.iter_cells() {
                let existing = builder.get_cell(idx);
                let out = if existing.is_empty() && !normalize {
                    cell
                } else {
                    f.apply(&existing, &cell)
                };
                builder.set_cell(idx, out);
            }
            builder.extend_boundary_from(&c);
            Ok(())
        };
        absorb(&mut builder, first)?;
        absorb(&mut builder, second)?;
        for c in iter {
            absorb(&mut builder, c)?;
        }
        Ok(builder.finish())
    } else {
        let mut all = vec![first, second];
        for c in iter {
            if c.frame() != frame {
                return Err(AlgebraError::FrameMismatch);
            }
            all.push(c);
        }
        let mut acc = all.pop().expect("at least two canvases");
        while let Some(c) = all.pop() {
            acc = blend(&c, &acc, f)?;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canvas::{rasterize, InfoSeed, ObjectInfo};
    use crate::geometry::GeometricObject;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn frame() -> RasterFrame {
        RasterFrame::build(
            Rect::from_corners(Point2::new(-2.0, -2.0), Point2::new(6.0, 6.0)),
            16,
            16,
        )
        .unwrap()
    }

    fn point_canvas(f: &RasterFrame, id: u64, p: Point2) -> Canvas {
        rasterize(&GeometricObject::from_point(p), &InfoSeed::new(id), f)
    }

    /// A cell as it looks after a point record was blended with a query
    /// region and survived the mask: row 0 from the point, row 2 from the
    /// region.
    fn selected_cell(f: &RasterFrame, point_id: u64, at: Point2, region_id: u64) -> Canvas {
        let mut b = CanvasBuilder::new(f.clone());
        let (i, j) = f.world_to_pixel(at).unwrap();
        b.set_cell(
            f.linear(i, j),
            InfoMatrix::from_rows([
                Some(ObjectInfo::new(point_id, 1.0, 0.0)),
                None,
                Some(ObjectInfo::new(region_id, 1.0, 0.0)),
            ]),
        );
        b.finish()
    }

    fn random_canvas(rng: &mut impl Rng, f: &RasterFrame) -> Canvas {
        let mut b = CanvasBuilder::new(f.clone());
        let n = rng.gen_range(0..20);
        for _ in 0..n {
            let idx = rng.gen_range(0..f.num_pixels());
            let mut rows = [None; 3];
            for row in rows.iter_mut() {
                if rng.gen_bool(0.5) {
                    *row = Some(ObjectInfo::new(
                        rng.gen_range(1..50),
                        rng.gen_range(1..10) as f64,
                        rng.gen_range(-8..8) as f64,
                    ));
                }
            }
            let m = InfoMatrix::from_rows(rows);
            if !m.is_empty() {
                b.set_cell(idx, m);
            }
        }
        b.finish()
    }

    #[test]
    fn identity_transform_is_identity() {
        let f = frame();
        let c = point_canvas(&f, 3, Point2::new(0.5, 0.5));
        let out = geometric_transform(&c, &TransformFn::identity(), None).unwrap();
        assert_eq!(out, c);
    }

    #[test]
    fn translation_moves_the_point_cell() {
        let f = frame();
        let c = point_canvas(&f, 3, Point2::new(0.5, 0.5));
        let out = geometric_transform(&c, &TransformFn::translate(1.0, 0.0), None).unwrap();
        assert_eq!(out.non_null_count(), 1);
        let (i, j) = f.world_to_pixel(Point2::new(1.5, 0.5)).unwrap();
        assert!(out.cell(i, j).row(0).is_some());
        // The exact anchor moved too.
        let entries = out.boundary_lookup(i, j).unwrap();
        assert_eq!(entries[0].geom, GeometryRef::Point(Point2::new(1.5, 0.5)));
    }

    #[test]
    fn gamma_c_relocates_to_region_id_location() {
        let f = frame();
        let c = selected_cell(&f, 42, Point2::new(3.3, 3.3), 1);
        let out = geometric_transform(&c, &TransformFn::gamma_c(), None).unwrap();
        let (i, j) = f.world_to_pixel(Point2::new(1.0, 0.0)).unwrap();
        assert!(out.cell(i, j).row(0).is_some());
        assert_eq!(out.non_null_count(), 1);
    }

    #[test]
    fn value_transform_to_empty_clears_canvas() {
        let f = frame();
        let c = point_canvas(&f, 1, Point2::new(0.0, 0.0));
        let out = value_transform(&c, &ValueFn::constant_empty());
        assert!(out.is_empty());
    }

    #[test]
    fn voronoi_step_on_empty_canvas_labels_every_pixel() {
        let f = frame();
        let seed = Point2::new(0.25, 0.5);
        let out = value_transform(&Canvas::empty(f.clone()), &ValueFn::voronoi_step(1, seed));
        assert_eq!(out.non_null_count() as u32, f.num_pixels());
        for (idx, m) in out.iter_cells() {
            let (i, j) = f.coords(idx);
            let r = m.row(2).unwrap();
            assert_eq!(r.id, 1);
            assert_eq!(r.count, crate::geometry::distance(f.pixel_center(i, j), seed));
        }
    }

    #[test]
    fn value_transform_rewrites_only_what_f_changes() {
        let f = frame();
        let c = selected_cell(&f, 7, Point2::new(1.0, 1.0), 1);
        let recolor = ValueFn::new("recolor", |_, m| {
            if let Some(r) = m.row(2) {
                m.with_row(2, Some(ObjectInfo::new(r.id, r.count, 7.0)))
            } else {
                *m
            }
        });
        let out = value_transform(&c, &recolor);
        let (idx, m) = out.iter_cells().next().unwrap();
        assert_eq!(m.row(2).unwrap().value, 7.0);
        assert_eq!(m.row(0), c.cell_linear(idx).row(0));
    }

    #[test]
    fn mask_builtins() {
        let f = frame();
        let kept = selected_cell(&f, 7, Point2::new(1.0, 1.0), 1);
        let dropped = point_canvas(&f, 7, Point2::new(1.0, 1.0));
        assert_eq!(mask(&kept, &MaskSet::Mp).non_null_count(), 1);
        assert_eq!(mask(&dropped, &MaskSet::Mp).non_null_count(), 0);
        assert_eq!(mask(&kept, &MaskSet::NonEmpty), kept);

        let mut b = CanvasBuilder::new(f.clone());
        b.set_cell(0, InfoMatrix::single(0, ObjectInfo::new(5, 4.0, 0.0)));
        let counts = b.finish();
        assert_eq!(mask(&counts, &MaskSet::Mr { count: 4.0 }).non_null_count(), 1);
        assert_eq!(mask(&counts, &MaskSet::Mr { count: 3.0 }).non_null_count(), 0);
        assert!(!MaskSet::My.eval(&InfoMatrix::EMPTY));
    }

    #[test]
    fn odot_blend_matches_selection_semantics() {
        let f = frame();
        let p = point_canvas(&f, 9, Point2::new(0.5, 0.5));
        let mut b = CanvasBuilder::new(f.clone());
        let (i, j) = f.world_to_pixel(Point2::new(0.5, 0.5)).unwrap();
        b.set_cell(f.linear(i, j), InfoMatrix::single(2, ObjectInfo::new(1, 1.0, 0.0)));
        let q = b.finish();

        let merged = blend(&p, &q, &BlendFn::Odot).unwrap();
        let cell = merged.cell(i, j);
        assert_eq!(cell.row(0).unwrap().id, 9);
        assert_eq!(cell.row(2).unwrap().id, 1);
        assert!(MaskSet::Mp.eval(&cell));

        // Point blended against an empty region canvas fails the mask.
        let outside = blend(&p, &Canvas::empty(f.clone()), &BlendFn::Odot).unwrap();
        assert!(!MaskSet::Mp.eval(&outside.cell(i, j)));
    }

    #[test]
    fn empty_blend_laws() {
        for blend_fn in [
            BlendFn::Odot,
            BlendFn::Oplus,
            BlendFn::PlusCount,
            BlendFn::PlusSum,
            BlendFn::FirstNonNull,
        ] {
            assert!(blend_fn.apply(&InfoMatrix::EMPTY, &InfoMatrix::EMPTY).is_empty());
        }
    }

    #[test]
    fn oplus_sums_region_counts() {
        let a = InfoMatrix::single(2, ObjectInfo::new(1, 1.0, 0.0));
        let b = InfoMatrix::single(2, ObjectInfo::new(2, 1.0, 0.0));
        let out = BlendFn::Oplus.apply(&a, &b);
        let r = out.row(2).unwrap();
        assert_eq!((r.id, r.count), (1, 2.0));
    }

    #[test]
    fn plus_fold_seed_law() {
        let cell = InfoMatrix::single(0, ObjectInfo::new(12, 1.0, 2.5));
        let out = BlendFn::PlusCount.apply(&InfoMatrix::EMPTY, &cell);
        assert_eq!(out.row(0).unwrap().count, 1.0);
        let out = BlendFn::PlusSum.apply(&InfoMatrix::EMPTY, &cell);
        assert_eq!(out.row(0).unwrap().value, 2.5);
    }

    #[test]
    fn gamma_d_returns_stored_destination() {
        let mut dests = HashMap::new();
        dests.insert(17u64, Point2::new(4.0, 4.0));
        let gamma = TransformFn::gamma_d(Arc::new(dests));
        let TransformFn::Informational { f, .. } = &gamma else {
            panic!("gamma_d is informational")
        };
        let cell = InfoMatrix::single(0, ObjectInfo::new(17, 1.0, 0.0));
        assert_eq!(f(&cell), Point2::new(4.0, 4.0));
    }

    #[test]
    fn dissect_splits_and_reassembles() {
        let f = frame();
        let mut pieces = Vec::new();
        for (k, p) in [(1u64, (0.5, 0.5)), (2, (1.5, 0.5)), (3, (0.5, 1.5)), (4, (2.5, 2.5))]
        {
            pieces.push(point_canvas(&f, k, Point2::new(p.0, p.1)));
        }
        let all = multiway_blend(&f, pieces, &BlendFn::FirstNonNull).unwrap();
        let split: Vec<Canvas> = dissect(&all).collect();
        assert_eq!(split.len(), 4);
        for piece in &split {
            assert_eq!(piece.non_null_count(), 1);
        }
        let back = multiway_blend(&f, split, &BlendFn::FirstNonNull).unwrap();
        assert_eq!(back, all);
        assert_eq!(dissect(&Canvas::empty(f.clone())).count(), 0);
    }

    #[test]
    fn dissect_reassembly_on_random_canvases() {
        let f = frame();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let c = random_canvas(&mut rng, &f);
            let back =
                multiway_blend(&f, dissect(&c).collect::<Vec<_>>(), &BlendFn::FirstNonNull)
                    .unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn multiway_plus_counts_coincident_points() {
        let f = frame();
        let at = Point2::new(1.5, 1.5);
        let pieces: Vec<Canvas> = (1..=3).map(|k| point_canvas(&f, k, at)).collect();
        let out = multiway_blend(&f, pieces.clone(), &BlendFn::PlusCount).unwrap();
        let (i, j) = f.world_to_pixel(at).unwrap();
        assert_eq!(out.cell(i, j).row(0).unwrap().count, 3.0);

        // Any permutation gives the identical canvas.
        let mut perm = pieces;
        perm.swap(0, 2);
        let out2 = multiway_blend(&f, perm, &BlendFn::PlusCount).unwrap();
        assert_eq!(out, out2);
    }

    #[test]
    fn count_aggregation_pipeline_counts_four_points() {
        // Four selected points, relocated by the accumulation transform and
        // folded with the count blend: the cell at world (1, 0) counts 4.
        let f = frame();
        let survivors: Vec<Canvas> = [(1u64, 0.1), (2, 0.7), (3, 2.3), (4, 4.1)]
            .iter()
            .map(|&(id, x)| selected_cell(&f, id, Point2::new(x, 3.0), 1))
            .collect();
        let merged = multiway_blend(&f, survivors, &BlendFn::FirstNonNull).unwrap();
        let moved: Result<Vec<Canvas>, AlgebraError> =
            map_op(&merged, &TransformFn::gamma_c()).collect();
        let count = multiway_blend(&f, moved.unwrap(), &BlendFn::PlusCount).unwrap();
        let (i, j) = f.world_to_pixel(Point2::new(1.0, 0.0)).unwrap();
        assert_eq!(count.cell(i, j).row(0).unwrap().count, 4.0);
    }

    #[test]
    fn map_with_constant_gamma_stacks_outputs() {
        let f = frame();
        let pts = [(1u64, (0.5, 0.5)), (2, (1.5, 0.5)), (3, (2.5, 1.5))];
        let pieces: Vec<Canvas> = pts
            .iter()
            .map(|&(k, p)| point_canvas(&f, k, Point2::new(p.0, p.1)))
            .collect();
        let all = multiway_blend(&f, pieces, &BlendFn::FirstNonNull).unwrap();
        let origin = f.world_to_pixel(Point2::new(0.0, 0.0)).unwrap();
        let moved: Vec<Canvas> = map_op(&all, &TransformFn::gamma_0())
            .collect::<Result<_, _>>()
            .unwrap();
        assert_eq!(moved.len(), 3);
        for c in &moved {
            assert_eq!(c.non_null_count(), 1);
            assert!(c.cell(origin.0, origin.1).row(0).is_some());
        }
        // Identity map is dissect.
        let ident: Vec<Canvas> = map_op(&all, &TransformFn::identity())
            .collect::<Result<_, _>>()
            .unwrap();
        let direct: Vec<Canvas> = dissect(&all).collect();
        assert_eq!(ident, direct);
        assert_eq!(map_op(&Canvas::empty(f.clone()), &TransformFn::identity()).count(), 0);
    }

    #[test]
    fn transform_collision_without_resolver_errors() {
        let f = frame();
        let two = multiway_blend(
            &f,
            vec![
                point_canvas(&f, 1, Point2::new(0.5, 0.5)),
                point_canvas(&f, 2, Point2::new(1.5, 1.5)),
            ],
            &BlendFn::FirstNonNull,
        )
        .unwrap();
        let err = geometric_transform(&two, &TransformFn::gamma_0(), None);
        assert!(matches!(err, Err(AlgebraError::TransformCollision { .. })));
        let ok = geometric_transform(&two, &TransformFn::gamma_0(), Some(&BlendFn::PlusCount));
        assert_eq!(ok.unwrap().non_null_count(), 1);
    }

    #[test]
    fn mask_idempotence_on_random_canvases() {
        let f = frame();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let masks = [
            MaskSet::NonEmpty,
            MaskSet::Mp,
            MaskSet::MpAny,
            MaskSet::MpAll { count: 2.0 },
            MaskSet::My,
            MaskSet::Mr { count: 3.0 },
        ];
        for _ in 0..100 {
            let c = random_canvas(&mut rng, &f);
            for m in &masks {
                let once = mask(&c, m);
                let twice = mask(&once, m);
                assert_eq!(once, twice, "mask {m:?} not idempotent");
            }
        }
    }

    #[test]
    fn odot_row_laws_against_empty_canvas() {
        let f = frame();
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..50 {
            let c = random_canvas(&mut rng, &f);
            let right = blend(&c, &Canvas::empty(f.clone()), &BlendFn::Odot).unwrap();
            for (idx, m) in right.iter_cells() {
                assert_eq!(m.row(0), c.cell_linear(idx).row(0));
                assert_eq!(m.row(2), None);
            }
            // Every cell of c with a row 0 must survive.
            for (idx, m) in c.iter_cells() {
                if m.row(0).is_some() {
                    assert_eq!(right.cell_linear(idx).row(0), m.row(0));
                }
            }
            let left = blend(&Canvas::empty(f.clone()), &c, &BlendFn::Odot).unwrap();
            for (idx, m) in left.iter_cells() {
                assert_eq!(m.row(2), c.cell_linear(idx).row(2));
                assert_eq!(m.row(0), None);
            }
        }
    }

    #[test]
    fn unknown_builtin_is_rejected() {
        let args = BuiltinArgs::default();
        assert!(matches!(
            builtin("m_q", &args),
            Err(AlgebraError::UnknownBuiltin(_))
        ));
        assert!(matches!(
            builtin("m_r", &args),
            Err(AlgebraError::MissingBuiltinArg(_))
        ));
        assert!(matches!(builtin("oplus", &args), Ok(ParamFn::Blend(_))));
    }
}
