//! Parameter functions for the canvas operators: blend functions, mask
//! sets, geometric transforms and value transforms, including every built-in
//! the query plans use.
//!
//! Null-operand convention for the built-in blends: a row that a template
//! copies verbatim stays null when its source row is null; rows combined
//! arithmetically treat a null operand's count/value as 0 and take the id
//! from the non-null operand. Blending two empty matrices always yields the
//! empty matrix, which lets sparse storage skip untouched pixels.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::canvas::{InfoMatrix, ObjectInfo};
use crate::geometry::{distance, Point2};

type Row = Option<ObjectInfo>;

fn row_count(r: Row) -> f64 {
    r.map_or(0.0, |x| x.count)
}

fn row_value(r: Row) -> f64 {
    r.map_or(0.0, |x| x.value)
}

/// Total order on rows used to resolve same-pixel row conflicts in the
/// commutative count blend: lexicographic on (id, count, value).
fn row_min(a: ObjectInfo, b: ObjectInfo) -> ObjectInfo {
    let ord = a
        .id
        .cmp(&b.id)
        .then(a.count.total_cmp(&b.count))
        .then(a.value.total_cmp(&b.value));
    if ord == std::cmp::Ordering::Greater {
        b
    } else {
        a
    }
}

fn sym_merge(a: Row, b: Row) -> Row {
    match (a, b) {
        (None, None) => None,
        (Some(x), None) => Some(x),
        (None, Some(y)) => Some(y),
        (Some(x), Some(y)) => Some(row_min(x, y)),
    }
}

type BlendClosure = Arc<dyn Fn(&InfoMatrix, &InfoMatrix) -> InfoMatrix + Send + Sync>;

/// A per-pixel merge of two information matrices.
#[derive(Clone)]
pub enum BlendFn {
    /// Point-over-region merge: row 0 from the left operand, row 2 from the
    /// right.
    Odot,
    /// Region overlay: row 2 keeps the left id and value and sums counts.
    Oplus,
    /// Count accumulator: row 0 becomes (0, sum of counts, 0); conflicting
    /// row-2 entries resolve to the smallest, keeping the blend commutative.
    PlusCount,
    /// Sum accumulator: like `PlusCount` but row 0's value sums too. Not
    /// flagged associative because f64 sums depend on grouping; multiway
    /// folds evaluate it in the exact right-nested order.
    PlusSum,
    /// Keeps the left matrix when non-empty, otherwise the right.
    FirstNonNull,
    Custom {
        name: String,
        f: BlendClosure,
        commutative: bool,
        associative: bool,
        /// True when blending with the empty matrix is the identity in both
        /// positions, letting multiway folds skip absent operands.
        empty_transparent: bool,
    },
}

impl fmt::Debug for BlendFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl BlendFn {
    pub fn name(&self) -> &str {
        match self {
            BlendFn::Odot => "odot",
            BlendFn::Oplus => "oplus",
            BlendFn::PlusCount => "plus",
            BlendFn::PlusSum => "plus_sum",
            BlendFn::FirstNonNull => "first_non_null",
            BlendFn::Custom { name, .. } => name,
        }
    }

    pub fn commutative(&self) -> bool {
        match self {
            BlendFn::PlusCount | BlendFn::PlusSum => true,
            BlendFn::Custom { commutative, .. } => *commutative,
            _ => false,
        }
    }

    pub fn associative(&self) -> bool {
        match self {
            BlendFn::Odot | BlendFn::Oplus | BlendFn::PlusCount | BlendFn::FirstNonNull => true,
            BlendFn::PlusSum => false,
            BlendFn::Custom { associative, .. } => *associative,
        }
    }

    pub fn empty_transparent(&self) -> bool {
        match self {
            BlendFn::Oplus | BlendFn::FirstNonNull => true,
            BlendFn::Custom {
                empty_transparent, ..
            } => *empty_transparent,
            _ => false,
        }
    }

    pub fn apply(&self, s1: &InfoMatrix, s2: &InfoMatrix) -> InfoMatrix {
        match self {
            BlendFn::Odot => InfoMatrix::from_rows([s1.row(0), None, s2.row(2)]),
            BlendFn::Oplus => {
                let row2 = match (s1.row(2), s2.row(2)) {
                    (None, None) => None,
                    (Some(x), None) => Some(x),
                    (None, Some(y)) => Some(y),
                    (Some(x), Some(y)) => {
                        Some(ObjectInfo::new(x.id, x.count + y.count, x.value))
                    }
                };
                InfoMatrix::from_rows([None, None, row2])
            }
            BlendFn::PlusCount => {
                let row0 = match (s1.row(0), s2.row(0)) {
                    (None, None) => None,
                    (a, b) => Some(ObjectInfo::new(0, row_count(a) + row_count(b), 0.0)),
                };
                InfoMatrix::from_rows([row0, None, sym_merge(s1.row(2), s2.row(2))])
            }
            BlendFn::PlusSum => {
                let row0 = match (s1.row(0), s2.row(0)) {
                    (None, None) => None,
                    (a, b) => Some(ObjectInfo::new(
                        0,
                        row_count(a) + row_count(b),
                        row_value(a) + row_value(b),
                    )),
                };
                InfoMatrix::from_rows([row0, None, sym_merge(s1.row(2), s2.row(2))])
            }
            BlendFn::FirstNonNull => {
                if !s1.is_empty() {
                    *s1
                } else {
                    *s2
                }
            }
            BlendFn::Custom { f, .. } => f(s1, s2),
        }
    }
}

/// A decidable per-cell predicate; every built-in rejects the empty matrix.
#[derive(Clone)]
pub enum MaskSet {
    /// Keeps any non-empty cell.
    NonEmpty,
    /// Row 0 present and row 2 carries the query region id 1.
    Mp,
    /// Row 0 present and at least one region covers the pixel.
    MpAny,
    /// Row 0 present and exactly `count` regions cover the pixel (the
    /// conjunction variant of the multi-region mask).
    MpAll { count: f64 },
    /// Row 0 present and row 2 carries the given region id.
    MpId { region_id: u64 },
    /// Two regions incident on the pixel.
    My,
    /// Row 0 count equals `count`.
    Mr { count: f64 },
    Custom {
        name: String,
        f: Arc<dyn Fn(&InfoMatrix) -> bool + Send + Sync>,
    },
}

impl fmt::Debug for MaskSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl MaskSet {
    pub fn name(&self) -> &str {
        match self {
            MaskSet::NonEmpty => "non_empty",
            MaskSet::Mp => "m_p",
            MaskSet::MpAny => "m_p_any",
            MaskSet::MpAll { .. } => "m_p_all",
            MaskSet::MpId { .. } => "m_p_id",
            MaskSet::My => "m_y",
            MaskSet::Mr { .. } => "m_r",
            MaskSet::Custom { name, .. } => name,
        }
    }

    pub fn eval(&self, m: &InfoMatrix) -> bool {
        match self {
            MaskSet::NonEmpty => !m.is_empty(),
            MaskSet::Mp => m.row(0).is_some() && m.row(2).map_or(false, |r| r.id == 1),
            MaskSet::MpAny => m.row(0).is_some() && m.row(2).map_or(false, |r| r.count >= 1.0),
            MaskSet::MpAll { count } => {
                m.row(0).is_some() && m.row(2).map_or(false, |r| r.count == *count)
            }
            MaskSet::MpId { region_id } => {
                m.row(0).is_some() && m.row(2).map_or(false, |r| r.id == *region_id)
            }
            MaskSet::My => m.row(2).map_or(false, |r| r.count == 2.0),
            MaskSet::Mr { count } => m.row(0).map_or(false, |r| r.count == *count),
            MaskSet::Custom { f, .. } => f(m),
        }
    }
}

/// An invertible affine map of the plane, the positional transforms that
/// support exact boundary carry-over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine2 {
    /// Row-major 2x2 linear part.
    pub m: [f64; 4],
    pub t: [f64; 2],
}

impl Affine2 {
    pub fn identity() -> Self {
        Affine2 {
            m: [1.0, 0.0, 0.0, 1.0],
            t: [0.0, 0.0],
        }
    }

    pub fn translation(dx: f64, dy: f64) -> Self {
        Affine2 {
            m: [1.0, 0.0, 0.0, 1.0],
            t: [dx, dy],
        }
    }

    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Affine2 {
            m: [c, -s, s, c],
            t: [0.0, 0.0],
        }
    }

    pub fn apply(&self, p: Point2) -> Point2 {
        Point2::new(
            self.m[0] * p.x + self.m[1] * p.y + self.t[0],
            self.m[2] * p.x + self.m[3] * p.y + self.t[1],
        )
    }

    /// Axis-aligned without reflection: rectangles stay rectangles.
    pub fn is_axis_aligned(&self) -> bool {
        self.m[1] == 0.0 && self.m[2] == 0.0 && self.m[0] > 0.0 && self.m[3] > 0.0
    }

    /// Uniform scale factor when the map is a similarity (circles stay
    /// circles), else `None`.
    pub fn similarity_scale(&self) -> Option<f64> {
        let [a, b, c, d] = self.m;
        let r1 = a * a + b * b;
        let r2 = c * c + d * d;
        if r1 == r2 && a * c + b * d == 0.0 && r1 > 0.0 {
            Some(r1.sqrt())
        } else {
            None
        }
    }
}

type PosClosure = Arc<dyn Fn(Point2) -> Point2 + Send + Sync>;
type InfoClosure = Arc<dyn Fn(&InfoMatrix) -> Point2 + Send + Sync>;

/// Relocation rule for canvas content: positional maps move content by its
/// current location, informational maps by its stored matrix.
#[derive(Clone)]
pub enum TransformFn {
    Positional {
        name: String,
        f: PosClosure,
        /// Present when the map is affine; enables exact boundary carry-over
        /// for non-point geometry.
        affine: Option<Affine2>,
    },
    Informational {
        name: String,
        f: InfoClosure,
    },
}

impl fmt::Debug for TransformFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl TransformFn {
    pub fn name(&self) -> &str {
        match self {
            TransformFn::Positional { name, .. } => name,
            TransformFn::Informational { name, .. } => name,
        }
    }

    pub fn identity() -> Self {
        TransformFn::affine("identity", Affine2::identity())
    }

    pub fn translate(dx: f64, dy: f64) -> Self {
        TransformFn::affine("translate", Affine2::translation(dx, dy))
    }

    pub fn affine(name: &str, a: Affine2) -> Self {
        TransformFn::Positional {
            name: name.to_string(),
            f: Arc::new(move |p| a.apply(p)),
            affine: Some(a),
        }
    }

    pub fn positional(name: &str, f: impl Fn(Point2) -> Point2 + Send + Sync + 'static) -> Self {
        TransformFn::Positional {
            name: name.to_string(),
            f: Arc::new(f),
            affine: None,
        }
    }

    pub fn informational(
        name: &str,
        f: impl Fn(&InfoMatrix) -> Point2 + Send + Sync + 'static,
    ) -> Self {
        TransformFn::Informational {
            name: name.to_string(),
            f: Arc::new(f),
        }
    }

    /// Moves a cell to the world location given by its row-2 id, the
    /// accumulation transform of the aggregation plans.
    pub fn gamma_c() -> Self {
        TransformFn::informational("gamma_c", |m| {
            Point2::new(m.row(2).map_or(0.0, |r| r.id as f64), 0.0)
        })
    }

    /// Constant transform to the origin.
    pub fn gamma_0() -> Self {
        TransformFn::informational("gamma_0", |_| Point2::new(0.0, 0.0))
    }

    /// Looks up the destination location of the record named by row 0's id;
    /// cells without a known destination are dropped by the transform.
    pub fn gamma_d(destinations: Arc<HashMap<u64, Point2>>) -> Self {
        TransformFn::informational("gamma_d", move |m| {
            m.row(0)
                .and_then(|r| destinations.get(&r.id).copied())
                .unwrap_or(Point2::new(f64::NAN, f64::NAN))
        })
    }
}

type ValueClosure = Arc<dyn Fn(Point2, &InfoMatrix) -> InfoMatrix + Send + Sync>;

/// Per-pixel rewrite of the information matrix; applied to every pixel of
/// the frame, so it may create information on empty cells.
#[derive(Clone)]
pub struct ValueFn {
    name: String,
    f: ValueClosure,
}

impl fmt::Debug for ValueFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl ValueFn {
    pub fn new(name: &str, f: impl Fn(Point2, &InfoMatrix) -> InfoMatrix + Send + Sync + 'static) -> Self {
        ValueFn {
            name: name.to_string(),
            f: Arc::new(f),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Maps every cell to the empty matrix.
    pub fn constant_empty() -> Self {
        ValueFn::new("constant_empty", |_, _| InfoMatrix::EMPTY)
    }

    /// One incremental nearest-seed step: empty cells adopt the seed, cells
    /// whose recorded distance beats the new one stay (ties keep the earlier,
    /// lower-indexed seed), others are overwritten.
    pub fn voronoi_step(index: u64, seed: Point2) -> Self {
        ValueFn::new("voronoi_step", move |p, s| {
            let d2 = distance(p, seed);
            let row2 = match s.row(2) {
                None => ObjectInfo::new(index, d2, 0.0),
                Some(r) if r.count <= d2 => ObjectInfo::new(r.id, r.count, 0.0),
                Some(_) => ObjectInfo::new(index, d2, 0.0),
            };
            InfoMatrix::from_rows([None, None, Some(row2)])
        })
    }

    pub fn apply(&self, p: Point2, m: &InfoMatrix) -> InfoMatrix {
        (self.f)(p, m)
    }
}

/// Any parameter function, as returned by the name-based lookup.
#[derive(Debug, Clone)]
pub enum ParamFn {
    Blend(BlendFn),
    Mask(MaskSet),
    Transform(TransformFn),
}

/// Context for parameter functions that need it.
#[derive(Debug, Clone, Default)]
pub struct BuiltinArgs {
    /// Count argument for `m_r` / `m_p_all`.
    pub k: Option<f64>,
    /// Region id for `m_p_id`.
    pub region_id: Option<u64>,
    /// Record destinations for `gamma_d`.
    pub destinations: Option<Arc<HashMap<u64, Point2>>>,
}

/// Look up a built-in parameter function by name.
pub fn builtin(name: &str, args: &BuiltinArgs) -> Result<ParamFn, super::AlgebraError> {
    let missing = || super::AlgebraError::MissingBuiltinArg(name.to_string());
    Ok(match name {
        "odot" => ParamFn::Blend(BlendFn::Odot),
        "oplus" => ParamFn::Blend(BlendFn::Oplus),
        "plus" => ParamFn::Blend(BlendFn::PlusCount),
        "plus_sum" => ParamFn::Blend(BlendFn::PlusSum),
        "first_non_null" => ParamFn::Blend(BlendFn::FirstNonNull),
        "m_p" => ParamFn::Mask(MaskSet::Mp),
        "m_p_any" => ParamFn::Mask(MaskSet::MpAny),
        "m_p_all" => ParamFn::Mask(MaskSet::MpAll {
            count: args.k.ok_or_else(missing)?,
        }),
        "m_p_id" => ParamFn::Mask(MaskSet::MpId {
            region_id: args.region_id.ok_or_else(missing)?,
        }),
        "m_y" => ParamFn::Mask(MaskSet::My),
        "m_r" => ParamFn::Mask(MaskSet::Mr {
            count: args.k.ok_or_else(missing)?,
        }),
        "gamma_c" => ParamFn::Transform(TransformFn::gamma_c()),
        "gamma_0" => ParamFn::Transform(TransformFn::gamma_0()),
        "gamma_d" => ParamFn::Transform(TransformFn::gamma_d(
            args.destinations.clone().ok_or_else(missing)?,
        )),
        other => return Err(super::AlgebraError::UnknownBuiltin(other.to_string())),
    })
}
