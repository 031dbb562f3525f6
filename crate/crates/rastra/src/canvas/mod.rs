//! The discrete canvas: a raster frame of object-information matrices plus a
//! boundary index that links boundary pixels back to exact vector geometry.
//!
//! Pixel `(i, j)` of a frame covers the half-open world box
//! `[x_min + i*dx, x_min + (i+1)*dx) x [y_min + j*dy, y_min + (j+1)*dy)`;
//! cells outside the frame are the empty matrix by definition. Fill values
//! are sampled at pixel centers, while the boundary index is conservative:
//! it records every pixel whose *closed* box is touched by a geometry
//! boundary, so no boundary pixel is ever missed. Downstream refinement uses
//! the indexed exact geometry to restore vector-exact answers.

pub(crate) mod raster;

pub use raster::{rasterize, utility_canvas, InfoSeed, UtilityShape};

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::geometry::{
    point_in_polygon, Containment, Point2, Polygon, Polyline, Rect,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CanvasError {
    #[error("frame extent is degenerate")]
    DegenerateExtent,
    #[error("frame of {width}x{height} pixels is too large")]
    FrameTooLarge { width: u32, height: u32 },
    #[error("pixel ({i}, {j}) is outside the frame")]
    PixelOutOfFrame { i: u32, j: u32 },
    #[error("circle radius must be positive")]
    NonPositiveRadius,
    #[error("half space needs a non-zero normal")]
    DegenerateHalfSpace,
}

/// One non-null row of the information matrix. `count` and `value` are
/// reals per the object-information set; count blends keep `count`
/// integer-valued, which f64 sums reproduce exactly at any workload size
/// this engine targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectInfo {
    pub id: u64,
    pub count: f64,
    pub value: f64,
}

impl ObjectInfo {
    pub fn new(id: u64, count: f64, value: f64) -> Self {
        ObjectInfo { id, count, value }
    }
}

/// The value a canvas assigns to a pixel: one optional (id, count, value)
/// row per primitive dimension. The all-null matrix is the canonical empty
/// cell; equality is row-wise.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InfoMatrix {
    rows: [Option<ObjectInfo>; 3],
}

impl InfoMatrix {
    pub const EMPTY: InfoMatrix = InfoMatrix { rows: [None; 3] };

    pub fn single(dim: usize, info: ObjectInfo) -> Self {
        let mut m = InfoMatrix::EMPTY;
        m.rows[dim] = Some(info);
        m
    }

    pub fn from_rows(rows: [Option<ObjectInfo>; 3]) -> Self {
        InfoMatrix { rows }
    }

    pub fn row(&self, dim: usize) -> Option<ObjectInfo> {
        self.rows[dim]
    }

    pub fn set_row(&mut self, dim: usize, info: Option<ObjectInfo>) {
        self.rows[dim] = info;
    }

    pub fn with_row(mut self, dim: usize, info: Option<ObjectInfo>) -> Self {
        self.rows[dim] = info;
        self
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(Option::is_none)
    }

    fn dump(&self, out: &mut String) {
        out.push('[');
        for (d, row) in self.rows.iter().enumerate() {
            if d > 0 {
                out.push('|');
            }
            match row {
                None => out.push('-'),
                Some(r) => {
                    let _ = write!(out, "{}:{}:{}", r.id, r.count, r.value);
                }
            }
        }
        out.push(']');
    }
}

/// World-to-pixel mapping: an extent in world coordinates discretized into
/// `width x height` pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterFrame {
    extent: Rect,
    width: u32,
    height: u32,
}

/// Hard cap on pixels per frame so linear indices fit comfortably in `u32`.
const MAX_PIXELS: u64 = 1 << 31;

impl RasterFrame {
    pub fn build(extent: Rect, width: u32, height: u32) -> Result<Self, CanvasError> {
        if extent.is_degenerate() || !extent.min.is_finite() || !extent.max.is_finite() {
            return Err(CanvasError::DegenerateExtent);
        }
        if width == 0 || height == 0 || (width as u64) * (height as u64) > MAX_PIXELS {
            return Err(CanvasError::FrameTooLarge { width, height });
        }
        Ok(RasterFrame {
            extent,
            width,
            height,
        })
    }

    pub fn extent(&self) -> Rect {
        self.extent
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn num_pixels(&self) -> u32 {
        self.width * self.height
    }

    pub fn pixel_size(&self) -> (f64, f64) {
        (
            self.extent.width() / self.width as f64,
            self.extent.height() / self.height as f64,
        )
    }

    pub fn diagonal(&self) -> f64 {
        (self.extent.width().powi(2) + self.extent.height().powi(2)).sqrt()
    }

    /// Pixel containing a world point under the half-open box rule, `None`
    /// outside the extent.
    pub fn world_to_pixel(&self, p: Point2) -> Option<(u32, u32)> {
        if p.x < self.extent.min.x
            || p.x >= self.extent.max.x
            || p.y < self.extent.min.y
            || p.y >= self.extent.max.y
        {
            return None;
        }
        let (dx, dy) = self.pixel_size();
        let i = (((p.x - self.extent.min.x) / dx) as i64).clamp(0, self.width as i64 - 1);
        let j = (((p.y - self.extent.min.y) / dy) as i64).clamp(0, self.height as i64 - 1);
        Some((i as u32, j as u32))
    }

    pub fn pixel_center(&self, i: u32, j: u32) -> Point2 {
        let (dx, dy) = self.pixel_size();
        Point2::new(
            self.extent.min.x + (i as f64 + 0.5) * dx,
            self.extent.min.y + (j as f64 + 0.5) * dy,
        )
    }

    /// The closed world box of a pixel, used by conservative boundary tests.
    pub fn pixel_box(&self, i: u32, j: u32) -> Rect {
        let (dx, dy) = self.pixel_size();
        Rect::new(
            Point2::new(
                self.extent.min.x + i as f64 * dx,
                self.extent.min.y + j as f64 * dy,
            ),
            Point2::new(
                self.extent.min.x + (i as f64 + 1.0) * dx,
                self.extent.min.y + (j as f64 + 1.0) * dy,
            ),
        )
    }

    pub fn linear(&self, i: u32, j: u32) -> u32 {
        j * self.width + i
    }

    pub fn coords(&self, idx: u32) -> (u32, u32) {
        (idx % self.width, idx / self.width)
    }

    pub fn in_frame(&self, i: u32, j: u32) -> bool {
        i < self.width && j < self.height
    }
}

/// Exact geometry referenced from the boundary index. Analytic shapes store
/// their formula so refinement never tests against a polygonal approximation.
#[derive(Debug, Clone, PartialEq)]
pub enum GeometryRef {
    Point(Point2),
    Line(Arc<Polyline>),
    Region(Arc<Polygon>),
    Circle { center: Point2, radius: f64 },
    RectRegion(Rect),
    HalfSpace { a: f64, b: f64, c: f64 },
}

impl GeometryRef {
    /// Closed-region membership, the refinement predicate. Points and lines
    /// are not regions and never contain anything.
    pub fn contains(&self, p: Point2) -> bool {
        match self {
            GeometryRef::Point(_) | GeometryRef::Line(_) => false,
            GeometryRef::Region(poly) => point_in_polygon(p, poly) != Containment::Outside,
            GeometryRef::Circle { center, radius } => {
                let dx = p.x - center.x;
                let dy = p.y - center.y;
                dx * dx + dy * dy <= radius * radius
            }
            GeometryRef::RectRegion(r) => r.contains(p),
            GeometryRef::HalfSpace { a, b, c } => a * p.x + b * p.y + c <= 0.0,
        }
    }

    /// The fill predicate sampled at pixel centers. For polygons (and the
    /// rectangle, which is rasterized through the same parity fill) this is
    /// the strict interior; for analytic shapes it matches `contains`.
    pub fn center_covered(&self, p: Point2) -> bool {
        match self {
            GeometryRef::Region(poly) => point_in_polygon(p, poly) == Containment::Inside,
            GeometryRef::RectRegion(r) => r.contains_strict(p),
            other => other.contains(p),
        }
    }
}

/// One boundary-index entry: which record's geometry of which dimension
/// touches the pixel, with a handle to its exact shape.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryEntry {
    pub id: u64,
    pub dim: u8,
    pub geom: GeometryRef,
}

/// Cell storage. Semantics are always dense over the frame; representation
/// adapts to occupancy: point workloads leave canvases nearly empty, fills
/// are uniform or dense.
#[derive(Debug, Clone)]
enum CellStore {
    Sparse(BTreeMap<u32, InfoMatrix>),
    Dense { cells: Vec<InfoMatrix>, occupied: usize },
    Uniform { matrix: InfoMatrix, pixels: Vec<u32> },
}

const DENSE_OCCUPANCY: f64 = 0.10;

impl CellStore {
    fn get(&self, idx: u32) -> InfoMatrix {
        match self {
            CellStore::Sparse(map) => map.get(&idx).copied().unwrap_or(InfoMatrix::EMPTY),
            CellStore::Dense { cells, .. } => cells[idx as usize],
            CellStore::Uniform { matrix, pixels } => {
                if pixels.binary_search(&idx).is_ok() {
                    *matrix
                } else {
                    InfoMatrix::EMPTY
                }
            }
        }
    }

    fn len(&self) -> usize {
        match self {
            CellStore::Sparse(map) => map.len(),
            CellStore::Dense { occupied, .. } => *occupied,
            CellStore::Uniform { pixels, .. } => pixels.len(),
        }
    }
}

/// Iterator over non-null cells in row-major pixel order.
pub struct CellIter<'a> {
    inner: CellIterInner<'a>,
}

enum CellIterInner<'a> {
    Sparse(std::collections::btree_map::Iter<'a, u32, InfoMatrix>),
    Dense {
        cells: &'a [InfoMatrix],
        next: usize,
    },
    Uniform {
        matrix: &'a InfoMatrix,
        pixels: std::slice::Iter<'a, u32>,
    },
}

impl<'a> Iterator for CellIter<'a> {
    type Item = (u32, InfoMatrix);

    fn next(&mut self) -> Option<(u32, InfoMatrix)> {
        match &mut self.inner {
            CellIterInner::Sparse(it) => it.next().map(|(k, v)| (*k, *v)),
            CellIterInner::Dense { cells, next } => {
                while *next < cells.len() {
                    let idx = *next;
                    *next += 1;
                    if !cells[idx].is_empty() {
                        return Some((idx as u32, cells[idx]));
                    }
                }
                None
            }
            CellIterInner::Uniform { matrix, pixels } => {
                pixels.next().map(|&idx| (idx, **matrix))
            }
        }
    }
}

/// An immutable canvas: frame, cells and boundary index.
#[derive(Debug, Clone)]
pub struct Canvas {
    frame: RasterFrame,
    cells: CellStore,
    boundary: HashMap<u32, Vec<BoundaryEntry>>,
}

impl Canvas {
    pub fn empty(frame: RasterFrame) -> Self {
        Canvas {
            frame,
            cells: CellStore::Sparse(BTreeMap::new()),
            boundary: HashMap::new(),
        }
    }

    pub fn frame(&self) -> &RasterFrame {
        &self.frame
    }

    /// Cell value at a pixel; out-of-frame pixels are empty by definition.
    pub fn cell(&self, i: u32, j: u32) -> InfoMatrix {
        if !self.frame.in_frame(i, j) {
            return InfoMatrix::EMPTY;
        }
        self.cells.get(self.frame.linear(i, j))
    }

    pub fn cell_linear(&self, idx: u32) -> InfoMatrix {
        self.cells.get(idx)
    }

    pub fn iter_cells(&self) -> CellIter<'_> {
        let inner = match &self.cells {
            CellStore::Sparse(map) => CellIterInner::Sparse(map.iter()),
            CellStore::Dense { cells, .. } => CellIterInner::Dense { cells, next: 0 },
            CellStore::Uniform { matrix, pixels } => CellIterInner::Uniform {
                matrix,
                pixels: pixels.iter(),
            },
        };
        CellIter { inner }
    }

    pub fn non_null_count(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.len() == 0
    }

    /// All boundary entries at a pixel; empty for interior pixels.
    pub fn boundary_lookup(&self, i: u32, j: u32) -> Result<&[BoundaryEntry], CanvasError> {
        if !self.frame.in_frame(i, j) {
            return Err(CanvasError::PixelOutOfFrame { i, j });
        }
        Ok(self.boundary_linear(self.frame.linear(i, j)))
    }

    pub fn boundary_linear(&self, idx: u32) -> &[BoundaryEntry] {
        self.boundary.get(&idx).map_or(&[], Vec::as_slice)
    }

    pub fn boundary_pixel_count(&self) -> usize {
        self.boundary.len()
    }

    pub fn boundary_pixels(&self) -> impl Iterator<Item = (u32, &[BoundaryEntry])> {
        self.boundary.iter().map(|(k, v)| (*k, v.as_slice()))
    }

    /// Sorted boundary pixel indices, for deterministic passes.
    pub fn boundary_pixels_sorted(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.boundary.keys().copied().collect();
        v.sort_unstable();
        v
    }

    /// Text dump of cells and boundary entries, one pixel per line, for
    /// debugging and test fixtures.
    pub fn dump_text(&self) -> String {
        let mut out = String::new();
        for (idx, m) in self.iter_cells() {
            let (i, j) = self.frame.coords(idx);
            let _ = write!(out, "cell {} {} ", i, j);
            m.dump(&mut out);
            out.push('\n');
        }
        for idx in self.boundary_pixels_sorted() {
            let (i, j) = self.frame.coords(idx);
            for e in self.boundary_linear(idx) {
                let kind = match &e.geom {
                    GeometryRef::Point(_) => "point",
                    GeometryRef::Line(_) => "line",
                    GeometryRef::Region(_) => "polygon",
                    GeometryRef::Circle { .. } => "circle",
                    GeometryRef::RectRegion(_) => "rect",
                    GeometryRef::HalfSpace { .. } => "halfspace",
                };
                let _ = writeln!(out, "boundary {} {} id={} dim={} {}", i, j, e.id, e.dim, kind);
            }
        }
        out
    }
}

fn same_entries(a: &[BoundaryEntry], b: &[BoundaryEntry]) -> bool {
    // Multiset comparison; the per-pixel entry order is incidental.
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    'outer: for e in a {
        for (i, f) in b.iter().enumerate() {
            if !used[i] && e == f {
                used[i] = true;
                continue 'outer;
            }
        }
        return false;
    }
    true
}

impl PartialEq for Canvas {
    fn eq(&self, other: &Self) -> bool {
        if self.frame != other.frame || self.non_null_count() != other.non_null_count() {
            return false;
        }
        if !self.iter_cells().eq(other.iter_cells()) {
            return false;
        }
        if self.boundary.len() != other.boundary.len() {
            return false;
        }
        self.boundary
            .iter()
            .all(|(k, v)| other.boundary.get(k).map_or(false, |w| same_entries(v, w)))
    }
}

/// Accumulates cells and boundary entries, then picks the best storage.
#[derive(Debug)]
pub struct CanvasBuilder {
    frame: RasterFrame,
    cells: BTreeMap<u32, InfoMatrix>,
    boundary: HashMap<u32, Vec<BoundaryEntry>>,
}

impl CanvasBuilder {
    pub fn new(frame: RasterFrame) -> Self {
        CanvasBuilder {
            frame,
            cells: BTreeMap::new(),
            boundary: HashMap::new(),
        }
    }

    pub fn frame(&self) -> &RasterFrame {
        &self.frame
    }

    pub fn get_cell(&self, idx: u32) -> InfoMatrix {
        self.cells.get(&idx).copied().unwrap_or(InfoMatrix::EMPTY)
    }

    /// Set a cell, removing it when the matrix is empty.
    pub fn set_cell(&mut self, idx: u32, m: InfoMatrix) {
        if m.is_empty() {
            self.cells.remove(&idx);
        } else {
            self.cells.insert(idx, m);
        }
    }

    /// Rewrite a cell through `f`, starting from the empty matrix if absent.
    pub fn update_cell(&mut self, idx: u32, f: impl FnOnce(InfoMatrix) -> InfoMatrix) {
        let cur = self.get_cell(idx);
        self.set_cell(idx, f(cur));
    }

    pub fn add_boundary(&mut self, idx: u32, entry: BoundaryEntry) {
        let v = self.boundary.entry(idx).or_default();
        if !v.contains(&entry) {
            v.push(entry);
        }
    }

    /// Append without the duplicate scan; used for bulk unions where entries
    /// are already distinct (e.g. per-record point anchors).
    pub fn push_boundary(&mut self, idx: u32, entry: BoundaryEntry) {
        self.boundary.entry(idx).or_default().push(entry);
    }

    /// Union another canvas's boundary index into this builder.
    pub fn extend_boundary_from(&mut self, c: &Canvas) {
        for (idx, entries) in c.boundary_pixels() {
            self.boundary
                .entry(idx)
                .or_default()
                .extend(entries.iter().cloned());
        }
    }

    pub fn finish(self) -> Canvas {
        let n = self.cells.len();
        let pixels = self.frame.num_pixels() as usize;
        let cells = if n == 0 {
            CellStore::Sparse(BTreeMap::new())
        } else {
            let first = *self.cells.values().next().unwrap();
            let uniform = self.cells.values().all(|m| *m == first);
            if uniform {
                CellStore::Uniform {
                    matrix: first,
                    pixels: self.cells.keys().copied().collect(),
                }
            } else if (n as f64) > DENSE_OCCUPANCY * pixels as f64 {
                let mut dense = vec![InfoMatrix::EMPTY; pixels];
                for (idx, m) in &self.cells {
                    dense[*idx as usize] = *m;
                }
                CellStore::Dense {
                    cells: dense,
                    occupied: n,
                }
            } else {
                CellStore::Sparse(self.cells)
            }
        };
        Canvas {
            frame: self.frame,
            cells,
            boundary: self.boundary,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame_4x4_unit() -> RasterFrame {
        RasterFrame::build(
            Rect::from_corners(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0)),
            4,
            4,
        )
        .unwrap()
    }

    #[test]
    fn pixel_zero_covers_quarter_box() {
        let f = frame_4x4_unit();
        let b = f.pixel_box(0, 0);
        assert_eq!(b.min, Point2::new(0.0, 0.0));
        assert_eq!(b.max, Point2::new(0.25, 0.25));
        assert_eq!(f.world_to_pixel(Point2::new(0.0, 0.0)), Some((0, 0)));
        assert_eq!(f.world_to_pixel(Point2::new(0.25, 0.0)), Some((1, 0)));
    }

    #[test]
    fn near_max_corner_maps_to_last_pixel() {
        let f = frame_4x4_unit();
        assert_eq!(f.world_to_pixel(Point2::new(0.99, 0.99)), Some((3, 3)));
        assert_eq!(f.world_to_pixel(Point2::new(1.0, 0.5)), None);
    }

    #[test]
    fn degenerate_extent_rejected() {
        let r = Rect::from_corners(Point2::new(0.5, 0.5), Point2::new(0.5, 0.5));
        assert_eq!(
            RasterFrame::build(r, 4, 4).unwrap_err(),
            CanvasError::DegenerateExtent
        );
    }

    #[test]
    fn out_of_frame_cells_are_empty_and_boundary_errors() {
        let c = Canvas::empty(frame_4x4_unit());
        assert_eq!(c.cell(10, 10), InfoMatrix::EMPTY);
        assert!(matches!(
            c.boundary_lookup(4, 0),
            Err(CanvasError::PixelOutOfFrame { .. })
        ));
    }

    #[test]
    fn storage_election() {
        let f = frame_4x4_unit();
        // Uniform fill.
        let mut b = CanvasBuilder::new(f.clone());
        let m = InfoMatrix::single(2, ObjectInfo::new(1, 1.0, 0.0));
        for idx in [0u32, 3, 7] {
            b.set_cell(idx, m);
        }
        let c = b.finish();
        assert!(matches!(c.cells, CellStore::Uniform { .. }));
        assert_eq!(c.cell_linear(3), m);
        assert_eq!(c.cell_linear(4), InfoMatrix::EMPTY);

        // Mixed values above 10% occupancy go dense.
        let mut b = CanvasBuilder::new(f.clone());
        for idx in 0..8u32 {
            b.set_cell(idx, InfoMatrix::single(0, ObjectInfo::new(idx as u64 + 1, 1.0, 0.0)));
        }
        let c = b.finish();
        assert!(matches!(c.cells, CellStore::Dense { .. }));
        assert_eq!(c.non_null_count(), 8);
        let collected: Vec<u32> = c.iter_cells().map(|(i, _)| i).collect();
        assert_eq!(collected, (0..8).collect::<Vec<_>>());

        // Sparse mixed values at low occupancy.
        let wide = RasterFrame::build(
            Rect::from_corners(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0)),
            8,
            8,
        )
        .unwrap();
        let mut b = CanvasBuilder::new(wide);
        b.set_cell(5, InfoMatrix::single(0, ObjectInfo::new(1, 1.0, 0.0)));
        b.set_cell(9, InfoMatrix::single(0, ObjectInfo::new(2, 1.0, 0.0)));
        assert!(matches!(b.finish().cells, CellStore::Sparse(_)));
    }

    #[test]
    fn dump_is_deterministic() {
        let f = frame_4x4_unit();
        let mut b = CanvasBuilder::new(f);
        b.set_cell(5, InfoMatrix::single(0, ObjectInfo::new(7, 1.0, 0.5)));
        b.add_boundary(
            5,
            BoundaryEntry {
                id: 7,
                dim: 0,
                geom: GeometryRef::Point(Point2::new(0.3, 0.3)),
            },
        );
        let c = b.finish();
        assert_eq!(
            c.dump_text(),
            "cell 1 1 [7:1:0.5|-|-]\nboundary 1 1 id=7 dim=0 point\n"
        );
    }
}
