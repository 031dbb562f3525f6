//! rastra: a raster-canvas spatial query engine.
//!
//! Spatial records are drawn onto discrete *canvases* — raster frames whose
//! pixels hold per-dimension (id, count, value) information rows — and
//! queries are compiled into compositions of five closed operators
//! (geometric transform, value transform, mask, blend, dissect). The raster
//! stage is a conservative filter: every pixel touched by a geometry
//! boundary is linked back to the exact vector shape, and a refinement pass
//! re-tests those candidates so query answers are vector-exact at any
//! resolution.
//!
//! Module map:
//! - [`geometry`]: exact 2D primitives and predicates.
//! - [`canvas`]: raster frames, cell matrices, rasterization, boundary index.
//! - [`algebra`]: the operator algebra and its built-in parameter functions.
//! - [`queries`]: query plans (selection, joins, aggregation, kNN, Voronoi).
//! - [`oracle`]: independent brute-force ground truth for every query class.
//! - [`cli`]: dataset ingestion, query specs, and the benchmark harness.

pub mod algebra;
pub mod canvas;
pub mod cli;
pub mod geometry;
pub mod oracle;
pub mod queries;
