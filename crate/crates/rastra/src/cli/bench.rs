//! Desk-scale benchmark harness: multi-polygon selection over synthetic
//! point workloads, timed across engines with cross-verified result
//! checksums.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geometry::{GeometricObject, Polygon};
use crate::oracle::oracle_select;
use crate::queries::{
    naive_point_select, Constraint, Dataset, ExecOptions, IdSet, QueryError, RecordId,
    RegionGeometry, SelectMode,
};

use super::workload;
use super::CliError;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("repetitions must be at least 1")]
    ZeroRepetitions,
    #[error("engine {engine} produced checksum {got} but {want} was expected (size {size}, {polygons} polygons)")]
    ChecksumMismatch {
        engine: String,
        size: usize,
        polygons: usize,
        got: String,
        want: String,
    },
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Cli(#[from] CliError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Canvas,
    CanvasParallel,
    NaivePip,
    Oracle,
}

impl Engine {
    pub fn name(&self) -> &'static str {
        match self {
            Engine::Canvas => "canvas",
            Engine::CanvasParallel => "canvas-parallel",
            Engine::NaivePip => "naive-pip",
            Engine::Oracle => "oracle",
        }
    }

    pub fn parse(name: &str) -> Option<Engine> {
        Some(match name {
            "canvas" => Engine::Canvas,
            "canvas-parallel" => Engine::CanvasParallel,
            "naive-pip" => Engine::NaivePip,
            "oracle" => Engine::Oracle,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub polygon_counts: Vec<usize>,
    pub engines: Vec<Engine>,
    pub repetitions: usize,
    pub seed: u64,
    pub resolution: u32,
    /// Constraint polygons; the run with k polygons uses the first k.
    pub fixtures: Vec<Polygon>,
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub engine: &'static str,
    pub kind: &'static str,
    pub size: usize,
    pub polygons: usize,
    pub median_ms: f64,
    pub cardinality: usize,
    pub checksum: String,
}

/// Stable checksum of a result id set.
pub fn checksum_ids(ids: &IdSet) -> String {
    let mut hasher = Sha256::new();
    for id in ids {
        hasher.update(id.0.to_le_bytes());
    }
    let digest = hasher.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        0.5 * (samples[n / 2 - 1] + samples[n / 2])
    }
}

fn run_engine(
    engine: Engine,
    dataset: &Dataset,
    points: &[(u64, crate::geometry::Point2)],
    polygons: &[Polygon],
    resolution: u32,
) -> Result<IdSet, BenchError> {
    let constraint = Constraint::PolygonSet {
        polygons: polygons.to_vec(),
        mode: SelectMode::Any,
    };
    Ok(match engine {
        Engine::Canvas | Engine::CanvasParallel => {
            let opts = ExecOptions {
                resolution,
                extent: None,
                exact: true,
                parallel: engine == Engine::CanvasParallel,
            };
            crate::queries::select_points(dataset, &constraint, &opts)?
        }
        Engine::NaivePip => {
            let regions: Vec<RegionGeometry> = polygons
                .iter()
                .map(|p| {
                    RegionGeometry::Object(Arc::new(GeometricObject::from_polygon(p.clone())))
                })
                .collect();
            naive_point_select(points, &regions, SelectMode::Any)
                .into_iter()
                .map(RecordId)
                .collect()
        }
        Engine::Oracle => oracle_select(dataset, &constraint)?,
    })
}

/// Run the full benchmark matrix. Every engine must produce the same result
/// checksum for a given (size, polygon-count) cell; a mismatch aborts.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    if cfg.repetitions == 0 {
        return Err(BenchError::ZeroRepetitions);
    }
    let extent = workload::bench_extent();
    let mut rows = Vec::new();
    for (si, &size) in cfg.sizes.iter().enumerate() {
        let mut rng = workload::seeded_rng(cfg.seed.wrapping_add(si as u64));
        let raw = workload::mixed_points(size, extent, &mut rng);
        let points: Vec<(u64, crate::geometry::Point2)> = raw
            .into_iter()
            .enumerate()
            .map(|(i, p)| (i as u64 + 1, p))
            .collect();
        let dataset = Dataset::from_points(points.iter().copied())?;

        for &k in &cfg.polygon_counts {
            let k = k.min(cfg.fixtures.len());
            let polys = &cfg.fixtures[..k];
            let mut want: Option<String> = None;
            for &engine in &cfg.engines {
                let mut samples = Vec::with_capacity(cfg.repetitions);
                let mut result = IdSet::new();
                for _ in 0..cfg.repetitions {
                    let t0 = Instant::now();
                    result = run_engine(engine, &dataset, &points, polys, cfg.resolution)?;
                    samples.push(t0.elapsed().as_secs_f64() * 1e3);
                }
                let checksum = checksum_ids(&result);
                match &want {
                    None => want = Some(checksum.clone()),
                    Some(w) if *w != checksum => {
                        return Err(BenchError::ChecksumMismatch {
                            engine: engine.name().to_string(),
                            size,
                            polygons: k,
                            got: checksum,
                            want: w.clone(),
                        })
                    }
                    _ => {}
                }
                rows.push(BenchRow {
                    engine: engine.name(),
                    kind: "multi-select-any",
                    size,
                    polygons: k,
                    median_ms: median(&mut samples),
                    cardinality: result.len(),
                    checksum,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_report(rows: &[BenchRow], out: &Path) -> Result<(), CliError> {
    let mut text = String::from("engine,kind,size,polygons,median_ms,cardinality,checksum\n");
    for r in rows {
        text.push_str(&format!(
            "{},{},{},{},{:.3},{},{}\n",
            r.engine, r.kind, r.size, r.polygons, r.median_ms, r.cardinality, r.checksum
        ));
    }
    let tmp = out.with_extension("tmp");
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_fixtures() -> Vec<Polygon> {
        let mut rng = workload::seeded_rng(99);
        (0..4)
            .map(|_| workload::random_polygon(workload::bench_extent(), &mut rng))
            .collect()
    }

    #[test]
    fn zero_repetitions_rejected() {
        let cfg = BenchConfig {
            sizes: vec![10],
            polygon_counts: vec![1],
            engines: vec![Engine::Canvas],
            repetitions: 0,
            seed: 1,
            resolution: 64,
            fixtures: small_fixtures(),
        };
        assert!(matches!(run_bench(&cfg), Err(BenchError::ZeroRepetitions)));
    }

    #[test]
    fn engines_agree_on_small_matrix() {
        let cfg = BenchConfig {
            sizes: vec![200, 500],
            polygon_counts: vec![1, 2],
            engines: vec![
                Engine::Canvas,
                Engine::CanvasParallel,
                Engine::NaivePip,
                Engine::Oracle,
            ],
            repetitions: 1,
            seed: 5,
            resolution: 128,
            fixtures: small_fixtures(),
        };
        let rows = run_bench(&cfg).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 4);
        for cell in rows.chunks(4) {
            assert!(cell.windows(2).all(|w| w[0].checksum == w[1].checksum));
        }
    }
}
