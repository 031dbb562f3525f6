//! Dataset ingestion (points CSV, origin-destination CSV, GeoJSON-subset
//! polygon files) and result-file writers. All result files are CSV with a
//! deterministic row order and are written atomically (temp file + rename).

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::canvas::Canvas;
use crate::geometry::{validate_polygon, GeometricObject, Point2, Polygon, Primitive};
use crate::queries::{
    AggValue, Dataset, DatasetKind, IdPairs, IdSet, Record, RecordGeometry, RecordId,
};

use super::CliError;

fn parse_err(location: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Parse {
        location: location.into(),
        message: message.into(),
    }
}

fn parse_f64(raw: &str, location: &str) -> Result<f64, CliError> {
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| parse_err(location, format!("not a number: `{raw}`")))?;
    if !v.is_finite() {
        return Err(parse_err(location, "coordinate is not finite"));
    }
    Ok(v)
}

fn parse_id(raw: &str, location: &str) -> Result<u64, CliError> {
    let id: u64 = raw
        .trim()
        .parse()
        .map_err(|_| parse_err(location, format!("not an integer id: `{raw}`")))?;
    if id == 0 {
        return Err(parse_err(location, "record ids start at 1"));
    }
    Ok(id)
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>, CliError> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| parse_err(path.display().to_string(), e.to_string()))
}

/// Load a point dataset from CSV with header `id,x,y[,attr...]`; extra
/// columns become named scalar attributes.
pub fn load_points_csv(path: &Path) -> Result<Dataset, CliError> {
    let mut reader = csv_reader(path)?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(path.display().to_string(), e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.len() < 3 || headers[0] != "id" || headers[1] != "x" || headers[2] != "y" {
        return Err(parse_err(
            path.display().to_string(),
            "points CSV needs the header `id,x,y[,attr...]`",
        ));
    }
    let mut d = Dataset::new(DatasetKind::Points);
    for (lineno, row) in reader.records().enumerate() {
        let location = format!("{}:{}", path.display(), lineno + 2);
        let row = row.map_err(|e| parse_err(&location, e.to_string()))?;
        if row.len() != headers.len() {
            return Err(parse_err(&location, "wrong number of fields"));
        }
        let id = parse_id(&row[0], &location)?;
        let x = parse_f64(&row[1], &location)?;
        let y = parse_f64(&row[2], &location)?;
        let mut scalars = BTreeMap::new();
        for (h, raw) in headers.iter().zip(row.iter()).skip(3) {
            scalars.insert(h.clone(), parse_f64(raw, &location)?);
        }
        d.insert(
            RecordId(id),
            Record {
                geometry: RecordGeometry::Point(Point2::new(x, y)),
                scalars,
            },
        )
        .map_err(|_| CliError::DuplicateId(id))?;
    }
    Ok(d)
}

/// Load an origin-destination dataset from CSV with header
/// `id,ox,oy,dx,dy[,attr...]`.
pub fn load_od_csv(path: &Path) -> Result<Dataset, CliError> {
    let mut reader = csv_reader(path)?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(path.display().to_string(), e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.len() < 5 || headers[..5] != ["id", "ox", "oy", "dx", "dy"] {
        return Err(parse_err(
            path.display().to_string(),
            "od CSV needs the header `id,ox,oy,dx,dy[,attr...]`",
        ));
    }
    let mut d = Dataset::new(DatasetKind::OdPoints);
    for (lineno, row) in reader.records().enumerate() {
        let location = format!("{}:{}", path.display(), lineno + 2);
        let row = row.map_err(|e| parse_err(&location, e.to_string()))?;
        if row.len() != headers.len() {
            return Err(parse_err(&location, "wrong number of fields"));
        }
        let id = parse_id(&row[0], &location)?;
        let vals: Vec<f64> = (1..5)
            .map(|i| parse_f64(&row[i], &location))
            .collect::<Result<_, _>>()?;
        let mut scalars = BTreeMap::new();
        for (h, raw) in headers.iter().zip(row.iter()).skip(5) {
            scalars.insert(h.clone(), parse_f64(raw, &location)?);
        }
        d.insert(
            RecordId(id),
            Record {
                geometry: RecordGeometry::Od {
                    origin: Point2::new(vals[0], vals[1]),
                    destination: Point2::new(vals[2], vals[3]),
                },
                scalars,
            },
        )
        .map_err(|_| CliError::DuplicateId(id))?;
    }
    Ok(d)
}

fn json_ring(ring: &Value, location: &str) -> Result<Vec<Point2>, CliError> {
    let arr = ring
        .as_array()
        .ok_or_else(|| parse_err(location, "ring is not an array"))?;
    arr.iter()
        .map(|pos| {
            let xy = pos
                .as_array()
                .filter(|a| a.len() >= 2)
                .ok_or_else(|| parse_err(location, "position is not [x, y]"))?;
            let x = xy[0]
                .as_f64()
                .ok_or_else(|| parse_err(location, "x is not a number"))?;
            let y = xy[1]
                .as_f64()
                .ok_or_else(|| parse_err(location, "y is not a number"))?;
            Ok(Point2::new(x, y))
        })
        .collect()
}

fn json_polygon(rings: &Value, location: &str) -> Result<Polygon, CliError> {
    let rings = rings
        .as_array()
        .ok_or_else(|| parse_err(location, "polygon coordinates are not an array"))?;
    let raw: Vec<Vec<Point2>> = rings
        .iter()
        .map(|r| json_ring(r, location))
        .collect::<Result<_, _>>()?;
    validate_polygon(&raw).map_err(|e| parse_err(location, e.to_string()))
}

/// Parse the polygons of a GeoJSON-subset FeatureCollection in feature
/// order: Polygon or MultiPolygon geometries with an integer `id` property.
pub fn parse_polygon_features(path: &Path) -> Result<Vec<(u64, GeometricObject, BTreeMap<String, f64>)>, CliError> {
    let text = fs::read_to_string(path)?;
    let doc: Value = serde_json::from_str(&text)
        .map_err(|e| parse_err(path.display().to_string(), e.to_string()))?;
    if doc["type"] != "FeatureCollection" {
        return Err(parse_err(
            path.display().to_string(),
            "expected a FeatureCollection",
        ));
    }
    let features = doc["features"]
        .as_array()
        .ok_or_else(|| parse_err(path.display().to_string(), "missing features array"))?;
    let mut out = Vec::with_capacity(features.len());
    for (k, feature) in features.iter().enumerate() {
        let location = format!("{}#feature[{}]", path.display(), k);
        let id = feature["properties"]["id"]
            .as_u64()
            .filter(|id| *id >= 1)
            .ok_or_else(|| parse_err(&location, "missing integer `id` property (>= 1)"))?;
        let mut scalars = BTreeMap::new();
        if let Some(props) = feature["properties"].as_object() {
            for (key, val) in props {
                if key != "id" {
                    if let Some(v) = val.as_f64() {
                        scalars.insert(key.clone(), v);
                    }
                }
            }
        }
        let geom = &feature["geometry"];
        let polys: Vec<Polygon> = match geom["type"].as_str() {
            Some("Polygon") => vec![json_polygon(&geom["coordinates"], &location)?],
            Some("MultiPolygon") => {
                let parts = geom["coordinates"]
                    .as_array()
                    .ok_or_else(|| parse_err(&location, "multipolygon coordinates missing"))?;
                parts
                    .iter()
                    .map(|p| json_polygon(p, &location))
                    .collect::<Result<_, _>>()?
            }
            other => {
                return Err(parse_err(
                    &location,
                    format!("unsupported geometry type {other:?}"),
                ))
            }
        };
        let obj = GeometricObject::new(polys.into_iter().map(Primitive::Region).collect())
            .map_err(|e| parse_err(&location, e.to_string()))?;
        out.push((id, obj, scalars));
    }
    Ok(out)
}

/// Load a polygon dataset from a GeoJSON-subset FeatureCollection.
pub fn load_polygons_geojson(path: &Path) -> Result<Dataset, CliError> {
    let mut d = Dataset::new(DatasetKind::Polygons);
    for (id, obj, scalars) in parse_polygon_features(path)? {
        d.insert(
            RecordId(id),
            Record {
                geometry: RecordGeometry::Object(std::sync::Arc::new(obj)),
                scalars,
            },
        )
        .map_err(|_| CliError::DuplicateId(id))?;
    }
    Ok(d)
}

/// Plain polygons in feature order, for constraint files.
pub fn load_constraint_polygons(path: &Path) -> Result<Vec<Polygon>, CliError> {
    let features = parse_polygon_features(path)?;
    let mut polys = Vec::new();
    for (id, obj, _) in features {
        for prim in obj.primitives() {
            if let Primitive::Region(p) = prim {
                polys.push(p.clone());
            } else {
                return Err(parse_err(
                    path.display().to_string(),
                    format!("constraint feature {id} is not polygonal"),
                ));
            }
        }
    }
    Ok(polys)
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let tmp: PathBuf = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_ids(path: &Path, ids: &IdSet) -> Result<usize, CliError> {
    let mut out = String::from("id\n");
    for id in ids {
        out.push_str(&format!("{id}\n"));
    }
    write_atomic(path, &out)?;
    Ok(ids.len())
}

pub fn write_pairs(path: &Path, pairs: &IdPairs) -> Result<usize, CliError> {
    let mut out = String::from("a_id,b_id\n");
    for (a, b) in pairs {
        out.push_str(&format!("{a},{b}\n"));
    }
    write_atomic(path, &out)?;
    Ok(pairs.len())
}

pub fn write_value(path: &Path, value: &AggValue) -> Result<usize, CliError> {
    write_atomic(path, &format!("value\n{value}\n"))?;
    Ok(1)
}

pub fn write_groups(path: &Path, groups: &BTreeMap<RecordId, AggValue>) -> Result<usize, CliError> {
    let mut out = String::from("id,value\n");
    for (id, v) in groups {
        out.push_str(&format!("{id},{v}\n"));
    }
    write_atomic(path, &out)?;
    Ok(groups.len())
}

/// Voronoi labels in row-major pixel order; `seed_ids` maps the 1-based
/// label index back to the input record id.
pub fn write_voronoi(path: &Path, canvas: &Canvas, seed_ids: &[u64]) -> Result<usize, CliError> {
    let mut out = String::from("px,py,seed_id\n");
    let mut rows = 0;
    for (idx, cell) in canvas.iter_cells() {
        let (i, j) = canvas.frame().coords(idx);
        let label = cell.row(2).map_or(0, |r| r.id) as usize;
        let seed = seed_ids.get(label.saturating_sub(1)).copied().unwrap_or(0);
        out.push_str(&format!("{i},{j},{seed}\n"));
        rows += 1;
    }
    write_atomic(path, &out)?;
    Ok(rows)
}

/// Same layout, computed from per-pixel labels (the oracle path).
pub fn write_voronoi_labels(
    path: &Path,
    width: u32,
    height: u32,
    labels: impl Iterator<Item = usize>,
    seed_ids: &[u64],
) -> Result<usize, CliError> {
    let mut out = String::from("px,py,seed_id\n");
    let mut rows = 0;
    let mut labels = labels;
    for j in 0..height {
        for i in 0..width {
            let label = labels.next().unwrap_or(0);
            let seed = seed_ids.get(label.saturating_sub(1)).copied().unwrap_or(0);
            out.push_str(&format!("{i},{j},{seed}\n"));
            rows += 1;
        }
    }
    write_atomic(path, &out)?;
    Ok(rows)
}
