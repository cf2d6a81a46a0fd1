use std::io::Write;
use std::path::Path;

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::{Error, Result};
use crate::simulate::TrajectoryRecord;

pub const TRAJECTORY_HEADER: [&str; 10] = [
    "step", "time", "robot_id", "x0", "x1", "phi", "u_norm", "mass", "centroid0", "centroid1",
];
pub const CELLS_HEADER: [&str; 5] = ["time", "cell_id", "center0", "center1", "owner"];

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Pretty JSON with a trailing newline; rejects NaN and infinities.
pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let v = serde_json::to_value(value).map_err(|e| Error::invalid(e.to_string()))?;
    if let Some(path) = find_null(&v, String::new()) {
        return Err(Error::invalid(format!("non-finite value in output field `{path}`")));
    }
    let mut bytes = serde_json::to_vec_pretty(&v).map_err(|e| Error::invalid(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

// serde_json maps non-finite floats to null, and optional fields are skipped
// when absent, so any null marks a non-finite number.
fn find_null(v: &serde_json::Value, path: String) -> Option<String> {
    match v {
        serde_json::Value::Null => Some(path),
        serde_json::Value::Array(items) => items
            .iter()
            .enumerate()
            .find_map(|(i, x)| find_null(x, format!("{path}[{i}]"))),
        serde_json::Value::Object(map) => map.iter().find_map(|(k, x)| {
            let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
            find_null(x, p)
        }),
        _ => None,
    }
}

fn num(v: f64) -> String {
    // Display for f64 is the shortest string that parses back to the same value
    format!("{v}")
}

pub fn trajectory_csv(traj: &TrajectoryRecord) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::invalid(e.to_string());
    w.write_record(TRAJECTORY_HEADER).map_err(csv_err)?;
    let d = traj.dim;
    for r in &traj.records {
        for i in 0..r.weights.len() {
            let coord = |v: &[f64], k: usize| if k < d { num(v[i * d + k]) } else { String::new() };
            w.write_record([
                r.step.to_string(),
                num(r.time),
                i.to_string(),
                coord(&r.positions, 0),
                coord(&r.positions, 1),
                num(r.weights[i]),
                num(r.u_norm[i]),
                num(r.mass[i]),
                coord(&r.centroid, 0),
                coord(&r.centroid, 1),
            ])
            .map_err(csv_err)?;
        }
    }
    w.into_inner().map_err(|e| Error::invalid(e.to_string()))
}

pub fn cells_csv(time: f64, centers: &[f64], dim: usize, owner: &[usize]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::invalid(e.to_string());
    w.write_record(CELLS_HEADER).map_err(csv_err)?;
    let t = num(time);
    for (cell, &o) in owner.iter().enumerate() {
        let c = &centers[cell * dim..(cell + 1) * dim];
        w.write_record([
            t.clone(),
            cell.to_string(),
            num(c[0]),
            if dim > 1 { num(c[1]) } else { String::new() },
            o.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::invalid(e.to_string()))
}
