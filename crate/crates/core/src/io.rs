//! CSV and JSON artifacts.
//!
//! Numbers are written as `{:.16e}` (17 significant digits) so that a
//! double survives the round trip exactly.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolve::{Diagnostics, EvolveControls, RunStatus, Trajectory};
use crate::geometry::{Curve3D, Polyline2D};
use crate::grid::{Field, PeriodicGrid};
use crate::scalar::{lit, Real};

fn num<T: Real>(x: T) -> String {
    format!("{:.16e}", x.as_f64())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Csv(e.to_string())
}

/// Writes `s,value` rows.
pub fn write_field<T: Real, W: Write>(field: &Field<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["s", "value"]).map_err(csv_err)?;
    for (s, v) in field.grid().nodes().zip(field.values()) {
        w.write_record([num(s), num(*v)]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_field<T: Real>(field: &Field<T>, path: &Path) -> Result<()> {
    write_field(field, fs::File::create(path)?)
}

/// Reads `s,value` rows. The grid is inferred: nodes must start at 0 and be
/// uniformly spaced, and the period is `N h`.
pub fn read_field<T: Real, R: Read>(input: R) -> Result<Field<T>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(csv_err)?.clone();
    if headers.len() != 2 || &headers[0] != "s" || &headers[1] != "value" {
        return Err(Error::Csv(format!(
            "expected header `s,value`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut s = Vec::new();
    let mut v = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let parse = |i: usize| -> Result<f64> {
            rec[i].trim().parse::<f64>().map_err(|e| {
                Error::Csv(format!("row {}: `{}`: {e}", row + 1, &rec[i]))
            })
        };
        s.push(parse(0)?);
        v.push(parse(1)?);
    }
    let n = s.len();
    if n < 2 {
        return Err(Error::Csv(format!("need at least 2 rows, got {n}")));
    }
    let h = (s[n - 1] - s[0]) / (n - 1) as f64;
    let length = h * n as f64;
    let tol = 1e-9 * length.abs().max(1.0);
    if s[0].abs() > tol {
        return Err(Error::Csv(format!("first node must be s = 0, got {}", s[0])));
    }
    if let Some(j) = s.iter().enumerate().position(|(j, &x)| (x - j as f64 * h).abs() > tol) {
        return Err(Error::Csv(format!("nodes are not uniformly spaced at row {}", j + 1)));
    }
    let grid = PeriodicGrid::new(lit::<T>(length), n)?;
    Field::new(grid, v.into_iter().map(lit).collect())
}

pub fn load_field<T: Real>(path: &Path) -> Result<Field<T>> {
    read_field(fs::File::open(path)?)
}

pub fn write_json<S: Serialize>(value: &S, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Metadata written next to the trajectory snapshots.
#[derive(Debug, Serialize)]
pub struct TrajectoryMeta<'a, T> {
    pub grid: &'a PeriodicGrid<T>,
    pub kappa: T,
    pub controls: &'a EvolveControls<T>,
    pub times: &'a [T],
    pub steps: &'a [usize],
    pub diagnostics: &'a [Diagnostics<T>],
    pub status: &'a RunStatus,
    pub complete: bool,
    pub snapshots: Vec<String>,
}

pub fn snapshot_name(index: usize) -> String {
    format!("snap_{index:06}.csv")
}

/// Writes `meta.json` plus one `snap_XXXXXX.csv` per snapshot into `dir`.
pub fn write_trajectory<T: Real>(traj: &Trajectory<T>, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(traj.states.len());
    for (i, state) in traj.states.iter().enumerate() {
        let path = dir.join(snapshot_name(i));
        save_field(state.field(), &path)?;
        paths.push(path);
    }
    let meta = TrajectoryMeta {
        grid: &traj.grid,
        kappa: traj.kappa,
        controls: &traj.controls,
        times: &traj.times,
        steps: &traj.steps,
        diagnostics: &traj.diagnostics,
        status: &traj.status,
        complete: traj.is_complete(),
        snapshots: (0..traj.states.len()).map(snapshot_name).collect(),
    };
    write_json(&meta, &dir.join("meta.json"))?;
    Ok(paths)
}

pub const CURVE_HEADER: [&str; 13] = [
    "s", "x", "y", "z", "Tx", "Ty", "Tz", "Nx", "Ny", "Nz", "Bx", "By", "Bz",
];

pub fn write_curve<T: Real, W: Write>(curve: &Curve3D<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CURVE_HEADER).map_err(csv_err)?;
    for (s, st) in curve.s.iter().zip(&curve.states) {
        let mut row = vec![num(*s)];
        for v in [st.position, st.tangent, st.normal, st.binormal] {
            row.extend(v.to_array().into_iter().map(num));
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_polyline<T: Real, W: Write>(line: &Polyline2D<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["s", "u", "v"]).map_err(csv_err)?;
    for ((s, u), v) in line.s.iter().zip(&line.u).zip(&line.v) {
        w.write_record([num(*s), num(*u), num(*v)]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes named columns of equal length with a header row.
pub fn write_columns<T: Real, W: Write>(names: &[&str], columns: &[&[T]], out: W) -> Result<()> {
    let rows = columns.first().map_or(0, |c| c.len());
    if names.len() != columns.len() || columns.iter().any(|c| c.len() != rows) {
        return Err(Error::Csv("column names and lengths disagree".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(names).map_err(csv_err)?;
    for i in 0..rows {
        w.write_record(columns.iter().map(|c| num(c[i]))).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
