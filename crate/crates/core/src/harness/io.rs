use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hilbert::{Curve, Grid, GridRef, OperatorMatrix};
use crate::scalar::Scalar;

pub const SCHEMA_VERSION: u32 = 1;

/// Writes `bytes` to a temporary sibling and renames it over `path`.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| Error::InvalidInput(format!("`{}` is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_json<S: Serialize>(path: impl AsRef<Path>, value: &S) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

fn csv_bytes(header: Option<&[String]>, rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    if let Some(h) = header {
        w.write_record(h)?;
    }
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn header(m: usize) -> Vec<String> {
    (0..m).map(|i| format!("t{i}")).collect()
}

fn fmt<T: Scalar>(v: T) -> String {
    format!("{}", v.as_f64())
}

/// Sidecar path holding the grid points of a sample or operator CSV.
pub fn grid_sidecar(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.grid.csv"))
}

pub fn write_grid<T: Scalar>(path: impl AsRef<Path>, grid: &GridRef<T>) -> Result<()> {
    let row = grid.points().iter().map(|&p| fmt(p)).collect();
    write_atomic(path, &csv_bytes(Some(&header(grid.len())), std::iter::once(row))?)
}

pub fn read_grid<T: Scalar>(path: impl AsRef<Path>) -> Result<GridRef<T>> {
    let rows = read_rows(path.as_ref(), true)?;
    match rows.as_slice() {
        [row] => Grid::from_points(row.iter().map(|&v| T::of(v)).collect()),
        _ => Err(Error::Data { row: 2, message: "grid file must hold exactly one row of points".into() }),
    }
}

fn read_rows(path: &Path, has_header: bool) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(has_header).trim(csv::Trim::All).from_path(path)?;
    let offset = if has_header { 2 } else { 1 };
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + offset;
        let rec = rec.map_err(|e| Error::Data { row, message: e.to_string() })?;
        let vals = rec
            .iter()
            .map(|f| f.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Data { row, message: format!("bad number `{f}`") }))
            .collect::<Result<Vec<_>>>()?;
        out.push(vals);
    }
    Ok(out)
}

/// Sample CSV (header `t0..t{m-1}`, one curve per row) plus its grid sidecar.
pub fn write_sample<T: Scalar>(path: impl AsRef<Path>, curves: &[Curve<T>]) -> Result<()> {
    let path = path.as_ref();
    let first = curves.first().ok_or_else(|| Error::InvalidInput("no curves to write".into()))?;
    let rows = curves.iter().map(|c| c.values().iter().map(|&v| fmt(v)).collect());
    write_atomic(path, &csv_bytes(Some(&header(first.len())), rows)?)?;
    write_grid(grid_sidecar(path), first.grid())
}

/// Reads a sample CSV; the grid comes from the sidecar when present, else uniform.
pub fn read_sample<T: Scalar>(path: impl AsRef<Path>) -> Result<Vec<Curve<T>>> {
    let path = path.as_ref();
    let rows = read_rows(path, true)?;
    let m = rows.first().map(|r| r.len()).ok_or_else(|| Error::Data { row: 2, message: "sample has no curves".into() })?;
    let grid = load_grid(path, m)?;
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| {
            if r.len() != m {
                return Err(Error::Data { row: i + 2, message: format!("expected {m} values, found {}", r.len()) });
            }
            Curve::new(grid.clone(), r.into_iter().map(T::of).collect())
        })
        .collect()
}

fn load_grid<T: Scalar>(path: &Path, m: usize) -> Result<GridRef<T>> {
    let side = grid_sidecar(path);
    let grid = if side.exists() { read_grid(&side)? } else { Grid::uniform(m)? };
    if grid.len() != m {
        return Err(Error::GridMismatch(format!("{} has {} points, data has {m} columns", side.display(), grid.len())));
    }
    Ok(grid)
}

/// Operator kernel as an m x m CSV (no header) plus its grid sidecar.
pub fn write_operator<T: Scalar>(path: impl AsRef<Path>, op: &OperatorMatrix<T>) -> Result<()> {
    let path = path.as_ref();
    let m = op.dim();
    let rows = op.kernel().chunks(m).map(|r| r.iter().map(|&v| fmt(v)).collect());
    write_atomic(path, &csv_bytes(None, rows)?)?;
    write_grid(grid_sidecar(path), op.grid())
}

pub fn read_operator<T: Scalar>(path: impl AsRef<Path>) -> Result<OperatorMatrix<T>> {
    let path = path.as_ref();
    let rows = read_rows(path, false)?;
    let m = rows.len();
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Data { row: 1, message: format!("operator CSV must be square, found {m} rows") });
    }
    let grid = load_grid(path, m)?;
    OperatorMatrix::new(grid, rows.into_iter().flatten().map(T::of).collect())
}

/// Long-format plot data: `series,t,value`.
pub fn write_plot_csv<T: Scalar>(path: impl AsRef<Path>, series: &[(String, &Curve<T>)]) -> Result<()> {
    let rows = series.iter().flat_map(|(name, c)| {
        c.grid().points().iter().zip(c.values()).map(move |(&t, &v)| vec![name.clone(), fmt(t), fmt(v)])
    });
    write_atomic(path, &csv_bytes(Some(&["series".into(), "t".into(), "value".into()]), rows)?)
}

pub fn sha256_file(path: impl AsRef<Path>) -> Result<String> {
    let bytes = fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, Serialize)]
pub struct InputRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub parameters: serde_json::Value,
    pub inputs: Vec<InputRecord>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, parameters: serde_json::Value) -> Self {
        RunManifest { schema_version: SCHEMA_VERSION, command: command.into(), parameters, inputs: Vec::new(), outputs: Vec::new() }
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(InputRecord { path: path.display().to_string(), sha256: sha256_file(path)? });
        Ok(())
    }

    pub fn output(&mut self, name: &str) {
        self.outputs.push(name.into());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_and_operator_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::<f64>::from_points(vec![0.0, 0.1, 0.5, 1.0]).unwrap();
        let xs = vec![Curve::from_fn(&g, |t| t.exp()), Curve::from_fn(&g, |t| 1.0 / 3.0 - t)];
        let p = dir.path().join("s.csv");
        write_sample(&p, &xs).unwrap();
        let back: Vec<Curve<f64>> = read_sample(&p).unwrap();
        assert_eq!(back, xs);
        let op = OperatorMatrix::from_kernel_fn(&g, |s, t| (s * t).sin() + 0.1);
        let q = dir.path().join("op.csv");
        write_operator(&q, &op).unwrap();
        let back: OperatorMatrix<f64> = read_operator(&q).unwrap();
        assert_eq!(back.kernel(), op.kernel());
    }

    #[test]
    fn bad_rows_are_located() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        fs::write(&p, "t0,t1\n1,2\n3,x\n").unwrap();
        let err = read_sample::<f64>(&p).unwrap_err();
        assert!(matches!(err, Error::Data { row: 3, .. }), "{err}");
    }

    #[test]
    fn atomic_write_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.json");
        write_json(&p, &serde_json::json!({"x": 1})).unwrap();
        let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 1);
        assert_eq!(sha256_file(&p).unwrap().len(), 64);
    }
}
