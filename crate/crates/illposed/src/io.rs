//! CSV and JSON readers and writers for matrices, sweeps, fields, meshes,
//! datasets and fit results. Floats are written in shortest round-trip form,
//! so every file reads back to the same bits.

use crate::condensates::{SpectralDataset, SurfacePoint};
use crate::eit::{DiscMesh, ElectrodeDataset, Raster};
use crate::fredholm::SampledKernel;
use crate::regcore::SweepRow;
use crate::{Error, Result};
use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), source }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| io_error(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| io_error(path, e))
}

/// Column-named numeric table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(headers: &[S], rows: Vec<Vec<f64>>) -> Self {
        Self { headers: headers.iter().map(|h| h.as_ref().to_string()).collect(), rows }
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("missing column '{name}' (have {:?})", self.headers)))
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let k = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r[k]).collect())
    }
}

pub fn write_table<W: Write>(out: W, table: &Table) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.headers)?;
    for row in &table.rows {
        if row.len() != table.headers.len() {
            return Err(Error::Data(format!("row of {} values under {} columns", row.len(), table.headers.len())));
        }
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn read_table<R: std::io::Read>(input: R) -> Result<Table> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|field| {
                field.parse::<f64>().map_err(|_| Error::Data(format!("row {}: '{field}' is not a number", line + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(Table { headers, rows })
}

pub fn write_table_csv(path: &Path, table: &Table) -> Result<()> {
    write_table(create(path)?, table)
}

pub fn read_table_csv(path: &Path) -> Result<Table> {
    read_table(open(path)?).map_err(|e| with_path(e, path))
}

/// One named column of a CSV table.
pub fn read_column_csv(path: &Path, name: &str) -> Result<Vec<f64>> {
    col(&read_table_csv(path)?, path, name)
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Data(msg) => Error::Data(format!("{}: {msg}", path.display())),
        other => other,
    }
}

fn col(t: &Table, path: &Path, name: &str) -> Result<Vec<f64>> {
    t.column(name).map_err(|e| with_path(e, path))
}

fn col_index(t: &Table, path: &Path, name: &str) -> Result<usize> {
    t.column_index(name).map_err(|e| with_path(e, path))
}

/// Row-major matrix with columns named c0, c1, ….
pub fn write_matrix_csv(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let headers: Vec<String> = (0..m.ncols()).map(|j| format!("c{j}")).collect();
    let rows = m.row_iter().map(|r| r.iter().copied().collect()).collect();
    write_table_csv(path, &Table { headers, rows })
}

pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let t = read_table_csv(path)?;
    let ncols = t.headers.len();
    if let Some(k) = t.rows.iter().position(|r| r.len() != ncols) {
        return Err(Error::Data(format!("{}: row {} has {} entries, expected {ncols}", path.display(), k + 1, t.rows[k].len())));
    }
    Ok(DMatrix::from_row_iterator(t.rows.len(), ncols, t.rows.into_iter().flatten()))
}

/// Kernel matrix plus a sidecar grid file with columns node, weight.
pub fn write_sampled_kernel(matrix: &Path, grid: &Path, k: &SampledKernel) -> Result<()> {
    write_matrix_csv(matrix, &k.values)?;
    let rows = k.nodes.iter().zip(&k.weights).map(|(&x, &w)| vec![x, w]).collect();
    write_table_csv(grid, &Table::new(&["node", "weight"], rows))
}

pub fn read_sampled_kernel(matrix: &Path, grid: &Path) -> Result<SampledKernel> {
    let values = read_matrix_csv(matrix)?;
    let g = read_table_csv(grid)?;
    SampledKernel::new(values, col(&g, grid, "node")?, col(&g, grid, "weight")?)
}

pub const SWEEP_COLUMNS: [&str; 3] = ["lambda", "discrepancy", "energy"];

pub fn sweep_table(rows: &[SweepRow]) -> Table {
    Table::new(&SWEEP_COLUMNS, rows.iter().map(|r| vec![r.lambda, r.discrepancy, r.energy]).collect())
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    write_table_csv(path, &sweep_table(rows))
}

/// (λ, discrepancy, energy) triples of a sweep table.
pub fn read_sweep_csv(path: &Path) -> Result<Vec<[f64; 3]>> {
    let t = read_table_csv(path)?;
    let [l, d, e] = [col_index(&t, path, "lambda")?, col_index(&t, path, "discrepancy")?, col_index(&t, path, "energy")?];
    Ok(t.rows.iter().map(|r| [r[l], r[d], r[e]]).collect())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| io_error(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(open(path)?)?)
}

pub fn write_electrode_dataset(path: &Path, d: &ElectrodeDataset) -> Result<()> {
    write_json(path, d)
}

/// Reads and checks that every excitation matches the electrode count.
pub fn read_electrode_dataset(path: &Path) -> Result<ElectrodeDataset> {
    let d: ElectrodeDataset = read_json(path)?;
    let n = d.electrode_angles.len();
    if n == 0 || d.excitations.is_empty() {
        return Err(Error::Data(format!("{}: dataset has no electrodes or no excitations", path.display())));
    }
    if let Some(k) = d.excitations.iter().position(|e| e.current.len() != n || e.potential.len() != n) {
        return Err(Error::Data(format!("{}: excitation {k} does not match {n} electrodes", path.display())));
    }
    Ok(d)
}

/// Scattered field samples with columns x, y, value.
pub fn write_field_csv(path: &Path, points: &[[f64; 2]], values: &[f64]) -> Result<()> {
    if points.len() != values.len() {
        return Err(Error::Data(format!("{} points for {} values", points.len(), values.len())));
    }
    let rows = points.iter().zip(values).map(|(p, &v)| vec![p[0], p[1], v]).collect();
    write_table_csv(path, &Table::new(&["x", "y", "value"], rows))
}

pub fn read_field_csv(path: &Path) -> Result<(Vec<[f64; 2]>, Vec<f64>)> {
    let t = read_table_csv(path)?;
    let (x, y, v) = (col(&t, path, "x")?, col(&t, path, "y")?, col(&t, path, "value")?);
    Ok((x.into_iter().zip(y).map(|(x, y)| [x, y]).collect(), v))
}

/// Raster as a field CSV in row-major order; points outside the disc hold NaN.
pub fn write_raster_csv(path: &Path, raster: &Raster) -> Result<()> {
    let n = raster.n;
    let points: Vec<[f64; 2]> = (0..n * n).map(|k| [Raster::coord(n, k % n), Raster::coord(n, k / n)]).collect();
    write_field_csv(path, &points, &raster.values)
}

pub fn read_raster_csv(path: &Path) -> Result<Raster> {
    let (points, values) = read_field_csv(path)?;
    let n = (values.len() as f64).sqrt().round() as usize;
    if n < 2 || n * n != values.len() {
        return Err(Error::Data(format!("{}: {} samples do not form a square raster", path.display(), values.len())));
    }
    for (k, p) in points.iter().enumerate() {
        let expect = [Raster::coord(n, k % n), Raster::coord(n, k / n)];
        if (p[0] - expect[0]).abs() > 1e-9 || (p[1] - expect[1]).abs() > 1e-9 {
            return Err(Error::Data(format!("{}: sample {k} is not on the {n}×{n} raster", path.display())));
        }
    }
    Ok(Raster { n, values })
}

/// Mesh as a node file (x, y, boundary) and a triangle file (a, b, c).
/// `boundary` holds the position in the boundary loop, or −1.
pub fn write_mesh_csv(nodes: &Path, triangles: &Path, mesh: &DiscMesh) -> Result<()> {
    let mut loop_pos = vec![-1.0; mesh.nodes.len()];
    for (k, &b) in mesh.boundary_nodes.iter().enumerate() {
        loop_pos[b] = k as f64;
    }
    let rows = mesh.nodes.iter().zip(&loop_pos).map(|(p, &b)| vec![p[0], p[1], b]).collect();
    write_table_csv(nodes, &Table::new(&["x", "y", "boundary"], rows))?;
    let rows = mesh.triangles.iter().map(|t| t.iter().map(|&i| i as f64).collect()).collect();
    write_table_csv(triangles, &Table::new(&["a", "b", "c"], rows))
}

pub fn read_mesh_csv(nodes: &Path, triangles: &Path) -> Result<DiscMesh> {
    let t = read_table_csv(nodes)?;
    let (x, y, b) = (col(&t, nodes, "x")?, col(&t, nodes, "y")?, col(&t, nodes, "boundary")?);
    let points: Vec<[f64; 2]> = x.into_iter().zip(y).map(|(x, y)| [x, y]).collect();
    let mut boundary: Vec<(usize, usize)> =
        b.iter().enumerate().filter(|(_, &p)| p >= 0.0).map(|(i, &p)| (p as usize, i)).collect();
    boundary.sort_unstable();
    let index = |v: f64| -> Result<usize> {
        if v >= 0.0 && v.fract() == 0.0 && (v as usize) < points.len() {
            Ok(v as usize)
        } else {
            Err(Error::Mesh(format!("{}: bad node index {v}", triangles.display())))
        }
    };
    let t = read_table_csv(triangles)?;
    let cols = [col_index(&t, triangles, "a")?, col_index(&t, triangles, "b")?, col_index(&t, triangles, "c")?];
    let tris = t
        .rows
        .iter()
        .map(|r| Ok([index(r[cols[0]])?, index(r[cols[1]])?, index(r[cols[2]])?]))
        .collect::<Result<Vec<_>>>()?;
    DiscMesh::new(points, tris, boundary.into_iter().map(|(_, i)| i).collect())
}

/// Values CSV (s, f_exp, width) and a dense covariance CSV.
pub fn write_spectral_dataset(values: &Path, covariance: &Path, d: &SpectralDataset) -> Result<()> {
    let rows = (0..d.s.len()).map(|i| vec![d.s[i], d.values[i], d.widths[i]]).collect();
    write_table_csv(values, &Table::new(&["s", "f_exp", "width"], rows))?;
    write_matrix_csv(covariance, &d.covariance)
}

/// The width column is optional; without it widths come from the bin centres.
pub fn read_spectral_dataset(values: &Path, covariance: &Path) -> Result<SpectralDataset> {
    let t = read_table_csv(values)?;
    let (s, f) = (col(&t, values, "s")?, col(&t, values, "f_exp")?);
    let cov = read_matrix_csv(covariance)?;
    match t.column("width") {
        Ok(w) => SpectralDataset::with_widths(s, f, cov, w),
        Err(_) => SpectralDataset::new(s, f, cov),
    }
}

/// Fit surface with one column per scanned condensate (O6, O8, …) then
/// chi_l, mu and active (1 or 0).
pub fn write_surface_csv(path: &Path, dims: &[u32], surface: &[SurfacePoint]) -> Result<()> {
    if dims.is_empty() || dims.len() > 2 {
        return Err(Error::Data(format!("surface needs one or two axes, got {}", dims.len())));
    }
    let mut headers: Vec<String> = dims.iter().map(|d| format!("O{d}")).collect();
    headers.extend(["chi_l", "mu", "active"].map(String::from));
    let rows = surface
        .iter()
        .map(|p| {
            let mut row = p.params[..dims.len()].to_vec();
            row.extend([p.chi_l, p.mu, if p.active { 1.0 } else { 0.0 }]);
            row
        })
        .collect();
    write_table_csv(path, &Table { headers, rows })
}

/// Returns the scanned dimensions and the surface points.
pub fn read_surface_csv(path: &Path) -> Result<(Vec<u32>, Vec<SurfacePoint>)> {
    let t = read_table_csv(path)?;
    let dims: Vec<u32> = t.headers.iter().filter_map(|h| h.strip_prefix('O')?.parse().ok()).collect();
    if dims.is_empty() || dims.len() > 2 {
        return Err(Error::Data(format!("{}: expected one or two O<d> columns", path.display())));
    }
    let axes = dims.iter().map(|d| col_index(&t, path, &format!("O{d}"))).collect::<Result<Vec<_>>>()?;
    let (c, m, a) = (col_index(&t, path, "chi_l")?, col_index(&t, path, "mu")?, col_index(&t, path, "active")?);
    let points = t
        .rows
        .iter()
        .map(|r| {
            let mut params = [0.0; 2];
            for (slot, &k) in axes.iter().enumerate() {
                params[slot] = r[k];
            }
            SurfacePoint { params, chi_l: r[c], mu: r[m], active: r[a] != 0.0 }
        })
        .collect();
    Ok((dims, points))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rejects_text_cells() {
        let err = read_table("a,b\n1,x\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Data(_)));
    }

    #[test]
    fn table_round_trips_special_values() {
        let t = Table::new(&["v"], vec![vec![f64::NAN], vec![-0.0], vec![1e-300], vec![0.1 + 0.2]]);
        let mut buf = Vec::new();
        write_table(&mut buf, &t).unwrap();
        let back = read_table(buf.as_slice()).unwrap();
        assert!(back.rows[0][0].is_nan());
        for k in 1..4 {
            assert_eq!(back.rows[k][0].to_bits(), t.rows[k][0].to_bits());
        }
    }

    #[test]
    fn missing_file_reports_path() {
        let err = read_table_csv(Path::new("/nonexistent/table.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/table.csv"));
    }
}
