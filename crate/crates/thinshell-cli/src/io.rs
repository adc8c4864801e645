//! CSV field files and run artifacts.

use std::path::Path;

use thinshell::limit::Diagnostics;
use thinshell::rates::RateStudy;
use thinshell::rigid::Subspace;
use thinshell::{SurfaceGrid, V3};

/// Node coordinates must match the grid to this tolerance when reading.
const COORD_TOL: f64 = 1e-9;

/// Shortest round-trip form, in exponent notation outside [1e-4, 1e6).
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e6).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

pub fn write_scalar_field(path: &Path, grid: &SurfaceGrid, values: &[f64]) -> csv::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["s", "theta", "value"])?;
    for (i, v) in values.iter().enumerate() {
        let (j, k) = (i / grid.shape.n_theta, i % grid.shape.n_theta);
        w.write_record([num(grid.s[j]), num(grid.theta[k]), num(*v)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_vector_field(path: &Path, grid: &SurfaceGrid, values: &[V3]) -> csv::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["s", "theta", "x", "y", "z"])?;
    for (i, v) in values.iter().enumerate() {
        let (j, k) = (i / grid.shape.n_theta, i % grid.shape.n_theta);
        w.write_record([
            num(grid.s[j]),
            num(grid.theta[k]),
            num(v.x),
            num(v.y),
            num(v.z),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a vector field in the layout of `write_vector_field`, nodes in grid order.
pub fn read_vector_field(path: &Path, grid: &SurfaceGrid) -> Result<Vec<V3>, String> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    let mut out = Vec::with_capacity(grid.len());
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| format!("{}: {e}", path.display()))?;
        if rec.len() != 5 {
            return Err(format!("{}: row {} has {} columns, expected 5", path.display(), i + 1, rec.len()));
        }
        let x: Vec<f64> = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| format!("{}: row {}: {e}", path.display(), i + 1))?;
        if i >= grid.len() {
            return Err(format!("{}: more rows than the {} grid nodes", path.display(), grid.len()));
        }
        let (j, k) = (i / grid.shape.n_theta, i % grid.shape.n_theta);
        if (x[0] - grid.s[j]).abs() > COORD_TOL || (x[1] - grid.theta[k]).abs() > COORD_TOL {
            return Err(format!("{}: row {} is not at grid node ({}, {})", path.display(), i + 1, grid.s[j], grid.theta[k]));
        }
        out.push(V3::new(x[2], x[3], x[4]));
    }
    if out.len() != grid.len() {
        return Err(format!("{}: {} rows for {} grid nodes", path.display(), out.len(), grid.len()));
    }
    Ok(out)
}

/// Rows (epsilon, quantity, reference_norm) and a trailing slope line.
pub fn write_rate_study(path: &Path, study: &RateStudy) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["epsilon", "quantity", "reference_norm"])?;
    for r in &study.rows {
        w.write_record([num(r.eps), num(r.quantity), num(r.reference)])?;
    }
    let mut bytes = w.into_inner().map_err(|e| e.into_error())?;
    bytes.extend_from_slice(format!("# slope = {}\n", num(study.slope)).as_bytes());
    std::fs::write(path, bytes)
}

pub fn write_diagnostics(path: &Path, diags: &[(f64, Diagnostics)]) -> csv::Result<()> {
    let n_k = diags.first().map_or(0, |(_, d)| d.killing_amps.len());
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> =
        ["t", "energy", "dissipation", "div_residual", "energy_residual"].iter().map(|s| s.to_string()).collect();
    header.extend((0..n_k).map(|k| format!("killing_amp_{k}")));
    w.write_record(&header)?;
    for (t, d) in diags {
        let mut row = vec![
            num(*t),
            num(d.energy),
            num(d.dissipation),
            num(d.div_residual),
            num(d.energy_residual),
        ];
        row.extend(d.killing_amps.iter().map(|a| num(*a)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Basis fields a x x + b of each scanned space.
pub fn write_killing_basis(path: &Path, spaces: &[(&str, &Subspace)]) -> csv::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["space", "index", "a_x", "a_y", "a_z", "b_x", "b_y", "b_z"])?;
    for (name, sub) in spaces {
        for (k, f) in sub.basis.iter().enumerate() {
            let mut row = vec![name.to_string(), k.to_string()];
            row.extend(f.a.iter().chain(f.b.iter()).map(|x| num(*x)));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use thinshell::Surface;

    #[test]
    fn vector_field_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let grid = SurfaceGrid::new(&Surface::sphere(1.0, 6, 6).unwrap()).unwrap();
        let v: Vec<V3> = grid.points.iter().map(|p| V3::z().cross(&p.y)).collect();
        let path = dir.path().join("v.csv");
        write_vector_field(&path, &grid, &v).unwrap();
        assert_eq!(read_vector_field(&path, &grid).unwrap(), v);
        let other = SurfaceGrid::new(&Surface::sphere(1.0, 8, 8).unwrap()).unwrap();
        assert!(read_vector_field(&path, &other).is_err());
        assert!(read_vector_field(&dir.path().join("none.csv"), &grid).is_err());
    }
}
