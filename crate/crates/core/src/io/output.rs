use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::cases::{Frame, Measurement, ProbeSeries};
use crate::materials::von_mises;
use crate::particles::ParticleSet;
use crate::tensor::{determinant, deviator};
use crate::{Matrix, Result};

use super::SnapshotFormat;

/// Per-particle snapshot columns, in file order. Planar runs write `z` and
/// `vz` as zero.
pub const SNAPSHOT_COLUMNS: [&str; 10] = [
    "x",
    "y",
    "z",
    "vx",
    "vy",
    "vz",
    "von_mises_stress",
    "von_mises_strain",
    "hardening",
    "material_id",
];

/// Writes `contents` to a temporary file next to `path` and renames it
/// into place.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut file = tempfile::NamedTempFile::new_in(dir)?;
    file.write_all(contents.as_bytes())?;
    file.as_file().sync_all()?;
    file.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Equivalent Green-Lagrange strain `sqrt(2/3 |dev E|^2)`.
pub fn von_mises_strain<const D: usize>(f: &Matrix<D>) -> f64 {
    let green = (f.transpose() * f - Matrix::<D>::identity()) * 0.5;
    (2.0 / 3.0 * deviator(&green).norm_squared()).sqrt()
}

/// Snapshot rows as numbers, one per particle, columns as
/// [`SNAPSHOT_COLUMNS`].
fn snapshot_rows<const D: usize>(set: &ParticleSet<D>) -> Vec<[f64; 10]> {
    (0..set.len())
        .map(|i| {
            let mut row = [0.0; 10];
            for k in 0..D {
                row[k] = set.pos[i][k];
                row[3 + k] = set.vel[i][k];
            }
            let cauchy = set.stress[i] / determinant(&set.deformation[i]);
            row[6] = von_mises(&cauchy);
            row[7] = von_mises_strain(&set.deformation[i]);
            row[8] = set.plastic[i].hardening;
            row[9] = set.material[i] as f64;
            row
        })
        .collect()
}

fn number(out: &mut String, v: f64) {
    let _ = write!(out, "{v:.16e}");
}

pub fn write_snapshot_csv<const D: usize>(set: &ParticleSet<D>, path: &Path) -> Result<()> {
    let mut out = SNAPSHOT_COLUMNS.join(",");
    out.push('\n');
    for row in snapshot_rows(set) {
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            if k == 9 {
                let _ = write!(out, "{}", *v as usize);
            } else {
                number(&mut out, *v);
            }
        }
        out.push('\n');
    }
    write_atomic(path, &out)
}

/// Legacy-VTK polydata with one vertex per particle.
pub fn write_snapshot_vtk<const D: usize>(set: &ParticleSet<D>, time: f64, path: &Path) -> Result<()> {
    let rows = snapshot_rows(set);
    let n = rows.len();
    let mut out = String::new();
    let _ = writeln!(out, "# vtk DataFile Version 3.0");
    let _ = writeln!(out, "t = {time:.16e}; columns: {}", SNAPSHOT_COLUMNS.join(" "));
    let _ = writeln!(out, "ASCII\nDATASET POLYDATA\nPOINTS {n} double");
    for row in &rows {
        let _ = writeln!(out, "{:.16e} {:.16e} {:.16e}", row[0], row[1], row[2]);
    }
    let _ = writeln!(out, "VERTICES {n} {}", 2 * n);
    for i in 0..n {
        let _ = writeln!(out, "1 {i}");
    }
    let _ = writeln!(out, "POINT_DATA {n}\nVECTORS velocity double");
    for row in &rows {
        let _ = writeln!(out, "{:.16e} {:.16e} {:.16e}", row[3], row[4], row[5]);
    }
    for (k, name) in SNAPSHOT_COLUMNS.iter().enumerate().skip(6) {
        let kind = if k == 9 { "int" } else { "double" };
        let _ = writeln!(out, "SCALARS {name} {kind} 1\nLOOKUP_TABLE default");
        for row in &rows {
            if k == 9 {
                let _ = writeln!(out, "{}", row[k] as usize);
            } else {
                let _ = writeln!(out, "{:.16e}", row[k]);
            }
        }
    }
    write_atomic(path, &out)
}

/// Writes snapshot number `index` of a frame into `dir`.
pub fn write_frame(dir: &Path, index: usize, frame: &Frame, format: SnapshotFormat) -> Result<()> {
    let stem = dir.join(format!("snapshot_{index:05}"));
    let (vtk, csv) = match format {
        SnapshotFormat::Vtk => (true, false),
        SnapshotFormat::Csv => (false, true),
        SnapshotFormat::Both => (true, true),
    };
    match frame {
        Frame::Planar { time, particles } => {
            if vtk {
                write_snapshot_vtk(particles, *time, &stem.with_extension("vtk"))?;
            }
            if csv {
                write_snapshot_csv(particles, &stem.with_extension("csv"))?;
            }
        }
        Frame::Spatial { time, particles } => {
            if vtk {
                write_snapshot_vtk(particles, *time, &stem.with_extension("vtk"))?;
            }
            if csv {
                write_snapshot_csv(particles, &stem.with_extension("csv"))?;
            }
        }
    }
    Ok(())
}

/// `time,<probe names>` header followed by one row per sample.
pub fn write_probe(series: &ProbeSeries, path: &Path) -> Result<()> {
    let mut out = String::from("time");
    for name in &series.names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (t, row) in series.times.iter().zip(&series.values) {
        number(&mut out, *t);
        for v in row {
            out.push(',');
            number(&mut out, *v);
        }
        out.push('\n');
    }
    write_atomic(path, &out)
}

pub fn write_measurements(measurements: &[Measurement], path: &Path) -> Result<()> {
    let mut out = String::from("quantity,value,unit\n");
    for m in measurements {
        out.push_str(m.quantity);
        out.push(',');
        number(&mut out, m.value);
        let _ = writeln!(out, ",{}", m.unit);
    }
    write_atomic(path, &out)
}
