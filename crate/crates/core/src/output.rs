//! Legacy ASCII VTK snapshots and CSV time series.
//!
//! Files are written to a sibling temp file and renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::diagnostics;
use crate::error::Result;
use crate::mesh::Mesh;
use crate::solver::RunReport;
use crate::spaces::{FESystem, Field};

/// A field to write. Nodal vectors are per mesh vertex, cell scalars per
/// triangle.
pub enum VtkField<'a> {
    NodeVector(&'a str, &'a [[f64; 2]]),
    CellScalar(&'a str, &'a [f64]),
}

pub const CSV_HEADER: &str = "t,energy,max_vorticity,div_weak,div_pointwise,stab_seminorm,flag";

/// Writes `contents` to `path` via a temp file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut tmp = PathBuf::from(path);
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    tmp.set_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn vtk_string(mesh: &Mesh, fields: &[VtkField<'_>]) -> String {
    let mut s = String::new();
    let nv = mesh.n_vertices();
    let nt = mesh.n_triangles();
    s.push_str("# vtk DataFile Version 3.0\nsmagfem\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {nv} double");
    for p in mesh.vertices() {
        let _ = writeln!(s, "{} {} 0", num(p[0]), num(p[1]));
    }
    let _ = writeln!(s, "CELLS {nt} {}", 4 * nt);
    for t in mesh.triangles() {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {nt}");
    for _ in 0..nt {
        s.push_str("5\n");
    }
    let nodal: Vec<_> = fields
        .iter()
        .filter_map(|f| match f {
            VtkField::NodeVector(n, v) => Some((n, v)),
            _ => None,
        })
        .collect();
    let cell: Vec<_> = fields
        .iter()
        .filter_map(|f| match f {
            VtkField::CellScalar(n, v) => Some((n, v)),
            _ => None,
        })
        .collect();
    if !nodal.is_empty() {
        let _ = writeln!(s, "POINT_DATA {nv}");
        for (name, v) in nodal {
            let _ = writeln!(s, "VECTORS {name} double");
            for x in v.iter() {
                let _ = writeln!(s, "{} {} 0", num(x[0]), num(x[1]));
            }
        }
    }
    if !cell.is_empty() {
        let _ = writeln!(s, "CELL_DATA {nt}");
        for (name, v) in cell {
            let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
            for x in v.iter() {
                let _ = writeln!(s, "{}", num(*x));
            }
        }
    }
    s
}

/// # Panics
/// If a field length does not match the mesh.
pub fn write_vtk(path: &Path, mesh: &Mesh, fields: &[VtkField<'_>]) -> Result<()> {
    for f in fields {
        match f {
            VtkField::NodeVector(n, v) => assert_eq!(v.len(), mesh.n_vertices(), "field {n}"),
            VtkField::CellScalar(n, v) => assert_eq!(v.len(), mesh.n_triangles(), "field {n}"),
        }
    }
    write_atomic(path, &vtk_string(mesh, fields))
}

/// Velocity (per vertex), vorticity and macro pressure (per triangle).
pub fn write_snapshot(path: &Path, system: &FESystem, u: &Field, p: &Field) -> Result<()> {
    let mesh = system.mesh();
    let velocity: Vec<[f64; 2]> = (0..mesh.n_vertices())
        .map(|v| {
            let n = system.node_of_vertex(v);
            [u.coeffs[2 * n], u.coeffs[2 * n + 1]]
        })
        .collect();
    let vorticity = diagnostics::vorticity(system, u);
    let pressure: Vec<f64> = mesh.macro_parent().iter().map(|&m| p.coeffs[m]).collect();
    write_vtk(
        path,
        mesh,
        &[
            VtkField::NodeVector("velocity", &velocity),
            VtkField::CellScalar("vorticity", &vorticity.coeffs),
            VtkField::CellScalar("pressure", &pressure),
        ],
    )
}

pub fn timeseries_string(report: Option<&RunReport>) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in report.map(|r| r.rows.as_slice()).unwrap_or(&[]) {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            num(r.t),
            num(r.energy),
            num(r.max_vorticity),
            num(r.div_weak),
            num(r.div_pointwise),
            num(r.stab_seminorm),
            r.flag
        );
    }
    s
}

pub fn write_timeseries(path: &Path, report: &RunReport) -> Result<()> {
    write_atomic(path, &timeseries_string(Some(report)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::BoundaryTag;
    use crate::solver::{ReportRow, RunFlag, TimeState};
    use crate::spaces::{Field, FieldKind};
    use std::time::Duration;

    fn one_triangle() -> Mesh {
        Mesh::from_parts(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![[0, 1, 2]],
            vec![0],
            |_, _| Ok(BoundaryTag::Wall),
        )
        .unwrap()
    }

    const GOLDEN: &str = "# vtk DataFile Version 3.0
smagfem
ASCII
DATASET UNSTRUCTURED_GRID
POINTS 3 double
0.0000000000000000e0 0.0000000000000000e0 0
1.0000000000000000e0 0.0000000000000000e0 0
0.0000000000000000e0 1.0000000000000000e0 0
CELLS 1 4
3 0 1 2
CELL_TYPES 1
5
POINT_DATA 3
VECTORS velocity double
1.0000000000000000e0 -5.0000000000000000e-1 0
1.0000000000000000e0 -5.0000000000000000e-1 0
1.0000000000000000e0 -5.0000000000000000e-1 0
CELL_DATA 1
SCALARS vorticity double 1
LOOKUP_TABLE default
0.0000000000000000e0
";

    #[test]
    fn golden_single_triangle() {
        let m = one_triangle();
        let v = [[1.0, -0.5]; 3];
        let s = vtk_string(
            &m,
            &[VtkField::NodeVector("velocity", &v), VtkField::CellScalar("vorticity", &[0.0])],
        );
        assert_eq!(s, GOLDEN);
    }

    #[test]
    fn geometry_only() {
        let s = vtk_string(&one_triangle(), &[]);
        assert!(s.ends_with("CELL_TYPES 1\n5\n"));
        assert!(!s.contains("POINT_DATA"));
    }

    fn report(n: usize) -> RunReport {
        let row = |t| ReportRow {
            t,
            energy: 1.0 / 3.0,
            max_vorticity: 2.0,
            div_weak: 0.0,
            div_pointwise: 1e-300,
            stab_seminorm: 0.1,
            flag: RunFlag::Ok,
        };
        let u = Field::new(FieldKind::Velocity, vec![]);
        RunReport {
            rows: (0..n).map(|i| row(i as f64 * 0.01)).collect(),
            steps: Vec::new(),
            flag: RunFlag::Ok,
            instability_time: None,
            stab_time_integral: 0.0,
            final_state: TimeState::initial(u.clone(), u),
            wall_time: Duration::ZERO,
        }
    }

    #[test]
    fn csv_shapes() {
        assert_eq!(timeseries_string(None), format!("{CSV_HEADER}\n"));
        let s = timeseries_string(Some(&report(2)));
        assert_eq!(s.lines().count(), 3);
        let energy: f64 = s.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(energy, 1.0 / 3.0);
        assert!(s.lines().nth(1).unwrap().ends_with(",OK"));
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("series.csv");
        write_timeseries(&path, &report(1)).unwrap();
        write_timeseries(&path, &report(3)).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 4);
        let names: Vec<_> = fs::read_dir(path.parent().unwrap()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 1);
    }
}
