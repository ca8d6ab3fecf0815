//! CSV tables, snapshots and legacy VTK dumps.
//!
//! Floating-point values are written with `{:e}`, which round-trips.

use std::fmt::Write as _;
use std::path::Path;

use crate::diagnostics::{ConsistencyLevel, ErrorLevel, StepReport, NUM_DISSIPATION_NAMES};
use crate::mesh::Mesh;
use crate::scheme::State;
use crate::{Error, Result};

pub(crate) fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// `steps.csv`. The solver columns `newton_iterations` and `residual` are
/// omitted for recomputed ledgers.
pub fn steps_csv(reports: &[StepReport], solver_columns: bool) -> String {
    let mut s = String::from("k,t,dt,mass,mass_drift,energy,viscous_dissipation");
    for name in NUM_DISSIPATION_NAMES {
        s.push(',');
        s.push_str(name);
    }
    s.push_str(",forcing_work,slack");
    if solver_columns {
        s.push_str(",newton_iterations,residual");
    }
    s.push('\n');
    for r in reports {
        let _ = write!(
            s,
            "{},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.k, r.t, r.dt, r.mass, r.mass_drift, r.energy, r.viscous_dissipation
        );
        for d in r.num_dissipation {
            let _ = write!(s, ",{d:e}");
        }
        let _ = write!(s, ",{:e},{:e}", r.forcing_work, r.slack);
        if solver_columns {
            let _ = write!(s, ",{},{:e}", r.newton_iterations, r.residual);
        }
        s.push('\n');
    }
    s
}

pub fn consistency_csv(levels: &[(usize, ConsistencyLevel)]) -> String {
    let mut s = String::from("n,h,test,continuity,momentum\n");
    for (n, l) in levels {
        for (i, (c, m)) in l.continuity.iter().zip(&l.momentum).enumerate() {
            let _ = writeln!(s, "{n},{:e},{i},{c:e},{m:e}", l.h);
        }
        let _ = writeln!(
            s,
            "{n},{:e},total,{:e},{:e}",
            l.h,
            l.total_continuity(),
            l.total_momentum()
        );
    }
    s
}

pub fn errors_csv(levels: &[(usize, ErrorLevel)]) -> String {
    let mut s = String::from("n,h,norm,error\n");
    for (n, l) in levels {
        let _ = writeln!(s, "{n},{:e},density_Lgamma,{:e}", l.h, l.density);
        let _ = writeln!(s, "{n},{:e},velocity_L2,{:e}", l.h, l.velocity);
    }
    s
}

/// Legacy ASCII VTK unstructured grid with cell density and cell-average
/// velocity.
pub fn vtk_string(mesh: &Mesh, state: &State) -> String {
    let mut s = format!(
        "# vtk DataFile Version 3.0\nstate k={} t={:e}\nASCII\nDATASET UNSTRUCTURED_GRID\nPOINTS {} double\n",
        state.k,
        state.t,
        mesh.vertices().len()
    );
    for v in mesh.vertices() {
        let _ = writeln!(s, "{:e} {:e} {:e}", v.x, v.y, v.z);
    }
    let nc = mesh.num_cells();
    let _ = writeln!(s, "CELLS {nc} {}", 5 * nc);
    for c in mesh.cells() {
        let _ = writeln!(s, "4 {} {} {} {}", c[0], c[1], c[2], c[3]);
    }
    let _ = writeln!(s, "CELL_TYPES {nc}");
    for _ in 0..nc {
        s.push_str("10\n");
    }
    let _ = writeln!(s, "CELL_DATA {nc}\nSCALARS density double 1\nLOOKUP_TABLE default");
    for v in state.rho.values() {
        let _ = writeln!(s, "{v:e}");
    }
    s.push_str("VECTORS velocity double\n");
    for c in 0..nc {
        let u = state.u.cell_average(mesh, c);
        let _ = writeln!(s, "{:e} {:e} {:e}", u.x, u.y, u.z);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_box_mesh, BoxDomain};

    #[test]
    fn steps_csv_layout() {
        let r = StepReport {
            k: 3,
            t: 0.25,
            slack: -1.5e-17,
            newton_iterations: 2,
            ..Default::default()
        };
        let full = steps_csv(&[r.clone()], true);
        let lines: Vec<&str> = full.lines().collect();
        assert_eq!(lines.len(), 2);
        let header: Vec<&str> = lines[0].split(',').collect();
        let row: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(header.len(), 16);
        assert_eq!(row.len(), 16);
        assert_eq!(row[0], "3");
        assert_eq!(row[1].parse::<f64>().unwrap(), 0.25);
        assert_eq!(row[13].parse::<f64>().unwrap(), -1.5e-17);
        assert_eq!(steps_csv(&[r], false).lines().nth(1).unwrap().split(',').count(), 14);
    }

    #[test]
    fn vtk_counts() {
        let mesh = build_box_mesh(&BoxDomain::unit(), [1, 1, 1]).unwrap();
        let s = vtk_string(&mesh, &State::constant(&mesh, 2.0));
        assert!(s.contains("POINTS 8 double"));
        assert!(s.contains("CELLS 6 30"));
        assert_eq!(s.lines().filter(|l| *l == "10").count(), 6);
        assert_eq!(s.lines().filter(|l| *l == "2e0").count(), 6);
    }
}
