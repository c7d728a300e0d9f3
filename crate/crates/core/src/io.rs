//! CSV serialization of run records. Numbers are written with a fixed
//! scientific format so repeated runs produce identical bytes.

use crate::curve::CurveRunRecord;
use crate::fv::SimulationRecord;
use crate::sphere::SphereTrajectory;
use std::io::Write;

/// Fixed-width scientific rendering used by every CSV writer.
pub fn fmt(v: f64) -> String {
    format!("{v:.17e}")
}

/// Graph snapshots: `t,x[,y],sigma,b1[,b2]`, one row per cell per snapshot.
pub fn write_graph_snapshots(record: &SimulationRecord, out: &mut impl Write) -> std::io::Result<()> {
    let dim = record
        .snapshots
        .first()
        .map(|(_, f)| f.dim)
        .unwrap_or(1);
    if dim == 1 {
        writeln!(out, "t,x,sigma,b1")?;
    } else {
        writeln!(out, "t,x,y,sigma,b1,b2")?;
    }
    for (t, field) in &record.snapshots {
        for iy in 0..field.cells[1] {
            for ix in 0..field.cells[0] {
                let k = field.index(ix, iy);
                let x = (ix as f64 + 0.5) * field.spacing[0];
                if dim == 1 {
                    writeln!(
                        out,
                        "{},{},{},{}",
                        fmt(*t),
                        fmt(x),
                        fmt(field.sigma[k]),
                        fmt(field.b[0][k])
                    )?;
                } else {
                    let y = (iy as f64 + 0.5) * field.spacing[1];
                    writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        fmt(*t),
                        fmt(x),
                        fmt(y),
                        fmt(field.sigma[k]),
                        fmt(field.b[0][k]),
                        fmt(field.b[1][k])
                    )?;
                }
            }
        }
    }
    Ok(())
}

/// Per-step diagnostics: `t,mass_sigma,mass_b1[,mass_b2],entropy,bv,maxb2`.
pub fn write_graph_diagnostics(
    record: &SimulationRecord,
    out: &mut impl Write,
) -> std::io::Result<()> {
    let dim = record
        .snapshots
        .first()
        .map(|(_, f)| f.dim)
        .unwrap_or(1);
    if dim == 1 {
        writeln!(out, "t,mass_sigma,mass_b1,entropy,bv,maxb2")?;
    } else {
        writeln!(out, "t,mass_sigma,mass_b1,mass_b2,entropy,bv,maxb2")?;
    }
    for row in &record.diagnostics {
        if dim == 1 {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt(row.t),
                fmt(row.mass_sigma),
                fmt(row.mass_b[0]),
                fmt(row.entropy),
                fmt(row.bv),
                fmt(row.max_b2)
            )?;
        } else {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                fmt(row.t),
                fmt(row.mass_sigma),
                fmt(row.mass_b[0]),
                fmt(row.mass_b[1]),
                fmt(row.entropy),
                fmt(row.bv),
                fmt(row.max_b2)
            )?;
        }
    }
    Ok(())
}

/// Curve snapshots: `t,vertex,x,y,sigma,H,dmu`, one row per vertex per
/// snapshot.
pub fn write_curve_snapshots(record: &CurveRunRecord, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "t,vertex,x,y,sigma,H,dmu")?;
    for snap in &record.snapshots {
        for i in 0..snap.curve.len() {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                fmt(snap.t),
                i,
                fmt(snap.curve.vertices[i][0]),
                fmt(snap.curve.vertices[i][1]),
                fmt(snap.curve.sigma[i]),
                fmt(snap.geometry.h[i]),
                fmt(snap.geometry.dmu[i])
            )?;
        }
    }
    Ok(())
}

/// Sphere trajectory: `t,r,rdot`.
pub fn write_sphere_trajectory(
    traj: &SphereTrajectory,
    out: &mut impl Write,
) -> std::io::Result<()> {
    writeln!(out, "t,r,rdot")?;
    for k in 0..traj.t.len() {
        writeln!(
            out,
            "{},{},{}",
            fmt(traj.t[k]),
            fmt(traj.r[k]),
            fmt(traj.rdot[k])
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Boundary, GraphField};
    use crate::fv::{run, SolverConfig};

    #[test]
    fn graph_csv_deterministic() {
        let make = || {
            let field = GraphField::from_profile_1d(32, 1.0, Boundary::Periodic, |x| {
                (0.1 * (2.0 * std::f64::consts::PI * x).sin(), 0.05)
            })
            .unwrap();
            let config = SolverConfig {
                t_end: 0.05,
                ..SolverConfig::default()
            };
            run(&field, &config).unwrap()
        };
        let (a, b) = (make(), make());
        let mut buf_a = Vec::new();
        let mut buf_b = Vec::new();
        write_graph_snapshots(&a, &mut buf_a).unwrap();
        write_graph_snapshots(&b, &mut buf_b).unwrap();
        assert_eq!(buf_a, buf_b);
        assert!(buf_a.starts_with(b"t,x,sigma,b1\n"));

        let mut diag = Vec::new();
        write_graph_diagnostics(&a, &mut diag).unwrap();
        assert!(diag.starts_with(b"t,mass_sigma,mass_b1,entropy,bv,maxb2\n"));
    }

    #[test]
    fn sphere_csv_header() {
        let traj = crate::sphere::integrate_sphere(1.0, 0.0, 2, 1e-2, 0.1, 1e-6).unwrap();
        let mut buf = Vec::new();
        write_sphere_trajectory(&traj, &mut buf).unwrap();
        assert!(buf.starts_with(b"t,r,rdot\n"));
    }
}
