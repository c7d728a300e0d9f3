//! Radially symmetric solutions: a sphere of radius r(t) under the normal
//! flow obeys the scalar ODE r r'' + (n/2) r'^2 + n^2/2 = 0 with
//! r'(0) = -sigma0. For n = 2 the solution is an explicit quadratic in t;
//! for n = 1 it is a cycloid given implicitly.

use crate::error::{Error, Result};

/// r'' from the reduced ODE. `r` must be positive.
pub fn sphere_accel(r: f64, rdot: f64, n: usize) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    let nf = n as f64;
    Ok(-(0.5 * nf * rdot * rdot + 0.5 * nf * nf) / r)
}

/// First integral of the ODE: |r'| as a function of r, with the sign fixed
/// by the initial normal speed (r' = -sigma along the flow, so r' > 0 iff
/// sigma0 < 0 at least until a turning point).
pub fn sphere_rdot_firstorder(r: f64, r0: f64, sigma0: f64, n: usize) -> Result<f64> {
    if !(r > 0.0) || !(r0 > 0.0) {
        return Err(Error::Domain("radii must be positive".into()));
    }
    let nf = n as f64;
    let inside = (nf + sigma0 * sigma0) * (r0 / r).powf(nf) - nf;
    if inside < -1e-12 {
        return Err(Error::Domain(format!(
            "radius {r} is outside the reachable range (discriminant {inside})"
        )));
    }
    let mag = inside.max(0.0).sqrt();
    Ok(if sigma0 < 0.0 { mag } else { -mag })
}

/// Closed form for n = 2: r(t) = sqrt(r0^2 - 2 r0 sigma0 t - 2 t^2).
pub fn exact_radius_n2(t: f64, r0: f64, sigma0: f64) -> Result<f64> {
    let r2 = r0 * r0 - 2.0 * r0 * sigma0 * t - 2.0 * t * t;
    if r2 <= 0.0 {
        return Err(Error::Domain(format!(
            "sphere already collapsed at t = {t}"
        )));
    }
    Ok(r2.sqrt())
}

/// Collapse time for n = 2: T = (r0/2)(-sigma0 + sqrt(sigma0^2 + 2)).
pub fn blowup_time_n2(r0: f64, sigma0: f64) -> f64 {
    0.5 * r0 * (-sigma0 + (sigma0 * sigma0 + 2.0).sqrt())
}

/// Implicit cycloid relation for n = 1. Returns the defect of
/// r sqrt(c/r - 1) + c arctan sqrt(c/r - 1) = +-(t + r0 sigma0 + c arctan sigma0)
/// with c = r0 (1 + sigma0^2); the minus branch applies for sigma0 < 0 and is
/// valid only up to the turning point where r reaches c.
pub fn cycloid_residual_n1(t: f64, r: f64, r0: f64, sigma0: f64) -> Result<f64> {
    if !(r > 0.0) || !(r0 > 0.0) {
        return Err(Error::Domain("radii must be positive".into()));
    }
    let c = r0 * (1.0 + sigma0 * sigma0);
    let ratio = c / r - 1.0;
    if ratio < -1e-9 {
        return Err(Error::Domain(format!(
            "radius {r} exceeds the cycloid apex {c}"
        )));
    }
    let root = ratio.max(0.0).sqrt();
    let lhs = r * root + c * root.atan();
    let rhs = t + r0 * sigma0 + c * sigma0.atan();
    let signed_rhs = if sigma0 < 0.0 { -rhs } else { rhs };
    Ok(lhs - signed_rhs)
}

#[derive(Debug, Clone)]
pub struct SphereTrajectory {
    pub n: usize,
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    pub rdot: Vec<f64>,
    /// collapse time estimate when the run ended in collapse
    pub collapse_time: Option<f64>,
}

impl SphereTrajectory {
    pub fn last(&self) -> (f64, f64, f64) {
        let k = self.t.len() - 1;
        (self.t[k], self.r[k], self.rdot[k])
    }
}

fn rk4_sphere(r: f64, rdot: f64, n: usize, dt: f64) -> Result<(f64, f64)> {
    let k1 = (rdot, sphere_accel(r, rdot, n)?);
    let k2 = (
        rdot + 0.5 * dt * k1.1,
        sphere_accel(r + 0.5 * dt * k1.0, rdot + 0.5 * dt * k1.1, n)?,
    );
    let k3 = (
        rdot + 0.5 * dt * k2.1,
        sphere_accel(r + 0.5 * dt * k2.0, rdot + 0.5 * dt * k2.1, n)?,
    );
    let k4 = (
        rdot + dt * k3.1,
        sphere_accel(r + dt * k3.0, rdot + dt * k3.1, n)?,
    );
    Ok((
        r + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        rdot + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    ))
}

/// RK4 integration of the radius ODE with r'(0) = -sigma0. The run stops at
/// `t_end` or when the radius drops below `r_floor` (or an RK4 stage would
/// leave r > 0); on collapse the final crossing time is estimated by
/// extrapolating r^2 quadratically through the last three samples, which is
/// exact for n = 2.
pub fn integrate_sphere(
    r0: f64,
    sigma0: f64,
    n: usize,
    dt: f64,
    t_end: f64,
    r_floor: f64,
) -> Result<SphereTrajectory> {
    if !(r0 > 0.0) {
        return Err(Error::InvalidInput("r0 must be positive".into()));
    }
    if n == 0 {
        return Err(Error::InvalidInput("dimension n must be positive".into()));
    }
    if !(dt > 0.0) || !(t_end > 0.0) {
        return Err(Error::InvalidInput("dt and t_end must be positive".into()));
    }
    let r_floor = r_floor.max(0.0);

    let mut traj = SphereTrajectory {
        n,
        t: vec![0.0],
        r: vec![r0],
        rdot: vec![-sigma0],
        collapse_time: None,
    };
    let (mut t, mut r, mut rdot) = (0.0, r0, -sigma0);
    let mut collapsed = false;

    while t < t_end - 1e-15 {
        let step = dt.min(t_end - t);
        match rk4_sphere(r, rdot, n, step) {
            Ok((rn, rdn)) if rn > r_floor => {
                r = rn;
                rdot = rdn;
                t += step;
                traj.t.push(t);
                traj.r.push(r);
                traj.rdot.push(rdot);
            }
            _ => {
                collapsed = true;
                break;
            }
        }
    }

    if collapsed {
        traj.collapse_time = Some(extrapolate_collapse(&traj));
    }
    Ok(traj)
}

/// Root of the quadratic through the last three (t, r^2) samples; exact for
/// n = 2 where r^2 is itself quadratic in t.
fn extrapolate_collapse(traj: &SphereTrajectory) -> f64 {
    let k = traj.t.len();
    if k < 3 {
        return *traj.t.last().unwrap();
    }
    let (t0, t1, t2) = (traj.t[k - 3], traj.t[k - 2], traj.t[k - 1]);
    let (y0, y1, y2) = (
        traj.r[k - 3] * traj.r[k - 3],
        traj.r[k - 2] * traj.r[k - 2],
        traj.r[k - 1] * traj.r[k - 1],
    );
    // Newton divided differences for the interpolating quadratic
    let d01 = (y1 - y0) / (t1 - t0);
    let d12 = (y2 - y1) / (t2 - t1);
    let d012 = (d12 - d01) / (t2 - t0);
    // p(t) = y2 + (d12 + d012 (t2 - t1)) (t - t2) + d012 (t - t2)^2
    let b = d12 + d012 * (t2 - t1);
    let a = d012;
    if a.abs() < 1e-300 {
        return if b.abs() > 0.0 { t2 - y2 / b } else { t2 };
    }
    let disc = b * b - 4.0 * a * y2;
    if disc < 0.0 {
        return t2;
    }
    let sq = disc.sqrt();
    // the first root after t2
    let cands = [(-b + sq) / (2.0 * a), (-b - sq) / (2.0 * a)];
    let mut best = f64::INFINITY;
    for dt in cands {
        if dt >= 0.0 && dt < best {
            best = dt;
        }
    }
    if best.is_finite() {
        t2 + best
    } else {
        t2
    }
}
