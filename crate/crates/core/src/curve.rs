//! Parametric normal flow of closed plane curves: the coupled evolution
//! dF/dt = sigma nu, dsigma/dt = e(sigma) H, integrated with classical RK4,
//! plus finite-difference verification hooks for the evolution identities.

use crate::error::{Error, Result};
use crate::geometry::{curve_geometry, energy_density, CurveGeometry, PlaneCurve};

/// Finite-difference velocity and acceleration of a recorded flow, split
/// into normal and tangential components.
#[derive(Debug, Clone)]
pub struct FlowKinematics {
    /// normal velocity per vertex
    pub sigma: Vec<f64>,
    /// tangential velocity per vertex; stays at discretization level for a
    /// normal flow
    pub tangential: Vec<f64>,
    /// normal acceleration per vertex; equals e H for this flow
    pub alpha: Vec<f64>,
    /// tangential acceleration per vertex
    pub tangential_accel: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CurveTermination {
    ReachedEnd,
    /// min edge length or curvature bound tripped; the curve is collapsing
    CollapseDetected,
    BlowUp,
}

#[derive(Debug, Clone)]
pub struct CurveSnapshot {
    pub t: f64,
    pub curve: PlaneCurve,
    pub geometry: CurveGeometry,
}

#[derive(Debug, Clone)]
pub struct CurveRunRecord {
    pub snapshots: Vec<CurveSnapshot>,
    pub termination: CurveTermination,
}

impl CurveRunRecord {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    /// Mean vertex distance from the centroid; the radius for circle runs.
    pub fn radius(&self, index: usize) -> f64 {
        let verts = &self.snapshots[index].curve.vertices;
        let m = verts.len() as f64;
        let cx = verts.iter().map(|v| v[0]).sum::<f64>() / m;
        let cy = verts.iter().map(|v| v[1]).sum::<f64>() / m;
        verts
            .iter()
            .map(|v| ((v[0] - cx).powi(2) + (v[1] - cy).powi(2)).sqrt())
            .sum::<f64>()
            / m
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CurveFlowConfig {
    pub dt: f64,
    pub t_end: f64,
    /// snapshot cadence in steps
    pub record_every: usize,
}

/// Right-hand side of the coupled system: velocity = sigma nu and
/// sigma_dot = e(sigma) H.
pub fn curve_rhs(curve: &PlaneCurve) -> Result<(Vec<[f64; 2]>, Vec<f64>)> {
    let geo = curve_geometry(curve)?;
    let m = curve.len();
    let mut velocity = vec![[0.0; 2]; m];
    let mut sigma_dot = vec![0.0; m];
    for i in 0..m {
        let s = curve.sigma[i];
        velocity[i] = [s * geo.nu[i][0], s * geo.nu[i][1]];
        sigma_dot[i] = energy_density(s, 1) * geo.h[i];
    }
    Ok((velocity, sigma_dot))
}

const EDGE_COLLAPSE_FACTOR: f64 = 1e-6;
const CURVATURE_BLOWUP: f64 = 1e6;

fn min_edge(curve: &PlaneCurve) -> f64 {
    let m = curve.len();
    (0..m)
        .map(|i| {
            let j = (i + 1) % m;
            let dx = curve.vertices[j][0] - curve.vertices[i][0];
            let dy = curve.vertices[j][1] - curve.vertices[i][1];
            (dx * dx + dy * dy).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

fn mean_edge(curve: &PlaneCurve) -> f64 {
    let m = curve.len();
    (0..m)
        .map(|i| {
            let j = (i + 1) % m;
            let dx = curve.vertices[j][0] - curve.vertices[i][0];
            let dy = curve.vertices[j][1] - curve.vertices[i][1];
            (dx * dx + dy * dy).sqrt()
        })
        .sum::<f64>()
        / m as f64
}

fn rk4_step(curve: &PlaneCurve, dt: f64) -> Result<PlaneCurve> {
    let m = curve.len();

    let add = |base: &PlaneCurve, vel: &[[f64; 2]], sdot: &[f64], scale: f64| {
        let mut out = base.clone();
        for i in 0..m {
            out.vertices[i][0] += scale * vel[i][0];
            out.vertices[i][1] += scale * vel[i][1];
            out.sigma[i] += scale * sdot[i];
        }
        out
    };

    let (v1, s1) = curve_rhs(curve)?;
    let (v2, s2) = curve_rhs(&add(curve, &v1, &s1, 0.5 * dt))?;
    let (v3, s3) = curve_rhs(&add(curve, &v2, &s2, 0.5 * dt))?;
    let (v4, s4) = curve_rhs(&add(curve, &v3, &s3, dt))?;

    let mut out = curve.clone();
    for i in 0..m {
        for c in 0..2 {
            out.vertices[i][c] +=
                dt / 6.0 * (v1[i][c] + 2.0 * v2[i][c] + 2.0 * v3[i][c] + v4[i][c]);
        }
        out.sigma[i] += dt / 6.0 * (s1[i] + 2.0 * s2[i] + 2.0 * s3[i] + s4[i]);
    }
    Ok(out)
}

/// Integrates the curve flow with fixed-step RK4, stopping at `t_end`, at
/// collapse (min edge below 1e-6 of the initial mean edge, or |H| above
/// 1e6), or on non-finite data.
pub fn run_curve(initial: &PlaneCurve, config: &CurveFlowConfig) -> Result<CurveRunRecord> {
    if !(config.dt > 0.0) || !(config.t_end > 0.0) {
        return Err(Error::InvalidInput("dt and t_end must be positive".into()));
    }
    let record_every = config.record_every.max(1);
    let edge_floor = EDGE_COLLAPSE_FACTOR * mean_edge(initial);
    let area_floor = 1e-10 * crate::geometry::signed_area(&initial.vertices).abs();

    let mut curve = initial.clone();
    let mut t = 0.0;
    let mut snapshots = vec![CurveSnapshot {
        t,
        curve: curve.clone(),
        geometry: curve_geometry(&curve)?,
    }];
    let mut steps: usize = 0;

    let termination = loop {
        if t >= config.t_end - 1e-15 {
            break CurveTermination::ReachedEnd;
        }
        let dt = config.dt.min(config.t_end - t);
        let next = match rk4_step(&curve, dt) {
            Ok(c) => c,
            Err(Error::DegenerateEdge { .. }) | Err(Error::DegenerateCurve(_)) => {
                break CurveTermination::CollapseDetected
            }
            Err(e) => return Err(e),
        };
        if next
            .vertices
            .iter()
            .flatten()
            .chain(next.sigma.iter())
            .any(|v| !v.is_finite())
        {
            break CurveTermination::BlowUp;
        }
        // a fixed-step overshoot through the collapse point inverts or
        // degenerates the polygon and sends sigma wild; reject such steps
        // and keep the last good state as final
        let sigma_before = curve.sigma.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        let sigma_after = next.sigma.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        if crate::geometry::signed_area(&next.vertices) <= area_floor
            || sigma_after > 10.0 * (sigma_before + 1.0)
        {
            break CurveTermination::CollapseDetected;
        }
        curve = next;
        t += dt;
        steps += 1;

        let geometry = match curve_geometry(&curve) {
            Ok(g) => g,
            Err(_) => break CurveTermination::CollapseDetected,
        };
        let collapsing = min_edge(&curve) < edge_floor
            || geometry.h.iter().any(|h| h.abs() > CURVATURE_BLOWUP);
        if steps % record_every == 0 || collapsing {
            snapshots.push(CurveSnapshot {
                t,
                curve: curve.clone(),
                geometry,
            });
        }
        if collapsing {
            break CurveTermination::CollapseDetected;
        }
    };

    if (snapshots.last().unwrap().t - t).abs() > 1e-15 {
        if let Ok(geometry) = curve_geometry(&curve) {
            snapshots.push(CurveSnapshot {
                t,
                curve,
                geometry,
            });
        }
    }
    Ok(CurveRunRecord {
        snapshots,
        termination,
    })
}

/// Regular m-gon of radius `r0` with uniform normal speed `sigma0`.
pub fn circle_initial(r0: f64, sigma0: f64, m: usize) -> Result<PlaneCurve> {
    crate::geometry::circle_curve(r0, sigma0, m)
}

/// Axis-aligned ellipse with semi-axes `ax`, `by`, sampled uniformly in the
/// parameter angle, with per-vertex normal speed from `sigma0`.
pub fn ellipse_initial(
    ax: f64,
    by: f64,
    m: usize,
    mut sigma0: impl FnMut(f64) -> f64,
) -> Result<PlaneCurve> {
    if ax <= 0.0 || by <= 0.0 {
        return Err(Error::InvalidInput("semi-axes must be positive".into()));
    }
    let mut vertices = Vec::with_capacity(m);
    let mut sigma = Vec::with_capacity(m);
    for k in 0..m {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
        vertices.push([ax * theta.cos(), by * theta.sin()]);
        sigma.push(sigma0(theta));
    }
    PlaneCurve::new(vertices, sigma)
}

/// Central-difference kinematics at an interior snapshot index, projected
/// onto the discrete normal and tangent.
pub fn decompose_kinematics(record: &CurveRunRecord, index: usize) -> Result<FlowKinematics> {
    if index == 0 || index + 1 >= record.snapshots.len() {
        return Err(Error::InvalidInput(format!(
            "kinematics needs snapshots on both sides of index {index}"
        )));
    }
    let prev = &record.snapshots[index - 1];
    let here = &record.snapshots[index];
    let next = &record.snapshots[index + 1];
    let dt_f = next.t - here.t;
    let dt_b = here.t - prev.t;
    let m = here.curve.len();

    let mut out = FlowKinematics {
        sigma: vec![0.0; m],
        tangential: vec![0.0; m],
        alpha: vec![0.0; m],
        tangential_accel: vec![0.0; m],
    };
    for i in 0..m {
        let mut vel = [0.0; 2];
        let mut acc = [0.0; 2];
        for c in 0..2 {
            let f_prev = prev.curve.vertices[i][c];
            let f_here = here.curve.vertices[i][c];
            let f_next = next.curve.vertices[i][c];
            vel[c] = (f_next - f_prev) / (dt_f + dt_b);
            acc[c] = 2.0 * (dt_b * f_next - (dt_f + dt_b) * f_here + dt_f * f_prev)
                / (dt_f * dt_b * (dt_f + dt_b));
        }
        let nu = here.geometry.nu[i];
        let tang = here.geometry.tangent[i];
        out.sigma[i] = vel[0] * nu[0] + vel[1] * nu[1];
        out.tangential[i] = vel[0] * tang[0] + vel[1] * tang[1];
        out.alpha[i] = acc[0] * nu[0] + acc[1] * nu[1];
        out.tangential_accel[i] = acc[0] * tang[0] + acc[1] * tang[1];
    }
    Ok(out)
}

/// Max residuals of the normal-flow identities d(dmu)/dt = -sigma H dmu and
/// dH/dt = Lap sigma + sigma H^2 over all interior snapshots, via central
/// time differences and the arclength Laplacian.
#[derive(Debug, Clone, Copy)]
pub struct IdentityResiduals {
    pub dmu: f64,
    pub curvature: f64,
}

pub fn verify_normal_flow_identities(record: &CurveRunRecord) -> Result<IdentityResiduals> {
    if record.snapshots.len() < 3 {
        return Err(Error::InvalidInput(
            "need at least 3 snapshots to verify evolution identities".into(),
        ));
    }
    let mut worst_dmu = 0.0f64;
    let mut worst_h = 0.0f64;
    for k in 1..record.snapshots.len() - 1 {
        let prev = &record.snapshots[k - 1];
        let here = &record.snapshots[k];
        let next = &record.snapshots[k + 1];
        let span = next.t - prev.t;
        let m = here.curve.len();
        for i in 0..m {
            let ddmu = (next.geometry.dmu[i] - prev.geometry.dmu[i]) / span;
            let r1 = ddmu + here.curve.sigma[i] * here.geometry.h[i] * here.geometry.dmu[i];
            worst_dmu = worst_dmu.max(r1.abs());

            let dh = (next.geometry.h[i] - prev.geometry.h[i]) / span;
            let ip = (i + m - 1) % m;
            let inx = (i + 1) % m;
            let dmu_i = here.geometry.dmu[i];
            let lap = (here.curve.sigma[inx] - 2.0 * here.curve.sigma[i]
                + here.curve.sigma[ip])
                / (dmu_i * dmu_i);
            let h = here.geometry.h[i];
            let r2 = dh - lap - here.curve.sigma[i] * h * h;
            worst_h = worst_h.max(r2.abs());
        }
    }
    Ok(IdentityResiduals {
        dmu: worst_dmu,
        curvature: worst_h,
    })
}

/// Max residual of the compatibility relation between mixed space and time
/// derivatives: the central time difference of each edge vector must agree
/// with the difference of sigma nu along the edge.
pub fn compatibility_residual(record: &CurveRunRecord) -> Result<f64> {
    if record.snapshots.len() < 3 {
        return Err(Error::InvalidInput("need at least 3 snapshots".into()));
    }
    let mut worst = 0.0f64;
    for k in 1..record.snapshots.len() - 1 {
        let prev = &record.snapshots[k - 1];
        let here = &record.snapshots[k];
        let next = &record.snapshots[k + 1];
        let span = next.t - prev.t;
        let m = here.curve.len();
        for i in 0..m {
            let j = (i + 1) % m;
            for c in 0..2 {
                let edge_rate = ((next.curve.vertices[j][c] - next.curve.vertices[i][c])
                    - (prev.curve.vertices[j][c] - prev.curve.vertices[i][c]))
                    / span;
                let vel_diff = here.curve.sigma[j] * here.geometry.nu[j][c]
                    - here.curve.sigma[i] * here.geometry.nu[i][c];
                worst = worst.max((edge_rate - vel_diff).abs());
            }
        }
    }
    Ok(worst)
}
