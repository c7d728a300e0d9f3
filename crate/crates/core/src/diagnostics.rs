//! Post-hoc conservation, balance, and curvature-budget checks over
//! recorded curve runs.
//!
//! Sign conventions used throughout: curves are stored counterclockwise,
//! nu is the inward unit normal, and H > 0 for convex counterclockwise
//! curves.

use crate::curve::{decompose_kinematics, CurveRunRecord, CurveSnapshot};
use crate::error::{Error, Result};
use crate::geometry::{energy_density, PlaneCurve};

/// gamma(sigma) = (2/sqrt n) arctan(sigma / sqrt n); the antiderivative of
/// 1/e(sigma), so gamma' = 1/e and |gamma| < pi / sqrt n.
pub fn gamma(sigma: f64, n: usize) -> f64 {
    let rn = (n as f64).sqrt();
    2.0 / rn * (sigma / rn).atan()
}

fn drift(series: &[f64]) -> f64 {
    let first = series[0];
    series
        .iter()
        .map(|v| (v - first).abs())
        .fold(0.0, f64::max)
}

/// Total energy E_M(t) = integral of e dmu per snapshot.
pub fn total_energy(record: &CurveRunRecord) -> Vec<f64> {
    record
        .snapshots
        .iter()
        .map(|s| s.geometry.e_dmu.iter().sum())
        .collect()
}

/// Linear momentum: integral of sigma nu dmu per snapshot (the velocity of
/// the flow integrated against the measure). Constant in time up to scheme
/// error because translations are Killing fields of the plane.
pub fn linear_momentum(record: &CurveRunRecord) -> Vec<[f64; 2]> {
    record
        .snapshots
        .iter()
        .map(|s| {
            let mut p = [0.0; 2];
            for i in 0..s.curve.len() {
                let w = s.curve.sigma[i] * s.geometry.dmu[i];
                p[0] += w * s.geometry.nu[i][0];
                p[1] += w * s.geometry.nu[i][1];
            }
            p
        })
        .collect()
}

/// Angular momentum: integral of <sigma nu, Y(F)> dmu with the rotation
/// field Y(y) = (-y2, y1).
pub fn angular_momentum(record: &CurveRunRecord) -> Vec<f64> {
    record
        .snapshots
        .iter()
        .map(|s| {
            (0..s.curve.len())
                .map(|i| {
                    let y = [-s.curve.vertices[i][1], s.curve.vertices[i][0]];
                    s.curve.sigma[i]
                        * s.geometry.dmu[i]
                        * (s.geometry.nu[i][0] * y[0] + s.geometry.nu[i][1] * y[1])
                })
                .sum()
        })
        .collect()
}

/// Tangential momentum p(t, X) = integral of S(X) dmu, where S is the
/// tangential velocity from finite-difference kinematics. For a normal
/// flow this is zero analytically; the returned series is pure
/// discretization error. Defined at interior snapshots only; the series is
/// padded with the nearest interior value at the ends.
pub fn tangential_momentum(record: &CurveRunRecord, x_field: &[f64]) -> Result<Vec<f64>> {
    let k = record.snapshots.len();
    if k < 3 {
        return Err(Error::InvalidInput(
            "need at least 3 snapshots for tangential momentum".into(),
        ));
    }
    let mut interior = Vec::with_capacity(k - 2);
    for idx in 1..k - 1 {
        let kin = decompose_kinematics(record, idx)?;
        let snap = &record.snapshots[idx];
        if x_field.len() != snap.curve.len() {
            return Err(Error::InvalidInput(
                "tangent field length must match vertex count".into(),
            ));
        }
        let p: f64 = (0..snap.curve.len())
            .map(|i| kin.tangential[i] * x_field[i] * snap.geometry.dmu[i])
            .sum();
        interior.push(p);
    }
    let mut out = Vec::with_capacity(k);
    out.push(interior[0]);
    out.extend_from_slice(&interior);
    out.push(*interior.last().unwrap());
    Ok(out)
}

/// Residual of the balance law d/dt integral <dF/dt, F> dmu =
/// integral (3e - 2) dmu (closed plane curves, n = 1). The left side is a
/// central time difference, the right side midpoint quadrature; returns one
/// residual per interior snapshot.
pub fn momentum_balance_residual(record: &CurveRunRecord) -> Result<Vec<f64>> {
    let k = record.snapshots.len();
    if k < 3 {
        return Err(Error::InvalidInput("need at least 3 snapshots".into()));
    }
    let pairing = |s: &CurveSnapshot| -> f64 {
        (0..s.curve.len())
            .map(|i| {
                s.curve.sigma[i]
                    * s.geometry.dmu[i]
                    * (s.geometry.nu[i][0] * s.curve.vertices[i][0]
                        + s.geometry.nu[i][1] * s.curve.vertices[i][1])
            })
            .sum()
    };
    let mut out = Vec::with_capacity(k - 2);
    for idx in 1..k - 1 {
        let prev = &record.snapshots[idx - 1];
        let here = &record.snapshots[idx];
        let next = &record.snapshots[idx + 1];
        let lhs = (pairing(next) - pairing(prev)) / (next.t - prev.t);
        let rhs: f64 = (0..here.curve.len())
            .map(|i| (3.0 * energy_density(here.curve.sigma[i], 1) - 2.0) * here.geometry.dmu[i])
            .sum();
        out.push(lhs - rhs);
    }
    Ok(out)
}

/// Right side of the momentum balance at one snapshot; useful for checks
/// against closed forms.
pub fn momentum_balance_rhs(snapshot: &CurveSnapshot) -> f64 {
    (0..snapshot.curve.len())
        .map(|i| {
            (3.0 * energy_density(snapshot.curve.sigma[i], 1) - 2.0) * snapshot.geometry.dmu[i]
        })
        .sum()
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ConservationReport {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub energy_drift: f64,
    pub linear_momentum: Vec<[f64; 2]>,
    pub linear_momentum_drift: [f64; 2],
    pub angular_momentum: Vec<f64>,
    pub angular_momentum_drift: f64,
    pub tangential_momentum: Vec<f64>,
    pub tangential_momentum_max: f64,
    pub momentum_balance_residual_max: f64,
    pub rotation_number: Vec<f64>,
    pub rotation_number_drift: f64,
    pub winding_number: Vec<f64>,
    pub winding_point: [f64; 2],
}

pub fn conservation_report(record: &CurveRunRecord, winding_point: [f64; 2]) -> Result<ConservationReport> {
    let energy = total_energy(record);
    let lin = linear_momentum(record);
    let ang = angular_momentum(record);
    let tangent_field = vec![1.0; record.snapshots[0].curve.len()];
    let tang = tangential_momentum(record, &tangent_field)?;
    let balance = momentum_balance_residual(record)?;
    let rot: Vec<f64> = record
        .snapshots
        .iter()
        .map(|s| rotation_number_snapshot(s))
        .collect();
    let wind: Vec<f64> = record
        .snapshots
        .iter()
        .map(|s| winding_number_snapshot(s, winding_point))
        .collect();

    let lin_drift = [
        drift(&lin.iter().map(|p| p[0]).collect::<Vec<_>>()),
        drift(&lin.iter().map(|p| p[1]).collect::<Vec<_>>()),
    ];
    Ok(ConservationReport {
        times: record.times(),
        energy_drift: drift(&energy),
        energy,
        linear_momentum_drift: lin_drift,
        linear_momentum: lin,
        angular_momentum_drift: drift(&ang),
        angular_momentum: ang,
        tangential_momentum_max: tang.iter().map(|v| v.abs()).fold(0.0, f64::max),
        tangential_momentum: tang,
        momentum_balance_residual_max: balance.iter().map(|v| v.abs()).fold(0.0, f64::max),
        rotation_number_drift: drift(&rot),
        rotation_number: rot,
        winding_number: wind,
        winding_point,
    })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CurvatureBudget {
    /// f_U(t) = integral over U of (sigma + gamma e) dmu
    pub f_u: Vec<f64>,
    /// E_U = integral over U of e dmu, evaluated per snapshot; constant in
    /// time analytically
    pub e_u: Vec<f64>,
    pub e_u_drift: f64,
    /// double integral of H dmu dt over U
    pub h_time_integral: f64,
    /// double integral of H e dmu dt over U
    pub he_time_integral: f64,
    /// |Delta f_U| (n = 1, so the 1/n factor is 1)
    pub f_u_change: f64,
    /// 2 pi E_U / (n sqrt n) bound from the budget inequality
    pub h_bound: f64,
    /// (bu3) holds at every snapshot: |f_U| < (pi/sqrt n) E_U
    pub bound_f_ok: bool,
    /// (bu4) holds at every snapshot: |int_U sigma dmu| <= E_U / sqrt n
    pub bound_sigma_ok: bool,
    /// identity |Delta f_U| = n |int int H dmu dt| discrepancy (exact for
    /// U = the whole curve; reported, not asserted, for proper subsets)
    pub identity_gap: f64,
    pub is_full_curve: bool,
}

/// Curvature budget over the vertex subset `u` (n = 1 throughout). Time
/// integrals use the trapezoid rule over snapshots.
pub fn curvature_budget(record: &CurveRunRecord, u: &[usize]) -> Result<CurvatureBudget> {
    let m = record.snapshots[0].curve.len();
    if u.is_empty() {
        return Err(Error::InvalidInput("vertex subset must be nonempty".into()));
    }
    if u.iter().any(|&i| i >= m) {
        return Err(Error::InvalidInput("vertex index out of range".into()));
    }
    let n = 1usize;
    let rn = (n as f64).sqrt();

    let f_u: Vec<f64> = record
        .snapshots
        .iter()
        .map(|s| {
            u.iter()
                .map(|&i| {
                    let sig = s.curve.sigma[i];
                    (sig + gamma(sig, n) * energy_density(sig, n)) * s.geometry.dmu[i]
                })
                .sum()
        })
        .collect();
    let e_u: Vec<f64> = record
        .snapshots
        .iter()
        .map(|s| u.iter().map(|&i| s.geometry.e_dmu[i]).sum())
        .collect();
    let sigma_u: Vec<f64> = record
        .snapshots
        .iter()
        .map(|s| u.iter().map(|&i| s.curve.sigma[i] * s.geometry.dmu[i]).sum())
        .collect();

    // trapezoid in time of the spatial quadratures
    let spatial_h = |s: &CurveSnapshot, weighted: bool| -> f64 {
        u.iter()
            .map(|&i| {
                let w = if weighted {
                    energy_density(s.curve.sigma[i], n)
                } else {
                    1.0
                };
                s.geometry.h[i] * w * s.geometry.dmu[i]
            })
            .sum()
    };
    let mut h_int = 0.0;
    let mut he_int = 0.0;
    for k in 1..record.snapshots.len() {
        let a = &record.snapshots[k - 1];
        let b = &record.snapshots[k];
        let dt = b.t - a.t;
        h_int += 0.5 * dt * (spatial_h(a, false) + spatial_h(b, false));
        he_int += 0.5 * dt * (spatial_h(a, true) + spatial_h(b, true));
    }

    let e0 = e_u[0];
    let f_change = (f_u.last().unwrap() - f_u[0]).abs();
    let bound_f_ok = f_u
        .iter()
        .zip(&e_u)
        .all(|(f, e)| f.abs() < std::f64::consts::PI / rn * e);
    let bound_sigma_ok = sigma_u
        .iter()
        .zip(&e_u)
        .all(|(s, e)| s.abs() <= e / rn + 1e-12 * e.abs());

    Ok(CurvatureBudget {
        e_u_drift: drift(&e_u),
        f_u_change: f_change,
        h_bound: 2.0 * std::f64::consts::PI * e0 / (n as f64 * rn),
        bound_f_ok,
        bound_sigma_ok,
        identity_gap: (f_change - (n as f64) * h_int.abs()).abs(),
        is_full_curve: u.len() == m,
        f_u,
        e_u,
        h_time_integral: h_int,
        he_time_integral: he_int,
    })
}

/// Time integral of H at one vertex across the run (trapezoid rule), which
/// equals gamma(sigma(t2)) - gamma(sigma(t1)) and is bounded by 2 pi in
/// magnitude for n = 1. Returns (integral, gamma change).
pub fn pointwise_curvature_bound(record: &CurveRunRecord, vertex: usize) -> Result<(f64, f64)> {
    let m = record.snapshots[0].curve.len();
    if vertex >= m {
        return Err(Error::InvalidInput("vertex index out of range".into()));
    }
    let mut integral = 0.0;
    for k in 1..record.snapshots.len() {
        let a = &record.snapshots[k - 1];
        let b = &record.snapshots[k];
        integral += 0.5 * (b.t - a.t) * (a.geometry.h[vertex] + b.geometry.h[vertex]);
    }
    let dgamma = gamma(record.snapshots.last().unwrap().curve.sigma[vertex], 1)
        - gamma(record.snapshots[0].curve.sigma[vertex], 1);
    Ok((integral, dgamma))
}

fn rotation_number_snapshot(snapshot: &CurveSnapshot) -> f64 {
    let total: f64 = (0..snapshot.curve.len())
        .map(|i| snapshot.geometry.h[i] * snapshot.geometry.dmu[i])
        .sum();
    total / (2.0 * std::f64::consts::PI)
}

/// Rotation number chi = (1/2pi) closed integral of H dmu; 1 for simple
/// counterclockwise curves with the inward-normal convention.
pub fn rotation_number(curve: &PlaneCurve) -> Result<f64> {
    let geometry = crate::geometry::curve_geometry(curve)?;
    let total: f64 = (0..curve.len())
        .map(|i| geometry.h[i] * geometry.dmu[i])
        .sum();
    Ok(total / (2.0 * std::f64::consts::PI))
}

fn winding_number_snapshot(snapshot: &CurveSnapshot, p: [f64; 2]) -> f64 {
    winding_quadrature(&snapshot.curve, &snapshot.geometry.nu, &snapshot.geometry.dmu, p)
}

fn winding_quadrature(curve: &PlaneCurve, nu: &[[f64; 2]], dmu: &[f64], p: [f64; 2]) -> f64 {
    // The raw quadrature (1/2pi) int <F - p, nu> / |F - p|^2 dmu evaluates
    // to -1 for a counterclockwise circle about an enclosed point because nu
    // points inward; the sign is flipped so enclosed points wind +1.
    let raw: f64 = (0..curve.len())
        .map(|i| {
            let dx = curve.vertices[i][0] - p[0];
            let dy = curve.vertices[i][1] - p[1];
            let r2 = dx * dx + dy * dy;
            (dx * nu[i][0] + dy * nu[i][1]) / r2 * dmu[i]
        })
        .sum();
    -raw / (2.0 * std::f64::consts::PI)
}

/// Winding number of the curve around `p` via the normal-projection
/// quadrature; near-integer for resolved curves with p off the curve.
pub fn winding_number(curve: &PlaneCurve, p: [f64; 2]) -> Result<f64> {
    let geometry = crate::geometry::curve_geometry(curve)?;
    for v in &curve.vertices {
        let d2 = (v[0] - p[0]).powi(2) + (v[1] - p[1]).powi(2);
        if d2 < 1e-24 {
            return Err(Error::Domain("winding point lies on the curve".into()));
        }
    }
    Ok(winding_quadrature(curve, &geometry.nu, &geometry.dmu, p))
}
