//! Conservative finite-volume integration of the (sigma, b) graph system in
//! 1D and 2D, with Riemann, weak-residual, entropy and BV instrumentation.

use crate::error::{Error, Result};
use crate::field::{Boundary, GraphField};
use crate::geometry::energy_density;
use crate::system::ConservedState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum FluxScheme {
    /// global per-axis wave-speed estimate
    LaxFriedrichs,
    /// local per-interface wave speeds
    Rusanov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Integrator {
    ForwardEuler,
    SspRk2,
}

#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct SolverConfig {
    pub flux_scheme: FluxScheme,
    pub cfl: f64,
    pub integrator: Integrator,
    pub t_end: f64,
    pub output_every: usize,
    /// guard margin: runs stop once max |b|^2 >= 1/2 - eps
    pub hyperbolicity_eps: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            flux_scheme: FluxScheme::LaxFriedrichs,
            cfl: 0.45,
            integrator: Integrator::ForwardEuler,
            t_end: 1.0,
            output_every: 1,
            hyperbolicity_eps: 0.005,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::InvalidInput(format!(
                "cfl must lie in (0,1), got {}",
                self.cfl
            )));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::InvalidInput("t_end must be positive".into()));
        }
        if self.output_every == 0 {
            return Err(Error::InvalidInput("output_every must be >= 1".into()));
        }
        if !(self.hyperbolicity_eps > 0.0 && self.hyperbolicity_eps < 0.5) {
            return Err(Error::InvalidInput(
                "hyperbolicity_eps must lie in (0, 1/2)".into(),
            ));
        }
        Ok(())
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Termination {
    ReachedEnd,
    /// max |b|^2 reached 1/2 - eps: loss of certified convexity, not
    /// necessarily blow-up
    ConvexityGuard,
    BlowUpNonFinite,
    BlowUpSigma,
    BlowUpDtCollapse,
}

#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub mass_sigma: f64,
    pub mass_b: [f64; 2],
    pub entropy: f64,
    /// total variation of sigma plus b; only meaningful for 1D fields
    pub bv: f64,
    pub max_b2: f64,
}

#[derive(Debug, Clone)]
pub struct SimulationRecord {
    pub snapshots: Vec<(f64, GraphField)>,
    pub diagnostics: Vec<DiagnosticsRow>,
    pub termination: Termination,
}

/// Physical flux of cell state (sigma, b1, b2) along `axis`, in the layout
/// d_t U + d_x F(U) = 0. `n` is the hypersurface dimension entering the
/// energy density.
#[inline]
pub fn physical_flux(sigma: f64, b1: f64, b2: f64, n: usize, axis: usize) -> [f64; 3] {
    let b_sq = b1 * b1 + b2 * b2;
    let w = (1.0 + b_sq).sqrt();
    let e = energy_density(sigma, n);
    let ba = if axis == 0 { b1 } else { b2 };
    let mut f = [0.0; 3];
    f[0] = -e * ba / w;
    f[1 + axis] = -sigma * w;
    f
}

/// Largest characteristic speed of the directional flux Jacobian at a cell.
///
/// The directional Jacobian has a zero row along the transverse b component,
/// so its spectrum is {0} plus the eigenvalues of the leading 2x2 block,
/// (-sigma b_axis +- sqrt(e (1 + b_other^2))) / w. In 1D this reduces to the
/// closed-form eigenvalue pair of the quasilinear system.
#[inline]
pub fn cell_wave_speed(sigma: f64, b1: f64, b2: f64, n: usize, axis: usize) -> f64 {
    let b_sq = b1 * b1 + b2 * b2;
    let w = (1.0 + b_sq).sqrt();
    let e = energy_density(sigma, n);
    let ba = if axis == 0 { b1 } else { b2 };
    let b_other_sq = b_sq - ba * ba;
    let root = (e * (1.0 + b_other_sq)).sqrt();
    ((sigma * ba).abs() + root) / w
}

/// Maximum wave speed over the grid, per axis.
pub fn max_wave_speed(field: &GraphField) -> Result<[f64; 2]> {
    if !field.is_finite() {
        return Err(Error::BlowUp {
            time: f64::NAN,
            reason: "non-finite state in wave-speed estimate".into(),
        });
    }
    let mut speeds = [0.0; 2];
    for axis in 0..field.dim {
        let mut max = 0.0f64;
        for k in 0..field.total_cells() {
            let b2 = if field.dim == 2 { field.b[1][k] } else { 0.0 };
            max = max.max(cell_wave_speed(field.sigma[k], field.b[0][k], b2, field.n, axis));
        }
        speeds[axis] = max;
    }
    Ok(speeds)
}

/// Total entropy integral over the grid.
pub fn total_entropy(field: &GraphField) -> f64 {
    let vol = field.cell_volume();
    (0..field.total_cells())
        .map(|k| {
            let b2 = if field.dim == 2 { field.b[1][k] } else { 0.0 };
            let b_sq = field.b[0][k] * field.b[0][k] + b2 * b2;
            energy_density(field.sigma[k], field.n) * (1.0 + b_sq).sqrt()
        })
        .sum::<f64>()
        * vol
}

/// Total variation of sigma and b over a 1D field (open chain, no wrap term).
pub fn bv_norm(field: &GraphField) -> Result<f64> {
    if field.dim != 1 {
        return Err(Error::InvalidInput("bv_norm is defined for 1D fields".into()));
    }
    let n = field.cells[0];
    let mut tv = 0.0;
    for i in 0..n.saturating_sub(1) {
        tv += (field.sigma[i + 1] - field.sigma[i]).abs();
        tv += (field.b[0][i + 1] - field.b[0][i]).abs();
    }
    Ok(tv)
}

fn diagnostics_row(t: f64, field: &GraphField) -> DiagnosticsRow {
    let (ms, mb) = field.masses();
    DiagnosticsRow {
        t,
        mass_sigma: ms,
        mass_b: mb,
        entropy: total_entropy(field),
        bv: if field.dim == 1 {
            bv_norm(field).unwrap_or(f64::NAN)
        } else {
            f64::NAN
        },
        max_b2: field.max_b_norm_sq(),
    }
}

fn flux_update(field: &GraphField, config: &SolverConfig, dt: f64, out: &mut GraphField) {
    let nx = field.cells[0];
    let ny = field.cells[1];
    let global_speed = max_wave_speed(field).expect("finite state checked by caller");

    let cell_state = |k: usize| -> [f64; 3] {
        [
            field.sigma[k],
            field.b[0][k],
            if field.dim == 2 { field.b[1][k] } else { 0.0 },
        ]
    };

    for axis in 0..field.dim {
        let (n_line, n_other) = if axis == 0 { (nx, ny) } else { (ny, nx) };
        let dx = field.spacing[axis];
        let scale = dt / dx;
        let mut interface = vec![[0.0f64; 3]; n_line + 1];
        for other in 0..n_other {
            let cell_at = |pos: isize| -> usize {
                let p = match field.boundary {
                    Boundary::Periodic => pos.rem_euclid(n_line as isize),
                    Boundary::Outflow => pos.clamp(0, n_line as isize - 1),
                } as usize;
                if axis == 0 {
                    field.index(p, other)
                } else {
                    field.index(other, p)
                }
            };
            for j in 0..=n_line {
                if j == n_line && field.boundary == Boundary::Periodic {
                    // identical to interface 0; copy for exact telescoping
                    interface[n_line] = interface[0];
                    break;
                }
                let kl = cell_at(j as isize - 1);
                let kr = cell_at(j as isize);
                let ul = cell_state(kl);
                let ur = cell_state(kr);
                let fl = physical_flux(ul[0], ul[1], ul[2], field.n, axis);
                let fr = physical_flux(ur[0], ur[1], ur[2], field.n, axis);
                let alpha = match config.flux_scheme {
                    FluxScheme::LaxFriedrichs => global_speed[axis],
                    FluxScheme::Rusanov => cell_wave_speed(ul[0], ul[1], ul[2], field.n, axis)
                        .max(cell_wave_speed(ur[0], ur[1], ur[2], field.n, axis)),
                };
                for c in 0..3 {
                    interface[j][c] = 0.5 * (fl[c] + fr[c]) - 0.5 * alpha * (ur[c] - ul[c]);
                }
            }
            for j in 0..n_line {
                let k = if axis == 0 {
                    field.index(j, other)
                } else {
                    field.index(other, j)
                };
                out.sigma[k] -= scale * (interface[j + 1][0] - interface[j][0]);
                out.b[0][k] -= scale * (interface[j + 1][1] - interface[j][1]);
                if field.dim == 2 {
                    out.b[1][k] -= scale * (interface[j + 1][2] - interface[j][2]);
                }
            }
        }
    }
}

/// One conservative explicit step. Cell averages change only through
/// interface fluxes, so periodic grid sums of sigma and b are preserved to
/// rounding.
pub fn step(field: &GraphField, config: &SolverConfig, dt: f64) -> Result<GraphField> {
    if !field.is_finite() {
        return Err(Error::BlowUp {
            time: f64::NAN,
            reason: "non-finite input state".into(),
        });
    }
    let speeds = max_wave_speed(field)?;
    for axis in 0..field.dim {
        if speeds[axis] > 0.0 {
            let limit = config.cfl * field.spacing[axis] / speeds[axis];
            if dt > limit * (1.0 + 1e-12) {
                return Err(Error::CflViolation { dt, limit });
            }
        }
    }

    let euler = |f: &GraphField| -> GraphField {
        let mut out = f.clone();
        flux_update(f, config, dt, &mut out);
        out
    };

    let next = match config.integrator {
        Integrator::ForwardEuler => euler(field),
        Integrator::SspRk2 => {
            let mid = euler(field);
            if !mid.is_finite() {
                mid
            } else {
                let full = euler(&mid);
                let mut out = field.clone();
                for k in 0..field.total_cells() {
                    out.sigma[k] = 0.5 * (field.sigma[k] + full.sigma[k]);
                    out.b[0][k] = 0.5 * (field.b[0][k] + full.b[0][k]);
                    if field.dim == 2 {
                        out.b[1][k] = 0.5 * (field.b[1][k] + full.b[1][k]);
                    }
                }
                out
            }
        }
    };

    if !next.is_finite() {
        return Err(Error::BlowUp {
            time: f64::NAN,
            reason: "non-finite state after update".into(),
        });
    }
    Ok(next)
}

const SIGMA_BLOWUP: f64 = 1e6;
const DT_FLOOR: f64 = 1e-12;

/// Advances `field` in place from `*t` to `t_target` with CFL-limited steps.
/// Returns the termination reason if the run cannot continue.
pub fn advance_to(
    field: &mut GraphField,
    config: &SolverConfig,
    t: &mut f64,
    t_target: f64,
) -> Result<Option<Termination>> {
    while *t < t_target - 1e-15 {
        let guard = 0.5 - config.hyperbolicity_eps;
        if field.max_b_norm_sq() >= guard {
            return Ok(Some(Termination::ConvexityGuard));
        }
        if field.sigma.iter().any(|s| s.abs() > SIGMA_BLOWUP) {
            return Ok(Some(Termination::BlowUpSigma));
        }
        let speeds = max_wave_speed(field)?;
        let mut dt = f64::INFINITY;
        for axis in 0..field.dim {
            if speeds[axis] > 0.0 {
                dt = dt.min(config.cfl * field.spacing[axis] / speeds[axis]);
            }
        }
        if !dt.is_finite() {
            dt = t_target - *t;
        }
        dt = dt.min(t_target - *t);
        if dt < DT_FLOOR {
            return Ok(Some(Termination::BlowUpDtCollapse));
        }
        match step(field, config, dt) {
            Ok(next) => *field = next,
            Err(Error::BlowUp { .. }) => return Ok(Some(Termination::BlowUpNonFinite)),
            Err(e) => return Err(e),
        }
        *t += dt;
    }
    Ok(None)
}

/// Integrates to `t_end` or until blow-up or the convexity guard triggers,
/// recording per-step scalar diagnostics and periodic state snapshots.
pub fn run(initial: &GraphField, config: &SolverConfig) -> Result<SimulationRecord> {
    config.validate()?;
    let guard = 0.5 - config.hyperbolicity_eps;
    if initial.max_b_norm_sq() >= guard {
        return Err(Error::OutsideConvexityRegion {
            max_b2: initial.max_b_norm_sq(),
        });
    }

    let mut field = initial.clone();
    let mut t = 0.0;
    let mut snapshots = vec![(t, field.clone())];
    let mut diagnostics = vec![diagnostics_row(t, &field)];
    let mut steps: usize = 0;

    let termination = loop {
        if t >= config.t_end - 1e-15 {
            break Termination::ReachedEnd;
        }
        if field.max_b_norm_sq() >= guard {
            break Termination::ConvexityGuard;
        }
        if field.sigma.iter().any(|s| s.abs() > SIGMA_BLOWUP) {
            break Termination::BlowUpSigma;
        }
        let speeds = max_wave_speed(&field)?;
        let mut dt = f64::INFINITY;
        for axis in 0..field.dim {
            if speeds[axis] > 0.0 {
                dt = dt.min(config.cfl * field.spacing[axis] / speeds[axis]);
            }
        }
        if !dt.is_finite() {
            dt = config.t_end - t;
        }
        dt = dt.min(config.t_end - t);
        if dt < DT_FLOOR {
            break Termination::BlowUpDtCollapse;
        }
        match step(&field, config, dt) {
            Ok(next) => field = next,
            Err(Error::BlowUp { .. }) => break Termination::BlowUpNonFinite,
            Err(e) => return Err(e),
        }
        t += dt;
        steps += 1;
        diagnostics.push(diagnostics_row(t, &field));
        if steps % config.output_every == 0 {
            snapshots.push((t, field.clone()));
        }
    };

    if snapshots.last().map(|(st, _)| *st) != Some(t) {
        snapshots.push((t, field.clone()));
    }
    Ok(SimulationRecord {
        snapshots,
        diagnostics,
        termination,
    })
}

/// Piecewise-constant 1D Riemann datum with the jump at mid-domain.
pub fn riemann_initial(
    left: &ConservedState,
    right: &ConservedState,
    cells: usize,
    length: f64,
    boundary: Boundary,
) -> Result<GraphField> {
    if left.dim() != 1 || right.dim() != 1 {
        return Err(Error::InvalidInput(
            "riemann_initial expects 1D states".into(),
        ));
    }
    for s in [left, right] {
        if !s.hyperbolic_convex() {
            return Err(Error::OutsideConvexityRegion {
                max_b2: s.b_norm_sq(),
            });
        }
    }
    let mut field = GraphField::new(1, [cells, 1], [length / cells as f64, 1.0], boundary)?;
    for i in 0..cells {
        let state = if i < cells / 2 { left } else { right };
        field.sigma[i] = state.sigma;
        field.b[0][i] = state.b[0];
    }
    Ok(field)
}

/// Smooth compactly supported tensor-product bump used as a test function in
/// the weak-form residual.
#[derive(Debug, Clone, Copy)]
pub struct TestFunction {
    pub t_center: f64,
    pub t_width: f64,
    pub x_center: f64,
    pub x_width: f64,
    pub y_center: f64,
    pub y_width: f64,
}

fn bump(s: f64) -> (f64, f64) {
    if s.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let q = 1.0 - s * s;
    let v = (1.0 - 1.0 / q).exp();
    (v, v * (-2.0 * s / (q * q)))
}

impl TestFunction {
    /// Value and gradient (theta, theta_t, theta_x, theta_y).
    pub fn eval(&self, t: f64, x: f64, y: f64, dim: usize) -> (f64, f64, f64, f64) {
        let (vt, dvt) = bump((t - self.t_center) / self.t_width);
        let (vx, dvx) = bump((x - self.x_center) / self.x_width);
        let (vy, dvy) = if dim == 2 {
            bump((y - self.y_center) / self.y_width)
        } else {
            (1.0, 0.0)
        };
        (
            vt * vx * vy,
            dvt / self.t_width * vx * vy,
            vt * dvx / self.x_width * vy,
            vt * vx * dvy / self.y_width,
        )
    }

    pub fn t_factor(&self, t: f64) -> f64 {
        bump((t - self.t_center) / self.t_width).0
    }

    pub fn x_factor(&self, x: f64) -> f64 {
        bump((x - self.x_center) / self.x_width).0
    }

    pub fn y_factor(&self, y: f64) -> f64 {
        bump((y - self.y_center) / self.y_width).0
    }
}

/// A small default family of bumps supported inside the record's space-time
/// domain.
pub fn default_test_family(record: &SimulationRecord) -> Vec<TestFunction> {
    let (t0, first) = &record.snapshots[0];
    let t1 = record.snapshots.last().unwrap().0;
    let lx = first.cells[0] as f64 * first.spacing[0];
    let ly = first.cells[1] as f64 * first.spacing[1];
    let span = t1 - t0;
    let mut family = Vec::new();
    for &(ct, wt) in &[(0.5, 0.4), (0.35, 0.25), (0.65, 0.25)] {
        for &(cx, wx) in &[(0.5, 0.35), (0.3, 0.2), (0.7, 0.2)] {
            family.push(TestFunction {
                t_center: t0 + ct * span,
                t_width: wt * span,
                x_center: cx * lx,
                x_width: wx * lx,
                y_center: 0.5 * ly,
                y_width: 0.35 * ly,
            });
        }
    }
    family
}

/// Space-time quadrature of the weak form of the conservative system against
/// each test function. Returns the largest absolute residual; it converges
/// to zero at the scheme's order under refinement.
///
/// The quadrature integrates the test-function derivatives exactly per
/// cell/per interval (telescoping differences of the tensor factors) against
/// piecewise-constant state data, so constant exact solutions yield an
/// exactly vanishing residual.
pub fn weak_residual(record: &SimulationRecord, test_functions: &[TestFunction]) -> f64 {
    let mut worst = 0.0f64;
    let snaps = &record.snapshots;
    if snaps.len() < 2 {
        return 0.0;
    }
    let dim = snaps[0].1.dim;
    let n = snaps[0].1.n;
    for tf in test_functions {
        let mut res = vec![0.0f64; 1 + dim];

        // time-derivative terms: int U theta_t = sum over intervals of the
        // interval-mean state times the exact increment of the time factor
        for k in 0..snaps.len() - 1 {
            let (t0, f0) = &snaps[k];
            let (t1, f1) = &snaps[k + 1];
            let dtheta = tf.t_factor(*t1) - tf.t_factor(*t0);
            if dtheta == 0.0 {
                continue;
            }
            let vol = f0.cell_volume();
            for iy in 0..f0.cells[1] {
                for ix in 0..f0.cells[0] {
                    let kk = f0.index(ix, iy);
                    let x = (ix as f64 + 0.5) * f0.spacing[0];
                    let sx = tf.x_factor(x);
                    if sx == 0.0 {
                        continue;
                    }
                    let sy = if dim == 2 {
                        tf.y_factor((iy as f64 + 0.5) * f0.spacing[1])
                    } else {
                        1.0
                    };
                    let space = sx * sy * vol;
                    res[0] -= 0.5 * (f0.sigma[kk] + f1.sigma[kk]) * dtheta * space;
                    res[1] -= 0.5 * (f0.b[0][kk] + f1.b[0][kk]) * dtheta * space;
                    if dim == 2 {
                        res[2] -= 0.5 * (f0.b[1][kk] + f1.b[1][kk]) * dtheta * space;
                    }
                }
            }
        }

        // space-derivative terms: per snapshot (trapezoid weights in time),
        // exact per-cell increments of the spatial factors against the
        // cell-constant fluxes
        for (k, (t, field)) in snaps.iter().enumerate() {
            let wt = if k == 0 {
                0.5 * (snaps[1].0 - snaps[0].0)
            } else if k == snaps.len() - 1 {
                0.5 * (snaps[k].0 - snaps[k - 1].0)
            } else {
                0.5 * (snaps[k + 1].0 - snaps[k - 1].0)
            };
            let theta_t = tf.t_factor(*t);
            if theta_t == 0.0 {
                continue;
            }
            for iy in 0..field.cells[1] {
                for ix in 0..field.cells[0] {
                    let kk = field.index(ix, iy);
                    let sigma = field.sigma[kk];
                    let b1 = field.b[0][kk];
                    let b2 = if dim == 2 { field.b[1][kk] } else { 0.0 };
                    let w = (1.0 + b1 * b1 + b2 * b2).sqrt();
                    let e = energy_density(sigma, n);

                    let xl = ix as f64 * field.spacing[0];
                    let xr = xl + field.spacing[0];
                    let dx_theta = tf.x_factor(xr) - tf.x_factor(xl);
                    let x_mid = tf.x_factor(0.5 * (xl + xr));
                    let (y_mid, dy_theta, yl_span) = if dim == 2 {
                        let yl = iy as f64 * field.spacing[1];
                        let yr = yl + field.spacing[1];
                        (
                            tf.y_factor(0.5 * (yl + yr)),
                            tf.y_factor(yr) - tf.y_factor(yl),
                            field.spacing[1],
                        )
                    } else {
                        (1.0, 0.0, 1.0)
                    };

                    // sigma equation: + (e b_j / w) theta_j
                    res[0] += theta_t
                        * wt
                        * (e * b1 / w * dx_theta * y_mid * yl_span
                            + if dim == 2 {
                                e * b2 / w * dy_theta * x_mid * field.spacing[0]
                            } else {
                                0.0
                            });
                    // b equations: + sigma w theta_i
                    res[1] += theta_t * wt * sigma * w * dx_theta * y_mid * yl_span;
                    if dim == 2 {
                        res[2] += theta_t * wt * sigma * w * dy_theta * x_mid * field.spacing[0];
                    }
                }
            }
        }
        for r in res {
            worst = worst.max(r.abs());
        }
    }
    worst
}

/// Per-step increments of the total entropy, from the recorded diagnostics.
pub fn entropy_production(record: &SimulationRecord) -> Vec<f64> {
    record
        .diagnostics
        .windows(2)
        .map(|w| w[1].entropy - w[0].entropy)
        .collect()
}

/// True when no step increased the total entropy beyond the relative slack.
pub fn entropy_admissible(record: &SimulationRecord, relative_slack: f64) -> bool {
    record
        .diagnostics
        .windows(2)
        .all(|w| w[1].entropy - w[0].entropy <= relative_slack * w[0].entropy.abs())
}

/// Integrated relative entropy Q = E(U) - E(V) - DE(V) (U - V) between two
/// fields on the same grid. Both must satisfy |b|^2 <= (1 - eps)/2, where
/// the entropy is uniformly convex and Q is a squared-distance surrogate.
pub fn relative_entropy_distance(
    field: &GraphField,
    reference: &GraphField,
    eps: f64,
) -> Result<f64> {
    if field.dim != reference.dim
        || field.cells != reference.cells
        || field.spacing != reference.spacing
    {
        return Err(Error::InvalidInput(
            "relative entropy requires identical grids".into(),
        ));
    }
    let bound = (1.0 - eps) / 2.0;
    for f in [field, reference] {
        let m = f.max_b_norm_sq();
        if m > bound {
            return Err(Error::OutsideConvexityRegion { max_b2: m });
        }
    }
    let vol = field.cell_volume();
    let dim = field.dim;
    let n = field.n;
    let mut total = 0.0;
    for k in 0..field.total_cells() {
        let u = [
            field.sigma[k],
            field.b[0][k],
            if dim == 2 { field.b[1][k] } else { 0.0 },
        ];
        let v = [
            reference.sigma[k],
            reference.b[0][k],
            if dim == 2 { reference.b[1][k] } else { 0.0 },
        ];
        let ent =
            |s: &[f64; 3]| energy_density(s[0], n) * (1.0 + s[1] * s[1] + s[2] * s[2]).sqrt();
        let wv = (1.0 + v[1] * v[1] + v[2] * v[2]).sqrt();
        let ev = energy_density(v[0], n);
        let grad = [v[0] * wv, ev * v[1] / wv, ev * v[2] / wv];
        let mut q = ent(&u) - ent(&v);
        for c in 0..=dim {
            q -= grad[c] * (u[c] - v[c]);
        }
        total += q * vol;
    }
    Ok(total)
}
