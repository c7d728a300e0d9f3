//! Analytical structure of the graph system: conservative fluxes, the convex
//! entropy, symmetric variables, hyperbolicity minors, and the complete 1D
//! eigenstructure.

use nalgebra::{DMatrix, Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::geometry::{energy_density, graph_w};

/// Conserved unknowns (sigma, b) of the first-order graph system.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservedState {
    pub sigma: f64,
    pub b: Vec<f64>,
}

impl ConservedState {
    pub fn new(sigma: f64, b: Vec<f64>) -> Self {
        Self { sigma, b }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn b_norm_sq(&self) -> f64 {
        self.b.iter().map(|bi| bi * bi).sum()
    }

    /// The entropy is strictly convex on |b|^2 < 1/2.
    pub fn hyperbolic_convex(&self) -> bool {
        self.b_norm_sq() < 0.5
    }
}

/// Gradient of the entropy: a = sigma w, c_i = e b_i / w.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricVariables {
    pub a: f64,
    pub c: Vec<f64>,
}

/// Conservative flux in spatial direction `axis`, laid out so the system
/// reads d_t U + d_j F_j(U) = 0. Component 0 is the sigma flux -e b_axis / w;
/// component 1+i is -sigma w when i == axis and 0 otherwise.
pub fn flux(state: &ConservedState, axis: usize) -> Vec<f64> {
    let n = state.dim();
    assert!(axis < n);
    let w = graph_w(&state.b);
    let e = energy_density(state.sigma, n);
    let mut out = vec![0.0; n + 1];
    out[0] = -e * state.b[axis] / w;
    out[1 + axis] = -state.sigma * w;
    out
}

/// Entropy E(sigma, b) = e(sigma) w(b).
pub fn entropy(state: &ConservedState) -> f64 {
    energy_density(state.sigma, state.dim()) * graph_w(&state.b)
}

/// Gradient of the entropy in (sigma, b), which is exactly the pair (a, c)
/// of symmetric variables.
pub fn entropy_gradient(state: &ConservedState) -> Vec<f64> {
    let w = graph_w(&state.b);
    let e = energy_density(state.sigma, state.dim());
    let mut g = Vec::with_capacity(state.dim() + 1);
    g.push(state.sigma * w);
    for bi in &state.b {
        g.push(e * bi / w);
    }
    g
}

/// Hessian of the entropy in (sigma, b):
/// E_ss = w, E_{s b_k} = sigma b_k / w,
/// E_{b_j b_k} = e / w (delta_jk - b_j b_k / w^2).
pub fn entropy_hessian(state: &ConservedState) -> DMatrix<f64> {
    let n = state.dim();
    let w = graph_w(&state.b);
    let e = energy_density(state.sigma, n);
    DMatrix::from_fn(n + 1, n + 1, |i, j| match (i, j) {
        (0, 0) => w,
        (0, k) => state.sigma * state.b[k - 1] / w,
        (k, 0) => state.sigma * state.b[k - 1] / w,
        (j, k) => {
            let delta = if j == k { 1.0 } else { 0.0 };
            e / w * (delta - state.b[j - 1] * state.b[k - 1] / (w * w))
        }
    })
}

/// Certifies strict convexity of the entropy: |b|^2 must stay below
/// 1/2 - eps and the Hessian must be positive definite.
pub fn is_strictly_convex(state: &ConservedState, eps: f64) -> bool {
    if state.b_norm_sq() > 0.5 - eps {
        return false;
    }
    let hess = entropy_hessian(state);
    let eigen = hess.symmetric_eigenvalues();
    eigen.iter().all(|&lambda| lambda > 0.0)
}

/// Symmetric variables a = sigma w, c_i = e b_i / w.
pub fn symmetric_variables(state: &ConservedState) -> SymmetricVariables {
    let g = entropy_gradient(state);
    SymmetricVariables {
        a: g[0],
        c: g[1..].to_vec(),
    }
}

/// Recovers (sigma, b) from the symmetric variables by Newton iteration on
/// the entropy gradient. The Jacobian of the map is the entropy Hessian,
/// positive definite in the convexity region; steps are halved whenever the
/// iterate leaves |b|^2 < 1/2.
pub fn invert_symmetric_variables(
    vars: &SymmetricVariables,
    dim: usize,
) -> Result<ConservedState> {
    let max_iter = 100;
    // initialization from the leading-order relations a ~ sigma, c ~ e b
    let e_guess = energy_density(vars.a, dim);
    let mut guess_b: Vec<f64> = vars.c.iter().map(|ci| ci / e_guess).collect();
    let guess_norm_sq: f64 = guess_b.iter().map(|x| x * x).sum();
    if guess_norm_sq >= 0.45 {
        let shrink = (0.45 / guess_norm_sq).sqrt();
        for bi in guess_b.iter_mut() {
            *bi *= shrink;
        }
    }
    let mut state = ConservedState::new(vars.a, guess_b);
    let target: Vec<f64> = std::iter::once(vars.a).chain(vars.c.iter().copied()).collect();
    let residual_norm = |s: &ConservedState| -> f64 {
        let grad = entropy_gradient(s);
        target
            .iter()
            .zip(&grad)
            .map(|(t, g)| (t - g) * (t - g))
            .sum::<f64>()
            .sqrt()
    };
    for _ in 0..max_iter {
        let grad = entropy_gradient(&state);
        let residual: Vec<f64> = target.iter().zip(&grad).map(|(t, g)| t - g).collect();
        let norm = residual.iter().map(|r| r * r).sum::<f64>().sqrt();
        if norm < 1e-14 * (1.0 + vars.a.abs()) {
            return Ok(state);
        }
        let hess = entropy_hessian(&state);
        let rhs = nalgebra::DVector::from_vec(residual);
        let delta = hess
            .lu()
            .solve(&rhs)
            .ok_or(Error::InversionDiverged { iterations: max_iter })?;
        // damped step: stay inside |b|^2 < 1/2 and require residual decrease
        let mut scale = 1.0;
        loop {
            let mut trial = state.clone();
            trial.sigma += scale * delta[0];
            for i in 0..dim {
                trial.b[i] += scale * delta[1 + i];
            }
            let inside = trial.b_norm_sq() < 0.5;
            if (inside && residual_norm(&trial) < norm) || scale < 1e-8 {
                if inside || scale < 1e-8 {
                    state = trial;
                    break;
                }
            }
            scale *= 0.5;
        }
        if !state.sigma.is_finite() || state.b.iter().any(|bi| !bi.is_finite()) {
            return Err(Error::InversionDiverged { iterations: max_iter });
        }
    }
    // accept if already converged to tolerance, otherwise report failure
    let grad = entropy_gradient(&state);
    let norm = target
        .iter()
        .zip(&grad)
        .map(|(t, g)| (t - g) * (t - g))
        .sum::<f64>()
        .sqrt();
    if norm < 1e-12 * (1.0 + vars.a.abs()) {
        Ok(state)
    } else {
        Err(Error::InversionDiverged { iterations: max_iter })
    }
}

/// Leading principal minors of the second-order symbol in the adapted basis
/// where Du is aligned with the first axis. Returns d_0, ..., d_n; each is
/// negative, with d_0 = -1 and d_k = -e^k / w^2 for k >= 1.
pub fn hyperbolicity_minors(sigma: f64, du: &[f64]) -> Vec<f64> {
    let n = du.len();
    let du_norm_sq: f64 = du.iter().map(|d| d * d).sum();
    let u1 = du_norm_sq.sqrt();
    let w2 = 1.0 + du_norm_sq;
    let w = w2.sqrt();
    let e = energy_density(sigma, n);

    // adapted basis: Du = u1 e_1
    let mut a = DMatrix::zeros(n + 1, n + 1);
    a[(0, 0)] = -1.0;
    if n >= 1 {
        a[(0, 1)] = sigma / w * u1;
        a[(1, 0)] = sigma / w * u1;
        a[(1, 1)] = (e - du_norm_sq * sigma * sigma) / w2;
        for k in 2..=n {
            a[(k, k)] = e;
        }
    }

    (0..=n)
        .map(|k| a.view((0, 0), (k + 1, k + 1)).clone_owned().determinant())
        .collect()
}

/// Quasilinear matrix A(a, b) of the 1D system in the variables
/// a = u_t / w and b = u_x.
pub fn jacobian_1d(a: f64, b: f64) -> Matrix2<f64> {
    let wb = (1.0 + b * b).sqrt();
    Matrix2::new(
        a * b / wb,
        (1.0 + a * a) / (2.0 * (1.0 + b * b) * wb),
        (1.0 + b * b) / wb,
        a * b / wb,
    )
}

/// Characteristic speeds, eigenvectors, their gradients and the genuine
/// nonlinearity scalar of the 1D system at a state (a, b).
#[derive(Debug, Clone)]
pub struct EigenStructure1D {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub mu_plus: Vector2<f64>,
    pub mu_minus: Vector2<f64>,
    pub dlambda_plus: Vector2<f64>,
    pub dlambda_minus: Vector2<f64>,
    /// <D lambda, mu>, identical for both families: 3a / (2 (1+b^2)^{3/2})
    pub gnl: f64,
}

/// Closed-form eigenstructure of the 1D quasilinear matrix.
pub fn eigenstructure_1d(a: f64, b: f64) -> EigenStructure1D {
    let one_b2 = 1.0 + b * b;
    let wb = one_b2.sqrt();
    let root = ((1.0 + a * a) / 2.0).sqrt();
    let lambda_plus = (a * b + root) / wb;
    let lambda_minus = (a * b - root) / wb;
    let mu_component = (1.0 + a * a).sqrt() / (2f64.sqrt() * one_b2);
    let mu_plus = Vector2::new(mu_component, 1.0);
    let mu_minus = Vector2::new(-mu_component, 1.0);

    let dlambda = |sign: f64| {
        Vector2::new(
            (b + sign * a / (2.0 * root)) / wb,
            (a - b / one_b2 * (a * b + sign * root)) / wb,
        )
    };
    let gnl = 3.0 * a / (2.0 * one_b2.powf(1.5));

    EigenStructure1D {
        lambda_plus,
        lambda_minus,
        mu_plus,
        mu_minus,
        dlambda_plus: dlambda(1.0),
        dlambda_minus: dlambda(-1.0),
        gnl,
    }
}

/// Residual of the linear PDE that characterizes conserved quantities of the
/// 1D system: eta_aa = 2 (1+b^2)^2 / (1+a^2) eta_bb. Second derivatives are
/// taken by central differences of step `h`.
pub fn conserved_quantity_residual<F>(eta: F, a: f64, b: f64, h: f64) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    let eta_aa = (eta(a + h, b) - 2.0 * eta(a, b) + eta(a - h, b)) / (h * h);
    let eta_bb = (eta(a, b + h) - 2.0 * eta(a, b) + eta(a, b - h)) / (h * h);
    (eta_aa - 2.0 * (1.0 + b * b).powi(2) / (1.0 + a * a) * eta_bb).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn flux_examples() {
        let f = flux(&ConservedState::new(0.0, vec![0.0]), 0);
        assert_eq!(f, vec![0.0, 0.0]);

        let f = flux(&ConservedState::new(1.0, vec![0.0]), 0);
        assert_abs_diff_eq!(f[0], 0.0);
        assert_abs_diff_eq!(f[1], -1.0);

        let f = flux(&ConservedState::new(1.0, vec![1.0]), 0);
        assert_abs_diff_eq!(f[0], -1.0 / SQRT2, epsilon = 1e-15);
        assert_abs_diff_eq!(f[1], -SQRT2, epsilon = 1e-15);
    }

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(entropy(&ConservedState::new(0.0, vec![0.0])), 0.5);
        assert_abs_diff_eq!(entropy(&ConservedState::new(1.0, vec![0.0])), 1.0);
        assert_abs_diff_eq!(
            entropy(&ConservedState::new(0.0, vec![1.0, 0.0])),
            SQRT2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn entropy_hessian_examples() {
        let h = entropy_hessian(&ConservedState::new(0.0, vec![0.0]));
        assert_abs_diff_eq!(h[(0, 0)], 1.0);
        assert_abs_diff_eq!(h[(1, 1)], 0.5);
        assert_abs_diff_eq!(h[(0, 1)], 0.0);

        let h = entropy_hessian(&ConservedState::new(0.0, vec![0.0, 0.0]));
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(h[(i, j)], expect);
            }
        }
    }

    #[test]
    fn entropy_hessian_matches_finite_differences() {
        let states = [
            ConservedState::new(0.4, vec![0.3]),
            ConservedState::new(-1.1, vec![0.2, -0.5]),
            ConservedState::new(2.0, vec![0.6, 0.1]),
        ];
        let h = 1e-4;
        for state in &states {
            let dim = state.dim();
            let hess = entropy_hessian(state);
            let at = |offset: &[f64]| {
                let mut s = state.clone();
                s.sigma += offset[0];
                for (bi, d) in s.b.iter_mut().zip(&offset[1..]) {
                    *bi += d;
                }
                entropy(&s)
            };
            for i in 0..=dim {
                for j in 0..=dim {
                    let mut v = vec![0.0; dim + 1];
                    let probe = |si: f64, sj: f64, v: &mut Vec<f64>| {
                        v.iter_mut().for_each(|x| *x = 0.0);
                        v[i] += si * h;
                        v[j] += sj * h;
                    };
                    probe(1.0, 1.0, &mut v);
                    let pp = at(&v);
                    probe(1.0, -1.0, &mut v);
                    let pm = at(&v);
                    probe(-1.0, 1.0, &mut v);
                    let mp = at(&v);
                    probe(-1.0, -1.0, &mut v);
                    let mm = at(&v);
                    let fd = (pp - pm - mp + mm) / (4.0 * h * h);
                    assert_abs_diff_eq!(hess[(i, j)], fd, epsilon = 1e-6);
                }
            }
        }
    }

    #[test]
    fn convexity_threshold() {
        assert!(is_strictly_convex(&ConservedState::new(0.0, vec![0.0]), 0.005));
        let b = (0.49f64).sqrt();
        assert!(is_strictly_convex(&ConservedState::new(0.0, vec![b]), 0.005));
        let b = (0.6f64).sqrt();
        assert!(!is_strictly_convex(&ConservedState::new(0.0, vec![b]), 0.005));
    }

    #[test]
    fn symmetric_variable_examples() {
        let v = symmetric_variables(&ConservedState::new(0.0, vec![0.0]));
        assert_eq!((v.a, v.c[0]), (0.0, 0.0));

        let v = symmetric_variables(&ConservedState::new(1.0, vec![0.0]));
        assert_abs_diff_eq!(v.a, 1.0);
        assert_abs_diff_eq!(v.c[0], 0.0);

        let v = symmetric_variables(&ConservedState::new(1.0, vec![1.0]));
        assert_abs_diff_eq!(v.a, SQRT2, epsilon = 1e-15);
        assert_abs_diff_eq!(v.c[0], 1.0 / SQRT2, epsilon = 1e-15);
    }

    #[test]
    fn symmetric_variables_round_trip() {
        for state in [
            ConservedState::new(0.3, vec![0.2]),
            ConservedState::new(-1.5, vec![0.5]),
            ConservedState::new(0.9, vec![0.3, -0.4]),
        ] {
            let vars = symmetric_variables(&state);
            let back = invert_symmetric_variables(&vars, state.dim()).unwrap();
            assert_abs_diff_eq!(back.sigma, state.sigma, epsilon = 1e-12);
            for (x, y) in back.b.iter().zip(&state.b) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn hyperbolicity_minor_examples() {
        let d = hyperbolicity_minors(0.0, &[0.0, 0.0]);
        assert_abs_diff_eq!(d[0], -1.0);
        assert_abs_diff_eq!(d[1], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d[2], -1.0, epsilon = 1e-14);

        let d = hyperbolicity_minors(0.0, &[1.0, 0.0]);
        assert_abs_diff_eq!(d[0], -1.0);
        assert_abs_diff_eq!(d[1], -0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(d[2], -0.5, epsilon = 1e-14);
    }

    #[test]
    fn jacobian_1d_examples() {
        let a = jacobian_1d(0.0, 0.0);
        assert_abs_diff_eq!(a[(0, 0)], 0.0);
        assert_abs_diff_eq!(a[(0, 1)], 0.5);
        assert_abs_diff_eq!(a[(1, 0)], 1.0);
        assert_abs_diff_eq!(a[(1, 1)], 0.0);

        let a = jacobian_1d(1.0, 1.0);
        assert_abs_diff_eq!(a[(0, 0)], 1.0 / SQRT2, epsilon = 1e-15);
        assert_abs_diff_eq!(a[(0, 1)], 0.5 / SQRT2, epsilon = 1e-15);
        assert_abs_diff_eq!(a[(1, 0)], 2.0 / SQRT2, epsilon = 1e-15);
        assert_abs_diff_eq!(a[(1, 1)], 1.0 / SQRT2, epsilon = 1e-15);
    }

    #[test]
    fn eigenstructure_examples() {
        let eig = eigenstructure_1d(0.0, 0.0);
        assert_abs_diff_eq!(eig.lambda_plus, 1.0 / SQRT2, epsilon = 1e-15);
        assert_abs_diff_eq!(eig.lambda_minus, -1.0 / SQRT2, epsilon = 1e-15);
        assert_abs_diff_eq!(eig.gnl, 0.0);

        let eig = eigenstructure_1d(1.0, 1.0);
        assert_abs_diff_eq!(eig.lambda_plus, SQRT2, epsilon = 1e-15);
        assert_abs_diff_eq!(eig.lambda_minus, 0.0, epsilon = 1e-15);

        let eig = eigenstructure_1d(1.0, 0.0);
        assert_abs_diff_eq!(eig.gnl, 1.5, epsilon = 1e-15);
    }

    #[test]
    fn eigenvector_residuals_vanish() {
        for &(a, b) in &[(0.0, 0.0), (1.0, 1.0), (-0.7, 1.9), (1.3, -0.4)] {
            let m = jacobian_1d(a, b);
            let eig = eigenstructure_1d(a, b);
            let rp = m * eig.mu_plus - eig.lambda_plus * eig.mu_plus;
            let rm = m * eig.mu_minus - eig.lambda_minus * eig.mu_minus;
            assert!(rp.norm() <= 1e-12 * eig.mu_plus.norm());
            assert!(rm.norm() <= 1e-12 * eig.mu_minus.norm());
            assert!(eig.lambda_plus > eig.lambda_minus);
        }
    }

    #[test]
    fn gnl_matches_gradient_dot_eigenvector() {
        for &(a, b) in &[(0.5, 0.0), (1.0, 1.0), (-1.2, 0.3)] {
            let eig = eigenstructure_1d(a, b);
            let gp = eig.dlambda_plus.dot(&eig.mu_plus);
            let gm = eig.dlambda_minus.dot(&eig.mu_minus);
            assert_abs_diff_eq!(gp, eig.gnl, epsilon = 1e-13);
            assert_abs_diff_eq!(gm, eig.gnl, epsilon = 1e-13);
        }
    }

    #[test]
    fn conserved_quantity_residual_examples() {
        assert!(conserved_quantity_residual(|a, b| a * b, 0.7, -0.4, 1e-4) < 1e-8);
        assert!(conserved_quantity_residual(|a, _| a, 0.3, 0.8, 1e-4) < 1e-8);
        let r = conserved_quantity_residual(|a, _| a * a, 0.0, 0.0, 1e-4);
        assert_abs_diff_eq!(r, 2.0, epsilon = 1e-5);
    }

    #[test]
    fn gnl_loss_hypersurface_is_nondegenerate() {
        // directional derivative of gnl along mu at a = 0 is nonzero
        let h = 1e-5;
        for &b in &[0.0, 0.5, -1.2] {
            let eig = eigenstructure_1d(0.0, b);
            let mu = eig.mu_plus / eig.mu_plus.norm();
            let forward = eigenstructure_1d(h * mu[0], b + h * mu[1]).gnl;
            let backward = eigenstructure_1d(-h * mu[0], b - h * mu[1]).gnl;
            let deriv = (forward - backward) / (2.0 * h);
            assert!(deriv.abs() > 0.1, "derivative {deriv} at b = {b}");
        }
    }
}
