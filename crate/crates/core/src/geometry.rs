//! Pointwise geometric quantities shared by the solvers: energy density,
//! graph metric and curvature, and discrete geometry of closed plane curves.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Local energy density e = (sigma^2 + n) / 2.
pub fn energy_density(sigma: f64, n: usize) -> f64 {
    0.5 * (sigma * sigma + n as f64)
}

/// Graph area element w = sqrt(1 + |b|^2).
pub fn graph_w(b: &[f64]) -> f64 {
    (1.0 + b.iter().map(|bi| bi * bi).sum::<f64>()).sqrt()
}

/// Inverse induced metric of a graph, g^{ij} = delta^{ij} - b_i b_j / w^2.
///
/// Eigenvalues are 1 (multiplicity n-1) and 1/w^2.
pub fn graph_inverse_metric(b: &[f64]) -> DMatrix<f64> {
    let n = b.len();
    let w2 = 1.0 + b.iter().map(|bi| bi * bi).sum::<f64>();
    DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        delta - b[i] * b[j] / w2
    })
}

/// Metric, curvature and area element of a graph at a point.
#[derive(Debug, Clone)]
pub struct GraphGeometry {
    /// w = sqrt(1 + |b|^2)
    pub w: f64,
    /// inverse metric g^{ij}
    pub inv_metric: DMatrix<f64>,
    /// second fundamental form h_ij = u_ij / w
    pub h: DMatrix<f64>,
    /// mean curvature H with H w = g^{ij} u_ij
    pub mean_curvature: f64,
}

/// Assembles the graph geometry from the Hessian of the height function and
/// its gradient b = Du.
pub fn graph_mean_curvature(hess: &DMatrix<f64>, b: &[f64]) -> GraphGeometry {
    let w = graph_w(b);
    let inv_metric = graph_inverse_metric(b);
    let h = hess.map(|u_ij| u_ij / w);
    let traced: f64 = (0..b.len())
        .flat_map(|i| (0..b.len()).map(move |j| (i, j)))
        .map(|(i, j)| inv_metric[(i, j)] * hess[(i, j)])
        .sum();
    GraphGeometry {
        w,
        inv_metric,
        h,
        mean_curvature: traced / w,
    }
}

/// A closed polygonal plane curve with a normal speed attached to each vertex.
///
/// Construction normalizes the orientation to counterclockwise (clockwise
/// input is reindexed), so the inward normal is always the +90 degree
/// rotation of the tangent.
#[derive(Debug, Clone)]
pub struct PlaneCurve {
    pub vertices: Vec<[f64; 2]>,
    pub sigma: Vec<f64>,
}

impl PlaneCurve {
    pub fn new(mut vertices: Vec<[f64; 2]>, mut sigma: Vec<f64>) -> Result<Self> {
        let m = vertices.len();
        if m < 8 {
            return Err(Error::DegenerateCurve(format!(
                "need at least 8 vertices, got {m}"
            )));
        }
        if sigma.len() != m {
            return Err(Error::InvalidInput(format!(
                "sigma length {} does not match vertex count {m}",
                sigma.len()
            )));
        }
        if vertices.iter().flatten().chain(sigma.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite curve data".into()));
        }
        for i in 0..m {
            let j = (i + 1) % m;
            if vertices[i] == vertices[j] {
                return Err(Error::DegenerateCurve(format!(
                    "consecutive vertices {i} and {j} coincide"
                )));
            }
        }
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
            sigma.reverse();
        }
        Ok(Self { vertices, sigma })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Twice the signed area would be the shoelace sum; positive means
/// counterclockwise.
pub(crate) fn signed_area(vertices: &[[f64; 2]]) -> f64 {
    let m = vertices.len();
    let mut acc = 0.0;
    for i in 0..m {
        let [x0, y0] = vertices[i];
        let [x1, y1] = vertices[(i + 1) % m];
        acc += x0 * y1 - x1 * y0;
    }
    0.5 * acc
}

/// Discrete tangent, inward normal, curvature and arclength measure of a
/// closed polygon.
#[derive(Debug, Clone)]
pub struct CurveGeometry {
    /// unit tangent per vertex (central difference)
    pub tangent: Vec<[f64; 2]>,
    /// inward unit normal per vertex
    pub nu: Vec<[f64; 2]>,
    /// signed curvature per vertex; positive for a counterclockwise convex curve
    pub h: Vec<f64>,
    /// arclength weight per vertex (half the sum of the incident edge lengths)
    pub dmu: Vec<f64>,
    /// per-vertex energy measure e(sigma) dmu
    pub e_dmu: Vec<f64>,
}

/// Discrete geometry of a closed polygon. Curvature is the turning angle
/// between adjacent edges divided by the vertex arclength weight.
pub fn curve_geometry(curve: &PlaneCurve) -> Result<CurveGeometry> {
    let m = curve.len();
    let verts = &curve.vertices;

    let mut edge = vec![[0.0; 2]; m]; // edge[i] = v[i+1] - v[i]
    let mut edge_len = vec![0.0; m];
    let mut total = 0.0;
    for i in 0..m {
        let j = (i + 1) % m;
        let e = [verts[j][0] - verts[i][0], verts[j][1] - verts[i][1]];
        let l = (e[0] * e[0] + e[1] * e[1]).sqrt();
        edge[i] = e;
        edge_len[i] = l;
        total += l;
    }
    let mean_edge = total / m as f64;
    let threshold = 1e-14 * mean_edge;
    if let Some(i) = edge_len.iter().position(|&l| l < threshold) {
        return Err(Error::DegenerateEdge {
            vertex: i,
            length: edge_len[i],
            threshold,
        });
    }

    let mut tangent = vec![[0.0; 2]; m];
    let mut nu = vec![[0.0; 2]; m];
    let mut h = vec![0.0; m];
    let mut dmu = vec![0.0; m];
    let mut e_dmu = vec![0.0; m];
    for i in 0..m {
        let p = (i + m - 1) % m;
        let ep = edge[p];
        let ei = edge[i];
        let chord = [ep[0] + ei[0], ep[1] + ei[1]];
        let chord_len = (chord[0] * chord[0] + chord[1] * chord[1]).sqrt();
        if chord_len < threshold {
            return Err(Error::DegenerateCurve(format!(
                "vertex {i}: adjacent edges cancel"
            )));
        }
        let t = [chord[0] / chord_len, chord[1] / chord_len];
        tangent[i] = t;
        // +90 degree rotation points inward for a counterclockwise curve
        nu[i] = [-t[1], t[0]];
        let turning = (ep[0] * ei[1] - ep[1] * ei[0]).atan2(ep[0] * ei[0] + ep[1] * ei[1]);
        dmu[i] = 0.5 * (edge_len[p] + edge_len[i]);
        h[i] = turning / dmu[i];
        e_dmu[i] = energy_density(curve.sigma[i], 1) * dmu[i];
    }

    Ok(CurveGeometry {
        tangent,
        nu,
        h,
        dmu,
        e_dmu,
    })
}

/// Regular m-gon of radius `r0` centered at the origin with uniform normal
/// speed `sigma0`.
pub fn circle_curve(r0: f64, sigma0: f64, m: usize) -> Result<PlaneCurve> {
    if r0 <= 0.0 {
        return Err(Error::InvalidInput("radius must be positive".into()));
    }
    let vertices = (0..m)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
            [r0 * theta.cos(), r0 * theta.sin()]
        })
        .collect();
    PlaneCurve::new(vertices, vec![sigma0; m])
}
