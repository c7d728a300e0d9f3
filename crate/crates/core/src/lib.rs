//! Numerical laboratory for a hyperbolic mean curvature flow of the normal
//! type: conservative finite-volume solver for graph flows in 1D/2D, a
//! parametric solver for closed plane curves, exact radially symmetric
//! solutions, and diagnostics that verify conservation laws, entropy
//! conditions, and curvature bounds.

pub mod curve;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod fv;
pub mod geometry;
pub mod io;
pub mod sphere;
pub mod system;

pub use curve::{
    circle_initial, curve_rhs, ellipse_initial, run_curve, CurveFlowConfig, CurveRunRecord,
    CurveSnapshot, CurveTermination,
};
pub use error::{Error, Result};
pub use field::{Boundary, GraphField};
pub use fv::{
    run, FluxScheme, Integrator, SimulationRecord, SolverConfig, Termination,
};
pub use geometry::{energy_density, graph_w, PlaneCurve};
pub use sphere::{integrate_sphere, SphereTrajectory};
pub use system::ConservedState;
