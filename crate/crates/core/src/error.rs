use thiserror::Error;

/// Errors produced by the solvers and diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),

    #[error("degenerate edge at vertex {vertex}: length {length:e} below {threshold:e}")]
    DegenerateEdge {
        vertex: usize,
        length: f64,
        threshold: f64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("CFL violation: dt = {dt:e} exceeds limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("state left the certified convexity region: max |b|^2 = {max_b2}")]
    OutsideConvexityRegion { max_b2: f64 },

    #[error("symmetric-variable inversion did not converge in {iterations} iterations")]
    InversionDiverged { iterations: usize },

    #[error("blow-up detected at t = {time}: {reason}")]
    BlowUp { time: f64, reason: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
