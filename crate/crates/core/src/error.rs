use thiserror::Error;

use crate::Side;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid: {0}")]
    Grid(String),
    #[error("domain: {0}")]
    Domain(String),
    #[error("surface violates |f| <= 1 - c0: max |f| = {max_abs_f}, c0 = {c0}")]
    SurfaceOutOfBounds { max_abs_f: f64, c0: f64 },
    #[error("surface too rough: min d(rho)/dz = {min_rho_z} after {halvings} halvings (need {bound})")]
    SurfaceTooRough { min_rho_z: f64, halvings: usize, bound: f64 },
    #[error("{solver} did not converge in {iterations} iterations (residual {})", history.last().copied().unwrap_or(f64::NAN))]
    NonConvergence { solver: &'static str, iterations: usize, history: Vec<f64> },
    #[error("incompatible Neumann data: defect {defect:e}")]
    Incompatible { defect: f64 },
    #[error("compatibility C1 violated: divergence of curl data {defect:e}")]
    C1 { defect: f64 },
    #[error("compatibility C2 violated: lid integral of normal curl {defect:e}")]
    C2 { defect: f64 },
    #[error("compatibility C3 violated: divergence and flux data differ by {defect:e}")]
    C3 { defect: f64 },
    #[error("{side:?} side: {source}")]
    Sided { side: Side, #[source] source: Box<Error> },
    #[error("time step {dt} exceeds stability bound; use dt <= {suggested}")]
    Cfl { dt: f64, suggested: f64 },
    #[error("no linear window: {0}")]
    NoLinearWindow(String),
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error("config: {0}")]
    Config(String),
    #[error("config: missing key `{0}`")]
    MissingKey(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn sided(self, side: Side) -> Self {
        Error::Sided { side, source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
