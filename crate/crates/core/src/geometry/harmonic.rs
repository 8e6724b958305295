//! Harmonic coordinates: the map from the region over a reference surface
//! `f_*` onto the region over `f` whose components are harmonic in the
//! reference region and match `(y', f(y'))` on the interface.
//!
//! The horizontal components are the identity (their boundary data are the
//! identity and they are harmonic), so only the vertical component is solved.

use std::sync::Arc;

use super::{EllipticCoefficients, Surface};
use crate::elliptic::{solve_flattened_laplace, Bc, BoundaryCondition, SolverOptions};
use crate::fields::{StripScalar, StripVector, TorusScalar};
use crate::{Error, Result, Side};

#[derive(Debug, Clone)]
pub struct HarmonicCoordinates {
    /// Flattening of the reference region.
    pub reference: Arc<EllipticCoefficients>,
    /// Vertical component `Φ3` at the reference strip nodes.
    pub phi3: StripScalar,
    pub residual: f64,
}

pub fn harmonic_coordinates(
    surface: &Surface,
    reference: &Surface,
    side: Side,
    nz: usize,
    opts: &SolverOptions,
) -> Result<HarmonicCoordinates> {
    let coeffs = Arc::new(EllipticCoefficients::build(reference, side, nz)?);
    HarmonicCoordinates::with_reference(coeffs, &surface.f, opts)
}

impl HarmonicCoordinates {
    pub fn with_reference(reference: Arc<EllipticCoefficients>, f: &TorusScalar, opts: &SolverOptions) -> Result<Self> {
        let grid = reference.grid();
        let bc = BoundaryCondition {
            interface: Bc::Dirichlet(f.clone()),
            lid: Bc::Dirichlet(TorusScalar::constant(grid.torus, grid.side.lid_height())),
        };
        let sol = solve_flattened_laplace(&reference, &StripScalar::zeros(grid), &bc, opts)?;
        Ok(Self { reference, phi3: sol.psi, residual: sol.residual_norm })
    }

    /// Image points `(y1, y2, Φ3)` of the reference strip nodes.
    pub fn as_vector(&self) -> StripVector {
        let grid = self.phi3.grid();
        let x = StripScalar::from_fn(grid, |x, _, _| x);
        let y = StripScalar::from_fn(grid, |_, y, _| y);
        StripVector::new([x, y, self.phi3.clone()])
    }

    /// Jacobian determinant `∂Φ3/∂y3` at the nodes.
    pub fn jacobian_det(&self) -> StripScalar {
        self.phi3.deriv_z().mul(&self.reference.inv_rho_z)
    }

    /// Flattened reference depth `z` whose image in column `p` has height `x3`.
    pub fn invert_column(&self, p: usize, x3: f64) -> Result<f64> {
        let grid = self.phi3.grid();
        let cg = grid.cheb();
        let col = self.phi3.column(p);
        let mut dcol = vec![0.0; grid.nz];
        cg.diff(&col, &mut dcol);
        let (lo, hi) = match grid.side {
            Side::Minus => (-1.0, 0.0),
            Side::Plus => (0.0, 1.0),
        };
        // start from the linear interpolant between interface and lid
        let (top, lid) = (col[0], col[grid.lid()]);
        let mut z = if (top - lid).abs() > 0.0 { (x3 - lid) / (top - lid) * (0.0 - cg.z[grid.lid()]) + cg.z[grid.lid()] } else { 0.5 * (lo + hi) };
        for _ in 0..50 {
            z = z.clamp(lo, hi);
            let w = cg.interp_weights(z);
            let v: f64 = w.iter().zip(&col).map(|(a, b)| a * b).sum();
            let d: f64 = w.iter().zip(&dcol).map(|(a, b)| a * b).sum();
            if d <= 0.0 {
                return Err(Error::Domain(format!("harmonic coordinates not monotone in column {p}")));
            }
            let step = (v - x3) / d;
            z -= step;
            if step.abs() < 1e-14 {
                return Ok(z.clamp(lo, hi));
            }
        }
        Err(Error::NonConvergence { solver: "newton inversion", iterations: 50, history: vec![] })
    }
}
