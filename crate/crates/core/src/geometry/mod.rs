//! Graph interfaces, the smoothed flattening map and its elliptic
//! coefficients, harmonic coordinates, and physical derivatives on strips.
//!
//! The minus strip `z ∈ [-1, 0]` is mapped onto `{-1 < x3 < f}` and the plus
//! strip `z ∈ [0, 1]` onto `{f < x3 < 1}` by
//!
//! `ρ(x, z) = z + (1 - |z|) e^{-δ|z||D|} f(x)`,
//!
//! so that `ρ(x, 0) = f`, `ρ = ±1` on the lids, and the smoothing decays
//! away from the interface.

mod harmonic;
mod physical;

pub use harmonic::{harmonic_coordinates, HarmonicCoordinates};

use std::sync::Arc;

use num_complex::Complex64;

use crate::elliptic::PrecondCache;
use crate::fields::{StripGrid, StripScalar, TorusGrid, TorusScalar};
use crate::{Error, Result, Side};

const MAX_HALVINGS: usize = 40;

/// Interface `x3 = f(x')` with separation margin `c0`.
#[derive(Debug, Clone)]
pub struct Surface {
    pub f: TorusScalar,
    pub c0: f64,
}

impl Surface {
    /// Checks `|f| <= 1 - c0` at every grid point.
    pub fn new(f: TorusScalar, c0: f64) -> Result<Self> {
        if !(c0 > 0.0 && c0 < 1.0) {
            return Err(Error::Domain(format!("c0 must lie in (0, 1), got {c0}")));
        }
        let m = f.max_abs();
        if !m.is_finite() || m > 1.0 - c0 + 1e-12 {
            return Err(Error::SurfaceOutOfBounds { max_abs_f: m, c0 });
        }
        Ok(Self { f, c0 })
    }

    pub fn flat(grid: TorusGrid, c0: f64) -> Self {
        Self { f: TorusScalar::zeros(grid), c0 }
    }

    pub fn grid(&self) -> TorusGrid {
        self.f.grid()
    }

    pub fn mean(&self) -> f64 {
        self.f.mean()
    }
}

/// Non-unit upward normal `N = (-∂1 f, -∂2 f, 1)`.
pub fn interface_normal(surface: &Surface) -> [TorusScalar; 3] {
    let [f1, f2] = surface.f.grad();
    let g = surface.grid();
    [f1.scale(-1.0), f2.scale(-1.0), TorusScalar::constant(g, 1.0)]
}

/// Flattening map of one strip with the derivatives the solvers need.
#[derive(Debug, Clone)]
pub struct FlatteningMap {
    pub side: Side,
    pub delta: f64,
    pub grid: StripGrid,
    pub f: TorusScalar,
    pub rho: StripScalar,
    pub rho_z: StripScalar,
    pub rho_zz: StripScalar,
    pub grad_rho: [StripScalar; 2],
    pub grad_rho_z: [StripScalar; 2],
    pub lap_rho: StripScalar,
}

/// Smoothed levels `e^{-δ t|D|} g` at `t = |z_k|`, as spectra.
fn smoothed_levels(grid: StripGrid, g: &TorusScalar, delta: f64) -> Vec<Vec<Complex64>> {
    let cg = grid.cheb();
    let t = grid.torus;
    let spec = g.spectrum();
    cg.z
        .iter()
        .map(|&z| {
            let tz = z.abs();
            spec.iter()
                .enumerate()
                .map(|(m, c)| {
                    let (kx, ky) = t.wavenumber(m);
                    c * (-delta * tz * (kx * kx + ky * ky).sqrt()).exp()
                })
                .collect()
        })
        .collect()
}

fn level_op(grid: StripGrid, levels: &[Vec<Complex64>], op: impl Fn(usize, Complex64, f64, f64, bool) -> Complex64) -> StripScalar {
    let t = grid.torus;
    let plan = t.plan();
    let mut values = Vec::with_capacity(grid.len());
    for (k, lv) in levels.iter().enumerate() {
        let s: Vec<Complex64> = lv
            .iter()
            .enumerate()
            .map(|(m, &c)| {
                let (kx, ky) = t.wavenumber(m);
                op(k, c, kx, ky, t.is_nyquist(m))
            })
            .collect();
        values.extend(plan.inverse(&s));
    }
    StripScalar::from_values(grid, values)
}

impl FlatteningMap {
    /// Map with a prescribed smoothing parameter; fails if `∂z ρ < c0/2` somewhere.
    pub fn with_delta(surface: &Surface, side: Side, nz: usize, delta: f64) -> Result<Self> {
        let map = Self::evaluate(surface, side, nz, delta)?;
        let bound = 0.5 * surface.c0;
        let m = map.rho_z.min();
        if m < bound {
            return Err(Error::SurfaceTooRough { min_rho_z: m, halvings: 0, bound });
        }
        Ok(map)
    }

    fn evaluate(surface: &Surface, side: Side, nz: usize, delta: f64) -> Result<Self> {
        let grid = StripGrid::new(surface.grid(), nz, side)?;
        let cg = grid.cheb();
        let s = side.sign();
        let levels = smoothed_levels(grid, &surface.f, delta);
        let one_minus_t = |k: usize| 1.0 - cg.z[k].abs();
        let i = Complex64::new(0.0, 1.0);
        let absd = |kx: f64, ky: f64| (kx * kx + ky * ky).sqrt();

        let rho = level_op(grid, &levels, |k, c, _, _, _| c * one_minus_t(k));
        let rho = StripScalar::from_values(
            grid,
            rho.values().iter().enumerate().map(|(p, v)| v + cg.z[p / grid.nxy()]).collect(),
        );
        let rho_z = level_op(grid, &levels, |k, c, kx, ky, _| {
            -s * c * (1.0 + one_minus_t(k) * delta * absd(kx, ky))
        })
        .map(|v| 1.0 + v);
        let rho_zz = level_op(grid, &levels, |k, c, kx, ky, _| {
            let a = delta * absd(kx, ky);
            c * (2.0 * a + one_minus_t(k) * a * a)
        });
        let grad_rho = [0usize, 1].map(|ax| {
            level_op(grid, &levels, |k, c, kx, ky, nyq| {
                if nyq {
                    return Complex64::new(0.0, 0.0);
                }
                c * i * (if ax == 0 { kx } else { ky }) * one_minus_t(k)
            })
        });
        let grad_rho_z = [0usize, 1].map(|ax| {
            level_op(grid, &levels, |k, c, kx, ky, nyq| {
                if nyq {
                    return Complex64::new(0.0, 0.0);
                }
                -s * c * i * (if ax == 0 { kx } else { ky }) * (1.0 + one_minus_t(k) * delta * absd(kx, ky))
            })
        });
        let lap_rho = level_op(grid, &levels, |k, c, kx, ky, _| -c * (kx * kx + ky * ky) * one_minus_t(k));
        Ok(Self { side, delta, grid, f: surface.f.clone(), rho, rho_z, rho_zz, grad_rho, grad_rho_z, lap_rho })
    }

    /// `∂t ρ` when the interface moves with `∂t f = theta` (δ held fixed).
    pub fn rho_t(&self, theta: &TorusScalar) -> StripScalar {
        let cg = self.grid.cheb();
        let levels = smoothed_levels(self.grid, theta, self.delta);
        level_op(self.grid, &levels, |k, c, _, _, _| c * (1.0 - cg.z[k].abs()))
    }

    pub fn nz(&self) -> usize {
        self.grid.nz
    }

    /// Sample a function of physical position `(x1, x2, x3)` at the nodes.
    pub fn sample(&self, g: impl Fn(f64, f64, f64) -> f64) -> StripScalar {
        let t = self.grid.torus;
        let n = t.len();
        let values = self
            .rho
            .values()
            .iter()
            .enumerate()
            .map(|(i, &x3)| {
                let p = i % n;
                g(t.x(p / t.ny), t.y(p % t.ny), x3)
            })
            .collect();
        StripScalar::from_values(self.grid, values)
    }

    pub fn sample_vector(&self, g: impl Fn(f64, f64, f64) -> [f64; 3]) -> crate::fields::StripVector {
        crate::fields::StripVector::new([
            self.sample(|x, y, z| g(x, y, z)[0]),
            self.sample(|x, y, z| g(x, y, z)[1]),
            self.sample(|x, y, z| g(x, y, z)[2]),
        ])
    }
}

/// Build the flattening map, halving `δ` from 1 until `∂z ρ >= c0/2`.
pub fn build_flattening(surface: &Surface, side: Side, nz: usize) -> Result<FlatteningMap> {
    let bound = 0.5 * surface.c0;
    let mut delta = 1.0;
    let mut last = f64::NAN;
    for _ in 0..=MAX_HALVINGS {
        let map = FlatteningMap::evaluate(surface, side, nz, delta)?;
        last = map.rho_z.min();
        if last >= bound {
            return Ok(map);
        }
        delta *= 0.5;
    }
    Err(Error::SurfaceTooRough { min_rho_z: last, halvings: MAX_HALVINGS, bound })
}

/// Coefficients of `Ψ_zz + αΔΨ + β·∇Ψ_z − γΨ_z` on a flattened strip.
#[derive(Debug, Clone)]
pub struct EllipticCoefficients {
    pub map: Arc<FlatteningMap>,
    pub alpha: StripScalar,
    pub beta: [StripScalar; 2],
    pub gamma: StripScalar,
    /// Whether the map is the identity (`f = 0`).
    pub flat: bool,
    /// `∂_i ρ / ∂_z ρ`, for physical horizontal derivatives.
    pub(crate) ratio: [StripScalar; 2],
    /// `1 / ∂_z ρ`.
    pub(crate) inv_rho_z: StripScalar,
    pub(crate) precond: PrecondCache,
    /// Surface slope `∇f`.
    pub slope: [TorusScalar; 2],
}

pub fn flatten_coefficients(map: Arc<FlatteningMap>) -> EllipticCoefficients {
    let m = &*map;
    let q = m.grad_rho[0].mul(&m.grad_rho[0]).add(&m.grad_rho[1].mul(&m.grad_rho[1])).map(|v| 1.0 + v);
    let alpha = m.rho_z.mul(&m.rho_z).div(&q);
    let beta = [0, 1].map(|i| m.rho_z.mul(&m.grad_rho[i]).div(&q).scale(-2.0));
    let gamma = m
        .rho_zz
        .add(&alpha.mul(&m.lap_rho))
        .add(&beta[0].mul(&m.grad_rho_z[0]))
        .add(&beta[1].mul(&m.grad_rho_z[1]))
        .div(&m.rho_z);
    let inv_rho_z = m.rho_z.map(|v| 1.0 / v);
    let ratio = [0, 1].map(|i| m.grad_rho[i].mul(&inv_rho_z));
    let flat = m.f.max_abs() == 0.0;
    let slope = m.f.grad();
    EllipticCoefficients { map, alpha, beta, gamma, flat, ratio, inv_rho_z, precond: PrecondCache::default(), slope }
}

impl EllipticCoefficients {
    pub fn build(surface: &Surface, side: Side, nz: usize) -> Result<Self> {
        Ok(flatten_coefficients(Arc::new(build_flattening(surface, side, nz)?)))
    }

    pub fn with_delta(surface: &Surface, side: Side, nz: usize, delta: f64) -> Result<Self> {
        Ok(flatten_coefficients(Arc::new(FlatteningMap::with_delta(surface, side, nz, delta)?)))
    }

    pub fn grid(&self) -> StripGrid {
        self.map.grid
    }

    pub fn side(&self) -> Side {
        self.map.side
    }

    /// Ellipticity floor `min α`.
    pub fn alpha_min(&self) -> f64 {
        self.alpha.min()
    }
}

#[cfg(test)]
mod tests;
