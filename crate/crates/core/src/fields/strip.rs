use num_complex::Complex64;
use std::sync::Arc;

use super::cheb::{self, ChebGrid};
use super::torus::{TorusGrid, TorusScalar};
use crate::Side;

/// Tensor grid `T² x {z_k}` on one flattened strip.
///
/// Values are stored level by level: `values[k * nx * ny + ix * ny + iy]`,
/// with level 0 on the interface and level `nz-1` on the lid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StripGrid {
    pub torus: TorusGrid,
    pub nz: usize,
    pub side: Side,
}

impl StripGrid {
    pub fn new(torus: TorusGrid, nz: usize, side: Side) -> crate::Result<Self> {
        if nz < 4 {
            return Err(crate::Error::Grid(format!("strip needs nz >= 4, got {nz}")));
        }
        Ok(Self { torus, nz, side })
    }

    pub fn with_side(&self, side: Side) -> Self {
        Self { side, ..*self }
    }

    pub fn nxy(&self) -> usize {
        self.torus.len()
    }

    pub fn len(&self) -> usize {
        self.nxy() * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cheb(&self) -> Arc<ChebGrid> {
        cheb::cheb(self.nz, self.side)
    }

    pub fn lid(&self) -> usize {
        self.nz - 1
    }
}

/// Real scalar on a strip.
#[derive(Debug, Clone)]
pub struct StripScalar {
    grid: StripGrid,
    values: Vec<f64>,
}

/// Per-level half spectra of a strip scalar: `data[k * n_modes + m]`.
#[derive(Debug, Clone)]
pub struct StripSpectrum {
    pub grid: StripGrid,
    pub data: Vec<Complex64>,
}

impl StripSpectrum {
    pub fn zeros(grid: StripGrid) -> Self {
        Self { grid, data: vec![Complex64::new(0.0, 0.0); grid.torus.n_modes() * grid.nz] }
    }

    pub fn level(&self, k: usize) -> &[Complex64] {
        let nm = self.grid.torus.n_modes();
        &self.data[k * nm..(k + 1) * nm]
    }

    pub fn level_mut(&mut self, k: usize) -> &mut [Complex64] {
        let nm = self.grid.torus.n_modes();
        &mut self.data[k * nm..(k + 1) * nm]
    }

    /// Apply the collocation matrix `d` (nz x nz) along z in every mode.
    pub fn apply_z(&self, d: &[f64]) -> Self {
        let nz = self.grid.nz;
        let nm = self.grid.torus.n_modes();
        let mut out = Self::zeros(self.grid);
        for i in 0..nz {
            let dst = &mut out.data[i * nm..(i + 1) * nm];
            for j in 0..nz {
                let c = d[i * nz + j];
                if c == 0.0 {
                    continue;
                }
                let src = &self.data[j * nm..(j + 1) * nm];
                for (o, s) in dst.iter_mut().zip(src) {
                    *o += c * s;
                }
            }
        }
        out
    }

    /// Multiply every level by a real horizontal symbol.
    pub fn multiplier(&self, m: impl Fn(f64, f64, usize) -> f64 + Sync) -> Self {
        let t = self.grid.torus;
        let nm = t.n_modes();
        let sym: Vec<f64> = (0..nm)
            .map(|i| {
                let (kx, ky) = t.wavenumber(i);
                m(kx, ky, i)
            })
            .collect();
        let mut out = self.clone();
        for (idx, v) in out.data.iter_mut().enumerate() {
            *v *= sym[idx % nm];
        }
        out
    }

    /// Horizontal derivative (`i ξ_axis`, zero on Nyquist lines).
    pub fn deriv(&self, axis: usize) -> Self {
        let t = self.grid.torus;
        let nm = t.n_modes();
        let sym: Vec<Complex64> = (0..nm)
            .map(|i| {
                if t.is_nyquist(i) {
                    return Complex64::new(0.0, 0.0);
                }
                let (kx, ky) = t.wavenumber(i);
                Complex64::new(0.0, if axis == 0 { kx } else { ky })
            })
            .collect();
        let mut out = self.clone();
        for (idx, v) in out.data.iter_mut().enumerate() {
            *v *= sym[idx % nm];
        }
        out
    }

    pub fn to_physical(&self) -> StripScalar {
        let plan = self.grid.torus.plan();
        let nm = self.grid.torus.n_modes();
        let n = self.grid.nxy();
        let mut values = vec![0.0; self.grid.len()];
        for (k, out) in values.chunks_mut(n).enumerate() {
            plan.inverse_into(&self.data[k * nm..(k + 1) * nm], out);
        }
        StripScalar::from_values(self.grid, values)
    }
}

impl StripScalar {
    pub fn from_values(grid: StripGrid, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len(), "value count does not match strip grid");
        Self { grid, values }
    }

    pub fn zeros(grid: StripGrid) -> Self {
        Self::from_values(grid, vec![0.0; grid.len()])
    }

    pub fn constant(grid: StripGrid, c: f64) -> Self {
        Self::from_values(grid, vec![c; grid.len()])
    }

    /// Sample `f(x, y, z)` at the flattened grid points.
    pub fn from_fn(grid: StripGrid, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let cg = grid.cheb();
        let t = grid.torus;
        let mut v = Vec::with_capacity(grid.len());
        for k in 0..grid.nz {
            for ix in 0..t.nx {
                for iy in 0..t.ny {
                    v.push(f(t.x(ix), t.y(iy), cg.z[k]));
                }
            }
        }
        Self::from_values(grid, v)
    }

    /// Level-by-level construction from torus fields.
    pub fn from_levels(grid: StripGrid, levels: &[TorusScalar]) -> Self {
        assert_eq!(levels.len(), grid.nz);
        let mut v = Vec::with_capacity(grid.len());
        for l in levels {
            v.extend_from_slice(l.values());
        }
        Self::from_values(grid, v)
    }

    /// Constant-in-z extension of a torus field.
    pub fn extrude(grid: StripGrid, g: &TorusScalar) -> Self {
        let mut v = Vec::with_capacity(grid.len());
        for _ in 0..grid.nz {
            v.extend_from_slice(g.values());
        }
        Self::from_values(grid, v)
    }

    pub fn grid(&self) -> StripGrid {
        self.grid
    }

    pub fn side(&self) -> Side {
        self.grid.side
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn level_slice(&self, k: usize) -> &[f64] {
        let n = self.grid.nxy();
        &self.values[k * n..(k + 1) * n]
    }

    pub fn level(&self, k: usize) -> TorusScalar {
        TorusScalar::from_values(self.grid.torus, self.level_slice(k).to_vec())
    }

    /// Trace on the interface (`z = 0`).
    pub fn interface_trace(&self) -> TorusScalar {
        self.level(0)
    }

    /// Trace on the lid.
    pub fn lid_trace(&self) -> TorusScalar {
        self.level(self.grid.lid())
    }

    pub fn column(&self, p: usize) -> Vec<f64> {
        let n = self.grid.nxy();
        (0..self.grid.nz).map(|k| self.values[k * n + p]).collect()
    }

    pub fn spectrum(&self) -> StripSpectrum {
        let plan = self.grid.torus.plan();
        let nm = self.grid.torus.n_modes();
        let mut data = vec![Complex64::new(0.0, 0.0); nm * self.grid.nz];
        for (k, out) in data.chunks_mut(nm).enumerate() {
            plan.forward_into(self.level_slice(k), out);
        }
        StripSpectrum { grid: self.grid, data }
    }

    /// Horizontal derivative `∂_1` (axis 0) or `∂_2` (axis 1) at fixed `z`.
    pub fn deriv(&self, axis: usize) -> Self {
        self.spectrum().deriv(axis).to_physical()
    }

    /// `∂_z` by collocation.
    pub fn deriv_z(&self) -> Self {
        self.apply_z(&self.grid.cheb().d1)
    }

    pub fn deriv_zz(&self) -> Self {
        self.apply_z(&self.grid.cheb().d2)
    }

    fn apply_z(&self, d: &[f64]) -> Self {
        let nz = self.grid.nz;
        let n = self.grid.nxy();
        let mut out = vec![0.0; self.values.len()];
        for i in 0..nz {
            let dst = &mut out[i * n..(i + 1) * n];
            for j in 0..nz {
                let c = d[i * nz + j];
                let src = &self.values[j * n..(j + 1) * n];
                for (o, s) in dst.iter_mut().zip(src) {
                    *o += c * s;
                }
            }
        }
        Self::from_values(self.grid, out)
    }

    /// `∫_{lid}^{z} g dz'` at every node.
    pub fn integrate_from_lid(&self) -> Self {
        self.apply_z(&self.grid.cheb().integ)
    }

    /// Evaluate every column at depth `z` (barycentric interpolation).
    pub fn eval_at(&self, z: f64) -> TorusScalar {
        let w = self.grid.cheb().interp_weights(z);
        let n = self.grid.nxy();
        let mut out = vec![0.0; n];
        for (k, wk) in w.iter().enumerate() {
            for (o, v) in out.iter_mut().zip(self.level_slice(k)) {
                *o += wk * v;
            }
        }
        TorusScalar::from_values(self.grid.torus, out)
    }

    /// `∫ g dx' dz` over the flattened strip (no Jacobian).
    pub fn integral(&self) -> f64 {
        let cg = self.grid.cheb();
        let area = self.grid.torus.cell_area();
        (0..self.grid.nz)
            .map(|k| cg.weights[k] * self.level_slice(k).iter().sum::<f64>())
            .sum::<f64>()
            * area
    }

    /// `∫ g w dx' dz` with a pointwise weight (e.g. the Jacobian `∂_z ρ`).
    pub fn weighted_integral(&self, w: &StripScalar) -> f64 {
        self.mul(w).integral()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Quadrature L² norm over the flattened strip.
    pub fn l2(&self) -> f64 {
        self.mul(self).integral().max(0.0).sqrt()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_values(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, o: &StripScalar, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, o.grid, "strip grids differ");
        Self::from_values(self.grid, self.values.iter().zip(&o.values).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn add(&self, o: &StripScalar) -> Self {
        self.zip_with(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &StripScalar) -> Self {
        self.zip_with(o, |a, b| a - b)
    }

    pub fn mul(&self, o: &StripScalar) -> Self {
        self.zip_with(o, |a, b| a * b)
    }

    pub fn div(&self, o: &StripScalar) -> Self {
        self.zip_with(o, |a, b| a / b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn axpy(&self, c: f64, o: &StripScalar) -> Self {
        self.zip_with(o, |a, b| a + c * b)
    }

    pub fn add_assign_scaled(&mut self, c: f64, o: &StripScalar) {
        assert_eq!(self.grid, o.grid, "strip grids differ");
        for (a, b) in self.values.iter_mut().zip(&o.values) {
            *a += c * b;
        }
    }

    /// Two-thirds dealiasing on every level.
    pub fn dealias(&self) -> Self {
        let t = self.grid.torus;
        self.spectrum().multiplier(|_, _, i| if t.keeps(i) { 1.0 } else { 0.0 }).to_physical()
    }
}

/// Three scalar components on a common strip grid.
#[derive(Debug, Clone)]
pub struct StripVector {
    pub c: [StripScalar; 3],
}

impl StripVector {
    pub fn new(c: [StripScalar; 3]) -> Self {
        assert!(c[0].grid() == c[1].grid() && c[1].grid() == c[2].grid(), "component grids differ");
        Self { c }
    }

    pub fn zeros(grid: StripGrid) -> Self {
        Self::new([StripScalar::zeros(grid), StripScalar::zeros(grid), StripScalar::zeros(grid)])
    }

    pub fn constant(grid: StripGrid, v: [f64; 3]) -> Self {
        Self::new(v.map(|c| StripScalar::constant(grid, c)))
    }

    pub fn from_fn(grid: StripGrid, f: impl Fn(f64, f64, f64) -> [f64; 3]) -> Self {
        Self::new([
            StripScalar::from_fn(grid, |x, y, z| f(x, y, z)[0]),
            StripScalar::from_fn(grid, |x, y, z| f(x, y, z)[1]),
            StripScalar::from_fn(grid, |x, y, z| f(x, y, z)[2]),
        ])
    }

    pub fn grid(&self) -> StripGrid {
        self.c[0].grid()
    }

    pub fn map(&self, f: impl Fn(&StripScalar) -> StripScalar) -> Self {
        Self::new([f(&self.c[0]), f(&self.c[1]), f(&self.c[2])])
    }

    pub fn zip(&self, o: &StripVector, f: impl Fn(&StripScalar, &StripScalar) -> StripScalar) -> Self {
        Self::new([f(&self.c[0], &o.c[0]), f(&self.c[1], &o.c[1]), f(&self.c[2], &o.c[2])])
    }

    pub fn add(&self, o: &StripVector) -> Self {
        self.zip(o, |a, b| a.add(b))
    }

    pub fn sub(&self, o: &StripVector) -> Self {
        self.zip(o, |a, b| a.sub(b))
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|a| a.scale(s))
    }

    pub fn axpy(&self, s: f64, o: &StripVector) -> Self {
        self.zip(o, |a, b| a.axpy(s, b))
    }

    pub fn dot(&self, o: &StripVector) -> StripScalar {
        self.c[0].mul(&o.c[0]).add(&self.c[1].mul(&o.c[1])).add(&self.c[2].mul(&o.c[2]))
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().map(|s| s.max_abs()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|s| s.is_finite())
    }

    pub fn dealias(&self) -> Self {
        self.map(|a| a.dealias())
    }

    /// Quadrature L² norm over the flattened strip.
    pub fn l2(&self) -> f64 {
        self.dot(self).integral().max(0.0).sqrt()
    }

    pub fn interface_trace(&self) -> [TorusScalar; 3] {
        [self.c[0].interface_trace(), self.c[1].interface_trace(), self.c[2].interface_trace()]
    }

    pub fn lid_trace(&self) -> [TorusScalar; 3] {
        [self.c[0].lid_trace(), self.c[1].lid_trace(), self.c[2].lid_trace()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_and_collocation_derivatives() {
        let g = StripGrid::new(TorusGrid::new(16, 8).unwrap(), 9, Side::Minus).unwrap();
        let s = StripScalar::from_fn(g, |x, y, z| (x + 2.0 * y).sin() * (z * z * z + z));
        let dx = s.deriv(0);
        let dz = s.deriv_z();
        let ex = StripScalar::from_fn(g, |x, y, z| (x + 2.0 * y).cos() * (z * z * z + z));
        let ez = StripScalar::from_fn(g, |x, y, z| (x + 2.0 * y).sin() * (3.0 * z * z + 1.0));
        assert!(dx.sub(&ex).max_abs() < 1e-12);
        assert!(dz.sub(&ez).max_abs() < 1e-11);
        let back = s.spectrum().to_physical();
        assert!(back.sub(&s).max_abs() < 1e-13);
    }

    #[test]
    fn integrals_over_strip() {
        for side in [Side::Minus, Side::Plus] {
            let g = StripGrid::new(TorusGrid::new(8, 8).unwrap(), 7, side).unwrap();
            let s = StripScalar::from_fn(g, |x, _, z| 2.0 + x.cos() + z * z);
            let exact = 4.0 * std::f64::consts::PI.powi(2) * (2.0 + 1.0 / 3.0);
            assert!((s.integral() - exact).abs() < 1e-11);
            let ev = s.eval_at(if side == Side::Minus { -0.3 } else { 0.3 });
            let want = TorusScalar::from_fn(g.torus, |x, _| 2.0 + x.cos() + 0.09);
            assert!(ev.sub(&want).max_abs() < 1e-12);
        }
    }
}
