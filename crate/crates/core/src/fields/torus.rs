use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use super::fft::{self, TorusFft};
use crate::{Error, Result};

/// Uniform periodic grid over `[0, 2π)²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TorusGrid {
    pub nx: usize,
    pub ny: usize,
}

impl TorusGrid {
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        if nx < 4 || ny < 4 || nx % 2 != 0 || ny % 2 != 0 {
            return Err(Error::Grid(format!("torus grid must be even and >= 4, got {nx}x{ny}")));
        }
        Ok(Self { nx, ny })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn nky(&self) -> usize {
        self.ny / 2 + 1
    }

    pub fn n_modes(&self) -> usize {
        self.nx * self.nky()
    }

    pub fn x(&self, ix: usize) -> f64 {
        2.0 * PI * ix as f64 / self.nx as f64
    }

    pub fn y(&self, iy: usize) -> f64 {
        2.0 * PI * iy as f64 / self.ny as f64
    }

    /// Signed x-wavenumber of spectral row `ix`; the Nyquist row maps to `+nx/2`.
    pub fn kx(&self, ix: usize) -> f64 {
        if ix <= self.nx / 2 {
            ix as f64
        } else {
            ix as f64 - self.nx as f64
        }
    }

    pub fn ky(&self, iy: usize) -> f64 {
        iy as f64
    }

    /// Wavenumbers of half-spectrum mode `m`.
    pub fn wavenumber(&self, m: usize) -> (f64, f64) {
        (self.kx(m % self.nx), self.ky(m / self.nx))
    }

    /// Whether mode `m` sits on a Nyquist line, where odd derivatives vanish.
    pub fn is_nyquist(&self, m: usize) -> bool {
        m % self.nx == self.nx / 2 || m / self.nx == self.ny / 2
    }

    /// Multiplicity of a half-spectrum mode in the full spectrum.
    pub fn mode_weight(&self, m: usize) -> f64 {
        let iy = m / self.nx;
        if iy == 0 || iy == self.ny / 2 {
            1.0
        } else {
            2.0
        }
    }

    /// Two-thirds rule: keep modes with `|k_i| <= n_i/3`.
    pub fn keeps(&self, m: usize) -> bool {
        let (kx, ky) = self.wavenumber(m);
        kx.abs() <= self.nx as f64 / 3.0 && ky.abs() <= self.ny as f64 / 3.0
    }

    /// Grid cell area `(2π)²/(nx ny)`.
    pub fn cell_area(&self) -> f64 {
        4.0 * PI * PI / self.len() as f64
    }

    pub(crate) fn plan(&self) -> Arc<TorusFft> {
        fft::plan(self.nx, self.ny)
    }
}

/// Exponent of the discrete Sobolev norm, multiplier `(1+|ξ|²)^{s/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevIndex(f64);

impl SobolevIndex {
    pub fn new(s: f64) -> Result<Self> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::Domain(format!("Sobolev index must be finite and >= 0, got {s}")));
        }
        Ok(Self(s))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Real scalar on the torus grid with a lazily computed half spectrum.
#[derive(Debug, Clone)]
pub struct TorusScalar {
    grid: TorusGrid,
    values: Vec<f64>,
    spectral: OnceLock<Vec<Complex64>>,
}

impl TorusScalar {
    pub fn from_values(grid: TorusGrid, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len(), "value count does not match grid");
        Self { grid, values, spectral: OnceLock::new() }
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self::from_values(grid, vec![0.0; grid.len()])
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        Self::from_values(grid, vec![c; grid.len()])
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut v = Vec::with_capacity(grid.len());
        for ix in 0..grid.nx {
            for iy in 0..grid.ny {
                v.push(f(grid.x(ix), grid.y(iy)));
            }
        }
        Self::from_values(grid, v)
    }

    pub fn from_spectrum(grid: TorusGrid, spec: Vec<Complex64>) -> Self {
        assert_eq!(spec.len(), grid.n_modes());
        let values = grid.plan().inverse(&spec);
        Self { grid, values, spectral: OnceLock::new() }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[ix * self.grid.ny + iy]
    }

    pub fn spectrum(&self) -> &[Complex64] {
        self.spectral.get_or_init(|| self.grid.plan().forward(&self.values))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
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

    /// `∫_{T²} g dx'` by the trapezoidal (spectrally exact) rule.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    /// Grid L² norm `(∫ g²)^{1/2}`.
    pub fn l2(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_area()).sqrt()
    }

    /// L² inner product `∫ g h dx'`.
    pub fn dot(&self, other: &TorusScalar) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>() * self.grid.cell_area()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_values(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &TorusScalar, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid);
        Self::from_values(
            self.grid,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    pub fn add(&self, other: &TorusScalar) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &TorusScalar) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &TorusScalar) -> Self {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &TorusScalar) -> Self {
        self.zip_with(other, |a, b| a + c * b)
    }

    fn apply_real_symbol(&self, m: impl Fn(f64, f64, usize) -> Complex64) -> Self {
        let spec: Vec<Complex64> = self
            .spectrum()
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let (kx, ky) = self.grid.wavenumber(i);
                c * m(kx, ky, i)
            })
            .collect();
        Self::from_spectrum(self.grid, spec)
    }

    /// Fourier multiplier with an arbitrary symbol `m(ξ1, ξ2)`.
    ///
    /// Reality of the output is enforced by the inverse transform; it matches
    /// the exact multiplier whenever `m(-ξ) = conj(m(ξ))`.
    pub fn fourier_multiplier(&self, m: impl Fn(f64, f64) -> Complex64) -> Result<Self> {
        let mut spec = Vec::with_capacity(self.grid.n_modes());
        for (i, c) in self.spectrum().iter().enumerate() {
            let (kx, ky) = self.grid.wavenumber(i);
            let v = m(kx, ky);
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::Domain(format!(
                    "multiplier is not finite at mode ({kx}, {ky}): {v}"
                )));
            }
            spec.push(c * v);
        }
        Ok(Self::from_spectrum(self.grid, spec))
    }

    /// Real-valued multiplier; infallible for finite symbols.
    pub fn real_multiplier(&self, m: impl Fn(f64, f64) -> f64) -> Self {
        self.apply_real_symbol(|kx, ky, _| Complex64::new(m(kx, ky), 0.0))
    }

    /// `∂_1` (axis = 0) or `∂_2` (axis = 1).
    pub fn deriv(&self, axis: usize) -> Self {
        let grid = self.grid;
        self.apply_real_symbol(|kx, ky, i| {
            if grid.is_nyquist(i) {
                return Complex64::new(0.0, 0.0);
            }
            let k = if axis == 0 { kx } else { ky };
            Complex64::new(0.0, k)
        })
    }

    pub fn grad(&self) -> [Self; 2] {
        [self.deriv(0), self.deriv(1)]
    }

    /// `∂_i ∂_j`.
    pub fn deriv2(&self, i: usize, j: usize) -> Self {
        let grid = self.grid;
        self.apply_real_symbol(|kx, ky, m| {
            let k = [kx, ky];
            if i != j && grid.is_nyquist(m) {
                return Complex64::new(0.0, 0.0);
            }
            Complex64::new(-k[i] * k[j], 0.0)
        })
    }

    pub fn laplacian(&self) -> Self {
        self.real_multiplier(|kx, ky| -(kx * kx + ky * ky))
    }

    /// Inverse Laplacian on zero-mean data; the mean of the input is ignored.
    pub fn inverse_laplacian(&self) -> Self {
        self.real_multiplier(|kx, ky| {
            let k2 = kx * kx + ky * ky;
            if k2 == 0.0 {
                0.0
            } else {
                -1.0 / k2
            }
        })
    }

    /// Discrete `H^s` norm: `(2π)² Σ (1+|ξ|²)^s |ĝ(ξ)|²`, square-rooted.
    /// With `s = 0` it coincides with [`TorusScalar::l2`] (Parseval).
    pub fn sobolev_norm(&self, s: SobolevIndex) -> f64 {
        let sum: f64 = self
            .spectrum()
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let (kx, ky) = self.grid.wavenumber(i);
                self.grid.mode_weight(i) * (1.0 + kx * kx + ky * ky).powf(s.value()) * c.norm_sqr()
            })
            .sum();
        (4.0 * PI * PI * sum).sqrt()
    }

    /// `g - ⟨g⟩`.
    pub fn mean_project(&self) -> Self {
        let m = self.mean();
        self.map(|v| v - m)
    }

    /// Two-thirds dealiasing.
    pub fn dealias(&self) -> Self {
        let grid = self.grid;
        self.apply_real_symbol(|_, _, i| if grid.keeps(i) { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
    }

    /// Complex amplitude of the mode `(kx, ky)` (any sign of `ky`).
    pub fn mode_amplitude(&self, kx: i64, ky: i64) -> Complex64 {
        let (kx, ky, conj) = if ky < 0 { (-kx, -ky, true) } else { (kx, ky, false) };
        let ix = kx.rem_euclid(self.grid.nx as i64) as usize;
        let iy = ky as usize;
        let c = self.spectrum()[iy * self.grid.nx + ix];
        if conj {
            c.conj()
        } else {
            c
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> TorusGrid {
        TorusGrid::new(n, n).unwrap()
    }

    #[test]
    fn multiplier_examples() {
        let g = grid(16);
        let c = TorusScalar::from_fn(g, |x, _| x.cos());
        let out = c.fourier_multiplier(|a, b| Complex64::new((a * a + b * b).sqrt(), 0.0)).unwrap();
        assert!(out.sub(&c).max_abs() < 1e-13);

        let k = TorusScalar::constant(g, 3.5);
        let out = k.real_multiplier(|a, b| (a * a + b * b).sqrt());
        assert!(out.max_abs() < 1e-13);

        let w = TorusScalar::from_fn(g, |x, y| (2.0 * x + y).cos());
        let out = w.real_multiplier(|a, b| (1.0 + a * a + b * b).sqrt());
        assert!(out.sub(&w.scale(6f64.sqrt())).max_abs() < 1e-12);
    }

    #[test]
    fn non_finite_multiplier_names_mode() {
        let g = grid(8);
        let c = TorusScalar::from_fn(g, |x, _| x.cos());
        let err = c
            .fourier_multiplier(|a, b| Complex64::new(1.0 / (a * a + b * b), 0.0))
            .unwrap_err();
        assert!(err.to_string().contains("(0, 0)"), "{err}");
    }

    #[test]
    fn sobolev_examples() {
        let g = grid(16);
        assert_eq!(TorusScalar::zeros(g).sobolev_norm(SobolevIndex::new(1.0).unwrap()), 0.0);
        let c = TorusScalar::from_fn(g, |x, _| x.cos());
        let l2 = c.sobolev_norm(SobolevIndex::new(0.0).unwrap());
        assert!((l2 - (2.0 * PI * PI).sqrt()).abs() < 1e-12);
        assert!((l2 - c.l2()).abs() < 1e-12);
        let h1 = c.sobolev_norm(SobolevIndex::new(1.0).unwrap());
        assert!((h1 / l2 - 2f64.sqrt()).abs() < 1e-12);
        let c3 = TorusScalar::from_fn(g, |_, y| (3.0 * y).cos());
        let r = c3.sobolev_norm(SobolevIndex::new(2.0).unwrap()) / c3.l2();
        assert!((r - 10.0).abs() < 1e-11);
        assert!(SobolevIndex::new(-0.5).is_err());
    }

    #[test]
    fn mean_project_examples() {
        let g = grid(8);
        assert!(TorusScalar::constant(g, 5.0).mean_project().max_abs() < 1e-15);
        let c = TorusScalar::from_fn(g, |x, _| x.cos() + 2.0).mean_project();
        let expect = TorusScalar::from_fn(g, |x, _| x.cos());
        assert!(c.sub(&expect).max_abs() < 1e-14);
    }

    #[test]
    fn dealias_removes_nyquist_and_keeps_low_modes() {
        let g = grid(16);
        let low = TorusScalar::from_fn(g, |x, y| (2.0 * x).sin() + (5.0 * y - x).cos());
        assert!(low.dealias().sub(&low).max_abs() < 1e-13);
        let nyq = TorusScalar::from_fn(g, |x, _| (8.0 * x).cos());
        assert!(nyq.dealias().max_abs() < 1e-13);
    }

    #[test]
    fn dealiased_product_matches_direct_convolution() {
        // Oracle: direct convolution of two band-limited spectra at N = 8,
        // then projection onto the retained modes.
        let n = 8;
        let g = grid(n);
        let a = TorusScalar::from_fn(g, |x, y| 1.0 + x.cos() + 0.5 * (x + 2.0 * y).sin());
        let b = TorusScalar::from_fn(g, |x, y| (2.0 * y).cos() - 0.3 * (x - y).sin());
        let full = |f: &TorusScalar| {
            let mut m = std::collections::HashMap::new();
            for kx in -(n as i64) / 2 + 1..(n as i64) / 2 {
                for ky in -(n as i64) / 2 + 1..(n as i64) / 2 {
                    m.insert((kx, ky), f.mode_amplitude(kx, ky));
                }
            }
            m
        };
        let (fa, fb) = (full(&a), full(&b));
        let prod = a.mul(&b).dealias();
        for kx in -2i64..=2 {
            for ky in -2i64..=2 {
                let mut s = Complex64::new(0.0, 0.0);
                for (&(ax, ay), ca) in &fa {
                    if let Some(cb) = fb.get(&(kx - ax, ky - ay)) {
                        s += ca * cb;
                    }
                }
                assert!((prod.mode_amplitude(kx, ky) - s).norm() < 1e-13, "mode {kx},{ky}");
            }
        }
    }

    #[test]
    fn derivative_matches_fourth_order_differences() {
        let f = |x: f64, y: f64| (x + 0.3 * y.sin()).sin().exp();
        let mut errs = Vec::new();
        for n in [32usize, 64] {
            let g = grid(n);
            let s = TorusScalar::from_fn(g, f);
            let d = s.deriv(0);
            let h = 2.0 * PI / n as f64;
            let fd = TorusScalar::from_fn(g, |x, y| {
                (-f(x + 2.0 * h, y) + 8.0 * f(x + h, y) - 8.0 * f(x - h, y) + f(x - 2.0 * h, y)) / (12.0 * h)
            });
            errs.push(d.sub(&fd).max_abs());
        }
        // Fourth-order finite differences: halving h cuts the gap ~16x.
        assert!(errs[0] / errs[1] > 12.0, "{errs:?}");
    }
}
