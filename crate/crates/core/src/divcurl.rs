//! Recovery of a vector field from its curl, divergence, interface normal
//! trace and lid tangential means.
//!
//! On one fluid region the field `u` with
//! `curl u = ω`, `div u = g`, `N·u = θ` on the interface, `u3 = 0` and
//! `⟨u_h⟩ = α` on the lid is assembled as `u = v + ∇φ`:
//!
//! * `v` is an axial-gauge particular solution with `v3 = 0`: on the lid
//!   `v_h = ∇^⊥χ` with `Δ'χ = ω3`, and upward
//!   `∂3 v1 = ω2`, `∂3 v2 = −ω1`, so `curl v = ω` whenever `div ω = 0`;
//!   `v_h` is then shifted by a constant to match the lid means;
//! * `φ` solves the Neumann problem `Δφ = g − div v`,
//!   `N·∇φ = θ − N·v` on the interface, `∂3φ = 0` on the lid.
//!
//! Solvability needs `div ω = 0` (C1), `∫_lid ω3 = 0` (C2) and the flux
//! balance `∫ g = ∓∫ θ` on the plus/minus side (C3).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::elliptic::{solve_neumann, SolverOptions};
use crate::fields::cheb::{cheb, lobatto_diff, lobatto_nodes};
use crate::fields::{StripScalar, StripVector, TorusGrid, TorusScalar};
use crate::geometry::EllipticCoefficients;
use crate::{Error, Result, Side};

#[derive(Debug, Clone)]
pub struct DivCurlData {
    /// Curl data, physical components.
    pub omega: StripVector,
    /// Divergence data.
    pub g: StripScalar,
    /// `N·u` on the interface.
    pub theta_bc: TorusScalar,
    /// Averages of `u1`, `u2` over the lid.
    pub lid_means: [f64; 2],
}

impl DivCurlData {
    pub fn curl_free(grid: crate::fields::StripGrid, theta_bc: TorusScalar, lid_means: [f64; 2]) -> Self {
        Self { omega: StripVector::zeros(grid), g: StripScalar::zeros(grid), theta_bc, lid_means }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DivCurlOptions {
    pub solver: SolverOptions,
    /// Allowed `max|div ω|`, relative to `max(1, max|ω|)`.
    pub c1_tol: f64,
    /// Allowed `|∫_lid ω3 dx'|`, relative to `(2π)² max(1, max|ω|)`.
    pub c2_tol: f64,
    /// Allowed flux imbalance, relative to the data size.
    pub c3_tol: f64,
    /// Check the compatibility conditions before solving.
    pub validate: bool,
    /// Measure curl/div/trace residuals after solving.
    pub residuals: bool,
}

impl Default for DivCurlOptions {
    fn default() -> Self {
        Self { solver: SolverOptions::default(), c1_tol: 1e-6, c2_tol: 1e-8, c3_tol: 1e-8, validate: true, residuals: true }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DivCurlResiduals {
    /// `max|curl u − ω| / max(1, max|ω|)`.
    pub curl: f64,
    pub div: f64,
    /// `max|N·u − θ|` on the interface.
    pub trace: f64,
    /// `max|u3|` on the lid.
    pub lid_normal: f64,
    /// Compatibility constant absorbed by the Neumann solve.
    pub neumann_constant: f64,
}

#[derive(Debug, Clone)]
pub struct RecoveredField {
    pub u: StripVector,
    pub residuals: Option<DivCurlResiduals>,
}

/// Horizontal mean of a torus field.
fn lid_mean(s: &StripScalar) -> f64 {
    s.lid_trace().mean()
}

pub fn check_compatibility(data: &DivCurlData, coeffs: &EllipticCoefficients, opts: &DivCurlOptions) -> Result<()> {
    let scale = 1f64.max(data.omega.max_abs());
    let area = coeffs.grid().torus.cell_area() * coeffs.grid().nxy() as f64;
    let c2 = data.omega.c[2].lid_trace().integral();
    if c2.abs() > opts.c2_tol * area * scale {
        return Err(Error::C2 { defect: c2 });
    }
    let c1 = coeffs.div(&data.omega).max_abs();
    if c1 > opts.c1_tol * scale {
        return Err(Error::C1 { defect: c1 });
    }
    let s = coeffs.side().sign();
    let c3 = coeffs.volume_integral(&data.g) + s * data.theta_bc.integral();
    let dscale = 1.0 + coeffs.volume_integral(&data.g.map(f64::abs)) + data.theta_bc.map(f64::abs).integral();
    if c3.abs() > opts.c3_tol * dscale {
        return Err(Error::C3 { defect: c3 });
    }
    Ok(())
}

/// Particular solution with `v3 = 0` and `curl v = ω` (given C1, C2).
fn axial_gauge(omega: &StripVector, coeffs: &EllipticCoefficients) -> StripVector {
    let grid = coeffs.grid();
    let w3 = omega.c[2].lid_trace().mean_project();
    let chi = w3.inverse_laplacian();
    let [c1, c2] = chi.grad();
    let a1 = StripScalar::extrude(grid, &c2.scale(-1.0));
    let a2 = StripScalar::extrude(grid, &c1);
    let rz = &coeffs.map.rho_z;
    let v1 = a1.add(&omega.c[1].mul(rz).integrate_from_lid());
    let v2 = a2.sub(&omega.c[0].mul(rz).integrate_from_lid());
    StripVector::new([v1, v2, StripScalar::zeros(grid)])
}

pub fn divcurl_solve(data: &DivCurlData, coeffs: &EllipticCoefficients, opts: &DivCurlOptions) -> Result<RecoveredField> {
    let side = coeffs.side();
    if opts.validate {
        check_compatibility(data, coeffs, opts).map_err(|e| e.sided(side))?;
    }
    let grid = coeffs.grid();
    let mut v = axial_gauge(&data.omega, coeffs);
    for i in 0..2 {
        let shift = data.lid_means[i] - lid_mean(&v.c[i]);
        v.c[i] = v.c[i].map(|x| x + shift);
    }
    let r = data.g.sub(&coeffs.div(&v));
    let nv = coeffs.normal_component_at_interface(&v.c);
    let flux = data.theta_bc.sub(&nv);
    let sol = solve_neumann(coeffs, &r, &flux, &TorusScalar::zeros(grid.torus), &opts.solver, f64::INFINITY)
        .map_err(|e| e.sided(side))?;
    let gphi = coeffs.grad(&sol.psi);
    let u = StripVector::new([v.c[0].add(&gphi[0]), v.c[1].add(&gphi[1]), v.c[2].add(&gphi[2])]);
    let residuals = opts.residuals.then(|| {
        let scale = 1f64.max(data.omega.max_abs());
        DivCurlResiduals {
            curl: coeffs.curl(&u).sub(&data.omega).max_abs() / scale,
            div: coeffs.div(&u).sub(&data.g).max_abs(),
            trace: coeffs.normal_component_at_interface(&u.c).sub(&data.theta_bc).max_abs(),
            lid_normal: u.c[2].lid_trace().max_abs(),
            neumann_constant: sol.compat_constant,
        }
    });
    Ok(RecoveredField { u, residuals })
}

/// Lid average of the tangential components of `u`.
pub fn lid_means(u: &StripVector) -> [f64; 2] {
    [lid_mean(&u.c[0]), lid_mean(&u.c[1])]
}

/// Vector field on the flat slab `T² x [-1, 1]`, sampled on Chebyshev–Lobatto
/// nodes `z_k = cos(πk/(nz-1))` (descending). Storage is level-major.
#[derive(Debug, Clone)]
pub struct SlabVector {
    pub torus: TorusGrid,
    pub nz: usize,
    pub c: [Vec<f64>; 3],
}

impl SlabVector {
    pub fn nodes(nz: usize) -> Vec<f64> {
        lobatto_nodes(nz)
    }

    pub fn zeros(torus: TorusGrid, nz: usize) -> Self {
        let n = torus.len() * nz;
        Self { torus, nz, c: [vec![0.0; n], vec![0.0; n], vec![0.0; n]] }
    }

    pub fn from_fn(torus: TorusGrid, nz: usize, f: impl Fn(f64, f64, f64) -> [f64; 3]) -> Self {
        let z = Self::nodes(nz);
        let mut out = Self::zeros(torus, nz);
        let n = torus.len();
        for (k, &zk) in z.iter().enumerate() {
            for p in 0..n {
                let v = f(torus.x(p / torus.ny), torus.y(p % torus.ny), zk);
                for i in 0..3 {
                    out.c[i][k * n + p] = v[i];
                }
            }
        }
        out
    }

    fn level(&self, i: usize, k: usize) -> TorusScalar {
        let n = self.torus.len();
        TorusScalar::from_values(self.torus, self.c[i][k * n..(k + 1) * n].to_vec())
    }

    fn dh(&self, i: usize, axis: usize) -> Vec<f64> {
        (0..self.nz).flat_map(|k| self.level(i, k).deriv(axis).into_values()).collect()
    }

    fn dz(&self, i: usize) -> Vec<f64> {
        let d = lobatto_diff(&Self::nodes(self.nz));
        let n = self.torus.len();
        let mut out = vec![0.0; n * self.nz];
        for a in 0..self.nz {
            for b in 0..self.nz {
                let w = d[a * self.nz + b];
                for p in 0..n {
                    out[a * n + p] += w * self.c[i][b * n + p];
                }
            }
        }
        out
    }

    pub fn curl(&self) -> SlabVector {
        let sub = |a: Vec<f64>, b: Vec<f64>| a.iter().zip(&b).map(|(x, y)| x - y).collect::<Vec<_>>();
        SlabVector {
            torus: self.torus,
            nz: self.nz,
            c: [sub(self.dh(2, 1), self.dz(1)), sub(self.dz(0), self.dh(2, 0)), sub(self.dh(1, 0), self.dh(0, 1))],
        }
    }

    pub fn div(&self) -> Vec<f64> {
        let (a, b, c) = (self.dh(0, 0), self.dh(1, 1), self.dz(2));
        a.iter().zip(&b).zip(&c).map(|((x, y), z)| x + y + z).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sub(&self, o: &SlabVector) -> SlabVector {
        let d = |i: usize| self.c[i].iter().zip(&o.c[i]).map(|(a, b)| a - b).collect();
        SlabVector { torus: self.torus, nz: self.nz, c: [d(0), d(1), d(2)] }
    }
}

fn dense_inverse(m: DMatrix<f64>) -> DMatrix<f64> {
    m.try_inverse().expect("slab collocation matrix is singular")
}

/// Solve `curl v = ω̄`, `div v = 0`, `v3 = 0` on both lids of the flat slab,
/// mode by mode in `x'`. The horizontal zero mode of `v_h` is fixed by
/// direct integration with zero mean in `z`.
pub fn solve_curl_slab(omega_bar: &SlabVector, tol: f64) -> Result<SlabVector> {
    let (t, nz) = (omega_bar.torus, omega_bar.nz);
    let n = t.len();
    let scale = 1f64.max(omega_bar.max_abs());
    for k in [0, nz - 1] {
        let c2 = omega_bar.level(2, k).mean();
        if c2.abs() > tol * scale {
            return Err(Error::C2 { defect: c2 });
        }
    }
    let c1 = omega_bar.div().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if c1 > tol * scale {
        return Err(Error::C1 { defect: c1 });
    }
    let z = SlabVector::nodes(nz);
    let d = lobatto_diff(&z);
    let nm = t.n_modes();
    let spec = |i: usize| -> Vec<Vec<Complex64>> { (0..nz).map(|k| omega_bar.level(i, k).spectrum().to_vec()).collect() };
    let (w1, w2, w3) = (spec(0), spec(1), spec(2));
    let mut v = [vec![vec![Complex64::new(0.0, 0.0); nm]; nz], vec![vec![Complex64::new(0.0, 0.0); nm]; nz], vec![vec![Complex64::new(0.0, 0.0); nm]; nz]];

    let mut ode_cache: std::collections::HashMap<u64, DMatrix<f64>> = std::collections::HashMap::new();
    let d1 = DMatrix::from_row_slice(nz, nz, &d);
    let d2 = &d1 * &d1;
    let i = Complex64::new(0.0, 1.0);
    for m in 0..nm {
        let (kx, ky) = t.wavenumber(m);
        let k2 = kx * kx + ky * ky;
        if k2 == 0.0 {
            // v1' = ω̂2, v2' = -ω̂1, with v(-1) = 0, then remove the z-mean.
            let mut a = d1.clone();
            for j in 0..nz {
                a[(nz - 1, j)] = if j == nz - 1 { 1.0 } else { 0.0 };
            }
            let inv = dense_inverse(a);
            let w = cheb(nz, Side::Minus).weights.iter().map(|x| 2.0 * x).collect::<Vec<_>>();
            for (comp, src, sgn) in [(0usize, &w2, 1.0), (1usize, &w1, -1.0)] {
                let mut rhs: Vec<Complex64> = (0..nz).map(|k| sgn * src[k][m]).collect();
                rhs[nz - 1] = Complex64::new(0.0, 0.0);
                let sol: Vec<Complex64> = (0..nz).map(|r| (0..nz).map(|c| inv[(r, c)] * rhs[c]).sum()).collect();
                let mean: Complex64 = sol.iter().zip(&w).map(|(s, wk)| s * wk).sum::<Complex64>() / 2.0;
                for k in 0..nz {
                    v[comp][k][m] = sol[k] - mean;
                }
            }
            continue;
        }
        if t.is_nyquist(m) {
            continue;
        }
        let inv = ode_cache.entry(k2.to_bits()).or_insert_with(|| {
            let mut a = &d2 - DMatrix::<f64>::identity(nz, nz) * k2;
            for r in [0, nz - 1] {
                for j in 0..nz {
                    a[(r, j)] = if j == r { 1.0 } else { 0.0 };
                }
            }
            dense_inverse(a)
        });
        let perp = (-ky, kx);
        let mut rhs: Vec<Complex64> = (0..nz).map(|k| -i * (perp.0 * w1[k][m] + perp.1 * w2[k][m])).collect();
        rhs[0] = Complex64::new(0.0, 0.0);
        rhs[nz - 1] = Complex64::new(0.0, 0.0);
        let v3: Vec<Complex64> = (0..nz).map(|r| (0..nz).map(|c| inv[(r, c)] * rhs[c]).sum()).collect();
        let dv3: Vec<Complex64> = (0..nz).map(|r| (0..nz).map(|c| d1[(r, c)] * v3[c]).sum()).collect();
        for k in 0..nz {
            let a = dv3[k] / k2;
            let b = -w3[k][m] / k2;
            v[0][k][m] = i * kx * a + i * perp.0 * b;
            v[1][k][m] = i * ky * a + i * perp.1 * b;
            v[2][k][m] = v3[k];
        }
    }
    let back = |c: &Vec<Vec<Complex64>>| -> Vec<f64> { c.iter().flat_map(|lv| TorusScalar::from_spectrum(t, lv.clone()).into_values()).collect() };
    let out = SlabVector { torus: t, nz, c: [back(&v[0]), back(&v[1]), back(&v[2])] };
    debug_assert_eq!(out.c[0].len(), n * nz);
    Ok(out)
}

#[cfg(test)]
mod tests;
