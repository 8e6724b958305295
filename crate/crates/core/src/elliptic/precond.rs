//! Constant-coefficient preconditioner: per Fourier mode, the collocation
//! problem `Ψ'' − α0|ξ|²Ψ` with the boundary rows reduced to their mean
//! coefficients.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{BcKind, StripScalar};
use crate::fields::{StripGrid, StripSpectrum};
use crate::geometry::EllipticCoefficients;

pub(crate) struct FlatPrecond {
    grid: StripGrid,
    /// Dense inverse for each mode, shared between modes with equal `|ξ|²`.
    per_mode: Vec<Arc<Vec<f64>>>,
    /// Bordered inverse of the zero mode, `(nz+1)²`, for pure-Neumann problems.
    bordered_zero: Option<Vec<f64>>,
}

#[derive(Clone, Default)]
pub(crate) struct PrecondCache(Arc<Mutex<HashMap<(BcKind, BcKind), Arc<FlatPrecond>>>>);

impl std::fmt::Debug for PrecondCache {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("PrecondCache")
    }
}

impl PrecondCache {
    pub(crate) fn get(&self, c: &EllipticCoefficients, kinds: (BcKind, BcKind)) -> Arc<FlatPrecond> {
        let mut g = self.0.lock().expect("preconditioner cache poisoned");
        g.entry(kinds).or_insert_with(|| Arc::new(FlatPrecond::new(c, kinds))).clone()
    }
}

fn invert(m: DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let inv = m.try_inverse().expect("flat collocation operator is singular");
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = inv[(i, j)];
        }
    }
    out
}

impl FlatPrecond {
    fn new(c: &EllipticCoefficients, kinds: (BcKind, BcKind)) -> Self {
        let grid = c.grid();
        let (n, nz) = (grid.nxy(), grid.nz);
        let cg = grid.cheb();
        let interior = &c.alpha.values()[n..(nz - 1) * n];
        let alpha0 = interior.iter().sum::<f64>() / interior.len() as f64;
        let [f1, f2] = &c.slope;
        let inv = c.inv_rho_z.values();
        let a_top = (0..n).map(|p| (1.0 + f1.values()[p].powi(2) + f2.values()[p].powi(2)) * inv[p]).sum::<f64>() / n as f64;
        let a_lid = inv[(nz - 1) * n..].iter().sum::<f64>() / n as f64;

        let build = |k2: f64, border: bool| -> DMatrix<f64> {
            let dim = if border { nz + 1 } else { nz };
            let mut a = DMatrix::<f64>::zeros(dim, dim);
            for i in 1..nz - 1 {
                for j in 0..nz {
                    a[(i, j)] = cg.d2[i * nz + j];
                }
                a[(i, i)] -= alpha0 * k2;
                if border {
                    a[(i, nz)] = alpha0;
                }
            }
            for (row, kind, scale) in [(0, kinds.0, a_top), (nz - 1, kinds.1, a_lid)] {
                match kind {
                    BcKind::Dirichlet => a[(row, row)] = 1.0,
                    BcKind::Neumann => {
                        for j in 0..nz {
                            a[(row, j)] = scale * cg.d1[row * nz + j];
                        }
                    }
                }
            }
            if border {
                let wsum: f64 = cg.weights.iter().sum();
                for j in 0..nz {
                    a[(nz, j)] = cg.weights[j] / wsum;
                }
            }
            a
        };

        let t = grid.torus;
        let mut cache: HashMap<u64, Arc<Vec<f64>>> = HashMap::new();
        let pure_neumann = kinds == (BcKind::Neumann, BcKind::Neumann);
        let per_mode = (0..t.n_modes())
            .map(|m| {
                let (kx, ky) = t.wavenumber(m);
                let k2 = kx * kx + ky * ky;
                if k2 == 0.0 && pure_neumann {
                    // singular without the border; replaced below
                    return Arc::new(Vec::new());
                }
                cache.entry(k2.to_bits()).or_insert_with(|| Arc::new(invert(build(k2, false)))).clone()
            })
            .collect();
        let bordered_zero = pure_neumann.then(|| invert(build(0.0, true)));
        Self { grid, per_mode, bordered_zero }
    }

    pub(crate) fn apply(&self, r: &[f64], bordered: bool) -> Vec<f64> {
        let grid = self.grid;
        let nz = grid.nz;
        let nm = grid.torus.n_modes();
        let spec = StripScalar::from_values(grid, r[..grid.len()].to_vec()).spectrum();
        let mut out = StripSpectrum::zeros(grid);
        let mut col = vec![Complex64::new(0.0, 0.0); nz];
        let mut extra = 0.0;
        for m in 0..nm {
            for (k, c) in col.iter_mut().enumerate() {
                *c = spec.data[k * nm + m];
            }
            if m == 0 && bordered {
                let inv = self.bordered_zero.as_ref().expect("bordered inverse missing");
                let d = nz + 1;
                for i in 0..nz {
                    let mut s = Complex64::new(0.0, 0.0);
                    for j in 0..nz {
                        s += inv[i * d + j] * col[j];
                    }
                    s += inv[i * d + nz] * r[grid.len()];
                    out.data[i * nm] = s;
                }
                let mut s = inv[nz * d + nz] * r[grid.len()];
                for j in 0..nz {
                    s += inv[nz * d + j] * col[j].re;
                }
                extra = s;
                continue;
            }
            let inv = &self.per_mode[m];
            for i in 0..nz {
                let row = &inv[i * nz..(i + 1) * nz];
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..nz {
                    s += row[j] * col[j];
                }
                out.data[i * nm + m] = s;
            }
        }
        let mut v = out.to_physical().into_values();
        if bordered {
            v.push(extra);
        }
        v
    }
}
