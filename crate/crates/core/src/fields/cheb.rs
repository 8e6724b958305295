//! Chebyshev–Gauss–Lobatto collocation on the flattened depth interval.
//!
//! Node 0 always sits on the interface (`z = 0`) and node `n-1` on the lid
//! (`z = -1` for the minus strip, `z = +1` for the plus strip).

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::Side;

#[derive(Debug)]
pub struct ChebGrid {
    pub n: usize,
    pub side: Side,
    /// Flattened depth coordinate of each node.
    pub z: Vec<f64>,
    /// First derivative in `z`, row-major `n x n`.
    pub d1: Vec<f64>,
    /// Second derivative in `z`.
    pub d2: Vec<f64>,
    /// Clenshaw–Curtis weights for integrals over the unit-length interval.
    pub weights: Vec<f64>,
    /// `integ[i*n + j]`: integral of the j-th cardinal function from the lid to node i.
    pub integ: Vec<f64>,
    zeta: Vec<f64>,
    bary: Vec<f64>,
}

impl ChebGrid {
    fn new(n: usize, side: Side) -> Self {
        assert!(n >= 4, "need at least four collocation nodes");
        let big_n = n - 1;
        let zeta = lobatto_nodes(n);
        // z = (zeta - 1)/2 on the minus side, z = (1 - zeta)/2 on the plus side.
        let dz_dzeta = match side {
            Side::Minus => 0.5,
            Side::Plus => -0.5,
        };
        let z: Vec<f64> = zeta
            .iter()
            .map(|&s| match side {
                Side::Minus => 0.5 * (s - 1.0),
                Side::Plus => 0.5 * (1.0 - s),
            })
            .collect();

        let dzeta = lobatto_diff(&zeta);
        let d1: Vec<f64> = dzeta.iter().map(|v| v / dz_dzeta).collect();
        let mut d2 = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += d1[i * n + k] * d1[k * n + j];
                }
                d2[i * n + j] = s;
            }
        }

        // Cardinal functions expanded in Chebyshev polynomials:
        // a_k = (2/N) sum'' f_j T_k(zeta_j), halved at k = 0, N.
        let tk = |k: usize, j: usize| (PI * (k * j) as f64 / big_n as f64).cos();
        let mut coef = vec![0.0; n * n]; // coef[k*n + j]
        for k in 0..n {
            for j in 0..n {
                let mut v = 2.0 / big_n as f64 * tk(k, j);
                if j == 0 || j == big_n {
                    v *= 0.5;
                }
                if k == 0 || k == big_n {
                    v *= 0.5;
                }
                coef[k * n + j] = v;
            }
        }
        let mut weights = vec![0.0; n];
        for j in 0..n {
            let mut s = 0.0;
            for k in (0..n).step_by(2) {
                s += coef[k * n + j] * 2.0 / (1.0 - (k * k) as f64);
            }
            weights[j] = s * dz_dzeta.abs();
        }
        // Antiderivative coefficients C_1..C_{N+1}, evaluated at nodes, minus the lid value.
        let mut integ = vec![0.0; n * n];
        for j in 0..n {
            let a = |k: usize| if k < n { coef[k * n + j] } else { 0.0 };
            let mut big_c = vec![0.0; n + 1];
            big_c[1] = (2.0 * a(0) - a(2)) / 2.0;
            for (k, ck) in big_c.iter_mut().enumerate().skip(2) {
                *ck = (a(k - 1) - a(k + 1)) / (2.0 * k as f64);
            }
            let eval = |s: f64| -> f64 {
                let theta = s.clamp(-1.0, 1.0).acos();
                big_c.iter().enumerate().map(|(k, ck)| ck * (k as f64 * theta).cos()).sum()
            };
            let lid = eval(-1.0);
            for i in 0..n {
                integ[i * n + j] = (eval(zeta[i]) - lid) * dz_dzeta;
            }
        }

        let bary: Vec<f64> = (0..n)
            .map(|j| {
                let d = if j == 0 || j == big_n { 0.5 } else { 1.0 };
                if j % 2 == 0 {
                    d
                } else {
                    -d
                }
            })
            .collect();

        Self { n, side, z, d1, d2, weights, integ, zeta, bary }
    }

    pub fn lid(&self) -> usize {
        self.n - 1
    }

    pub fn zeta_of(&self, z: f64) -> f64 {
        match self.side {
            Side::Minus => 2.0 * z + 1.0,
            Side::Plus => 1.0 - 2.0 * z,
        }
    }

    /// Derivative of a single column.
    pub fn diff(&self, col: &[f64], out: &mut [f64]) {
        matvec(&self.d1, self.n, col, out);
    }

    /// Barycentric interpolation weights for evaluating a column at `z`.
    pub fn interp_weights(&self, z: f64) -> Vec<f64> {
        let s = self.zeta_of(z);
        let mut w = vec![0.0; self.n];
        for (j, &sj) in self.zeta.iter().enumerate() {
            if (s - sj).abs() < 1e-14 {
                w[j] = 1.0;
                return w;
            }
        }
        let mut denom = 0.0;
        for j in 0..self.n {
            let t = self.bary[j] / (s - self.zeta[j]);
            w[j] = t;
            denom += t;
        }
        for v in &mut w {
            *v /= denom;
        }
        w
    }

    /// Evaluate the interpolant of `col` at an arbitrary `z`.
    pub fn eval(&self, col: &[f64], z: f64) -> f64 {
        self.interp_weights(z).iter().zip(col).map(|(w, c)| w * c).sum()
    }
}

/// Chebyshev–Gauss–Lobatto nodes `cos(πj/(n-1))` on `[-1, 1]`, descending.
pub fn lobatto_nodes(n: usize) -> Vec<f64> {
    let big_n = n - 1;
    (0..n).map(|j| (PI * j as f64 / big_n as f64).cos()).collect()
}

/// Differentiation matrix (row-major) on the Lobatto nodes.
pub fn lobatto_diff(zeta: &[f64]) -> Vec<f64> {
    let n = zeta.len();
    let big_n = n - 1;
    let c = |j: usize| {
        let e = if j == 0 || j == big_n { 2.0 } else { 1.0 };
        if j % 2 == 0 {
            e
        } else {
            -e
        }
    };
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            if i != j {
                let v = c(i) / c(j) / (zeta[i] - zeta[j]);
                d[i * n + j] = v;
                row_sum += v;
            }
        }
        d[i * n + i] = -row_sum;
    }
    d
}

pub(crate) fn matvec(m: &[f64], n: usize, x: &[f64], out: &mut [f64]) {
    for i in 0..n {
        let row = &m[i * n..(i + 1) * n];
        out[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
    }
}

/// Shared collocation data for `n` nodes on the given side.
pub fn cheb(n: usize, side: Side) -> Arc<ChebGrid> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, Side), Arc<ChebGrid>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("chebyshev cache poisoned");
    guard.entry((n, side)).or_insert_with(|| Arc::new(ChebGrid::new(n, side))).clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(z: f64) -> f64 {
        3.0 * z.powi(5) - z.powi(3) + 0.5 * z + 2.0
    }
    fn dpoly(z: f64) -> f64 {
        15.0 * z.powi(4) - 3.0 * z.powi(2) + 0.5
    }
    fn ipoly(z: f64) -> f64 {
        0.5 * z.powi(6) - 0.25 * z.powi(4) + 0.25 * z * z + 2.0 * z
    }

    #[test]
    fn derivative_and_integral_exact_on_polynomials() {
        for side in [Side::Minus, Side::Plus] {
            let g = cheb(9, side);
            let col: Vec<f64> = g.z.iter().map(|&z| poly(z)).collect();
            let mut d = vec![0.0; g.n];
            g.diff(&col, &mut d);
            let lid_z = g.z[g.lid()];
            for i in 0..g.n {
                assert!((d[i] - dpoly(g.z[i])).abs() < 1e-11);
                let mut s = 0.0;
                for j in 0..g.n {
                    s += g.integ[i * g.n + j] * col[j];
                }
                assert!((s - (ipoly(g.z[i]) - ipoly(lid_z))).abs() < 1e-12, "{side:?} {i}");
            }
            let total: f64 = g.weights.iter().zip(&col).map(|(w, c)| w * c).sum();
            let exact = (ipoly(0.0) - ipoly(lid_z)).abs();
            assert!((total - exact).abs() < 1e-12);
            assert!((g.eval(&col, 0.5 * lid_z + 0.013) - poly(0.5 * lid_z + 0.013)).abs() < 1e-12);
        }
    }

    #[test]
    fn node_ordering() {
        let m = cheb(5, Side::Minus);
        assert_eq!(m.z[0], 0.0);
        assert!((m.z[4] + 1.0).abs() < 1e-15);
        let p = cheb(5, Side::Plus);
        assert!((p.z[4] - 1.0).abs() < 1e-15);
    }
}
