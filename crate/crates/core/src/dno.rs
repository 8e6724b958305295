//! Dirichlet–Neumann operators of the two fluid regions.
//!
//! `N⁺ψ = −N·∇H⁺ψ` and `N⁻ψ = N·∇H⁻ψ` on the interface, where `H±` is the
//! harmonic extension with `∂3 = 0` on the lid and `N = (−∇f, 1)`. Both are
//! nonnegative and self-adjoint; for `f = 0` each acts on `e^{iξ·x}` as
//! `|ξ| tanh|ξ|`. The sum `Ñ = N⁺ + N⁻` is inverted on zero-mean data.

use std::sync::Arc;

use crate::elliptic::{extend, SolverOptions};
use crate::fields::{StripScalar, TorusScalar};
use crate::geometry::{EllipticCoefficients, Surface};
use crate::{Error, Result, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DnoSide {
    Plus,
    Minus,
    Sum,
}

/// DN operator bound to a surface, with the flattenings it needs cached.
#[derive(Debug, Clone)]
pub struct DnoOperator {
    pub surface: Surface,
    pub side: DnoSide,
    plus: Option<Arc<EllipticCoefficients>>,
    minus: Option<Arc<EllipticCoefficients>>,
    pub opts: SolverOptions,
}

#[derive(Debug, Clone, Copy)]
pub struct CgOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 200 }
    }
}

impl DnoOperator {
    pub fn new(surface: &Surface, side: DnoSide, nz: usize) -> Result<Self> {
        let build = |s: Side| EllipticCoefficients::build(surface, s, nz).map(Arc::new);
        let plus = matches!(side, DnoSide::Plus | DnoSide::Sum).then(|| build(Side::Plus)).transpose()?;
        let minus = matches!(side, DnoSide::Minus | DnoSide::Sum).then(|| build(Side::Minus)).transpose()?;
        Ok(Self { surface: surface.clone(), side, plus, minus, opts: SolverOptions::default() })
    }

    /// Operator on prebuilt flattenings (both must share the surface).
    pub fn from_coefficients(
        surface: &Surface,
        side: DnoSide,
        plus: Option<Arc<EllipticCoefficients>>,
        minus: Option<Arc<EllipticCoefficients>>,
        opts: SolverOptions,
    ) -> Self {
        Self { surface: surface.clone(), side, plus, minus, opts }
    }

    pub fn with_options(mut self, opts: SolverOptions) -> Self {
        self.opts = opts;
        self
    }

    pub fn coefficients(&self, side: Side) -> Option<&Arc<EllipticCoefficients>> {
        match side {
            Side::Plus => self.plus.as_ref(),
            Side::Minus => self.minus.as_ref(),
        }
    }

    /// The same operator restricted to one region.
    pub fn one_side(&self, side: Side) -> Result<Self> {
        let c = self.coefficients(side).ok_or_else(|| Error::Domain(format!("operator has no {} side", side.name())))?;
        let (plus, minus, s) = match side {
            Side::Plus => (Some(c.clone()), None, DnoSide::Plus),
            Side::Minus => (None, Some(c.clone()), DnoSide::Minus),
        };
        Ok(Self { surface: self.surface.clone(), side: s, plus, minus, opts: self.opts })
    }
}

/// `N·∇φ` on the interface from a flattened field whose trace is `psi`.
pub(crate) fn interface_flux(c: &EllipticCoefficients, ext: &StripScalar, psi: &TorusScalar) -> TorusScalar {
    let grid = c.grid();
    let (n, nz) = (grid.nxy(), grid.nz);
    let cg = grid.cheb();
    let mut pz = vec![0.0; n];
    for j in 0..nz {
        let d = cg.d1[j];
        for (o, v) in pz.iter_mut().zip(ext.level_slice(j)) {
            *o += d * v;
        }
    }
    let [f1, f2] = &c.slope;
    let [p1, p2] = psi.grad();
    let inv = &c.inv_rho_z.values()[..n];
    let out = (0..n)
        .map(|p| {
            let (a, b) = (f1.values()[p], f2.values()[p]);
            (1.0 + a * a + b * b) * inv[p] * pz[p] - a * p1.values()[p] - b * p2.values()[p]
        })
        .collect();
    TorusScalar::from_values(grid.torus, out)
}

fn apply_side(c: &EllipticCoefficients, psi: &TorusScalar, opts: &SolverOptions) -> Result<TorusScalar> {
    let side = c.side();
    let ext = extend(c, psi, opts).map_err(|e| e.sided(side))?;
    Ok(interface_flux(c, &ext, psi).scale(-side.sign()))
}

/// Apply the operator; the output is projected to zero mean (constants are
/// in the kernel and the range is mean-free).
pub fn dn_apply(op: &DnoOperator, psi: &TorusScalar) -> Result<TorusScalar> {
    let out = match op.side {
        DnoSide::Plus => apply_side(op.plus.as_ref().expect("plus flattening"), psi, &op.opts)?,
        DnoSide::Minus => apply_side(op.minus.as_ref().expect("minus flattening"), psi, &op.opts)?,
        DnoSide::Sum => {
            let (a, b) = rayon::join(
                || apply_side(op.plus.as_ref().expect("plus flattening"), psi, &op.opts),
                || apply_side(op.minus.as_ref().expect("minus flattening"), psi, &op.opts),
            );
            a?.add(&b?)
        }
    };
    Ok(out.mean_project())
}

/// Flat symbol of `Ñ`: `2|ξ| tanh|ξ|`.
fn flat_sum_symbol(kx: f64, ky: f64) -> f64 {
    let k = (kx * kx + ky * ky).sqrt();
    2.0 * k * k.tanh()
}

/// Solve `Ñψ = rhs − ⟨rhs⟩` for zero-mean `ψ` by preconditioned conjugate
/// gradients, preconditioned with the flat inverse `(2|ξ| tanh|ξ|)^{-1}`.
pub fn dn_inverse(op: &DnoOperator, rhs: &TorusScalar, cg: &CgOptions) -> Result<TorusScalar> {
    if op.side != DnoSide::Sum {
        return Err(Error::Domain("dn_inverse needs the summed operator".into()));
    }
    let b = rhs.mean_project();
    let bnorm = b.l2();
    let grid = rhs.grid();
    if bnorm == 0.0 {
        return Ok(TorusScalar::zeros(grid));
    }
    let precond = |r: &TorusScalar| r.real_multiplier(|kx, ky| if kx == 0.0 && ky == 0.0 { 0.0 } else { 1.0 / flat_sum_symbol(kx, ky) });
    let mut x = TorusScalar::zeros(grid);
    let mut r = b.clone();
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    let mut history = vec![1.0];
    for it in 0..cg.max_iter {
        let ap = dn_apply(op, &p)?;
        let pap = p.dot(&ap);
        if pap <= 0.0 {
            return Err(Error::Domain(format!("summed DN operator not positive at iteration {it}: {pap:e}")));
        }
        let a = rz / pap;
        x = x.axpy(a, &p);
        r = r.axpy(-a, &ap);
        let rel = r.l2() / bnorm;
        history.push(rel);
        if rel <= cg.tol {
            log::trace!("dn_inverse: {} iterations", it + 1);
            return Ok(x.mean_project());
        }
        z = precond(&r);
        let rz_new = r.dot(&z);
        p = z.axpy(rz_new / rz, &p);
        rz = rz_new;
    }
    Err(Error::NonConvergence { solver: "dn_inverse", iterations: cg.max_iter, history })
}

/// `λ(x, ξ) = √((1+|∇f|²)|ξ|² − (∇f·ξ)²)` for a given surface slope.
pub fn symbol_from_slope(grad_f: [f64; 2], xi: [f64; 2]) -> Result<f64> {
    let k2 = xi[0] * xi[0] + xi[1] * xi[1];
    if k2 == 0.0 {
        return Err(Error::Domain("principal symbol undefined at ξ = 0".into()));
    }
    let g2 = grad_f[0] * grad_f[0] + grad_f[1] * grad_f[1];
    let gx = grad_f[0] * xi[0] + grad_f[1] * xi[1];
    Ok(((1.0 + g2) * k2 - gx * gx).max(0.0).sqrt())
}

/// Principal symbol at grid point `(ix, iy)` of the surface.
pub fn principal_symbol(surface: &Surface, ix: usize, iy: usize, xi: [f64; 2]) -> Result<f64> {
    let [f1, f2] = surface.f.grad();
    symbol_from_slope([f1.at(ix, iy), f2.at(ix, iy)], xi)
}

/// `(N⁺ − N⁻)ψ`; both operators must be built on the same surface.
pub fn dn_difference(plus: &DnoOperator, minus: &DnoOperator, psi: &TorusScalar) -> Result<TorusScalar> {
    let same = plus.surface.grid() == minus.surface.grid() && plus.surface.f.values() == minus.surface.f.values();
    if !same {
        return Err(Error::Domain("dn_difference: operators are built on different surfaces".into()));
    }
    let a = dn_apply(&plus.one_side(Side::Plus)?, psi)?;
    let b = dn_apply(&minus.one_side(Side::Minus)?, psi)?;
    Ok(a.sub(&b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{SobolevIndex, TorusGrid};

    fn torus(n: usize) -> TorusGrid {
        TorusGrid::new(n, n).unwrap()
    }

    fn surface(n: usize, f: impl Fn(f64, f64) -> f64) -> Surface {
        Surface::new(TorusScalar::from_fn(torus(n), f), 0.2).unwrap()
    }

    #[test]
    fn flat_examples() {
        let s = Surface::flat(torus(16), 0.2);
        for side in [DnoSide::Plus, DnoSide::Minus] {
            let op = DnoOperator::new(&s, side, 17).unwrap();
            let c = TorusScalar::from_fn(s.grid(), |x, _| x.cos());
            let out = dn_apply(&op, &c).unwrap();
            assert!(out.sub(&c.scale(1f64.tanh())).max_abs() < 1e-12);
            let k = TorusScalar::from_fn(s.grid(), |x, y| (3.0 * x + 4.0 * y).cos());
            let out = dn_apply(&op, &k).unwrap();
            assert!(out.sub(&k.scale(5.0 * 5f64.tanh())).max_abs() < 1e-10);
            assert!(dn_apply(&op, &TorusScalar::constant(s.grid(), 2.0)).unwrap().max_abs() < 1e-14);
        }
    }

    #[test]
    fn flat_inverse() {
        let s = Surface::flat(torus(16), 0.2);
        let op = DnoOperator::new(&s, DnoSide::Sum, 17).unwrap();
        let zero = dn_inverse(&op, &TorusScalar::zeros(s.grid()), &CgOptions::default()).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
        let c = TorusScalar::from_fn(s.grid(), |x, _| x.cos());
        let inv = dn_inverse(&op, &c, &CgOptions::default()).unwrap();
        assert!(inv.sub(&c.scale(0.5 / 1f64.tanh())).max_abs() < 1e-10);
    }

    #[test]
    fn wavy_inverse_round_trip() {
        let s = surface(16, |x, y| 0.15 * (x + 2.0 * y).cos());
        let op = DnoOperator::new(&s, DnoSide::Sum, 17).unwrap();
        let rhs = TorusScalar::from_fn(s.grid(), |x, y| 1.0 + (x - y).sin() + 0.4 * (2.0 * x).cos());
        let psi = dn_inverse(&op, &rhs, &CgOptions::default()).unwrap();
        assert!(psi.mean().abs() < 1e-12);
        let back = dn_apply(&op, &psi).unwrap();
        let err = back.sub(&rhs.mean_project()).l2() / rhs.mean_project().l2();
        assert!(err < 1e-7, "{err}");
    }

    #[test]
    fn symbol_examples() {
        assert_eq!(symbol_from_slope([0.0, 0.0], [3.0, 4.0]).unwrap(), 5.0);
        assert!((symbol_from_slope([1.0, 0.0], [1.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((symbol_from_slope([1.0, 0.0], [0.0, 1.0]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(symbol_from_slope([0.3, 0.1], [0.0, 0.0]).is_err());
        let s = Surface::flat(torus(8), 0.2);
        assert_eq!(principal_symbol(&s, 1, 2, [3.0, 4.0]).unwrap(), 5.0);
    }

    #[test]
    fn difference_vanishes_when_flat_and_is_zeroth_order_when_wavy() {
        let flat = Surface::flat(torus(16), 0.2);
        let op = DnoOperator::new(&flat, DnoSide::Sum, 17).unwrap();
        let psi = TorusScalar::from_fn(flat.grid(), |x, y| (x + y).sin() + (3.0 * y).cos());
        assert!(dn_difference(&op, &op, &psi).unwrap().max_abs() < 1e-10);
        let wavy = surface(16, |x, _| 0.2 * x.cos());
        let w = DnoOperator::new(&wavy, DnoSide::Sum, 17).unwrap();
        assert!(dn_difference(&w, &w, &TorusScalar::constant(wavy.grid(), 1.0)).unwrap().max_abs() < 1e-10);
        assert!(dn_difference(&op, &w, &psi).is_err());

        // Order probe: ‖(N⁺−N⁻)ψ_k‖/‖ψ_k‖ stays bounded as k doubles,
        // while ‖N⁺ψ_k‖/‖ψ_k‖ roughly doubles.
        let s = surface(64, |x, _| 0.2 * x.cos());
        let op = DnoOperator::new(&s, DnoSide::Sum, 33).unwrap();
        let plus = op.one_side(Side::Plus).unwrap();
        let sigma = SobolevIndex::new(0.0).unwrap();
        let mut diff = vec![];
        let mut full = vec![];
        for k in [3.0, 6.0, 12.0] {
            let psi = TorusScalar::from_fn(s.grid(), |_, y| (k * y).cos());
            let n = psi.sobolev_norm(sigma);
            diff.push(dn_difference(&op, &op, &psi).unwrap().sobolev_norm(sigma) / n);
            full.push(dn_apply(&plus, &psi).unwrap().sobolev_norm(sigma) / n);
        }
        assert!(diff[2] / diff[1] < 1.5 && diff[1] / diff[0] < 1.5, "{diff:?}");
        assert!(full[2] / full[1] > 1.8, "{full:?}");
    }

    #[test]
    fn symbol_matches_high_mode_action_on_gentle_surface() {
        let s = surface(64, |x, _| 0.1 * x.cos());
        let op = DnoOperator::new(&s, DnoSide::Minus, 33).unwrap();
        let xi = [0.0, 12.0];
        let psi = TorusScalar::from_fn(s.grid(), |_, y| (12.0 * y).cos());
        let out = dn_apply(&op, &psi).unwrap();
        let [f1, f2] = s.f.grad();
        let want = TorusScalar::from_values(
            s.grid(),
            (0..s.grid().len())
                .map(|p| symbol_from_slope([f1.values()[p], f2.values()[p]], xi).unwrap() * psi.values()[p])
                .collect(),
        );
        let rel = out.sub(&want).l2() / want.l2();
        assert!(rel < 0.1, "{rel}");
    }
}
