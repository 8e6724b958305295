//! Physical derivatives of strip fields, by the chain rule through `ρ`:
//! `∂_i = ∂_i − (∂_iρ/∂_zρ)∂_z` for `i = 1, 2` and `∂_3 = ∂_z/∂_zρ`.

use super::EllipticCoefficients;
use crate::fields::{StripScalar, StripVector, TorusScalar};

/// Flattened derivatives `(∂_1Ψ, ∂_2Ψ, ∂_zΨ)` at fixed `z`.
pub(crate) fn flat_grad(s: &StripScalar) -> [StripScalar; 3] {
    let spec = s.spectrum();
    [spec.deriv(0).to_physical(), spec.deriv(1).to_physical(), s.deriv_z()]
}

impl EllipticCoefficients {
    /// Physical gradient of a strip scalar.
    pub fn grad(&self, s: &StripScalar) -> [StripScalar; 3] {
        let [d1, d2, dz] = flat_grad(s);
        self.grad_from_flat(&d1, &d2, &dz)
    }

    pub(crate) fn grad_from_flat(&self, d1: &StripScalar, d2: &StripScalar, dz: &StripScalar) -> [StripScalar; 3] {
        let g1 = d1.sub(&self.ratio[0].mul(dz));
        let g2 = d2.sub(&self.ratio[1].mul(dz));
        let g3 = dz.mul(&self.inv_rho_z);
        [g1, g2, g3]
    }

    /// Full physical Jacobian: `out[i][j] = ∂_j v_i`.
    pub fn jacobian(&self, v: &StripVector) -> [[StripScalar; 3]; 3] {
        [self.grad(&v.c[0]), self.grad(&v.c[1]), self.grad(&v.c[2])]
    }

    pub fn div(&self, v: &StripVector) -> StripScalar {
        let a = self.grad(&v.c[0]);
        let b = self.grad(&v.c[1]);
        let c = self.grad(&v.c[2]);
        a[0].add(&b[1]).add(&c[2])
    }

    pub fn curl(&self, v: &StripVector) -> StripVector {
        let [_, a2, a3] = self.grad(&v.c[0]);
        let [b1, _, b3] = self.grad(&v.c[1]);
        let [c1, c2, _] = self.grad(&v.c[2]);
        StripVector::new([c2.sub(&b3), a3.sub(&c1), b1.sub(&a2)])
    }

    /// `N·∇φ` on the interface, `N = (-∇f, 1)`.
    pub fn conormal(&self, s: &StripScalar) -> TorusScalar {
        let [g1, g2, g3] = self.grad(s);
        self.normal_component_at_interface(&[g1, g2, g3])
    }

    /// `N·w` on the interface for a physical vector field `w`.
    pub fn normal_component_at_interface(&self, w: &[StripScalar; 3]) -> TorusScalar {
        let [f1, f2] = &self.slope;
        let w1 = w[0].interface_trace();
        let w2 = w[1].interface_trace();
        let w3 = w[2].interface_trace();
        w3.sub(&f1.mul(&w1)).sub(&f2.mul(&w2))
    }

    /// Physical volume integral `∫ g dx` over the fluid region.
    pub fn volume_integral(&self, g: &StripScalar) -> f64 {
        g.mul(&self.map.rho_z).integral()
    }

    /// Volume of the fluid region.
    pub fn volume(&self) -> f64 {
        self.map.rho_z.integral()
    }
}
