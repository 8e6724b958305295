//! How well an evolved state satisfies the original momentum and induction
//! equations: `w = ∂t u + u·∇u − h·∇h + ∇p` and `H = ∂t h − h·∇u + u·∇h`.

use super::{FluidSnapshot, Model, State, ThetaRhs};
use crate::fields::{StripScalar, StripVector};
use crate::{Result, Side};

/// Three consecutive states `t − dt`, `t`, `t + dt` with their fields.
pub struct TimeWindow<'a> {
    pub dt: f64,
    pub prev: &'a FluidSnapshot,
    pub cur: (&'a State, &'a FluidSnapshot, &'a ThetaRhs),
    pub next: &'a FluidSnapshot,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ResidualReport {
    /// `‖w±‖_{L²}`.
    pub momentum: [f64; 2],
    /// `‖H±‖_{L²}`.
    pub induction: [f64; 2],
    /// `‖div ω±‖_{L²}`.
    pub div_omega: [f64; 2],
    pub div_j: [f64; 2],
}

fn l2(c: &crate::geometry::EllipticCoefficients, v: &StripVector) -> f64 {
    c.volume_integral(&v.dot(v)).sqrt()
}

fn scalar_l2(c: &crate::geometry::EllipticCoefficients, v: &StripScalar) -> f64 {
    c.volume_integral(&v.mul(v)).sqrt()
}

/// Residual norms at the middle of the window. With `ablate_quadratic`
/// the quadratic pressure is left out of `p` (a negative control).
pub fn residual_momentum(model: &Model, win: &TimeWindow, ablate_quadratic: bool) -> Result<ResidualReport> {
    let (state, snap, th) = win.cur;
    let mut th = th.clone();
    if ablate_quadratic {
        th.p_quadratic = th.p_quadratic.clone().map(|p| p.scale(0.0));
    }
    let p = model.full_pressure(snap, &th)?;
    let mut out = ResidualReport::default();
    for s in Side::BOTH {
        let i = s.index();
        let c = snap.geometry.side(s);
        let f = snap.side(s);
        let rho_t = c.map.rho_t(&state.iface.theta);
        let ju = c.jacobian(&f.u);
        let jh = c.jacobian(&f.h);
        let dt_phys = |a: &StripVector, b: &StripVector, j: &[[StripScalar; 3]; 3]| {
            StripVector::new([0, 1, 2].map(|k| b.c[k].sub(&a.c[k]).scale(0.5 / win.dt).sub(&rho_t.mul(&j[k][2]))))
        };
        let du = dt_phys(&win.prev.side(s).u, &win.next.side(s).u, &ju);
        let dh = dt_phys(&win.prev.side(s).h, &win.next.side(s).h, &jh);
        let gp = c.grad(&p[i]);
        let w = du
            .add(&super::advect(&f.u, &ju))
            .sub(&super::advect(&f.h, &jh))
            .add(&StripVector::new(gp));
        let hh = dh.sub(&super::advect(&f.h, &ju)).add(&super::advect(&f.u, &jh));
        out.momentum[i] = l2(c, &w);
        out.induction[i] = l2(c, &hh);
        let b = state.bulk.side(s);
        out.div_omega[i] = scalar_l2(c, &c.div(&b.omega));
        out.div_j[i] = scalar_l2(c, &c.div(&b.j));
    }
    Ok(out)
}
