//! Variable-coefficient Laplace problems on flattened strips.
//!
//! The physical Poisson problem `Δφ = r` in the fluid region becomes
//! `LΨ = α r` for `Ψ = φ∘ρ`, with
//! `L = ∂z² + αΔ + β·∇∂z − γ∂z`. Interface rows hold either Dirichlet data
//! or the conormal derivative `N·∇φ`, lid rows Dirichlet data or `∂3φ`.
//!
//! Solves use right-preconditioned GMRES; the preconditioner is the
//! constant-coefficient problem solved mode by mode with dense collocation
//! inverses. For `f = 0` it is exact and GMRES stops after one step.

mod gmres;
mod precond;

use crate::fields::{StripScalar, StripVector, TorusScalar};
use crate::geometry::{EllipticCoefficients, Surface};
use crate::{Error, Result, Side};

pub(crate) use precond::PrecondCache;

/// Boundary data on one end of a strip.
#[derive(Debug, Clone)]
pub enum Bc {
    Dirichlet(TorusScalar),
    /// Interface: `N·∇φ` with `N = (-∇f, 1)`. Lid: `∂3 φ`.
    Neumann(TorusScalar),
}

impl Bc {
    pub fn kind(&self) -> BcKind {
        match self {
            Bc::Dirichlet(_) => BcKind::Dirichlet,
            Bc::Neumann(_) => BcKind::Neumann,
        }
    }

    pub fn data(&self) -> &TorusScalar {
        match self {
            Bc::Dirichlet(d) | Bc::Neumann(d) => d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BcKind {
    Dirichlet,
    Neumann,
}

/// Conditions on the interface (`z = 0`) and on the rigid lid.
#[derive(Debug, Clone)]
pub struct BoundaryCondition {
    pub interface: Bc,
    pub lid: Bc,
}

impl BoundaryCondition {
    pub fn pure_neumann(&self) -> bool {
        self.interface.kind() == BcKind::Neumann && self.lid.kind() == BcKind::Neumann
    }

    pub fn kinds(&self) -> (BcKind, BcKind) {
        (self.interface.kind(), self.lid.kind())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub restart: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 500, restart: 60 }
    }
}

#[derive(Debug, Clone)]
pub struct EllipticSolution {
    pub psi: StripScalar,
    pub residual_norm: f64,
    pub iterations: usize,
    /// Pure-Neumann problems: the constant `c` with `Δφ = r − c`
    /// needed to make the data compatible. Zero otherwise.
    pub compat_constant: f64,
}

/// Flattened operator and boundary rows applied to `Ψ` (plus the mean-pinning
/// row and the compatibility constant when `bordered`).
pub(crate) fn apply_operator(c: &EllipticCoefficients, kinds: (BcKind, BcKind), x: &[f64], bordered: bool) -> Vec<f64> {
    let grid = c.grid();
    let (n, nz) = (grid.nxy(), grid.nz);
    let psi = StripScalar::from_values(grid, x[..grid.len()].to_vec());
    let spec = psi.spectrum();
    let d1 = spec.deriv(0);
    let d2 = spec.deriv(1);
    let lap = spec.multiplier(|kx, ky, _| -(kx * kx + ky * ky)).to_physical();
    let cg = grid.cheb();
    let dz_spec = spec.apply_z(&cg.d1);
    let psi_z = dz_spec.to_physical();
    let psi_zz = psi.deriv_zz();
    let d1z = dz_spec.deriv(0).to_physical();
    let d2z = dz_spec.deriv(1).to_physical();
    let d1 = d1.to_physical();
    let d2 = d2.to_physical();
    let cst = if bordered { x[grid.len()] } else { 0.0 };

    let mut out = vec![0.0; x.len()];
    let al = c.alpha.values();
    let (b1, b2) = (c.beta[0].values(), c.beta[1].values());
    let ga = c.gamma.values();
    let (pz, pzz) = (psi_z.values(), psi_zz.values());
    let (lv, q1, q2) = (lap.values(), d1z.values(), d2z.values());
    for k in 1..nz - 1 {
        for p in 0..n {
            let i = k * n + p;
            out[i] = pzz[i] + al[i] * lv[i] + b1[i] * q1[i] + b2[i] * q2[i] - ga[i] * pz[i] + cst * al[i];
        }
    }
    let (r1, r2) = (c.ratio[0].values(), c.ratio[1].values());
    let inv = c.inv_rho_z.values();
    match kinds.0 {
        BcKind::Dirichlet => out[..n].copy_from_slice(&x[..n]),
        BcKind::Neumann => {
            let [f1, f2] = &c.slope;
            let (f1, f2) = (f1.values(), f2.values());
            let (g1, g2) = (d1.values(), d2.values());
            for p in 0..n {
                let p1 = g1[p] - r1[p] * pz[p];
                let p2 = g2[p] - r2[p] * pz[p];
                out[p] = pz[p] * inv[p] - f1[p] * p1 - f2[p] * p2;
            }
        }
    }
    let lid = (nz - 1) * n;
    match kinds.1 {
        BcKind::Dirichlet => out[lid..lid + n].copy_from_slice(&x[lid..lid + n]),
        BcKind::Neumann => {
            for p in 0..n {
                out[lid + p] = pz[lid + p] * inv[lid + p];
            }
        }
    }
    if bordered {
        out[grid.len()] = mean_row(&psi);
    }
    out
}

/// Weighted strip mean used to pin pure-Neumann solutions.
fn mean_row(psi: &StripScalar) -> f64 {
    let grid = psi.grid();
    let cg = grid.cheb();
    let wsum: f64 = cg.weights.iter().sum();
    (0..grid.nz)
        .map(|k| cg.weights[k] * psi.level_slice(k).iter().sum::<f64>())
        .sum::<f64>()
        / (wsum * grid.nxy() as f64)
}

/// Solve `LΨ = rhs` (interior rows) with boundary rows from `bc`.
pub fn solve_flattened_laplace(
    coeffs: &EllipticCoefficients,
    rhs: &StripScalar,
    bc: &BoundaryCondition,
    opts: &SolverOptions,
) -> Result<EllipticSolution> {
    solve_with_guess(coeffs, rhs, bc, opts, None)
}

pub(crate) fn solve_with_guess(
    coeffs: &EllipticCoefficients,
    rhs: &StripScalar,
    bc: &BoundaryCondition,
    opts: &SolverOptions,
    guess: Option<&StripScalar>,
) -> Result<EllipticSolution> {
    let grid = coeffs.grid();
    assert_eq!(rhs.grid(), grid, "rhs grid does not match coefficients");
    let (n, nz) = (grid.nxy(), grid.nz);
    let bordered = bc.pure_neumann();
    let kinds = bc.kinds();
    let mut b = rhs.values().to_vec();
    b[..n].copy_from_slice(bc.interface.data().values());
    b[(nz - 1) * n..].copy_from_slice(bc.lid.data().values());
    if bordered {
        b.push(0.0);
    }
    let pc = coeffs.precond.get(coeffs, kinds);
    let x0 = guess.map(|g| {
        let mut v = g.values().to_vec();
        if bordered {
            v.push(0.0);
        }
        v
    });
    let out = gmres::gmres(
        |x| apply_operator(coeffs, kinds, x, bordered),
        |r| pc.apply(r, bordered),
        &b,
        x0,
        opts.tol,
        opts.max_iter,
        opts.restart,
    )?;
    let compat_constant = if bordered { out.x[grid.len()] } else { 0.0 };
    let mut x = out.x;
    x.truncate(grid.len());
    log::trace!("elliptic solve: {} iterations, residual {:.2e}", out.iterations, out.residual);
    Ok(EllipticSolution { psi: StripScalar::from_values(grid, x), residual_norm: out.residual, iterations: out.iterations, compat_constant })
}

/// Physical Poisson problem `Δφ = r` with the given boundary data.
pub fn solve_poisson(
    coeffs: &EllipticCoefficients,
    r: &StripScalar,
    bc: &BoundaryCondition,
    opts: &SolverOptions,
) -> Result<EllipticSolution> {
    solve_flattened_laplace(coeffs, &coeffs.alpha.mul(r), bc, opts)
}

/// Pure-Neumann Poisson problem; data must balance
/// `∫ r dx = ∓∫ θ dx'` (plus/minus) up to `compat_tol`.
pub fn solve_neumann(
    coeffs: &EllipticCoefficients,
    r: &StripScalar,
    interface_flux: &TorusScalar,
    lid_flux: &TorusScalar,
    opts: &SolverOptions,
    compat_tol: f64,
) -> Result<EllipticSolution> {
    let side = coeffs.side();
    // Outward normal at the interface is -N on the plus side, +N on the minus side.
    let boundary = -side.sign() * interface_flux.integral() + side.sign() * lid_flux.integral();
    let defect = coeffs.volume_integral(r) - boundary;
    let scale = 1.0 + coeffs.volume_integral(&r.map(f64::abs)) + interface_flux.map(f64::abs).integral();
    if defect.abs() > compat_tol * scale {
        return Err(Error::Incompatible { defect });
    }
    let bc = BoundaryCondition { interface: Bc::Neumann(interface_flux.clone()), lid: Bc::Neumann(lid_flux.clone()) };
    solve_poisson(coeffs, r, &bc, opts)
}

/// Harmonic extension of interface data with `∂3 = 0` on the lid.
pub fn extend(coeffs: &EllipticCoefficients, psi: &TorusScalar, opts: &SolverOptions) -> Result<StripScalar> {
    let grid = coeffs.grid();
    let bc = BoundaryCondition { interface: Bc::Dirichlet(psi.clone()), lid: Bc::Neumann(TorusScalar::zeros(grid.torus)) };
    Ok(solve_flattened_laplace(coeffs, &StripScalar::zeros(grid), &bc, opts)?.psi)
}

/// Harmonic extension of `psi` from the interface into the `side` region.
pub fn harmonic_extension(surface: &Surface, psi: &TorusScalar, side: Side, nz: usize) -> Result<StripScalar> {
    let coeffs = EllipticCoefficients::build(surface, side, nz)?;
    extend(&coeffs, psi, &SolverOptions::default())
}

/// Physical `tr(∇a ∇b) = Σ ∂_j a_i ∂_i b_j`.
pub fn trace_product(coeffs: &EllipticCoefficients, a: &StripVector, b: &StripVector) -> StripScalar {
    let ja = coeffs.jacobian(a);
    let jb = if std::ptr::eq(a, b) { ja.clone() } else { coeffs.jacobian(b) };
    let mut acc = StripScalar::zeros(coeffs.grid());
    for i in 0..3 {
        for j in 0..3 {
            acc.add_assign_scaled(1.0, &ja[i][j].mul(&jb[j][i]));
        }
    }
    acc
}

/// `Δp = −tr(∇u1 ∇u2)`, `p = 0` on the interface, `∂3 p = 0` on the lid.
pub fn quadratic_pressure(
    coeffs: &EllipticCoefficients,
    u1: &StripVector,
    u2: &StripVector,
    opts: &SolverOptions,
) -> Result<StripScalar> {
    let r = trace_product(coeffs, u1, u2).scale(-1.0).dealias();
    dirichlet_zero_poisson(coeffs, &r, opts)
}

pub(crate) fn dirichlet_zero_poisson(coeffs: &EllipticCoefficients, r: &StripScalar, opts: &SolverOptions) -> Result<StripScalar> {
    let t = coeffs.grid().torus;
    let bc = BoundaryCondition { interface: Bc::Dirichlet(TorusScalar::zeros(t)), lid: Bc::Neumann(TorusScalar::zeros(t)) };
    Ok(solve_poisson(coeffs, r, &bc, opts)?.psi)
}

/// `w − ∇φ` with `Δφ = div w`, `φ = 0` on the interface, `∂3φ = 0` on the lid.
pub fn div_free_projection(coeffs: &EllipticCoefficients, w: &StripVector, opts: &SolverOptions) -> Result<StripVector> {
    let d = coeffs.div(w);
    let phi = dirichlet_zero_poisson(coeffs, &d, opts)?;
    let g = coeffs.grad(&phi);
    Ok(StripVector::new([w.c[0].sub(&g[0]), w.c[1].sub(&g[1]), w.c[2].sub(&g[2])]))
}

#[cfg(test)]
mod tests;
