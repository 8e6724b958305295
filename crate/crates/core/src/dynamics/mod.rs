//! Evolution of the interface and bulk unknowns.
//!
//! The state is the interface height `f`, the scaled normal velocity `θ`,
//! and per side the vorticity `ω`, current `j` (stored on the flattened
//! strip, so `ω̃(x', z) = ω(x', ρ(x', z))`) and the lid averages `β`, `γ` of
//! the tangential velocity and magnetic field. Velocity and magnetic field
//! are recovered from these by div-curl solves whenever they are needed.

use std::sync::Arc;

use crate::diagnostics::{InterfaceTraces, SideTraces};
use crate::divcurl::{divcurl_solve, DivCurlData, DivCurlOptions, DivCurlResiduals};
use crate::dno::{dn_apply, dn_inverse, CgOptions, DnoOperator, DnoSide};
use crate::elliptic::{dirichlet_zero_poisson, div_free_projection, extend, trace_product, SolverOptions};
use crate::fields::{StripScalar, StripVector, TorusGrid, TorusScalar};
use crate::geometry::{build_flattening, EllipticCoefficients, FlatteningMap, Surface};
use crate::{Error, Result, Side};

pub mod picard;
mod residual;

pub use residual::{residual_momentum, ResidualReport, TimeWindow};

#[derive(Debug, Clone)]
pub struct InterfaceState {
    pub f: TorusScalar,
    pub theta: TorusScalar,
}

#[derive(Debug, Clone)]
pub struct SideBulk {
    pub omega: StripVector,
    pub j: StripVector,
    /// Lid average of `(u1, u2)`.
    pub beta: [f64; 2],
    /// Lid average of `(h1, h2)`.
    pub gamma: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct BulkState {
    /// Indexed by [`Side::index`].
    pub sides: [SideBulk; 2],
}

impl BulkState {
    pub fn side(&self, s: Side) -> &SideBulk {
        &self.sides[s.index()]
    }

    pub fn side_mut(&mut self, s: Side) -> &mut SideBulk {
        &mut self.sides[s.index()]
    }
}

#[derive(Debug, Clone)]
pub struct State {
    pub t: f64,
    pub iface: InterfaceState,
    pub bulk: BulkState,
}

impl State {
    /// `self + a·k`, where `k` holds time derivatives.
    pub fn axpy(&self, a: f64, k: &State) -> State {
        let side = |s: &SideBulk, d: &SideBulk| SideBulk {
            omega: s.omega.axpy(a, &d.omega),
            j: s.j.axpy(a, &d.j),
            beta: [s.beta[0] + a * d.beta[0], s.beta[1] + a * d.beta[1]],
            gamma: [s.gamma[0] + a * d.gamma[0], s.gamma[1] + a * d.gamma[1]],
        };
        State {
            t: self.t + a,
            iface: InterfaceState { f: self.iface.f.axpy(a, &k.iface.f), theta: self.iface.theta.axpy(a, &k.iface.theta) },
            bulk: BulkState { sides: [side(&self.bulk.sides[0], &k.bulk.sides[0]), side(&self.bulk.sides[1], &k.bulk.sides[1])] },
        }
    }

    /// Largest absolute difference over every unknown.
    pub fn distance(&self, o: &State) -> f64 {
        let mut d = self.iface.f.sub(&o.iface.f).max_abs().max(self.iface.theta.sub(&o.iface.theta).max_abs());
        for (a, b) in self.bulk.sides.iter().zip(&o.bulk.sides) {
            d = d.max(a.omega.sub(&b.omega).max_abs()).max(a.j.sub(&b.j).max_abs());
            for i in 0..2 {
                d = d.max((a.beta[i] - b.beta[i]).abs()).max((a.gamma[i] - b.gamma[i]).abs());
            }
        }
        d
    }
}

/// Both flattenings of one interface position.
#[derive(Debug, Clone)]
pub struct Geometry {
    pub surface: Surface,
    /// Indexed by [`Side::index`].
    pub coeffs: [Arc<EllipticCoefficients>; 2],
}

impl Geometry {
    pub fn side(&self, s: Side) -> &Arc<EllipticCoefficients> {
        &self.coeffs[s.index()]
    }

    pub fn dno(&self, side: DnoSide, opts: SolverOptions) -> DnoOperator {
        DnoOperator::from_coefficients(&self.surface, side, Some(self.coeffs[0].clone()), Some(self.coeffs[1].clone()), opts)
    }
}

/// Recovered fields of one side.
#[derive(Debug, Clone)]
pub struct SideFields {
    pub u: StripVector,
    pub h: StripVector,
    pub residuals: [Option<DivCurlResiduals>; 2],
}

/// Velocity and magnetic field recovered from a state, with interface traces.
#[derive(Debug, Clone)]
pub struct FluidSnapshot {
    pub geometry: Arc<Geometry>,
    /// Indexed by [`Side::index`].
    pub sides: [SideFields; 2],
    pub traces: InterfaceTraces,
}

impl FluidSnapshot {
    pub fn side(&self, s: Side) -> &SideFields {
        &self.sides[s.index()]
    }

    /// `Σ± ∫(|u|² + |h|²) dx`.
    pub fn energy(&self) -> f64 {
        Side::BOTH
            .iter()
            .map(|&s| {
                let c = self.geometry.side(s);
                let sf = self.side(s);
                c.volume_integral(&sf.u.dot(&sf.u).add(&sf.h.dot(&sf.h)))
            })
            .sum()
    }

    /// `θ = u⁺·N` on the interface.
    pub fn traces_theta(&self) -> TorusScalar {
        let t = &self.traces;
        t.plus.u[2].sub(&t.slope[0].mul(&t.plus.u[0])).sub(&t.slope[1].mul(&t.plus.u[1]))
    }

    /// `max |h·N|` on the interface over both sides.
    pub fn magnetic_normal_residual(&self) -> f64 {
        Side::BOTH
            .iter()
            .map(|&s| self.geometry.side(s).normal_component_at_interface(&self.side(s).h.c).max_abs())
            .fold(0.0, f64::max)
    }

    /// `max |u⁺·N − u⁻·N|` on the interface.
    pub fn normal_velocity_jump(&self) -> f64 {
        let n = |s: Side| self.geometry.side(s).normal_component_at_interface(&self.side(s).u.c);
        n(Side::Plus).sub(&n(Side::Minus)).max_abs()
    }
}

/// Pieces of the `θ` equation.
#[derive(Debug, Clone)]
pub struct ThetaRhs {
    pub dtheta: TorusScalar,
    /// Interface pressure `p̲ = Ñ⁻¹(g⁺ − g⁻)`.
    pub p_interface: TorusScalar,
    /// `p_{u,u} − p_{h,h}` per side.
    pub p_quadratic: [StripScalar; 2],
}

#[derive(Debug, Clone, Copy)]
pub struct ModelOptions {
    pub solver: SolverOptions,
    pub cg: CgOptions,
    pub cfl_safety: f64,
    /// Measure div-curl residuals on every recovery.
    pub recovery_residuals: bool,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self { solver: SolverOptions::default(), cg: CgOptions::default(), cfl_safety: 0.5, recovery_residuals: false }
    }
}

/// Discretization and solver settings shared by every evaluation of a run.
#[derive(Debug, Clone)]
pub struct Model {
    pub torus: TorusGrid,
    pub nz: usize,
    pub c0: f64,
    /// Flattening smoothing per side, fixed for the run.
    pub delta: [f64; 2],
    pub opts: ModelOptions,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StepReport {
    pub dt: f64,
    /// `∫_lid ω3 dx'` and `∫_lid j3 dx'` per side after the update, before correction.
    pub lid_flux: [[f64; 2]; 2],
    /// Largest `|⟨θ⟩|` over the stages.
    pub theta_mean: f64,
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: State,
    /// Fields recovered from the state at the start of the step.
    pub start: FluidSnapshot,
    pub start_theta: ThetaRhs,
    pub report: StepReport,
}

fn grad_h(s: &TorusScalar) -> [TorusScalar; 2] {
    s.grad()
}

/// `(a·∇)b` with `jb[i][k] = ∂_k b_i`.
fn advect(a: &StripVector, jb: &[[StripScalar; 3]; 3]) -> StripVector {
    StripVector::new([0, 1, 2].map(|i| {
        let mut acc = a.c[0].mul(&jb[i][0]);
        acc.add_assign_scaled(1.0, &a.c[1].mul(&jb[i][1]));
        acc.add_assign_scaled(1.0, &a.c[2].mul(&jb[i][2]));
        acc
    }))
}

fn cross_grads(ja: &[[StripScalar; 3]; 3], jb: &[[StripScalar; 3]; 3]) -> StripVector {
    let grid = ja[0][0].grid();
    let mut out = [StripScalar::zeros(grid), StripScalar::zeros(grid), StripScalar::zeros(grid)];
    for i in 0..3 {
        let (a, b) = (&ja[i], &jb[i]);
        out[0].add_assign_scaled(1.0, &a[1].mul(&b[2]).sub(&a[2].mul(&b[1])));
        out[1].add_assign_scaled(1.0, &a[2].mul(&b[0]).sub(&a[0].mul(&b[2])));
        out[2].add_assign_scaled(1.0, &a[0].mul(&b[1]).sub(&a[1].mul(&b[0])));
    }
    StripVector::new(out)
}

impl Model {
    /// Fix `δ` per side from the initial interface.
    pub fn new(f0: &TorusScalar, c0: f64, nz: usize, opts: ModelOptions) -> Result<Self> {
        let surface = Surface::new(f0.clone(), c0)?;
        let dp = build_flattening(&surface, Side::Plus, nz)?.delta;
        let dm = build_flattening(&surface, Side::Minus, nz)?.delta;
        Ok(Self { torus: f0.grid(), nz, c0, delta: [dp, dm], opts })
    }

    pub fn geometry(&self, f: &TorusScalar) -> Result<Geometry> {
        let surface = Surface::new(f.clone(), self.c0)?;
        let build = |s: Side| -> Result<Arc<EllipticCoefficients>> {
            let map = FlatteningMap::with_delta(&surface, s, self.nz, self.delta[s.index()]).map_err(|e| e.sided(s))?;
            Ok(Arc::new(crate::geometry::flatten_coefficients(Arc::new(map))))
        };
        Ok(Geometry { coeffs: [build(Side::Plus)?, build(Side::Minus)?], surface })
    }

    fn divcurl_options(&self) -> DivCurlOptions {
        DivCurlOptions { solver: self.opts.solver, validate: false, residuals: self.opts.recovery_residuals, ..Default::default() }
    }

    /// Recover `u±`, `h±` from the state by two div-curl solves per side.
    pub fn recover_fields(&self, iface: &InterfaceState, bulk: &BulkState) -> Result<FluidSnapshot> {
        let geometry = Arc::new(self.geometry(&iface.f)?);
        self.recover_with(geometry, iface, bulk)
    }

    pub fn recover_with(&self, geometry: Arc<Geometry>, iface: &InterfaceState, bulk: &BulkState) -> Result<FluidSnapshot> {
        let opts = self.divcurl_options();
        let zero = TorusScalar::zeros(self.torus);
        let mut sides = Vec::with_capacity(2);
        for s in Side::BOTH {
            let c = geometry.side(s);
            let b = bulk.side(s);
            let grid = c.grid();
            let du = DivCurlData { omega: b.omega.clone(), g: StripScalar::zeros(grid), theta_bc: iface.theta.clone(), lid_means: b.beta };
            let dh = DivCurlData { omega: b.j.clone(), g: StripScalar::zeros(grid), theta_bc: zero.clone(), lid_means: b.gamma };
            let u = divcurl_solve(&du, c, &opts)?;
            let h = divcurl_solve(&dh, c, &opts)?;
            sides.push(SideFields { u: u.u, h: h.u, residuals: [u.residuals, h.residuals] });
        }
        let minus = sides.pop().expect("two sides");
        let plus = sides.pop().expect("two sides");
        let tr = |v: &StripVector| v.interface_trace();
        let traces = InterfaceTraces {
            plus: SideTraces { u: tr(&plus.u), h: tr(&plus.h) },
            minus: SideTraces { u: tr(&minus.u), h: tr(&minus.h) },
            slope: geometry.coeffs[0].slope.clone(),
        };
        Ok(FluidSnapshot { geometry, sides: [plus, minus], traces })
    }

    /// `Δp = −tr(∇u∇u) + tr(∇h∇h)`, `p = 0` on the interface, `∂3p = 0` on the lid.
    pub fn quadratic_pressure(&self, snap: &FluidSnapshot, s: Side) -> Result<StripScalar> {
        let c = snap.geometry.side(s);
        let f = snap.side(s);
        let r = trace_product(c, &f.h, &f.h).sub(&trace_product(c, &f.u, &f.u)).dealias();
        dirichlet_zero_poisson(c, &r, &self.opts.solver).map_err(|e| e.sided(s))
    }

    /// Interface forcing of one side:
    /// `g = 2u·∇θ + N·∇(p_{u,u} − p_{h,h}) + Σ(u_iu_j − h_ih_j)∂i∂jf`.
    fn side_forcing(&self, iface: &InterfaceState, snap: &FluidSnapshot, s: Side, pq: &StripScalar) -> TorusScalar {
        let c = snap.geometry.side(s);
        let tr = if s == Side::Plus { &snap.traces.plus } else { &snap.traces.minus };
        let [t1, t2] = grad_h(&iface.theta);
        let transport = tr.u[0].mul(&t1).add(&tr.u[1].mul(&t2)).scale(2.0);
        let mut curv = TorusScalar::zeros(self.torus);
        for i in 0..2 {
            for j in 0..2 {
                let q = tr.u[i].mul(&tr.u[j]).sub(&tr.h[i].mul(&tr.h[j]));
                curv = curv.add(&q.mul(&iface.f.deriv2(i, j)));
            }
        }
        transport.add(&curv).dealias().add(&c.conormal(pq))
    }

    /// `∂tθ = ½(N⁺ − N⁻)p̲ − ½(g⁺ + g⁻)` with `p̲ = Ñ⁻¹(g⁺ − g⁻)`, mean removed.
    pub fn theta_rhs(&self, iface: &InterfaceState, snap: &FluidSnapshot) -> Result<ThetaRhs> {
        let pq = [self.quadratic_pressure(snap, Side::Plus)?, self.quadratic_pressure(snap, Side::Minus)?];
        let gp = self.side_forcing(iface, snap, Side::Plus, &pq[0]);
        let gm = self.side_forcing(iface, snap, Side::Minus, &pq[1]);
        let sum = snap.geometry.dno(DnoSide::Sum, self.opts.solver);
        let p = dn_inverse(&sum, &gp.sub(&gm), &self.opts.cg)?;
        let np = dn_apply(&snap.geometry.dno(DnoSide::Plus, self.opts.solver), &p)?;
        let nm = dn_apply(&snap.geometry.dno(DnoSide::Minus, self.opts.solver), &p)?;
        let dtheta = np.sub(&nm).sub(&gp).sub(&gm).scale(0.5).mean_project();
        Ok(ThetaRhs { dtheta, p_interface: p, p_quadratic: pq })
    }

    /// Time derivatives of `(ω, j)` on each flattened strip.
    pub fn vorticity_rhs(&self, iface: &InterfaceState, bulk: &BulkState, snap: &FluidSnapshot) -> [(StripVector, StripVector); 2] {
        Side::BOTH.map(|s| {
            let c = snap.geometry.side(s);
            let f = snap.side(s);
            let b = bulk.side(s);
            let ju = c.jacobian(&f.u);
            let jh = c.jacobian(&f.h);
            let jw = c.jacobian(&b.omega);
            let jj = c.jacobian(&b.j);
            let rho_t = c.map.rho_t(&iface.theta);
            let moving = |jx: &[[StripScalar; 3]; 3]| StripVector::new([0, 1, 2].map(|i| rho_t.mul(&jx[i][2])));
            let dw = advect(&f.h, &jj)
                .sub(&advect(&f.u, &jw))
                .add(&advect(&b.omega, &ju))
                .sub(&advect(&b.j, &jh))
                .add(&moving(&jw))
                .dealias();
            let dj = advect(&f.h, &jw)
                .sub(&advect(&f.u, &jj))
                .add(&advect(&b.j, &ju))
                .sub(&advect(&b.omega, &jh))
                .axpy(-2.0, &cross_grads(&ju, &jh))
                .add(&moving(&jj))
                .dealias();
            (dw, dj)
        })
    }

    /// `dβ/dt = −⟨u_j∂_ju − h_j∂_jh⟩_lid`, `dγ/dt = −⟨u_j∂_jh − h_j∂_ju⟩_lid`.
    pub fn boundary_average_rhs(snap: &FluidSnapshot) -> [([f64; 2], [f64; 2]); 2] {
        Side::BOTH.map(|s| {
            let f = snap.side(s);
            let u = f.u.lid_trace();
            let h = f.h.lid_trace();
            let conv = |a: &[TorusScalar; 3], b: &TorusScalar| {
                let [d1, d2] = b.grad();
                a[0].mul(&d1).add(&a[1].mul(&d2)).mean()
            };
            let db = [0, 1].map(|i| -(conv(&u, &u[i]) - conv(&h, &h[i])));
            let dg = [0, 1].map(|i| -(conv(&u, &h[i]) - conv(&h, &u[i])));
            (db, dg)
        })
    }

    /// All time derivatives at `state`; also returns the recovered fields.
    pub fn rhs(&self, state: &State) -> Result<(State, FluidSnapshot, ThetaRhs)> {
        let snap = self.recover_fields(&state.iface, &state.bulk)?;
        let th = self.theta_rhs(&state.iface, &snap)?;
        let vort = self.vorticity_rhs(&state.iface, &state.bulk, &snap);
        let avg = Self::boundary_average_rhs(&snap);
        let [(w0, j0), (w1, j1)] = vort;
        let k = State {
            t: 1.0,
            iface: InterfaceState { f: state.iface.theta.clone(), theta: th.dtheta.clone() },
            bulk: BulkState {
                sides: [
                    SideBulk { omega: w0, j: j0, beta: avg[0].0, gamma: avg[0].1 },
                    SideBulk { omega: w1, j: j1, beta: avg[1].0, gamma: avg[1].1 },
                ],
            },
        };
        Ok((k, snap, th))
    }

    /// Largest stable step for the fields in `snap`.
    pub fn max_stable_dt(&self, snap: &FluidSnapshot) -> f64 {
        let t = self.torus;
        let kmax = (0..t.n_modes())
            .filter(|&m| t.keeps(m))
            .map(|m| {
                let (a, b) = t.wavenumber(m);
                (a * a + b * b).sqrt()
            })
            .fold(0.0, f64::max);
        let tr = &snap.traces;
        let mut iface_speed: f64 = 0.0;
        for p in 0..t.len() {
            let g = |s: &TorusScalar| s.values()[p];
            let w = [0.5 * (g(&tr.plus.u[0]) + g(&tr.minus.u[0])), 0.5 * (g(&tr.plus.u[1]) + g(&tr.minus.u[1]))];
            let v = [0.5 * (g(&tr.plus.u[0]) - g(&tr.minus.u[0])), 0.5 * (g(&tr.plus.u[1]) - g(&tr.minus.u[1]))];
            let h2 = 0.5 * (g(&tr.plus.h[0]).powi(2) + g(&tr.plus.h[1]).powi(2) + g(&tr.minus.h[0]).powi(2) + g(&tr.minus.h[1]).powi(2));
            let speed = w[0].hypot(w[1]) + (v[0] * v[0] + v[1] * v[1]).max(h2).sqrt();
            iface_speed = iface_speed.max(speed);
        }
        let mut bulk: f64 = 0.0;
        for s in Side::BOTH {
            let f = snap.side(s);
            let c = snap.geometry.side(s);
            let m = &c.map;
            let z = &c.grid().cheb().z;
            let n = self.torus.len();
            // Local node spacing: vertical speeds vanish at both ends where nodes cluster.
            let dz: Vec<f64> = (0..self.nz)
                .map(|k| {
                    let lo = if k > 0 { (z[k] - z[k - 1]).abs() } else { f64::INFINITY };
                    let hi = if k + 1 < self.nz { (z[k + 1] - z[k]).abs() } else { f64::INFINITY };
                    lo.min(hi)
                })
                .collect();
            let rho_t = m.rho_t(&snap.traces_theta());
            for p in 0..f.u.c[0].values().len() {
                let g = |x: &StripScalar| x.values()[p];
                let uh = g(&f.u.c[0]).hypot(g(&f.u.c[1])) + g(&f.h.c[0]).hypot(g(&f.h.c[1]));
                let w = |v: &StripVector, rt: f64| (g(&v.c[2]) - g(&v.c[0]) * g(&m.grad_rho[0]) - g(&v.c[1]) * g(&m.grad_rho[1]) - rt) / g(&m.rho_z);
                let vert = w(&f.u, g(&rho_t)).abs() + w(&f.h, 0.0).abs();
                bulk = bulk.max(kmax * uh + vert / dz[p / n]);
            }
        }
        let speed = (kmax * iface_speed).max(bulk);
        if speed == 0.0 {
            f64::INFINITY
        } else {
            self.opts.cfl_safety * 2.0 / speed
        }
    }

    /// Classical four-stage step followed by the constraint projections.
    pub fn step_rk4(&self, state: &State, dt: f64) -> Result<StepOutcome> {
        let (k1, start, start_theta) = self.rhs(state)?;
        let limit = self.max_stable_dt(&start);
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::Cfl { dt, suggested: limit });
        }
        let mut theta_mean = k1.iface.theta.mean().abs().max(state.iface.theta.mean().abs());
        let s2 = state.axpy(0.5 * dt, &k1);
        let (k2, _, _) = self.rhs(&s2)?;
        let s3 = state.axpy(0.5 * dt, &k2);
        let (k3, _, _) = self.rhs(&s3)?;
        let s4 = state.axpy(dt, &k3);
        let (k4, _, _) = self.rhs(&s4)?;
        for s in [&s2, &s3, &s4] {
            theta_mean = theta_mean.max(s.iface.theta.mean().abs());
        }
        let next = state
            .axpy(dt / 6.0, &k1)
            .axpy(dt / 3.0, &k2)
            .axpy(dt / 3.0, &k3)
            .axpy(dt / 6.0, &k4);
        let mut next = State { t: state.t + dt, ..next };
        let (state, lid_flux) = self.project(&mut next)?;
        Ok(StepOutcome { state, start, start_theta, report: StepReport { dt, lid_flux, theta_mean } })
    }

    /// Remove the mean of `θ`, project `ω`, `j` onto divergence-free fields
    /// and subtract the lid average of their vertical components. Returns
    /// the lid integrals found before the correction.
    pub fn project(&self, state: &mut State) -> Result<(State, [[f64; 2]; 2])> {
        let geometry = self.geometry(&state.iface.f)?;
        state.iface.theta = state.iface.theta.mean_project();
        let mut flux = [[0.0; 2]; 2];
        for s in Side::BOTH {
            let c = geometry.side(s);
            let b = state.bulk.side_mut(s);
            let area = self.torus.cell_area() * self.torus.len() as f64;
            for (k, v) in [&mut b.omega, &mut b.j].into_iter().enumerate() {
                let p = div_free_projection(c, v, &self.opts.solver).map_err(|e| e.sided(s))?;
                let lid = p.c[2].lid_trace().integral();
                flux[s.index()][k] = lid;
                let shift = lid / area;
                *v = StripVector::new([p.c[0].clone(), p.c[1].clone(), p.c[2].map(|x| x - shift)]);
            }
        }
        Ok((state.clone(), flux))
    }

    /// Harmonic extension of `p̲` plus the quadratic pressure, per side.
    pub fn full_pressure(&self, snap: &FluidSnapshot, th: &ThetaRhs) -> Result<[StripScalar; 2]> {
        let mut out = Vec::with_capacity(2);
        for s in Side::BOTH {
            let c = snap.geometry.side(s);
            let ext = extend(c, &th.p_interface, &self.opts.solver).map_err(|e| e.sided(s))?;
            out.push(ext.add(&th.p_quadratic[s.index()]));
        }
        let m = out.pop().expect("two sides");
        let p = out.pop().expect("two sides");
        Ok([p, m])
    }
}

/// State whose bulk fields are curl-free with the given tangential lid
/// averages and whose interface moves with `θ`.
pub fn potential_state(torus: TorusGrid, nz: usize, iface: InterfaceState, beta: [[f64; 2]; 2], gamma: [[f64; 2]; 2]) -> Result<State> {
    let side = |s: Side| -> Result<SideBulk> {
        let grid = crate::fields::StripGrid::new(torus, nz, s)?;
        Ok(SideBulk { omega: StripVector::zeros(grid), j: StripVector::zeros(grid), beta: beta[s.index()], gamma: gamma[s.index()] })
    };
    Ok(State { t: 0.0, iface, bulk: BulkState { sides: [side(Side::Plus)?, side(Side::Minus)?] } })
}
