//! One application of the iteration map: given a trajectory (the current
//! iterate), solve the linearized interface system and transport the
//! vorticity/current along the frozen fields, starting from the iterate's
//! initial data.
//!
//! `ϖ = ω̄ + j̄` is carried along `u − h` and `ζ = ω̄ − j̄` along `u + h`:
//! `∂tϖ + (u−h)·∇ϖ = ϖ·∇(u−h) − 2∇u_i×∇h_i`,
//! `∂tζ + (u+h)·∇ζ = ζ·∇(u+h) + 2∇u_i×∇h_i`.

use super::{advect, cross_grads, BulkState, FluidSnapshot, InterfaceState, Model, SideBulk, State};
use crate::elliptic::div_free_projection;
use crate::fields::cheb::cheb;
use crate::fields::{StripScalar, StripVector, TorusScalar};
use crate::{Result, Side};

/// States sampled at `t0 + k·dt`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    pub states: Vec<State>,
}

impl Trajectory {
    /// Constant trajectory of `n_steps + 1` copies.
    pub fn frozen(state: &State, t_end: f64, n_steps: usize) -> Self {
        let dt = t_end / n_steps as f64;
        let states = (0..=n_steps).map(|k| State { t: state.t + k as f64 * dt, ..state.clone() }).collect();
        Self { dt, states }
    }

    /// Largest pointwise distance over the samples.
    pub fn distance(&self, o: &Trajectory) -> f64 {
        self.states.iter().zip(&o.states).map(|(a, b)| a.distance(b)).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PicardReport {
    /// Characteristic feet that left the strip and were clamped.
    pub clamped: usize,
}

/// Frozen coefficients of one sample.
struct Frozen {
    snap: FluidSnapshot,
    /// `𝔤`: everything in `∂tθ` except the transport and curvature terms.
    forcing: TorusScalar,
    /// Per side: transport velocities `(u−h, u+h)` in flattened form
    /// `(V1, V2, W)`, their physical Jacobians and `X = Σ∇u_i×∇h_i`.
    sides: [FrozenSide; 2],
}

struct FrozenSide {
    vel: [[Vec<f64>; 3]; 2],
    jac: [[[StripScalar; 3]; 3]; 2],
    cross: StripVector,
}

/// `−(u⁺+u⁻)·∇θ − ½Σ(u_iu_j − h_ih_j)∂i∂jf` with the traces of `snap`.
fn interface_operator(snap: &FluidSnapshot, f: &TorusScalar, theta: &TorusScalar) -> TorusScalar {
    let grid = f.grid();
    let [t1, t2] = theta.grad();
    let mut out = TorusScalar::zeros(grid);
    for tr in [&snap.traces.plus, &snap.traces.minus] {
        let mut g = tr.u[0].mul(&t1).add(&tr.u[1].mul(&t2)).scale(2.0);
        for i in 0..2 {
            for j in 0..2 {
                let q = tr.u[i].mul(&tr.u[j]).sub(&tr.h[i].mul(&tr.h[j]));
                g = g.add(&q.mul(&f.deriv2(i, j)));
            }
        }
        out = out.sub(&g.dealias().scale(0.5));
    }
    out
}

fn freeze(model: &Model, state: &State) -> Result<Frozen> {
    let snap = model.recover_fields(&state.iface, &state.bulk)?;
    let th = model.theta_rhs(&state.iface, &snap)?;
    let forcing = th.dtheta.sub(&interface_operator(&snap, &state.iface.f, &state.iface.theta));
    let sides = Side::BOTH.map(|s| {
        let c = snap.geometry.side(s);
        let f = snap.side(s);
        let ju = c.jacobian(&f.u);
        let jh = c.jacobian(&f.h);
        let rho_t = c.map.rho_t(&state.iface.theta);
        let m = &c.map;
        let flat_vel = |v: &StripVector, moving: bool| -> [Vec<f64>; 3] {
            let n = v.c[0].values().len();
            let w = (0..n)
                .map(|p| {
                    let g = |x: &StripScalar| x.values()[p];
                    let rt = if moving { g(&rho_t) } else { 0.0 };
                    (g(&v.c[2]) - g(&v.c[0]) * g(&m.grad_rho[0]) - g(&v.c[1]) * g(&m.grad_rho[1]) - rt) / g(&m.rho_z)
                })
                .collect();
            [v.c[0].values().to_vec(), v.c[1].values().to_vec(), w]
        };
        let minus = f.u.sub(&f.h);
        let plus = f.u.add(&f.h);
        let jac = |sg: f64| -> [[StripScalar; 3]; 3] { std::array::from_fn(|i| std::array::from_fn(|k| ju[i][k].axpy(sg, &jh[i][k]))) };
        FrozenSide { vel: [flat_vel(&minus, true), flat_vel(&plus, true)], jac: [jac(-1.0), jac(1.0)], cross: cross_grads(&ju, &jh) }
    });
    Ok(Frozen { snap, forcing, sides })
}

/// Cubic Lagrange weights for the four nodes `xs` at `x`.
fn lagrange4(xs: [f64; 4], x: f64) -> [f64; 4] {
    std::array::from_fn(|a| {
        let mut w = 1.0;
        for b in 0..4 {
            if a != b {
                w *= (x - xs[b]) / (xs[a] - xs[b]);
            }
        }
        w
    })
}

/// Tri-cubic interpolation on a strip: periodic cubic in `x'`, cubic on the
/// four nearest collocation nodes in `z`.
struct Interp {
    nx: usize,
    ny: usize,
    h: f64,
    z: Vec<f64>,
    zmin: f64,
    zmax: f64,
}

impl Interp {
    fn new(grid: crate::fields::StripGrid) -> Self {
        let z = cheb(grid.nz, grid.side).z.clone();
        let zmin = z.iter().cloned().fold(f64::INFINITY, f64::min);
        let zmax = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Self { nx: grid.torus.nx, ny: grid.torus.ny, h: 2.0 * std::f64::consts::PI / grid.torus.nx as f64, z, zmin, zmax }
    }

    /// Stencil `(indices, weights)` for a point; returns whether `z` was clamped.
    fn stencil(&self, x: f64, y: f64, z: f64) -> ([usize; 4], [f64; 4], [usize; 4], [f64; 4], [usize; 4], [f64; 4], bool) {
        let periodic = |x: f64, n: usize| {
            let s = x / self.h;
            let i0 = s.floor() as i64;
            let t = s - i0 as f64;
            let idx: [usize; 4] = std::array::from_fn(|a| (i0 - 1 + a as i64).rem_euclid(n as i64) as usize);
            (idx, lagrange4([-1.0, 0.0, 1.0, 2.0], t))
        };
        let (ix, wx) = periodic(x, self.nx);
        let hy = 2.0 * std::f64::consts::PI / self.ny as f64;
        let (iy, wy) = {
            let s = y / hy;
            let i0 = s.floor() as i64;
            let t = s - i0 as f64;
            let idx: [usize; 4] = std::array::from_fn(|a| (i0 - 1 + a as i64).rem_euclid(self.ny as i64) as usize);
            (idx, lagrange4([-1.0, 0.0, 1.0, 2.0], t))
        };
        let clamped = z < self.zmin - 1e-12 || z > self.zmax + 1e-12;
        let zc = z.clamp(self.zmin, self.zmax);
        let nz = self.z.len();
        // Nearest node, then a window of four around it.
        let k = (0..nz).min_by(|&a, &b| (self.z[a] - zc).abs().total_cmp(&(self.z[b] - zc).abs())).unwrap_or(0);
        let k0 = k.saturating_sub(1).min(nz - 4);
        let iz: [usize; 4] = std::array::from_fn(|a| k0 + a);
        let wz = lagrange4(iz.map(|i| self.z[i]), zc);
        (ix, wx, iy, wy, iz, wz, clamped)
    }

    fn eval(&self, st: &([usize; 4], [f64; 4], [usize; 4], [f64; 4], [usize; 4], [f64; 4], bool), v: &[f64]) -> f64 {
        let (ix, wx, iy, wy, iz, wz, _) = st;
        let n = self.nx * self.ny;
        let mut acc = 0.0;
        for c in 0..4 {
            for a in 0..4 {
                let base = iz[c] * n + ix[a] * self.ny;
                let mut row = 0.0;
                for b in 0..4 {
                    row += wy[b] * v[base + iy[b]];
                }
                acc += wz[c] * wx[a] * row;
            }
        }
        acc
    }
}

/// One semi-Lagrangian step of `q` along velocity `vel` with linear source
/// `q·J + sgn·2X`.
#[allow(clippy::too_many_arguments)]
fn transport_step(
    interp: &Interp,
    grid: crate::fields::StripGrid,
    q: &StripVector,
    dt: f64,
    vel: (&[Vec<f64>; 3], &[Vec<f64>; 3]),
    jac: (&[[StripScalar; 3]; 3], &[[StripScalar; 3]; 3]),
    cross: (&StripVector, &StripVector),
    sgn: f64,
    clamped: &mut usize,
) -> StripVector {
    let t = grid.torus;
    let n = t.len();
    let z = cheb(grid.nz, grid.side).z.clone();
    let src0 = advect(q, jac.0).axpy(2.0 * sgn, cross.0);
    let mut dep = vec![[0.0; 3]; grid.len()];
    let mut at_dep = vec![[0.0; 3]; grid.len()];
    for (p, out) in dep.iter_mut().enumerate() {
        let (k, xy) = (p / n, p % n);
        let x = [t.x(xy / t.ny), t.y(xy % t.ny), z[k]];
        let v1 = [vel.1[0][p], vel.1[1][p], vel.1[2][p]];
        let mid = [x[0] - 0.5 * dt * v1[0], x[1] - 0.5 * dt * v1[1], x[2] - 0.5 * dt * v1[2]];
        let st = interp.stencil(mid[0], mid[1], mid[2]);
        let vm: [f64; 3] = std::array::from_fn(|i| 0.5 * (interp.eval(&st, &vel.0[i]) + interp.eval(&st, &vel.1[i])));
        *out = [x[0] - dt * vm[0], x[1] - dt * vm[1], x[2] - dt * vm[2]];
    }
    let mut src_dep = vec![[0.0; 3]; grid.len()];
    for (p, d) in dep.iter().enumerate() {
        let st = interp.stencil(d[0], d[1], d[2]);
        if st.6 {
            *clamped += 1;
        }
        at_dep[p] = std::array::from_fn(|i| interp.eval(&st, q.c[i].values()));
        src_dep[p] = std::array::from_fn(|i| interp.eval(&st, src0.c[i].values()));
    }
    let pack = |v: &[[f64; 3]]| StripVector::new(std::array::from_fn(|i| StripScalar::from_values(grid, v.iter().map(|x| x[i]).collect())));
    let base = pack(&at_dep);
    let s0 = pack(&src_dep);
    let pred = base.axpy(dt, &s0);
    let s1 = advect(&pred, jac.1).axpy(2.0 * sgn, cross.1);
    base.axpy(0.5 * dt, &s0.add(&s1))
}

/// Apply the iteration map to `iterate`.
pub fn picard_map(model: &Model, iterate: &Trajectory) -> Result<(Trajectory, PicardReport)> {
    let dt = iterate.dt;
    let frozen: Vec<Frozen> = iterate.states.iter().map(|s| freeze(model, s)).collect::<Result<_>>()?;
    let s0 = &iterate.states[0];
    let mut report = PicardReport::default();
    let mean_f0 = s0.iface.f.mean();

    let op = |k: usize, f: &TorusScalar, th: &TorusScalar| interface_operator(&frozen[k].snap, f, th).add(&frozen[k].forcing);
    let op_mid = |k: usize, f: &TorusScalar, th: &TorusScalar| op(k, f, th).add(&op(k + 1, f, th)).scale(0.5);

    let mut f = s0.iface.f.clone();
    let mut th = s0.iface.theta.clone();
    let mut q: [[StripVector; 2]; 2] = Side::BOTH.map(|s| {
        let b = s0.bulk.side(s);
        [b.omega.add(&b.j), b.omega.sub(&b.j)]
    });
    let mut avg: [([f64; 2], [f64; 2]); 2] = Side::BOTH.map(|s| (s0.bulk.side(s).beta, s0.bulk.side(s).gamma));
    let rates: Vec<_> = frozen.iter().map(|fr| Model::boundary_average_rhs(&fr.snap)).collect();

    let mut out = vec![s0.clone()];
    for k in 0..iterate.states.len() - 1 {
        // Linear interface system, classical RK4 with midpoint coefficients.
        let k1 = (th.clone(), op(k, &f, &th));
        let (f2, t2) = (f.axpy(0.5 * dt, &k1.0), th.axpy(0.5 * dt, &k1.1));
        let k2 = (t2.clone(), op_mid(k, &f2, &t2));
        let (f3, t3) = (f.axpy(0.5 * dt, &k2.0), th.axpy(0.5 * dt, &k2.1));
        let k3 = (t3.clone(), op_mid(k, &f3, &t3));
        let (f4, t4) = (f.axpy(dt, &k3.0), th.axpy(dt, &k3.1));
        let k4 = (t4.clone(), op(k + 1, &f4, &t4));
        f = f.axpy(dt / 6.0, &k1.0).axpy(dt / 3.0, &k2.0).axpy(dt / 3.0, &k3.0).axpy(dt / 6.0, &k4.0);
        th = th.axpy(dt / 6.0, &k1.1).axpy(dt / 3.0, &k2.1).axpy(dt / 3.0, &k3.1).axpy(dt / 6.0, &k4.1);
        f = f.add(&TorusScalar::constant(f.grid(), mean_f0 - f.mean()));

        for s in Side::BOTH {
            let i = s.index();
            let grid = q[i][0].grid();
            let interp = Interp::new(grid);
            let (a, b) = (&frozen[k].sides[i], &frozen[k + 1].sides[i]);
            for (which, sgn) in [(0usize, -1.0), (1usize, 1.0)] {
                q[i][which] = transport_step(
                    &interp,
                    grid,
                    &q[i][which],
                    dt,
                    (&a.vel[which], &b.vel[which]),
                    (&a.jac[which], &b.jac[which]),
                    (&a.cross, &b.cross),
                    sgn,
                    &mut report.clamped,
                );
            }
            let (r0, r1) = (rates[k][i], rates[k + 1][i]);
            for c in 0..2 {
                avg[i].0[c] += 0.5 * dt * (r0.0[c] + r1.0[c]);
                avg[i].1[c] += 0.5 * dt * (r0.1[c] + r1.1[c]);
            }
        }

        let geometry = &frozen[k + 1].snap.geometry;
        let mut sides = Vec::with_capacity(2);
        for s in Side::BOTH {
            let i = s.index();
            let c = geometry.side(s);
            let omega = div_free_projection(c, &q[i][0].add(&q[i][1]).scale(0.5), &model.opts.solver)?;
            let j = div_free_projection(c, &q[i][0].sub(&q[i][1]).scale(0.5), &model.opts.solver)?;
            sides.push(SideBulk { omega, j, beta: avg[i].0, gamma: avg[i].1 });
        }
        let minus = sides.pop().expect("two sides");
        let plus = sides.pop().expect("two sides");
        out.push(State {
            t: iterate.states[k + 1].t,
            iface: InterfaceState { f: f.clone(), theta: th.clone() },
            bulk: BulkState { sides: [plus, minus] },
        });
    }
    if report.clamped > 0 {
        log::warn!("picard_map: {} characteristic feet clamped to the strip", report.clamped);
    }
    Ok((Trajectory { dt, states: out }, report))
}

/// Start from the frozen trajectory of `initial` and apply the map `iterations` times.
pub fn picard_iterate(model: &Model, initial: &State, t_end: f64, n_steps: usize, iterations: usize) -> Result<(Trajectory, Vec<f64>)> {
    let mut traj = Trajectory::frozen(initial, t_end, n_steps);
    let mut increments = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let (next, _) = picard_map(model, &traj)?;
        increments.push(next.distance(&traj));
        traj = next;
    }
    Ok((traj, increments))
}
