//! Acceptance criteria as runnable checks.
//!
//! Each criterion measures a quantity and compares it with a pinned limit.
//! `Settings::tighten` divides every upper limit (and multiplies every
//! required improvement factor), which turns the suite into a negative
//! control.

use std::cell::OnceCell;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::{growth_rate_fit, lambda_stability, symbol};
use crate::divcurl::{divcurl_solve, lid_means, DivCurlData, DivCurlOptions};
use crate::dno::{dn_apply, dn_inverse, CgOptions, DnoOperator, DnoSide};
use crate::dynamics::picard::{picard_map, Trajectory};
use crate::dynamics::{potential_state, residual_momentum, FluidSnapshot, InterfaceState, Model, ModelOptions, State, ThetaRhs, TimeWindow};
use crate::fields::{TorusGrid, TorusScalar};
use crate::geometry::{EllipticCoefficients, Surface};
use crate::{Result, Side};

#[derive(Debug, Clone, Copy)]
pub struct Criterion {
    pub id: u8,
    pub key: &'static str,
    pub title: &'static str,
}

pub const CRITERIA: [Criterion; 9] = [
    Criterion { id: 1, key: "dno-flat", title: "flat-strip DN operator against |ξ| tanh|ξ|" },
    Criterion { id: 2, key: "dno-structure", title: "DN self-adjointness, positivity and inverse" },
    Criterion { id: 3, key: "divcurl-roundtrip", title: "div-curl recovery of a manufactured field" },
    Criterion { id: 4, key: "dispersion", title: "linear growth rates and stable-mode drift" },
    Criterion { id: 5, key: "threshold", title: "magnetic stabilization threshold" },
    Criterion { id: 6, key: "nonlinear-invariants", title: "invariants of a magnetized stable run" },
    Criterion { id: 7, key: "equivalence-residuals", title: "momentum and induction residuals under refinement" },
    Criterion { id: 8, key: "picard-contraction", title: "contraction of the iteration map" },
    Criterion { id: 9, key: "compatibility", title: "lid flux of vorticity and current" },
];

#[derive(Debug, Clone)]
pub struct Settings {
    /// Divides upper limits and multiplies required factors.
    pub tighten: f64,
    /// Substring of a criterion key, or its number.
    pub filter: Option<String>,
}

impl Default for Settings {
    fn default() -> Self {
        Self { tighten: 1.0, filter: None }
    }
}

impl Settings {
    fn selects(&self, c: &Criterion) -> bool {
        match &self.filter {
            None => true,
            Some(f) => c.key.contains(f.as_str()) || f.parse::<u8>().is_ok_and(|n| n == c.id),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub criterion: Criterion,
    pub pass: bool,
    /// One line per measured quantity, `value <= limit` style.
    pub checks: Vec<String>,
    pub elapsed: Duration,
}

impl Outcome {
    /// `PASS 4 dispersion: ... (12.3 s)`.
    pub fn line(&self) -> String {
        format!(
            "{} {} {}: {} ({:.1} s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.criterion.id,
            self.criterion.key,
            self.checks.join("; "),
            self.elapsed.as_secs_f64()
        )
    }
}

/// Accumulates checks of one criterion.
struct Sheet<'a> {
    s: &'a Settings,
    pass: bool,
    checks: Vec<String>,
}

impl<'a> Sheet<'a> {
    fn new(s: &'a Settings) -> Self {
        Self { s, pass: true, checks: vec![] }
    }

    fn at_most(&mut self, what: &str, value: f64, limit: f64) {
        let lim = limit / self.s.tighten;
        let ok = value <= lim;
        self.pass &= ok;
        self.checks.push(format!("{what} {value:.3e} {} {lim:.1e}", if ok { "<=" } else { ">" }));
    }

    fn at_least(&mut self, what: &str, value: f64, factor: f64) {
        let lim = factor * self.s.tighten;
        let ok = value >= lim;
        self.pass &= ok;
        self.checks.push(format!("{what} {value:.3e} {} {lim:.1e}", if ok { ">=" } else { "<" }));
    }

    /// A limit that tightening does not change.
    fn fixed(&mut self, what: &str, ok: bool, detail: String) {
        self.pass &= ok;
        self.checks.push(format!("{what} {detail}{}", if ok { "" } else { " (failed)" }));
    }

    fn error(&mut self, what: &str, e: impl std::fmt::Display) {
        self.pass = false;
        self.checks.push(format!("{what}: error: {e}"));
    }
}

/// Data shared by several criteria, computed on first use.
#[derive(Default)]
pub struct Context {
    nonlinear: OnceCell<std::result::Result<Nonlinear, String>>,
}

/// Run the selected criteria in order.
pub fn run(settings: &Settings, mut report: impl FnMut(&Outcome)) -> Vec<Outcome> {
    let ctx = Context::default();
    let mut out = vec![];
    for c in CRITERIA.iter().filter(|c| settings.selects(c)) {
        let o = run_one(c.id, settings, &ctx);
        report(&o);
        out.push(o);
    }
    out
}

pub fn run_one(id: u8, s: &Settings, ctx: &Context) -> Outcome {
    let criterion = CRITERIA[(id - 1) as usize];
    let t0 = Instant::now();
    let mut sheet = Sheet::new(s);
    match id {
        1 => dno_flat(&mut sheet),
        2 => dno_structure(&mut sheet),
        3 => divcurl_roundtrip(&mut sheet),
        4 => dispersion_runs(&mut sheet),
        5 => threshold_sweep(&mut sheet),
        6 => nonlinear_invariants(&mut sheet, ctx),
        7 => equivalence_residuals(&mut sheet, ctx),
        8 => picard_contraction(&mut sheet),
        9 => compatibility(&mut sheet, ctx),
        _ => sheet.fixed("criterion", false, format!("unknown id {id}")),
    }
    let elapsed = t0.elapsed();
    if id == 1 {
        sheet.at_most("runtime s", elapsed.as_secs_f64(), 5.0);
    }
    if id == 4 {
        sheet.at_most("runtime s", elapsed.as_secs_f64(), 120.0);
    }
    Outcome { criterion, pass: sheet.pass, checks: sheet.checks, elapsed }
}

fn grid(n: usize) -> TorusGrid {
    TorusGrid::new(n, n).expect("valid grid")
}

fn dno_flat(sheet: &mut Sheet) {
    let g = grid(64);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let kmax = 21.0;
    let spec: Vec<Complex64> = (0..g.n_modes())
        .map(|m| {
            let (kx, ky) = g.wavenumber(m);
            let k = kx.hypot(ky);
            if k > 0.0 && k <= kmax && !g.is_nyquist(m) {
                Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    let psi = TorusScalar::from_spectrum(g, spec);
    let surface = Surface::flat(g, 0.1);
    for side in [DnoSide::Plus, DnoSide::Minus] {
        let out = DnoOperator::new(&surface, side, 33).and_then(|op| dn_apply(&op, &psi));
        let out = match out {
            Ok(o) => o,
            Err(e) => return sheet.error("dn_apply", e),
        };
        let (a, b) = (psi.spectrum(), out.spectrum());
        let mut worst: f64 = 0.0;
        for m in 0..g.n_modes() {
            let (kx, ky) = g.wavenumber(m);
            let k = kx.hypot(ky);
            if k == 0.0 || k > kmax || a[m].norm() < 1e-3 {
                continue;
            }
            let want = a[m] * (k * k.tanh());
            worst = worst.max((b[m] - want).norm() / want.norm());
        }
        sheet.at_most(&format!("{side:?} max relative error"), worst, 1e-8);
    }
}

/// Smooth random zero-mean field.
fn random_field(g: TorusGrid, rng: &mut ChaCha8Rng) -> TorusScalar {
    let spec = (0..g.n_modes())
        .map(|m| {
            let (kx, ky) = g.wavenumber(m);
            let k2 = kx * kx + ky * ky;
            if k2 == 0.0 || g.is_nyquist(m) {
                return Complex64::new(0.0, 0.0);
            }
            let a = (-k2 / 16.0).exp();
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * a
        })
        .collect();
    TorusScalar::from_spectrum(g, spec).mean_project()
}

fn dno_structure(sheet: &mut Sheet) {
    let g = grid(32);
    let nz = 17;
    let surfaces: [(&str, Box<dyn Fn(f64, f64) -> f64>); 3] = [
        ("f=0", Box::new(|_, _| 0.0)),
        ("f=0.2cos(x1)", Box::new(|x, _| 0.2 * x.cos())),
        ("f=0.15cos(x1+2x2)", Box::new(|x, y| 0.15 * (x + 2.0 * y).cos())),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let psis: Vec<TorusScalar> = (0..20).map(|_| random_field(g, &mut rng)).collect();
    let (mut adj, mut pos, mut inv): (f64, f64, f64) = (0.0, f64::INFINITY, 0.0);
    for (name, f) in &surfaces {
        let result = (|| -> Result<()> {
            let surface = Surface::new(TorusScalar::from_fn(g, f), 0.1)?;
            for side in [DnoSide::Plus, DnoSide::Minus] {
                let op = DnoOperator::new(&surface, side, nz)?;
                let images: Vec<TorusScalar> = psis.iter().map(|p| dn_apply(&op, p)).collect::<Result<_>>()?;
                for i in 0..psis.len() {
                    let j = (i + 1) % psis.len();
                    let lhs = images[i].dot(&psis[j]);
                    let rhs = psis[i].dot(&images[j]);
                    let scale = images[i].l2() * psis[j].l2() + psis[i].l2() * images[j].l2();
                    adj = adj.max((lhs - rhs).abs() / scale);
                    pos = pos.min(images[i].dot(&psis[i]) / psis[i].dot(&psis[i]));
                }
            }
            let sum = DnoOperator::new(&surface, DnoSide::Sum, nz)?;
            let cg = CgOptions { tol: 1e-10, ..Default::default() };
            for p in &psis {
                let x = dn_inverse(&sum, p, &cg)?;
                let back = dn_apply(&sum, &x)?;
                inv = inv.max(back.sub(p).l2() / p.l2());
            }
            Ok(())
        })();
        if let Err(e) = result {
            return sheet.error(name, e);
        }
    }
    sheet.at_most("self-adjointness defect", adj, 1e-8);
    sheet.fixed("positivity", pos >= 0.0, format!("min <Nψ,ψ>/|ψ|² {pos:.3e} >= 0"));
    sheet.at_most("inverse round trip", inv, 1e-7);
}

fn manufactured(x1: f64, x2: f64, x3: f64) -> [f64; 3] {
    [x2.sin() * x3.cos() + 0.3, (x1 + x3).cos() - 0.2, (1.0 - x3 * x3) * x1.sin()]
}

fn divcurl_roundtrip(sheet: &mut Sheet) {
    let g = grid(16);
    let f = TorusScalar::from_fn(g, |_, y| 0.1 * y.cos());
    let surface = match Surface::new(f, 0.5) {
        Ok(s) => s,
        Err(e) => return sheet.error("surface", e),
    };
    let opts = DivCurlOptions::default();
    let mut errs = vec![];
    let mut unique: f64 = 0.0;
    let depths = [9, 11, 13, 17];
    for nz in depths {
        let mut worst: f64 = 0.0;
        for side in Side::BOTH {
            let r = (|| -> Result<(f64, f64)> {
                let c = EllipticCoefficients::build(&surface, side, nz)?;
                let u = c.map.sample_vector(manufactured);
                let data = DivCurlData { omega: c.curl(&u), g: c.div(&u), theta_bc: c.normal_component_at_interface(&u.c), lid_means: lid_means(&u) };
                let e = divcurl_solve(&data, &c, &opts)?.u.sub(&u).max_abs();
                let zero = DivCurlData::curl_free(c.grid(), TorusScalar::zeros(g), [0.0, 0.0]);
                Ok((e, divcurl_solve(&zero, &c, &opts)?.u.max_abs()))
            })();
            match r {
                Ok((e, z)) => {
                    worst = worst.max(e);
                    unique = unique.max(z);
                }
                Err(e) => return sheet.error(&format!("Nz={nz} {side:?}"), e),
            }
        }
        errs.push(worst);
    }
    sheet.at_most("recovery error at Nz=17", errs[3], 1e-5);
    // Once at round-off the error may stall.
    let decreasing = errs.windows(2).all(|w| w[1] < w[0] || w[1] <= 1e-10);
    let shown: Vec<String> = depths.iter().zip(&errs).map(|(n, e)| format!("Nz={n}:{e:.2e}")).collect();
    sheet.fixed("refinement", decreasing, shown.join(" "));
    sheet.at_most("uniqueness defect", unique, 1e-10);
}

/// Linearized run of a single mode; returns times and complex `(f̂, θ̂)`.
struct ModeRun {
    t: Vec<f64>,
    f: Vec<Complex64>,
    theta: Vec<Complex64>,
}

const LINEAR_AMPLITUDE: f64 = 1e-6;

fn mode_run(n: usize, nz: usize, v: [f64; 2], hp: [f64; 2], hm: [f64; 2], mode: [i64; 2], steps: usize) -> Result<ModeRun> {
    let g = grid(n);
    let xi = [mode[0] as f64, mode[1] as f64];
    let s2 = symbol(v, hp, hm, xi);
    let f = TorusScalar::from_fn(g, |x, y| LINEAR_AMPLITUDE * (xi[0] * x + xi[1] * y).cos());
    let theta = f.scale(s2.max(0.0).sqrt());
    let model = Model::new(&f, 0.1, nz, ModelOptions::default())?;
    let mut state = potential_state(g, nz, InterfaceState { f, theta }, [v, [-v[0], -v[1]]], [hp, hm])?;
    let snap = model.recover_fields(&state.iface, &state.bulk)?;
    let dt = 0.1f64.min(0.95 * model.max_stable_dt(&snap));
    let mut run = ModeRun { t: vec![], f: vec![], theta: vec![] };
    for k in 0..=steps {
        run.t.push(state.t);
        run.f.push(state.iface.f.mode_amplitude(mode[0], mode[1]));
        run.theta.push(state.iface.theta.mode_amplitude(mode[0], mode[1]));
        if k < steps {
            state = model.step_rk4(&state, dt)?.state;
        }
    }
    Ok(run)
}

/// Growth rate for unstable modes; for the others, drift of the
/// oscillation invariant `√(|f̂|² + |θ̂|²/|σ²|)` per period (or over the
/// run when `σ² = 0`).
enum ModeMeasure {
    Rate(f64),
    Drift(f64),
}

fn measure(run: &ModeRun, s2: f64) -> Result<ModeMeasure> {
    if s2 > 0.0 {
        let amp: Vec<f64> = run.f.iter().map(|c| c.norm()).collect();
        return Ok(ModeMeasure::Rate(growth_rate_fit(&run.t, &amp)?.rate));
    }
    let inv = |k: usize| {
        let th = if s2 < 0.0 { run.theta[k].norm_sqr() / -s2 } else { 0.0 };
        (run.f[k].norm_sqr() + th).sqrt()
    };
    let last = run.t.len() - 1;
    let ratio = inv(last) / inv(0);
    if s2 < 0.0 {
        let period = std::f64::consts::TAU / (-s2).sqrt();
        Ok(ModeMeasure::Drift((ratio.ln() * period / run.t[last]).exp_m1().abs()))
    } else {
        Ok(ModeMeasure::Drift((ratio - 1.0).abs()))
    }
}

/// Velocity half-jump and fields of the three linear families.
const FAMILIES: [(&str, [f64; 2], [f64; 2], [f64; 2]); 3] = [
    ("KH", [1.0, 0.0], [0.0, 0.0], [0.0, 0.0]),
    ("sub-threshold", [1.0, 0.0], [0.8, 0.0], [0.0, 0.8]),
    ("super-threshold", [1.0, 0.0], [2.5, 0.0], [0.5, 2.5]),
];

const MODES: [[i64; 2]; 3] = [[1, 0], [0, 1], [1, 1]];

fn dispersion_runs(sheet: &mut Sheet) {
    let (mut rate_err, mut drift): (f64, f64) = (0.0, 0.0);
    let mut lines = String::new();
    for (name, v, hp, hm) in FAMILIES {
        for mode in MODES {
            let s2 = symbol(v, hp, hm, [mode[0] as f64, mode[1] as f64]);
            match mode_run(32, 17, v, hp, hm, mode, 15).and_then(|r| measure(&r, s2)) {
                Ok(ModeMeasure::Rate(r)) => {
                    let e = (r - s2.sqrt()).abs() / s2.sqrt();
                    rate_err = rate_err.max(e);
                    let _ = write!(lines, " {name}{mode:?}:rate {r:.4}/{:.4}", s2.sqrt());
                }
                Ok(ModeMeasure::Drift(d)) => {
                    drift = drift.max(d);
                    let _ = write!(lines, " {name}{mode:?}:drift {d:.1e}");
                }
                Err(e) => return sheet.error(&format!("{name} {mode:?}"), e),
            }
        }
    }
    log::info!("dispersion runs:{lines}");
    sheet.at_most("max relative growth-rate error", rate_err, 0.05);
    sheet.at_most("max stable drift per period", drift, 0.01);
}

/// Growth rates below this are reported as not detected.
pub const DETECTION_FLOOR: f64 = 0.05;

fn threshold_sweep(sheet: &mut Sheet) {
    // h± = (H, 0), v = (1, 0), ξ = (1, 0): threshold 2(v·ξ)² = 2H², H = 1.
    let sweep = [0.6, 0.8, 1.0, 1.2, 1.4];
    let increment = 0.2;
    let analytic = 1.0;
    let mut detected = vec![];
    for h in sweep {
        let s2 = symbol([1.0, 0.0], [h, 0.0], [h, 0.0], [1.0, 0.0]);
        let run = match mode_run(16, 9, [1.0, 0.0], [h, 0.0], [h, 0.0], [1, 0], 15) {
            Ok(r) => r,
            Err(e) => return sheet.error(&format!("H={h}"), e),
        };
        let amp: Vec<f64> = run.f.iter().map(|c| c.norm()).collect();
        let rate = growth_rate_fit(&run.t, &amp).map(|f| f.rate).unwrap_or(f64::NEG_INFINITY);
        log::info!("threshold sweep H={h}: σ² {s2:.3}, measured rate {rate:.4}");
        detected.push(rate >= DETECTION_FLOOR);
    }
    let crossing = detected.iter().position(|d| !d).map(|i| sweep[i]);
    let monotone = detected.windows(2).all(|w| w[0] || !w[1]);
    sheet.fixed("monotone detection", monotone, format!("{detected:?}"));
    match crossing {
        Some(hc) => sheet.at_most("|crossing - threshold|", (hc - analytic).abs(), increment),
        None => sheet.fixed("crossing", false, "growth detected across the whole sweep".into()),
    }
}

/// Initial data of the magnetized stable case.
fn magnetized_state(n: usize, nz: usize) -> Result<(Model, State)> {
    let g = grid(n);
    let f = TorusScalar::from_fn(g, |x, y| 0.02 * (x.cos() + 0.5 * (x + 2.0 * y).sin()));
    let theta = TorusScalar::zeros(g);
    let model = Model::new(&f, 0.1, nz, ModelOptions::default())?;
    let state = potential_state(g, nz, InterfaceState { f, theta }, MAG_U, MAG_H)?;
    Ok((model, state))
}

const MAG_U: [[f64; 2]; 2] = [[0.5, 0.0], [-0.5, 0.0]];
const MAG_H: [[f64; 2]; 2] = [[1.0, 0.3], [0.2, 1.0]];

/// Diagnostics of one nonlinear run.
#[derive(Debug, Clone)]
struct RunStats {
    lambda0: f64,
    energy_drift: f64,
    mean_f_drift: f64,
    mean_theta: f64,
    lambda_min: f64,
    h_normal: f64,
    lid_drift_rate: f64,
    /// Max over the probe times of `‖w±‖`, `‖H±‖` and ablated `‖w±‖`.
    momentum: f64,
    induction: f64,
    ablated: f64,
}

#[derive(Debug, Clone)]
struct Nonlinear {
    coarse: RunStats,
    fine: RunStats,
}

const PROBES: [f64; 3] = [0.25, 0.5, 0.75];

fn nonlinear_run(n: usize, nz: usize, dt: f64, t_end: f64) -> Result<RunStats> {
    let (model, mut state) = magnetized_state(n, nz)?;
    let steps = (t_end / dt).round() as usize;
    let mut levels: Vec<(State, FluidSnapshot, ThetaRhs)> = vec![];
    let mut st = RunStats {
        lambda0: f64::NAN,
        energy_drift: 0.0,
        mean_f_drift: 0.0,
        mean_theta: 0.0,
        lambda_min: f64::INFINITY,
        h_normal: 0.0,
        lid_drift_rate: 0.0,
        momentum: 0.0,
        induction: 0.0,
        ablated: 0.0,
    };
    let (mut e0, mut f0) = (f64::NAN, f64::NAN);
    let mut lid_total: f64 = 0.0;
    for k in 0..=steps {
        let (snap, th, next) = if k < steps {
            let o = model.step_rk4(&state, dt)?;
            lid_total += o.report.lid_flux.iter().flatten().map(|x| x.abs()).sum::<f64>();
            st.mean_theta = st.mean_theta.max(o.report.theta_mean);
            (o.start, o.start_theta, Some(o.state))
        } else {
            let snap = model.recover_fields(&state.iface, &state.bulk)?;
            let th = model.theta_rhs(&state.iface, &snap)?;
            (snap, th, None)
        };
        let lam = lambda_stability(&snap.traces).lambda_min;
        if k == 0 {
            e0 = snap.energy();
            f0 = state.iface.f.mean();
            st.lambda0 = lam;
        }
        st.energy_drift = st.energy_drift.max(((snap.energy() - e0) / e0).abs());
        st.mean_f_drift = st.mean_f_drift.max((state.iface.f.mean() - f0).abs());
        st.mean_theta = st.mean_theta.max(state.iface.theta.mean().abs());
        st.lambda_min = st.lambda_min.min(lam);
        st.h_normal = st.h_normal.max(snap.magnetic_normal_residual());
        levels.push((state.clone(), snap, th));
        if levels.len() > 3 {
            levels.remove(0);
        }
        // Residuals at the middle of the last three levels.
        if levels.len() == 3 {
            let tm = levels[1].0.t;
            if PROBES.iter().any(|p| (p - tm).abs() < 1e-9) {
                let win = TimeWindow { dt, prev: &levels[0].1, cur: (&levels[1].0, &levels[1].1, &levels[1].2), next: &levels[2].1 };
                let r = residual_momentum(&model, &win, false)?;
                let a = residual_momentum(&model, &win, true)?;
                st.momentum = st.momentum.max(r.momentum[0].max(r.momentum[1]));
                st.induction = st.induction.max(r.induction[0].max(r.induction[1]));
                st.ablated = st.ablated.max(a.momentum[0].max(a.momentum[1]));
            }
        }
        match next {
            Some(s) => state = s,
            None => break,
        }
    }
    st.lid_drift_rate = lid_total / t_end;
    Ok(st)
}

impl Context {
    fn nonlinear(&self) -> &std::result::Result<Nonlinear, String> {
        self.nonlinear.get_or_init(|| {
            let coarse = nonlinear_run(16, 9, 0.05, 1.0).map_err(|e| format!("coarse run: {e}"))?;
            let fine = nonlinear_run(32, 17, 0.025, 1.0).map_err(|e| format!("fine run: {e}"))?;
            log::info!("nonlinear coarse {coarse:?}");
            log::info!("nonlinear fine {fine:?}");
            Ok(Nonlinear { coarse, fine })
        })
    }
}

fn nonlinear_invariants(sheet: &mut Sheet, ctx: &Context) {
    let r = match ctx.nonlinear() {
        Ok(n) => n.fine.clone(),
        Err(e) => return sheet.error("run", e),
    };
    sheet.fixed("initial margin", r.lambda0 >= 0.2, format!("Λ0 {:.3} >= 2c0 = 0.2", r.lambda0));
    sheet.at_most("energy drift", r.energy_drift, 0.01);
    sheet.at_most("mean f drift", r.mean_f_drift, 1e-12);
    sheet.at_most("max |mean θ|", r.mean_theta, 1e-10);
    sheet.fixed("margin kept", r.lambda_min >= 0.1, format!("min Λ {:.3} >= c0 = 0.1", r.lambda_min));
    sheet.at_most("max |h·N|", r.h_normal, 1e-5);
}

fn equivalence_residuals(sheet: &mut Sheet, ctx: &Context) {
    let n = match ctx.nonlinear() {
        Ok(n) => n,
        Err(e) => return sheet.error("run", e),
    };
    sheet.at_least("momentum refinement factor", n.coarse.momentum / n.fine.momentum, 3.0);
    sheet.at_least("induction refinement factor", n.coarse.induction / n.fine.induction, 3.0);
    sheet.at_least("ablation factor", n.fine.ablated / n.fine.momentum, 10.0);
}

fn compatibility(sheet: &mut Sheet, ctx: &Context) {
    let n = match ctx.nonlinear() {
        Ok(n) => n,
        Err(e) => return sheet.error("run", e),
    };
    sheet.at_most("lid flux drift per unit time", n.fine.lid_drift_rate.max(n.coarse.lid_drift_rate), 1e-8);
}

fn picard_contraction(sheet: &mut Sheet) {
    let t_end = 0.02;
    let r = (|| -> Result<f64> {
        let (model, s0) = magnetized_state(16, 9)?;
        let x = Trajectory::frozen(&s0, t_end, 4);
        let g = s0.iface.f.grid();
        let shape = TorusScalar::from_fn(g, |x, y| (x + 2.0 * y).cos());
        let mut y = x.clone();
        for st in &mut y.states {
            let a = 1e-4 * (st.t - s0.t) / t_end;
            st.iface.f = st.iface.f.axpy(a, &shape);
            st.iface.theta = st.iface.theta.axpy(a, &shape);
        }
        let (fx, rx) = picard_map(&model, &x)?;
        let (fy, ry) = picard_map(&model, &y)?;
        if rx.clamped + ry.clamped > 0 {
            log::warn!("picard probe clamped {} feet", rx.clamped + ry.clamped);
        }
        Ok(fx.distance(&fy) / x.distance(&y))
    })();
    match r {
        Ok(ratio) => {
            log::info!("picard contraction factor {ratio:.4}");
            sheet.at_most("distance ratio", ratio, 1.0 - f64::EPSILON);
        }
        Err(e) => sheet.error("picard", e),
    }
}
