//! Initial data from a configuration and the time loop that advances it
//! while collecting diagnostics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Config, ScenarioKind, ThetaInit};
use crate::diagnostics::{energy_es, growth_rate_fit, lambda_stability, symbol, EnergyReport, GrowthFit, InterfaceTraces, StabilityReport};
use crate::dynamics::{potential_state, residual_momentum, FluidSnapshot, InterfaceState, Model, ModelOptions, ResidualReport, State, ThetaRhs, TimeWindow};
use crate::elliptic::SolverOptions;
use crate::fields::snapshot::Snapshot;
use crate::fields::{SobolevIndex, TorusGrid, TorusScalar};
use crate::geometry::{harmonic_coordinates, Surface};
use crate::{Error, Result, Side};

/// Largest wavenumber touched by the random perturbation.
const NOISE_KMAX: i64 = 3;

#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: Config,
    pub grid: TorusGrid,
    /// Tangential velocities and fields per side, `[plus, minus]`.
    pub u: [[f64; 2]; 2],
    pub h: [[f64; 2]; 2],
    pub f0: TorusScalar,
    pub theta0: TorusScalar,
    /// `σ²` of the perturbation mode.
    pub sigma2: f64,
}

impl Scenario {
    pub fn from_config(config: &Config) -> Result<Self> {
        let cfg = config.clone();
        let grid = TorusGrid::new(cfg.nx, cfg.ny)?;
        let u = [[cfg.w[0] + cfg.v[0], cfg.w[1] + cfg.v[1]], [cfg.w[0] - cfg.v[0], cfg.w[1] - cfg.v[1]]];
        let h = [cfg.h_plus, cfg.h_minus];
        if cfg.scenario == ScenarioKind::CurrentSheet && cfg.v != [0.0, 0.0] {
            return Err(Error::Config("current_sheet requires flow.v = [0, 0]".into()));
        }
        let xi = [cfg.mode[0] as f64, cfg.mode[1] as f64];
        let sigma2 = symbol(cfg.v, cfg.h_plus, cfg.h_minus, xi);

        let (f0, theta0) = if cfg.scenario == ScenarioKind::Custom {
            let path = cfg.custom_f.as_ref().ok_or_else(|| Error::MissingKey("custom.f".into()))?;
            let f = Snapshot::read(path)?.to_torus()?;
            if f.grid() != grid {
                return Err(Error::Config(format!("custom.f is {}x{}, grid is {}x{}", f.grid().nx, f.grid().ny, cfg.nx, cfg.ny)));
            }
            let theta = match &cfg.custom_theta {
                Some(p) => Snapshot::read(p)?.to_torus()?,
                None => TorusScalar::zeros(grid),
            };
            if theta.grid() != grid {
                return Err(Error::Config("custom.theta grid differs from custom.f".into()));
            }
            (f, theta.mean_project())
        } else {
            let phase = |x: f64, y: f64| xi[0] * x + xi[1] * y;
            let wave = TorusScalar::from_fn(grid, |x, y| cfg.amplitude * phase(x, y).cos());
            let mut f = wave.clone();
            if cfg.noise > 0.0 {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                for a in -NOISE_KMAX..=NOISE_KMAX {
                    for b in 0..=NOISE_KMAX {
                        if b == 0 && a <= 0 {
                            continue;
                        }
                        let (c, s): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                        let (ka, kb) = (a as f64, b as f64);
                        f = f.add(&TorusScalar::from_fn(grid, |x, y| cfg.noise * (c * (ka * x + kb * y).cos() + s * (ka * x + kb * y).sin())));
                    }
                }
            }
            let [d1, d2] = f.grad();
            let transport = d1.scale(cfg.w[0]).add(&d2.scale(cfg.w[1]));
            let theta = match cfg.theta_init {
                ThetaInit::Mode => wave.scale(sigma2.max(0.0).sqrt()).sub(&transport),
                ThetaInit::Zero => TorusScalar::zeros(grid),
            };
            (f, theta.mean_project())
        };
        Ok(Self { config: cfg, grid, u, h, f0, theta0, sigma2 })
    }

    /// Planar traces of the unperturbed state.
    pub fn planar_traces(&self) -> InterfaceTraces {
        let e = |a: [f64; 2]| [a[0], a[1], 0.0];
        InterfaceTraces::planar(self.grid, e(self.u[0]), e(self.u[1]), e(self.h[0]), e(self.h[1]))
    }

    /// Check `Λ ≥ 2c0` and `|f0| ≤ 1 − 2c0` when the gate is on.
    pub fn gate(&self) -> Result<StabilityReport> {
        let report = lambda_stability(&self.planar_traces());
        let c0 = self.config.c0;
        if self.config.stability_gate {
            if report.lambda_min < 2.0 * c0 {
                return Err(Error::Domain(format!("stability gate: Λ = {} < 2c0 = {}", report.lambda_min, 2.0 * c0)));
            }
            if self.f0.max_abs() > 1.0 - 2.0 * c0 {
                return Err(Error::Domain(format!("stability gate: max |f0| = {} > 1 - 2c0", self.f0.max_abs())));
            }
        }
        Ok(report)
    }

    pub fn model_options(&self) -> ModelOptions {
        let c = &self.config;
        ModelOptions { solver: SolverOptions { tol: c.tol, max_iter: c.max_iter, ..Default::default() }, cfl_safety: c.cfl_safety, ..Default::default() }
    }

    pub fn model(&self) -> Result<Model> {
        Model::new(&self.f0, self.config.c0, self.config.nz, self.model_options())
    }

    pub fn initial_state(&self) -> Result<State> {
        potential_state(self.grid, self.config.nz, InterfaceState { f: self.f0.clone(), theta: self.theta0.clone() }, self.u, self.h)
    }
}

/// Diagnostics of one time level.
#[derive(Debug, Clone)]
pub struct Record {
    pub step: usize,
    pub t: f64,
    /// `|f̂|` at the perturbation mode.
    pub amplitude: f64,
    /// `d ln(amplitude)/dt` from the previous level.
    pub growth_rate: f64,
    pub lambda_min: f64,
    pub lambda_half: f64,
    pub es: EnergyReport,
    pub energy: f64,
    pub mean_f: f64,
    pub mean_theta: f64,
    /// `max |h·N|` on the interface.
    pub h_normal: f64,
    /// `max |u⁺·N − u⁻·N|`.
    pub normal_jump: f64,
    /// Lid integrals of `ω3`, `j3` per side left by the step into this level.
    pub lid_flux: [[f64; 2]; 2],
    pub residual: Option<ResidualReport>,
}

impl Record {
    pub const HEADER: &'static str = "step,t,amplitude,growth_rate,lambda_min,lambda_half,es,es_transport,es_velocity,es_magnetic_plus,es_magnetic_minus,energy,mean_f,mean_theta,h_normal,normal_jump,lid_omega_plus,lid_j_plus,lid_omega_minus,lid_j_minus,w_plus,w_minus,induction_plus,induction_minus,div_omega_plus,div_omega_minus";

    pub fn csv_row(&self) -> String {
        let r = self.residual.unwrap_or(ResidualReport { momentum: [f64::NAN; 2], induction: [f64::NAN; 2], div_omega: [f64::NAN; 2], div_j: [f64::NAN; 2] });
        let cols: [f64; 25] = [
            self.t,
            self.amplitude,
            self.growth_rate,
            self.lambda_min,
            self.lambda_half,
            self.es.es,
            self.es.transport,
            self.es.velocity,
            self.es.magnetic_plus,
            self.es.magnetic_minus,
            self.energy,
            self.mean_f,
            self.mean_theta,
            self.h_normal,
            self.normal_jump,
            self.lid_flux[0][0],
            self.lid_flux[0][1],
            self.lid_flux[1][0],
            self.lid_flux[1][1],
            r.momentum[0],
            r.momentum[1],
            r.induction[0],
            r.induction[1],
            r.div_omega[0],
            r.div_omega[1],
        ];
        let mut s = self.step.to_string();
        for c in cols {
            s.push(',');
            s.push_str(&format!("{c:e}"));
        }
        s
    }
}

/// Thresholds above which a run is reported as breaching an invariant.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub mean_f: f64,
    pub mean_theta: f64,
    pub h_normal: f64,
    pub energy_drift: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Self { mean_f: 1e-12, mean_theta: 1e-10, h_normal: 1e-5, energy_drift: 0.01 }
    }
}

#[derive(Debug)]
pub struct RunSummary {
    pub steps: usize,
    pub t: f64,
    pub sigma2: f64,
    pub fit: Option<GrowthFit>,
    pub breaches: Vec<String>,
    /// Step and cause of a fatal numerical failure.
    pub failure: Option<(usize, Error)>,
    pub final_state: Option<State>,
    pub last: Option<Record>,
}

/// Everything the driver hands to observers.
pub trait Observer {
    fn record(&mut self, _r: &Record) {}
    fn snapshot(&mut self, _step: usize, _state: &State, _snap: &FluidSnapshot) {}
}

impl Observer for () {}

/// Collects records in memory.
#[derive(Default)]
pub struct Collect(pub Vec<Record>);

impl Observer for Collect {
    fn record(&mut self, r: &Record) {
        self.0.push(r.clone());
    }
}

pub struct Runner<'a> {
    pub scenario: &'a Scenario,
    pub model: Model,
    pub limits: Limits,
}

impl<'a> Runner<'a> {
    pub fn new(scenario: &'a Scenario) -> Result<Self> {
        Ok(Self { scenario, model: scenario.model()?, limits: Limits::default() })
    }

    fn diagnose(&self, step: usize, state: &State, snap: &FluidSnapshot, prev_amp: Option<(f64, f64)>) -> Record {
        let [k1, k2] = self.scenario.config.mode;
        let amplitude = state.iface.f.mode_amplitude(k1, k2).norm();
        let growth_rate = match prev_amp {
            Some((t0, a0)) if a0 > 0.0 && amplitude > 0.0 && state.t > t0 => (amplitude / a0).ln() / (state.t - t0),
            _ => f64::NAN,
        };
        let stab = lambda_stability(&snap.traces);
        let s = SobolevIndex::new(self.scenario.config.sobolev_s).unwrap_or(SobolevIndex::new(0.0).expect("zero is valid"));
        Record {
            step,
            t: state.t,
            amplitude,
            growth_rate,
            lambda_min: stab.lambda_min,
            lambda_half: stab.lambda_half_min,
            es: energy_es(&state.iface.f, &state.iface.theta, &snap.traces, s),
            energy: snap.energy(),
            mean_f: state.iface.f.mean(),
            mean_theta: state.iface.theta.mean(),
            h_normal: snap.magnetic_normal_residual(),
            normal_jump: snap.normal_velocity_jump(),
            lid_flux: [[0.0; 2]; 2],
            residual: None,
        }
    }

    fn check(&self, r: &Record, first: &Record, breaches: &mut Vec<String>) {
        let l = &self.limits;
        let mut flag = |m: String| {
            log::warn!("step {}: {m}", r.step);
            breaches.push(format!("step {}: {m}", r.step));
        };
        if (r.mean_f - first.mean_f).abs() > l.mean_f {
            flag(format!("mean f drifted by {:e}", r.mean_f - first.mean_f));
        }
        if r.mean_theta.abs() > l.mean_theta {
            flag(format!("mean theta {:e}", r.mean_theta));
        }
        if r.h_normal > l.h_normal {
            flag(format!("h·N residual {:e}", r.h_normal));
        }
        if first.energy > 0.0 && ((r.energy - first.energy) / first.energy).abs() > l.energy_drift {
            flag(format!("energy drift {:e}", (r.energy - first.energy) / first.energy));
        }
        if self.scenario.config.stability_gate && r.lambda_min < self.scenario.config.c0 {
            flag(format!("stability margin {} below c0", r.lambda_min));
        }
    }

    /// `‖f − f0‖_{W^{1,∞}}`.
    fn distance_from_reference(&self, f: &TorusScalar) -> f64 {
        let d = f.sub(&self.scenario.f0);
        let [a, b] = d.grad();
        d.max_abs() + a.max_abs().max(b.max_abs())
    }

    /// Harmonic coordinates over the initial surface must stay invertible.
    fn harmonic_check(&self, f: &TorusScalar) -> Result<f64> {
        let c0 = self.scenario.config.c0;
        let reference = Surface::new(self.scenario.f0.clone(), c0)?;
        let surface = Surface::new(f.clone(), c0)?;
        let mut worst = f64::INFINITY;
        for s in Side::BOTH {
            let hc = harmonic_coordinates(&surface, &reference, s, self.model.nz, &self.model.opts.solver)?;
            let det = hc.jacobian_det();
            worst = worst.min(det.values().iter().cloned().fold(f64::INFINITY, f64::min));
        }
        Ok(worst)
    }

    /// Advance to `t_end` with the configured `dt`.
    pub fn run(&self, obs: &mut dyn Observer) -> RunSummary {
        let cfg = &self.scenario.config;
        let n = (cfg.t_end / cfg.dt).round().max(1.0) as usize;
        let dt = cfg.t_end / n as f64;
        let mut summary = RunSummary { steps: 0, t: 0.0, sigma2: self.scenario.sigma2, fit: None, breaches: vec![], failure: None, final_state: None, last: None };
        let mut state = match self.scenario.initial_state() {
            Ok(s) => s,
            Err(e) => {
                summary.failure = Some((0, e));
                return summary;
            }
        };
        let mut first: Option<Record> = None;
        let mut prev_amp = None;
        let mut lid_flux = [[0.0; 2]; 2];
        let mut pending: Option<(Record, State, FluidSnapshot, ThetaRhs)> = None;
        let mut prev_snap: Option<FluidSnapshot> = None;
        let mut series = (vec![], vec![]);
        let mut warned_delta0 = false;

        let emit = |r: Record, first: &Option<Record>, summary: &mut RunSummary, obs: &mut dyn Observer| {
            if let Some(f) = first {
                self.check(&r, f, &mut summary.breaches);
            }
            obs.record(&r);
            summary.last = Some(r);
        };

        for step in 0..=n {
            let level = if step < n {
                self.model.step_rk4(&state, dt).map(|o| (o.start, o.start_theta, Some(o.state), o.report.lid_flux))
            } else {
                self.model.recover_fields(&state.iface, &state.bulk).and_then(|snap| {
                    let th = self.model.theta_rhs(&state.iface, &snap)?;
                    Ok((snap, th, None, [[0.0; 2]; 2]))
                })
            };
            let (snap, th, next, flux) = match level {
                Ok(x) => x,
                Err(e) => {
                    summary.failure = Some((step, e));
                    break;
                }
            };
            let mut rec = self.diagnose(step, &state, &snap, prev_amp);
            rec.lid_flux = lid_flux;
            prev_amp = Some((rec.t, rec.amplitude));
            series.0.push(rec.t);
            series.1.push(rec.amplitude);
            if first.is_none() {
                first = Some(rec.clone());
            }
            if !warned_delta0 && self.distance_from_reference(&state.iface.f) > cfg.delta0 {
                warned_delta0 = true;
                log::warn!("step {step}: interface left the delta0 neighbourhood of f0; checking harmonic coordinates");
                match self.harmonic_check(&state.iface.f) {
                    Ok(d) if d > 0.0 => log::info!("harmonic coordinates invertible, min Jacobian {d:e}"),
                    Ok(d) => summary.breaches.push(format!("step {step}: harmonic coordinates degenerate, Jacobian {d:e}")),
                    Err(e) => summary.breaches.push(format!("step {step}: harmonic coordinates failed: {e}")),
                }
            }
            if cfg.snapshot_every > 0 && (step % cfg.snapshot_every == 0 || step == n) {
                obs.snapshot(step, &state, &snap);
            }
            if cfg.residuals {
                if let Some((mut r, st, sn, t)) = pending.take() {
                    if let Some(pv) = &prev_snap {
                        let win = TimeWindow { dt, prev: pv, cur: (&st, &sn, &t), next: &snap };
                        match residual_momentum(&self.model, &win, false) {
                            Ok(res) => r.residual = Some(res),
                            Err(e) => summary.breaches.push(format!("step {}: residual evaluation failed: {e}", r.step)),
                        }
                    }
                    emit(r, &first, &mut summary, obs);
                    prev_snap = Some(sn);
                }
                pending = Some((rec, state.clone(), snap, th));
            } else {
                emit(rec, &first, &mut summary, obs);
            }
            summary.steps = step;
            summary.t = state.t;
            lid_flux = flux;
            match next {
                Some(s) => state = s,
                None => break,
            }
        }
        if let Some((r, ..)) = pending.take() {
            emit(r, &first, &mut summary, obs);
        }
        summary.fit = growth_rate_fit(&series.0, &series.1).ok();
        summary.final_state = Some(state);
        summary
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    fn config(extra: &str) -> Config {
        Config::parse(&format!("geometry.c0 = 0.1\ngrid.nx = 8\ngeometry.Nz = 9\n{extra}"), Path::new(".")).unwrap()
    }

    #[test]
    fn planar_kh_initial_mode_grows_at_sigma() {
        let s = Scenario::from_config(&config("perturbation.mode = [1, 0]\n")).unwrap();
        assert!((s.sigma2 - 1.0).abs() < 1e-15);
        assert!(s.theta0.sub(&s.f0).max_abs() < 1e-15);
        assert!(s.gate().unwrap().lambda_min < 0.0);
    }

    #[test]
    fn gate_refuses_unstable_data() {
        let s = Scenario::from_config(&config("gate.stability = true\n")).unwrap();
        assert!(matches!(s.gate(), Err(Error::Domain(_))));
        let s = Scenario::from_config(&config("scenario = \"current_sheet\"\n")).unwrap();
        assert!(s.gate().unwrap().lambda_min >= 0.2);
    }

    #[test]
    fn noise_is_seeded() {
        let a = Scenario::from_config(&config("perturbation.noise = 1e-3\nseed = 4\n")).unwrap();
        let b = Scenario::from_config(&config("perturbation.noise = 1e-3\nseed = 4\n")).unwrap();
        let c = Scenario::from_config(&config("perturbation.noise = 1e-3\nseed = 5\n")).unwrap();
        assert_eq!(a.f0.values(), b.f0.values());
        assert_ne!(a.f0.values(), c.f0.values());
    }

    #[test]
    fn equilibrium_run_has_constant_diagnostics() {
        let s = Scenario::from_config(&config("scenario = \"current_sheet\"\nperturbation.amplitude = 0.0\ntime.dt = 0.05\ntime.t_end = 0.2\ndiagnostics.residuals = true\n")).unwrap();
        let runner = Runner::new(&s).unwrap();
        let mut rec = Collect::default();
        let sum = runner.run(&mut rec);
        assert!(sum.failure.is_none() && sum.breaches.is_empty(), "{:?} {:?}", sum.failure, sum.breaches);
        assert_eq!(rec.0.len(), 5);
        for r in &rec.0 {
            assert!((r.energy - rec.0[0].energy).abs() < 1e-12);
            assert_eq!(r.amplitude, 0.0);
        }
        let res = rec.0[2].residual.expect("interior residual");
        assert!(res.momentum.iter().chain(&res.induction).all(|x| *x < 1e-8));
    }
}
