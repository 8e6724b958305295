use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context as _;
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use cvsheet::config::Config;
use cvsheet::diagnostics::{dispersion, lambda_stability, mode_lattice, syrovatskii_check, InterfaceTraces};
use cvsheet::dynamics::picard::picard_iterate;
use cvsheet::dynamics::{FluidSnapshot, State};
use cvsheet::fields::snapshot::Snapshot;
use cvsheet::fields::TorusGrid;
use cvsheet::scenario::{Observer, Record, RunSummary, Runner, Scenario};
use cvsheet::selftest::{self, Settings};
use cvsheet::{Error, Side};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(name = "cvsheet", version, about = "Spectral laboratory for MHD current-vortex sheets")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario; writes diagnostics.csv, snapshots and manifest.json.
    Simulate {
        config: PathBuf,
        /// Output directory (overrides `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the interface symbol σ²(ξ) for planar data.
    Dispersion {
        /// Half velocity jump `v1,v2`.
        #[arg(long, value_parser = pair, allow_hyphen_values = true)]
        v: [f64; 2],
        #[arg(long, value_parser = pair, allow_hyphen_values = true, default_value = "0,0")]
        hplus: [f64; 2],
        #[arg(long, value_parser = pair, allow_hyphen_values = true, default_value = "0,0")]
        hminus: [f64; 2],
        /// Mean tangential velocity `w1,w2`.
        #[arg(long, value_parser = pair, allow_hyphen_values = true, default_value = "0,0")]
        w: [f64; 2],
        #[arg(long, default_value_t = 3)]
        kmax: i64,
    },
    /// Stability margin and Syrovatskii flags of planar data or a scenario.
    StabilityCheck {
        /// Read the planar state and c0 from a scenario file.
        #[arg(long, conflicts_with_all = ["v", "hplus", "hminus"])]
        config: Option<PathBuf>,
        #[arg(long, value_parser = pair, allow_hyphen_values = true)]
        v: Option<[f64; 2]>,
        #[arg(long, value_parser = pair, allow_hyphen_values = true)]
        hplus: Option<[f64; 2]>,
        #[arg(long, value_parser = pair, allow_hyphen_values = true)]
        hminus: Option<[f64; 2]>,
        #[arg(long, default_value_t = 0.1)]
        c0: f64,
    },
    /// Flat-strip oracle and structural checks of the DN operators.
    DnoSelftest,
    /// Run the acceptance criteria.
    Selftest {
        /// Criterion key substring or number.
        #[arg(long)]
        filter: Option<String>,
        /// Divide every tolerance by this factor.
        #[arg(long, default_value_t = 1.0)]
        tighten: f64,
    },
}

fn pair(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("expected `a,b`, got `{s}`"));
    }
    let p = |x: &str| x.parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    Ok([p(parts[0])?, p(parts[1])?])
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Ok(n) = std::env::var("CVSHEET_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    log::warn!("CVSHEET_THREADS: {e}");
                }
            }
            _ => log::warn!("CVSHEET_THREADS must be a positive integer, got `{n}`"),
        }
    }
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Simulate { config, out } => return simulate(&config, out),
        Cmd::Dispersion { v, hplus, hminus, w, kmax } => {
            print_dispersion(w, v, hplus, hminus, kmax);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::StabilityCheck { config, v, hplus, hminus, c0 } => stability_check(config, v, hplus, hminus, c0),
        Cmd::DnoSelftest => Ok(run_selftest(Settings { filter: Some("dno".into()), ..Default::default() })),
        Cmd::Selftest { filter, tighten } => Ok(run_selftest(Settings { filter, tighten })),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(EXIT_CONFIG)
    })
}

fn print_dispersion(w: [f64; 2], v: [f64; 2], hp: [f64; 2], hm: [f64; 2], kmax: i64) {
    let table = dispersion(w, v, hp, hm, &mode_lattice(kmax));
    println!("xi1,xi2,sigma2,class,growth_rate,frequency,doppler");
    for r in &table.records {
        println!("{},{},{:.12e},{:?},{:.12e},{:.12e},{:.12e}", r.xi[0], r.xi[1], r.sigma2, r.class, r.growth_rate, r.frequency, r.doppler);
    }
    println!("# max sigma2 {:.12e}", table.max_sigma2());
}

fn stability_check(config: Option<PathBuf>, v: Option<[f64; 2]>, hp: Option<[f64; 2]>, hm: Option<[f64; 2]>, c0: f64) -> anyhow::Result<ExitCode> {
    let (traces, c0): (InterfaceTraces, f64) = match config {
        Some(path) => {
            let cfg = Config::load(&path).with_context(|| format!("reading {}", path.display()))?;
            let scn = Scenario::from_config(&cfg)?;
            (scn.planar_traces(), cfg.c0)
        }
        None => {
            let v = v.unwrap_or([0.0, 0.0]);
            let (hp, hm) = (hp.unwrap_or([0.0, 0.0]), hm.unwrap_or([0.0, 0.0]));
            let g = TorusGrid::new(4, 4)?;
            (InterfaceTraces::planar(g, [v[0], v[1], 0.0], [-v[0], -v[1], 0.0], [hp[0], hp[1], 0.0], [hm[0], hm[1], 0.0]), c0)
        }
    };
    let r = lambda_stability(&traces);
    let at = |s: &[cvsheet::fields::TorusScalar; 3]| [s[0].values()[0], s[1].values()[0], s[2].values()[0]];
    let flags = syrovatskii_check(at(&traces.plus.u), at(&traces.minus.u), at(&traces.plus.h), at(&traces.minus.h));
    println!("lambda_min {:.12e}", r.lambda_min);
    println!("lambda_s2_min {:.12e}", r.lambda_s2_min);
    println!("lambda_half_min {:.12e}", r.lambda_half_min);
    println!("worst_direction {:.6},{:.6}", r.worst_direction[0], r.worst_direction[1]);
    println!("jump_bounded {}", flags.jump_bounded);
    println!("cross_bounded {}", flags.cross_bounded);
    println!("weak_strict {}", flags.weak_strict);
    println!("strong {}", flags.strong);
    let ok = r.lambda_min >= 2.0 * c0;
    println!("margin_ok {} (lambda_min >= 2c0 = {})", ok, 2.0 * c0);
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn run_selftest(settings: Settings) -> ExitCode {
    let outcomes = selftest::run(&settings, |o| println!("{}", o.line()));
    let failed: Vec<_> = outcomes.iter().filter(|o| !o.pass).map(|o| o.criterion.key).collect();
    println!("selftest: {} passed, {} failed{}", outcomes.len() - failed.len(), failed.len(), if failed.is_empty() { String::new() } else { format!(" ({})", failed.join(", ")) });
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

/// Writes the CSV time series and periodic snapshots.
struct Files {
    dir: PathBuf,
    csv: BufWriter<File>,
    written: Vec<PathBuf>,
    error: Option<std::io::Error>,
}

impl Files {
    fn new(dir: &Path) -> std::io::Result<Self> {
        std::fs::create_dir_all(dir.join("snapshots"))?;
        let path = dir.join("diagnostics.csv");
        let mut csv = BufWriter::new(File::create(&path)?);
        writeln!(csv, "{}", Record::HEADER)?;
        Ok(Self { dir: dir.to_path_buf(), csv, written: vec![path], error: None })
    }

    fn snapshot_files(&mut self, step: usize, state: &State, snap: &FluidSnapshot) -> cvsheet::Result<()> {
        let dir = self.dir.join("snapshots");
        let mut put = |s: Snapshot| -> cvsheet::Result<()> {
            let p = dir.join(format!("{step:06}_{}.cvs1", s.name));
            s.write(&p)?;
            self.written.push(p);
            Ok(())
        };
        put(Snapshot::from_torus("f", &state.iface.f))?;
        put(Snapshot::from_torus("theta", &state.iface.theta))?;
        for s in Side::BOTH {
            let f = snap.side(s);
            for (c, name) in ["1", "2", "3"].iter().enumerate() {
                put(Snapshot::from_strip(&format!("u{name}_{}", s.name()), &f.u.c[c]))?;
                put(Snapshot::from_strip(&format!("h{name}_{}", s.name()), &f.h.c[c]))?;
            }
        }
        Ok(())
    }
}

impl Observer for Files {
    fn record(&mut self, r: &Record) {
        if let Err(e) = writeln!(self.csv, "{}", r.csv_row()) {
            self.error.get_or_insert(e);
        }
    }

    fn snapshot(&mut self, step: usize, state: &State, snap: &FluidSnapshot) {
        if let Err(e) = self.snapshot_files(step, state, snap) {
            self.error.get_or_insert(std::io::Error::other(e.to_string()));
        }
    }
}

fn record_json(r: &Record) -> Value {
    json!({
        "step": r.step,
        "t": r.t,
        "amplitude": r.amplitude,
        "lambda_min": r.lambda_min,
        "energy": r.energy,
        "es": r.es.es,
        "mean_f": r.mean_f,
        "mean_theta": r.mean_theta,
        "h_normal": r.h_normal,
        "normal_jump": r.normal_jump,
        "lid_flux": r.lid_flux,
        "residual": r.residual.map(|x| json!({"momentum": x.momentum, "induction": x.induction, "div_omega": x.div_omega, "div_j": x.div_j})),
    })
}

fn write_manifest(dir: &Path, manifest: &Value) {
    let res = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(manifest).unwrap_or_default()));
    if let Err(e) = res {
        eprintln!("error: could not write manifest in {}: {e}", dir.display());
    }
}

fn simulate(path: &Path, out: Option<PathBuf>) -> ExitCode {
    let started = Instant::now();
    let mut manifest = json!({
        "code_version": env!("CARGO_PKG_VERSION"),
        "config_path": path.display().to_string(),
    });
    let fail = |manifest: &mut Value, dir: Option<&Path>, code: u8, cause: String| {
        eprintln!("error: {cause}");
        manifest["status"] = json!("failed");
        manifest["failure"] = json!(cause);
        manifest["wall_clock_s"] = json!(started.elapsed().as_secs_f64());
        if let Some(d) = dir {
            write_manifest(d, manifest);
        }
        ExitCode::from(code)
    };

    let cfg = match Config::load(path) {
        Ok(c) => c,
        Err(e) => return fail(&mut manifest, out.as_deref(), EXIT_CONFIG, e.to_string()),
    };
    let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
    manifest["config"] = json!(cfg.echo);
    manifest["grid"] = json!({"nx": cfg.nx, "ny": cfg.ny, "nz": cfg.nz});

    let scn = match Scenario::from_config(&cfg) {
        Ok(s) => s,
        Err(e) => return fail(&mut manifest, Some(&dir), EXIT_CONFIG, e.to_string()),
    };
    match scn.gate() {
        Ok(r) => manifest["initial_lambda_min"] = json!(r.lambda_min),
        Err(e) => return fail(&mut manifest, Some(&dir), EXIT_CONFIG, e.to_string()),
    }
    let runner = match Runner::new(&scn) {
        Ok(r) => r,
        Err(e) => {
            let code = if matches!(e, Error::SurfaceOutOfBounds { .. } | Error::SurfaceTooRough { .. }) { EXIT_CONFIG } else { EXIT_NUMERIC };
            return fail(&mut manifest, Some(&dir), code, e.to_string());
        }
    };
    let mut files = match Files::new(&dir) {
        Ok(f) => f,
        Err(e) => return fail(&mut manifest, Some(&dir), EXIT_NUMERIC, format!("output: {e}")),
    };

    let summary = runner.run(&mut files);
    if let Err(e) = files.csv.flush() {
        files.error.get_or_insert(e);
    }
    if let Some(state) = &summary.final_state {
        let p = dir.join("final_f.cvs1");
        match Snapshot::from_torus("f", &state.iface.f).write(&p).and_then(|_| {
            let q = dir.join("final_theta.cvs1");
            Snapshot::from_torus("theta", &state.iface.theta).write(&q).map(|_| q)
        }) {
            Ok(q) => files.written.extend([p, q]),
            Err(e) => {
                files.error.get_or_insert(std::io::Error::other(e.to_string()));
            }
        }
    }

    let picard = if cfg.picard_iterations > 0 && summary.failure.is_none() {
        Some(scn.initial_state().and_then(|s0| picard_iterate(&runner.model, &s0, cfg.t_end, cfg.picard_steps, cfg.picard_iterations)))
    } else {
        None
    };

    fill_summary(&mut manifest, &summary);
    let mut code = ExitCode::SUCCESS;
    match picard {
        Some(Ok((_, inc))) => manifest["picard_increments"] = json!(inc),
        Some(Err(e)) => {
            manifest["picard_error"] = json!(e.to_string());
            code = ExitCode::from(EXIT_NUMERIC);
        }
        None => {}
    }
    manifest["outputs"] = json!(files.written.iter().map(|p| p.display().to_string()).collect::<Vec<_>>());
    manifest["wall_clock_s"] = json!(started.elapsed().as_secs_f64());
    if let Some(e) = &files.error {
        manifest["output_error"] = json!(e.to_string());
        code = ExitCode::from(EXIT_NUMERIC);
    }
    if let Some((step, e)) = &summary.failure {
        eprintln!("error: step {step}: {e}");
        code = ExitCode::from(EXIT_NUMERIC);
    } else if !summary.breaches.is_empty() {
        for b in &summary.breaches {
            eprintln!("invariant breach: {b}");
        }
        code = ExitCode::from(EXIT_NUMERIC);
    }
    manifest["status"] = json!(if code == ExitCode::SUCCESS { "ok" } else { "failed" });
    write_manifest(&dir, &manifest);
    if let Some(fit) = &summary.fit {
        println!("growth rate {:.6} (predicted {:.6})", fit.rate, summary.sigma2.max(0.0).sqrt());
    }
    println!("{} steps to t = {:.4}; output in {}", summary.steps, summary.t, dir.display());
    code
}

fn fill_summary(manifest: &mut Value, s: &RunSummary) {
    manifest["steps"] = json!(s.steps);
    manifest["t_final"] = json!(s.t);
    manifest["sigma2"] = json!(s.sigma2);
    manifest["predicted_growth_rate"] = json!(s.sigma2.max(0.0).sqrt());
    manifest["growth_fit"] = match &s.fit {
        Some(f) => json!({"rate": f.rate, "start": f.start, "end": f.end, "residual": f.residual}),
        None => Value::Null,
    };
    manifest["breaches"] = json!(s.breaches);
    if let Some((step, e)) = &s.failure {
        manifest["failure"] = json!({"step": step, "cause": e.to_string()});
    }
    manifest["final"] = s.last.as_ref().map(record_json).unwrap_or(Value::Null);
}
