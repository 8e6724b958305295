//! Run configuration: a TOML file whose keys are read in flattened dotted
//! form (`geometry.c0`, `time.dt`, ...). Either `[geometry]` tables or
//! dotted keys at top level may be used.
//!
//! ```toml
//! name = "kh_unstable"
//! scenario = "planar_kh"        # planar_kh | current_sheet | magnetized_kh | custom
//! seed = 1
//! grid.nx = 32
//! grid.ny = 32
//! geometry.Nz = 17
//! geometry.c0 = 0.1             # required
//! time.dt = 0.05
//! time.t_end = 3.0
//! flow.v = [1.0, 0.0]
//! perturbation.mode = [1, 0]
//! perturbation.amplitude = 1e-6
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use toml::Value;

use crate::{Error, Result};

/// Every key the parser accepts.
pub const KEYS: &[&str] = &[
    "name",
    "scenario",
    "seed",
    "grid.nx",
    "grid.ny",
    "geometry.Nz",
    "geometry.c0",
    "geometry.delta0",
    "elliptic.tol",
    "elliptic.max_iter",
    "time.dt",
    "time.t_end",
    "time.cfl_safety",
    "picard.iterations",
    "picard.steps",
    "flow.v",
    "flow.w",
    "field.hplus",
    "field.hminus",
    "perturbation.mode",
    "perturbation.amplitude",
    "perturbation.noise",
    "perturbation.theta",
    "gate.stability",
    "custom.f",
    "custom.theta",
    "diagnostics.s",
    "diagnostics.residuals",
    "output.dir",
    "output.snapshot_every",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    /// Pure vortex sheet, `h± = 0` unless given.
    PlanarKh,
    /// `[u] = 0` with non-parallel fields.
    CurrentSheet,
    /// Velocity jump and fields both present.
    MagnetizedKh,
    /// Initial interface read from CVS1 files.
    Custom,
}

impl ScenarioKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "planar_kh" => Self::PlanarKh,
            "current_sheet" => Self::CurrentSheet,
            "magnetized_kh" => Self::MagnetizedKh,
            "custom" => Self::Custom,
            other => return Err(Error::Config(format!("unknown scenario `{other}`"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::PlanarKh => "planar_kh",
            Self::CurrentSheet => "current_sheet",
            Self::MagnetizedKh => "magnetized_kh",
            Self::Custom => "custom",
        }
    }
}

/// How `θ0` is chosen for the perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaInit {
    /// Pure growing mode when unstable, `D_t f = 0` otherwise.
    Mode,
    Zero,
}

#[derive(Debug, Clone)]
pub struct Config {
    pub name: String,
    pub scenario: ScenarioKind,
    pub seed: u64,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub c0: f64,
    pub delta0: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub dt: f64,
    pub t_end: f64,
    pub cfl_safety: f64,
    pub picard_iterations: usize,
    pub picard_steps: usize,
    /// Half velocity jump, `u± = w ± v`.
    pub v: [f64; 2],
    pub w: [f64; 2],
    pub h_plus: [f64; 2],
    pub h_minus: [f64; 2],
    pub mode: [i64; 2],
    pub amplitude: f64,
    /// Seeded random perturbation of the low modes.
    pub noise: f64,
    pub theta_init: ThetaInit,
    pub stability_gate: bool,
    pub custom_f: Option<PathBuf>,
    pub custom_theta: Option<PathBuf>,
    pub sobolev_s: f64,
    pub residuals: bool,
    pub output_dir: PathBuf,
    pub snapshot_every: usize,
    /// The flattened key/value pairs as read.
    pub echo: BTreeMap<String, String>,
}

fn flatten(prefix: &str, v: &Value, out: &mut BTreeMap<String, Value>) {
    match v {
        Value::Table(t) => {
            for (k, x) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        other => {
            out.insert(prefix.to_string(), other.clone());
        }
    }
}

struct Reader {
    map: BTreeMap<String, Value>,
}

impl Reader {
    fn get(&self, key: &str) -> Option<&Value> {
        self.map.get(key)
    }

    fn float(&self, key: &str, default: Option<f64>) -> Result<f64> {
        match self.get(key) {
            Some(Value::Float(x)) => Ok(*x),
            Some(Value::Integer(i)) => Ok(*i as f64),
            Some(other) => Err(Error::Config(format!("`{key}` must be a number, got {other}"))),
            None => default.ok_or_else(|| Error::MissingKey(key.to_string())),
        }
    }

    fn uint(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            Some(Value::Integer(i)) if *i >= 0 => Ok(*i as usize),
            Some(other) => Err(Error::Config(format!("`{key}` must be a non-negative integer, got {other}"))),
            None => Ok(default),
        }
    }

    fn boolean(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            Some(Value::Boolean(b)) => Ok(*b),
            Some(other) => Err(Error::Config(format!("`{key}` must be true or false, got {other}"))),
            None => Ok(default),
        }
    }

    fn string(&self, key: &str) -> Result<Option<String>> {
        match self.get(key) {
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(other) => Err(Error::Config(format!("`{key}` must be a string, got {other}"))),
            None => Ok(None),
        }
    }

    fn pair(&self, key: &str, default: [f64; 2]) -> Result<[f64; 2]> {
        let Some(v) = self.get(key) else { return Ok(default) };
        let bad = || Error::Config(format!("`{key}` must be a list of two numbers, got {v}"));
        let Value::Array(a) = v else { return Err(bad()) };
        if a.len() != 2 {
            return Err(bad());
        }
        let num = |x: &Value| match x {
            Value::Float(f) => Ok(*f),
            Value::Integer(i) => Ok(*i as f64),
            _ => Err(bad()),
        };
        Ok([num(&a[0])?, num(&a[1])?])
    }
}

impl Config {
    /// Parse configuration text; `base` resolves relative paths.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let root: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        let mut map = BTreeMap::new();
        flatten("", &Value::Table(root), &mut map);
        if let Some(k) = map.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(Error::Config(format!("unknown key `{k}`")));
        }
        let echo = map.iter().map(|(k, v)| (k.clone(), v.to_string())).collect();
        let r = Reader { map };

        let scenario = ScenarioKind::parse(&r.string("scenario")?.unwrap_or_else(|| "planar_kh".into()))?;
        let path = |key: &str| -> Result<Option<PathBuf>> { Ok(r.string(key)?.map(|s| base.join(s))) };
        let theta_init = match r.string("perturbation.theta")?.as_deref() {
            None | Some("mode") => ThetaInit::Mode,
            Some("zero") => ThetaInit::Zero,
            Some(other) => return Err(Error::Config(format!("`perturbation.theta` must be \"mode\" or \"zero\", got `{other}`"))),
        };
        let (v_default, hp_default, hm_default) = match scenario {
            ScenarioKind::PlanarKh => ([1.0, 0.0], [0.0, 0.0], [0.0, 0.0]),
            ScenarioKind::CurrentSheet => ([0.0, 0.0], [1.0, 0.0], [0.0, 1.0]),
            ScenarioKind::MagnetizedKh | ScenarioKind::Custom => ([0.5, 0.0], [1.0, 0.3], [0.2, 1.0]),
        };
        let mode = r.pair("perturbation.mode", [1.0, 0.0])?;
        if mode.iter().any(|m| m.fract() != 0.0) {
            return Err(Error::Config("`perturbation.mode` must hold integers".into()));
        }
        let nx = r.uint("grid.nx", 32)?;
        let cfg = Self {
            name: r.string("name")?.unwrap_or_else(|| scenario.name().into()),
            scenario,
            seed: r.uint("seed", 0)? as u64,
            nx,
            ny: r.uint("grid.ny", nx)?,
            nz: r.uint("geometry.Nz", 17)?,
            c0: r.float("geometry.c0", None)?,
            delta0: r.float("geometry.delta0", Some(0.1))?,
            tol: r.float("elliptic.tol", Some(1e-10))?,
            max_iter: r.uint("elliptic.max_iter", 500)?,
            dt: r.float("time.dt", Some(0.05))?,
            t_end: r.float("time.t_end", Some(1.0))?,
            cfl_safety: r.float("time.cfl_safety", Some(0.5))?,
            picard_iterations: r.uint("picard.iterations", 0)?,
            picard_steps: r.uint("picard.steps", 4)?,
            v: r.pair("flow.v", v_default)?,
            w: r.pair("flow.w", [0.0, 0.0])?,
            h_plus: r.pair("field.hplus", hp_default)?,
            h_minus: r.pair("field.hminus", hm_default)?,
            mode: [mode[0] as i64, mode[1] as i64],
            amplitude: r.float("perturbation.amplitude", Some(1e-6))?,
            noise: r.float("perturbation.noise", Some(0.0))?,
            theta_init,
            stability_gate: r.boolean("gate.stability", scenario != ScenarioKind::PlanarKh)?,
            custom_f: path("custom.f")?,
            custom_theta: path("custom.theta")?,
            sobolev_s: r.float("diagnostics.s", Some(1.0))?,
            residuals: r.boolean("diagnostics.residuals", false)?,
            output_dir: r.string("output.dir")?.map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out")),
            snapshot_every: r.uint("output.snapshot_every", 0)?,
            echo,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.nx < 4 || self.ny < 4 || self.nx % 2 != 0 || self.ny % 2 != 0 {
            return bad(format!("grid must be even and at least 4, got {}x{}", self.nx, self.ny));
        }
        if self.nz < 4 {
            return bad(format!("geometry.Nz must be at least 4, got {}", self.nz));
        }
        if !(self.c0 > 0.0 && self.c0 < 1.0) {
            return bad(format!("geometry.c0 must lie in (0, 1), got {}", self.c0));
        }
        for (k, x) in [("geometry.delta0", self.delta0), ("elliptic.tol", self.tol), ("time.dt", self.dt), ("time.t_end", self.t_end), ("time.cfl_safety", self.cfl_safety)] {
            if !(x.is_finite() && x > 0.0) {
                return bad(format!("`{k}` must be positive, got {x}"));
            }
        }
        if !(self.amplitude.is_finite() && self.noise.is_finite() && self.noise >= 0.0) {
            return bad("perturbation amplitude and noise must be finite, noise non-negative".into());
        }
        if self.scenario == ScenarioKind::Custom && self.custom_f.is_none() {
            return Err(Error::MissingKey("custom.f".into()));
        }
        if self.picard_iterations > 0 && self.picard_steps == 0 {
            return bad("picard.steps must be positive".into());
        }
        Ok(())
    }
}
