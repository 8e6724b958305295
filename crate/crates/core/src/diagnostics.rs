//! Stability margin, planar stability inequalities, dispersion tables,
//! the interface energy functional and growth-rate fitting.

use crate::fields::{SobolevIndex, TorusGrid, TorusScalar};
use crate::{Error, Result};

/// Interface traces of one side: `u`, `h` as physical 3-vectors.
#[derive(Debug, Clone)]
pub struct SideTraces {
    pub u: [TorusScalar; 3],
    pub h: [TorusScalar; 3],
}

/// Interface traces of both sides and the slope of the interface.
#[derive(Debug, Clone)]
pub struct InterfaceTraces {
    pub plus: SideTraces,
    pub minus: SideTraces,
    /// `(∂1f, ∂2f)`.
    pub slope: [TorusScalar; 2],
}

impl InterfaceTraces {
    pub fn grid(&self) -> TorusGrid {
        self.slope[0].grid()
    }

    /// Spatially constant traces over a flat interface.
    pub fn planar(grid: TorusGrid, u_plus: [f64; 3], u_minus: [f64; 3], h_plus: [f64; 3], h_minus: [f64; 3]) -> Self {
        let c = |v: [f64; 3]| v.map(|x| TorusScalar::constant(grid, x));
        Self {
            plus: SideTraces { u: c(u_plus), h: c(h_plus) },
            minus: SideTraces { u: c(u_minus), h: c(h_minus) },
            slope: [TorusScalar::zeros(grid), TorusScalar::zeros(grid)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyrovatskiiFlags {
    /// `|[u]|² ≤ 2(|h⁺|² + |h⁻|²)`.
    pub jump_bounded: bool,
    /// `|[u]×h⁺|² + |[u]×h⁻|² ≤ 2|h⁺×h⁻|²`.
    pub cross_bounded: bool,
    /// Strict version of `cross_bounded`.
    pub weak_strict: bool,
    /// `max(|[u]×h⁺|, |[u]×h⁻|) < |h⁺×h⁻|`.
    pub strong: bool,
}

impl SyrovatskiiFlags {
    pub fn all(&self) -> bool {
        self.jump_bounded && self.cross_bounded && self.weak_strict
    }
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    /// `inf_x inf_φ (h⁺·φ)² + (h⁻·φ)² − 2(v·φ)²` over unit tangent directions.
    pub lambda_min: f64,
    /// Same infimum for `2[(h⁺·q)² + (h⁻·q)²] − ([u]·q)²`; equals `2 lambda_min`.
    pub lambda_s2_min: f64,
    /// Infimum with coefficient `½` on the velocity term instead of `2`.
    pub lambda_half_min: f64,
    /// Flags evaluated with the traces at the worst point.
    pub syrovatskii: SyrovatskiiFlags,
    pub worst_point: (usize, usize),
    /// Coordinate direction `φ` (unit in the induced metric) attaining the minimum.
    pub worst_direction: [f64; 2],
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm2(a: [f64; 3]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

pub fn syrovatskii_check(u_plus: [f64; 3], u_minus: [f64; 3], h_plus: [f64; 3], h_minus: [f64; 3]) -> SyrovatskiiFlags {
    let jump = [0, 1, 2].map(|i| u_plus[i] - u_minus[i]);
    let eps = 1e-14 * (1.0 + norm2(jump) + norm2(h_plus) + norm2(h_minus)).powi(2);
    let lhs = norm2(cross(jump, h_plus)) + norm2(cross(jump, h_minus));
    let rhs = 2.0 * norm2(cross(h_plus, h_minus));
    let hh = norm2(cross(h_plus, h_minus));
    SyrovatskiiFlags {
        jump_bounded: norm2(jump) <= 2.0 * (norm2(h_plus) + norm2(h_minus)) + eps.sqrt(),
        cross_bounded: lhs <= rhs + eps,
        weak_strict: lhs < rhs - eps,
        strong: norm2(cross(jump, h_plus)).max(norm2(cross(jump, h_minus))) < hh - eps,
    }
}

/// Smallest generalized eigenvalue of the symmetric pair `(A, G)` with `G`
/// positive definite, and a `G`-unit eigenvector.
fn min_generalized_eig(a: [[f64; 2]; 2], g: [[f64; 2]; 2]) -> (f64, [f64; 2]) {
    // det(A − λG) = 0: c2 λ² + c1 λ + c0 = 0.
    let c2 = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let c1 = -(a[0][0] * g[1][1] + a[1][1] * g[0][0] - a[0][1] * g[1][0] - a[1][0] * g[0][1]);
    let c0 = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let disc = (c1 * c1 - 4.0 * c2 * c0).max(0.0);
    let lam = if c1 < 0.0 { 2.0 * c0 / (-c1 + disc.sqrt()) } else { (-c1 - disc.sqrt()) / (2.0 * c2) };
    let m = [[a[0][0] - lam * g[0][0], a[0][1] - lam * g[0][1]], [a[1][0] - lam * g[1][0], a[1][1] - lam * g[1][1]]];
    // Null vector of m: take the row with the larger norm.
    let r = if m[0][0].hypot(m[0][1]) >= m[1][0].hypot(m[1][1]) { m[0] } else { m[1] };
    let mut v = if r[0].hypot(r[1]) < 1e-300 { [1.0, 0.0] } else { [-r[1], r[0]] };
    let n = (v[0] * (g[0][0] * v[0] + g[0][1] * v[1]) + v[1] * (g[1][0] * v[0] + g[1][1] * v[1])).sqrt();
    v = [v[0] / n, v[1] / n];
    (lam, v)
}

/// Tangential coefficients `H_i = h_i + h_3 ∂_i f` of a trace vector.
fn tangential(h: [f64; 3], slope: [f64; 2]) -> [f64; 2] {
    [h[0] + h[2] * slope[0], h[1] + h[2] * slope[1]]
}

fn pointwise_form(t: &InterfaceTraces, p: usize, vel_coeff: f64) -> ([[f64; 2]; 2], [[f64; 2]; 2]) {
    let at = |s: &[TorusScalar; 3]| [s[0].values()[p], s[1].values()[p], s[2].values()[p]];
    let slope = [t.slope[0].values()[p], t.slope[1].values()[p]];
    let hp = tangential(at(&t.plus.h), slope);
    let hm = tangential(at(&t.minus.h), slope);
    let (up, um) = (at(&t.plus.u), at(&t.minus.u));
    let v = tangential([0, 1, 2].map(|i| 0.5 * (up[i] - um[i])), slope);
    let mut a = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            a[i][j] = hp[i] * hp[j] + hm[i] * hm[j] - vel_coeff * v[i] * v[j];
        }
    }
    let g = [[1.0 + slope[0] * slope[0], slope[0] * slope[1]], [slope[0] * slope[1], 1.0 + slope[1] * slope[1]]];
    (a, g)
}

/// Stability margin over the interface: for each grid point the infimum
/// over unit tangent directions is the smallest eigenvalue of the 2x2 form
/// relative to the induced metric; the report carries the global minimum.
pub fn lambda_stability(t: &InterfaceTraces) -> StabilityReport {
    let grid = t.grid();
    let mut best = (f64::INFINITY, 0usize, [1.0, 0.0]);
    let mut half = f64::INFINITY;
    for p in 0..grid.len() {
        let (a, g) = pointwise_form(t, p, 2.0);
        let (lam, dir) = min_generalized_eig(a, g);
        if lam < best.0 {
            best = (lam, p, dir);
        }
        let (a, g) = pointwise_form(t, p, 0.5);
        half = half.min(min_generalized_eig(a, g).0);
    }
    let p = best.1;
    let at = |s: &[TorusScalar; 3]| [s[0].values()[p], s[1].values()[p], s[2].values()[p]];
    let syrovatskii = syrovatskii_check(at(&t.plus.u), at(&t.minus.u), at(&t.plus.h), at(&t.minus.h));
    let s2 = {
        // Direct evaluation on the minimizing tangent q.
        let slope = [t.slope[0].values()[p], t.slope[1].values()[p]];
        let phi = best.2;
        let q = [phi[0], phi[1], slope[0] * phi[0] + slope[1] * phi[1]];
        let dot = |a: [f64; 3]| a[0] * q[0] + a[1] * q[1] + a[2] * q[2];
        let (up, um) = (at(&t.plus.u), at(&t.minus.u));
        let jump = [0, 1, 2].map(|i| up[i] - um[i]);
        2.0 * (dot(at(&t.plus.h)).powi(2) + dot(at(&t.minus.h)).powi(2)) - dot(jump).powi(2)
    };
    StabilityReport {
        lambda_min: best.0,
        lambda_s2_min: s2,
        lambda_half_min: half,
        syrovatskii,
        worst_point: (p / grid.ny, p % grid.ny),
        worst_direction: best.2,
    }
}

/// Margin by sampling `n` directions on the half circle; never below the
/// closed form.
pub fn lambda_sampled(t: &InterfaceTraces, n: usize) -> f64 {
    let grid = t.grid();
    let mut best = f64::INFINITY;
    for p in 0..grid.len() {
        let (a, g) = pointwise_form(t, p, 2.0);
        for k in 0..n {
            let th = std::f64::consts::PI * k as f64 / n as f64;
            let v = [th.cos(), th.sin()];
            let q = |m: [[f64; 2]; 2]| v[0] * (m[0][0] * v[0] + m[0][1] * v[1]) + v[1] * (m[1][0] * v[0] + m[1][1] * v[1]);
            best = best.min(q(a) / q(g));
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Stable,
    Neutral,
    Unstable,
}

#[derive(Debug, Clone, Copy)]
pub struct DispersionRecord {
    pub xi: [f64; 2],
    pub sigma2: f64,
    pub class: Classification,
    /// `√max(0, σ²)`.
    pub growth_rate: f64,
    /// `√max(0, −σ²)`: angular frequency in the frame moving with `w`.
    pub frequency: f64,
    /// `w·ξ`: Doppler shift of the frequency.
    pub doppler: f64,
}

#[derive(Debug, Clone)]
pub struct DispersionTable {
    pub records: Vec<DispersionRecord>,
}

impl DispersionTable {
    pub fn max_sigma2(&self) -> f64 {
        self.records.iter().map(|r| r.sigma2).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `σ²(ξ) = (v·ξ)² − ½((h⁺·ξ)² + (h⁻·ξ)²)`.
pub fn symbol(v: [f64; 2], h_plus: [f64; 2], h_minus: [f64; 2], xi: [f64; 2]) -> f64 {
    let d = |a: [f64; 2]| a[0] * xi[0] + a[1] * xi[1];
    d(v).powi(2) - 0.5 * (d(h_plus).powi(2) + d(h_minus).powi(2))
}

/// Planar dispersion relation. `v` is half the velocity jump, `w` the mean
/// tangential velocity; the interface obeys `(∂t + w·∇)² f = σ²(D) f`.
pub fn dispersion(w: [f64; 2], v: [f64; 2], h_plus: [f64; 2], h_minus: [f64; 2], modes: &[[f64; 2]]) -> DispersionTable {
    let records = modes
        .iter()
        .map(|&xi| {
            let s2 = symbol(v, h_plus, h_minus, xi);
            let scale = 1e-12 * (1.0 + xi[0] * xi[0] + xi[1] * xi[1]) * (1.0 + v[0].hypot(v[1]) + h_plus[0].hypot(h_plus[1]) + h_minus[0].hypot(h_minus[1])).powi(2);
            let class = if s2 > scale {
                Classification::Unstable
            } else if s2 < -scale {
                Classification::Stable
            } else {
                Classification::Neutral
            };
            DispersionRecord {
                xi,
                sigma2: s2,
                class,
                growth_rate: s2.max(0.0).sqrt(),
                frequency: (-s2).max(0.0).sqrt(),
                doppler: w[0] * xi[0] + w[1] * xi[1],
            }
        })
        .collect();
    DispersionTable { records }
}

/// All lattice modes `0 < |ξ|∞ ≤ kmax`.
pub fn mode_lattice(kmax: i64) -> Vec<[f64; 2]> {
    let mut out = vec![];
    for a in -kmax..=kmax {
        for b in -kmax..=kmax {
            if a != 0 || b != 0 {
                out.push([a as f64, b as f64]);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct EnergyReport {
    pub es: f64,
    /// `‖(∂t + w·∇)⟨∇⟩^s f‖²`.
    pub transport: f64,
    /// `‖v·∇⟨∇⟩^s f‖²` (enters with a minus sign).
    pub velocity: f64,
    /// `‖h⁺·∇⟨∇⟩^s f‖²` (enters with ½).
    pub magnetic_plus: f64,
    pub magnetic_minus: f64,
    /// `‖∂t f‖²_{H^s} + ‖f‖²_{H^{s+1}}`.
    pub reference_norm: f64,
    /// `‖∂t f‖²_{L²} + ‖f‖²_{L²}`.
    pub lower_order: f64,
    /// Observed `E_s / reference`.
    pub upper_ratio: f64,
    /// Observed `(E_s + lower) / reference`.
    pub lower_ratio: f64,
}

/// Interface energy with tangential `w = ½(u⁺+u⁻)`, `v = ½(u⁺−u⁻)`.
pub fn energy_es(f: &TorusScalar, theta: &TorusScalar, t: &InterfaceTraces, s: SobolevIndex) -> EnergyReport {
    let sv = s.value();
    let bracket = |g: &TorusScalar| g.real_multiplier(|kx, ky| (1.0 + kx * kx + ky * ky).powf(0.5 * sv));
    let fs = bracket(f);
    let ts = bracket(theta);
    let [d1, d2] = fs.grad();
    let tangent = |a: &TorusScalar, b: &TorusScalar| d1.mul(a).add(&d2.mul(b));
    let half = |a: &TorusScalar, b: &TorusScalar, sg: f64| a.zip_with(b, |x, y| 0.5 * (x + sg * y));
    let (pu, mu) = (&t.plus.u, &t.minus.u);
    let w = [half(&pu[0], &mu[0], 1.0), half(&pu[1], &mu[1], 1.0)];
    let v = [half(&pu[0], &mu[0], -1.0), half(&pu[1], &mu[1], -1.0)];
    let sq = |g: &TorusScalar| g.dot(g);
    let transport = sq(&ts.add(&tangent(&w[0], &w[1])));
    let velocity = sq(&tangent(&v[0], &v[1]));
    let magnetic_plus = sq(&tangent(&t.plus.h[0], &t.plus.h[1]));
    let magnetic_minus = sq(&tangent(&t.minus.h[0], &t.minus.h[1]));
    let es = transport - velocity + 0.5 * magnetic_plus + 0.5 * magnetic_minus;
    let reference_norm = theta.sobolev_norm(s).powi(2) + f.sobolev_norm(SobolevIndex::new(sv + 1.0).expect("valid index")).powi(2);
    let lower_order = sq(theta) + sq(f);
    let (upper_ratio, lower_ratio) = if reference_norm > 0.0 {
        (es / reference_norm, (es + lower_order) / reference_norm)
    } else {
        (0.0, 0.0)
    };
    EnergyReport { es, transport, velocity, magnetic_plus, magnetic_minus, reference_norm, lower_order, upper_ratio, lower_ratio }
}

#[derive(Debug, Clone, Copy)]
pub struct GrowthFit {
    pub rate: f64,
    pub intercept: f64,
    /// Index range `[start, end)` of the fitted window.
    pub start: usize,
    pub end: usize,
    /// Largest relative deviation of the samples from the fit in the window.
    pub residual: f64,
}

/// Largest relative deviation accepted inside a fit window.
pub const FIT_RESIDUAL: f64 = 0.02;

/// Log-linear least squares over the longest window (at least half the
/// series and at least 10 samples) whose samples stay within 2% of the fit.
pub fn growth_rate_fit(t: &[f64], amp: &[f64]) -> Result<GrowthFit> {
    let n = t.len();
    if n != amp.len() {
        return Err(Error::NoLinearWindow(format!("{} times but {} amplitudes", n, amp.len())));
    }
    if n < 10 {
        return Err(Error::NoLinearWindow(format!("need at least 10 samples, got {n}")));
    }
    if let Some(i) = amp.iter().position(|a| !(a.is_finite() && *a > 0.0)) {
        return Err(Error::NoLinearWindow(format!("amplitude at sample {i} is not positive")));
    }
    let y: Vec<f64> = amp.iter().map(|a| a.ln()).collect();
    let min_len = 10.max(n.div_ceil(2));
    let fit = |a: usize, b: usize| {
        let m = (b - a) as f64;
        let (st, sy) = (t[a..b].iter().sum::<f64>(), y[a..b].iter().sum::<f64>());
        let (mt, my) = (st / m, sy / m);
        let (mut sxx, mut sxy) = (0.0, 0.0);
        for k in a..b {
            sxx += (t[k] - mt).powi(2);
            sxy += (t[k] - mt) * (y[k] - my);
        }
        let rate = sxy / sxx;
        let intercept = my - rate * mt;
        let res = (a..b).map(|k| ((y[k] - intercept - rate * t[k]).exp() - 1.0).abs()).fold(0.0, f64::max);
        (rate, intercept, res)
    };
    for len in (min_len..=n).rev() {
        let mut best: Option<GrowthFit> = None;
        for a in 0..=(n - len) {
            let (rate, intercept, residual) = fit(a, a + len);
            if residual <= FIT_RESIDUAL && best.is_none_or(|b| residual < b.residual) {
                best = Some(GrowthFit { rate, intercept, start: a, end: a + len, residual });
            }
        }
        if let Some(b) = best {
            return Ok(b);
        }
    }
    Err(Error::NoLinearWindow("no window is log-linear within 2%; use a smaller perturbation".into()))
}
