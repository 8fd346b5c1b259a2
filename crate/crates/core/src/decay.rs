//! Kernel-level L¹→L^∞ norms of |x|^{−θg} e^{−itH} |x|^{−θg} and of the
//! heat semigroup, the suprema over the regions z ≥ 1 and z < 1, and
//! power-law fits of the decay in t.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angular::SpherePoint;
use crate::error::{Error, Result};
use crate::kernel::{KernelSeries, Which};

/// Relative level-to-level change below which a supremum counts as converged.
pub const CONVERGENCE_DELTA: f64 = 0.01;

pub const DEFAULT_TIMES: [f64; 7] = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_nodes: usize,
    pub r_max: f64,
    pub angular_nodes: usize,
    pub refinement_levels: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            r_nodes: 16,
            r_max: 10f64.sqrt(),
            angular_nodes: 16,
            refinement_levels: 3,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.r_nodes < 8 || self.angular_nodes < 8 {
            return Err(Error::Config(format!(
                "grid needs at least 8 radial and 8 angular nodes (got {} and {})",
                self.r_nodes, self.angular_nodes
            )));
        }
        if self.refinement_levels == 0 || self.refinement_levels > 8 {
            return Err(Error::Config(format!(
                "refinement levels must lie in 1..=8, got {}",
                self.refinement_levels
            )));
        }
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return Err(Error::Config(format!("r_max must be positive, got {}", self.r_max)));
        }
        Ok(())
    }

    /// Largest rescaled product |x||y| the grid reaches.
    pub fn z_max(&self) -> f64 {
        self.r_max * self.r_max
    }

    fn finest_radial(&self) -> usize {
        (self.r_nodes - 1) * (1 << self.refinement_levels) + 1
    }

    fn r_min(&self) -> f64 {
        self.r_max * 0.5f64.powi(self.refinement_levels as i32)
    }

    /// Ratio of neighbouring radii on the finest level.
    fn ratio(&self) -> f64 {
        2f64.powf(self.refinement_levels as f64 / (self.finest_radial() - 1) as f64)
    }

    /// Positive radii of the finest level, geometric on [r_max 2^{−L}, r_max].
    fn radii(&self) -> Vec<f64> {
        let n = self.finest_radial();
        let l = self.refinement_levels as f64;
        (0..n)
            .map(|i| self.r_max * 2f64.powf(l * (i as f64 / (n - 1) as f64 - 1.0)))
            .collect()
    }

    fn finest_angular(&self) -> usize {
        self.angular_nodes << self.refinement_levels
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// One supremum on rescaled variables, then the closed-form t factor.
    #[default]
    Scaling,
    /// The supremum recomputed at every t on a fixed physical grid.
    Honest,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Scaling => "scaling",
            Mode::Honest => "honest",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scaling" => Ok(Mode::Scaling),
            "honest" => Ok(Mode::Honest),
            _ => Err(Error::Config(format!("unknown mode '{s}' (expected scaling|honest)"))),
        }
    }
}

impl Mode {
    pub fn default_slope_tolerance(self) -> f64 {
        match self {
            Mode::Scaling => 1e-12,
            Mode::Honest => 0.05,
        }
    }
}

/// Angle pairs (ω_x, ω_y) with the coarsest refinement level holding each.
struct AngleSet {
    /// row-major, one row of shell products per pair
    products: Vec<Complex64>,
    shells: usize,
    level: Vec<usize>,
}

fn coarsest_level(j: usize, levels: usize) -> usize {
    if j == 0 {
        0
    } else {
        levels - (j.trailing_zeros() as usize).min(levels)
    }
}

fn angle_set(ks: &KernelSeries, grid: &GridSpec) -> AngleSet {
    let levels = grid.refinement_levels;
    let a = grid.finest_angular();
    let mut pairs = Vec::new();
    let mut level = Vec::new();
    match (ks.dimension(), ks.model.is_isotropic()) {
        (2, true) => {
            for j in 0..a {
                pairs.push((SpherePoint::circle(0.0), SpherePoint::circle(2.0 * PI * j as f64 / a as f64)));
                level.push(coarsest_level(j, levels));
            }
        }
        (2, false) => {
            for i in 0..a {
                for j in 0..a {
                    pairs.push((
                        SpherePoint::circle(2.0 * PI * i as f64 / a as f64),
                        SpherePoint::circle(2.0 * PI * j as f64 / a as f64),
                    ));
                    level.push(coarsest_level(i, levels).max(coarsest_level(j, levels)));
                }
            }
        }
        _ => {
            for j in 0..=a {
                pairs.push((SpherePoint::north_pole(), SpherePoint::sphere(PI * j as f64 / a as f64, 0.0)));
                level.push(coarsest_level(j, levels));
            }
        }
    }
    let products = pairs.iter().flat_map(|(x, y)| ks.angular_products(x, y)).collect();
    AngleSet {
        products,
        shells: ks.shells.len(),
        level,
    }
}

/// max over the angle pairs of each level of |Σ_s R_s P_s|.
fn angular_max(radial: &[Complex64], set: &AngleSet, levels: usize) -> Vec<f64> {
    let used = radial.iter().rposition(|r| *r != Complex64::new(0.0, 0.0)).map_or(0, |i| i + 1);
    let mut out = vec![0.0f64; levels + 1];
    for (row, &lv) in set.products.chunks_exact(set.shells).zip(&set.level) {
        let v: Complex64 = radial[..used].iter().zip(&row[..used]).map(|(r, p)| r * p).sum();
        let v = v.norm();
        for m in out.iter_mut().skip(lv) {
            *m = m.max(v);
        }
    }
    out
}

fn heat_factor(which: Which, r: f64, r2: f64) -> f64 {
    match which {
        Which::Schrodinger => 1.0,
        Which::Heat => (-0.5 * (r - r2).powi(2)).exp(),
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::Config(format!("theta must lie in [0, 1], got {theta}")));
    }
    Ok(())
}

/// A supremum at every refinement level, coarse to fine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinedConstant {
    pub value: f64,
    pub history: Vec<f64>,
    /// |C_L − C_{L−1}| / C_L
    pub delta: f64,
    pub converged: bool,
}

impl RefinedConstant {
    fn from_history(history: Vec<f64>) -> Self {
        let value = *history.last().unwrap_or(&0.0);
        let prev = if history.len() > 1 { history[history.len() - 2] } else { value };
        let delta = if value > 0.0 { (value - prev).abs() / value } else { (value - prev).abs() };
        Self {
            value,
            history,
            delta,
            converged: delta < CONVERGENCE_DELTA,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupConstants {
    pub theta: f64,
    pub which: Which,
    /// sup of z^{−θg}|kernel| over z ≥ 1
    pub c_omega1: RefinedConstant,
    /// the same over z < 1 (closure: the z → 0 limit and z = 1 included)
    pub c_omega2: RefinedConstant,
}

impl SupConstants {
    pub fn max(&self) -> f64 {
        self.c_omega1.value.max(self.c_omega2.value)
    }

    pub fn converged(&self) -> bool {
        self.c_omega1.converged && self.c_omega2.converged
    }
}

/// Suprema of z^{−θg}|K| (or |G|) over the rescaled grid, split at z = 1.
pub fn sup_constants(ks: &KernelSeries, theta: f64, grid: &GridSpec, which: Which) -> Result<SupConstants> {
    grid.validate()?;
    check_theta(theta)?;
    ks.check_certificate(grid.z_max())?;
    let levels = grid.refinement_levels;
    let r = grid.radii();
    let n = r.len();
    if !(0..=2 * (n - 1)).any(|s| (0.9..=1.1).contains(&(r[s / 2] * r[s.div_ceil(2)]))) {
        return Err(Error::Config("radial grid has no product |x||y| in [0.9, 1.1]".into()));
    }
    let set = angle_set(ks, grid);

    // per z: (z, per-level value or None when the level lacks that z)
    let samples: Vec<(f64, Vec<Option<f64>>)> = (0..=2 * (n - 1))
        .into_par_iter()
        .map(|s| -> Result<(f64, Vec<Option<f64>>)> {
            let z = r[s / 2] * r[s.div_ceil(2)];
            let radial = ks.radial_factors(z, which, theta)?;
            let ang = angular_max(&radial, &set, levels);
            let per_level = (0..=levels)
                .map(|lv| {
                    let d = 1usize << (levels - lv);
                    if s % d != 0 {
                        return None;
                    }
                    let sp = s / d;
                    Some(ang[lv] * heat_factor(which, r[d * (sp / 2)], r[d * sp.div_ceil(2)]))
                })
                .collect();
            Ok((z, per_level))
        })
        .collect::<Result<_>>()?;
    // z = 0 closes Ω₂; z = 1 (the ring |x| = |y| = 1) belongs to both closures.
    let origin = angular_max(&ks.radial_factors(0.0, which, theta)?, &set, levels);
    let interface = angular_max(&ks.radial_factors(1.0, which, theta)?, &set, levels);

    let mut c1 = interface.clone();
    let mut c2: Vec<f64> = origin.iter().zip(&interface).map(|(a, b)| a.max(*b)).collect();
    for (z, per_level) in &samples {
        let target = if *z >= 1.0 { &mut c1 } else { &mut c2 };
        for (c, v) in target.iter_mut().zip(per_level) {
            if let Some(v) = v {
                *c = c.max(*v);
            }
        }
    }
    if c1.iter().chain(&c2).any(|c| !c.is_finite()) {
        return Err(Error::Overflow {
            what: "sup_constants",
            detail: "non-finite kernel supremum".into(),
        });
    }
    Ok(SupConstants {
        theta,
        which,
        c_omega1: RefinedConstant::from_history(c1),
        c_omega2: RefinedConstant::from_history(c2),
    })
}

fn norm_exponent(ks: &KernelSeries, theta: f64) -> f64 {
    0.5 * ks.dimension() as f64 + theta * ks.model.g
}

/// (2t)^{−n/2−θg} · max(C_Ω₁, C_Ω₂).
pub fn weighted_operator_norm(ks: &KernelSeries, t: f64, theta: f64, grid: &GridSpec, which: Which) -> Result<f64> {
    check_time(t)?;
    let c = sup_constants(ks, theta, grid, which)?;
    Ok((2.0 * t).powf(-norm_exponent(ks, theta)) * c.max())
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Config(format!("time must be positive, got {t}")));
    }
    Ok(())
}

/// Fixed physical radii covering every rescaled grid of a time sweep: the
/// finest ratio of `grid`, from r_min √(2 t_min) to r_max √(2 t_max).
struct PhysicalGrid {
    rho: Vec<f64>,
}

impl PhysicalGrid {
    fn new(grid: &GridSpec, t_min: f64, t_max: f64) -> Self {
        let lo = grid.r_min() * (2.0 * t_min).sqrt();
        let hi = grid.r_max * (2.0 * t_max).sqrt();
        let q = grid.ratio();
        let count = ((hi / lo).ln() / q.ln()).ceil() as usize + 1;
        Self {
            rho: (0..count).map(|i| lo * q.powi(i as i32)).collect(),
        }
    }
}

/// The weighted norm at time t from the physical grid: rescale ρ ↦ ρ/√(2t),
/// keep the products inside the certified region, take the supremum.
fn honest_norm(
    ks: &KernelSeries,
    phys: &PhysicalGrid,
    set: &AngleSet,
    t: f64,
    theta: f64,
    grid: &GridSpec,
    which: Which,
) -> Result<f64> {
    let scale = (2.0 * t).sqrt().recip();
    let rho = &phys.rho;
    let levels = grid.refinement_levels;
    let z_cap = grid.z_max() * (1.0 + 1e-12);
    let best = (0..=2 * (rho.len() - 1))
        .into_par_iter()
        .map(|s| -> Result<f64> {
            let (a, b) = (rho[s / 2] * scale, rho[s.div_ceil(2)] * scale);
            let z = a * b;
            if z > z_cap {
                return Ok(0.0);
            }
            let radial = ks.radial_factors(z.min(ks.z_max), which, theta)?;
            Ok(angular_max(&radial, set, levels)[levels] * heat_factor(which, a, b))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok((2.0 * t).powf(-norm_exponent(ks, theta)) * best)
}

/// Least-squares slope of log(norm) against log(t), with its standard error.
pub fn fit_exponent(times: &[f64], norms: &[f64]) -> Result<(f64, f64)> {
    if times.len() != norms.len() {
        return Err(Error::Config("times and norms differ in length".into()));
    }
    if times.len() < 4 {
        return Err(Error::Config(format!("fit needs at least 4 times, got {}", times.len())));
    }
    if times.iter().chain(norms).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Domain("fit needs positive finite times and norms".into()));
    }
    let (lo, hi) = times.iter().fold((f64::INFINITY, 0.0f64), |(l, h), t| (l.min(*t), h.max(*t)));
    if hi < 10.0 * lo {
        return Err(Error::Config(format!("times must span a factor of 10, got [{lo}, {hi}]")));
    }
    let x: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    let m = x.len() as f64;
    let xm = x.iter().sum::<f64>() / m;
    let ym = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|a| (a - xm).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let slope = sxy / sxx;
    let icept = ym - slope * xm;
    let ssr: f64 = x.iter().zip(&y).map(|(a, b)| (b - icept - slope * a).powi(2)).sum();
    Ok((slope, (ssr / (m - 2.0) / sxx).sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayConfig {
    pub theta: f64,
    pub which: Which,
    pub mode: Mode,
    pub times: Vec<f64>,
    pub grid: GridSpec,
    /// Defaults to the mode's tolerance.
    pub slope_tolerance: Option<f64>,
}

impl Default for DecayConfig {
    fn default() -> Self {
        Self {
            theta: 1.0,
            which: Which::Schrodinger,
            mode: Mode::Scaling,
            times: DEFAULT_TIMES.to_vec(),
            grid: GridSpec::default(),
            slope_tolerance: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub model: String,
    pub dimension: usize,
    pub g: f64,
    pub theta: f64,
    pub which: Which,
    pub mode: Mode,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub fitted_slope: f64,
    pub slope_stderr: f64,
    pub predicted_slope: f64,
    pub slope_error: f64,
    pub slope_tolerance: f64,
    /// max over t of |norm(t) t^{n/2+θg} / (norm(t₀) t₀^{n/2+θg}) − 1|
    pub scaled_spread: f64,
    pub norms_decreasing: bool,
    pub c_omega1: RefinedConstant,
    pub c_omega2: RefinedConstant,
}

impl DecayReport {
    pub fn within_tolerance(&self) -> bool {
        self.slope_error <= self.slope_tolerance
    }

    /// Columns t, norm, predicted, theta; `predicted` continues the first
    /// norm with the predicted slope.
    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["t", "norm", "predicted", "theta"])?;
        for (t, v) in self.times.iter().zip(&self.norms) {
            let predicted = self.norms[0] * (t / self.times[0]).powf(self.predicted_slope);
            w.write_record([t.to_string(), v.to_string(), predicted.to_string(), self.theta.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Norms over the time sweep, fitted slope against −n/2 − θg, and the suprema.
pub fn decay_report(ks: &KernelSeries, cfg: &DecayConfig) -> Result<DecayReport> {
    check_theta(cfg.theta)?;
    for &t in &cfg.times {
        check_time(t)?;
    }
    if cfg.times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("times must be strictly increasing".into()));
    }
    let tol = cfg.slope_tolerance.unwrap_or_else(|| cfg.mode.default_slope_tolerance());
    if !(tol > 0.0) {
        return Err(Error::Config(format!("slope tolerance must be positive, got {tol}")));
    }
    let consts = sup_constants(ks, cfg.theta, &cfg.grid, cfg.which)?;
    let p = norm_exponent(ks, cfg.theta);
    let norms: Vec<f64> = match cfg.mode {
        Mode::Scaling => cfg.times.iter().map(|t| (2.0 * t).powf(-p) * consts.max()).collect(),
        Mode::Honest => {
            let set = angle_set(ks, &cfg.grid);
            let (t_min, t_max) = (cfg.times[0], *cfg.times.last().unwrap_or(&cfg.times[0]));
            let phys = PhysicalGrid::new(&cfg.grid, t_min, t_max);
            cfg.times
                .iter()
                .map(|&t| honest_norm(ks, &phys, &set, t, cfg.theta, &cfg.grid, cfg.which))
                .collect::<Result<_>>()?
        }
    };
    let (fitted_slope, slope_stderr) = fit_exponent(&cfg.times, &norms)?;
    let scaled: Vec<f64> = cfg.times.iter().zip(&norms).map(|(t, v)| v * t.powf(p)).collect();
    let scaled_spread = scaled.iter().map(|s| (s / scaled[0] - 1.0).abs()).fold(0.0, f64::max);
    let predicted_slope = -p;
    Ok(DecayReport {
        model: ks.model.spec.label(),
        dimension: ks.dimension(),
        g: ks.model.g,
        theta: cfg.theta,
        which: cfg.which,
        mode: cfg.mode,
        times: cfg.times.clone(),
        norms_decreasing: norms.windows(2).all(|w| w[1] < w[0]),
        norms,
        fitted_slope,
        slope_stderr,
        predicted_slope,
        slope_error: (fitted_slope - predicted_slope).abs(),
        slope_tolerance: tol,
        scaled_spread,
        c_omega1: consts.c_omega1,
        c_omega2: consts.c_omega2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolationReport {
    pub reports: Vec<DecayReport>,
    /// Fitted slopes nonincreasing in θ.
    pub monotone: bool,
}

impl InterpolationReport {
    pub fn passes(&self) -> bool {
        self.monotone && self.reports.iter().all(DecayReport::within_tolerance)
    }
}

/// One decay sweep per θ; `thetas` must contain 0 and 1.
pub fn verify_interpolation(ks: &KernelSeries, base: &DecayConfig, thetas: &[f64]) -> Result<InterpolationReport> {
    if !thetas.contains(&0.0) || !thetas.contains(&1.0) {
        return Err(Error::Config("interpolation sweep must include theta = 0 and theta = 1".into()));
    }
    let mut sorted = thetas.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let reports = sorted
        .iter()
        .map(|&theta| decay_report(ks, &DecayConfig { theta, ..base.clone() }))
        .collect::<Result<Vec<_>>>()?;
    let monotone = reports.windows(2).all(|w| w[1].fitted_slope <= w[0].fitted_slope + 1e-12);
    Ok(InterpolationReport { reports, monotone })
}
