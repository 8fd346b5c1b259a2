//! e^{−itH} and e^{−tH} applied to sampled data through the kernel
//! representation, plus a Crank–Nicolson reference solver for the radial
//! inverse-square heat flow in three dimensions.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angular::{SpherePoint, SphereRule};
use crate::error::{Error, Result};
use crate::kernel::{KernelSeries, SpacePoint, Which};
use crate::quadrature::GaussLegendre;

/// Radial profile of an initial datum, as a function of r = |y|.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// e^{−r²/w²}, cut off at `cutoff`.
    Gaussian { width: f64, cutoff: f64 },
    /// (1 − ((r − c)/h)²)^p on |r − c| < h.
    Bump { center: f64, half_width: f64, power: i32 },
    /// Barycentric interpolation through samples on Chebyshev points of
    /// [r_min, r_max]; zero outside.
    Samples { r_min: f64, r_max: f64, values: Vec<Complex64> },
}

/// Angular modulation of the datum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AngularFactor {
    #[default]
    Isotropic,
    /// 1 + ε cos(kθ) on S¹, 1 + ε cos(k·polar) on S².
    Cosine { k: i64, eps: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Smoothness {
    #[default]
    Smooth,
    Rough,
}

/// u₀(y) = amplitude · profile(|y|/dilation) · angular(y/|y|).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialDatum {
    pub dimension: usize,
    pub profile: Profile,
    #[serde(default)]
    pub angular: AngularFactor,
    #[serde(default = "one")]
    pub amplitude: Complex64,
    #[serde(default = "unit")]
    pub dilation: f64,
    #[serde(default)]
    pub smoothness: Smoothness,
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn unit() -> f64 {
    1.0
}

fn chebyshev_points(n: usize, a: f64, b: f64) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..n)
        .map(|j| {
            let x = -(PI * j as f64 / (n - 1) as f64).cos();
            0.5 * (a + b) + 0.5 * (b - a) * x
        })
        .collect()
}

fn barycentric(nodes: &[f64], values: &[Complex64], r: f64) -> Complex64 {
    let n = nodes.len();
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for (j, (&x, &v)) in nodes.iter().zip(values).enumerate() {
        let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
        if j == 0 || j == n - 1 {
            w *= 0.5;
        }
        let d = r - x;
        if d == 0.0 {
            return v;
        }
        num += v * (w / d);
        den += w / d;
    }
    num / den
}

impl Profile {
    fn support(&self) -> (f64, f64) {
        match *self {
            Profile::Gaussian { cutoff, .. } => (0.0, cutoff),
            Profile::Bump { center, half_width, .. } => ((center - half_width).max(0.0), center + half_width),
            Profile::Samples { r_min, r_max, .. } => (r_min, r_max),
        }
    }

    fn eval(&self, r: f64) -> Complex64 {
        let (lo, hi) = self.support();
        if r < lo || r > hi {
            return Complex64::new(0.0, 0.0);
        }
        match self {
            Profile::Gaussian { width, .. } => Complex64::new((-(r / width).powi(2)).exp(), 0.0),
            Profile::Bump {
                center,
                half_width,
                power,
            } => {
                let s = (r - center) / half_width;
                Complex64::new((1.0 - s * s).max(0.0).powi(*power), 0.0)
            }
            Profile::Samples { r_min, r_max, values } => {
                barycentric(&chebyshev_points(values.len(), *r_min, *r_max), values, r)
            }
        }
    }
}

impl InitialDatum {
    pub fn gaussian(dimension: usize, width: f64, cutoff: f64) -> Self {
        Self::radial(dimension, Profile::Gaussian { width, cutoff })
    }

    pub fn bump(dimension: usize, center: f64, half_width: f64, power: i32) -> Self {
        Self::radial(
            dimension,
            Profile::Bump {
                center,
                half_width,
                power,
            },
        )
    }

    pub fn radial(dimension: usize, profile: Profile) -> Self {
        Self {
            dimension,
            profile,
            angular: AngularFactor::Isotropic,
            amplitude: one(),
            dilation: 1.0,
            smoothness: Smoothness::Smooth,
        }
    }

    /// Radial datum interpolating `f` on `n` Chebyshev points of [r_min, r_max].
    pub fn from_radial_samples<F: Fn(f64) -> Complex64>(dimension: usize, r_min: f64, r_max: f64, n: usize, f: F) -> Self {
        let values = chebyshev_points(n, r_min, r_max).into_iter().map(f).collect();
        Self::radial(dimension, Profile::Samples { r_min, r_max, values })
    }

    pub fn scaled(mut self, factor: Complex64) -> Self {
        self.amplitude *= factor;
        self
    }

    /// y ↦ u₀(y/λ).
    pub fn dilated(mut self, lambda: f64) -> Self {
        self.dilation *= lambda;
        self
    }

    pub fn with_angular(mut self, angular: AngularFactor) -> Self {
        self.angular = angular;
        self
    }

    /// Support annulus [r_min, r_max] in physical units.
    pub fn support(&self) -> (f64, f64) {
        let (a, b) = self.profile.support();
        (a * self.dilation, b * self.dilation)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dilation > 0.0 && self.dilation.is_finite()) {
            return Err(Error::Config(format!("dilation must be positive, got {}", self.dilation)));
        }
        let (a, b) = self.support();
        if !(a >= 0.0 && b > a && b.is_finite()) {
            return Err(Error::Config(format!("datum support [{a}, {b}] is not a proper annulus")));
        }
        if let Profile::Samples { values, .. } = &self.profile {
            if values.is_empty() {
                return Err(Error::Config("sampled datum needs at least one value".into()));
            }
        }
        Ok(())
    }

    pub fn radial_part(&self, r: f64) -> Complex64 {
        self.amplitude * self.profile.eval(r / self.dilation)
    }

    pub fn angular_part(&self, omega: &SpherePoint) -> f64 {
        match self.angular {
            AngularFactor::Isotropic => 1.0,
            AngularFactor::Cosine { k, eps } => {
                let angle = match *omega {
                    SpherePoint::Circle { theta } => theta,
                    SpherePoint::Sphere { polar, .. } => polar,
                };
                1.0 + eps * (k as f64 * angle).cos()
            }
        }
    }

    /// u₀(y) = radial_part(|y|) · angular_part(y/|y|).
    pub fn eval(&self, y: &SpacePoint) -> Complex64 {
        self.radial_part(y.r) * self.angular_part(&y.omega)
    }

    fn radial_nodes(&self) -> usize {
        match self.smoothness {
            Smoothness::Smooth => 64,
            Smoothness::Rough => 160,
        }
    }
}

/// Output of a propagation: values at the requested points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationResult {
    pub t: f64,
    pub which: Which,
    pub points: Vec<SpacePoint>,
    pub values: Vec<Complex64>,
    /// max |v_fine − v_coarse| / max |v_fine| between the rule and its refinement.
    pub quadrature_error_estimate: f64,
    /// Whether the estimate is below [`QUADRATURE_TOL`].
    pub converged: bool,
}

pub const QUADRATURE_TOL: f64 = 1e-6;

/// Controls the tensor quadrature; `None` picks defaults from the datum.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QuadratureOptions {
    pub radial_nodes: Option<usize>,
    pub angular_nodes: Option<usize>,
}

struct Rule {
    radii: Vec<f64>,
    /// radial weight × r^{n−1}
    radial_weights: Vec<f64>,
    sphere: SphereRule,
}

fn build_rule(u0: &InitialDatum, radial: usize, angular: usize) -> Rule {
    let (a, b) = u0.support();
    let gl = GaussLegendre::on_interval(radial, a, b);
    let n = u0.dimension as i32;
    let radial_weights = gl.nodes.iter().zip(&gl.weights).map(|(r, w)| w * r.powi(n - 1)).collect();
    Rule {
        radii: gl.nodes,
        radial_weights,
        sphere: SphereRule::for_dimension(u0.dimension, angular),
    }
}

fn evaluate(
    ks: &KernelSeries,
    u0: &InitialDatum,
    t: f64,
    out_points: &[SpacePoint],
    which: Which,
    rule: &Rule,
) -> Result<Vec<Complex64>> {
    let n = ks.dimension() as f64;
    let s = (2.0 * t).sqrt();
    // u₀ is a radial profile times an angular factor, so the angular
    // integral separates from the radial one.
    let radial_data: Vec<Complex64> = rule.radii.iter().map(|&r| u0.radial_part(r)).collect();
    let angular_weights: Vec<f64> = rule
        .sphere
        .points
        .iter()
        .zip(&rule.sphere.weights)
        .map(|(w, wt)| u0.angular_part(w) * wt)
        .collect();
    out_points
        .par_iter()
        .map(|x| {
            // V_s = Σ_ω w_ω a(ω) A_s(ω_x, ω)
            let mut v = vec![Complex64::new(0.0, 0.0); ks.shells.len()];
            for (w, &aw) in rule.sphere.points.iter().zip(&angular_weights) {
                for (vs, p) in v.iter_mut().zip(ks.angular_products(&x.omega, w)) {
                    *vs += p * aw;
                }
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &rho) in rule.radii.iter().enumerate() {
                if radial_data[j] == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let (xr, yr) = (x.r / s, rho / s);
                let radial = ks.radial_factors(xr * yr, which, 0.0)?;
                let mut inner: Complex64 = radial.iter().zip(&v).map(|(f, v)| f * v).sum();
                inner *= match which {
                    Which::Schrodinger => Complex64::from_polar(1.0, rho * rho / (4.0 * t)),
                    Which::Heat => Complex64::new((-0.5 * (xr - yr).powi(2)).exp(), 0.0),
                };
                acc += inner * radial_data[j] * rule.radial_weights[j];
            }
            let pre = s.powf(-n);
            Ok(match which {
                Which::Schrodinger => -Complex64::i() * Complex64::from_polar(pre, x.r * x.r / (4.0 * t)) * acc,
                Which::Heat => acc * pre,
            })
        })
        .collect()
}

fn check_inputs(ks: &KernelSeries, u0: &InitialDatum, t: f64, out_points: &[SpacePoint]) -> Result<()> {
    u0.validate()?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Config(format!("time must be positive, got {t}")));
    }
    if u0.dimension != ks.dimension() {
        return Err(Error::Dimension(format!(
            "datum lives in n = {}, kernel in n = {}",
            u0.dimension,
            ks.dimension()
        )));
    }
    let (r_min, r_max) = u0.support();
    if r_min == 0.0 && ks.model.g > 0.0 {
        return Err(Error::Config(
            "data touching the origin are only accepted for models with g = 0".into(),
        ));
    }
    for x in out_points {
        if x.omega.ambient_dimension() != ks.dimension() {
            return Err(Error::Dimension("output point on the wrong sphere".into()));
        }
        ks.check_certificate(x.r * r_max / (2.0 * t))?;
    }
    Ok(())
}

fn propagate(
    ks: &KernelSeries,
    u0: &InitialDatum,
    t: f64,
    out_points: &[SpacePoint],
    which: Which,
    opts: QuadratureOptions,
) -> Result<PropagationResult> {
    check_inputs(ks, u0, t, out_points)?;
    let nr = opts.radial_nodes.unwrap_or_else(|| u0.radial_nodes());
    let na = opts.angular_nodes.unwrap_or(64);
    let coarse = evaluate(ks, u0, t, out_points, which, &build_rule(u0, nr, na))?;
    let values = evaluate(ks, u0, t, out_points, which, &build_rule(u0, 2 * nr, 2 * na))?;
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let diff = values
        .iter()
        .zip(&coarse)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::Overflow {
            what: "propagator",
            detail: format!("non-finite output at t = {t}"),
        });
    }
    let estimate = if scale > 0.0 { diff / scale } else { diff };
    Ok(PropagationResult {
        t,
        which,
        points: out_points.to_vec(),
        values,
        quadrature_error_estimate: estimate,
        converged: estimate < QUADRATURE_TOL,
    })
}

/// −i e^{i|x|²/4t} (2t)^{−n/2} ∫ K(x/√(2t), y/√(2t)) e^{i|y|²/4t} u₀(y) dy.
pub fn apply_schrodinger(
    ks: &KernelSeries,
    u0: &InitialDatum,
    t: f64,
    out_points: &[SpacePoint],
) -> Result<PropagationResult> {
    propagate(ks, u0, t, out_points, Which::Schrodinger, QuadratureOptions::default())
}

/// (2t)^{−n/2} ∫ G(x/√(2t), y/√(2t)) u₀(y) dy.
pub fn apply_heat(ks: &KernelSeries, u0: &InitialDatum, t: f64, out_points: &[SpacePoint]) -> Result<PropagationResult> {
    propagate(ks, u0, t, out_points, Which::Heat, QuadratureOptions::default())
}

pub fn apply_with(
    ks: &KernelSeries,
    u0: &InitialDatum,
    t: f64,
    out_points: &[SpacePoint],
    which: Which,
    opts: QuadratureOptions,
) -> Result<PropagationResult> {
    propagate(ks, u0, t, out_points, which, opts)
}

impl PropagationResult {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// CSV with columns t, r, angle(s), re, im, abs.
    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let three = self.points.first().map(|p| p.omega.ambient_dimension() == 3).unwrap_or(false);
        if three {
            w.write_record(["t", "r", "polar", "azimuth", "re", "im", "abs"])?;
        } else {
            w.write_record(["t", "r", "theta", "re", "im", "abs"])?;
        }
        for (p, v) in self.points.iter().zip(&self.values) {
            let mut rec = vec![self.t.to_string(), p.r.to_string()];
            match p.omega {
                SpherePoint::Circle { theta } => rec.push(theta.to_string()),
                SpherePoint::Sphere { polar, azimuth } => {
                    rec.push(polar.to_string());
                    rec.push(azimuth.to_string());
                }
            }
            rec.push(v.re.to_string());
            rec.push(v.im.to_string());
            rec.push(v.norm().to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Options for the Crank–Nicolson reference solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatOracleOptions {
    pub cells: usize,
    pub steps_per_unit: usize,
    pub far_radius: f64,
}

impl Default for HeatOracleOptions {
    fn default() -> Self {
        Self {
            cells: 1600,
            steps_per_unit: 1600,
            far_radius: 14.0,
        }
    }
}

/// Solution of u_t = u'' + (2/r)u' − (a/r²)u at the given radii, a ≥ 0, for
/// a radial datum supported away from 0, with the step and mesh refined
/// once to confirm convergence (< 1e−4 relative change).
pub fn heat_oracle<F: Fn(f64) -> f64>(a: f64, u0_radial: F, t: f64, r_points: &[f64]) -> Result<Vec<f64>> {
    let opts = HeatOracleOptions::default();
    let coarse = crank_nicolson(a, &u0_radial, t, r_points, opts)?;
    let fine = crank_nicolson(
        a,
        &u0_radial,
        t,
        r_points,
        HeatOracleOptions {
            cells: 2 * opts.cells,
            steps_per_unit: 2 * opts.steps_per_unit,
            ..opts
        },
    )?;
    let scale = fine.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let change = fine.iter().zip(&coarse).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if change > 1e-4 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Oracle(format!(
            "Crank-Nicolson refinement changed the result by {change:e} (scale {scale:e})"
        )));
    }
    Ok(fine)
}

/// One Crank–Nicolson run on v = r·u, v_t = v'' − (a/r²) v, v(0) = v(R) = 0,
/// on the graded mesh r_i = R sinh(κ s_i)/sinh κ, started with two
/// backward-Euler half steps.
pub fn crank_nicolson<F: Fn(f64) -> f64>(
    a: f64,
    u0_radial: &F,
    t: f64,
    r_points: &[f64],
    opts: HeatOracleOptions,
) -> Result<Vec<f64>> {
    if a < 0.0 || !(t > 0.0) {
        return Err(Error::Config(format!("heat oracle needs a >= 0 and t > 0 (a = {a}, t = {t})")));
    }
    let kappa = 1.5;
    let m = opts.cells;
    let big_r = opts.far_radius;
    let mesh: Vec<f64> = (0..=m)
        .map(|i| big_r * (kappa * i as f64 / m as f64).sinh() / kappa.sinh())
        .collect();
    let interior = m - 1;
    // operator A v on interior nodes: lower, diag, upper
    let mut lo = vec![0.0; interior];
    let mut di = vec![0.0; interior];
    let mut up = vec![0.0; interior];
    for k in 0..interior {
        let i = k + 1;
        let hm = mesh[i] - mesh[i - 1];
        let hp = mesh[i + 1] - mesh[i];
        let c = 2.0 / (hm + hp);
        lo[k] = c / hm;
        up[k] = c / hp;
        di[k] = -c / hm - c / hp - a / (mesh[i] * mesh[i]);
    }
    let mut v: Vec<f64> = (1..m).map(|i| mesh[i] * u0_radial(mesh[i])).collect();
    let v_sup0 = v.iter().map(|x| x.abs()).fold(0.0, f64::max);

    let steps = ((t * opts.steps_per_unit as f64).ceil() as usize).max(4);
    let dt = t / steps as f64;
    // (I − θ dt A) v_new = (I + (1−θ) dt A) v
    let step = |v: &mut Vec<f64>, dt: f64, theta: f64| {
        let rhs: Vec<f64> = (0..interior)
            .map(|k| {
                let mut av = di[k] * v[k];
                if k > 0 {
                    av += lo[k] * v[k - 1];
                }
                if k + 1 < interior {
                    av += up[k] * v[k + 1];
                }
                v[k] + (1.0 - theta) * dt * av
            })
            .collect();
        let sub: Vec<f64> = lo.iter().map(|x| -theta * dt * x).collect();
        let diag: Vec<f64> = di.iter().map(|x| 1.0 - theta * dt * x).collect();
        let sup: Vec<f64> = up.iter().map(|x| -theta * dt * x).collect();
        *v = thomas(&sub, &diag, &sup, &rhs);
    };
    // Rannacher start: the first step as two implicit half steps.
    step(&mut v, 0.5 * dt, 1.0);
    step(&mut v, 0.5 * dt, 1.0);
    for _ in 1..steps {
        step(&mut v, dt, 0.5);
    }
    let v_sup = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if !v_sup.is_finite() || v_sup > 2.0 * v_sup0 + 1e-300 {
        return Err(Error::Oracle(format!("Crank-Nicolson instability: sup grew from {v_sup0:e} to {v_sup:e}")));
    }

    let mut full = Vec::with_capacity(m + 1);
    full.push(0.0);
    full.extend_from_slice(&v);
    full.push(0.0);
    r_points
        .iter()
        .map(|&r| {
            if !(r > 0.0 && r < big_r) {
                return Err(Error::Config(format!("oracle output radius {r} outside (0, {big_r})")));
            }
            // cubic Lagrange interpolation of v, then u = v/r
            let i = mesh.partition_point(|&x| x <= r).clamp(2, m - 1);
            let idx = [i - 2, i - 1, i, i + 1];
            let mut val = 0.0;
            for &p in &idx {
                let mut l = 1.0;
                for &q in &idx {
                    if q != p {
                        l *= (r - mesh[q]) / (mesh[p] - mesh[q]);
                    }
                }
                val += l * full[p];
            }
            Ok(val / r)
        })
        .collect()
}

fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let den = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / den;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Free radial heat flow in three dimensions by the image formula,
/// u(t,r) = (r√(4πt))⁻¹ ∫ ρ u₀(ρ) [e^{−(r−ρ)²/4t} − e^{−(r+ρ)²/4t}] dρ.
pub fn free_radial_heat_3d<F: Fn(f64) -> f64>(u0_radial: F, support: (f64, f64), t: f64, r: f64) -> f64 {
    let gl = GaussLegendre::on_interval(400, support.0, support.1);
    let s = gl.integrate(|rho| {
        rho * u0_radial(rho) * ((-(r - rho).powi(2) / (4.0 * t)).exp() - (-(r + rho).powi(2) / (4.0 * t)).exp())
    });
    s / (r * (4.0 * PI * t).sqrt())
}
