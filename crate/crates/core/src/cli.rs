//! Command-line front end: `eigs`, `decay` and `propagate`.
//!
//! Every run writes `report.json` into the output directory, also on
//! failure. Exit codes: 0 success, 1 usage/configuration/check failure,
//! 2 model rejected, 3 resolution failure, 4 decay slope outside
//! tolerance, 5 oracle mismatch.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::angular::{
    build_model, gram_deviation, verify_form_bounds, verify_sup_norm_bound, verify_weyl_growth, AngularModel, FieldSpec,
    FieldVariant, SpherePoint, TrigPoly,
};
use crate::decay::{decay_report, verify_interpolation, DecayConfig, DecayReport, GridSpec, Mode, DEFAULT_TIMES};
use crate::error::{Error, Result};
use crate::kernel::{plan_auto, SpacePoint, Which};
use crate::propagator::{
    apply_heat, apply_schrodinger, heat_oracle, AngularFactor, InitialDatum, Profile, PropagationResult,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_MODEL_REJECTED: i32 = 2;
pub const EXIT_RESOLUTION: i32 = 3;
pub const EXIT_DECAY_TOLERANCE: i32 = 4;
pub const EXIT_ORACLE: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "critical-decay", version, about = "Bessel-series propagators and weighted decay checks")]
pub struct Cli {
    /// Worker threads for grid sweeps (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Angular eigenpairs and their checks.
    Eigs(RunArgs),
    /// Weighted L¹→L^∞ norms over a time sweep and their fitted decay rate.
    Decay(RunArgs),
    /// Evolve a datum from the run configuration and compare with an oracle
    /// where one applies. Verified regime: t ≳ 0.1·r_max² of the datum.
    Propagate(RunArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// free2d | free3d | ab:<alpha> | fourier2d:<file> | invsq3d:<a>
    #[arg(long)]
    pub preset: Option<String>,
    /// Run-configuration JSON; flags override its values.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Kernel series tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// e.g. r:16,ang:16,levels:3[,rmax:3.16]
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub theta: Option<Vec<f64>>,
    #[arg(long)]
    pub which: Option<Which>,
    #[arg(long)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Number of eigenpairs for `eigs`.
    #[arg(short = 'k')]
    pub k: Option<usize>,
}

/// cos[0] + Σ_{m≥1} cos[m] cos mθ + sin[m−1] sin mθ.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CosSin {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

/// Contents of a `fourier2d:<file>` preset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fourier2dFile {
    pub electric: CosSin,
    pub magnetic: CosSin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub field: Option<FieldSpec>,
    pub tol: f64,
    pub z_max: f64,
    pub k: usize,
    pub grid: GridSpec,
    pub times: Option<Vec<f64>>,
    pub theta: Vec<f64>,
    pub which: Which,
    pub mode: Mode,
    pub slope_tolerance: Option<f64>,
    pub out: PathBuf,
    pub datum: Option<InitialDatum>,
    /// Output radii for `propagate`.
    pub radii: Vec<f64>,
    /// Output directions per radius for `propagate`.
    pub angles: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            preset: None,
            field: None,
            tol: 1e-10,
            z_max: 10.0,
            k: 20,
            grid: GridSpec::default(),
            times: None,
            theta: vec![1.0],
            which: Which::Schrodinger,
            mode: Mode::Scaling,
            slope_tolerance: None,
            out: PathBuf::from("out"),
            datum: None,
            radii: (1..=8).map(|i| 0.25 * i as f64).collect(),
            angles: 4,
        }
    }
}

pub fn parse_grid(s: &str, base: GridSpec) -> Result<GridSpec> {
    let mut g = base;
    for part in s.split(',').filter(|p| !p.is_empty()) {
        let (key, val) = part
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("grid entry '{part}' is not key:value")))?;
        let bad = |_| Error::Config(format!("bad grid value '{val}' for '{key}'"));
        match key.trim() {
            "r" => g.r_nodes = val.trim().parse().map_err(bad)?,
            "ang" => g.angular_nodes = val.trim().parse().map_err(bad)?,
            "levels" => g.refinement_levels = val.trim().parse().map_err(bad)?,
            "rmax" => g.r_max = val.trim().parse().map_err(|_| Error::Config(format!("bad rmax '{val}'")))?,
            other => return Err(Error::Config(format!("unknown grid key '{other}'"))),
        }
    }
    g.validate()?;
    Ok(g)
}

pub fn parse_preset(s: &str) -> Result<FieldSpec> {
    let (name, arg) = match s.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (s, None),
    };
    let num = |a: Option<&str>| -> Result<f64> {
        a.ok_or_else(|| Error::Config(format!("preset '{name}' needs a parameter")))?
            .parse()
            .map_err(|_| Error::Config(format!("bad preset parameter in '{s}'")))
    };
    match name {
        "free2d" => FieldSpec::free(2),
        "free3d" => FieldSpec::free(3),
        "ab" => FieldSpec::aharonov_bohm(num(arg)?),
        "invsq3d" => FieldSpec::inverse_square_3d(num(arg)?),
        "fourier2d" => {
            let path = arg.ok_or_else(|| Error::Config("fourier2d preset needs a file".into()))?;
            let file: Fourier2dFile = serde_json::from_str(&fs::read_to_string(path)?)?;
            FieldSpec::fourier2d(
                TrigPoly::from_cos_sin(&file.electric.cos, &file.electric.sin),
                TrigPoly::from_cos_sin(&file.magnetic.cos, &file.magnetic.sin),
            )
        }
        _ => Err(Error::Config(format!("unknown preset '{s}'"))),
    }
}

impl RunConfig {
    /// The configuration file (if any) with the flags applied on top.
    pub fn resolve(args: &RunArgs) -> Result<Self> {
        let mut cfg: RunConfig = match &args.spec {
            Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
            None => RunConfig::default(),
        };
        if let Some(p) = &args.preset {
            cfg.preset = Some(p.clone());
            cfg.field = None;
        }
        if let Some(t) = args.tol {
            cfg.tol = t;
        }
        if let Some(g) = &args.grid {
            cfg.grid = parse_grid(g, cfg.grid)?;
        }
        if let Some(t) = &args.times {
            cfg.times = Some(t.clone());
        }
        if let Some(t) = &args.theta {
            cfg.theta = t.clone();
        }
        if let Some(w) = args.which {
            cfg.which = w;
        }
        if let Some(m) = args.mode {
            cfg.mode = m;
        }
        if let Some(o) = &args.out {
            cfg.out = o.clone();
        }
        if let Some(k) = args.k {
            cfg.k = k;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.z_max > 0.0 && self.z_max.is_finite()) {
            return Err(Error::Config(format!("z_max must be positive, got {}", self.z_max)));
        }
        if let Some(s) = self.slope_tolerance {
            if !(s > 0.0) {
                return Err(Error::Config(format!("slope tolerance must be positive, got {s}")));
            }
        }
        if self.theta.is_empty() || self.theta.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::Config(format!("theta values must lie in [0, 1], got {:?}", self.theta)));
        }
        if let Some(t) = &self.times {
            if t.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
                return Err(Error::Config(format!("times must be positive, got {t:?}")));
            }
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.preset.is_none() && self.field.is_none() {
            return Err(Error::Config("no model: give --preset or a field in the configuration".into()));
        }
        self.grid.validate()
    }

    pub fn field_spec(&self) -> Result<FieldSpec> {
        match (&self.field, &self.preset) {
            (Some(f), _) => {
                f.validate()?;
                Ok(f.clone())
            }
            (None, Some(p)) => parse_preset(p),
            (None, None) => Err(Error::Config("no model configured".into())),
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ModelRejected { .. } => EXIT_MODEL_REJECTED,
        Error::Resolution { .. } | Error::InsufficientEigenpairs { .. } => EXIT_RESOLUTION,
        Error::Oracle(_) => EXIT_ORACLE,
        _ => EXIT_FAILURE,
    }
}

/// Exit code and the `result` section of report.json.
pub struct Outcome {
    pub code: i32,
    pub result: Value,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_FAILURE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.threads {
        // Only the first pool configuration in a process takes effect.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let (name, args) = match &cli.command {
        Command::Eigs(a) => ("eigs", a),
        Command::Decay(a) => ("decay", a),
        Command::Propagate(a) => ("propagate", a),
    };
    let out_dir = args.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let cfg = match RunConfig::resolve(args) {
        Ok(c) => c,
        Err(e) => return finish(name, &out_dir, None, Err(e)),
    };
    let outcome = match &cli.command {
        Command::Eigs(_) => cmd_eigs(&cfg),
        Command::Decay(_) => cmd_decay(&cfg),
        Command::Propagate(_) => cmd_propagate(&cfg),
    };
    finish(name, &cfg.out, Some(&cfg), outcome)
}

fn finish(name: &str, out: &Path, cfg: Option<&RunConfig>, outcome: Result<Outcome>) -> i32 {
    let (code, result, error) = match outcome {
        Ok(o) => (o.code, o.result, None),
        Err(e) => {
            eprintln!("error: {e}");
            (exit_code(&e), Value::Null, Some(e.to_string()))
        }
    };
    let report = json!({
        "command": name,
        "status": if code == EXIT_OK { "ok" } else { "failed" },
        "exit_code": code,
        "error": error,
        "config": cfg,
        "result": result,
    });
    let written = fs::create_dir_all(out)
        .map_err(Error::from)
        .and_then(|_| Ok(serde_json::to_string_pretty(&report)?))
        .and_then(|s| Ok(fs::write(out.join("report.json"), s + "\n")?));
    if let Err(e) = written {
        eprintln!("error: could not write report.json: {e}");
        return if code == EXIT_OK { EXIT_FAILURE } else { code };
    }
    code
}

fn write_eigs_csv(model: &AngularModel, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["index", "mu", "beta", "alpha", "sup_norm", "label"])?;
    for p in &model.pairs {
        w.write_record([
            p.index.to_string(),
            p.mu.to_string(),
            p.beta.to_string(),
            p.alpha_order.to_string(),
            p.sup_norm.to_string(),
            format!("{:?}", p.label),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_eigs(cfg: &RunConfig) -> Result<Outcome> {
    let spec = cfg.field_spec()?;
    let model = build_model(&spec, cfg.k)?;
    fs::create_dir_all(&cfg.out)?;
    write_eigs_csv(&model, &cfg.out.join("eigs.csv"))?;

    let mut checks = serde_json::Map::new();
    let mut ok = true;
    if spec.dimension == 2 {
        let fb = verify_form_bounds(&spec, cfg.k + 16)?;
        ok &= fb.passes();
        checks.insert("form_bounds".into(), json!({ "report": fb, "passes": fb.passes() }));
    }
    if model.len() >= 20 {
        let w = verify_weyl_growth(&model)?;
        let pass = w.ratio_min > 0.0 && w.ratio_max.is_finite();
        ok &= pass;
        checks.insert("weyl_growth".into(), json!({ "report": w, "passes": pass }));
    }
    let sup = verify_sup_norm_bound(&model, 64);
    let sup_pass = model
        .pairs
        .iter()
        .zip(&sup.empirical_sups)
        .all(|(p, s)| *s <= p.sup_norm * (1.0 + 1e-9));
    ok &= sup_pass;
    checks.insert(
        "sup_norms".into(),
        json!({ "c_best": sup.c_best, "sup_constant": model.sup_constant, "passes": sup_pass }),
    );
    let gram = gram_deviation(&model, model.len().min(40));
    ok &= gram < 1e-8;
    checks.insert("gram_deviation".into(), json!({ "value": gram, "passes": gram < 1e-8 }));

    for p in &model.pairs {
        println!("{:>4}  mu = {:<22} beta = {}", p.index, p.mu, p.beta);
    }
    println!("mu1 = {}, g = {}", model.pairs[0].mu, model.g);
    Ok(Outcome {
        code: if ok { EXIT_OK } else { EXIT_FAILURE },
        result: json!({
            "model": spec.label(),
            "mu1": model.pairs[0].mu,
            "g": model.g,
            "b_n": model.b_n,
            "solver": model.solver,
            "eigenvalues": model.eigenvalues(),
            "checks": checks,
        }),
    })
}

pub fn cmd_decay(cfg: &RunConfig) -> Result<Outcome> {
    let spec = cfg.field_spec()?;
    let ks = plan_auto(&spec, cfg.z_max.max(cfg.grid.z_max()), cfg.tol)?;
    let base = DecayConfig {
        theta: cfg.theta[0],
        which: cfg.which,
        mode: cfg.mode,
        times: cfg.times.clone().unwrap_or_else(|| DEFAULT_TIMES.to_vec()),
        grid: cfg.grid,
        slope_tolerance: cfg.slope_tolerance,
    };
    let reports: Vec<DecayReport> = cfg
        .theta
        .iter()
        .map(|&theta| decay_report(&ks, &DecayConfig { theta, ..base.clone() }))
        .collect::<Result<_>>()?;
    let interpolation = if cfg.theta.len() > 1 && cfg.theta.contains(&0.0) && cfg.theta.contains(&1.0) {
        Some(verify_interpolation(&ks, &base, &cfg.theta)?.monotone)
    } else {
        None
    };

    fs::create_dir_all(&cfg.out)?;
    let mut w = csv::Writer::from_path(cfg.out.join("decay.csv"))?;
    w.write_record(["t", "norm", "predicted", "theta"])?;
    for r in &reports {
        for (t, v) in r.times.iter().zip(&r.norms) {
            let predicted = r.norms[0] * (t / r.times[0]).powf(r.predicted_slope);
            w.write_record([t.to_string(), v.to_string(), predicted.to_string(), r.theta.to_string()])?;
        }
        let dat: String = r.times.iter().zip(&r.norms).map(|(t, v)| format!("{t} {v}\n")).collect();
        fs::write(cfg.out.join(format!("decay_theta{}.dat", r.theta)), dat)?;
    }
    w.flush()?;

    let mut code = EXIT_OK;
    for r in &reports {
        println!(
            "{} {} theta={} {}: slope {:.6} (predicted {:.6}, |diff| {:.3e}, tol {:.1e})  C1={:.6} C2={:.6}",
            r.model,
            r.which,
            r.theta,
            r.mode,
            r.fitted_slope,
            r.predicted_slope,
            r.slope_error,
            r.slope_tolerance,
            r.c_omega1.value,
            r.c_omega2.value
        );
        if !r.within_tolerance() {
            eprintln!(
                "slope mismatch at theta = {}: fitted {} vs predicted {} (diff {:e} > {:e})",
                r.theta, r.fitted_slope, r.predicted_slope, r.slope_error, r.slope_tolerance
            );
            code = EXIT_DECAY_TOLERANCE;
        }
    }
    if interpolation == Some(false) {
        eprintln!("fitted slopes are not monotone in theta");
        code = EXIT_DECAY_TOLERANCE;
    }
    Ok(Outcome {
        code,
        result: json!({
            "k_used": ks.k_used,
            "tail_bound": ks.tail_bound,
            "reports": reports,
            "interpolation_monotone": interpolation,
        }),
    })
}

fn output_points(cfg: &RunConfig, n: usize) -> Vec<SpacePoint> {
    let m = cfg.angles.max(1);
    cfg.radii
        .iter()
        .flat_map(|&r| {
            (0..m).map(move |j| {
                let u = (j as f64 + 0.5) / m as f64;
                let omega = if n == 2 {
                    SpherePoint::circle(2.0 * std::f64::consts::PI * u)
                } else {
                    SpherePoint::sphere(std::f64::consts::PI * u, 0.0)
                };
                SpacePoint { r, omega }
            })
        })
        .collect()
}

/// Exact solution where one is known: free Gaussians, and the
/// Crank–Nicolson radial solver for inverse-square heat flow in 3D.
fn oracle(spec: &FieldSpec, u0: &InitialDatum, which: Which, t: f64, pts: &[SpacePoint]) -> Result<Option<(Vec<Complex64>, f64)>> {
    if u0.angular != AngularFactor::Isotropic {
        return Ok(None);
    }
    match (&spec.variant, &u0.profile, which) {
        (FieldVariant::Free, Profile::Gaussian { width, .. }, _) => {
            let c = (width * u0.dilation).powi(2);
            let n = spec.dimension as f64;
            let s = match which {
                Which::Schrodinger => Complex64::new(c, 4.0 * t),
                Which::Heat => Complex64::new(c + 4.0 * t, 0.0),
            };
            let tol = match which {
                Which::Schrodinger => 1e-5,
                Which::Heat => 1e-6,
            };
            let vals = pts
                .iter()
                .map(|p| u0.amplitude * (s / c).powf(-0.5 * n) * (-(p.r * p.r) / s).exp())
                .collect();
            Ok(Some((vals, tol)))
        }
        (FieldVariant::InverseSquare3d { a }, _, Which::Heat) if *a >= 0.0 && u0.amplitude.im == 0.0 => {
            let (r_min, _) = u0.support();
            if r_min <= 0.0 {
                return Ok(None);
            }
            let radii: Vec<f64> = pts.iter().map(|p| p.r).collect();
            let scale = u0.amplitude.re;
            let f = |r: f64| u0.radial_part(r).re / scale;
            let v = heat_oracle(*a, f, t, &radii)?;
            Ok(Some((v.into_iter().map(|x| Complex64::new(x * scale, 0.0)).collect(), 1e-3)))
        }
        _ => Ok(None),
    }
}

pub fn cmd_propagate(cfg: &RunConfig) -> Result<Outcome> {
    let spec = cfg.field_spec()?;
    let u0 = cfg
        .datum
        .clone()
        .ok_or_else(|| Error::Config("propagate needs a `datum` in the run configuration".into()))?;
    u0.validate()?;
    let times = cfg.times.clone().unwrap_or_else(|| vec![1.0]);
    let pts = output_points(cfg, spec.dimension);
    let r_out = cfg.radii.iter().cloned().fold(0.0, f64::max);
    let t_min = times.iter().cloned().fold(f64::INFINITY, f64::min);
    let z_needed = r_out * u0.support().1 / (2.0 * t_min);
    let ks = plan_auto(&spec, z_needed.max(cfg.z_max), cfg.tol)?;
    fs::create_dir_all(&cfg.out)?;

    let mut code = EXIT_OK;
    let mut summaries = Vec::new();
    for &t in &times {
        let res: PropagationResult = match cfg.which {
            Which::Schrodinger => apply_schrodinger(&ks, &u0, t, &pts)?,
            Which::Heat => apply_heat(&ks, &u0, t, &pts)?,
        };
        res.write_csv(cfg.out.join(format!("field_t{t}.csv")))?;
        let mut summary = json!({
            "t": t,
            "max_abs": res.max_abs(),
            "quadrature_error_estimate": res.quadrature_error_estimate,
        });
        if let Some((exact, tol)) = oracle(&spec, &u0, cfg.which, t, &pts)? {
            let peak = exact.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let err = res
                .values
                .iter()
                .zip(&exact)
                .map(|(v, e)| (v - e).norm() / e.norm().max(1e-3 * peak))
                .fold(0.0, f64::max);
            let pass = err <= tol;
            println!("t = {t}: oracle max relative error {err:.3e} (tol {tol:e})");
            if !pass {
                eprintln!("oracle mismatch at t = {t}: {err:e} > {tol:e}");
                code = EXIT_ORACLE;
            }
            summary["oracle"] = json!({ "max_relative_error": err, "tol": tol, "passes": pass });
        } else {
            println!("t = {t}: max |u| = {:.6e}", res.max_abs());
        }
        summaries.push(summary);
    }
    Ok(Outcome {
        code,
        result: json!({ "k_used": ks.k_used, "z_max": ks.z_max, "snapshots": summaries }),
    })
}
