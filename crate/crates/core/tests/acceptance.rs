//! One test per acceptance criterion; each prints a PASS/FAIL line.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::{Mutex, MutexGuard};
use std::time::{Duration, Instant};

use critical_decay::angular::{build_model, verify_form_bounds, verify_weyl_growth, FieldSpec, TrigPoly};
use critical_decay::cli::parse_preset;
use critical_decay::decay::{decay_report, sup_constants, verify_interpolation, DecayConfig, GridSpec, Mode};
use critical_decay::kernel::{plan_auto, KernelSeries, SpacePoint, Which};
use critical_decay::propagator::{apply_heat, apply_schrodinger, heat_oracle, InitialDatum};
use critical_decay::special::{bessel_i_imag, bessel_i_real, bessel_j, bessel_oracle, log_gamma, poisson_bound, BesselOrder};
use num_complex::Complex64;

// Runtime budgets are per criterion, so criteria run one at a time.
static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn verdict(n: u32, title: &str, pass: bool, detail: String) {
    let line = format!("criterion {n} [{}] {title}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    // straight to the terminal, past the test harness capture
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "{line}");
}

fn presets() -> Vec<(&'static str, FieldSpec)> {
    let fourier = format!("fourier2d:{}/presets/fourier2d_demo.json", env!("CARGO_MANIFEST_DIR"));
    [
        "free2d", "ab:0.1", "ab:0.3", "ab:0.5", fourier.as_str(), "invsq3d:0", "invsq3d:1", "invsq3d:2",
    ]
    .iter()
    .map(|p| {
        let name: &'static str = if p.starts_with("fourier2d") { "fourier2d" } else { Box::leak(p.to_string().into_boxed_str()) };
        (name, parse_preset(p).unwrap())
    })
    .collect()
}

fn series(spec: &FieldSpec) -> KernelSeries {
    plan_auto(spec, 10.0, 1e-10).unwrap()
}

fn honest(theta: f64, which: Which) -> DecayConfig {
    DecayConfig {
        theta,
        which,
        mode: Mode::Honest,
        ..DecayConfig::default()
    }
}

#[test]
fn criterion_1_free_kernel_closed_form() {
    let _g = serial();
    let start = Instant::now();
    let ks = plan_auto(&FieldSpec::free(2).unwrap(), 10.0, 1e-11).unwrap();
    let (mut ek, mut eg): (f64, f64) = (0.0, 0.0);
    for i in 0..30 {
        let r = 10f64.sqrt() * i as f64 / 29.0;
        for j in 0..30 {
            let rp = 10f64.sqrt() * j as f64 / 29.0;
            for a in 0..16 {
                let x = SpacePoint::circle(r, 0.1);
                let y = SpacePoint::circle(rp, 0.1 + 2.0 * PI * a as f64 / 16.0);
                let (xc, yc) = (x.cartesian(), y.cartesian());
                let dot = xc[0] * yc[0] + xc[1] * yc[1];
                let d2 = (xc[0] - yc[0]).powi(2) + (xc[1] - yc[1]).powi(2);
                let k = ks.eval_schrodinger_k(&x, &y).unwrap();
                ek = ek.max((k - Complex64::from_polar(0.5 / PI, -dot)).norm());
                let g = ks.eval_heat_g(&x, &y).unwrap();
                eg = eg.max((g - 0.5 / PI * (-0.5 * d2).exp()).norm());
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        1,
        "free kernel closed form",
        ek <= 1e-8 && eg <= 1e-10 && elapsed < Duration::from_secs(30),
        format!("max|K−K₀| = {ek:.2e} (≤1e-8), max|G−G₀| = {eg:.2e} (≤1e-10), {elapsed:.2?}"),
    );
}

#[test]
fn criterion_2_aharonov_bohm_improvement() {
    let _g = serial();
    let mut pass = true;
    let mut detail = Vec::new();
    for alpha in [0.1f64, 0.3, 0.5] {
        let start = Instant::now();
        let ks = series(&FieldSpec::aharonov_bohm(alpha).unwrap());
        let target = -1.0 - (alpha - alpha.round()).abs();
        let h = decay_report(&ks, &honest(1.0, Which::Schrodinger)).unwrap();
        let s = decay_report(&ks, &DecayConfig::default()).unwrap();
        let elapsed = start.elapsed();
        let ok = (h.fitted_slope - target).abs() <= 0.05
            && s.scaled_spread <= 1e-12
            && (s.fitted_slope - target).abs() <= 1e-12
            && elapsed < Duration::from_secs(120);
        pass &= ok;
        detail.push(format!(
            "α={alpha}: honest {:.4} vs {target:.4}, scaling spread {:.1e}, {elapsed:.2?}",
            h.fitted_slope, s.scaled_spread
        ));
    }
    verdict(2, "Aharonov–Bohm weighted decay", pass, detail.join("; "));
}

#[test]
fn criterion_3_inverse_square_heat_exponent() {
    let _g = serial();
    let start = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for a in [1.0f64, 2.0] {
        let ks = series(&FieldSpec::inverse_square_3d(a).unwrap());
        let target = -1.5 - ((0.25 + a).sqrt() - 0.5);
        let r = decay_report(&ks, &honest(1.0, Which::Heat)).unwrap();
        let ok = (r.fitted_slope - target).abs() <= 0.05;
        pass &= ok;
        detail.push(format!("a={a}: {:.4} vs {target:.4}", r.fitted_slope));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(120);
    verdict(3, "inverse-square heat exponent", pass, format!("{}, {elapsed:.2?}", detail.join("; ")));
}

#[test]
fn criterion_4_interpolation_in_theta() {
    let _g = serial();
    let ks = series(&FieldSpec::aharonov_bohm(0.5).unwrap());
    let thetas = [0.0, 0.25, 0.5, 0.75, 1.0];
    let rep = verify_interpolation(&ks, &honest(0.0, Which::Schrodinger), &thetas).unwrap();
    let mut pass = rep.monotone;
    let mut detail = Vec::new();
    for r in &rep.reports {
        let target = -1.0 - 0.5 * r.theta;
        pass &= (r.fitted_slope - target).abs() <= 0.05;
        detail.push(format!("θ={}: {:.4}", r.theta, r.fitted_slope));
    }
    verdict(4, "interpolation slopes −1 − θ/2", pass, format!("{}; monotone = {}", detail.join(", "), rep.monotone));
}

#[test]
fn criterion_5_finiteness_constants_converge() {
    let _g = serial();
    let grid = GridSpec::default();
    let mut pass = true;
    let mut worst = (0.0f64, String::new());
    for (name, spec) in presets() {
        let ks = series(&spec);
        for which in [Which::Schrodinger, Which::Heat] {
            for theta in [0.0, 1.0] {
                let c = sup_constants(&ks, theta, &grid, which).unwrap();
                for (label, rc) in [("Ω₁", &c.c_omega1), ("Ω₂", &c.c_omega2)] {
                    let monotone = rc.history.windows(2).all(|w| w[1] >= w[0]);
                    pass &= rc.converged && monotone && rc.value.is_finite() && rc.history.len() == 4;
                    if rc.delta >= worst.0 {
                        worst = (rc.delta, format!("{name} {which} θ={theta} {label}"));
                    }
                }
            }
        }
    }
    verdict(
        5,
        "finiteness constants under 3 refinements",
        pass,
        format!("largest final change {:.2e} ({}) < 1e-2", worst.0, worst.1),
    );
}

#[test]
fn criterion_6_special_function_oracle() {
    let _g = serial();
    let start = Instant::now();
    let rel = |a: f64, b: f64| if a == b { 0.0 } else { (a - b).abs() / b.abs() };
    let (mut wj, mut wi) = (0.0f64, 0.0f64);
    let mut slack = f64::NEG_INFINITY;
    let mut literal_ok = true;
    for i in 0..20 {
        let nu = 20.0 * i as f64 / 19.0;
        let o = BesselOrder::new(nu).unwrap();
        for j in 0..20 {
            let x = 20.0 * j as f64 / 19.0;
            let jo = (bessel_oracle(o, Complex64::new(0.0, x)).unwrap() * Complex64::from_polar(1.0, -0.5 * PI * nu)).re;
            wj = wj.max(rel(bessel_j(o, x).unwrap(), jo));
            let io = bessel_oracle(o, Complex64::new(x, 0.0)).unwrap().re;
            wi = wi.max(rel(bessel_i_real(o, x).unwrap(), io));
        }
    }
    for i in 0..=80 {
        let nu = 0.25 * i as f64;
        let o = BesselOrder::new(nu).unwrap();
        // sharp constant of the majorant; 1 for ν ≥ 1
        let c = (log_gamma(nu + 0.5).unwrap() - log_gamma(nu + 1.0).unwrap()).exp().max(1.0);
        for j in 0..=200 {
            let x = 0.1 * j as f64;
            let bound = poisson_bound(o, x).unwrap();
            let m = bessel_i_imag(o, x).unwrap().norm();
            slack = slack.max(m - c * bound);
            if nu >= 1.0 {
                literal_ok &= m <= bound + 1e-12;
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        6,
        "special-function oracle equivalence",
        wj <= 1e-8 && wi <= 1e-8 && slack <= 1e-12 && literal_ok && elapsed < Duration::from_secs(60),
        format!(
            "J rel {wj:.1e}, I rel {wi:.1e}, majorant excess {slack:.1e} (≤1e-12), literal form for ν≥1 {literal_ok}, {elapsed:.2?}"
        ),
    );
}

#[test]
fn criterion_7_spectral_correctness() {
    let _g = serial();
    let mut pass = true;
    let mut worst_ab: f64 = 0.0;
    for alpha in [0.1f64, 0.3, 0.5] {
        // the flux as a general Fourier field goes through the Galerkin solver
        let spec = FieldSpec::fourier2d(TrigPoly::zero(), TrigPoly::constant(alpha)).unwrap();
        let model = build_model(&spec, 20).unwrap();
        let mut exact: Vec<f64> = (-25i64..=25).map(|k| (k as f64 + alpha).powi(2)).collect();
        exact.sort_by(f64::total_cmp);
        for (m, e) in model.eigenvalues().iter().zip(&exact) {
            worst_ab = worst_ab.max((m - e).abs());
        }
    }
    pass &= worst_ab <= 1e-10;

    let mut worst_gap = f64::INFINITY;
    for (_, spec) in presets().into_iter().filter(|(_, s)| s.dimension == 2) {
        let fb = verify_form_bounds(&spec, 48).unwrap();
        worst_gap = worst_gap.min(fb.min_eig_upper_gap.min(fb.min_eig_lower_gap));
    }
    pass &= worst_gap >= -1e-10;

    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (_, spec) in presets() {
        let w = verify_weyl_growth(&build_model(&spec, 40).unwrap()).unwrap();
        lo = lo.min(w.ratio_min);
        hi = hi.max(w.ratio_max);
    }
    pass &= lo >= 0.1 && hi <= 2.0;
    verdict(
        7,
        "spectral correctness",
        pass,
        format!("AB |μ−(k+α)²| ≤ {worst_ab:.1e}, min form gap {worst_gap:.1e}, μ_k/k^(2/(n−1)) ∈ [{lo:.3}, {hi:.3}] ⊂ [0.1, 2]"),
    );
}

#[test]
fn criterion_8_propagator_oracles() {
    let _g = serial();
    let start = Instant::now();
    let ks = plan_auto(&FieldSpec::free(2).unwrap(), 12.0, 1e-12).unwrap();
    let u0 = InitialDatum::gaussian(2, 1.0, 6.0);
    let pts: Vec<SpacePoint> = (0..=8)
        .flat_map(|i| (0..4).map(move |j| SpacePoint::circle(0.25 * i as f64, 0.2 + 1.5 * j as f64)))
        .collect();
    let s = apply_schrodinger(&ks, &u0, 1.0, &pts).unwrap();
    let h = apply_heat(&ks, &u0, 1.0, &pts).unwrap();
    let w = Complex64::new(1.0, 4.0);
    let (mut es, mut eh) = (0.0f64, 0.0f64);
    for (i, p) in pts.iter().enumerate() {
        let exact = (-(p.r * p.r) / w).exp() / w;
        es = es.max((s.values[i] - exact).norm() / exact.norm());
        let exact_h = (-(p.r * p.r) / 5.0).exp() / 5.0;
        eh = eh.max((h.values[i] - exact_h).norm() / exact_h);
    }

    let ks3 = plan_auto(&FieldSpec::inverse_square_3d(2.0).unwrap(), 16.0, 1e-12).unwrap();
    let bump = InitialDatum::bump(3, 1.5, 1.0, 4);
    let radii: Vec<f64> = (0..10).map(|i| 0.8 + 0.2 * i as f64).collect();
    let rpts: Vec<SpacePoint> = radii.iter().map(|&r| SpacePoint::sphere(r, 0.7, 0.3)).collect();
    let mut ec = 0.0f64;
    for t in [0.25, 0.5, 1.0] {
        let res = apply_heat(&ks3, &bump, t, &rpts).unwrap();
        let cn = heat_oracle(2.0, |r| bump.radial_part(r).re, t, &radii).unwrap();
        for (v, c) in res.values.iter().zip(&cn) {
            ec = ec.max((v.re - c).abs() / c.abs());
        }
    }
    let elapsed = start.elapsed();
    verdict(
        8,
        "propagator oracles",
        es <= 1e-5 && eh <= 1e-6 && ec <= 1e-3 && elapsed < Duration::from_secs(300),
        format!("free Schrödinger {es:.1e} (≤1e-5), free heat {eh:.1e} (≤1e-6), inverse-square vs Crank–Nicolson {ec:.1e} (≤1e-3), {elapsed:.2?}"),
    );
}

#[test]
fn criterion_9_dispersive_hypothesis() {
    let _g = serial();
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, spec) in presets() {
        let ks = series(&spec);
        let scaling = decay_report(&ks, &DecayConfig { theta: 0.0, ..DecayConfig::default() }).unwrap();
        let h = decay_report(&ks, &honest(0.0, Which::Schrodinger)).unwrap();
        pass &= scaling.scaled_spread <= 1e-12 && h.scaled_spread <= 0.05;
        detail.push(format!("{name} {:.1e}/{:.1e}", scaling.scaled_spread, h.scaled_spread));
    }
    verdict(
        9,
        "t^{n/2}·‖e^{−itH}‖ constant (scaling ≤1e-12 / honest ≤5%)",
        pass,
        detail.join(", "),
    );
}
