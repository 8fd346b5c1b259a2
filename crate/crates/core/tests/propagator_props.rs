use std::f64::consts::PI;

use critical_decay::angular::FieldSpec;
use critical_decay::kernel::{plan_auto, SpacePoint};
use critical_decay::propagator::*;
use num_complex::Complex64;

fn ring_points(radii: &[f64], angles: usize) -> Vec<SpacePoint> {
    radii
        .iter()
        .flat_map(|&r| (0..angles).map(move |j| SpacePoint::circle(r, 2.0 * PI * (j as f64 + 0.3) / angles as f64)))
        .collect()
}

fn bump(r: f64) -> f64 {
    let s = r - 1.5;
    if s.abs() < 1.0 {
        (1.0 - s * s).powi(4)
    } else {
        0.0
    }
}

#[test]
fn free_gaussian_matches_closed_form() {
    // e^{−|y|²} evolves to (1+4it)^{−1} e^{−|x|²/(1+4it)}, heat: (1+4t)^{−1} e^{−|x|²/(1+4t)}
    let ks = plan_auto(&FieldSpec::free(2).unwrap(), 12.0, 1e-12).unwrap();
    let u0 = InitialDatum::gaussian(2, 1.0, 6.0);
    let pts = ring_points(&[0.0, 0.3, 0.7, 1.0, 1.4, 1.8, 2.0], 5);
    let t = 1.0;
    let s = apply_schrodinger(&ks, &u0, t, &pts).unwrap();
    let h = apply_heat(&ks, &u0, t, &pts).unwrap();
    let w = Complex64::new(1.0, 4.0 * t);
    for (i, p) in pts.iter().enumerate() {
        let exact = (-(p.r * p.r) / w).exp() / w;
        assert!((s.values[i] - exact).norm() < 1e-5 * exact.norm(), "r={}: {} vs {exact}", p.r, s.values[i]);
        let exact_h = (-(p.r * p.r) / (1.0 + 4.0 * t)).exp() / (1.0 + 4.0 * t);
        assert!((h.values[i].re - exact_h).abs() < 1e-6 * exact_h);
        assert!(h.values[i].im.abs() < 1e-10);
    }
    assert!(s.converged && h.converged);
}

#[test]
fn linear_in_the_datum() {
    let ks = plan_auto(&FieldSpec::aharonov_bohm(0.3).unwrap(), 10.0, 1e-10).unwrap();
    let u0 = InitialDatum::bump(2, 1.5, 1.0, 4).with_angular(AngularFactor::Cosine { k: 2, eps: 0.4 });
    let pts = ring_points(&[0.5, 1.0, 1.5], 3);
    let a = apply_schrodinger(&ks, &u0, 1.0, &pts).unwrap();
    let b = apply_schrodinger(&ks, &u0.clone().scaled(Complex64::new(2.0, 0.0)), 1.0, &pts).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((2.0 * x - y).norm() <= 1e-14 * y.norm());
    }
}

#[test]
fn aharonov_bohm_parabolic_scaling() {
    // e^{−itH}[f(·/λ)](x) = (e^{−i(t/λ²)H} f)(x/λ)
    let ks = plan_auto(&FieldSpec::aharonov_bohm(0.5).unwrap(), 10.0, 1e-11).unwrap();
    let f = InitialDatum::bump(2, 2.0, 1.0, 4);
    let lambda = 2.0;
    let t = 4.0;
    let pts = ring_points(&[0.4, 1.0, 1.6, 2.0], 3);
    let small: Vec<SpacePoint> = pts.iter().map(|p| SpacePoint { r: p.r / lambda, omega: p.omega }).collect();
    let lhs = apply_schrodinger(&ks, &f.clone().dilated(lambda), t, &pts).unwrap();
    let rhs = apply_schrodinger(&ks, &f, t / (lambda * lambda), &small).unwrap();
    let scale = rhs.max_abs();
    for (a, b) in lhs.values.iter().zip(&rhs.values) {
        assert!((a - b).norm() < 1e-8 * scale, "{a} vs {b}");
    }
}

#[test]
fn heat_flow_preserves_positivity() {
    let ks = plan_auto(&FieldSpec::inverse_square_3d(1.0).unwrap(), 10.0, 1e-12).unwrap();
    let u0 = InitialDatum::bump(3, 1.5, 1.0, 4).with_angular(AngularFactor::Cosine { k: 1, eps: 0.9 });
    let pts: Vec<SpacePoint> = (0..8)
        .flat_map(|i| (0..5).map(move |j| SpacePoint::sphere(0.1 + 0.25 * i as f64, PI * j as f64 / 4.0, 0.4)))
        .collect();
    for t in [0.5, 1.0] {
        let res = apply_heat(&ks, &u0, t, &pts).unwrap();
        for v in &res.values {
            assert!(v.re >= -1e-10 && v.im.abs() < 1e-10, "{v}");
        }
    }
}

#[test]
fn inverse_square_heat_matches_crank_nicolson() {
    let ks = plan_auto(&FieldSpec::inverse_square_3d(2.0).unwrap(), 16.0, 1e-12).unwrap();
    let u0 = InitialDatum::bump(3, 1.5, 1.0, 4);
    let radii: Vec<f64> = (0..10).map(|i| 0.8 + 0.2 * i as f64).collect();
    let pts: Vec<SpacePoint> = radii.iter().map(|&r| SpacePoint::sphere(r, 0.7, 0.3)).collect();
    for t in [0.25, 0.5, 1.0] {
        let res = apply_heat(&ks, &u0, t, &pts).unwrap();
        let cn = heat_oracle(2.0, bump, t, &radii).unwrap();
        for (v, c) in res.values.iter().zip(&cn) {
            assert!((v.re - c).abs() < 1e-3 * c.abs(), "t={t}: {} vs {c}", v.re);
        }
    }
}

#[test]
fn heat_semigroup_property() {
    // e^{−(t₁+t₂)H} u₀ = e^{−t₂H} (e^{−t₁H} u₀), the middle state resampled radially
    let ks = plan_auto(&FieldSpec::inverse_square_3d(2.0).unwrap(), 20.0, 1e-12).unwrap();
    let u0 = InitialDatum::bump(3, 1.5, 1.0, 4);
    let (t1, t2) = (0.5, 0.5);
    let (r_lo, r_hi) = (0.02, 8.0);
    let n = 48;
    let cheb: Vec<f64> = (0..n)
        .map(|j| 0.5 * (r_lo + r_hi) - 0.5 * (r_hi - r_lo) * (PI * j as f64 / (n - 1) as f64).cos())
        .collect();
    let mid_pts: Vec<SpacePoint> = cheb.iter().map(|&r| SpacePoint::sphere(r, 0.0, 0.0)).collect();
    let mid = apply_heat(&ks, &u0, t1, &mid_pts).unwrap();
    let middle = InitialDatum::radial(
        3,
        Profile::Samples {
            r_min: r_lo,
            r_max: r_hi,
            values: mid.values.clone(),
        },
    );
    let pts: Vec<SpacePoint> = (0..6).map(|i| SpacePoint::sphere(0.8 + 0.3 * i as f64, 1.0, 0.0)).collect();
    let direct = apply_heat(&ks, &u0, t1 + t2, &pts).unwrap();
    let composed = apply_with(&ks, &middle, t2, &pts, critical_decay::kernel::Which::Heat, QuadratureOptions {
        radial_nodes: Some(160),
        angular_nodes: Some(16),
    })
    .unwrap();
    for (a, b) in direct.values.iter().zip(&composed.values) {
        assert!((a - b).norm() < 5e-4 * a.norm(), "{a} vs {b}");
    }
}

#[test]
fn heat_mass_does_not_grow() {
    // ∫ u(t) = 4π ∫ u(t,r) r² dr for radial data
    let ks = plan_auto(&FieldSpec::inverse_square_3d(0.5).unwrap(), 20.0, 1e-12).unwrap();
    let u0 = InitialDatum::bump(3, 1.5, 1.0, 4);
    let gl = critical_decay::quadrature::GaussLegendre::on_interval(60, 0.0, 8.0);
    let mass0 = 4.0 * PI * critical_decay::quadrature::GaussLegendre::on_interval(60, 0.5, 2.5).integrate(|r| bump(r) * r * r);
    let pts: Vec<SpacePoint> = gl.nodes.iter().map(|&r| SpacePoint::sphere(r, 0.0, 0.0)).collect();
    let mut last = mass0;
    for t in [0.5, 1.0] {
        let res = apply_heat(&ks, &u0, t, &pts).unwrap();
        let mass: f64 = 4.0 * PI * res.values.iter().zip(&gl.nodes).zip(&gl.weights).map(|((v, r), w)| v.re * r * r * w).sum::<f64>();
        assert!(mass <= last * (1.0 + 1e-6), "t={t}: {mass} > {last}");
        last = mass;
    }
    assert!(last < mass0);
}

#[test]
fn dispersive_constant_is_stable() {
    // sup|e^{−itH}u₀| t^{n/2} / ‖u₀‖_{L¹} across t ∈ {1, 2, 4, 8}
    for (spec, n) in [(FieldSpec::free(2).unwrap(), 2usize), (FieldSpec::inverse_square_3d(0.0).unwrap(), 3)] {
        let ks = plan_auto(&spec, 10.0, 1e-11).unwrap();
        let u0 = InitialDatum::gaussian(n, 0.5, 3.0);
        let l1 = match n {
            2 => PI * 0.25,
            _ => (PI * 0.25).powf(1.5),
        };
        let pts: Vec<SpacePoint> = (0..12)
            .map(|i| match n {
                2 => SpacePoint::circle(0.25 * i as f64, 0.0),
                _ => SpacePoint::sphere(0.25 * i as f64, 0.0, 0.0),
            })
            .collect();
        let c: Vec<f64> = [1.0, 2.0, 4.0, 8.0]
            .iter()
            .map(|&t| apply_schrodinger(&ks, &u0, t, &pts).unwrap().max_abs() * t.powf(0.5 * n as f64) / l1)
            .collect();
        for v in &c {
            assert!((v / c[0] - 1.0).abs() < 0.05, "{c:?}");
        }
    }
}

#[test]
fn rejects_origin_data_for_positive_gain() {
    let ks = plan_auto(&FieldSpec::aharonov_bohm(0.5).unwrap(), 10.0, 1e-10).unwrap();
    let u0 = InitialDatum::gaussian(2, 1.0, 3.0);
    assert!(apply_heat(&ks, &u0, 1.0, &[SpacePoint::circle(1.0, 0.0)]).is_err());
    let ok = InitialDatum::bump(2, 1.5, 1.0, 2);
    assert!(apply_heat(&ks, &ok, 0.01, &[SpacePoint::circle(2.0, 0.0)]).is_err());
}

#[test]
fn crank_nicolson_free_case_matches_image_formula() {
    let ring = |r: f64| (-4.0 * (r - 2.0) * (r - 2.0)).exp();
    let radii = [0.6, 1.2, 1.8, 2.4, 3.0];
    let v = heat_oracle(0.0, ring, 0.4, &radii).unwrap();
    for (r, x) in radii.iter().zip(&v) {
        let exact = free_radial_heat_3d(ring, (0.0, 6.0), 0.4, *r);
        assert!((x - exact).abs() < 1e-4 * exact.abs().max(1e-2));
    }
}
