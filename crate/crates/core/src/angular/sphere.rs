//! Points on S¹ and S², spherical harmonics, and product quadrature rules.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::quadrature::GaussLegendre;

/// A point of the unit sphere S^{n-1} for n = 2 or n = 3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpherePoint {
    /// Angle θ on the unit circle.
    Circle { theta: f64 },
    /// Polar angle from the north pole and azimuth.
    Sphere { polar: f64, azimuth: f64 },
}

impl SpherePoint {
    pub fn circle(theta: f64) -> Self {
        SpherePoint::Circle { theta }
    }

    pub fn sphere(polar: f64, azimuth: f64) -> Self {
        SpherePoint::Sphere { polar, azimuth }
    }

    pub fn north_pole() -> Self {
        SpherePoint::Sphere { polar: 0.0, azimuth: 0.0 }
    }

    /// Dimension n of the ambient space.
    pub fn ambient_dimension(&self) -> usize {
        match self {
            SpherePoint::Circle { .. } => 2,
            SpherePoint::Sphere { .. } => 3,
        }
    }

    pub fn cartesian(&self) -> Vec<f64> {
        match *self {
            SpherePoint::Circle { theta } => vec![theta.cos(), theta.sin()],
            SpherePoint::Sphere { polar, azimuth } => {
                let s = polar.sin();
                vec![s * azimuth.cos(), s * azimuth.sin(), polar.cos()]
            }
        }
    }

    /// Cosine of the angle between two points of the same sphere.
    pub fn cos_angle(&self, other: &SpherePoint) -> f64 {
        let c = match (*self, *other) {
            (SpherePoint::Circle { theta: a }, SpherePoint::Circle { theta: b }) => (a - b).cos(),
            (
                SpherePoint::Sphere { polar: p1, azimuth: a1 },
                SpherePoint::Sphere { polar: p2, azimuth: a2 },
            ) => p1.cos() * p2.cos() + p1.sin() * p2.sin() * (a1 - a2).cos(),
            _ => panic!("cos_angle between points of different spheres"),
        };
        c.clamp(-1.0, 1.0)
    }

    /// Fixed sample sequence used to pin eigenfunction phases: the canonical
    /// point (θ = 0 or the north pole) first, then points moving away from it.
    pub fn canonical_samples(dimension: usize) -> Vec<SpherePoint> {
        match dimension {
            2 => (0..63).map(|j| SpherePoint::circle(0.1 * j as f64)).collect(),
            _ => (0..32)
                .map(|j| SpherePoint::sphere(0.1 * j as f64, 0.0))
                .chain((1..32).map(|j| SpherePoint::sphere(1.0, 0.2 * j as f64)))
                .collect(),
        }
    }
}

/// Legendre polynomial P_l(x).
pub fn legendre(l: usize, x: f64) -> f64 {
    if l == 0 {
        return 1.0;
    }
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=l {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Orthonormal associated Legendre factor P̄_l^m(cos θ), m ≥ 0, without the
/// Condon–Shortley sign, so that P̄_l^m e^{imφ} is L²(S²)-normalized.
pub fn normalized_assoc_legendre(l: usize, m: usize, x: f64) -> f64 {
    assert!(m <= l);
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = 1.0 / (4.0 * PI).sqrt();
    for i in 1..=m {
        let fi = i as f64;
        pmm *= ((2.0 * fi + 1.0) / (2.0 * fi)).sqrt() * s;
    }
    if l == m {
        return pmm;
    }
    let mf = m as f64;
    let mut p_prev = pmm;
    let mut p = x * (2.0 * mf + 3.0).sqrt() * pmm;
    for ll in (m + 2)..=l {
        let lf = ll as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
        let next = a * (x * p - b * p_prev);
        p_prev = p;
        p = next;
    }
    p
}

/// Spherical harmonic Y_l^m(polar, azimuth) in the convention above.
pub fn spherical_harmonic(l: usize, m: i64, polar: f64, azimuth: f64) -> Complex64 {
    let am = m.unsigned_abs() as usize;
    let radial = normalized_assoc_legendre(l, am, polar.cos());
    Complex64::from_polar(radial, m as f64 * azimuth)
}

/// A product quadrature rule on S^{n-1}.
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub points: Vec<SpherePoint>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    /// Uniform trapezoid with `n` nodes on S¹ (exact for |k| < n).
    pub fn circle(n: usize) -> Self {
        let w = 2.0 * PI / n as f64;
        Self {
            points: (0..n).map(|j| SpherePoint::circle(w * j as f64)).collect(),
            weights: vec![w; n],
        }
    }

    /// Gauss–Legendre in cos(polar) times trapezoid in azimuth on S²;
    /// exact for spherical harmonics with l < 2·n_polar and |m| < n_azimuth.
    pub fn sphere(n_polar: usize, n_azimuth: usize) -> Self {
        let gl = GaussLegendre::new(n_polar);
        let dphi = 2.0 * PI / n_azimuth as f64;
        let mut points = Vec::with_capacity(n_polar * n_azimuth);
        let mut weights = Vec::with_capacity(n_polar * n_azimuth);
        for (x, w) in gl.nodes.iter().zip(&gl.weights) {
            let polar = x.clamp(-1.0, 1.0).acos();
            for j in 0..n_azimuth {
                points.push(SpherePoint::sphere(polar, dphi * j as f64));
                weights.push(w * dphi);
            }
        }
        Self { points, weights }
    }

    /// A rule of comparable resolution for the given dimension.
    pub fn for_dimension(dimension: usize, resolution: usize) -> Self {
        match dimension {
            2 => Self::circle(resolution),
            _ => Self::sphere(resolution.div_ceil(2).max(2), resolution.max(4)),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
