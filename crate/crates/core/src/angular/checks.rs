//! Numerical checks of the two-sided form bounds, the Weyl-type growth of
//! μ_k, the eigenfunction sup-norm growth, and orthonormality.

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::FieldSpec;
use super::galerkin::{laplacian_matrix, min_eigenvalue, operator_matrix};
use super::model::{AngularModel, Eigenfunction};
use super::sphere::{SpherePoint, SphereRule};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormBoundsReport {
    pub min_eig_upper_gap: f64,
    pub min_eig_lower_gap: f64,
}

impl FormBoundsReport {
    pub fn passes(&self) -> bool {
        self.min_eig_upper_gap >= -1e-10 && self.min_eig_lower_gap >= -1e-10
    }
}

/// Smallest eigenvalues of
/// (−3/2 Δ + 3‖A‖²_∞ + ‖a‖_∞) − L and L − (−1/2 Δ − ‖A‖²_∞ − ‖a‖_∞).
pub fn verify_form_bounds(spec: &FieldSpec, m: usize) -> Result<FormBoundsReport> {
    let (electric, magnetic) = spec
        .as_fourier2d()
        .ok_or_else(|| Error::Dimension(format!("form bounds need an n = 2 field, got {}", spec.label())))?;
    let l = operator_matrix(&electric, &magnetic, m);
    let lap = laplacian_matrix(m);
    if (l.nrows(), l.ncols()) != (lap.nrows(), lap.ncols()) {
        return Err(Error::Dimension("operator and Laplacian matrices differ in size".into()));
    }
    let a_sup = electric.sup_abs_sampled();
    let big_a_sup = magnetic.sup_abs_sampled();
    let n = l.nrows();
    let shift_up = 3.0 * big_a_sup * big_a_sup + a_sup;
    let shift_lo = big_a_sup * big_a_sup + a_sup;
    let diag = |r: usize, c: usize, v: f64| if r == c { Complex64::new(v, 0.0) } else { Complex64::new(0.0, 0.0) };
    let upper = Mat::from_fn(n, n, |r, c| lap[(r, c)] * 1.5 + diag(r, c, shift_up) - l[(r, c)]);
    let lower = Mat::from_fn(n, n, |r, c| l[(r, c)] - lap[(r, c)] * 0.5 + diag(r, c, shift_lo));
    Ok(FormBoundsReport {
        min_eig_upper_gap: min_eigenvalue(&upper)?,
        min_eig_lower_gap: min_eigenvalue(&lower)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylReport {
    pub ratio_min: f64,
    pub ratio_max: f64,
}

/// Range of μ_k / k^{2/(n−1)} over 10 ≤ k ≤ K_max.
pub fn verify_weyl_growth(model: &AngularModel) -> Result<WeylReport> {
    if model.len() < 20 {
        return Err(Error::Config(format!("Weyl check needs at least 20 pairs, model has {}", model.len())));
    }
    let p = 2.0 / (model.dimension() as f64 - 1.0);
    let (lo, hi) = model
        .pairs
        .iter()
        .filter(|e| e.index >= 10)
        .map(|e| e.mu / (e.index as f64).powf(p))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
    Ok(WeylReport {
        ratio_min: lo,
        ratio_max: hi,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupNormReport {
    pub c_best: f64,
    pub empirical_sups: Vec<f64>,
}

fn sample_grid(dimension: usize, sample_points: usize) -> Vec<SpherePoint> {
    let n = sample_points.max(4);
    if dimension == 2 {
        return SphereRule::circle(n).points;
    }
    let mut pts = vec![SpherePoint::north_pole(), SpherePoint::sphere(std::f64::consts::PI, 0.0)];
    for i in 1..n {
        let polar = std::f64::consts::PI * i as f64 / n as f64;
        for j in 0..2 * n {
            pts.push(SpherePoint::sphere(polar, std::f64::consts::PI * j as f64 / n as f64));
        }
    }
    pts
}

/// C_best = max_k (grid sup of |ψ_k|) / max(1, μ_k)^{b_n}.
pub fn verify_sup_norm_bound(model: &AngularModel, sample_points: usize) -> SupNormReport {
    let pts = sample_grid(model.dimension(), sample_points);
    let empirical_sups: Vec<f64> = model
        .pairs
        .iter()
        .map(|p| pts.iter().map(|x| p.psi.eval(x).norm()).fold(0.0, f64::max))
        .collect();
    let c_best = model
        .pairs
        .iter()
        .zip(&empirical_sups)
        .map(|(p, s)| s / p.mu.max(1.0).powf(model.b_n))
        .fold(0.0, f64::max);
    SupNormReport { c_best, empirical_sups }
}

/// max |G − I| for the Gram matrix of the first `count` eigenfunctions.
pub fn gram_deviation(model: &AngularModel, count: usize) -> f64 {
    let count = count.min(model.len());
    let rule = match model.dimension() {
        2 => {
            let top = model.pairs[..count]
                .iter()
                .map(|p| match &p.psi {
                    Eigenfunction::Fourier { modes } => modes.iter().map(|(k, _)| k.unsigned_abs()).max().unwrap_or(0),
                    _ => 0,
                })
                .max()
                .unwrap_or(0) as usize;
            SphereRule::circle(2 * top + 8)
        }
        _ => {
            let lmax = model.pairs[..count]
                .iter()
                .map(|p| match p.psi {
                    Eigenfunction::SphericalHarmonic { l, .. } => l,
                    _ => 0,
                })
                .max()
                .unwrap_or(0);
            SphereRule::sphere(lmax + 2, 2 * lmax + 4)
        }
    };
    let values: Vec<Vec<Complex64>> = model.pairs[..count]
        .iter()
        .map(|p| rule.points.iter().map(|x| p.psi.eval(x)).collect())
        .collect();
    let mut worst: f64 = 0.0;
    for i in 0..count {
        for j in 0..count {
            let g: Complex64 = values[i]
                .iter()
                .zip(&values[j])
                .zip(&rule.weights)
                .map(|((a, b), w)| a * b.conj() * *w)
                .sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - target).norm());
        }
    }
    worst
}
