use std::f64::consts::PI;
use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::{FieldSpec, FieldVariant, TrigPoly};
use super::galerkin::{hermitian_eigen, operator_matrix};
use super::sphere::{legendre, spherical_harmonic, SpherePoint};
use crate::error::{Error, Result};

/// Relative eigenvalue shift allowed between Galerkin sizes M and 2M.
pub const GALERKIN_TOL: f64 = 1e-10;

const COEFF_CUTOFF: f64 = 1e-16;
const PHASE_THRESHOLD: f64 = 1e-8;

/// Canonical label used to break ties between equal eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModeLabel {
    Fourier { k: i64 },
    Spherical { l: usize, m: i64 },
}

/// An eigenfunction of L, stored as data from which it is re-evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Eigenfunction {
    /// Σ c_k e^{ikθ}/√(2π).
    Fourier { modes: Vec<(i64, Complex64)> },
    /// Y_l^m on S².
    SphericalHarmonic { l: usize, m: i64 },
}

impl Eigenfunction {
    pub fn eval(&self, p: &SpherePoint) -> Complex64 {
        match (self, *p) {
            (Eigenfunction::Fourier { modes }, SpherePoint::Circle { theta }) => {
                let s: Complex64 = modes
                    .iter()
                    .map(|&(k, c)| c * Complex64::from_polar(1.0, k as f64 * theta))
                    .sum();
                s / (2.0 * PI).sqrt()
            }
            (Eigenfunction::SphericalHarmonic { l, m }, SpherePoint::Sphere { polar, azimuth }) => {
                spherical_harmonic(*l, *m, polar, azimuth)
            }
            _ => panic!("eigenfunction evaluated on a point of the wrong sphere"),
        }
    }

    /// An upper bound for sup |ψ|; exact for single Fourier modes and for
    /// zonal harmonics.
    pub fn sup_bound(&self) -> f64 {
        match self {
            Eigenfunction::Fourier { modes } => modes.iter().map(|(_, c)| c.norm()).sum::<f64>() / (2.0 * PI).sqrt(),
            Eigenfunction::SphericalHarmonic { l, .. } => ((2 * l + 1) as f64 / (4.0 * PI)).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub index: usize,
    pub mu: f64,
    pub beta: f64,
    /// (n−1)/2 − β; carried along, not used by any kernel formula.
    pub alpha_order: f64,
    pub sup_norm: f64,
    pub label: ModeLabel,
    pub psi: Eigenfunction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum SolverInfo {
    Analytic,
    Galerkin {
        basis_half_width: usize,
        refined_half_width: usize,
        max_relative_shift: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularModel {
    pub spec: FieldSpec,
    pub pairs: Vec<EigenPair>,
    pub g: f64,
    pub b_n: f64,
    /// C with sup_norm(k) ≤ C·max(1, μ_k)^{b_n} for every stored pair.
    pub sup_constant: f64,
    pub solver: SolverInfo,
}

/// Exponent b_n in ‖ψ_k‖_∞ ≲ μ_k^{b_n}.
pub fn sup_growth_exponent(n: usize) -> f64 {
    match n {
        2 => 0.0,
        3 => 0.5,
        _ => (n as f64 - 1.0) / 4.0,
    }
}

fn order_beta(n: usize, mu: f64) -> f64 {
    let h = 0.5 * (n as f64 - 2.0);
    (h * h + mu).sqrt()
}

/// g = √(((n−2)/2)² + μ₁) − (n−2)/2.
pub fn gain_exponent(model: &AngularModel) -> f64 {
    model.g
}

struct RawPair {
    mu: f64,
    label: ModeLabel,
    psi: Eigenfunction,
}

/// The `k_max` lowest eigenpairs of L, sorted by (μ, label).
pub fn build_model(spec: &FieldSpec, k_max: usize) -> Result<AngularModel> {
    spec.validate()?;
    if k_max == 0 {
        return Err(Error::Config("k_max must be at least 1".into()));
    }
    let n = spec.dimension;
    let (mut raw, solver) = match &spec.variant {
        FieldVariant::Free if n == 2 => (fourier_pairs(0.0, k_max), SolverInfo::Analytic),
        FieldVariant::AharonovBohm { alpha } => (fourier_pairs(*alpha, k_max), SolverInfo::Analytic),
        FieldVariant::Free => (harmonic_pairs(0.0, k_max), SolverInfo::Analytic),
        FieldVariant::InverseSquare3d { a } => (harmonic_pairs(*a, k_max), SolverInfo::Analytic),
        FieldVariant::Fourier2d { electric, magnetic } => galerkin_pairs(electric, magnetic, k_max)?,
    };
    raw.sort_by(|a, b| a.mu.total_cmp(&b.mu).then(a.label.cmp(&b.label)));
    raw.truncate(k_max);

    let mu1 = raw[0].mu;
    if mu1 < 0.0 {
        let h = 0.5 * (n as f64 - 2.0);
        return Err(Error::ModelRejected {
            mu1,
            hardy_admissible: mu1 > -h * h,
        });
    }

    let h = 0.5 * (n as f64 - 2.0);
    let b_n = sup_growth_exponent(n);
    let pairs: Vec<EigenPair> = raw
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let beta = order_beta(n, r.mu);
            EigenPair {
                index: i + 1,
                mu: r.mu,
                beta,
                alpha_order: 0.5 * (n as f64 - 1.0) - beta,
                sup_norm: r.psi.sup_bound(),
                label: r.label,
                psi: r.psi,
            }
        })
        .collect();
    let g = pairs[0].beta - h;
    let sup_constant = pairs
        .iter()
        .map(|p| p.sup_norm / p.mu.max(1.0).powf(b_n))
        .fold(0.0, f64::max);
    Ok(AngularModel {
        spec: spec.clone(),
        pairs,
        g,
        b_n,
        sup_constant,
        solver,
    })
}

fn fourier_pairs(alpha: f64, k_max: usize) -> Vec<RawPair> {
    // (k+α)² for |k + α| small: take every k in a window that surely holds
    // the k_max smallest values.
    let shift = alpha.round() as i64;
    let half = k_max as i64 + 1;
    (-half - shift..=half - shift)
        .map(|k| RawPair {
            mu: (k as f64 + alpha).powi(2),
            label: ModeLabel::Fourier { k },
            psi: Eigenfunction::Fourier {
                modes: vec![(k, Complex64::new(1.0, 0.0))],
            },
        })
        .collect()
}

fn harmonic_pairs(a: f64, k_max: usize) -> Vec<RawPair> {
    let mut out = Vec::new();
    let mut l = 0usize;
    while out.len() < k_max {
        let mu = (l * (l + 1)) as f64 + a;
        for m in -(l as i64)..=(l as i64) {
            out.push(RawPair {
                mu,
                label: ModeLabel::Spherical { l, m },
                psi: Eigenfunction::SphericalHarmonic { l, m },
            });
        }
        l += 1;
    }
    out
}

/// Basis half-width M for a given field and number of wanted pairs.
pub fn galerkin_half_width(electric: &TrigPoly, magnetic: &TrigPoly, k_max: usize) -> usize {
    let deg = electric.degree().max(magnetic.degree());
    k_max + 8 * (deg + 1)
}

fn galerkin_pairs(electric: &TrigPoly, magnetic: &TrigPoly, k_max: usize) -> Result<(Vec<RawPair>, SolverInfo)> {
    let m = galerkin_half_width(electric, magnetic, k_max);
    let m2 = 2 * m;
    let (coarse, _) = hermitian_eigen(&operator_matrix(electric, magnetic, m))?;
    let (fine, vectors) = hermitian_eigen(&operator_matrix(electric, magnetic, m2))?;
    let mut shift: f64 = 0.0;
    for (a, b) in coarse.iter().zip(&fine).take(k_max) {
        shift = shift.max((a - b).abs() / b.abs().max(1.0));
    }
    if shift > GALERKIN_TOL {
        return Err(Error::Resolution {
            shift,
            m,
            m2,
            tol: GALERKIN_TOL,
        });
    }
    let samples = SpherePoint::canonical_samples(2);
    let pairs = (0..k_max)
        .map(|col| {
            let mut modes: Vec<(i64, Complex64)> = (0..vectors.nrows())
                .map(|i| (i as i64 - m2 as i64, vectors[(i, col)]))
                .filter(|(_, c)| c.norm() > COEFF_CUTOFF)
                .collect();
            let dominant = modes
                .iter()
                .fold((0i64, -1.0), |acc, &(k, c)| if c.norm() > acc.1 { (k, c.norm()) } else { acc })
                .0;
            let mut psi = Eigenfunction::Fourier { modes: modes.clone() };
            if let Some(v) = samples.iter().map(|p| psi.eval(p)).find(|v| v.norm() > PHASE_THRESHOLD) {
                let phase = v.conj() / v.norm();
                for (_, c) in modes.iter_mut() {
                    *c *= phase;
                }
                psi = Eigenfunction::Fourier { modes };
            }
            RawPair {
                mu: fine[col],
                label: ModeLabel::Fourier { k: dominant },
                psi,
            }
        })
        .collect();
    Ok((
        pairs,
        SolverInfo::Galerkin {
            basis_half_width: m,
            refined_half_width: m2,
            max_relative_shift: shift,
        },
    ))
}

impl AngularModel {
    pub fn dimension(&self) -> usize {
        self.spec.dimension
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.mu).collect()
    }

    /// Index ranges of (numerically) equal eigenvalues, in order.
    pub fn shells(&self) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.pairs.len() {
            let split = i == self.pairs.len() || {
                let a = self.pairs[start].mu;
                let b = self.pairs[i].mu;
                (b - a).abs() > 1e-9 * a.abs().max(1.0)
            };
            if split {
                out.push(start..i);
                start = i;
            }
        }
        out
    }

    /// Σ_{k ∈ shell} ψ_k(x) conj ψ_k(y).
    pub fn shell_product(&self, shell: Range<usize>, x: &SpherePoint, y: &SpherePoint) -> Complex64 {
        if let Some(l) = self.complete_harmonic_shell(&shell) {
            let c = x.cos_angle(y);
            return Complex64::new((2 * l + 1) as f64 / (4.0 * PI) * legendre(l, c), 0.0);
        }
        self.pairs[shell]
            .iter()
            .map(|p| p.psi.eval(x) * p.psi.eval(y).conj())
            .sum()
    }

    /// Degree l if the shell holds every Y_l^m, so the addition theorem applies.
    pub fn complete_harmonic_shell(&self, shell: &Range<usize>) -> Option<usize> {
        match self.pairs[shell.start].psi {
            Eigenfunction::SphericalHarmonic { l, .. } if shell.len() == 2 * l + 1 => Some(l),
            _ => None,
        }
    }

    /// Whether the kernels depend on the angles only through their mutual angle.
    pub fn is_isotropic(&self) -> bool {
        self.spec.is_rotation_invariant()
    }
}
