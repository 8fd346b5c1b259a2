use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real trigonometric polynomial on S¹,
/// f(θ) = c₀ + Σ_{m≥1} (c_m e^{imθ} + conj(c_m) e^{−imθ}).
///
/// Only the nonnegative modes are stored; the negative ones follow from
/// Hermitian symmetry, so f is real by construction.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TrigPoly {
    coeffs: Vec<Complex64>,
}

impl TrigPoly {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        let p = Self { coeffs };
        p.validate()?;
        Ok(p)
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            coeffs: vec![Complex64::new(c, 0.0)],
        }
    }

    /// c₀ + Σ (a_m cos mθ + b_m sin mθ), with `cos[0]` the constant term.
    pub fn from_cos_sin(cos: &[f64], sin: &[f64]) -> Self {
        let degree = cos.len().max(sin.len() + 1).max(1);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); degree];
        for (m, c) in coeffs.iter_mut().enumerate() {
            let a = cos.get(m).copied().unwrap_or(0.0);
            if m == 0 {
                *c = Complex64::new(a, 0.0);
            } else {
                let b = sin.get(m - 1).copied().unwrap_or(0.0);
                *c = Complex64::new(0.5 * a, -0.5 * b);
            }
        }
        Self { coeffs }
    }

    pub fn validate(&self) -> Result<()> {
        if self.coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Config("trigonometric coefficients must be finite".into()));
        }
        if let Some(c0) = self.coeffs.first() {
            if c0.im != 0.0 {
                return Err(Error::Config(
                    "constant Fourier coefficient must be real (Hermitian symmetry)".into(),
                ));
            }
        }
        Ok(())
    }

    /// Highest retained mode.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm() == 0.0)
    }

    /// Fourier coefficient f̂_m for any signed m.
    pub fn coeff(&self, m: i64) -> Complex64 {
        let idx = m.unsigned_abs() as usize;
        match self.coeffs.get(idx) {
            Some(c) if m >= 0 => *c,
            Some(c) => c.conj(),
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let mut acc = self.coeff(0).re;
        for (m, c) in self.coeffs.iter().enumerate().skip(1) {
            acc += 2.0 * (*c * Complex64::from_polar(1.0, m as f64 * theta)).re;
        }
        acc
    }

    /// Exact product of two trigonometric polynomials.
    pub fn product(&self, other: &TrigPoly) -> TrigPoly {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return TrigPoly::zero();
        }
        let d1 = self.degree() as i64;
        let d2 = other.degree() as i64;
        let d = d1 + d2;
        let coeffs = (0..=d)
            .map(|m| {
                (-d1..=d1)
                    .map(|j| self.coeff(j) * other.coeff(m - j))
                    .sum::<Complex64>()
            })
            .collect();
        TrigPoly { coeffs }
    }

    /// sup |f| estimated by sampling 16·(degree+1) equispaced points.
    pub fn sup_abs_sampled(&self) -> f64 {
        let n = 16 * (self.degree() + 1);
        (0..n)
            .map(|j| self.eval(2.0 * std::f64::consts::PI * j as f64 / n as f64).abs())
            .fold(0.0, f64::max)
    }
}

/// The potential pair (A, a) of the angular operator and the dimension n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub dimension: usize,
    pub variant: FieldVariant,
}

/// Supported potential families. Only the tangential component of A is
/// ever represented, so the transversal gauge holds structurally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldVariant {
    Free,
    AharonovBohm {
        alpha: f64,
    },
    /// General n = 2 field: `electric` is a(θ), `magnetic` is A(θ)·τ.
    Fourier2d {
        electric: TrigPoly,
        magnetic: TrigPoly,
    },
    /// A = 0, a constant, n = 3.
    InverseSquare3d {
        a: f64,
    },
}

impl FieldSpec {
    pub fn free(dimension: usize) -> Result<Self> {
        let spec = Self {
            dimension,
            variant: FieldVariant::Free,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn aharonov_bohm(alpha: f64) -> Result<Self> {
        let spec = Self {
            dimension: 2,
            variant: FieldVariant::AharonovBohm { alpha },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn fourier2d(electric: TrigPoly, magnetic: TrigPoly) -> Result<Self> {
        let spec = Self {
            dimension: 2,
            variant: FieldVariant::Fourier2d { electric, magnetic },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn inverse_square_3d(a: f64) -> Result<Self> {
        let spec = Self {
            dimension: 3,
            variant: FieldVariant::InverseSquare3d { a },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dimension;
        if n < 2 {
            return Err(Error::Config(format!("dimension must be >= 2, got {n}")));
        }
        match &self.variant {
            FieldVariant::Free if n == 2 || n == 3 => Ok(()),
            FieldVariant::Free => Err(Error::Config(format!(
                "free angular model is only built for n = 2, 3 (got {n})"
            ))),
            FieldVariant::AharonovBohm { alpha } => {
                if n != 2 {
                    return Err(Error::Config("Aharonov-Bohm field requires n = 2".into()));
                }
                if !alpha.is_finite() {
                    return Err(Error::Config("flux alpha must be finite".into()));
                }
                Ok(())
            }
            FieldVariant::Fourier2d { electric, magnetic } => {
                if n != 2 {
                    return Err(Error::Config("Fourier2d field requires n = 2".into()));
                }
                electric.validate()?;
                magnetic.validate()
            }
            FieldVariant::InverseSquare3d { a } => {
                if n != 3 {
                    return Err(Error::Config("inverse-square field requires n = 3".into()));
                }
                if !a.is_finite() {
                    return Err(Error::Config("coupling a must be finite".into()));
                }
                Ok(())
            }
        }
    }

    /// Whether the angular operator commutes with rotations of S^{n-1}, so
    /// kernels depend on the two angles only through their difference.
    pub fn is_rotation_invariant(&self) -> bool {
        !matches!(self.variant, FieldVariant::Fourier2d { .. })
    }

    /// The same n = 2 field written as Fourier data (A, a).
    pub fn as_fourier2d(&self) -> Option<(TrigPoly, TrigPoly)> {
        match &self.variant {
            FieldVariant::Free if self.dimension == 2 => Some((TrigPoly::zero(), TrigPoly::zero())),
            FieldVariant::AharonovBohm { alpha } => Some((TrigPoly::zero(), TrigPoly::constant(*alpha))),
            FieldVariant::Fourier2d { electric, magnetic } => Some((electric.clone(), magnetic.clone())),
            _ => None,
        }
    }

    /// Short identifier used in reports.
    pub fn label(&self) -> String {
        match &self.variant {
            FieldVariant::Free => format!("free{}d", self.dimension),
            FieldVariant::AharonovBohm { alpha } => format!("ab:{alpha}"),
            FieldVariant::Fourier2d { electric, magnetic } => {
                format!("fourier2d(deg a={}, deg A={})", electric.degree(), magnetic.degree())
            }
            FieldVariant::InverseSquare3d { a } => format!("invsq3d:{a}"),
        }
    }
}
