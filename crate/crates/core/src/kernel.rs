//! Truncated eigenfunction–Bessel series for the rescaled Schrödinger kernel
//! K(x,y) and heat kernel G(x,y), with a tail certificate.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angular::{build_model, AngularModel, FieldSpec, SpherePoint};
use crate::error::{Error, Result};
use crate::special::{bessel_i_imag, bessel_i_scaled, log_gamma, principal_phase, BesselOrder};

/// Exponents below this are treated as zero in the z → 0 limit.
const ZERO_EXPONENT: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    Schrodinger,
    Heat,
}

impl fmt::Display for Which {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Which::Schrodinger => "schrodinger",
            Which::Heat => "heat",
        })
    }
}

impl FromStr for Which {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "schrodinger" => Ok(Which::Schrodinger),
            "heat" => Ok(Which::Heat),
            _ => Err(Error::Config(format!("unknown kernel '{s}' (expected schrodinger|heat)"))),
        }
    }
}

/// x = r·ω with ω on S^{n−1}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacePoint {
    pub r: f64,
    pub omega: SpherePoint,
}

impl SpacePoint {
    pub fn new(r: f64, omega: SpherePoint) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::Domain(format!("radius must be finite and >= 0, got {r}")));
        }
        Ok(Self { r, omega })
    }

    pub fn circle(r: f64, theta: f64) -> Self {
        Self {
            r,
            omega: SpherePoint::circle(theta),
        }
    }

    pub fn sphere(r: f64, polar: f64, azimuth: f64) -> Self {
        Self {
            r,
            omega: SpherePoint::sphere(polar, azimuth),
        }
    }

    pub fn cartesian(&self) -> Vec<f64> {
        self.omega.cartesian().into_iter().map(|c| self.r * c).collect()
    }
}

/// One group of equal eigenvalues retained in the series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellTerm {
    pub range: Range<usize>,
    pub beta: f64,
}

/// Term majorant z^{β−(n−2)/2} sup² c(β) / (2^β Γ(β+1/2)),
/// c(β) = max(1, Γ(β+1/2)/Γ(β+1)).
fn term_bound(beta: f64, h: f64, sup: f64, z: f64) -> Result<f64> {
    let lg_half = log_gamma(beta + 0.5)?;
    let c = (lg_half - log_gamma(beta + 1.0)?).exp().max(1.0);
    let e = beta - h;
    let ln_rest = -beta * std::f64::consts::LN_2 - lg_half;
    let ln_term = if z == 0.0 {
        if e > ZERO_EXPONENT {
            return Ok(0.0);
        }
        ln_rest
    } else {
        e * z.ln() + ln_rest
    };
    Ok(ln_term.exp() * sup * sup * c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSeries {
    pub model: AngularModel,
    pub tol: f64,
    pub z_max: f64,
    pub k_used: usize,
    /// Certified bound on the discarded terms for z ≤ z_max.
    pub tail_bound: f64,
    pub shells: Vec<ShellTerm>,
}

/// Smallest number of leading eigenpairs (rounded up to a full shell) whose
/// tail bound at `z_max` is at most `tol`.
pub fn plan(model: &AngularModel, z_max: f64, tol: f64) -> Result<KernelSeries> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Config(format!("kernel tolerance must be positive, got {tol}")));
    }
    if !(z_max > 0.0 && z_max.is_finite()) {
        return Err(Error::Config(format!("z_max must be positive, got {z_max}")));
    }
    let h = 0.5 * (model.dimension() as f64 - 2.0);
    let terms = model
        .pairs
        .iter()
        .map(|p| term_bound(p.beta, h, p.sup_norm, z_max))
        .collect::<Result<Vec<f64>>>()?;
    // tails[k] = Σ_{j ≥ k} terms[j]
    let mut tails = vec![0.0; terms.len() + 1];
    for k in (0..terms.len()).rev() {
        tails[k] = tails[k + 1] + terms[k];
    }
    let last = *terms.last().unwrap_or(&f64::INFINITY);
    // The model is finite; the unseen remainder is negligible only if the
    // majorant has already collapsed at the last available pair.
    if last > 1e-3 * tol {
        return Err(Error::InsufficientEigenpairs {
            achieved: tails[0].max(last),
            tol,
            available: terms.len(),
        });
    }
    let mut k_used = (0..=terms.len()).find(|&k| tails[k] <= tol).unwrap_or(terms.len());
    let mut shells = Vec::new();
    for range in model.shells() {
        if range.start >= k_used && k_used > 0 {
            break;
        }
        k_used = k_used.max(range.end);
        shells.push(ShellTerm {
            beta: model.pairs[range.start].beta,
            range,
        });
    }
    Ok(KernelSeries {
        model: model.clone(),
        tol,
        z_max,
        k_used,
        tail_bound: tails[k_used],
        shells,
    })
}

/// Builds models of growing size until a plan at (z_max, tol) succeeds.
pub fn plan_auto(spec: &FieldSpec, z_max: f64, tol: f64) -> Result<KernelSeries> {
    let mut k_max = 32;
    loop {
        let model = build_model(spec, k_max)?;
        match plan(&model, z_max, tol) {
            Err(Error::InsufficientEigenpairs { .. }) if k_max < 1 << 16 => k_max *= 2,
            other => return other,
        }
    }
}

impl KernelSeries {
    pub fn dimension(&self) -> usize {
        self.model.dimension()
    }

    fn half_dim(&self) -> f64 {
        0.5 * (self.dimension() as f64 - 2.0)
    }

    pub fn check_certificate(&self, z: f64) -> Result<()> {
        if z > self.z_max * (1.0 + 1e-12) {
            return Err(Error::OutOfCertificate { z, z_max: self.z_max });
        }
        Ok(())
    }

    /// Per-shell radial coefficients of the weighted kernel z^{−θg}·K at
    /// z = |x||y|, excluding the heat factor e^{−(|x|−|y|)²/2}:
    ///
    /// Schrödinger: z^{−(n−2)/2−θg} I_β(−iz);  heat: z^{−(n−2)/2−θg} e^{−z} I_β(z).
    pub fn radial_factors(&self, z: f64, which: Which, theta: f64) -> Result<Vec<Complex64>> {
        self.radial_factors_upto(z, which, theta, self.shells.len())
    }

    fn radial_factors_upto(&self, z: f64, which: Which, theta: f64, count: usize) -> Result<Vec<Complex64>> {
        self.check_certificate(z)?;
        let h = self.half_dim();
        let shift = h + theta * self.model.g;
        self.shells[..count]
            .iter()
            .map(|s| {
                let nu = BesselOrder::new(s.beta)?;
                if z == 0.0 {
                    // J_β(z)/z^β and e^{−z}I_β(z)/z^β both tend to 1/(2^β Γ(β+1)).
                    let e = (s.beta - h) - theta * self.model.g;
                    if e > ZERO_EXPONENT {
                        return Ok(Complex64::new(0.0, 0.0));
                    }
                    let lead = (-s.beta * std::f64::consts::LN_2 - log_gamma(s.beta + 1.0)?).exp();
                    return Ok(match which {
                        Which::Schrodinger => principal_phase(s.beta) * lead,
                        Which::Heat => Complex64::new(lead, 0.0),
                    });
                }
                let weight = (-shift * z.ln()).exp();
                Ok(match which {
                    Which::Schrodinger => bessel_i_imag(nu, z)? * weight,
                    Which::Heat => Complex64::new(bessel_i_scaled(nu, z)? * weight, 0.0),
                })
            })
            .collect()
    }

    /// Per-shell angular products Σ_{k∈shell} ψ_k(ω) conj ψ_k(ω').
    pub fn angular_products(&self, omega_x: &SpherePoint, omega_y: &SpherePoint) -> Vec<Complex64> {
        self.shells
            .iter()
            .map(|s| self.model.shell_product(s.range.clone(), omega_x, omega_y))
            .collect()
    }

    fn combine(&self, x: &SpacePoint, y: &SpacePoint, which: Which, theta: f64, count: usize) -> Result<Complex64> {
        let z = x.r * y.r;
        let radial = self.radial_factors_upto(z, which, theta, count)?;
        let sum: Complex64 = radial
            .iter()
            .zip(&self.shells[..count])
            .map(|(f, s)| {
                if f.norm() == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    f * self.model.shell_product(s.range.clone(), &x.omega, &y.omega)
                }
            })
            .sum();
        Ok(match which {
            Which::Schrodinger => sum,
            Which::Heat => sum * (-0.5 * (x.r - y.r).powi(2)).exp(),
        })
    }

    /// K(x,y) with absolute error at most `tol` on the certified region.
    pub fn eval_schrodinger_k(&self, x: &SpacePoint, y: &SpacePoint) -> Result<Complex64> {
        self.combine(x, y, Which::Schrodinger, 0.0, self.shells.len())
    }

    /// G(x,y) with absolute error at most `tol` on the certified region.
    pub fn eval_heat_g(&self, x: &SpacePoint, y: &SpacePoint) -> Result<Complex64> {
        self.combine(x, y, Which::Heat, 0.0, self.shells.len())
    }

    pub fn eval(&self, x: &SpacePoint, y: &SpacePoint, which: Which) -> Result<Complex64> {
        self.combine(x, y, which, 0.0, self.shells.len())
    }

    /// A copy retaining at least `extra` more eigenpairs (whole shells),
    /// as far as the model allows.
    pub fn extended(&self, extra: usize) -> KernelSeries {
        let target = self.k_used + extra;
        let mut out = self.clone();
        for range in self.model.shells() {
            if range.start < self.k_used {
                continue;
            }
            if out.k_used >= target {
                break;
            }
            out.k_used = range.end;
            out.shells.push(ShellTerm {
                beta: self.model.pairs[range.start].beta,
                range,
            });
        }
        out
    }

    /// z^{−θg}|kernel(x,y)|, z = |x||y|, with the z → 0 limit taken termwise.
    pub fn weighted_kernel(&self, x: &SpacePoint, y: &SpacePoint, theta: f64, which: Which) -> Result<f64> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::Config(format!("theta must lie in [0, 1], got {theta}")));
        }
        Ok(self.combine(x, y, which, theta, self.shells.len())?.norm())
    }

    /// Σ_k z^{β_k−(n−2)/2} sup_k² c(β_k)/(2^{β_k} Γ(β_k+1/2)) over all stored pairs.
    pub fn majorant(&self, z: f64) -> Result<f64> {
        let h = self.half_dim();
        self.model
            .pairs
            .iter()
            .map(|p| term_bound(p.beta, h, p.sup_norm, z))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn term_bound_matches_direct_formula() {
        let b = term_bound(3.0, 0.0, 1.0, 2.0).unwrap();
        let direct = 8.0 / (8.0 * (log_gamma(3.5).unwrap()).exp());
        assert!((b - direct).abs() < 1e-15);
        assert_eq!(term_bound(3.0, 0.0, 1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn free_plan_is_short() {
        let m = build_model(&FieldSpec::free(2).unwrap(), 60).unwrap();
        let ks = plan(&m, 1.0, 1e-12).unwrap();
        assert!(ks.k_used <= 25, "{}", ks.k_used);
        assert!(ks.tail_bound <= 1e-12);
        let ab = build_model(&FieldSpec::aharonov_bohm(0.5).unwrap(), 60).unwrap();
        let small = plan(&ab, 0.5, 1e-12).unwrap();
        let big = plan(&ab, 1.0, 1e-12).unwrap();
        assert!(small.k_used < big.k_used);
    }

    #[test]
    fn plan_reports_missing_pairs() {
        let m = build_model(&FieldSpec::inverse_square_3d(2.0).unwrap(), 4).unwrap();
        assert!(matches!(plan(&m, 2.0, 1e-10), Err(Error::InsufficientEigenpairs { .. })));
        let ks = plan_auto(&FieldSpec::inverse_square_3d(2.0).unwrap(), 2.0, 1e-10).unwrap();
        assert!(ks.k_used > 0 && ks.k_used <= ks.model.len());
    }

    #[test]
    fn out_of_certificate_is_an_error() {
        let ks = plan_auto(&FieldSpec::free(2).unwrap(), 1.0, 1e-10).unwrap();
        let x = SpacePoint::circle(2.0, 0.0);
        assert!(matches!(ks.eval_schrodinger_k(&x, &x), Err(Error::OutOfCertificate { .. })));
    }

    #[test]
    fn origin_limits() {
        let ab = plan_auto(&FieldSpec::aharonov_bohm(0.3).unwrap(), 4.0, 1e-12).unwrap();
        let o = SpacePoint::circle(0.0, 0.0);
        let y = SpacePoint::circle(1.3, 0.4);
        assert_eq!(ab.eval_schrodinger_k(&o, &y).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(ab.eval_heat_g(&o, &y).unwrap(), Complex64::new(0.0, 0.0));
        let free = plan_auto(&FieldSpec::free(2).unwrap(), 4.0, 1e-12).unwrap();
        let k = free.eval_schrodinger_k(&o, &y).unwrap();
        assert!((k - Complex64::new(0.5 / PI, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn weighted_limit_keeps_leading_term() {
        // α = 1/2: shells k = −1, 0 share β = 1/2; z^{β−g}·I_β(−iz)/... → phase/(2^{1/2}Γ(3/2))
        let ab = plan_auto(&FieldSpec::aharonov_bohm(0.5).unwrap(), 4.0, 1e-12).unwrap();
        let o = SpacePoint::circle(0.0, 0.0);
        let y = SpacePoint::circle(1.0, 0.0);
        let w0 = ab.weighted_kernel(&o, &y, 1.0, Which::Schrodinger).unwrap();
        let lead = 1.0 / (2f64.sqrt() * 0.5 * PI.sqrt());
        let want = lead * 2.0 / (2.0 * PI);
        assert!((w0 - want).abs() < 1e-14, "{w0} vs {want}");
        let near = SpacePoint::circle(1e-6, 0.0);
        let w1 = ab.weighted_kernel(&near, &y, 1.0, Which::Schrodinger).unwrap();
        assert!((w1 - want).abs() < 1e-6);
        assert_eq!(ab.weighted_kernel(&o, &y, 0.5, Which::Schrodinger).unwrap(), 0.0);
    }

    #[test]
    fn free_theta_weight_is_trivial() {
        let free = plan_auto(&FieldSpec::free(2).unwrap(), 10.0, 1e-12).unwrap();
        let x = SpacePoint::circle(1.7, 0.2);
        let y = SpacePoint::circle(2.1, 2.9);
        let w = free.weighted_kernel(&x, &y, 1.0, Which::Schrodinger).unwrap();
        assert!((w - 0.5 / PI).abs() < 1e-10);
        let k = free.eval_schrodinger_k(&x, &y).unwrap().norm();
        assert_eq!(free.weighted_kernel(&x, &y, 0.0, Which::Schrodinger).unwrap(), k);
    }
}
