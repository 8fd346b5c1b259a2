use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use super::{log_gamma, BesselOrder};
use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;

const ORACLE_REL_TOL: f64 = 1e-9;

/// I_ν(w) from the integral representation
///
/// ```text
/// I_ν(w) = w^ν / (2^ν Γ(ν+1/2) Γ(1/2)) ∫_{-1}^{1} (1-s²)^{ν-1/2} e^{ws} ds
/// ```
///
/// evaluated by adaptive Gauss–Kronrod after the substitution s = sin u,
/// which turns the weight into cos^{2ν} u and removes the endpoint
/// singularity for ν < 1/2. `w^ν` takes the principal branch.
pub fn bessel_oracle(nu: BesselOrder, w: Complex64) -> Result<Complex64> {
    let nu = nu.value();
    if !(w.re.is_finite() && w.im.is_finite()) {
        return Err(Error::Domain(format!("bessel_oracle needs a finite argument, got {w}")));
    }
    let ln_norm = -nu * std::f64::consts::LN_2 - log_gamma(nu + 0.5)? - 0.5 * PI.ln();
    let prefactor = if w.norm() == 0.0 {
        if nu == 0.0 {
            Complex64::new(ln_norm.exp(), 0.0)
        } else {
            return Ok(Complex64::new(0.0, 0.0));
        }
    } else {
        let modulus = (nu * w.norm().ln() + ln_norm).exp();
        Complex64::from_polar(modulus, nu * w.arg())
    };

    let integrand = |u: f64| {
        let c = u.cos().max(0.0);
        let weight = if nu == 0.0 { 1.0 } else { c.powf(2.0 * nu) };
        (w * u.sin()).exp() * weight
    };
    // ∫ |integrand| ≤ π e^{|Re w|}; used as the scale for the absolute floor.
    let scale = PI * w.re.abs().exp();
    let result = integrate_adaptive(integrand, -FRAC_PI_2, FRAC_PI_2, 1e-16 * scale, 1e-13, 20_000)?;
    let allowed = ORACLE_REL_TOL * result.value.norm() + 1e-14 * scale;
    if result.error > allowed {
        return Err(Error::ToleranceNotMet {
            requested: allowed,
            achieved: result.error,
        });
    }
    let value = prefactor * result.value;
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::Overflow {
            what: "bessel_oracle",
            detail: format!("nu = {nu}, w = {w}"),
        });
    }
    Ok(value)
}
