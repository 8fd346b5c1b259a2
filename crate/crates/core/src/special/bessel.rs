use std::f64::consts::PI;

use num_complex::Complex64;

use super::{log_gamma, BesselOrder};
use crate::error::{Error, Result};

const SERIES_EPS: f64 = 1e-17;
const CF_EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;
const MAX_ITER: usize = 200_000;

fn check_arg(x: f64, what: &str) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} needs a finite argument >= 0, got {x}")))
    }
}

fn finite(v: f64, what: &'static str, nu: f64, x: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow {
            what,
            detail: format!("nu = {nu}, x = {x} produced {v}"),
        })
    }
}

/// ln((x/2)^ν / Γ(ν+1)), the leading factor of both ascending series.
fn ln_series_prefactor(nu: f64, x: f64) -> Result<f64> {
    let lead = if nu == 0.0 { 0.0 } else { nu * (0.5 * x).ln() };
    Ok(lead - log_gamma(nu + 1.0)?)
}

/// Σ (±q)^m / (m! (ν+1)_m) with q = x²/4.
fn ascending_sum(nu: f64, x: f64, sign: f64) -> Result<f64> {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..MAX_ITER {
        let mf = m as f64;
        term *= sign * q / (mf * (nu + mf));
        sum += term;
        if term.abs() <= SERIES_EPS * sum.abs() {
            return Ok(sum);
        }
        if !sum.is_finite() {
            break;
        }
    }
    Err(Error::Overflow {
        what: "Bessel ascending series",
        detail: format!("no convergence for nu = {nu}, x = {x}"),
    })
}

/// J_ν(x) for x ≥ 2 by Steed's method: CF1 for J'_ν/J_ν, downward
/// recurrence to a low order μ, CF2 for (J'_μ + iY'_μ)/(J_μ + iY_μ), and the
/// Wronskian to fix the normalization.
fn steed_j(nu: f64, x: f64) -> Result<f64> {
    let nl = (nu - x + 1.5).floor().max(0.0) as usize;
    let mu = nu - nl as f64;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / PI;

    // CF1
    let mut isign = 1.0;
    let mut h = (nu * xi).max(FPMIN);
    let mut b = xi2 * nu;
    let mut d = 0.0;
    let mut c = h;
    let mut converged = false;
    for _ in 0..MAX_ITER {
        b += xi2;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b - 1.0 / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() < CF_EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Overflow {
            what: "Bessel J continued fraction (CF1)",
            detail: format!("no convergence for nu = {nu}, x = {x}"),
        });
    }

    // Downward recurrence from ν to μ on unnormalized values.
    let mut rjl = isign * FPMIN;
    let mut rjpl = h * rjl;
    let rjl_top = rjl;
    let mut fact = nu * xi;
    let mut rescale = 1.0;
    for _ in 0..nl {
        let next = fact * rjl + rjpl;
        fact -= xi;
        rjpl = fact * next - rjl;
        rjl = next;
        if rjl.abs() > 1e250 {
            rjl *= 1e-250;
            rjpl *= 1e-250;
            rescale *= 1e-250;
        }
    }
    if rjl == 0.0 {
        rjl = CF_EPS;
    }
    let f = rjpl / rjl;

    // CF2 (Steed), complex arithmetic written out.
    let mut a = 0.25 - mu * mu;
    let mut p = -0.5 * xi;
    let mut q = 1.0;
    let br = 2.0 * x;
    let mut bi = 2.0;
    let mut fct = a * xi / (p * p + q * q);
    let mut cr = br + q * fct;
    let mut ci = bi + p * fct;
    let mut den = br * br + bi * bi;
    let mut dr = br / den;
    let mut di = -bi / den;
    let mut dlr = cr * dr - ci * di;
    let mut dli = cr * di + ci * dr;
    let mut tmp = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = tmp;
    converged = false;
    for i in 2..MAX_ITER {
        a += 2.0 * (i as f64 - 1.0);
        bi += 2.0;
        dr = a * dr + br;
        di = a * di + bi;
        if dr.abs() + di.abs() < FPMIN {
            dr = FPMIN;
        }
        fct = a / (cr * cr + ci * ci);
        cr = br + cr * fct;
        ci = bi - ci * fct;
        if cr.abs() + ci.abs() < FPMIN {
            cr = FPMIN;
        }
        den = dr * dr + di * di;
        dr /= den;
        di /= -den;
        dlr = cr * dr - ci * di;
        dli = cr * di + ci * dr;
        tmp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = tmp;
        if (dlr - 1.0).abs() + dli.abs() < CF_EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Overflow {
            what: "Bessel J continued fraction (CF2)",
            detail: format!("no convergence for nu = {nu}, x = {x}"),
        });
    }
    let gam = (p - f) / q;
    let rjmu = (w / ((p - f) * gam + q)).sqrt().copysign(rjl);
    Ok(rjl_top * (rjmu / rjl) * rescale)
}

/// Bessel function of the first kind J_ν(x), ν ≥ 0, x ≥ 0.
pub fn bessel_j(nu: BesselOrder, x: f64) -> Result<f64> {
    check_arg(x, "bessel_j")?;
    let nu = nu.value();
    if x == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    // The alternating series is used only where its terms decrease from the
    // start (x²/4 ≤ (ν+1)/2), so the sum loses at most a factor ~4.
    let value = if x < 2.0 || 0.25 * x * x <= 0.5 * (nu + 1.0) {
        let ln_pre = ln_series_prefactor(nu, x)?;
        ascending_sum(nu, x, -1.0)? * ln_pre.exp()
    } else {
        steed_j(nu, x)?
    };
    finite(value, "bessel_j", nu, x)
}

/// I_ν(−iz) = e^{−iπν/2} J_ν(z), principal branch of i^{−ν}.
pub fn bessel_i_imag(nu: BesselOrder, z: f64) -> Result<Complex64> {
    let j = bessel_j(nu, z)?;
    Ok(principal_phase(nu.value()) * j)
}

/// e^{−iπν/2}.
pub fn principal_phase(nu: f64) -> Complex64 {
    let angle = -0.5 * PI * nu;
    Complex64::new(angle.cos(), angle.sin())
}

/// Exponentially scaled modified Bessel function e^{−x} I_ν(x).
pub fn bessel_i_scaled(nu: BesselOrder, x: f64) -> Result<f64> {
    check_arg(x, "bessel_i_scaled")?;
    let nu = nu.value();
    if x == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    if x > 600.0 {
        return Err(Error::Overflow {
            what: "bessel_i_scaled",
            detail: format!("argument {x} beyond the series range"),
        });
    }
    let ln_pre = ln_series_prefactor(nu, x)? - x;
    let v = ascending_sum(nu, x, 1.0)? * ln_pre.exp();
    finite(v, "bessel_i_scaled", nu, x)
}

/// Modified Bessel function I_ν(x) on the real half-line.
pub fn bessel_i_real(nu: BesselOrder, x: f64) -> Result<f64> {
    check_arg(x, "bessel_i_real")?;
    if x == 0.0 {
        return Ok(if nu.value() == 0.0 { 1.0 } else { 0.0 });
    }
    let ln_pre = ln_series_prefactor(nu.value(), x)?;
    let v = ascending_sum(nu.value(), x, 1.0)? * ln_pre.exp();
    finite(v, "bessel_i_real", nu.value(), x)
}

/// z^ν / (2^ν Γ(ν + 1/2)), the majorant of |I_ν(±iz)| and of e^{−z} I_ν(z)
/// that comes out of the integral representation (up to the constant
/// Γ(ν+1/2)/Γ(ν+1) ≤ √π, which exceeds one only for ν below ~0.7).
pub fn poisson_bound(nu: BesselOrder, z: f64) -> Result<f64> {
    check_arg(z, "poisson_bound")?;
    let nu = nu.value();
    let ln_g = log_gamma(nu + 0.5)?;
    if z == 0.0 {
        return Ok(if nu == 0.0 { (-ln_g).exp() } else { 0.0 });
    }
    Ok((nu * (z.ln() - std::f64::consts::LN_2) - ln_g).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn o(nu: f64) -> BesselOrder {
        BesselOrder::new(nu).unwrap()
    }

    #[test]
    fn trivial_values() {
        assert_eq!(bessel_j(o(0.0), 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(o(2.5), 0.0).unwrap(), 0.0);
        assert_eq!(bessel_i_real(o(0.0), 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i_real(o(3.0), 0.0).unwrap(), 0.0);
        let i0 = bessel_i_imag(o(0.0), 0.0).unwrap();
        assert_eq!(i0, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn half_order_closed_form() {
        // J_{1/2}(x) = sqrt(2/(πx)) sin x
        assert!(bessel_j(o(0.5), PI).unwrap().abs() < 1e-12);
        for &x in &[0.1, 0.7, 1.9, 2.0, 3.3, 7.5, 19.0, 42.0, 99.0] {
            let want = (2.0 / (PI * x)).sqrt() * x.sin();
            let got = bessel_j(o(0.5), x).unwrap();
            assert!((got - want).abs() < 1e-13 * (1.0 + want.abs()), "x={x} got={got} want={want}");
            // J_{3/2}(x) = sqrt(2/(πx)) (sin x / x − cos x)
            let want32 = (2.0 / (PI * x)).sqrt() * (x.sin() / x - x.cos());
            let got32 = bessel_j(o(1.5), x).unwrap();
            assert!((got32 - want32).abs() < 1e-13 * (1.0 + want32.abs()), "x={x}");
        }
        assert!(bessel_i_imag(o(0.5), PI).unwrap().norm() < 1e-12);
    }

    #[test]
    fn known_integer_order_values() {
        // reference values (A&S tables)
        assert_relative_eq!(bessel_j(o(0.0), 1.0).unwrap(), 0.765_197_686_557_966_6, max_relative = 1e-14);
        assert_relative_eq!(bessel_j(o(1.0), 10.0).unwrap(), 0.043_472_746_168_861_44, max_relative = 1e-11);
        assert_relative_eq!(bessel_j(o(0.0), 10.0).unwrap(), -0.245_935_764_451_348_3, max_relative = 1e-12);
        assert_relative_eq!(bessel_j(o(2.0), 1.0).unwrap(), 0.114_903_484_931_900_5, max_relative = 1e-14);
        assert_relative_eq!(bessel_i_real(o(0.0), 1.0).unwrap(), 1.266_065_877_752_008_4, max_relative = 1e-14);
        assert_relative_eq!(bessel_i_real(o(1.0), 5.0).unwrap(), 24.335_642_142_450_52, max_relative = 1e-13);
    }

    #[test]
    fn both_branches_agree_at_the_switch() {
        for &nu in &[0.0f64, 0.3, 2.0, 7.3, 20.0, 45.5] {
            let x_switch = (2.0 * (nu + 1.0)).sqrt().max(2.0);
            let below = bessel_j(o(nu), x_switch * (1.0 - 1e-12)).unwrap();
            let ln_pre = ln_series_prefactor(nu, x_switch * 1.0001).unwrap();
            let series = ascending_sum(nu, x_switch * 1.0001, -1.0).unwrap() * ln_pre.exp();
            let steed = steed_j(nu, x_switch * 1.0001).unwrap();
            assert_relative_eq!(series, steed, max_relative = 1e-12);
            assert!(below.is_finite());
        }
    }

    #[test]
    fn scaled_i_matches_unscaled() {
        for &nu in &[0.0, 1.5, 12.0] {
            for &x in &[0.5, 3.0, 25.0] {
                let a = bessel_i_scaled(o(nu), x).unwrap();
                let b = bessel_i_real(o(nu), x).unwrap() * (-x).exp();
                assert_relative_eq!(a, b, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn imag_is_phase_times_j() {
        let v = bessel_i_imag(o(2.0), 1.0).unwrap();
        let j = bessel_j(o(2.0), 1.0).unwrap();
        assert!((v - Complex64::new(-j, 0.0)).norm() < 1e-16);
    }

    #[test]
    fn domain_errors() {
        assert!(BesselOrder::new(-0.1).is_err());
        assert!(bessel_j(o(1.0), -1.0).is_err());
        assert!(bessel_i_real(o(1.0), f64::INFINITY).is_err());
        assert!(bessel_i_scaled(o(1.0), 1e4).is_err());
    }

    #[test]
    fn large_order_small_argument() {
        // leading term dominates: J_60(1) ≈ (1/2)^60 / 60!
        let lead = (-(60.0 * 2f64.ln()) - log_gamma(61.0).unwrap()).exp();
        let got = bessel_j(o(60.0), 1.0).unwrap();
        assert_relative_eq!(got, lead * (1.0 - 0.25 / 61.0 + 0.0625 / (2.0 * 61.0 * 62.0)), max_relative = 1e-8);
    }
}
