//! Real-order gamma and Bessel functions.
//!
//! The fast paths (`bessel_j`, `bessel_i_real`, `bessel_i_scaled`) use the
//! ascending series near the origin and Steed's continued-fraction method
//! elsewhere. `bessel_oracle` evaluates the Poisson-type integral
//! representation by adaptive quadrature and is kept independent of the
//! fast paths so the two can be checked against each other.

mod bessel;
mod gamma;
mod oracle;

pub use bessel::{bessel_i_imag, bessel_i_real, bessel_i_scaled, bessel_j, poisson_bound, principal_phase};
pub use gamma::{gamma_ratio_ln, log_gamma};
pub use oracle::bessel_oracle;

use crate::error::{Error, Result};

/// A nonnegative Bessel order.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if nu.is_finite() && nu >= 0.0 {
            Ok(Self(nu))
        } else {
            Err(Error::Domain(format!("Bessel order must be finite and >= 0, got {nu}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for BesselOrder {
    type Error = Error;

    fn try_from(nu: f64) -> Result<Self> {
        Self::new(nu)
    }
}

impl From<BesselOrder> for f64 {
    fn from(o: BesselOrder) -> f64 {
        o.0
    }
}
