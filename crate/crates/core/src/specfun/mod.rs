//! Special functions and quadrature used throughout the link model.
//!
//! Only what the Gamma-Gamma statistics need: the gamma function, the
//! modified Bessel function of the second kind for real order, a cosecant
//! that refuses to evaluate next to its poles, and an adaptive
//! Gauss-Kronrod integrator with an optional semi-infinite transform.
//!
//! Everything here is a pure function of its arguments.

mod bessel;
mod gamma;
mod quad;

pub use bessel::{bessel_k, bessel_k_checked, bessel_k_scaled, ln_bessel_k, BesselK, Status};
pub use gamma::{gamma_fn, ln_gamma};
pub use quad::{integrate, integrate_power_substituted, Integral, QuadratureSpec};

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Default half-width of the forbidden band around the poles of csc.
pub const DEFAULT_POLE_EPSILON: f64 = 1e-9;

/// `1/sin(x)`, failing when `x` lies within `pole_epsilon` of a multiple of π.
pub fn csc_guarded(x: f64, pole_epsilon: f64) -> Result<f64> {
    if !(pole_epsilon > 0.0) {
        return Err(Error::invalid("pole_epsilon must be positive"));
    }
    if !x.is_finite() {
        return Err(Error::Domain {
            function: "csc_guarded",
            value: x,
            reason: "argument must be finite",
        });
    }
    let k = (x / PI).round();
    let distance = (x - k * PI).abs();
    if distance <= pole_epsilon {
        return Err(Error::PoleProximity { x, distance });
    }
    Ok(1.0 / x.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csc_known_values() {
        assert!((csc_guarded(PI / 2.0, 1e-9).unwrap() - 1.0).abs() < 1e-15);
        assert!((csc_guarded(PI / 6.0, 1e-9).unwrap() - 2.0).abs() < 1e-14);
        assert!((csc_guarded(-PI / 6.0, 1e-9).unwrap() + 2.0).abs() < 1e-14);
    }

    #[test]
    fn csc_pole_guard() {
        let err = csc_guarded(PI - 1e-15, 1e-9).unwrap_err();
        assert!(matches!(err, Error::PoleProximity { .. }));
        assert!(csc_guarded(0.0, 1e-9).is_err());
        assert!(csc_guarded(3.0 * PI, 1e-9).is_err());
        assert!(csc_guarded(3.0 * PI + 1e-6, 1e-9).is_ok());
        assert!(csc_guarded(1.0, 0.0).is_err());
    }
}
