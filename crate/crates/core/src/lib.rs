//! Dual-hop amplify-and-forward outdoor visible-light link model.
//!
//! A traffic-light source reaches a relay vehicle, which forwards to a
//! destination vehicle over two tail-light LEDs combined by selection at the
//! receiver. Each hop combines a Lambertian path gain with Gamma-Gamma
//! turbulence fading; noise is daylight shot noise plus receiver thermal
//! noise.
//!
//! Modules:
//! - [`specfun`]: Γ, K_ν, guarded csc, adaptive quadrature.
//! - [`channel`]: path gain, turbulence shape parameters, per-link densities.
//! - [`noise`]: shot/thermal variance and the per-hop average SNR.
//! - [`analytic`]: end-to-end statistics, closed forms and quadrature references.
//! - [`montecarlo`]: seeded sampling of the fading chain.
//! - [`sweep`]: scenario files, sweeps and report emission for the `ovlc` binary.

pub mod analytic;
pub mod channel;
pub mod error;
pub mod montecarlo;
pub mod noise;
pub mod specfun;
pub mod sweep;

pub use error::{Error, Result};
