//! Receiver noise budget and per-hop average SNR.
//!
//! σ² = σ²_shot + σ²_thermal, where the shot term carries the signal and the
//! daylight background (a blackbody sun filtered to the receiver band), and
//! the thermal term is feedback-resistor plus FET channel noise.

use crate::channel::{lambertian_gain, AvgSnr, LinkGeometry};
use crate::error::{Error, Result};
use crate::specfun::{integrate, QuadratureSpec};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const PLANCK: f64 = 6.626e-34;
pub const BOLTZMANN: f64 = 1.381e-23;
pub const LIGHT_SPEED: f64 = 2.998e8;
pub const ELECTRON_CHARGE: f64 = 1.602e-19;

/// Wavelength window (μm) used when the spectral normalisation is global.
pub const GLOBAL_SPECTRAL_WINDOW: (f64, f64) = (0.2, 2.0);

/// Where the maximum of χ(λ) that normalises the spectral fraction is sought.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SpectralMaxDomain {
    /// The integration window [l₁, l₂].
    #[default]
    Window,
    /// [`GLOBAL_SPECTRAL_WINDOW`].
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseEnvironment {
    /// Q, C.
    pub electron_charge: f64,
    /// W_n, Hz.
    pub noise_bandwidth: f64,
    /// W_R, noise-bandwidth factor of a rectangular pulse.
    pub rect_bandwidth_factor: f64,
    /// T₀.
    pub peak_filter_transmission: f64,
    /// n_i. Carried for completeness; the variance expressions do not use it.
    pub concentrator_refractive_index: f64,
    /// Angle inside the sin² of the background term, rad.
    pub fov_halfangle: f64,
    /// l₁, μm.
    pub spectral_lower: f64,
    /// l₂, μm.
    pub spectral_upper: f64,
    /// S_peak, W/m².
    pub peak_spectral_irradiance: f64,
    /// T_B, K.
    pub sun_temperature: f64,
    pub planck: f64,
    pub boltzmann: f64,
    pub light_speed: f64,
    /// T_a, K.
    pub absolute_temperature: f64,
    /// G, open-loop voltage gain.
    pub open_loop_gain: f64,
    /// η, F/m².
    pub capacitance_per_area: f64,
    /// Ω.
    pub fet_noise_factor: f64,
    /// g_m, S.
    pub fet_transconductance: f64,
    /// W_RC, noise-bandwidth factor of a raised-cosine pulse.
    pub raised_cosine_factor: f64,
    /// g, optoelectronic conversion factor (A/W).
    pub conversion_factor: f64,
    /// T_c in the background term.
    pub concentrator_gain: f64,
    pub spectral_max_domain: SpectralMaxDomain,
}

impl Default for NoiseEnvironment {
    fn default() -> Self {
        Self {
            electron_charge: ELECTRON_CHARGE,
            noise_bandwidth: 50e6,
            rect_bandwidth_factor: 0.562,
            peak_filter_transmission: 1.0,
            concentrator_refractive_index: 1.5,
            fov_halfangle: PI / 3.0,
            spectral_lower: 0.38,
            spectral_upper: 0.78,
            peak_spectral_irradiance: 1000.0,
            sun_temperature: 5778.0,
            planck: PLANCK,
            boltzmann: BOLTZMANN,
            light_speed: LIGHT_SPEED,
            absolute_temperature: 298.0,
            open_loop_gain: 10.0,
            capacitance_per_area: 1.12e-6,
            fet_noise_factor: 1.5,
            fet_transconductance: 0.03,
            raised_cosine_factor: 0.0868,
            conversion_factor: 0.53,
            concentrator_gain: 1.0,
            spectral_max_domain: SpectralMaxDomain::Window,
        }
    }
}

impl NoiseEnvironment {
    pub fn validate(&self) -> Result<()> {
        let strictly_positive = [
            (self.electron_charge, "electron_charge"),
            (self.noise_bandwidth, "noise_bandwidth"),
            (self.rect_bandwidth_factor, "rect_bandwidth_factor"),
            (self.peak_filter_transmission, "peak_filter_transmission"),
            (self.concentrator_refractive_index, "concentrator_refractive_index"),
            (self.spectral_lower, "spectral_lower"),
            (self.spectral_upper, "spectral_upper"),
            (self.peak_spectral_irradiance, "peak_spectral_irradiance"),
            (self.sun_temperature, "sun_temperature"),
            (self.planck, "planck"),
            (self.boltzmann, "boltzmann"),
            (self.light_speed, "light_speed"),
            (self.absolute_temperature, "absolute_temperature"),
            (self.open_loop_gain, "open_loop_gain"),
            (self.capacitance_per_area, "capacitance_per_area"),
            (self.fet_transconductance, "fet_transconductance"),
            (self.raised_cosine_factor, "raised_cosine_factor"),
            (self.conversion_factor, "conversion_factor"),
        ];
        for (v, name) in strictly_positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("noise.{name} must be positive")));
            }
        }
        if !(self.fet_noise_factor >= 0.0) || !(self.concentrator_gain >= 0.0) {
            return Err(Error::invalid(
                "noise.fet_noise_factor and noise.concentrator_gain must be nonnegative",
            ));
        }
        if !self.fov_halfangle.is_finite() {
            return Err(Error::invalid("noise.fov_halfangle must be finite"));
        }
        if !(self.spectral_lower < self.spectral_upper) {
            return Err(Error::invalid("noise.spectral_lower must be below spectral_upper"));
        }
        Ok(())
    }

    /// χ(λ, T_B) with this environment's constants; λ in metres.
    pub fn blackbody(&self, wavelength: f64) -> Result<f64> {
        planck_irradiance(
            wavelength,
            self.sun_temperature,
            self.planck,
            self.light_speed,
            self.boltzmann,
        )
    }
}

fn planck_irradiance(wavelength: f64, temperature: f64, h: f64, c: f64, k: f64) -> Result<f64> {
    if !(wavelength > 0.0) || !(temperature > 0.0) {
        return Err(Error::Domain {
            function: "blackbody_irradiance",
            value: if wavelength > 0.0 { temperature } else { wavelength },
            reason: "wavelength and temperature must be positive",
        });
    }
    let x = h * c / (wavelength * k * temperature);
    let denom = x.exp_m1();
    if !denom.is_finite() {
        return Err(Error::Overflow {
            function: "blackbody_irradiance",
            value: wavelength,
        });
    }
    Ok(2.0 * PI * h * c * c / (wavelength.powi(5) * denom))
}

/// Blackbody spectral irradiance χ(λ, T_B) = 2πνc² / (λ⁵ (e^{νc/(λkT_B)} − 1)),
/// λ in metres, with the default physical constants.
pub fn blackbody_irradiance(wavelength: f64, temperature: f64) -> Result<f64> {
    planck_irradiance(wavelength, temperature, PLANCK, LIGHT_SPEED, BOLTZMANN)
}

/// Golden-section search for the maximum of a unimodal function on [lo, hi].
fn unimodal_max<F: Fn(f64) -> Result<f64>>(f: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    for _ in 0..200 {
        if (hi - lo).abs() <= 1e-14 * (lo.abs() + hi.abs()) {
            break;
        }
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = f(b)?;
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = f(a)?;
        }
    }
    let ends = f(lo)?.max(f(hi)?);
    Ok(fa.max(fb).max(ends))
}

const MICRON: f64 = 1e-6;

/// Spectral fraction ξ = ∫_{l₁}^{l₂} S_peak χ(l)/max χ dl with l in μm.
pub fn spectral_fraction(env: &NoiseEnvironment) -> Result<f64> {
    env.validate()?;
    let (l1, l2) = (env.spectral_lower, env.spectral_upper);
    let (m1, m2) = match env.spectral_max_domain {
        SpectralMaxDomain::Window => (l1, l2),
        SpectralMaxDomain::Global => GLOBAL_SPECTRAL_WINDOW,
    };
    let peak = unimodal_max(|l| env.blackbody(l * MICRON), m1, m2)?;
    let spec = QuadratureSpec {
        abs_tolerance: 1e-13,
        rel_tolerance: 1e-12,
        max_subdivisions: 1_000,
        infinite_tail_transform: false,
    };
    let r = integrate(
        |l| match env.blackbody(l * MICRON) {
            Ok(chi) => env.peak_spectral_irradiance * chi / peak,
            Err(_) => f64::NAN,
        },
        l1,
        l2,
        &spec,
    )?;
    Ok(r.value)
}

fn check_nonnegative(function: &'static str, values: &[f64]) -> Result<()> {
    for &v in values {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::Domain {
                function,
                value: v,
                reason: "inputs must be finite and nonnegative",
            });
        }
    }
    Ok(())
}

/// σ²_shot = 2 g Q W_n [P h + W_R ξ T₀ A T_c sin²(fov_halfangle)].
pub fn shot_variance(env: &NoiseEnvironment, power: f64, gain: f64, area: f64) -> Result<f64> {
    check_nonnegative("shot_variance", &[power, gain, area])?;
    let xi = spectral_fraction(env)?;
    Ok(shot_variance_with_fraction(env, xi, power, gain, area))
}

fn shot_variance_with_fraction(env: &NoiseEnvironment, xi: f64, power: f64, gain: f64, area: f64) -> f64 {
    let background = env.rect_bandwidth_factor
        * xi
        * env.peak_filter_transmission
        * area
        * env.concentrator_gain
        * env.fov_halfangle.sin().powi(2);
    2.0 * env.conversion_factor * env.electron_charge * env.noise_bandwidth * (power * gain + background)
}

/// σ²_thermal = 8πkT_a/G · ηAW_R² + 16π²kT_aΩ/g_m · η²A²W_RC W_R³.
pub fn thermal_variance(env: &NoiseEnvironment, area: f64) -> Result<f64> {
    env.validate()?;
    check_nonnegative("thermal_variance", &[area])?;
    let kt = env.boltzmann * env.absolute_temperature;
    let w_r = env.rect_bandwidth_factor;
    let eta = env.capacitance_per_area;
    let feedback = 8.0 * PI * kt / env.open_loop_gain * eta * area * w_r * w_r;
    let fet = 16.0 * PI * PI * kt * env.fet_noise_factor / env.fet_transconductance
        * eta
        * eta
        * area
        * area
        * env.raised_cosine_factor
        * w_r.powi(3);
    Ok(feedback + fet)
}

/// σ²_z = σ²_shot + σ²_thermal.
pub fn total_noise_variance(env: &NoiseEnvironment, power: f64, gain: f64, area: f64) -> Result<f64> {
    let v = shot_variance(env, power, gain, area)? + thermal_variance(env, area)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::invalid("noise variance must be positive"))
    }
}

/// γ̄ = (g h P)² / σ².
pub fn average_snr(conversion: f64, gain: f64, power: f64, variance: f64) -> Result<AvgSnr> {
    if !(variance > 0.0) {
        return Err(Error::Domain {
            function: "average_snr",
            value: variance,
            reason: "noise variance must be positive",
        });
    }
    AvgSnr::new((conversion * gain * power).powi(2) / variance)
}

/// Every intermediate of one hop's geometry → noise → γ̄ chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkBudget {
    pub path_gain: f64,
    pub spectral_fraction: f64,
    pub shot_variance: f64,
    pub thermal_variance: f64,
    pub noise_variance: f64,
    pub avg_snr: AvgSnr,
}

/// Assemble γ̄ for a hop from geometry, transmitted optical power and noise.
///
/// The concentrator gain of the geometry also feeds the background term.
pub fn link_budget(geom: &LinkGeometry, env: &NoiseEnvironment, power: f64) -> Result<LinkBudget> {
    let path_gain = lambertian_gain(geom)?;
    let env = NoiseEnvironment {
        concentrator_gain: geom.concentrator_gain,
        ..*env
    };
    check_nonnegative("link_budget", &[power])?;
    let xi = spectral_fraction(&env)?;
    let shot = shot_variance_with_fraction(&env, xi, power, path_gain, geom.pd_area);
    let thermal = thermal_variance(&env, geom.pd_area)?;
    let variance = shot + thermal;
    let avg_snr = average_snr(env.conversion_factor, path_gain, power, variance)?;
    Ok(LinkBudget {
        path_gain,
        spectral_fraction: xi,
        shot_variance: shot,
        thermal_variance: thermal,
        noise_variance: variance,
        avg_snr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn blackbody_scaling() {
        let (l, t) = (600e-9, 5778.0);
        let a = blackbody_irradiance(l / 2.0, 2.0 * t).unwrap();
        let b = blackbody_irradiance(l, t).unwrap();
        assert!(rel(a, 32.0 * b) < 1e-12);
    }

    #[test]
    fn blackbody_overflow_reported() {
        assert!(matches!(
            blackbody_irradiance(1e-12, 300.0),
            Err(Error::Overflow { .. })
        ));
        assert!(blackbody_irradiance(0.0, 300.0).is_err());
    }

    #[test]
    fn spectral_fraction_vanishing_window() {
        let env = NoiseEnvironment {
            spectral_lower: 0.5,
            spectral_upper: 0.5 + 1e-9,
            ..Default::default()
        };
        let xi = spectral_fraction(&env).unwrap();
        assert!((0.0..1000.0 * 1e-9 * 1.000_001).contains(&xi));
    }

    #[test]
    fn spectral_fraction_bounded_by_flat_spectrum() {
        // χ/max χ ≤ 1 on the window, equality for a flat spectrum
        let env = NoiseEnvironment::default();
        let xi = spectral_fraction(&env).unwrap();
        let flat = env.peak_spectral_irradiance * (env.spectral_upper - env.spectral_lower);
        assert!(xi > 0.0 && xi < flat);
        // a very hot source is almost flat across a narrow window
        let hot = NoiseEnvironment {
            sun_temperature: 1e7,
            spectral_lower: 1.0,
            spectral_upper: 1.001,
            ..Default::default()
        };
        let xi = spectral_fraction(&hot).unwrap();
        let flat = hot.peak_spectral_irradiance * 0.001;
        assert!(rel(xi, flat) < 3e-3);
    }

    #[test]
    fn shot_linear_in_bandwidth() {
        let env = NoiseEnvironment::default();
        let a = shot_variance(&env, 1.0, 3.183e-6, 1e-4).unwrap();
        let env2 = NoiseEnvironment {
            noise_bandwidth: 2.0 * env.noise_bandwidth,
            ..env
        };
        assert!(rel(shot_variance(&env2, 1.0, 3.183e-6, 1e-4).unwrap(), 2.0 * a) < 1e-14);
    }

    #[test]
    fn dark_receiver() {
        let env = NoiseEnvironment {
            peak_spectral_irradiance: 1e-300,
            ..Default::default()
        };
        let shot = shot_variance(&env, 0.0, 1e-6, 1e-4).unwrap();
        assert!(shot < 1e-300);
        let total = total_noise_variance(&env, 0.0, 1e-6, 1e-4).unwrap();
        assert!(rel(total, thermal_variance(&env, 1e-4).unwrap()) < 1e-14);
    }

    #[test]
    fn thermal_terms() {
        let env = NoiseEnvironment::default();
        let no_fet = NoiseEnvironment {
            fet_noise_factor: 0.0,
            ..env
        };
        let kt = env.boltzmann * env.absolute_temperature;
        let feedback = 8.0 * PI * kt / 10.0 * 1.12e-6 * 1e-4 * 0.562f64.powi(2);
        assert!(rel(thermal_variance(&no_fet, 1e-4).unwrap(), feedback) < 1e-14);
        let hot = NoiseEnvironment {
            absolute_temperature: 2.0 * env.absolute_temperature,
            ..env
        };
        assert!(rel(thermal_variance(&hot, 1e-4).unwrap(), 2.0 * thermal_variance(&env, 1e-4).unwrap()) < 1e-14);
    }

    #[test]
    fn average_snr_basics() {
        assert_eq!(average_snr(1.0, 1.0, 1.0, 1.0).unwrap().value(), 1.0);
        let a = average_snr(0.5, 1e-6, 1.0, 1e-14).unwrap().value();
        let b = average_snr(0.5, 1e-6, 2.0, 1e-14).unwrap().value();
        assert!(rel(b, 4.0 * a) < 1e-14);
        assert!(average_snr(1.0, 1.0, 1.0, 0.0).is_err());
        assert!(average_snr(1.0, 1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn invalid_environment() {
        let env = NoiseEnvironment {
            spectral_lower: 0.8,
            ..Default::default()
        };
        assert!(env.validate().is_err());
        assert!(spectral_fraction(&env).is_err());
    }
}
