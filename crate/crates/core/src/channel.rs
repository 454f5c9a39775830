//! Per-hop channel: Lambertian DC gain and Gamma-Gamma turbulence.
//!
//! The turbulence coefficient h is unit-mean Gamma-Gamma with shapes (α, β);
//! the instantaneous electrical SNR of a link is γ = γ̄ h².

use crate::error::{Error, Result};
use crate::specfun::{self, integrate, ln_bessel_k, ln_gamma, QuadratureSpec};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Shape parameter above which a physics-derived link is flagged as the
/// weak-turbulence limit.
pub const WEAK_LIMIT_SHAPE: f64 = 1e6;

/// Largest |α − β| accepted for density evaluation.
pub const MAX_ORDER_GAP: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkGeometry {
    pub lambertian_order: f64,
    /// Photodetector area, m².
    pub pd_area: f64,
    /// LED to photodetector distance, m.
    pub distance: f64,
    pub irradiance_angle: f64,
    pub incidence_angle: f64,
    pub filter_gain: f64,
    pub concentrator_gain: f64,
    /// Receiver field of view, rad.
    pub fov: f64,
    /// Power of `distance` in the gain denominator. 1 reproduces the
    /// original gain expression, 2 gives the inverse-square law.
    pub distance_exponent: f64,
}

impl Default for LinkGeometry {
    fn default() -> Self {
        Self {
            lambertian_order: 1.0,
            pd_area: 1e-4,
            distance: 10.0,
            irradiance_angle: 0.0,
            incidence_angle: 0.0,
            filter_gain: 1.0,
            concentrator_gain: 1.0,
            fov: PI / 3.0,
            distance_exponent: 1.0,
        }
    }
}

impl LinkGeometry {
    pub fn with_distance(mut self, distance: f64) -> Self {
        self.distance = distance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            (self.lambertian_order > 0.0, "lambertian_order must be positive"),
            (self.pd_area > 0.0, "pd_area must be positive"),
            (self.distance > 0.0, "distance must be positive"),
            (
                (0.0..=PI / 2.0).contains(&self.fov),
                "fov must lie in [0, pi/2]",
            ),
            (self.filter_gain >= 0.0, "filter_gain must be nonnegative"),
            (
                self.concentrator_gain >= 0.0,
                "concentrator_gain must be nonnegative",
            ),
            (
                self.distance_exponent > 0.0,
                "distance_exponent must be positive",
            ),
            (
                self.irradiance_angle.is_finite() && self.incidence_angle.is_finite(),
                "angles must be finite",
            ),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::invalid(msg));
            }
        }
        Ok(())
    }
}

/// Lambertian DC gain h^Lm; zero outside the field of view.
pub fn lambertian_gain(geom: &LinkGeometry) -> Result<f64> {
    geom.validate()?;
    if geom.incidence_angle > geom.fov {
        return Ok(0.0);
    }
    let m = geom.lambertian_order;
    Ok((m + 1.0) * geom.pd_area / (2.0 * PI * geom.distance.powf(geom.distance_exponent))
        * geom.irradiance_angle.cos().powf(m)
        * geom.incidence_angle.cos()
        * geom.filter_gain
        * geom.concentrator_gain)
}

/// Physical description of the turbulent path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalTurbulence {
    /// Refractive-index structure constant C_n², m^(-2/3).
    pub cn2: f64,
    /// Optical wavelength, m.
    pub wavelength: f64,
    /// Receiver aperture diameter, m.
    pub aperture: f64,
    /// Path length, m.
    pub path_length: f64,
    /// Constant multiplying κ^{12/5} in the β denominator.
    #[serde(default = "unit")]
    pub beta_xi: f64,
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    Direct,
    Physical(PhysicalTurbulence),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurbulenceParams {
    pub alpha: f64,
    pub beta: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Weak,
    Moderate,
    Strong,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Weak, Regime::Moderate, Regime::Strong];

    pub fn shapes(self) -> (f64, f64) {
        match self {
            Regime::Weak => (8.1, 4.0),
            Regime::Moderate => (4.2, 3.0),
            Regime::Strong => (2.2, 2.0),
        }
    }

    pub fn params(self) -> TurbulenceParams {
        let (alpha, beta) = self.shapes();
        TurbulenceParams {
            alpha,
            beta,
            provenance: Provenance::Direct,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::Weak => "weak",
            Regime::Moderate => "moderate",
            Regime::Strong => "strong",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.name() == name)
    }
}

impl TurbulenceParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            provenance: Provenance::Direct,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn from_physics(phys: PhysicalTurbulence) -> Result<(Self, RytovShapes)> {
        let shapes = alpha_beta_from_physics(
            phys.cn2,
            phys.wavelength,
            phys.aperture,
            phys.path_length,
            phys.beta_xi,
        )?;
        Ok((
            Self {
                alpha: shapes.alpha,
                beta: shapes.beta,
                provenance: Provenance::Physical(phys),
            },
            shapes,
        ))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite() && self.beta > 0.0 && self.beta.is_finite())
        {
            return Err(Error::invalid("alpha and beta must be positive and finite"));
        }
        if let Provenance::Physical(p) = self.provenance {
            let s = alpha_beta_from_physics(p.cn2, p.wavelength, p.aperture, p.path_length, p.beta_xi)?;
            if s.alpha != self.alpha || s.beta != self.beta {
                return Err(Error::invalid(
                    "alpha/beta disagree with their physical provenance",
                ));
            }
        }
        Ok(())
    }

    /// Same (α, β) pair, ignoring provenance.
    pub fn same_shapes(&self, other: &Self) -> bool {
        self.alpha == other.alpha && self.beta == other.beta
    }
}

/// Average electrical SNR γ̄ of one link (linear, not dB).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct AvgSnr(f64);

impl AvgSnr {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value.is_finite() {
            Ok(Self(value))
        } else {
            Err(Error::invalid(format!("average SNR must be positive, got {value}")))
        }
    }

    pub fn from_db(db: f64) -> Result<Self> {
        Self::new(10f64.powf(db / 10.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn db(self) -> f64 {
        10.0 * self.0.log10()
    }
}

/// Shapes and intermediate Rytov quantities for a physical path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RytovShapes {
    pub alpha: f64,
    pub beta: f64,
    /// Rytov variance κ.
    pub kappa: f64,
    pub rho: f64,
    /// Set when either shape exceeds [`WEAK_LIMIT_SHAPE`] (or was clamped
    /// from infinity), i.e. the path is effectively turbulence-free.
    pub weak_limit: bool,
}

/// Spherical-wave α, β from C_n², wavelength, aperture and path length.
///
/// κ = 0.5 d^{11/6} C_n² (2π/λ) and ρ = √(2π k D² d / (4λ)) with k = 2π/λ.
pub fn alpha_beta_from_physics(
    cn2: f64,
    wavelength: f64,
    aperture: f64,
    path_length: f64,
    beta_xi: f64,
) -> Result<RytovShapes> {
    for (v, name) in [
        (cn2, "cn2"),
        (wavelength, "wavelength"),
        (aperture, "aperture"),
        (path_length, "path_length"),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Domain {
                function: "alpha_beta_from_physics",
                value: v,
                reason: match name {
                    "cn2" => "cn2 must be positive",
                    "wavelength" => "wavelength must be positive",
                    "aperture" => "aperture must be positive",
                    _ => "path_length must be positive",
                },
            });
        }
    }
    if !(beta_xi >= 0.0 && beta_xi.is_finite()) {
        return Err(Error::invalid("beta_xi must be nonnegative"));
    }
    let wavenumber = 2.0 * PI / wavelength;
    let kappa = 0.5 * path_length.powf(11.0 / 6.0) * cn2 * wavenumber;
    let rho = (2.0 * PI * wavenumber * aperture * aperture / (4.0 * wavelength) * path_length).sqrt();

    let k125 = kappa.powf(12.0 / 5.0);
    let rho2 = rho * rho;
    let alpha_arg = 0.49 * kappa * kappa / (1.0 + 0.18 * rho2 + 0.56 * k125).powf(7.0 / 6.0);
    let beta_arg = 0.51 * kappa * kappa * (1.0 + 0.69 * k125).powf(-5.0 / 6.0)
        / (1.0 + 0.9 * rho2 + 0.62 * beta_xi * beta_xi * k125).powf(5.0 / 6.0);

    let shape = |arg: f64| -> Result<(f64, bool)> {
        let denom = arg.exp_m1();
        if !denom.is_finite() {
            return Err(Error::Overflow {
                function: "alpha_beta_from_physics",
                value: arg,
            });
        }
        let v = 1.0 / denom;
        if v.is_infinite() {
            Ok((f64::MAX, true))
        } else {
            Ok((v, v > WEAK_LIMIT_SHAPE))
        }
    };
    let (alpha, weak_a) = shape(alpha_arg)?;
    let (beta, weak_b) = shape(beta_arg)?;
    Ok(RytovShapes {
        alpha,
        beta,
        kappa,
        rho,
        weak_limit: weak_a || weak_b,
    })
}

/// Evaluator for one Gamma-Gamma law with its normalisation precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaGamma {
    alpha: f64,
    beta: f64,
    /// ln(2 (αβ)^{(α+β)/2} / (Γ(α)Γ(β)))
    ln_norm: f64,
}

fn reference_quadrature() -> QuadratureSpec {
    QuadratureSpec {
        abs_tolerance: 1e-15,
        rel_tolerance: 1e-11,
        max_subdivisions: 4_000,
        infinite_tail_transform: true,
    }
}

impl GammaGamma {
    pub fn new(params: &TurbulenceParams) -> Result<Self> {
        let (a, b) = (params.alpha, params.beta);
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::invalid("alpha and beta must be positive and finite"));
        }
        if (a - b).abs() > MAX_ORDER_GAP {
            return Err(Error::Domain {
                function: "gamma_gamma",
                value: a - b,
                reason: "|alpha - beta| exceeds the supported Bessel order",
            });
        }
        let ln_norm = std::f64::consts::LN_2 + 0.5 * (a + b) * (a * b).ln() - ln_gamma(a)? - ln_gamma(b)?;
        Ok(Self {
            alpha: a,
            beta: b,
            ln_norm,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    fn order(&self) -> f64 {
        self.alpha - self.beta
    }

    /// Exponent e with f(h) ∝ h^e near the origin.
    fn origin_exponent(&self) -> f64 {
        self.alpha.min(self.beta) - 1.0
    }

    /// lim_{h→0} f(h) / h^{min(α,β)-1}, for ν ≠ 0.
    fn origin_coefficient(&self) -> f64 {
        let nu = self.order().abs();
        // K_ν(z) ~ Γ(ν)/2 (z/2)^{-ν}
        (self.ln_norm - std::f64::consts::LN_2 + ln_gamma(nu).unwrap_or(f64::INFINITY)
            - 0.5 * nu * (self.alpha * self.beta).ln())
        .exp()
    }

    /// Density of h.
    pub fn pdf_h(&self, h: f64) -> f64 {
        if h < 0.0 {
            return 0.0;
        }
        if h == 0.0 {
            let e = self.origin_exponent();
            return if e > 0.0 {
                0.0
            } else if e < 0.0 || self.order() == 0.0 {
                f64::INFINITY
            } else {
                self.origin_coefficient()
            };
        }
        let (a, b) = (self.alpha, self.beta);
        let z = 2.0 * (a * b * h).sqrt();
        match ln_bessel_k(self.order(), z) {
            Ok(lnk) => (self.ln_norm + (0.5 * (a + b) - 1.0) * h.ln() + lnk).exp(),
            Err(_) => f64::NAN,
        }
    }

    /// Substitution power q (h = u^q) that removes the origin singularity.
    fn substitution_power(&self) -> f64 {
        let m = self.alpha.min(self.beta);
        if m < 1.0 {
            1.0 / m
        } else {
            1.0
        }
    }

    /// P(h ≤ x) by quadrature of the density.
    pub fn cdf_h(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        if x.is_infinite() {
            return Ok(1.0);
        }
        let v = if x <= 1.0 {
            self.lower_mass(x)?
        } else {
            1.0 - self.upper_mass(x)?
        };
        Ok(v.clamp(0.0, 1.0))
    }

    /// P(h > x) by quadrature of the density.
    pub fn sf_h(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(1.0);
        }
        if x.is_infinite() {
            return Ok(0.0);
        }
        let v = if x <= 1.0 {
            1.0 - self.lower_mass(x)?
        } else {
            self.upper_mass(x)?
        };
        Ok(v.clamp(0.0, 1.0))
    }

    fn lower_mass(&self, x: f64) -> Result<f64> {
        let q = self.substitution_power();
        specfun::integrate_power_substituted(|h| self.pdf_h(h), x, q, &reference_quadrature())
            .map(|r| r.value)
    }

    fn upper_mass(&self, x: f64) -> Result<f64> {
        integrate(|h| self.pdf_h(h), x, f64::INFINITY, &reference_quadrature()).map(|r| r.value)
    }

    /// CDF at each of `points` (ascending), accumulated segment by segment.
    pub fn cdf_h_sorted(&self, points: &[f64]) -> Result<Vec<f64>> {
        if points.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("points must be sorted ascending"));
        }
        let spec = QuadratureSpec {
            abs_tolerance: 1e-15,
            rel_tolerance: 1e-10,
            max_subdivisions: 200,
            infinite_tail_transform: false,
        };
        let mut out = Vec::with_capacity(points.len());
        let mut acc = 0.0;
        let mut prev = 0.0;
        for (i, &p) in points.iter().enumerate() {
            if p <= 0.0 {
                out.push(0.0);
                continue;
            }
            if i == 0 || prev == 0.0 {
                acc = self.cdf_h(p)?;
            } else if p > prev {
                acc += integrate(|h| self.pdf_h(h), prev, p, &spec)?.value;
            }
            prev = p;
            out.push(acc.clamp(0.0, 1.0));
        }
        Ok(out)
    }
}

/// Gamma-Gamma density of the turbulence coefficient h.
pub fn gg_pdf_h(h: f64, params: &TurbulenceParams) -> Result<f64> {
    if h < 0.0 {
        return Err(Error::Domain {
            function: "gg_pdf_h",
            value: h,
            reason: "h must be nonnegative",
        });
    }
    Ok(GammaGamma::new(params)?.pdf_h(h))
}

/// One link's SNR law: Gamma-Gamma fading scaled by its average SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrLink {
    gg: GammaGamma,
    avg: f64,
}

impl SnrLink {
    pub fn new(params: &TurbulenceParams, avg: AvgSnr) -> Result<Self> {
        Ok(Self {
            gg: GammaGamma::new(params)?,
            avg: avg.value(),
        })
    }

    pub fn fading(&self) -> &GammaGamma {
        &self.gg
    }

    pub fn avg_snr(&self) -> f64 {
        self.avg
    }

    /// Density of γ = γ̄ h².
    pub fn pdf(&self, gamma: f64) -> f64 {
        let (a, b) = (self.gg.alpha, self.gg.beta);
        if gamma < 0.0 {
            return 0.0;
        }
        if gamma == 0.0 {
            // f_γ(γ) ~ γ^{min(α,β)/2 - 1} at the origin
            let e = 0.5 * a.min(b) - 1.0;
            return if e > 0.0 {
                0.0
            } else if e < 0.0 || a == b {
                f64::INFINITY
            } else {
                // same leading term as the h density, rescaled
                self.gg.origin_coefficient() / (2.0 * self.avg)
            };
        }
        let s = a + b;
        let x = a * b / self.avg.sqrt();
        let z = 2.0 * (x * gamma.sqrt()).sqrt();
        match ln_bessel_k(a - b, z) {
            Ok(lnk) => (0.5 * s * x.ln() - ln_gamma(a).unwrap_or(f64::NAN) - ln_gamma(b).unwrap_or(f64::NAN)
                + (0.25 * s - 1.0) * gamma.ln()
                + lnk)
                .exp(),
            Err(_) => f64::NAN,
        }
    }

    /// P(γ ≤ g) by quadrature of the SNR density.
    ///
    /// Integrates in u with γ = γ̄ u^p, p = max(2, 2/min(α,β)), which makes
    /// the transformed integrand bounded at the origin.
    pub fn cdf_reference(&self, g: f64) -> Result<f64> {
        if g <= 0.0 {
            return Ok(0.0);
        }
        if g.is_infinite() {
            return Ok(1.0);
        }
        let v = if g <= self.avg {
            self.lower_mass(g)?
        } else {
            1.0 - self.upper_mass(g)?
        };
        Ok(v.clamp(0.0, 1.0))
    }

    /// P(γ > g) by quadrature of the SNR density.
    pub fn sf_reference(&self, g: f64) -> Result<f64> {
        if g <= 0.0 {
            return Ok(1.0);
        }
        if g.is_infinite() {
            return Ok(0.0);
        }
        let v = if g <= self.avg {
            1.0 - self.lower_mass(g)?
        } else {
            self.upper_mass(g)?
        };
        Ok(v.clamp(0.0, 1.0))
    }

    fn substitution_power(&self) -> f64 {
        2.0f64.max(2.0 / self.gg.alpha.min(self.gg.beta))
    }

    fn transformed(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let p = self.substitution_power();
        let gamma = self.avg * u.powf(p);
        let f = self.pdf(gamma);
        if f == 0.0 {
            0.0
        } else {
            f * p * gamma / u
        }
    }

    fn lower_mass(&self, g: f64) -> Result<f64> {
        let u = (g / self.avg).powf(1.0 / self.substitution_power());
        integrate(|u| self.transformed(u), 0.0, u, &reference_quadrature()).map(|r| r.value)
    }

    fn upper_mass(&self, g: f64) -> Result<f64> {
        let u = (g / self.avg).powf(1.0 / self.substitution_power());
        integrate(|u| self.transformed(u), u, f64::INFINITY, &reference_quadrature()).map(|r| r.value)
    }

    /// The closed-form CDF expression, verbatim:
    /// 4 (αβ/√γ̄)^{(α+β)/2} / ((α+β)Γ(α)Γ(β)) · γ^{(α+β)/4-1} · K_{α-β}(2√(√(αβγ)/√γ̄)).
    ///
    /// Not clamped: this is not a distribution function in general.
    pub fn cdf_paper(&self, gamma: f64) -> Result<f64> {
        let (a, b) = (self.gg.alpha, self.gg.beta);
        let s = a + b;
        let x = a * b / self.avg.sqrt();
        let ln_pref = (4.0 / s).ln() + 0.5 * s * x.ln() - ln_gamma(a)? - ln_gamma(b)?;
        if gamma == 0.0 {
            // γ^{s/4-1} K_ν(c γ^{1/4}) ~ γ^{min(α,β)/2 - 1}
            let e = 0.5 * a.min(b) - 1.0;
            return Ok(if e > 0.0 {
                0.0
            } else if e < 0.0 || a == b {
                f64::INFINITY
            } else {
                let nu = (a - b).abs();
                (ln_pref + ln_gamma(nu)? - std::f64::consts::LN_2
                    - 0.25 * nu * ((a * b).ln() - self.avg.ln()))
                .exp()
            });
        }
        let z = 2.0 * ((a * b * gamma).sqrt() / self.avg.sqrt()).sqrt();
        let lnk = ln_bessel_k(a - b, z)?;
        Ok((ln_pref + (0.25 * s - 1.0) * gamma.ln() + lnk).exp())
    }
}

/// Density of the link SNR γ = γ̄ h².
pub fn gg_pdf_snr(gamma: f64, params: &TurbulenceParams, avg: AvgSnr) -> Result<f64> {
    if gamma < 0.0 {
        return Err(Error::Domain {
            function: "gg_pdf_snr",
            value: gamma,
            reason: "gamma must be nonnegative",
        });
    }
    Ok(SnrLink::new(params, avg)?.pdf(gamma))
}

/// Closed-form link CDF, evaluated verbatim.
pub fn gg_cdf_snr_paper(gamma: f64, params: &TurbulenceParams, avg: AvgSnr) -> Result<f64> {
    if gamma < 0.0 {
        return Err(Error::Domain {
            function: "gg_cdf_snr_paper",
            value: gamma,
            reason: "gamma must be nonnegative",
        });
    }
    SnrLink::new(params, avg)?.cdf_paper(gamma)
}

/// Link CDF by quadrature of the SNR density.
pub fn gg_cdf_snr_reference(gamma: f64, params: &TurbulenceParams, avg: AvgSnr) -> Result<f64> {
    if gamma < 0.0 {
        return Err(Error::Domain {
            function: "gg_cdf_snr_reference",
            value: gamma,
            reason: "gamma must be nonnegative",
        });
    }
    SnrLink::new(params, avg)?.cdf_reference(gamma)
}
