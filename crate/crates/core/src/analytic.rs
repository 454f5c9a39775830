//! End-to-end statistics of the dual-hop AF relay with SC at the destination.
//!
//! Two families of evaluators live here. The `*_paper` functions evaluate
//! the closed forms term by term as stated, including where they are
//! not valid distribution functions. The `*_reference` / `*_quadrature`
//! functions are built from the per-link quadrature CDFs and serve as the
//! authoritative numbers. [`discrepancy_report`] tabulates the gap.

use crate::channel::{AvgSnr, Regime, SnrLink, TurbulenceParams};
use crate::error::{Error, Result};
use crate::specfun::{bessel_k, csc_guarded, integrate, ln_bessel_k, ln_gamma, QuadratureSpec, DEFAULT_POLE_EPSILON};
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

/// How the two hop SNRs combine into the destination SNR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnrMode {
    /// γ_sr γ_rd / (γ_sr + γ_rd + 1).
    Exact,
    /// min{γ_sr, γ_rd}.
    #[default]
    Min,
    /// γ_sr γ_rd / (γ_sr + γ_rd).
    Harmonic,
}

impl SnrMode {
    pub const ALL: [SnrMode; 3] = [SnrMode::Exact, SnrMode::Min, SnrMode::Harmonic];

    pub fn name(self) -> &'static str {
        match self {
            SnrMode::Exact => "exact",
            SnrMode::Min => "min",
            SnrMode::Harmonic => "harmonic",
        }
    }
}

impl fmt::Display for SnrMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SnrMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown mode `{s}` (expected exact, min or harmonic)")))
    }
}

/// Source → relay hop plus two identical relay → destination LEDs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelayScenario {
    pub sr_turbulence: TurbulenceParams,
    /// Shared by both R→D LEDs.
    pub rd_turbulence: TurbulenceParams,
    pub avg_sr: AvgSnr,
    /// Shared by both R→D LEDs.
    pub avg_rd: AvgSnr,
    /// R, bit/s/Hz.
    pub spectral_efficiency: f64,
}

impl RelayScenario {
    pub fn new(
        sr_turbulence: TurbulenceParams,
        rd_turbulence: TurbulenceParams,
        avg_sr: AvgSnr,
        avg_rd: AvgSnr,
        spectral_efficiency: f64,
    ) -> Result<Self> {
        let s = Self {
            sr_turbulence,
            rd_turbulence,
            avg_sr,
            avg_rd,
            spectral_efficiency,
        };
        s.validate()?;
        Ok(s)
    }

    /// Both hops with the same turbulence.
    pub fn shared(params: TurbulenceParams, avg_sr: AvgSnr, avg_rd: AvgSnr, spectral_efficiency: f64) -> Result<Self> {
        Self::new(params, params, avg_sr, avg_rd, spectral_efficiency)
    }

    /// A regime preset with equal average SNR on both hops.
    pub fn preset(regime: Regime, avg: AvgSnr, spectral_efficiency: f64) -> Result<Self> {
        Self::shared(regime.params(), avg, avg, spectral_efficiency)
    }

    pub fn validate(&self) -> Result<()> {
        self.sr_turbulence.validate()?;
        self.rd_turbulence.validate()?;
        AvgSnr::new(self.avg_sr.value())?;
        AvgSnr::new(self.avg_rd.value())?;
        if !(self.spectral_efficiency > 0.0 && self.spectral_efficiency.is_finite()) {
            return Err(Error::invalid("spectral efficiency must be positive"));
        }
        Ok(())
    }

    /// γ_out = 2^{2R} − 1.
    pub fn outage_threshold(&self) -> f64 {
        outage_threshold(self.spectral_efficiency)
    }

    pub fn sr_link(&self) -> Result<SnrLink> {
        SnrLink::new(&self.sr_turbulence, self.avg_sr)
    }

    pub fn rd_link(&self) -> Result<SnrLink> {
        SnrLink::new(&self.rd_turbulence, self.avg_rd)
    }

    /// The closed forms assume a single (α, β) across hops.
    fn paper_shapes(&self) -> Result<(f64, f64)> {
        if !self.sr_turbulence.same_shapes(&self.rd_turbulence) {
            return Err(Error::invalid(
                "closed-form evaluators need identical turbulence on both hops",
            ));
        }
        Ok((self.sr_turbulence.alpha, self.sr_turbulence.beta))
    }
}

/// γ_out = 2^{2R} − 1.
pub fn outage_threshold(spectral_efficiency: f64) -> f64 {
    (2.0 * spectral_efficiency * LN_2).exp_m1()
}

/// γ_D = γ_sr γ_rd / (γ_sr + γ_rd + 1).
pub fn e2e_snr_exact(g_sr: f64, g_rd: f64) -> f64 {
    if g_sr == 0.0 || g_rd == 0.0 {
        return 0.0;
    }
    if g_sr.is_infinite() {
        return g_rd;
    }
    if g_rd.is_infinite() {
        return g_sr;
    }
    g_sr * g_rd / (g_sr + g_rd + 1.0)
}

/// γ_sr γ_rd / (γ_sr + γ_rd), the harmonic upper bound on [`e2e_snr_exact`].
pub fn e2e_snr_bound(g_sr: f64, g_rd: f64) -> f64 {
    if g_sr == 0.0 || g_rd == 0.0 {
        return 0.0;
    }
    if g_sr.is_infinite() {
        return g_rd;
    }
    if g_rd.is_infinite() {
        return g_sr;
    }
    g_sr * g_rd / (g_sr + g_rd)
}

/// Destination SNR under the selected combination rule.
pub fn e2e_snr(g_sr: f64, g_rd: f64, mode: SnrMode) -> f64 {
    match mode {
        SnrMode::Exact => e2e_snr_exact(g_sr, g_rd),
        SnrMode::Min => g_sr.min(g_rd),
        SnrMode::Harmonic => e2e_snr_bound(g_sr, g_rd),
    }
}

/// CDF of the larger of two independent branches: F₁(γ)·F₂(γ).
pub fn sc_combine_cdf<F1, F2>(f1: F1, f2: F2) -> impl Fn(f64) -> Result<f64>
where
    F1: Fn(f64) -> Result<f64>,
    F2: Fn(f64) -> Result<f64>,
{
    move |g| Ok(f1(g)? * f2(g)?)
}

fn check_gamma(function: &'static str, g: f64) -> Result<()> {
    if g >= 0.0 && !g.is_nan() {
        Ok(())
    } else {
        Err(Error::Domain {
            function,
            value: g,
            reason: "gamma must be nonnegative",
        })
    }
}

fn exp_checked(function: &'static str, at: f64, ln: f64) -> Result<f64> {
    if ln > f64::MAX.ln() {
        Err(Error::Overflow { function, value: at })
    } else {
        Ok(ln.exp())
    }
}

/// Shared pieces of the closed forms at one γ.
struct PaperTerms {
    s: f64,
    ln_g: f64,
    /// ln Γ(α)Γ(β)
    ln_gg: f64,
    /// ln[(αβ/√γ̄_sr)^{s/2} K_{α-β}(2√(√(αβγ)/√γ̄_sr))]
    ln_sr: f64,
    /// same for the R→D hop
    ln_rd: f64,
}

impl PaperTerms {
    fn new(g: f64, scen: &RelayScenario) -> Result<Self> {
        let (a, b) = scen.paper_shapes()?;
        let s = a + b;
        let ab = a * b;
        let hop = |avg: f64| -> Result<f64> {
            let z = 2.0 * ((ab * g).sqrt() / avg.sqrt()).sqrt();
            Ok(0.5 * s * (ab / avg.sqrt()).ln() + ln_bessel_k(a - b, z)?)
        };
        Ok(Self {
            s,
            ln_g: g.ln(),
            ln_gg: ln_gamma(a)? + ln_gamma(b)?,
            ln_sr: hop(scen.avg_sr.value())?,
            ln_rd: hop(scen.avg_rd.value())?,
        })
    }
}

/// The closed-form end-to-end CDF, three terms verbatim:
///
/// 4γ^{s/4−1}/(sΓΓ)·X_sr + 16(γ^{s/2})²/(s²Γ²Γ²)·X_rd² − 64γ^{3s/4}/(s³Γ³Γ³)·X_sr X_rd²
///
/// with s = α+β and X = (αβ/√γ̄)^{s/2} K_{α−β}(2√(√(αβγ)/√γ̄)).
pub fn e2e_cdf_paper(g: f64, scen: &RelayScenario) -> Result<f64> {
    check_gamma("e2e_cdf_paper", g)?;
    if g == 0.0 {
        // the second and third terms vanish; the first is the link form at 0
        scen.paper_shapes()?;
        return scen.sr_link()?.cdf_paper(0.0);
    }
    let t = PaperTerms::new(g, scen)?;
    let s = t.s;
    let f = "e2e_cdf_paper";
    let t1 = exp_checked(f, g, 4f64.ln() + (0.25 * s - 1.0) * t.ln_g - s.ln() - t.ln_gg + t.ln_sr)?;
    let t2 = exp_checked(f, g, 16f64.ln() + s * t.ln_g - 2.0 * s.ln() - 2.0 * t.ln_gg + 2.0 * t.ln_rd)?;
    let t3 = exp_checked(
        f,
        g,
        64f64.ln() + 0.75 * s * t.ln_g - 3.0 * s.ln() - 3.0 * t.ln_gg + t.ln_sr + 2.0 * t.ln_rd,
    )?;
    Ok(t1 + t2 - t3)
}

/// The closed-form end-to-end PDF, verbatim:
///
/// γ^{s/4−1}/ΓΓ·X_sr + 8(γ^{s/2−1})²/(sΓ²Γ²)·X_rd² − 48γ^{3s/4−1}/(s²Γ³Γ³)·X_sr X_rd².
pub fn e2e_pdf_paper(g: f64, scen: &RelayScenario) -> Result<f64> {
    if !(g > 0.0) || g.is_infinite() {
        return Err(Error::Domain {
            function: "e2e_pdf_paper",
            value: g,
            reason: "gamma must be positive and finite",
        });
    }
    let t = PaperTerms::new(g, scen)?;
    let s = t.s;
    let f = "e2e_pdf_paper";
    let p1 = exp_checked(f, g, (0.25 * s - 1.0) * t.ln_g - t.ln_gg + t.ln_sr)?;
    let p2 = exp_checked(f, g, 8f64.ln() + 2.0 * (0.5 * s - 1.0) * t.ln_g - s.ln() - 2.0 * t.ln_gg + 2.0 * t.ln_rd)?;
    let p3 = exp_checked(
        f,
        g,
        48f64.ln() + (0.75 * s - 1.0) * t.ln_g - 2.0 * s.ln() - 3.0 * t.ln_gg + t.ln_sr + 2.0 * t.ln_rd,
    )?;
    Ok(p1 + p2 - p3)
}

/// The per-link closed forms composed with the sum-product and SC algebra:
/// F_sr + F_rd² − F_sr F_rd², every F the closed-form link CDF.
pub fn e2e_cdf_paper_composed(g: f64, scen: &RelayScenario) -> Result<f64> {
    check_gamma("e2e_cdf_paper_composed", g)?;
    let f_sr = scen.sr_link()?.cdf_paper(g)?;
    let f_rd = scen.rd_link()?.cdf_paper(g)?;
    Ok(f_sr + f_rd * f_rd - f_sr * f_rd * f_rd)
}

fn outer_quadrature() -> QuadratureSpec {
    QuadratureSpec {
        abs_tolerance: 1e-15,
        rel_tolerance: 1e-9,
        max_subdivisions: 2_000,
        infinite_tail_transform: true,
    }
}

/// ∫_{h₀}^∞ f_h(h) w(γ̄h²) dh over the S→R fading, split at h₀ + 1.
fn sr_expectation<W: Fn(f64) -> f64>(link: &SnrLink, h0: f64, w: W) -> Result<f64> {
    let gg = link.fading();
    let avg = link.avg_snr();
    let body = |h: f64| {
        let p = gg.pdf_h(h);
        if p == 0.0 {
            0.0
        } else {
            p * w(avg * h * h)
        }
    };
    let spec = outer_quadrature();
    let near = integrate(body, h0, h0 + 1.0, &spec)?.value;
    let far = integrate(body, h0 + 1.0, f64::INFINITY, &spec)?.value;
    Ok(near + far)
}

/// Exact end-to-end CDF by quadrature of the per-link reference laws.
///
/// Min mode: F_sr + F_rd,1 F_rd,2 − F_sr F_rd,1 F_rd,2. Exact and harmonic
/// modes: P(γ_sr ≤ γ) + ∫_γ^∞ f_sr(x) F_rd,1 F_rd,2(y*(x)) dx with
/// y*(x) = γ(x+1)/(x−γ) or γx/(x−γ) respectively.
pub fn e2e_cdf_reference(g: f64, scen: &RelayScenario, mode: SnrMode) -> Result<f64> {
    check_gamma("e2e_cdf_reference", g)?;
    if g == 0.0 {
        return Ok(0.0);
    }
    if g.is_infinite() {
        return Ok(1.0);
    }
    let sr = scen.sr_link()?;
    let rd = scen.rd_link()?;
    let f_sr = sr.cdf_reference(g)?;
    let v = match mode {
        SnrMode::Min => {
            let f_rd = sc_combine_cdf(|x| rd.cdf_reference(x), |x| rd.cdf_reference(x))(g)?;
            f_sr + f_rd - f_sr * f_rd
        }
        SnrMode::Exact | SnrMode::Harmonic => {
            let offset = if mode == SnrMode::Exact { 1.0 } else { 0.0 };
            let h0 = (g / sr.avg_snr()).sqrt();
            let failure = std::cell::Cell::new(None);
            let tail = sr_expectation(&sr, h0, |x| {
                if x <= g {
                    return 1.0;
                }
                let y = g * (x + offset) / (x - g);
                match rd.cdf_reference(y) {
                    Ok(f) => f * f,
                    Err(e) => {
                        failure.set(Some(e));
                        f64::NAN
                    }
                }
            });
            if let Some(e) = failure.take() {
                return Err(e);
            }
            f_sr + tail?
        }
    };
    Ok(v.clamp(0.0, 1.0))
}

/// P(γ_D > γ), computed directly in the survival form for min mode.
pub fn e2e_sf_reference(g: f64, scen: &RelayScenario, mode: SnrMode) -> Result<f64> {
    check_gamma("e2e_sf_reference", g)?;
    match mode {
        SnrMode::Min => {
            let s_sr = scen.sr_link()?.sf_reference(g)?;
            let s_rd = scen.rd_link()?.sf_reference(g)?;
            // 1 − F_rd² = S_rd (2 − S_rd)
            Ok(s_sr * s_rd * (2.0 - s_rd))
        }
        _ => Ok(1.0 - e2e_cdf_reference(g, scen, mode)?),
    }
}

/// Min-mode end-to-end density from the per-link laws:
/// f_sr (1 − F_rd²) + 2 F_rd f_rd (1 − F_sr).
pub fn e2e_pdf_reference(g: f64, scen: &RelayScenario) -> Result<f64> {
    check_gamma("e2e_pdf_reference", g)?;
    let sr = scen.sr_link()?;
    let rd = scen.rd_link()?;
    let f_rd = rd.cdf_reference(g)?;
    Ok(sr.pdf(g) * (1.0 - f_rd * f_rd) + 2.0 * f_rd * rd.pdf(g) * sr.sf_reference(g)?)
}

/// Which family of evaluators a metric is computed with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluator {
    Paper,
    Reference(SnrMode),
}

/// P_out = F_{γ_D}(γ_out).
pub fn outage_probability(scen: &RelayScenario, evaluator: Evaluator) -> Result<f64> {
    let g = scen.outage_threshold();
    match evaluator {
        Evaluator::Paper => e2e_cdf_paper(g, scen),
        Evaluator::Reference(mode) => e2e_cdf_reference(g, scen, mode),
    }
}

/// Survival level below which the capacity integral is truncated.
pub const CAPACITY_TAIL_MASS: f64 = 1e-9;

/// Ergodic capacity with its truncation point and tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityQuadrature {
    /// bit/s/Hz
    pub value: f64,
    pub error_estimate: f64,
    /// γ_max (min mode only; infinity when integrated to infinity)
    pub truncation: f64,
    /// log₂(1+γ_max)·P(γ_D > γ_max)
    pub tail_bound: f64,
}

/// E[log₂(1 + γ_D)] by quadrature of the reference law.
///
/// Min mode integrates the survival form ∫₀^{γ_max} P(γ_D > γ)/(1+γ) dγ / ln 2
/// up to γ_max with P(γ_D > γ_max) < [`CAPACITY_TAIL_MASS`]. Exact and
/// harmonic modes integrate log₂(1 + γ_D(x, y)) against the joint density
/// of γ_sr and the SC output directly.
pub fn ergodic_capacity_quadrature(scen: &RelayScenario, mode: SnrMode) -> Result<CapacityQuadrature> {
    scen.validate()?;
    match mode {
        SnrMode::Min => capacity_min(scen),
        SnrMode::Exact | SnrMode::Harmonic => capacity_joint(scen, mode),
    }
}

fn capacity_min(scen: &RelayScenario) -> Result<CapacityQuadrature> {
    let sf = |g: f64| e2e_sf_reference(g, scen, SnrMode::Min);
    let top = scen.avg_sr.value().max(scen.avg_rd.value());
    let mut gmax = 10.0 * top;
    let mut tail = sf(gmax)?;
    while tail >= CAPACITY_TAIL_MASS {
        gmax *= 4.0;
        tail = sf(gmax)?;
        if gmax > 1e300 {
            return Err(Error::invalid("capacity tail does not decay"));
        }
    }
    let failure = std::cell::Cell::new(None);
    let integrand = |g: f64| match sf(g) {
        Ok(s) => s / (1.0 + g),
        Err(e) => {
            failure.set(Some(e));
            f64::NAN
        }
    };
    let spec = outer_quadrature();
    let mut breaks = vec![0.0];
    let mut b = 1e-3 * scen.avg_sr.value().min(scen.avg_rd.value());
    while b < gmax {
        breaks.push(b);
        b *= 10.0;
    }
    breaks.push(gmax);
    let (mut value, mut err) = (0.0, 0.0);
    for w in breaks.windows(2) {
        match integrate(integrand, w[0], w[1], &spec) {
            Ok(r) => {
                value += r.value;
                err += r.error_estimate;
            }
            Err(e) => return Err(failure.take().unwrap_or(e)),
        }
    }
    Ok(CapacityQuadrature {
        value: (value / LN_2).max(0.0),
        error_estimate: err / LN_2,
        truncation: gmax,
        tail_bound: (1.0 + gmax).log2() * tail,
    })
}

fn capacity_joint(scen: &RelayScenario, mode: SnrMode) -> Result<CapacityQuadrature> {
    let sr = scen.sr_link()?;
    let rd = scen.rd_link()?;
    let avg_rd = rd.avg_snr();
    let spec = outer_quadrature();
    let failure = std::cell::Cell::new(None);
    // density of m = max(h_rd,1, h_rd,2) is 2 F(m) f(m)
    let outer = |m: f64| {
        let p = rd.fading().pdf_h(m);
        if p == 0.0 {
            return 0.0;
        }
        let cdf = match rd.fading().cdf_h(m) {
            Ok(c) => c,
            Err(e) => {
                failure.set(Some(e));
                return f64::NAN;
            }
        };
        let y = avg_rd * m * m;
        match sr_expectation(&sr, 0.0, |x| e2e_snr(x, y, mode).ln_1p()) {
            Ok(inner) => 2.0 * cdf * p * inner,
            Err(e) => {
                failure.set(Some(e));
                f64::NAN
            }
        }
    };
    let mut value = 0.0;
    let mut err = 0.0;
    for (lo, hi) in [(0.0, 1.0), (1.0, f64::INFINITY)] {
        match integrate(outer, lo, hi, &spec) {
            Ok(r) => {
                value += r.value;
                err += r.error_estimate;
            }
            Err(e) => return Err(failure.take().unwrap_or(e)),
        }
    }
    Ok(CapacityQuadrature {
        value: (value / LN_2).max(0.0),
        error_estimate: err / LN_2,
        truncation: f64::INFINITY,
        tail_bound: 0.0,
    })
}

/// Prefactors and Bessel-argument seeds of the closed-form capacity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityConstants {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub a: f64,
    pub b: f64,
}

/// P, Q, R, A, B:
///
/// R = 64(αβ/√γ̄_sr)^{s/2}(αβ/√γ̄_rd)^{s} / (s³Γ(α)³Γ(β)³),
/// Q = 16(αβ/√γ̄_rd)^{s} / (s³Γ(α)²Γ(β)²),
/// P = 4(αβ/√γ̄_sr)^{s/2} / (sΓ(α)Γ(β)),
/// A = 2√(√(αβ)/√γ̄_sr), B = 2√(√(αβ)/√γ̄_rd).
pub fn capacity_constants(scen: &RelayScenario) -> Result<CapacityConstants> {
    let (al, be) = scen.paper_shapes()?;
    let s = al + be;
    let ab = al * be;
    let (gsr, grd) = (scen.avg_sr.value(), scen.avg_rd.value());
    let ln_gg = ln_gamma(al)? + ln_gamma(be)?;
    let x_sr = (ab / gsr.sqrt()).ln();
    let x_rd = (ab / grd.sqrt()).ln();
    let f = "capacity_constants";
    let r = exp_checked(f, s, 64f64.ln() + 0.5 * s * x_sr + s * x_rd - 3.0 * s.ln() - 3.0 * ln_gg)?;
    let q = exp_checked(f, s, 16f64.ln() + s * x_rd - 3.0 * s.ln() - 2.0 * ln_gg)?;
    let p = exp_checked(f, s, 4f64.ln() + 0.5 * s * x_sr - s.ln() - ln_gg)?;
    Ok(CapacityConstants {
        p,
        q,
        r,
        a: 2.0 * (ab.sqrt() / gsr.sqrt()).sqrt(),
        b: 2.0 * (ab.sqrt() / grd.sqrt()).sqrt(),
    })
}

/// The closed-form capacity with the free variable x = 1.
pub fn ergodic_capacity_paper(scen: &RelayScenario) -> Result<f64> {
    ergodic_capacity_paper_at(scen, 1.0)
}

/// The closed-form capacity, verbatim:
///
/// (π/ln2)(−R K(⁴√(Ax)) K(⁴√(Bx))² csc(3sπ/4)) + (π/ln2)(Q K(⁴√(Bx))² csc(sπ/2)) + P K(⁴√(Ax)) csc(sπ/4),
///
/// every K of order α−β. `x` is the symbol left free in the closed form.
pub fn ergodic_capacity_paper_at(scen: &RelayScenario, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::invalid("x must be positive and finite"));
    }
    let (al, be) = scen.paper_shapes()?;
    let s = al + be;
    let c = capacity_constants(scen)?;
    let csc3 = csc_guarded(0.75 * s * PI, DEFAULT_POLE_EPSILON)?;
    let csc2 = csc_guarded(0.5 * s * PI, DEFAULT_POLE_EPSILON)?;
    let csc1 = csc_guarded(0.25 * s * PI, DEFAULT_POLE_EPSILON)?;
    let nu = al - be;
    let ka = bessel_k(nu, (c.a * x).powf(0.25))?;
    let kb = bessel_k(nu, (c.b * x).powf(0.25))?;
    let k = PI / LN_2;
    let v = k * (-c.r * ka * kb * kb * csc3) + k * (c.q * kb * kb * csc2) + c.p * ka * csc1;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow {
            function: "ergodic_capacity_paper",
            value: s,
        })
    }
}

/// Metric names used in the discrepancy report.
pub mod metric {
    /// Link closed-form CDF vs link quadrature CDF.
    pub const CDF_LINK: &str = "link_cdf_closed_form";
    /// End-to-end closed-form CDF vs min-mode reference CDF.
    pub const CDF_E2E: &str = "e2e_cdf_closed_form";
    /// Link closed forms composed by sum-product and SC algebra vs reference.
    pub const CDF_E2E_COMPOSED: &str = "e2e_cdf_composed";
    /// End-to-end closed-form PDF vs min-mode reference PDF.
    pub const PDF_E2E: &str = "e2e_pdf_closed_form";
    /// End-to-end closed-form PDF vs central difference of the closed-form CDF.
    pub const PDF_E2E_VS_DERIVATIVE: &str = "e2e_pdf_vs_cdf_derivative";
    /// Closed-form capacity vs min-mode quadrature capacity.
    pub const CAPACITY: &str = "capacity_closed_form";
}

/// One closed-form vs reference comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyRow {
    /// Evaluation point; `None` for scalar metrics such as capacity.
    pub gamma: Option<f64>,
    pub regime: String,
    pub metric: &'static str,
    /// `Err(marker)` when the closed form could not be evaluated.
    pub paper_value: std::result::Result<f64, &'static str>,
    pub reference_value: std::result::Result<f64, &'static str>,
}

impl DiscrepancyRow {
    pub fn abs_dev(&self) -> Option<f64> {
        match (self.paper_value, self.reference_value) {
            (Ok(p), Ok(r)) => Some((p - r).abs()),
            _ => None,
        }
    }

    pub fn rel_dev(&self) -> Option<f64> {
        let r = *self.reference_value.as_ref().ok()?;
        self.abs_dev().map(|d| d / r.abs())
    }
}

/// Grid over which the closed forms are compared with the references.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyGrid {
    pub gammas: Vec<f64>,
    pub avg_snr_db: Vec<f64>,
    pub regimes: Vec<Regime>,
}

impl Default for DiscrepancyGrid {
    fn default() -> Self {
        Self {
            gammas: vec![0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0],
            avg_snr_db: vec![10.0, 20.0, 30.0],
            regimes: Regime::ALL.to_vec(),
        }
    }
}

fn cell(r: Result<f64>) -> std::result::Result<f64, &'static str> {
    r.map_err(|e| e.marker())
}

/// Central difference with a relative step.
fn central_difference<F: Fn(f64) -> Result<f64>>(f: F, x: f64) -> Result<f64> {
    let h = 1e-5 * x;
    Ok((f(x + h)? - f(x - h)?) / (2.0 * h))
}

/// Closed-form vs reference rows for one scenario (equal γ̄ on both hops).
pub fn discrepancy_rows(regime_label: &str, scen: &RelayScenario, gammas: &[f64]) -> Vec<DiscrepancyRow> {
    let mut rows = Vec::new();
    let row = |gamma, metric, paper, reference| DiscrepancyRow {
        gamma,
        regime: regime_label.to_string(),
        metric,
        paper_value: cell(paper),
        reference_value: cell(reference),
    };
    let sr = scen.sr_link();
    for &g in gammas {
        let link_ref = sr.as_ref().map_err(Clone::clone).and_then(|l| l.cdf_reference(g));
        let link_paper = sr.as_ref().map_err(Clone::clone).and_then(|l| l.cdf_paper(g));
        rows.push(row(Some(g), metric::CDF_LINK, link_paper, link_ref));
        let e2e_ref = e2e_cdf_reference(g, scen, SnrMode::Min);
        rows.push(row(Some(g), metric::CDF_E2E, e2e_cdf_paper(g, scen), e2e_ref.clone()));
        rows.push(row(Some(g), metric::CDF_E2E_COMPOSED, e2e_cdf_paper_composed(g, scen), e2e_ref));
        let pdf_paper = e2e_pdf_paper(g, scen);
        rows.push(row(Some(g), metric::PDF_E2E, pdf_paper.clone(), e2e_pdf_reference(g, scen)));
        rows.push(row(
            Some(g),
            metric::PDF_E2E_VS_DERIVATIVE,
            pdf_paper,
            central_difference(|x| e2e_cdf_paper(x, scen), g),
        ));
    }
    rows.push(row(
        None,
        metric::CAPACITY,
        ergodic_capacity_paper(scen),
        ergodic_capacity_quadrature(scen, SnrMode::Min).map(|c| c.value),
    ));
    rows
}

/// Regime label carrying the average SNR, e.g. `weak|snr_db=20`.
pub fn regime_label(name: &str, avg: AvgSnr) -> String {
    format!("{name}|snr_db={}", avg.db().round())
}

/// Every closed form against its reference over `grid`, in grid order.
pub fn discrepancy_report(grid: &DiscrepancyGrid) -> Result<Vec<DiscrepancyRow>> {
    use rayon::prelude::*;
    let mut cases = Vec::new();
    for &regime in &grid.regimes {
        for &db in &grid.avg_snr_db {
            let avg = AvgSnr::from_db(db)?;
            cases.push((regime, avg, RelayScenario::preset(regime, avg, 1.0)?));
        }
    }
    let blocks: Vec<Vec<DiscrepancyRow>> = cases
        .par_iter()
        .map(|(regime, avg, scen)| discrepancy_rows(&regime_label(regime.name(), *avg), scen, &grid.gammas))
        .collect();
    Ok(blocks.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn weak(avg: f64) -> RelayScenario {
        RelayScenario::preset(Regime::Weak, AvgSnr::new(avg).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn thresholds() {
        assert!((outage_threshold(0.5) - 1.0).abs() < 1e-15);
        assert!((outage_threshold(1.0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn snr_combinations() {
        assert_eq!(e2e_snr_exact(0.0, 5.0), 0.0);
        assert!((e2e_snr_exact(1.0, 1.0) - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(e2e_snr_bound(4.0, 4.0), 2.0);
        assert_eq!(e2e_snr(4.0, 4.0, SnrMode::Min), 4.0);
        assert!((e2e_snr_bound(1.0, 1e12) - 1.0).abs() < 1e-11);
        assert!(("harmonic".parse::<SnrMode>().unwrap()) == SnrMode::Harmonic);
        assert!("median".parse::<SnrMode>().is_err());
    }

    #[test]
    fn sc_combination() {
        let f = |x: f64| Ok(1.0 - (-x).exp());
        let sq = sc_combine_cdf(f, f);
        assert!((sq(1.0).unwrap() - f(1.0).unwrap().powi(2)).abs() < 1e-16);
        let one = sc_combine_cdf(f, |_| Ok(1.0));
        assert_eq!(one(0.7).unwrap(), f(0.7).unwrap());
    }

    #[test]
    fn paper_forms_need_shared_shapes() {
        let s = RelayScenario::new(
            Regime::Weak.params(),
            Regime::Strong.params(),
            AvgSnr::new(10.0).unwrap(),
            AvgSnr::new(10.0).unwrap(),
            1.0,
        )
        .unwrap();
        assert!(e2e_cdf_paper(1.0, &s).is_err());
        assert!(e2e_cdf_reference(1.0, &s, SnrMode::Min).is_ok());
    }

    #[test]
    fn reference_modes_ordered() {
        // exact ≤ harmonic ≤ min pointwise, so the CDFs order the other way
        let s = weak(10.0);
        for &g in &[0.5, 3.0, 12.0] {
            let ex = e2e_cdf_reference(g, &s, SnrMode::Exact).unwrap();
            let ha = e2e_cdf_reference(g, &s, SnrMode::Harmonic).unwrap();
            let mi = e2e_cdf_reference(g, &s, SnrMode::Min).unwrap();
            assert!(ex >= ha && ha >= mi, "g={g}: {ex} {ha} {mi}");
        }
    }

    #[test]
    fn reference_pdf_matches_cdf_derivative() {
        let s = weak(30.0);
        for &g in &[1.0, 10.0, 40.0] {
            let fd = central_difference(|x| e2e_cdf_reference(x, &s, SnrMode::Min), g).unwrap();
            assert!(rel(fd, e2e_pdf_reference(g, &s).unwrap()) < 1e-4);
        }
    }

    #[test]
    fn capacity_pole_detected() {
        let p = TurbulenceParams::new(2.0, 2.0).unwrap();
        let s = RelayScenario::shared(p, AvgSnr::new(10.0).unwrap(), AvgSnr::new(10.0).unwrap(), 1.0).unwrap();
        assert!(matches!(ergodic_capacity_paper(&s), Err(Error::PoleProximity { .. })));
    }

    #[test]
    fn constants_equal_seeds_for_equal_snr() {
        let c = capacity_constants(&weak(100.0)).unwrap();
        assert_eq!(c.a, c.b);
    }
}
