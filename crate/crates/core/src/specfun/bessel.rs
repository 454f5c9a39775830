//! Modified Bessel function of the second kind, real order.
//!
//! The order is split as ν = μ + n with |μ| ≤ 1/2. K_μ and K_{μ+1} come from
//! Temme's series for x < 2 and Steed's continued fraction otherwise, then
//! forward recurrence (stable for K) lifts them to order ν. The recurrence
//! carries a separate log-scale so that large orders at small arguments do
//! not overflow before the caller decides what to do with the magnitude.

use crate::error::{Error, Result};
use std::f64::consts::PI;

const MAX_ORDER: f64 = 40.0;
const MAX_ITER: usize = 100_000;
const EPS: f64 = 1e-17;
const TEMME_SWITCH: f64 = 2.0;
/// Width of the band around integer orders where the limiting forms apply.
const NEAR_INTEGER: f64 = 1e-6;
const RESCALE: f64 = 1e250;

/// Taylor coefficients of 1/Γ(1+z) about z = 0.
const RGAMMA1P: [f64; 29] = [
    1.0,
    0.577_215_664_901_532_860_61,
    -0.655_878_071_520_253_881_08,
    -0.042_002_635_034_095_235_529,
    0.166_538_611_382_291_489_5,
    -0.042_197_734_555_544_336_748,
    -0.009_621_971_527_876_973_562_1,
    0.007_218_943_246_663_099_542_4,
    -0.001_165_167_591_859_065_112_1,
    -0.000_215_241_674_114_950_972_82,
    0.000_128_050_282_388_116_186_15,
    -0.000_020_134_854_780_788_238_656,
    -1.250_493_482_142_670_657_3e-6,
    1.133_027_231_981_695_882_4e-6,
    -2.056_338_416_977_607_103_5e-7,
    6.116_095_104_481_415_817_9e-9,
    5.002_007_644_469_222_930_1e-9,
    -1.181_274_570_487_020_144_6e-9,
    1.043_426_711_691_100_510_5e-10,
    7.782_263_439_905_071_254e-12,
    -3.696_805_618_642_205_708_2e-12,
    5.100_370_287_454_475_979e-13,
    -2.058_326_053_566_506_783_2e-14,
    -5.348_122_539_423_017_982_4e-15,
    1.226_778_628_238_260_790_2e-15,
    -1.181_259_301_697_458_769_5e-16,
    1.186_692_254_751_600_332_6e-18,
    1.412_380_655_318_031_781_6e-18,
    -2.298_745_684_435_370_206_6e-19,
];

/// Whether a K evaluation came back as an ordinary number or underflowed to 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Normal,
    Underflow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselK {
    pub value: f64,
    pub status: Status,
}

/// Γ₁(μ), Γ₂(μ) of Temme's method for |μ| ≤ 1/2.
///
/// Γ₂ = (1/Γ(1-μ) + 1/Γ(1+μ))/2 and Γ₁ = (1/Γ(1-μ) - 1/Γ(1+μ))/(2μ), both
/// summed from the even/odd parts of the 1/Γ(1+z) series so that μ → 0
/// has no cancellation.
fn temme_gammas(mu: f64) -> (f64, f64) {
    let mu2 = mu * mu;
    let mut g1 = 0.0;
    let mut g2 = 0.0;
    let mut p = 1.0;
    for pair in RGAMMA1P.chunks(2) {
        g2 += pair[0] * p;
        if pair.len() > 1 {
            g1 -= pair[1] * p;
        }
        p *= mu2;
    }
    (g1, g2)
}

/// πμ / sin(πμ), with its Taylor form next to μ = 0.
fn sin_ratio(mu: f64) -> f64 {
    let t = PI * mu;
    if mu.abs() < NEAR_INTEGER {
        let t2 = t * t;
        1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0
    } else {
        t / t.sin()
    }
}

/// sinh(σ)/σ, with its Taylor form next to σ = 0.
fn sinh_ratio(sigma: f64) -> f64 {
    if sigma.abs() < 1e-4 {
        let s2 = sigma * sigma;
        1.0 + s2 / 6.0 + s2 * s2 / 120.0
    } else {
        sigma.sinh() / sigma
    }
}

/// (K_μ(x), K_{μ+1}(x)) for x < 2 by Temme's series (unscaled).
fn temme_series(mu: f64, x: f64) -> (f64, f64) {
    let half_x = 0.5 * x;
    let (g1, g2) = temme_gammas(mu);
    let rg_plus = g2 - mu * g1; // 1/Γ(1+μ)
    let rg_minus = g2 + mu * g1; // 1/Γ(1-μ)

    let d = -half_x.ln();
    let sigma = mu * d;
    let mut ff = sin_ratio(mu) * (g1 * sigma.cosh() + g2 * sinh_ratio(sigma) * d);
    let mut sum = ff;
    let e = sigma.exp();
    let mut p = 0.5 * e / rg_plus;
    let mut q = 0.5 / (e * rg_minus);
    let mut c = 1.0;
    let quarter_x2 = half_x * half_x;
    let mut sum1 = p;
    let mu2 = mu * mu;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        ff = (fi * ff + p + q) / (fi * fi - mu2);
        c *= quarter_x2 / fi;
        p /= fi - mu;
        q /= fi + mu;
        let del = c * ff;
        sum += del;
        sum1 += c * (p - fi * ff);
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    (sum, sum1 * 2.0 / x)
}

/// (e^x K_μ(x), e^x K_{μ+1}(x)) for x ≥ 2 by Steed's continued fraction.
fn steed_cf2(mu: f64, x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - mu * mu;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    h *= a1;
    let k_mu = (PI / (2.0 * x)).sqrt() / s;
    let k_mu1 = k_mu * (mu + x + 0.5 - h) / x;
    (k_mu, k_mu1)
}

fn validate(nu: f64, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            function: "bessel_k",
            value: x,
            reason: "argument must be positive and finite",
        });
    }
    if !(nu.abs() <= MAX_ORDER) {
        return Err(Error::Domain {
            function: "bessel_k",
            value: nu,
            reason: "order magnitude must not exceed 40",
        });
    }
    Ok(())
}

/// ln K_ν(x) without intermediate overflow or underflow.
pub fn ln_bessel_k(nu: f64, x: f64) -> Result<f64> {
    validate(nu, x)?;
    let nu = nu.abs();
    let n = (nu + 0.5).floor();
    let mu = nu - n;

    let (mut k_lo, mut k_hi, mut log_scale) = if x < TEMME_SWITCH {
        let (a, b) = temme_series(mu, x);
        (a, b, 0.0)
    } else {
        let (a, b) = steed_cf2(mu, x);
        (a, b, -x)
    };
    let two_over_x = 2.0 / x;
    for i in 1..=(n as usize) {
        let next = (mu + i as f64) * two_over_x * k_hi + k_lo;
        k_lo = k_hi;
        k_hi = next;
        if k_hi > RESCALE {
            k_lo /= RESCALE;
            k_hi /= RESCALE;
            log_scale += RESCALE.ln();
        }
    }
    Ok(k_lo.ln() + log_scale)
}

/// e^x K_ν(x).
pub fn bessel_k_scaled(nu: f64, x: f64) -> Result<f64> {
    let ln = ln_bessel_k(nu, x)? + x;
    if ln > f64::MAX.ln() {
        return Err(Error::Overflow {
            function: "bessel_k_scaled",
            value: x,
        });
    }
    Ok(ln.exp())
}

/// K_ν(x) together with an underflow flag.
pub fn bessel_k_checked(nu: f64, x: f64) -> Result<BesselK> {
    let ln = ln_bessel_k(nu, x)?;
    if ln > f64::MAX.ln() {
        return Err(Error::Overflow {
            function: "bessel_k",
            value: x,
        });
    }
    let value = ln.exp();
    let status = if value < f64::MIN_POSITIVE {
        Status::Underflow
    } else {
        Status::Normal
    };
    Ok(BesselK {
        value: if status == Status::Underflow { 0.0 } else { value },
        status,
    })
}

/// K_ν(x) for x > 0, |ν| ≤ 40. Underflow yields 0; see [`bessel_k_checked`].
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    bessel_k_checked(nu, x).map(|k| k.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn temme_gammas_at_zero() {
        let (g1, g2) = temme_gammas(0.0);
        assert!((g1 + 0.577_215_664_901_532_9).abs() < 1e-16);
        assert_eq!(g2, 1.0);
    }

    #[test]
    fn temme_gammas_match_direct_form() {
        use crate::specfun::gamma_fn;
        for &mu in &[0.5, -0.37, 0.21, 0.05] {
            let (g1, g2) = temme_gammas(mu);
            let rp = 1.0 / gamma_fn(1.0 + mu).unwrap();
            let rm = 1.0 / gamma_fn(1.0 - mu).unwrap();
            assert!(rel(g2, 0.5 * (rm + rp)) < 1e-14);
            assert!(rel(g1, (rm - rp) / (2.0 * mu)) < 1e-12);
        }
    }

    #[test]
    fn half_integer_closed_forms() {
        for &x in &[1e-3, 0.1, 1.0, 1.9, 2.0, 5.0, 30.0] {
            let k12 = (PI / (2.0 * x)).sqrt() * (-x).exp();
            assert!(rel(bessel_k(0.5, x).unwrap(), k12) < 1e-13, "x={x}");
            let k32 = k12 * (1.0 + 1.0 / x);
            assert!(rel(bessel_k(1.5, x).unwrap(), k32) < 1e-13, "x={x}");
        }
    }

    #[test]
    fn symmetric_in_order() {
        for &(nu, x) in &[(0.3, 0.7), (4.1, 2.0), (12.5, 9.0)] {
            assert_eq!(bessel_k(nu, x).unwrap(), bessel_k(-nu, x).unwrap());
        }
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(bessel_k(1.0, 0.0), Err(Error::Domain { .. })));
        assert!(matches!(bessel_k(1.0, -2.0), Err(Error::Domain { .. })));
        assert!(matches!(bessel_k(41.0, 1.0), Err(Error::Domain { .. })));
        assert!(matches!(bessel_k(f64::NAN, 1.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn underflow_is_flagged() {
        let k = bessel_k_checked(0.0, 800.0).unwrap();
        assert_eq!(k.status, Status::Underflow);
        assert_eq!(k.value, 0.0);
        assert!(ln_bessel_k(0.0, 800.0).unwrap().is_finite());
        assert_eq!(bessel_k_checked(0.0, 1.0).unwrap().status, Status::Normal);
    }
}
