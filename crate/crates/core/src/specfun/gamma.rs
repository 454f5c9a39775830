use crate::error::{Error, Result};

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// Largest argument whose gamma value is finite in f64.
const GAMMA_MAX_ARG: f64 = 171.624_376_956_302_7;

fn lanczos_sum(z: f64) -> f64 {
    // z = x - 1
    let mut sum = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    sum
}

fn check_positive(function: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            function,
            value: x,
            reason: "argument must be positive and finite",
        })
    }
}

/// Γ(x) for x > 0.
pub fn gamma_fn(x: f64) -> Result<f64> {
    check_positive("gamma_fn", x)?;
    if x > GAMMA_MAX_ARG {
        return Err(Error::Overflow {
            function: "gamma_fn",
            value: x,
        });
    }
    if x < 0.5 {
        // Γ(x) = Γ(x+1)/x keeps the Lanczos sum in its accurate range.
        return Ok(gamma_fn(x + 1.0)? / x);
    }
    if x == x.floor() && x <= 23.0 {
        let mut f = 1.0;
        for k in 2..(x as u32) {
            f *= k as f64;
        }
        return Ok(f);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    // split the power to stay finite near the top of the range
    let half = t.powf(0.5 * (z + 0.5));
    Ok(((2.0 * std::f64::consts::PI).sqrt() * half) * (half * (-t).exp()) * lanczos_sum(z))
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    check_positive("ln_gamma", x)?;
    if x < 0.5 {
        return Ok(ln_gamma(x + 1.0)? - x.ln());
    }
    if x < 20.0 {
        return Ok(gamma_fn(x)?.ln());
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(LN_SQRT_2PI + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln())
}
