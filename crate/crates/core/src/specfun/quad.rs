//! Globally adaptive 15-point Gauss-Kronrod quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate meets `max(abs_tolerance, rel_tolerance * |value|)`. A semi-infinite
//! range `[a, ∞)` is mapped onto `[0, 1)` by `x = a + t / (1 - t)`.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tolerance: f64,
    pub rel_tolerance: f64,
    pub max_subdivisions: usize,
    /// Permit an infinite upper limit through the `t / (1 - t)` map.
    pub infinite_tail_transform: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tolerance: 1e-12,
            rel_tolerance: 1e-10,
            max_subdivisions: 2_000,
            infinite_tail_transform: true,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tolerance: f64, rel_tolerance: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = Self {
            abs_tolerance,
            rel_tolerance,
            max_subdivisions,
            infinite_tail_transform: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tolerance > 0.0) || !(self.rel_tolerance > 0.0) {
            return Err(Error::invalid("quadrature tolerances must be strictly positive"));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::invalid("max_subdivisions must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions: usize,
}

struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<Segment> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let eval = |x: f64| -> Result<f64> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFiniteIntegrand { at: x })
        }
    };

    let fc = eval(center)?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Segment {
        lo,
        hi,
        value,
        error,
    })
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<Integral> {
    let first = kronrod15(f, lo, hi)?;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut subdivisions = 1;

    loop {
        let tol = spec.abs_tolerance.max(spec.rel_tolerance * total.abs());
        if total_err <= tol {
            break;
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::NoConvergence {
                estimate: total,
                error_estimate: total_err,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // interval exhausted at machine precision
            return Err(Error::NoConvergence {
                estimate: total,
                error_estimate: total_err,
                subdivisions,
            });
        }
        let left = kronrod15(f, worst.lo, mid)?;
        let right = kronrod15(f, mid, worst.hi)?;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;

        // keep the running sums honest against cancellation drift
        if subdivisions % 64 == 0 {
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error_estimate: f64 = heap.iter().map(|s| s.error).sum();
    Ok(Integral {
        value,
        error_estimate,
        subdivisions,
    })
}

/// ∫ f over `[lower, upper]`; `upper` may be `f64::INFINITY` when the spec
/// allows the tail transform.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    lower: f64,
    upper: f64,
    spec: &QuadratureSpec,
) -> Result<Integral> {
    spec.validate()?;
    if !lower.is_finite() {
        return Err(Error::invalid("lower limit must be finite"));
    }
    if upper.is_nan() || upper < lower {
        return Err(Error::invalid("upper limit must not lie below the lower limit"));
    }
    if upper == lower {
        return Ok(Integral {
            value: 0.0,
            error_estimate: 0.0,
            subdivisions: 0,
        });
    }
    if upper.is_infinite() {
        if !spec.infinite_tail_transform {
            return Err(Error::invalid(
                "infinite upper limit requires infinite_tail_transform",
            ));
        }
        let mapped = |t: f64| {
            let s = 1.0 - t;
            let x = lower + t / s;
            let y = f(x);
            // past the representable range the integrand contributes nothing
            if y == 0.0 {
                0.0
            } else {
                y / (s * s)
            }
        };
        return adaptive(&mapped, 0.0, 1.0, spec);
    }
    adaptive(&f, lower, upper, spec)
}

/// ∫₀^upper f(x) dx through x = u^q.
///
/// With f(x) ~ x^{p-1} at the origin, choosing q = 1/p makes the transformed
/// integrand `f(u^q) q u^{q-1}` bounded there.
pub fn integrate_power_substituted<F: Fn(f64) -> f64>(
    f: F,
    upper: f64,
    q: f64,
    spec: &QuadratureSpec,
) -> Result<Integral> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::invalid("substitution power must be finite and >= 1"));
    }
    if q == 1.0 {
        return integrate(f, 0.0, upper, spec);
    }
    let u_upper = if upper.is_infinite() {
        f64::INFINITY
    } else {
        upper.powf(1.0 / q)
    };
    integrate(
        |u: f64| {
            if u == 0.0 {
                return 0.0;
            }
            let x = u.powf(q);
            let y = f(x);
            if y == 0.0 {
                0.0
            } else {
                y * q * x / u
            }
        },
        0.0,
        u_upper,
        spec,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tight() -> QuadratureSpec {
        QuadratureSpec::new(1e-14, 1e-12, 5_000).unwrap()
    }

    #[test]
    fn polynomial() {
        let r = integrate(|x| 3.0 * x * x, 0.0, 1.0, &tight()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn exponential_tail() {
        let r = integrate(|x| (-x).exp(), 0.0, f64::INFINITY, &tight()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!(r.error_estimate <= 1e-12);
    }

    #[test]
    fn algebraic_endpoint_singularity() {
        // ∫₀¹ x^{-1/2} dx = 2
        let plain = integrate(|x| x.powf(-0.5), 0.0, 1.0, &tight());
        let subst = integrate_power_substituted(|x| x.powf(-0.5), 1.0, 2.0, &tight()).unwrap();
        assert!((subst.value - 2.0).abs() < 1e-12);
        if let Ok(p) = plain {
            assert!((p.value - 2.0).abs() < 1e-8);
        }
    }

    #[test]
    fn gamma_integral() {
        use crate::specfun::gamma_fn;
        for &a in &[0.3, 1.0, 2.5, 4.2, 9.0] {
            let q = if a < 1.0 { 1.0 / a } else { 1.0 };
            let r = integrate_power_substituted(
                |x| x.powf(a - 1.0) * (-x).exp(),
                f64::INFINITY,
                q,
                &tight(),
            )
            .unwrap();
            let want = gamma_fn(a).unwrap();
            assert!(((r.value - want) / want).abs() < 1e-11, "a={a}");
        }
    }

    #[test]
    fn nonconvergence_carries_estimate() {
        let spec = QuadratureSpec::new(1e-15, 1e-15, 2).unwrap();
        match integrate(|x: f64| (50.0 * x).sin().abs(), 0.0, 10.0, &spec) {
            Err(Error::NoConvergence { estimate, .. }) => assert!(estimate.is_finite()),
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_specs_and_limits() {
        assert!(QuadratureSpec::new(0.0, 1e-8, 10).is_err());
        assert!(QuadratureSpec::new(1e-8, -1.0, 10).is_err());
        assert!(QuadratureSpec::new(1e-8, 1e-8, 0).is_err());
        let mut spec = tight();
        spec.infinite_tail_transform = false;
        assert!(integrate(|x| (-x).exp(), 0.0, f64::INFINITY, &spec).is_err());
        assert!(integrate(|x| x, 1.0, 0.0, &tight()).is_err());
        assert_eq!(integrate(|x| x, 2.0, 2.0, &tight()).unwrap().value, 0.0);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let r = integrate(|x| if x > 0.5 { f64::NAN } else { x }, 0.0, 1.0, &tight());
        assert!(matches!(r, Err(Error::NonFiniteIntegrand { .. })));
    }
}
