//! Gaussian error function, its inverse, and the reciprocal-inverse-erf
//! function `h(u) = 1 / erfinv(2u - 1)` that governs the sensitivity of the
//! norm estimator.
//!
//! `erf` uses the positive-term power series
//! `erf(x) = 2/sqrt(pi) * x * exp(-x^2) * sum_k (2x^2)^k / (1*3*...*(2k+1))`
//! for `|x| <= 3` and the Laplace continued fraction for `erfc` beyond that.
//! Both are free of cancellation, giving close to full double precision.
//!
//! `erfinv` starts from a rational approximation in `w = -ln(1 - u^2)` and
//! polishes it with Newton steps using the derivative
//! `d/du erfinv(u) = sqrt(pi)/2 * exp(erfinv(u)^2)`.

use crate::error::{Error, Result};
use std::f64::consts::{FRAC_2_SQRT_PI, PI, SQRT_2};

const SERIES_CUTOFF: f64 = 3.0;
const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Gaussian error function. Exactly odd: `erf(-x) == -erf(x)`.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let ax = x.abs();
    let v = if ax <= SERIES_CUTOFF {
        erf_series(ax)
    } else {
        1.0 - erfc_continued_fraction(ax)
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// Complementary error function `1 - erf(x)`, accurate in the upper tail.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x > SERIES_CUTOFF {
        erfc_continued_fraction(x)
    } else if x >= 0.0 {
        1.0 - erf_series(x)
    } else if x >= -SERIES_CUTOFF {
        1.0 + erf_series(-x)
    } else {
        2.0 - erfc_continued_fraction(-x)
    }
}

fn erf_series(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let two_x2 = 2.0 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0u32;
    loop {
        k += 1;
        term *= two_x2 / f64::from(2 * k + 1);
        sum += term;
        if term < sum * 1e-17 || k > 200 {
            break;
        }
    }
    FRAC_2_SQRT_PI * x * (-x * x).exp() * sum
}

// erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), x > 0,
// evaluated with the modified Lentz algorithm.
fn erfc_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = f64::from(k) * 0.5;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (SQRT_PI * f)
}

/// Inverse error function on the open interval `(-1, 1)`.
///
/// `|u| >= 1` (and NaN) is a domain error; callers that need the limiting
/// values handle those cases themselves.
pub fn erfinv(u: f64) -> Result<f64> {
    if !(u > -1.0 && u < 1.0) {
        return Err(Error::Domain {
            function: "erfinv",
            value: u,
        });
    }
    if u == 0.0 {
        return Ok(0.0);
    }
    let au = u.abs();
    let mut x = erfinv_initial(au);
    // For |u| > 1/2 the residual is formed from the complement 1 - |u|, which
    // is exact in floating point and keeps Newton accurate near the poles.
    let complement = 1.0 - au;
    for _ in 0..8 {
        let residual = if au > 0.5 {
            complement - erfc(x)
        } else {
            erf(x) - au
        };
        let step = residual * 0.5 * SQRT_PI * (x * x).exp();
        let next = x - step;
        if !next.is_finite() {
            break;
        }
        x = next;
        if step.abs() <= 1e-16 * x.abs() {
            break;
        }
    }
    Ok(if u < 0.0 { -x } else { x })
}

// Single-precision rational approximation (Giles), used only as a Newton seed.
fn erfinv_initial(u: f64) -> f64 {
    let mut w = -((1.0 - u) * (1.0 + u)).ln();
    let p = if w < 5.0 {
        w -= 2.5;
        let mut p = 2.810_226_36e-08;
        p = 3.432_739_39e-07 + p * w;
        p = -3.523_387_7e-06 + p * w;
        p = -4.391_506_54e-06 + p * w;
        p = 0.000_218_580_87 + p * w;
        p = -0.001_253_725_03 + p * w;
        p = -0.004_177_681_64 + p * w;
        p = 0.246_640_727 + p * w;
        1.501_409_41 + p * w
    } else {
        w = w.sqrt() - 3.0;
        let mut p = -0.000_200_214_257;
        p = 0.000_100_950_558 + p * w;
        p = 0.001_349_343_22 + p * w;
        p = -0.003_673_428_44 + p * w;
        p = 0.005_739_507_73 + p * w;
        p = -0.007_622_461_3 + p * w;
        p = 0.009_438_870_47 + p * w;
        p = 1.001_674_06 + p * w;
        2.832_976_82 + p * w
    };
    p * u
}

fn check_h_domain(function: &'static str, u: f64) -> Result<()> {
    if u > 0.5 && u < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain { function, value: u })
    }
}

/// `h(u) = 1 / erfinv(2u - 1)` on `(1/2, 1)`.
pub fn h(u: f64) -> Result<f64> {
    check_h_domain("h", u)?;
    let e = erfinv(2.0 * u - 1.0)?;
    if e == 0.0 {
        return Err(Error::Domain {
            function: "h",
            value: u,
        });
    }
    Ok(1.0 / e)
}

/// Derivative of [`h`]: `-sqrt(pi) * exp(e^2) / e^2` with `e = erfinv(2u - 1)`.
pub fn h_prime(u: f64) -> Result<f64> {
    check_h_domain("h_prime", u)?;
    let e = erfinv(2.0 * u - 1.0)?;
    if e == 0.0 {
        return Err(Error::Domain {
            function: "h_prime",
            value: u,
        });
    }
    let e2 = e * e;
    Ok(-SQRT_PI * e2.exp() / e2)
}

/// CDF of `N(0, sigma^2)` at `tau`: `(1 + erf(tau / (sigma sqrt 2))) / 2`.
pub fn gaussian_cdf_at_threshold(tau: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "sigma must be positive and finite, got {sigma}"
        )));
    }
    Ok(0.5 * (1.0 + erf(tau / (sigma * SQRT_2))))
}

/// Upper end of the interval on which `h` is controlled: `(1 + erf(1)) / 2`.
pub fn h_upper_limit() -> f64 {
    0.5 * (1.0 + erf(1.0))
}

/// Outcome of evaluating one of the analytic inequalities on concrete inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InequalityCheck {
    /// Preconditions hold and `lhs <= bound`.
    Holds { lhs: f64, bound: f64 },
    /// Preconditions hold but the inequality is violated.
    Violated { lhs: f64, bound: f64 },
    /// The inputs are outside the hypotheses; nothing is asserted.
    PreconditionsViolated(&'static str),
}

impl InequalityCheck {
    pub fn holds(&self) -> bool {
        matches!(self, InequalityCheck::Holds { .. })
    }

    fn compare(lhs: f64, bound: f64, abs_slack: f64) -> Self {
        if lhs <= bound * (1.0 + 1e-12) + abs_slack {
            InequalityCheck::Holds { lhs, bound }
        } else {
            InequalityCheck::Violated { lhs, bound }
        }
    }
}

const UNIT_TOL: f64 = 1e-12;

fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum()
}

/// Checks the ratio-perturbation inequality
/// `||x1/t1 - x2/t2||^2 <= 4 eta^2 / (alpha^2 (alpha - eta)^2)`
/// for `(x1, t1)` on the unit sphere, `(x2, t2)` in the unit ball, within
/// distance `eta` of each other, and `t1 >= alpha > eta > 0`.
pub fn check_lemma_sincos(
    x1: &[f64],
    t1: f64,
    x2: &[f64],
    t2: f64,
    alpha: f64,
    eta: f64,
) -> InequalityCheck {
    use InequalityCheck::PreconditionsViolated as Pv;
    if x1.len() != x2.len() {
        return Pv("x1 and x2 differ in length");
    }
    if !(eta > 0.0) || !(t2 > 0.0) {
        return Pv("t2, alpha and eta must be positive");
    }
    if !(alpha > eta) {
        return Pv("alpha must exceed eta");
    }
    if !(t1 >= alpha) {
        return Pv("t1 must be at least alpha");
    }
    if (sq_norm(x1) + t1 * t1 - 1.0).abs() > UNIT_TOL {
        return Pv("(x1, t1) must have unit norm");
    }
    if sq_norm(x2) + t2 * t2 > 1.0 + UNIT_TOL {
        return Pv("(x2, t2) must lie in the unit ball");
    }
    let dist2: f64 = x1
        .iter()
        .zip(x2)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        + (t1 - t2) * (t1 - t2);
    if dist2 > eta * eta * (1.0 + UNIT_TOL) {
        return Pv("(x1, t1) and (x2, t2) must be within eta");
    }
    let lhs: f64 = x1
        .iter()
        .zip(x2)
        .map(|(a, b)| {
            let d = a / t1 - b / t2;
            d * d
        })
        .sum();
    let bound = 4.0 * eta * eta / (alpha * alpha * (alpha - eta) * (alpha - eta));
    InequalityCheck::compare(lhs, bound, 0.0)
}

/// Checks `|h(a) - h(b)| <= |h'(1/2 + eta)| |b - a|` for
/// `a, b in [1/2 + eta, (1 + erf(1)) / 2)`.
pub fn check_h_lipschitz(a: f64, b: f64, eta: f64) -> InequalityCheck {
    let lo = 0.5 + eta;
    let hi = h_upper_limit();
    if !(eta > 0.0) || !(lo < hi) {
        return InequalityCheck::PreconditionsViolated("eta must lie in (0, erf(1)/2)");
    }
    if !(a >= lo && a < hi && b >= lo && b < hi) {
        return InequalityCheck::PreconditionsViolated("a and b must lie in [1/2 + eta, (1 + erf(1))/2)");
    }
    let (Ok(ha), Ok(hb), Ok(slope)) = (h(a), h(b), h_prime(lo)) else {
        return InequalityCheck::PreconditionsViolated("h undefined at the inputs");
    };
    let lhs = (ha - hb).abs();
    let bound = slope.abs() * (b - a).abs();
    // erfinv is accurate to ~1e-15 relative, which bounds the rounding in lhs.
    InequalityCheck::compare(lhs, bound, 1e-13 * ha.abs().max(hb.abs()))
}

/// Checks the secant bounds
/// `(b-a) 2/sqrt(pi) e^{-b^2} <= erf(b) - erf(a) <= (b-a) 2/sqrt(pi) e^{-a^2}`
/// for `0 <= a <= b`. `lhs` reports the larger of the two one-sided excesses
/// (the violated side) and `bound` is zero.
pub fn check_erf_secant(a: f64, b: f64) -> InequalityCheck {
    if !(a >= 0.0 && a <= b && b.is_finite()) {
        return InequalityCheck::PreconditionsViolated("need 0 <= a <= b");
    }
    let diff = erf(b) - erf(a);
    let lower = (b - a) * FRAC_2_SQRT_PI * (-b * b).exp();
    let upper = (b - a) * FRAC_2_SQRT_PI * (-a * a).exp();
    let excess = (lower - diff).max(diff - upper);
    InequalityCheck::compare(excess, 0.0, 4.0 * f64::EPSILON)
}

/// `4 pi e^2`, the leading constant of the fixed-signal sample size.
pub fn four_pi_e2() -> f64 {
    4.0 * PI * std::f64::consts::E * std::f64::consts::E
}
