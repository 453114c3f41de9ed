//! Norm estimation from constant-threshold one-bit measurements.
//!
//! With `y_i = sign(<a_i, x> - tau)` and Gaussian `a_i`, the fraction of
//! `-1` bits is the empirical CDF `F_m(tau)` of `N(0, ||x||^2)` at `tau`.
//! Inverting `F(tau) = (1 + erf(tau / (||x|| sqrt 2))) / 2` gives the
//! estimator
//!
//! ```text
//! Lambda = tau / (sqrt(2) * erfinv(2 F_m(tau) - 1))
//! ```
//!
//! which needs only a bit count and one `erfinv` evaluation. The
//! Dvoretzky-Kiefer-Wolfowitz bound `P(sup |F_m - F| > gamma) <= 2 exp(-2 m gamma^2)`
//! drives the sample-size calculators below.

use std::f64::consts::{E, PI, SQRT_2};

use crate::error::{ensure, Error, Result};
use crate::measurement::SignVector;
use crate::special::{erf, erfinv, four_pi_e2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormStatus {
    /// `F_m in (1/2, 1)`; `lambda` holds the estimate.
    Ok,
    /// `F_m <= 1/2`: too few measurements or `||x|| >> tau`. No estimate.
    BelowHalf,
    /// `F_m = 1`: every measurement fell below the threshold; `lambda = 0`.
    Saturated,
}

impl NormStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            NormStatus::Ok => "ok",
            NormStatus::BelowHalf => "below_half",
            NormStatus::Saturated => "saturated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub lambda: Option<f64>,
    pub f_m: f64,
    pub tau: f64,
    pub m: usize,
    pub status: NormStatus,
}

/// `F_m = #{i : y_i = -1} / m`.
pub fn empirical_cdf(y: &SignVector) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::EmptyMeasurement);
    }
    Ok(y.count_negative() as f64 / y.len() as f64)
}

/// Estimates `||x||_2` from measurements taken at constant threshold `tau`.
pub fn estimate_norm(y: &SignVector, tau: f64) -> Result<NormEstimate> {
    let f_m = empirical_cdf(y)?;
    estimate_norm_from_cdf(f_m, tau, y.len())
}

/// Same as [`estimate_norm`] for an already tallied `F_m` over `m` bits.
pub fn estimate_norm_from_cdf(f_m: f64, tau: f64, m: usize) -> Result<NormEstimate> {
    ensure(tau > 0.0 && tau.is_finite(), || format!("tau must be positive, got {tau}"))?;
    ensure((0.0..=1.0).contains(&f_m), || format!("F_m must lie in [0, 1], got {f_m}"))?;
    let (lambda, status) = if f_m >= 1.0 {
        (Some(0.0), NormStatus::Saturated)
    } else if f_m <= 0.5 {
        (None, NormStatus::BelowHalf)
    } else {
        let e = erfinv(2.0 * f_m - 1.0)?;
        (Some(tau / (SQRT_2 * e)), NormStatus::Ok)
    };
    Ok(NormEstimate {
        lambda,
        f_m,
        tau,
        m,
        status,
    })
}

/// DKW failure probability `2 exp(-2 m gamma^2)`, clamped to `[0, 1]`.
pub fn dkw_failure_probability(m: usize, gamma: f64) -> Result<f64> {
    ensure(m >= 1, || "m must be at least 1".into())?;
    ensure(gamma > 0.0 && gamma.is_finite(), || format!("gamma must be positive, got {gamma}"))?;
    Ok((2.0 * (-2.0 * m as f64 * gamma * gamma).exp()).min(1.0))
}

fn check_annulus(r: f64, big_r: f64) -> Result<()> {
    ensure(r > 0.0 && r <= big_r && big_r.is_finite(), || {
        format!("annulus requires 0 < r <= R, got r = {r}, R = {big_r}")
    })
}

fn check_probability(epsilon: f64) -> Result<()> {
    ensure(epsilon > 0.0 && epsilon < 1.0, || {
        format!("failure probability must lie in (0, 1), got {epsilon}")
    })
}

fn ceil_count(v: f64) -> Result<u64> {
    ensure(v.is_finite() && v < u64::MAX as f64, || format!("sample size {v} is not representable"))?;
    Ok(v.max(0.0).ceil() as u64)
}

/// Largest admissible additive error for the fixed-signal bound: `(2 sqrt(e) / 5) R`.
pub fn fixed_signal_delta_limit(big_r: f64) -> f64 {
    2.0 * E.sqrt() / 5.0 * big_r
}

/// Unrounded fixed-signal bound `4 pi e^2 (R^4 / r^2) delta^-2 ln(2 / epsilon)`.
pub fn sample_size_fixed_signal_real(r: f64, big_r: f64, delta: f64, epsilon: f64) -> Result<f64> {
    check_annulus(r, big_r)?;
    ensure(delta > 0.0 && delta < fixed_signal_delta_limit(big_r), || {
        format!(
            "delta must lie in (0, 2 sqrt(e) R / 5) = (0, {}), got {delta}",
            fixed_signal_delta_limit(big_r)
        )
    })?;
    check_probability(epsilon)?;
    Ok(four_pi_e2() * big_r.powi(4) / (r * r) / (delta * delta) * (2.0 / epsilon).ln())
}

/// Number of threshold measurements (at `tau = r`) after which
/// `| ||x|| - Lambda | <= delta` with probability at least `1 - epsilon`,
/// for any fixed `x` with `r <= ||x|| <= R`.
pub fn sample_size_fixed_signal(r: f64, big_r: f64, delta: f64, epsilon: f64) -> Result<u64> {
    ceil_count(sample_size_fixed_signal_real(r, big_r, delta, epsilon)?)
}

/// Interval that contains `F(r)` and, with probability `1 - epsilon` once
/// `m >= sample_size_cdf_interval(..)`, also `F_m(r)`:
/// `[ (1 + erf((1 - delta) r / (sqrt 2 R))) / 2, (1 + erf(1)) / 2 ]`.
pub fn cdf_interval(r: f64, big_r: f64, delta: f64) -> Result<(f64, f64)> {
    check_annulus(r, big_r)?;
    ensure(delta > 0.0 && delta < 0.2, || format!("delta must lie in (0, 1/5), got {delta}"))?;
    let lo = 0.5 * (1.0 + erf((1.0 - delta) * r / (SQRT_2 * big_r)));
    Ok((lo, 0.5 * (1.0 + erf(1.0))))
}

/// `pi e (R^2 / r^2) delta^-2 ln(2 / epsilon)` with `0 < delta < 1/5`.
pub fn sample_size_cdf_interval(r: f64, big_r: f64, delta: f64, epsilon: f64) -> Result<u64> {
    check_annulus(r, big_r)?;
    ensure(delta > 0.0 && delta < 0.2, || format!("delta must lie in (0, 1/5), got {delta}"))?;
    check_probability(epsilon)?;
    ceil_count(PI * E * (big_r * big_r) / (r * r) / (delta * delta) * (2.0 / epsilon).ln())
}

/// Threshold used by the uniform (all sparse signals at once) guarantee.
pub fn uniform_threshold(r: f64) -> f64 {
    3.0 * r / 5.0
}

/// Uniform bound `C1 (R^4 / r^2) delta^-2 s ln(n R^2 / (s delta r))`.
///
/// The absolute constant `C1` has no published value; pass 1.0 for the
/// shape of the bound only. The accompanying success probability is
/// `1 - 14 exp(-delta^2 r^2 m / (C1 R^4))`, see [`uniform_failure_probability`].
pub fn sample_size_uniform(r: f64, big_r: f64, delta: f64, n: usize, s: usize, c1: f64) -> Result<u64> {
    check_annulus(r, big_r)?;
    ensure(delta > 0.0 && delta <= big_r, || format!("delta must lie in (0, R], got {delta}"))?;
    ensure(s >= 1 && s <= n, || format!("need 1 <= s <= n, got s = {s}, n = {n}"))?;
    ensure(c1 > 0.0 && c1.is_finite(), || format!("C1 must be positive, got {c1}"))?;
    let log_term = (n as f64 * big_r * big_r / (s as f64 * delta * r)).ln();
    ceil_count(c1 * big_r.powi(4) / (r * r) / (delta * delta) * s as f64 * log_term)
}

/// `14 exp(-delta^2 r^2 m / (C1 R^4))`, clamped to `[0, 1]`.
pub fn uniform_failure_probability(r: f64, big_r: f64, delta: f64, m: usize, c1: f64) -> Result<f64> {
    check_annulus(r, big_r)?;
    ensure(delta > 0.0 && c1 > 0.0, || "delta and C1 must be positive".into())?;
    let p = 14.0 * (-(delta * delta * r * r * m as f64) / (c1 * big_r.powi(4))).exp();
    Ok(p.min(1.0))
}
