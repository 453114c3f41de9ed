//! Split-measurement estimator: the norm comes from `m1` constant-threshold
//! bits through the empirical CDF, the direction from `m2` zero-shift bits
//! through the l1 program, and the two are multiplied.

use crate::edf::{estimate_norm, fixed_signal_delta_limit, NormEstimate, NormStatus};
use crate::error::{ensure, Error, Result};
use crate::measurement::{quantize_streaming, MeasurementEnsemble, ShiftKind, SparseSignal};
use crate::recovery::{recover_direction, RecoveryOptions, RecoveryResult, RecoveryStatus};
use crate::rng::derive_seed;
use crate::special::four_pi_e2;

/// Measurement budget split: `m1` threshold bits for the norm, `m2`
/// zero-shift bits for the direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitPlan {
    pub m1: usize,
    pub m2: usize,
}

impl SplitPlan {
    pub fn new(m1: usize, m2: usize) -> Result<Self> {
        if m1 == 0 || m2 == 0 {
            return Err(Error::InvalidDimension(format!(
                "both batches need at least one measurement, got m1 = {m1}, m2 = {m2}"
            )));
        }
        Ok(Self { m1, m2 })
    }

    /// Halves a fixed total budget (`m1 = total / 2`, `m2` gets the rest).
    pub fn even(total: usize) -> Result<Self> {
        Self::new(total / 2, total - total / 2)
    }

    pub fn total(&self) -> usize {
        self.m1 + self.m2
    }
}

/// Constants of the split sample-size rule that have no published value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitConstants {
    /// Multiplies the direction term.
    pub c0: f64,
    /// Appears as `ln(c_log / epsilon)` in the direction term.
    pub c_log: f64,
}

impl Default for SplitConstants {
    fn default() -> Self {
        Self { c0: 1.0, c_log: 1.0 }
    }
}

/// Plans `(m1, m2)` for `||Lambda x# - x|| <= delta` with probability
/// `1 - epsilon`:
///
/// * `m1 = 4 pi e^2 (R^4 / r^2) delta^-2 ln(4 / epsilon)` (norm batch),
/// * `m2 = C0 delta^-5 R^5 (s ln^2(n / s) + ln(C / epsilon))` (direction batch).
pub fn plan_split(
    r: f64,
    big_r: f64,
    delta: f64,
    epsilon: f64,
    n: usize,
    s: usize,
    constants: SplitConstants,
) -> Result<SplitPlan> {
    ensure(r > 0.0 && r <= big_r && big_r.is_finite(), || {
        format!("annulus requires 0 < r <= R, got r = {r}, R = {big_r}")
    })?;
    ensure(delta > 0.0 && delta < fixed_signal_delta_limit(big_r), || {
        format!("delta must lie in (0, 2 sqrt(e) R / 5), got {delta}")
    })?;
    ensure(epsilon > 0.0 && epsilon < 1.0, || format!("epsilon must lie in (0, 1), got {epsilon}"))?;
    ensure(s >= 1 && s <= n, || format!("need 1 <= s <= n, got s = {s}, n = {n}"))?;
    ensure(constants.c0 > 0.0 && constants.c_log > 0.0, || "constants must be positive".into())?;
    let m1 = four_pi_e2() * big_r.powi(4) / (r * r) / (delta * delta) * (4.0 / epsilon).ln();
    let log_ns = (n as f64 / s as f64).ln();
    let m2 = constants.c0 * (big_r / delta).powi(5) * (s as f64 * log_ns * log_ns + (constants.c_log / epsilon).ln().max(0.0));
    let to_count = |v: f64| -> Result<usize> {
        ensure(v.is_finite() && v < usize::MAX as f64, || format!("sample size {v} is not representable"))?;
        Ok((v.ceil() as usize).max(1))
    };
    SplitPlan::new(to_count(m1)?, to_count(m2)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CombinedStatus {
    Ok,
    NormBelowHalf,
    /// All threshold bits were `-1`; the estimate is the zero vector.
    NormSaturated,
    Direction(RecoveryStatus),
    DirectionDegenerate,
}

impl CombinedStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CombinedStatus::Ok => "ok",
            CombinedStatus::NormBelowHalf => "below_half",
            CombinedStatus::NormSaturated => "saturated",
            CombinedStatus::Direction(s) => s.as_str(),
            CombinedStatus::DirectionDegenerate => "degenerate_direction",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombinedRecovery {
    pub norm: NormEstimate,
    /// `None` when the direction program returned a degenerate solution.
    pub direction: Option<RecoveryResult>,
    /// `Lambda * x#` with `x#` the unit direction estimate.
    pub estimate: Option<Vec<f64>>,
    pub status: CombinedStatus,
}

impl CombinedRecovery {
    pub fn unit_direction(&self) -> Option<&[f64]> {
        self.direction.as_ref()?.estimate.as_deref()
    }
}

/// Seeds of the two batches. They are derived from `seed` with different
/// paths, so the batches use unrelated substreams.
pub fn batch_seeds(seed: u64) -> (u64, u64) {
    (derive_seed(seed, &[1]), derive_seed(seed, &[2]))
}

/// Simulates both measurement batches for `x` and runs the split estimator.
pub fn combined_recover(
    x: &SparseSignal,
    plan: SplitPlan,
    tau: f64,
    seed: u64,
    opts: &RecoveryOptions,
) -> Result<CombinedRecovery> {
    ensure(tau > 0.0 && tau.is_finite(), || format!("tau must be positive, got {tau}"))?;
    let n = x.len();
    let (norm_seed, dir_seed) = batch_seeds(seed);

    let y_norm = quantize_streaming(plan.m1, n, ShiftKind::ConstantThreshold { tau }, norm_seed, &x.values)?;
    let norm = estimate_norm(&y_norm, tau)?;

    let ensemble = MeasurementEnsemble::build(plan.m2, n, ShiftKind::Zero, dir_seed)?;
    let y_dir = ensemble.quantize(&x.values)?;
    let direction = match recover_direction(&ensemble, &y_dir, opts) {
        Ok(d) => Some(d),
        Err(Error::DegenerateSolution(_)) => None,
        Err(e) => return Err(e),
    };

    let unit = direction.as_ref().and_then(|d| d.estimate.as_ref());
    let estimate = match (norm.lambda, unit) {
        (Some(lambda), Some(u)) => Some(u.iter().map(|v| lambda * v).collect()),
        _ => None,
    };
    let status = match (&direction, norm.status) {
        (None, _) => CombinedStatus::DirectionDegenerate,
        (Some(d), _) if d.status != RecoveryStatus::Optimal => CombinedStatus::Direction(d.status),
        (_, NormStatus::BelowHalf) => CombinedStatus::NormBelowHalf,
        (_, NormStatus::Saturated) => CombinedStatus::NormSaturated,
        (_, NormStatus::Ok) => CombinedStatus::Ok,
    };
    Ok(CombinedRecovery {
        norm,
        direction,
        estimate,
        status,
    })
}

/// Right-hand side of the per-trial error decomposition
/// `||Lambda x# - x|| <= |Lambda - ||x||| + ||x|| * ||x# - x / ||x||||`.
pub fn decomposition_bound(lambda: f64, unit_direction: &[f64], x: &[f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let angular = unit_direction
        .iter()
        .zip(x)
        .map(|(u, v)| (u - v / norm).powi(2))
        .sum::<f64>()
        .sqrt();
    (lambda - norm).abs() + norm * angular
}

/// Error budget of the split estimator: with norm error `<= delta / 2` and
/// direction error `<= delta / (2R)`, the total is `<= delta / 2 + ||x|| delta / (2R)`.
pub fn split_error_budget(delta: f64, norm: f64, big_r: f64) -> f64 {
    delta / 2.0 + norm * delta / (2.0 * big_r)
}
