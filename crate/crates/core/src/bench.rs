//! Monte Carlo sweeps (error versus `m / n` and versus `tau`) with CSV
//! reports, plus the sample-size planner behind `onebit plan`.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::edf::{estimate_norm, sample_size_cdf_interval, sample_size_fixed_signal, sample_size_uniform, NormStatus};
use crate::error::{ensure, Error, Result};
use crate::measurement::{
    generate_sparse_signal, norm2, quantize_streaming, MeasurementEnsemble, ShiftKind, SparseSignal,
};
use crate::pipeline::{combined_recover, plan_split, CombinedStatus, SplitConstants, SplitPlan};
use crate::recovery::{recover_augmented, RecoveryOptions, RecoveryStatus};
use crate::rng::derive_seed;

pub const CSV_HEADER: &str = "method,grid_var,grid_value,trial,seed,norm_error,signal_error,status,wall_ms";
pub const AGG_HEADER: &str =
    "method,grid_var,grid_value,trials,failures,mean_norm_error,std_norm_error,mean_signal_error,std_signal_error";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    PvAug,
    Edf,
    Combined,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::PvAug => "PVaug",
            Method::Edf => "EDF",
            Method::Combined => "Combined",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pvaug" | "pv_aug" | "pv-aug" => Ok(Method::PvAug),
            "edf" => Ok(Method::Edf),
            "combined" => Ok(Method::Combined),
            _ => Err(Error::Parse(format!("unknown method '{s}' (expected pvaug, edf or combined)"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepVar {
    MOverN,
    Tau,
}

impl SweepVar {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepVar::MOverN => "m_over_n",
            SweepVar::Tau => "tau",
        }
    }
}

/// How trial seeds relate across grid points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coupling {
    /// Trial `t` uses the same signal and measurement streams at every grid
    /// point (common random numbers).
    Paired,
    /// Every (grid point, trial) pair gets its own seed.
    Independent,
}

impl FromStr for Coupling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "paired" => Ok(Coupling::Paired),
            "independent" => Ok(Coupling::Independent),
            _ => Err(Error::Parse(format!("unknown coupling '{s}' (expected paired or independent)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub n: usize,
    pub s: usize,
    pub r: f64,
    pub big_r: f64,
    pub method: Method,
    pub sweep: SweepVar,
    /// `m / n` values or `tau` values, depending on `sweep`.
    pub grid: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    /// Threshold for `m / n` sweeps; `None` means `tau = r`.
    pub tau: Option<f64>,
    /// Oversampling used by `tau` sweeps.
    pub m_over_n: f64,
    /// Read `tau` grid values as multiples of each trial's `||x||`.
    pub tau_relative: bool,
    pub coupling: Coupling,
    /// Record wall-clock time per trial. Off by default since timings make
    /// reports differ between otherwise identical runs.
    pub timing: bool,
    pub recovery: RecoveryOptions,
}

/// Default `m / n` grid.
pub const DEFAULT_M_GRID: [f64; 4] = [1.0, 2.0, 4.0, 6.0];
/// Default `tau` grid, as multiples of the middle of the annulus.
pub const DEFAULT_TAU_MULTIPLIERS: [f64; 9] = [0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0];

impl SweepConfig {
    /// `n = 300, s = 10, r = 10, R = 20`, 40 trials.
    pub fn standard(method: Method, sweep: SweepVar) -> Self {
        Self::with_shape(300, 10, 40, method, sweep)
    }

    /// `n = 60, s = 4`, 10 trials.
    pub fn fast(method: Method, sweep: SweepVar) -> Self {
        Self::with_shape(60, 4, 10, method, sweep)
    }

    fn with_shape(n: usize, s: usize, trials: usize, method: Method, sweep: SweepVar) -> Self {
        let (r, big_r) = (10.0, 20.0);
        let mid = 0.5 * (r + big_r);
        let grid = match sweep {
            SweepVar::MOverN => DEFAULT_M_GRID.to_vec(),
            SweepVar::Tau => DEFAULT_TAU_MULTIPLIERS.iter().map(|k| k * mid).collect(),
        };
        Self {
            n,
            s,
            r,
            big_r,
            method,
            sweep,
            grid,
            trials,
            master_seed: 1,
            tau: None,
            m_over_n: 6.0,
            tau_relative: false,
            coupling: Coupling::Paired,
            timing: false,
            recovery: RecoveryOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.n >= 1 && self.s >= 1 && self.s <= self.n, || {
            format!("need 1 <= s <= n, got s = {}, n = {}", self.s, self.n)
        })?;
        ensure(self.r > 0.0 && self.r <= self.big_r && self.big_r.is_finite(), || {
            format!("annulus requires 0 < r <= R, got r = {}, R = {}", self.r, self.big_r)
        })?;
        ensure(!self.grid.is_empty(), || "grid must not be empty".into())?;
        ensure(self.grid.iter().all(|g| *g > 0.0 && g.is_finite()), || {
            "grid values must be positive and finite".into()
        })?;
        ensure(self.trials >= 1, || "trials must be at least 1".into())?;
        if let Some(tau) = self.tau {
            ensure(tau > 0.0 && tau.is_finite(), || format!("tau must be positive, got {tau}"))?;
        }
        ensure(self.m_over_n > 0.0 && self.m_over_n.is_finite(), || "m_over_n must be positive".into())?;
        for (name, v) in [
            ("feas_tol", self.recovery.feas_tol),
            ("opt_tol", self.recovery.opt_tol),
            ("t_tol", self.recovery.t_tol),
        ] {
            ensure(v > 0.0 && v.is_finite(), || format!("{name} must be positive"))?;
        }
        match self.sweep {
            SweepVar::MOverN => self.measurements(self.grid.iter().cloned().fold(f64::INFINITY, f64::min)).map(|_| ()),
            SweepVar::Tau => self.measurements(self.m_over_n).map(|_| ()),
        }
    }

    fn measurements(&self, m_over_n: f64) -> Result<usize> {
        let m = (m_over_n * self.n as f64).round();
        let min = if self.method == Method::Combined { 2.0 } else { 1.0 };
        ensure(m >= min && m < u32::MAX as f64, || {
            format!("m / n = {m_over_n} gives an unusable m = {m} at n = {}", self.n)
        })?;
        Ok(m as usize)
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::Parse(format!("bad value '{v}' for '{key}'")))
        }
        let value = value.trim();
        match key.trim() {
            "n" => self.n = num(key, value)?,
            "s" => self.s = num(key, value)?,
            "r" => self.r = num(key, value)?,
            "R" | "big_r" => self.big_r = num(key, value)?,
            "method" => self.method = value.parse()?,
            "grid" => {
                self.grid = value
                    .split(',')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(|t| num(key, t))
                    .collect::<Result<_>>()?
            }
            "trials" => self.trials = num(key, value)?,
            "seed" | "master_seed" => self.master_seed = num(key, value)?,
            "tau" => self.tau = Some(num(key, value)?),
            "m_over_n" => self.m_over_n = num(key, value)?,
            "tau_relative" => self.tau_relative = num(key, value)?,
            "coupling" => self.coupling = value.parse()?,
            "timing" => self.timing = num(key, value)?,
            "feas_tol" => self.recovery.feas_tol = num(key, value)?,
            "opt_tol" => self.recovery.opt_tol = num(key, value)?,
            "t_tol" => self.recovery.t_tol = num(key, value)?,
            other => return Err(Error::Parse(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Applies a `key = value` file on top of `self`. Blank lines and
    /// `#` comments are skipped.
    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub method: Method,
    pub grid_var: SweepVar,
    pub grid_value: f64,
    pub grid_index: usize,
    pub trial: usize,
    pub seed: u64,
    pub norm_error: Option<f64>,
    pub signal_error: Option<f64>,
    pub status: &'static str,
    pub failed: bool,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub grid_value: f64,
    pub trials: usize,
    pub failures: usize,
    pub mean_norm_error: Option<f64>,
    pub std_norm_error: Option<f64>,
    pub mean_signal_error: Option<f64>,
    pub std_signal_error: Option<f64>,
}

/// Mean and sample standard deviation (`n - 1` denominator; 0 for a
/// single value), summed in slice order.
pub fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0)).sqrt()
    };
    (Some(mean), Some(std))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub method: Method,
    pub grid_var: SweepVar,
    /// Sorted by grid index, then trial.
    pub rows: Vec<TrialRow>,
    pub aggregates: Vec<Aggregate>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

impl SweepReport {
    fn from_rows(method: Method, grid_var: SweepVar, grid: &[f64], mut rows: Vec<TrialRow>) -> Self {
        rows.sort_by_key(|r| (r.grid_index, r.trial));
        let aggregates = grid
            .iter()
            .enumerate()
            .map(|(g, &grid_value)| {
                let at: Vec<&TrialRow> = rows.iter().filter(|r| r.grid_index == g).collect();
                let ok: Vec<&&TrialRow> = at.iter().filter(|r| !r.failed).collect();
                let norms: Vec<f64> = ok.iter().filter_map(|r| r.norm_error).collect();
                let signals: Vec<f64> = ok.iter().filter_map(|r| r.signal_error).collect();
                let (mean_norm_error, std_norm_error) = mean_std(&norms);
                let (mean_signal_error, std_signal_error) = mean_std(&signals);
                Aggregate {
                    grid_value,
                    trials: at.len(),
                    failures: at.len() - ok.len(),
                    mean_norm_error,
                    std_norm_error,
                    mean_signal_error,
                    std_signal_error,
                }
            })
            .collect();
        Self {
            method,
            grid_var,
            rows,
            aggregates,
        }
    }

    /// Per-trial rows. Missing errors are empty fields.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{:?},{},{},{},{},{},{:?}",
                r.method,
                r.grid_var.as_str(),
                r.grid_value,
                r.trial,
                r.seed,
                fmt_opt(r.norm_error),
                fmt_opt(r.signal_error),
                r.status,
                r.wall_ms
            )?;
        }
        Ok(())
    }

    /// Per-grid-point aggregates. Means and deviations are over trials
    /// whose status is not a failure.
    pub fn write_agg_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{AGG_HEADER}")?;
        for a in &self.aggregates {
            writeln!(
                w,
                "{},{},{:?},{},{},{},{},{},{}",
                self.method,
                self.grid_var.as_str(),
                a.grid_value,
                a.trials,
                a.failures,
                fmt_opt(a.mean_norm_error),
                fmt_opt(a.std_norm_error),
                fmt_opt(a.mean_signal_error),
                fmt_opt(a.std_signal_error)
            )?;
        }
        Ok(())
    }

    /// Writes `path` and its `.agg.csv` companion; returns the latter's path.
    pub fn write_files(&self, path: &Path) -> Result<PathBuf> {
        let agg = agg_path(path);
        let mut w = BufWriter::new(File::create(path)?);
        self.write_csv(&mut w)?;
        w.flush()?;
        let mut w = BufWriter::new(File::create(&agg)?);
        self.write_agg_csv(&mut w)?;
        w.flush()?;
        Ok(agg)
    }
}

/// `out.csv` becomes `out.agg.csv`; other names get `.agg.csv` appended.
pub fn agg_path(path: &Path) -> PathBuf {
    let s = path.to_string_lossy();
    match s.strip_suffix(".csv") {
        Some(stem) => PathBuf::from(format!("{stem}.agg.csv")),
        None => PathBuf::from(format!("{s}.agg.csv")),
    }
}

struct Outcome {
    norm_error: Option<f64>,
    signal_error: Option<f64>,
    status: &'static str,
    failed: bool,
}

fn errors_of(estimate: Option<&[f64]>, x: &SparseSignal) -> (Option<f64>, Option<f64>) {
    match estimate {
        Some(e) => {
            let sig = e.iter().zip(&x.values).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            (Some((norm2(e) - x.norm()).abs()), Some(sig))
        }
        None => (None, None),
    }
}

fn run_trial(cfg: &SweepConfig, m: usize, tau: f64, x: &SparseSignal, seed: u64) -> Result<Outcome> {
    let n = cfg.n;
    match cfg.method {
        Method::PvAug => {
            let ens = MeasurementEnsemble::build(m, n, ShiftKind::GaussianDither { tau }, seed)?;
            let y = ens.quantize(&x.values)?;
            let res = recover_augmented(&ens, &y, &cfg.recovery)?;
            let (norm_error, signal_error) = errors_of(res.estimate.as_deref(), x);
            Ok(Outcome {
                norm_error,
                signal_error,
                status: res.status.as_str(),
                failed: res.status != RecoveryStatus::Optimal,
            })
        }
        Method::Edf => {
            let y = quantize_streaming(m, n, ShiftKind::ConstantThreshold { tau }, seed, &x.values)?;
            let est = estimate_norm(&y, tau)?;
            Ok(Outcome {
                norm_error: est.lambda.map(|l| (l - x.norm()).abs()),
                signal_error: None,
                status: est.status.as_str(),
                failed: est.status == NormStatus::BelowHalf,
            })
        }
        Method::Combined => {
            let res = combined_recover(x, SplitPlan::even(m)?, tau, seed, &cfg.recovery)?;
            let (_, signal_error) = errors_of(res.estimate.as_deref(), x);
            let failed = !matches!(res.status, CombinedStatus::Ok | CombinedStatus::NormSaturated);
            Ok(Outcome {
                norm_error: if failed { None } else { res.norm.lambda.map(|l| (l - x.norm()).abs()) },
                signal_error: if failed { None } else { signal_error },
                status: res.status.as_str(),
                failed,
            })
        }
    }
}

/// Seed of trial `trial` at grid point `grid_index`.
pub fn trial_seed(cfg: &SweepConfig, grid_index: usize, trial: usize) -> u64 {
    match cfg.coupling {
        Coupling::Paired => derive_seed(cfg.master_seed, &[trial as u64]),
        Coupling::Independent => derive_seed(cfg.master_seed, &[grid_index as u64, trial as u64]),
    }
}

/// Signal of a trial. It depends on the trial seed only.
pub fn trial_signal(cfg: &SweepConfig, seed: u64) -> Result<SparseSignal> {
    generate_sparse_signal(cfg.n, cfg.s, cfg.r, cfg.big_r, derive_seed(seed, &[0]))
}

fn run(cfg: &SweepConfig, sweep: SweepVar) -> Result<SweepReport> {
    let mut cfg = cfg.clone();
    cfg.sweep = sweep;
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = (0..cfg.grid.len())
        .flat_map(|g| (0..cfg.trials).map(move |t| (g, t)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(g, t)| -> Result<TrialRow> {
            let start = Instant::now();
            let seed = trial_seed(&cfg, g, t);
            let x = trial_signal(&cfg, seed)?;
            let value = cfg.grid[g];
            let (m, tau) = match sweep {
                SweepVar::MOverN => (cfg.measurements(value)?, cfg.tau.unwrap_or(cfg.r)),
                SweepVar::Tau => {
                    let tau = if cfg.tau_relative { value * x.norm() } else { value };
                    (cfg.measurements(cfg.m_over_n)?, tau)
                }
            };
            let out = run_trial(&cfg, m, tau, &x, derive_seed(seed, &[1]))?;
            let wall_ms = if cfg.timing {
                (start.elapsed().as_secs_f64() * 1e6).round() / 1e3
            } else {
                0.0
            };
            Ok(TrialRow {
                method: cfg.method,
                grid_var: sweep,
                grid_value: value,
                grid_index: g,
                trial: t,
                seed,
                norm_error: out.norm_error,
                signal_error: out.signal_error,
                status: out.status,
                failed: out.failed,
                wall_ms,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport::from_rows(cfg.method, sweep, &cfg.grid, rows))
}

/// Error versus `m / n` at fixed `tau` (default `r`).
pub fn run_m_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    run(cfg, SweepVar::MOverN)
}

/// Error versus `tau` at fixed `m / n`. `PVaug` draws shifts from
/// `N(0, tau^2)`, `EDF` uses the constant threshold `tau`.
pub fn run_tau_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    run(cfg, SweepVar::Tau)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlanMethod {
    /// Norm of one fixed signal, threshold `tau = r`.
    EdfFixed,
    /// `F_m(r)` inside its guaranteed interval.
    CdfInterval,
    /// Norms of all `s`-sparse signals at once, threshold `3r/5`.
    EdfUniform,
    /// Augmented program with Gaussian dither.
    PvAug,
    /// Split estimator; reports `m1` and `m2`.
    Combined,
}

impl FromStr for PlanMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "edf" | "edf-fixed" | "fixed" => Ok(PlanMethod::EdfFixed),
            "cdf-interval" | "interval" => Ok(PlanMethod::CdfInterval),
            "edf-uniform" | "uniform" => Ok(PlanMethod::EdfUniform),
            "pvaug" | "pv-aug" => Ok(PlanMethod::PvAug),
            "combined" => Ok(PlanMethod::Combined),
            _ => Err(Error::Parse(format!(
                "unknown plan method '{s}' (expected edf-fixed, cdf-interval, edf-uniform, pvaug or combined)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanGoal {
    pub method: PlanMethod,
    pub delta: f64,
    pub epsilon: f64,
    pub r: f64,
    pub big_r: f64,
    pub n: usize,
    pub s: usize,
    /// Dither scale for `PvAug`; `None` means `tau = R`.
    pub tau: Option<f64>,
    /// Leading constant (`C1`, `C` or `C0`); 1 unless known.
    pub c: f64,
    /// Constant inside `ln(C / epsilon)` of the split rule.
    pub c_log: f64,
}

impl PlanGoal {
    pub fn new(method: PlanMethod) -> Self {
        Self {
            method,
            delta: 1.0,
            epsilon: 0.05,
            r: 10.0,
            big_r: 20.0,
            n: 300,
            s: 10,
            tau: None,
            c: 1.0,
            c_log: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutput {
    pub counts: Vec<(&'static str, u64)>,
    pub formula: String,
}

impl fmt::Display for PlanOutput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "formula: {}", self.formula)?;
        for (name, v) in &self.counts {
            writeln!(f, "{name} = {v}")?;
        }
        Ok(())
    }
}

/// Sample sizes from the closed-form bounds. Hypotheses of each bound are
/// checked and named in the error.
pub fn plan_sample_size(goal: &PlanGoal) -> Result<PlanOutput> {
    let PlanGoal {
        delta,
        epsilon,
        r,
        big_r,
        n,
        s,
        c,
        ..
    } = *goal;
    ensure(c > 0.0 && c.is_finite(), || format!("constant must be positive, got {c}"))?;
    let out = match goal.method {
        PlanMethod::EdfFixed => PlanOutput {
            counts: vec![("m", sample_size_fixed_signal(r, big_r, delta, epsilon)?)],
            formula: format!("m >= 4 pi e^2 R^4 / r^2 * delta^-2 * ln(2/eps)  (r={r}, R={big_r}, delta={delta}, eps={epsilon}, tau=r)"),
        },
        PlanMethod::CdfInterval => PlanOutput {
            counts: vec![("m", sample_size_cdf_interval(r, big_r, delta, epsilon)?)],
            formula: format!("m >= pi e R^2 / r^2 * delta^-2 * ln(2/eps)  (r={r}, R={big_r}, delta={delta}, eps={epsilon})"),
        },
        PlanMethod::EdfUniform => PlanOutput {
            counts: vec![("m", sample_size_uniform(r, big_r, delta, n, s, c)?)],
            formula: format!(
                "m >= C1 R^4 / r^2 * delta^-2 * s * ln(n R^2 / (s delta r))  (C1={c}, r={r}, R={big_r}, delta={delta}, n={n}, s={s}, tau=3r/5)"
            ),
        },
        PlanMethod::PvAug => {
            let tau = goal.tau.unwrap_or(big_r);
            ensure(tau > 0.0 && tau.is_finite(), || format!("tau must be positive, got {tau}"))?;
            ensure(big_r > 0.0 && big_r.is_finite(), || format!("R must be positive, got {big_r}"))?;
            ensure(delta > 0.0 && delta < 1.0f64.min(tau / 2.0), || {
                format!("hypothesis 0 < delta < min(1, tau/2) violated: delta = {delta}, tau = {tau}")
            })?;
            ensure(s >= 1 && s <= n, || format!("need 1 <= s <= n, got s = {s}, n = {n}"))?;
            let l = (2.0 * n as f64 / s as f64).ln();
            let v = c * ((big_r * big_r + tau * tau).sqrt() / delta).powi(5) * s as f64 * l * l;
            ensure(v.is_finite() && v < u64::MAX as f64, || format!("sample size {v} is not representable"))?;
            PlanOutput {
                counts: vec![("m", v.ceil() as u64)],
                formula: format!(
                    "m >= C (sqrt(R^2 + tau^2) / delta)^5 * s * ln^2(2n/s)  (C={c}, R={big_r}, tau={tau}, delta={delta}, n={n}, s={s})"
                ),
            }
        }
        PlanMethod::Combined => {
            let p = plan_split(r, big_r, delta, epsilon, n, s, SplitConstants { c0: c, c_log: goal.c_log })?;
            PlanOutput {
                counts: vec![("m1", p.m1 as u64), ("m2", p.m2 as u64), ("m", p.total() as u64)],
                formula: format!(
                    "m1 >= 4 pi e^2 R^4 / r^2 * delta^-2 * ln(4/eps); m2 >= C0 delta^-5 R^5 (s ln^2(n/s) + ln(C/eps))  (C0={c}, C={}, r={r}, R={big_r}, delta={delta}, eps={epsilon}, n={n}, s={s})",
                    goal.c_log
                ),
            }
        }
    };
    Ok(out)
}
