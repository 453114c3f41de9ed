//! Convex recovery from one-bit measurements.
//!
//! The sign-constrained l1 program
//!
//! ```text
//! min ||x'||_1  s.t.  sum_i |<a_i, x'>| = m,  sign(<a_i, x'>) = y_i
//! ```
//!
//! becomes a linear program once the sign constraints are written as
//! `y_i <a_i, x'> >= 0`: on the feasible set `|<a_i, x'>| = y_i <a_i, x'>`, so
//! the scaling constraint is the single linear equation
//! `sum_i y_i <a_i, x'> = m`. With `x' = x+ - x-` and `x+, x- >= 0` the
//! objective is `1^T (x+ + x-)`.
//!
//! For dithered measurements `y_i = sign(<a_i, x> + b_i)`, `b_i ~ N(0, tau^2)`,
//! the same program runs on the augmented rows `(a_i, b_i / tau)`, whose
//! target is `(x, tau)`. Its solution `(x#, t#)` gives the magnitude-aware
//! estimate `tau x# / t#`.

use crate::error::{Error, Result};
use crate::lp::{solve_lp, LpProblem, LpStatus, Residuals, SolverOptions};
use crate::measurement::{norm2, MeasurementEnsemble, ShiftKind, SignVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryOptions {
    pub feas_tol: f64,
    pub opt_tol: f64,
    /// Solutions with `t# <= t_tol` (augmented) or `||x#|| <= t_tol`
    /// (direction only) carry no usable estimate.
    pub t_tol: f64,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-8,
            opt_tol: 1e-8,
            t_tol: 1e-6,
        }
    }
}

impl RecoveryOptions {
    fn solver(&self) -> SolverOptions {
        SolverOptions {
            feas_tol: self.feas_tol,
            opt_tol: self.opt_tol,
            max_iterations: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RecoveryStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
    /// Optimal, but `t#` is too small to divide by.
    NormUnresolved,
}

impl RecoveryStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RecoveryStatus::Optimal => "optimal",
            RecoveryStatus::Infeasible => "infeasible",
            RecoveryStatus::NumericalFailure => "numerical_failure",
            RecoveryStatus::NormUnresolved => "norm_unresolved",
        }
    }
}

impl From<LpStatus> for RecoveryStatus {
    fn from(s: LpStatus) -> Self {
        match s {
            LpStatus::Optimal => RecoveryStatus::Optimal,
            LpStatus::Infeasible | LpStatus::InfeasibleOrUnbounded => RecoveryStatus::Infeasible,
            LpStatus::NumericalFailure => RecoveryStatus::NumericalFailure,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub x_sharp: Vec<f64>,
    /// Last coordinate of the augmented solution; `None` for plain recovery.
    pub t_sharp: Option<f64>,
    /// `tau x# / t#` (augmented) or `x# / ||x#||` (direction only).
    pub estimate: Option<Vec<f64>>,
    pub objective_value: f64,
    pub residuals: Residuals,
    pub status: RecoveryStatus,
    pub iterations: usize,
}

fn check_matrix(matrix: &[f64], n: usize, y: &SignVector) -> Result<usize> {
    let m = y.len();
    if m == 0 || n == 0 {
        return Err(Error::InvalidDimension(format!("need m, n >= 1, got m = {m}, n = {n}")));
    }
    if matrix.len() != m * n {
        return Err(Error::DimensionMismatch {
            expected: m * n,
            got: matrix.len(),
        });
    }
    Ok(m)
}

/// Builds the LP for `min ||x'||_1` under the sign and scaling constraints.
/// `matrix` is row-major `m x n` with `m = y.len()`. Variables are
/// `(x+, x-)` (length `2n`); there are `m` inequality rows
/// `y_i <a_i, x+ - x-> >= 0` and one equality row `sum_i y_i <a_i, x+ - x-> = m`.
pub fn formulate_pv(matrix: &[f64], n: usize, y: &SignVector) -> Result<LpProblem> {
    let m = check_matrix(matrix, n, y)?;
    build_pv_lp(m, n, y, |i, j| matrix[i * n + j])
}

/// Builds the augmented LP directly from `(A, b, tau)`. The result is the
/// LP of [`formulate_pv`] on `[A | b / tau]`: variables
/// `(z+, u+, z-, u-)` of length `2(n + 1)`.
pub fn formulate_pv_augmented(matrix: &[f64], n: usize, shifts: &[f64], tau: f64, y: &SignVector) -> Result<LpProblem> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
    }
    let m = check_matrix(matrix, n, y)?;
    if shifts.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: shifts.len(),
        });
    }
    build_pv_lp(m, n + 1, y, |i, j| if j < n { matrix[i * n + j] } else { shifts[i] / tau })
}

/// `[A | b / tau]`, row-major `m x (n + 1)`.
pub fn augmented_matrix(matrix: &[f64], n: usize, shifts: &[f64], tau: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(shifts.len() * (n + 1));
    for (row, b) in matrix.chunks_exact(n).zip(shifts) {
        out.extend_from_slice(row);
        out.push(b / tau);
    }
    out
}

fn build_pv_lp(m: usize, width: usize, y: &SignVector, entry: impl Fn(usize, usize) -> f64) -> Result<LpProblem> {
    let nv = 2 * width;
    let mut ineq = vec![0.0; m * nv];
    let mut sum_row = vec![0.0; width];
    for (i, &yi) in y.bits().iter().enumerate() {
        let s = f64::from(yi);
        let row = &mut ineq[i * nv..(i + 1) * nv];
        for j in 0..width {
            let v = s * entry(i, j);
            row[j] = v;
            row[width + j] = -v;
            sum_row[j] += v;
        }
    }
    let mut eq = Vec::with_capacity(nv);
    eq.extend_from_slice(&sum_row);
    eq.extend(sum_row.iter().map(|v| -v));
    LpProblem::new(vec![1.0; nv], eq, vec![m as f64], ineq, vec![0.0; m])
}

fn split_solution(x: &[f64]) -> Vec<f64> {
    let w = x.len() / 2;
    (0..w).map(|j| x[j] - x[w + j]).collect()
}

/// Solves the augmented program for a dithered ensemble and returns
/// `tau x# / t#`.
pub fn recover_augmented(ensemble: &MeasurementEnsemble, y: &SignVector, opts: &RecoveryOptions) -> Result<RecoveryResult> {
    let ShiftKind::GaussianDither { tau } = ensemble.shift_kind() else {
        return Err(Error::InvalidParameter(
            "augmented recovery needs Gaussian dither shifts".into(),
        ));
    };
    if y.len() != ensemble.m() {
        return Err(Error::DimensionMismatch {
            expected: ensemble.m(),
            got: y.len(),
        });
    }
    let n = ensemble.n();
    let lp = formulate_pv_augmented(ensemble.matrix(), n, ensemble.shifts(), tau, y)?;
    let sol = solve_lp(&lp, &opts.solver());
    let full = split_solution(&sol.x);
    let t_sharp = full[n];
    let x_sharp = full[..n].to_vec();
    let mut status = RecoveryStatus::from(sol.status);
    let mut estimate = None;
    if status == RecoveryStatus::Optimal {
        if t_sharp > opts.t_tol {
            estimate = Some(x_sharp.iter().map(|v| tau * v / t_sharp).collect());
        } else {
            status = RecoveryStatus::NormUnresolved;
        }
    }
    Ok(RecoveryResult {
        x_sharp,
        t_sharp: Some(t_sharp),
        estimate,
        objective_value: sol.objective,
        residuals: sol.residuals,
        status,
        iterations: sol.iterations,
    })
}

/// Solves the plain program on zero-shift measurements and returns the
/// unit-norm direction `x# / ||x#||`.
pub fn recover_direction(ensemble: &MeasurementEnsemble, y: &SignVector, opts: &RecoveryOptions) -> Result<RecoveryResult> {
    if ensemble.shifts().iter().any(|b| *b != 0.0) {
        return Err(Error::InvalidParameter(
            "direction recovery needs zero shifts".into(),
        ));
    }
    if y.len() != ensemble.m() {
        return Err(Error::DimensionMismatch {
            expected: ensemble.m(),
            got: y.len(),
        });
    }
    let lp = formulate_pv(ensemble.matrix(), ensemble.n(), y)?;
    let sol = solve_lp(&lp, &opts.solver());
    let x_sharp = split_solution(&sol.x);
    let status = RecoveryStatus::from(sol.status);
    let mut estimate = None;
    if status == RecoveryStatus::Optimal {
        let norm = norm2(&x_sharp);
        if norm <= opts.t_tol {
            return Err(Error::DegenerateSolution(format!(
                "direction estimate has norm {norm:e}"
            )));
        }
        estimate = Some(x_sharp.iter().map(|v| v / norm).collect());
    }
    Ok(RecoveryResult {
        x_sharp,
        t_sharp: None,
        estimate,
        objective_value: sol.objective,
        residuals: sol.residuals,
        status,
        iterations: sol.iterations,
    })
}

/// Constant in the augmented error bound `||tau x#/t# - x|| <= C(R, tau) * delta`:
/// `4 sqrt(R^2 + tau^2) / tau`, which is `4 sqrt(2)` at `tau = R`.
pub fn augmented_error_constant(big_r: f64, tau: f64) -> f64 {
    4.0 * (big_r * big_r + tau * tau).sqrt() / tau
}
