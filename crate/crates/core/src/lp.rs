//! Linear programs in the canonical form
//!
//! ```text
//! minimize    c^T x
//! subject to  E x  = f
//!             G x >= h
//!             x   >= 0
//! ```
//!
//! and a dense simplex solver for them.
//!
//! The solver works on the dual
//!
//! ```text
//! maximize    f^T mu + h^T lambda
//! subject to  E^T mu + G^T lambda <= c,   lambda >= 0,  mu free
//! ```
//!
//! whose tableau has one row per primal variable. The recovery programs have
//! many more constraints than variables and a nonnegative cost vector, so
//! the dual tableau is several times smaller than the primal one and starts
//! from a feasible slack basis. Rows with `c_j < 0` get artificial variables
//! and a phase-one pass. The primal solution is read off the final reduced
//! costs of the slack columns and then recomputed from the optimal basis by
//! an LU solve to remove accumulated pivoting error.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    num_vars: usize,
    objective: Vec<f64>,
    eq_matrix: Vec<f64>,
    eq_rhs: Vec<f64>,
    ineq_matrix: Vec<f64>,
    ineq_rhs: Vec<f64>,
}

impl LpProblem {
    /// Builds a problem from row-major constraint blocks.
    /// `eq_matrix` is `eq_rhs.len() x objective.len()`, likewise for `ineq`.
    pub fn new(
        objective: Vec<f64>,
        eq_matrix: Vec<f64>,
        eq_rhs: Vec<f64>,
        ineq_matrix: Vec<f64>,
        ineq_rhs: Vec<f64>,
    ) -> Result<Self> {
        let num_vars = objective.len();
        if num_vars == 0 {
            return Err(Error::InvalidDimension("LP needs at least one variable".into()));
        }
        if eq_matrix.len() != eq_rhs.len() * num_vars {
            return Err(Error::DimensionMismatch {
                expected: eq_rhs.len() * num_vars,
                got: eq_matrix.len(),
            });
        }
        if ineq_matrix.len() != ineq_rhs.len() * num_vars {
            return Err(Error::DimensionMismatch {
                expected: ineq_rhs.len() * num_vars,
                got: ineq_matrix.len(),
            });
        }
        let all = objective
            .iter()
            .chain(&eq_matrix)
            .chain(&eq_rhs)
            .chain(&ineq_matrix)
            .chain(&ineq_rhs);
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("LP data must be finite".into()));
        }
        Ok(Self {
            num_vars,
            objective,
            eq_matrix,
            eq_rhs,
            ineq_matrix,
            ineq_rhs,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_eq(&self) -> usize {
        self.eq_rhs.len()
    }

    pub fn num_ineq(&self) -> usize {
        self.ineq_rhs.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn eq_row(&self, i: usize) -> &[f64] {
        &self.eq_matrix[i * self.num_vars..(i + 1) * self.num_vars]
    }

    pub fn ineq_row(&self, i: usize) -> &[f64] {
        &self.ineq_matrix[i * self.num_vars..(i + 1) * self.num_vars]
    }

    pub fn eq_rhs(&self) -> &[f64] {
        &self.eq_rhs
    }

    pub fn ineq_rhs(&self) -> &[f64] {
        &self.ineq_rhs
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }

    /// Largest relative constraint violations of `x` (equality, inequality
    /// including `x >= 0`). A row's violation is divided by
    /// `1 + |rhs| + sum_j |a_j x_j|`, the magnitude of the terms involved.
    pub fn residuals(&self, x: &[f64]) -> Residuals {
        let scale = |row: &[f64], rhs: f64| 1.0 + rhs.abs() + row.iter().zip(x).map(|(a, v)| (a * v).abs()).sum::<f64>();
        let equality = (0..self.num_eq())
            .map(|i| {
                let row = self.eq_row(i);
                (dot(row, x) - self.eq_rhs[i]).abs() / scale(row, self.eq_rhs[i])
            })
            .fold(0.0, f64::max);
        let rows = (0..self.num_ineq())
            .map(|i| {
                let row = self.ineq_row(i);
                (self.ineq_rhs[i] - dot(row, x)).max(0.0) / scale(row, self.ineq_rhs[i])
            })
            .fold(0.0, f64::max);
        let bounds = x.iter().map(|v| (-v).max(0.0)).fold(0.0, f64::max);
        Residuals {
            equality,
            inequality: rows.max(bounds),
        }
    }

    /// Plain-text export:
    ///
    /// ```text
    /// # onebit-lp v1
    /// vars <n>
    /// min <c_1> ... <c_n>
    /// eq <a_1> ... <a_n> = <rhs>
    /// ge <g_1> ... <g_n> >= <rhs>
    /// ```
    ///
    /// All variables are implicitly nonnegative. Numbers use shortest
    /// round-trip formatting.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        let mut s = String::new();
        writeln!(s, "# onebit-lp v1").unwrap();
        writeln!(s, "vars {}", self.num_vars).unwrap();
        s.push_str("min");
        push_row(&mut s, &self.objective);
        s.push('\n');
        for i in 0..self.num_eq() {
            s.push_str("eq");
            push_row(&mut s, self.eq_row(i));
            writeln!(s, " = {:?}", self.eq_rhs[i]).unwrap();
        }
        for i in 0..self.num_ineq() {
            s.push_str("ge");
            push_row(&mut s, self.ineq_row(i));
            writeln!(s, " >= {:?}", self.ineq_rhs[i]).unwrap();
        }
        w.write_all(s.as_bytes())?;
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut num_vars = None;
        let mut objective = None;
        let (mut eq_matrix, mut eq_rhs, mut ineq_matrix, mut ineq_rhs) = (vec![], vec![], vec![], vec![]);
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| Error::Parse(format!("line {}: {msg}", lineno + 1));
            let mut toks = line.split_whitespace();
            let head = toks.next().unwrap_or_default();
            let rest: Vec<&str> = toks.collect();
            match head {
                "vars" => {
                    let v = rest.first().ok_or_else(|| err("missing variable count"))?;
                    num_vars = Some(v.parse::<usize>().map_err(|_| err("bad variable count"))?);
                }
                "min" => objective = Some(parse_floats(&rest).map_err(|_| err("bad objective"))?),
                "eq" | "ge" => {
                    let op = if head == "eq" { "=" } else { ">=" };
                    if rest.len() < 2 || rest[rest.len() - 2] != op {
                        return Err(err(&format!("expected '{op} <rhs>' at end of row")));
                    }
                    let coeffs = parse_floats(&rest[..rest.len() - 2]).map_err(|_| err("bad coefficient"))?;
                    let rhs: f64 = rest[rest.len() - 1].parse().map_err(|_| err("bad rhs"))?;
                    if Some(coeffs.len()) != num_vars {
                        return Err(err("row length differs from 'vars'"));
                    }
                    if head == "eq" {
                        eq_matrix.extend(coeffs);
                        eq_rhs.push(rhs);
                    } else {
                        ineq_matrix.extend(coeffs);
                        ineq_rhs.push(rhs);
                    }
                }
                other => return Err(err(&format!("unknown record {other:?}"))),
            }
        }
        let objective = objective.ok_or_else(|| Error::Parse("missing 'min' row".into()))?;
        if Some(objective.len()) != num_vars {
            return Err(Error::Parse("objective length differs from 'vars'".into()));
        }
        Self::new(objective, eq_matrix, eq_rhs, ineq_matrix, ineq_rhs)
    }
}

fn push_row(s: &mut String, row: &[f64]) {
    for v in row {
        write!(s, " {v:?}").unwrap();
    }
}

fn parse_floats(toks: &[&str]) -> std::result::Result<Vec<f64>, std::num::ParseFloatError> {
    toks.iter().map(|t| t.parse()).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Residuals {
    pub equality: f64,
    pub inequality: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.equality.max(self.inequality)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    /// The dual is infeasible: the primal is unbounded or infeasible.
    InfeasibleOrUnbounded,
    NumericalFailure,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub feas_tol: f64,
    pub opt_tol: f64,
    pub max_iterations: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-8,
            opt_tol: 1e-8,
            max_iterations: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Dual objective at the final basis; `objective - dual_objective` is the
    /// duality gap certifying optimality.
    pub dual_objective: f64,
    pub residuals: Residuals,
    pub status: LpStatus,
    pub iterations: usize,
}

impl LpSolution {
    fn failed(p: &LpProblem, status: LpStatus, iterations: usize) -> Self {
        Self {
            x: vec![0.0; p.num_vars],
            objective: f64::NAN,
            dual_objective: f64::NAN,
            residuals: Residuals {
                equality: f64::INFINITY,
                inequality: f64::INFINITY,
            },
            status,
            iterations,
        }
    }

    pub fn duality_gap(&self) -> f64 {
        (self.objective - self.dual_objective).abs()
    }
}

const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_STREAK: usize = 64;

/// Dense simplex tableau for `max d^T w  s.t.  rows . w (+ slack) = rhs, w >= 0`
/// with the objective row kept as reduced costs.
struct Tableau {
    rows: usize,
    cols: usize,
    /// `rows x cols`, row-major.
    a: Vec<f64>,
    rhs: Vec<f64>,
    /// Reduced costs `d_j - d_B^T B^-1 A_j`; the current objective is `-obj`.
    reduced: Vec<f64>,
    obj: f64,
    basis: Vec<usize>,
    iterations: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
    IterationLimit,
}

impl Tableau {
    fn row(&self, r: usize) -> &[f64] {
        &self.a[r * self.cols..(r + 1) * self.cols]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let cols = self.cols;
        let inv = 1.0 / self.a[pr * cols + pc];
        {
            let prow = &mut self.a[pr * cols..(pr + 1) * cols];
            prow.iter_mut().for_each(|v| *v *= inv);
            prow[pc] = 1.0;
        }
        self.rhs[pr] *= inv;
        let (before, rest) = self.a.split_at_mut(pr * cols);
        let (prow, after) = rest.split_at_mut(cols);
        let prow: &[f64] = prow;
        let prhs = self.rhs[pr];
        let mut eliminate = |r: usize, row: &mut [f64]| {
            let factor = row[pc];
            if factor != 0.0 {
                row.iter_mut().zip(prow).for_each(|(v, p)| *v -= factor * p);
                row[pc] = 0.0;
                self.rhs[r] -= factor * prhs;
            }
        };
        for (r, row) in before.chunks_exact_mut(cols).enumerate() {
            eliminate(r, row);
        }
        for (k, row) in after.chunks_exact_mut(cols).enumerate() {
            eliminate(pr + 1 + k, row);
        }
        let factor = self.reduced[pc];
        if factor != 0.0 {
            self.reduced.iter_mut().zip(prow).for_each(|(v, p)| *v -= factor * p);
            self.reduced[pc] = 0.0;
            self.obj -= factor * prhs;
        }
        self.basis[pr] = pc;
        self.iterations += 1;
    }

    /// Runs primal simplex iterations over columns `allowed(j)`.
    fn optimize(&mut self, allowed: impl Fn(usize) -> bool, cost_tol: f64, max_iter: usize) -> Outcome {
        let mut degenerate = 0usize;
        loop {
            if self.iterations >= max_iter {
                return Outcome::IterationLimit;
            }
            let bland = degenerate >= DEGENERATE_STREAK;
            let mut entering = None;
            let mut best = cost_tol;
            for (j, &rc) in self.reduced.iter().enumerate() {
                if rc > cost_tol && allowed(j) {
                    if bland {
                        entering = Some(j);
                        break;
                    }
                    if rc > best {
                        best = rc;
                        entering = Some(j);
                    }
                }
            }
            let Some(pc) = entering else {
                return Outcome::Optimal;
            };

            // Ratio test; among near-ties prefer the largest pivot, or the
            // smallest basic index under Bland's rule.
            let mut leave: Option<(usize, f64, f64)> = None;
            for r in 0..self.rows {
                let v = self.a[r * self.cols + pc];
                if v <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs[r].max(0.0) / v;
                leave = match leave {
                    None => Some((r, ratio, v)),
                    Some((lr, lratio, lv)) => {
                        let tie = (ratio - lratio).abs() <= 1e-12 * (1.0 + lratio.abs());
                        let better = if tie {
                            if bland {
                                self.basis[r] < self.basis[lr]
                            } else {
                                v > lv
                            }
                        } else {
                            ratio < lratio
                        };
                        if better {
                            Some((r, ratio, v))
                        } else {
                            Some((lr, lratio, lv))
                        }
                    }
                };
            }
            let Some((pr, ratio, _)) = leave else {
                return Outcome::Unbounded;
            };
            if ratio <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(pr, pc);
        }
    }
}

/// Solves `p` to optimality.
///
/// `Optimal` is reported only when the recovered point satisfies every
/// constraint to `feas_tol` (relative, see [`LpProblem::residuals`]) and the
/// primal-dual gap is within `opt_tol * (1 + |objective|)`.
pub fn solve_lp(p: &LpProblem, opts: &SolverOptions) -> LpSolution {
    let nv = p.num_vars;
    let k = p.num_eq();
    let q = 2 * k + p.num_ineq();
    let rows = nv;

    // Dual column data: column t of H (length nv) and its objective d_t.
    let dual_col = |t: usize, j: usize| -> f64 {
        if t < k {
            p.eq_matrix[t * nv + j]
        } else if t < 2 * k {
            -p.eq_matrix[(t - k) * nv + j]
        } else {
            p.ineq_matrix[(t - 2 * k) * nv + j]
        }
    };
    let dual_obj: Vec<f64> = p
        .eq_rhs
        .iter()
        .copied()
        .chain(p.eq_rhs.iter().map(|v| -v))
        .chain(p.ineq_rhs.iter().copied())
        .collect();

    // Columns: [w (q) | slacks (rows) | artificials (one per row with c_j < 0)].
    let flipped: Vec<usize> = (0..rows).filter(|&j| p.objective[j] < 0.0).collect();
    let art_start = q + rows;
    let cols = art_start + flipped.len();
    let mut a = vec![0.0; rows * cols];
    let mut rhs = vec![0.0; rows];
    let mut basis = vec![0; rows];
    let mut art_of_row = vec![usize::MAX; rows];
    for (idx, &j) in flipped.iter().enumerate() {
        art_of_row[j] = art_start + idx;
    }
    for j in 0..rows {
        let sign = if p.objective[j] < 0.0 { -1.0 } else { 1.0 };
        let row = &mut a[j * cols..(j + 1) * cols];
        for (t, v) in row[..q].iter_mut().enumerate() {
            *v = sign * dual_col(t, j);
        }
        row[q + j] = sign;
        rhs[j] = sign * p.objective[j];
        if art_of_row[j] != usize::MAX {
            row[art_of_row[j]] = 1.0;
            basis[j] = art_of_row[j];
        } else {
            basis[j] = q + j;
        }
    }

    let scale = 1.0 + dual_obj.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cost_tol = 1e-11 * scale;
    let max_iter = opts.max_iterations.unwrap_or(50 * (rows + cols) + 1000);

    let mut t = Tableau {
        rows,
        cols,
        a,
        rhs,
        reduced: vec![0.0; cols],
        obj: 0.0,
        basis,
        iterations: 0,
    };

    if !flipped.is_empty() {
        // Phase one: maximize -(sum of artificials).
        t.reduced.iter_mut().for_each(|v| *v = 0.0);
        for &j in &flipped {
            for (c, v) in t.reduced.iter_mut().enumerate() {
                *v += t.a[j * cols + c];
            }
            t.obj += t.rhs[j];
        }
        for &j in &flipped {
            t.reduced[art_of_row[j]] = 0.0;
        }
        match t.optimize(|_| true, 1e-11, max_iter) {
            Outcome::IterationLimit => return LpSolution::failed(p, LpStatus::NumericalFailure, t.iterations),
            Outcome::Unbounded => return LpSolution::failed(p, LpStatus::NumericalFailure, t.iterations),
            Outcome::Optimal => {}
        }
        let infeasibility: f64 = (0..rows).filter(|&r| t.basis[r] >= art_start).map(|r| t.rhs[r]).sum();
        let rhs_scale = 1.0 + p.objective.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if infeasibility > 1e-9 * rhs_scale {
            return LpSolution::failed(p, LpStatus::InfeasibleOrUnbounded, t.iterations);
        }
        // Drive zero-valued artificials out of the basis where possible.
        for r in 0..rows {
            if t.basis[r] >= art_start {
                if let Some(c) = (0..art_start).find(|&c| t.row(r)[c].abs() > 1e-7) {
                    t.pivot(r, c);
                }
            }
        }
    }

    // Phase two reduced costs: d_j - d_B^T (B^-1 A)_j.
    let cost = |c: usize| if c < q { dual_obj[c] } else { 0.0 };
    t.reduced = (0..cols).map(cost).collect();
    t.obj = 0.0;
    for r in 0..rows {
        let cb = cost(t.basis[r]);
        if cb != 0.0 {
            for c in 0..cols {
                t.reduced[c] -= cb * t.a[r * cols + c];
            }
            t.obj -= cb * t.rhs[r];
        }
    }
    match t.optimize(|c| c < art_start, cost_tol, max_iter) {
        Outcome::IterationLimit => return LpSolution::failed(p, LpStatus::NumericalFailure, t.iterations),
        // An unbounded dual certifies an infeasible primal.
        Outcome::Unbounded => return LpSolution::failed(p, LpStatus::Infeasible, t.iterations),
        Outcome::Optimal => {}
    }

    // Primal values are the dual multipliers of the tableau rows, i.e. the
    // negated reduced costs of the slack columns.
    let from_tableau: Vec<f64> = (0..rows).map(|j| (-t.reduced[q + j]).max(0.0)).collect();
    let dual_from_tableau = -t.obj;

    let refined = refine_from_basis(p, &t.basis, q, art_start, &art_of_row, &dual_obj, &dual_col);
    let mut best = (from_tableau, dual_from_tableau);
    let mut best_res = p.residuals(&best.0);
    if let Some((x, dual_value)) = refined {
        let res = p.residuals(&x);
        if res.max() <= best_res.max() {
            best = (x, dual_value);
            best_res = res;
        }
    }
    let (x, dual_objective) = best;
    let objective = p.objective_value(&x);
    let gap_ok = (objective - dual_objective).abs() <= opts.opt_tol * (1.0 + objective.abs());
    let status = if best_res.max() <= opts.feas_tol && gap_ok {
        LpStatus::Optimal
    } else {
        LpStatus::NumericalFailure
    };
    LpSolution {
        x,
        objective,
        dual_objective,
        residuals: best_res,
        status,
        iterations: t.iterations,
    }
}

/// Recomputes the basic dual solution `w_B = B^-1 c` and the primal
/// multipliers `x = B^-T d_B` from the final basis with a fresh LU.
fn refine_from_basis(
    p: &LpProblem,
    basis: &[usize],
    q: usize,
    art_start: usize,
    art_of_row: &[usize],
    dual_obj: &[f64],
    dual_col: &dyn Fn(usize, usize) -> f64,
) -> Option<(Vec<f64>, f64)> {
    let n = basis.len();
    let mut b = vec![0.0; n * n];
    let mut d_b = vec![0.0; n];
    for (col, &c) in basis.iter().enumerate() {
        if c < q {
            for j in 0..n {
                b[j * n + col] = dual_col(c, j);
            }
            d_b[col] = dual_obj[c];
        } else if c < art_start {
            b[(c - q) * n + col] = 1.0;
        } else {
            let j = art_of_row.iter().position(|&a| a == c)?;
            b[j * n + col] = -1.0;
        }
    }
    let lu = Lu::factor(b, n)?;
    let w_b = lu.solve(&p.objective);
    if w_b.iter().any(|v| *v < -1e-7 * (1.0 + v.abs())) {
        return None;
    }
    let x: Vec<f64> = lu.solve_transpose(&d_b).into_iter().map(|v| v.max(0.0)).collect();
    let dual_value = dot(&d_b, &w_b);
    Some((x, dual_value))
}

/// Dense LU with partial pivoting.
struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(mut a: Vec<f64>, n: usize) -> Option<Self> {
        let mut perm: Vec<usize> = (0..n).collect();
        let max_abs = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..n {
            let (piv, pval) = (k..n)
                .map(|r| (r, a[r * n + k].abs()))
                .max_by(|x, y| x.1.total_cmp(&y.1))?;
            if pval <= 1e-13 * max_abs.max(1.0) {
                return None;
            }
            if piv != k {
                for c in 0..n {
                    a.swap(k * n + c, piv * n + c);
                }
                perm.swap(k, piv);
            }
            let inv = 1.0 / a[k * n + k];
            let (top, bottom) = a.split_at_mut((k + 1) * n);
            let krow = &top[k * n..];
            for row in bottom.chunks_exact_mut(n) {
                let f = row[k] * inv;
                if f != 0.0 {
                    row[k] = f;
                    for c in k + 1..n {
                        row[c] -= f * krow[c];
                    }
                }
            }
        }
        Some(Self { n, lu: a, perm })
    }

    /// Solves `A x = b`.
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[i * n + j] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[i * n + j] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        x
    }

    /// Solves `A^T y = b`.
    fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        // A = P^T L U  =>  A^T = U^T L^T P
        let mut z = b.to_vec();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[j * n + i] * z[j]).sum();
            z[i] = (z[i] - s) / self.lu[i * n + i];
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[j * n + i] * z[j]).sum();
            z[i] -= s;
        }
        let mut y = vec![0.0; n];
        for (k, &i) in self.perm.iter().enumerate() {
            y[i] = z[k];
        }
        y
    }
}
