//! Independent oracles shared by the integration tests. Nothing here calls
//! into the code paths it is used to check.
#![allow(dead_code)]

use onebit::lp::LpProblem;

const TWO_OVER_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

fn gaussian_kernel(t: f64) -> f64 {
    TWO_OVER_SQRT_PI * (-t * t).exp()
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

#[allow(clippy::too_many_arguments)]
fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64, whole: f64, m: f64, fm: f64, tol: f64, depth: u32) -> f64 {
    let (lm, flm, left) = simpson(f, a, fa, m, fm);
    let (rm, frm, right) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    let floor = 4.0 * f64::EPSILON * (left.abs() + right.abs());
    if depth == 0 || delta.abs() <= (15.0 * tol).max(floor) {
        return left + right + delta / 15.0;
    }
    adaptive(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)
        + adaptive(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature (with Richardson correction) of `f` on `[a, b]`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    adaptive(f, a, fa, b, fb, whole, m, fm, tol, 40)
}

/// `erf(x) = 2/sqrt(pi) * int_0^x exp(-t^2) dt`, by quadrature.
pub fn erf_quadrature(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let v = integrate(&gaussian_kernel, 0.0, x.abs(), 1e-16);
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// Inverse of [`erf_quadrature`] by bisection on `(-6, 6)`.
pub fn erfinv_bisection(u: f64) -> f64 {
    let (mut lo, mut hi) = (-6.0f64, 6.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if erf_quadrature(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Solves the square system `m x = rhs` by Gaussian elimination with
/// partial pivoting; `None` when (numerically) singular.
#[allow(clippy::needless_range_loop)]
pub fn solve_square(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for k in 0..n {
        let piv = (k..n).max_by(|&a, &b| m[a][k].abs().total_cmp(&m[b][k].abs()))?;
        if m[piv][k].abs() < 1e-10 {
            return None;
        }
        m.swap(k, piv);
        rhs.swap(k, piv);
        for r in k + 1..n {
            let f = m[r][k] / m[k][k];
            if f != 0.0 {
                for c in k..n {
                    m[r][c] -= f * m[k][c];
                }
                rhs[r] -= f * rhs[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (rhs[i] - s) / m[i][i];
    }
    Some(x)
}

fn combinations(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

/// Brute-force LP optimum over all basic feasible solutions: every choice
/// of active constraints (equalities always active, plus inequality rows
/// and `x_j = 0` bounds) that pins down a unique point is solved and checked
/// for feasibility. Returns the minimum objective and a minimizer, or `None`
/// if no vertex is feasible. Only for tiny problems.
pub fn vertex_enumeration(p: &LpProblem) -> Option<(f64, Vec<f64>)> {
    let nv = p.num_vars();
    let n_eq = p.num_eq();
    if n_eq > nv {
        return None;
    }
    // Candidate active constraints: ineq rows first, then bounds.
    let mut cand_rows: Vec<Vec<f64>> = (0..p.num_ineq()).map(|i| p.ineq_row(i).to_vec()).collect();
    let mut cand_rhs: Vec<f64> = p.ineq_rhs().to_vec();
    for j in 0..nv {
        let mut e = vec![0.0; nv];
        e[j] = 1.0;
        cand_rows.push(e);
        cand_rhs.push(0.0);
    }
    let feasible = |x: &[f64]| -> bool {
        let tol = 1e-9;
        x.iter().all(|v| *v >= -tol)
            && (0..p.num_ineq()).all(|i| {
                let row = p.ineq_row(i);
                let v: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
                v >= p.ineq_rhs()[i] - tol * (1.0 + p.ineq_rhs()[i].abs())
            })
            && (0..n_eq).all(|i| {
                let row = p.eq_row(i);
                let v: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
                (v - p.eq_rhs()[i]).abs() <= tol * (1.0 + p.eq_rhs()[i].abs())
            })
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    combinations(cand_rows.len(), nv - n_eq, &mut |active| {
        let mut m: Vec<Vec<f64>> = (0..n_eq).map(|i| p.eq_row(i).to_vec()).collect();
        let mut rhs: Vec<f64> = p.eq_rhs().to_vec();
        for &a in active {
            m.push(cand_rows[a].clone());
            rhs.push(cand_rhs[a]);
        }
        if let Some(x) = solve_square(m, rhs) {
            if feasible(&x) {
                let obj: f64 = p.objective().iter().zip(&x).map(|(c, v)| c * v).sum();
                if best.as_ref().is_none_or(|(b, _)| obj < *b) {
                    best = Some((obj, x));
                }
            }
        }
    });
    best
}

/// One-sample Kolmogorov-Smirnov statistic and asymptotic p-value against
/// a continuous CDF.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let d = s
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    let sqrt_n = n.sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    let mut p = 0.0;
    for k in 1..200 {
        let k = k as f64;
        let term = 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp();
        p += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    (d, p.clamp(0.0, 1.0))
}

/// `P(N(0, sigma^2) <= tau)` via the quadrature erf.
pub fn normal_cdf(tau: f64, sigma: f64) -> f64 {
    0.5 * (1.0 + erf_quadrature(tau / (sigma * std::f64::consts::SQRT_2)))
}

pub fn l2_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn l2_norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Standard error of a Bernoulli frequency at probability `p` over `n` trials.
pub fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}
