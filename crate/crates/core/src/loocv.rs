//! Leave-one-out cross validation of the shape parameter.
//!
//! Rippa's rule gives every leave-one-out error of an interpolant from a
//! single factorization of the full kernel matrix:
//! `e_j = c_j / (K⁻¹)_jj` with `c = K⁻¹ f`.

use alloc::vec::Vec;

use crate::data::DataSet;
use crate::kernels::{KernelFamily, RbfKernel};
use crate::rbf::factor_kernel_matrix;
use crate::{Error, Result};

/// Interval width at which [`optimizer_search`] stops.
pub const OPTIMIZER_XTOL: f64 = 1e-6;

/// Hard cap on error-function evaluations in [`optimizer_search`].
pub const OPTIMIZER_MAX_EVALS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct LoocvResult {
    pub best_epsilon: f64,
    pub best_error: f64,
    /// `(ε, Er(ε))` in evaluation order; failed candidates carry `+∞`.
    pub trace: Vec<(f64, f64)>,
}

impl LoocvResult {
    /// Picks the smallest error of a trace, breaking ties toward smaller ε.
    pub fn from_trace(trace: Vec<(f64, f64)>) -> Result<Self> {
        let mut best: Option<(f64, f64)> = None;
        for &(eps, err) in &trace {
            if !err.is_finite() {
                continue;
            }
            best = match best {
                Some((be, bv)) if bv < err || (bv == err && be <= eps) => Some((be, bv)),
                _ => Some((eps, err)),
            };
        }
        let (best_epsilon, best_error) = best.ok_or(Error::SearchFailed)?;
        Ok(LoocvResult {
            best_epsilon,
            best_error,
            trace,
        })
    }
}

/// The vector of leave-one-out errors `e_j = f_j − P^{(j)}(x_j)`.
pub fn rippa_errors(kernel: &RbfKernel, data: &DataSet) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(Error::invalid("no data"));
    }
    let ch = factor_kernel_matrix(kernel, data.locations())?;
    let c = ch.solve(data.values());
    let diag = ch.inverse_diagonal();
    Ok(c.iter().zip(&diag).map(|(c, d)| c / d).collect())
}

/// `Er(ε) = max_j |e_j(ε)|`, or `+∞` when the kernel matrix cannot be factored.
pub fn loocv_error(family: KernelFamily, epsilon: f64, data: &DataSet) -> f64 {
    let Ok(kernel) = RbfKernel::new(family, epsilon) else {
        return f64::INFINITY;
    };
    match rippa_errors(&kernel, data) {
        Ok(e) => {
            let m = e.iter().fold(0.0f64, |m, x| {
                let a = libm::fabs(*x);
                if a > m || a.is_nan() {
                    a
                } else {
                    m
                }
            });
            if m.is_nan() {
                f64::INFINITY
            } else {
                m
            }
        }
        Err(_) => f64::INFINITY,
    }
}

/// `{k · eps_max / grid_size : k = 1..=grid_size}`.
pub fn grid_candidates(eps_max: f64, grid_size: usize) -> Result<Vec<f64>> {
    if grid_size < 2 {
        return Err(Error::invalid("grid needs at least two candidates"));
    }
    if !(eps_max > 0.0 && eps_max.is_finite()) {
        return Err(Error::invalid("eps_max must be positive"));
    }
    Ok((1..=grid_size)
        .map(|k| k as f64 * eps_max / grid_size as f64)
        .collect())
}

/// Exhaustive search of `Er` over the equally spaced grid on `(0, eps_max]`.
pub fn grid_search(
    family: KernelFamily,
    data: &DataSet,
    eps_max: f64,
    grid_size: usize,
) -> Result<LoocvResult> {
    data.require_distinct()?;
    let trace = grid_candidates(eps_max, grid_size)?
        .into_iter()
        .map(|eps| (eps, loocv_error(family, eps, data)))
        .collect();
    LoocvResult::from_trace(trace)
}

/// Minimizes `Er` on `(0, eps_max)` with a bounded Brent minimizer whose first
/// probe is `start`.
pub fn optimizer_search(
    family: KernelFamily,
    data: &DataSet,
    eps_max: f64,
    start: f64,
) -> Result<LoocvResult> {
    data.require_distinct()?;
    if !(eps_max > 0.0 && eps_max.is_finite()) {
        return Err(Error::invalid("eps_max must be positive"));
    }
    if !(start > 0.0 && start <= eps_max) {
        return Err(Error::invalid("start must lie in (0, eps_max]"));
    }
    let trace = minimize_bounded(
        |eps| loocv_error(family, eps, data),
        0.0,
        eps_max,
        start,
        OPTIMIZER_XTOL,
        OPTIMIZER_MAX_EVALS,
    );
    LoocvResult::from_trace(trace)
}

const GOLDEN: f64 = 0.381_966_011_250_105_1;

/// Brent's bounded scalar minimization (golden section with parabolic steps)
/// on the open interval `(lo, hi)`, started at `start`.
///
/// Returns every evaluation `(x, f(x))` in order. Stops when the bracket is
/// narrower than `xtol` (plus the usual relative slack) or after `max_evals`
/// evaluations. Non-finite values force golden-section steps.
pub fn minimize_bounded<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    start: f64,
    xtol: f64,
    max_evals: usize,
) -> Vec<(f64, f64)> {
    let mut trace = Vec::new();
    if max_evals == 0 || !(hi > lo) {
        return trace;
    }
    let sqrt_eps = libm::sqrt(f64::EPSILON);
    let (mut a, mut b) = (lo, hi);
    let mut x = start.clamp(lo, hi);
    // keep the first probe strictly inside the bracket
    let edge = sqrt_eps * libm::fabs(x) + xtol / 3.0;
    if x - a < edge {
        x = a + edge.min(0.5 * (b - a));
    }
    if b - x < edge {
        x = b - edge.min(0.5 * (b - a));
    }
    let mut fx = f(x);
    trace.push((x, fx));
    let (mut v, mut w) = (x, x);
    let (mut fv, mut fw) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;

    while trace.len() < max_evals {
        let xm = 0.5 * (a + b);
        let tol1 = sqrt_eps * libm::fabs(x) + xtol / 3.0;
        let tol2 = 2.0 * tol1;
        if libm::fabs(x - xm) <= tol2 - 0.5 * (b - a) || b - a <= xtol {
            break;
        }
        let mut golden = true;
        if libm::fabs(e) > tol1 && fx.is_finite() && fv.is_finite() && fw.is_finite() {
            let mut r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = libm::fabs(q);
            r = e;
            e = d;
            if libm::fabs(p) < libm::fabs(0.5 * q * r) && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = GOLDEN * e;
        }
        let u = if libm::fabs(d) >= tol1 {
            x + d
        } else if d > 0.0 {
            x + tol1
        } else {
            x - tol1
        };
        let fu = f(u);
        trace.push((u, fu));

        if !(fu > fx) {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if !(fu > fw) || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if !(fu > fv) || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    trace
}
