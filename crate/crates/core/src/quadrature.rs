//! Composite Simpson quadrature and bracketing root finding.

use crate::error::{Error, Result};

/// Composite Simpson rule with `panels` panels (each panel uses its midpoint).
pub fn simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels.max(1);
    let h = (b - a) / n as f64;
    let mut acc = 0.0;
    let mut left = f(a);
    for m in 0..n {
        let x0 = a + m as f64 * h;
        let mid = f(x0 + 0.5 * h);
        let right = if m + 1 == n { f(b) } else { f(x0 + h) };
        acc += (left + 4.0 * mid + right) * h / 6.0;
        left = right;
    }
    acc
}

/// Cumulative Simpson integrals at the panel boundaries `a + m (b - a) / panels`.
///
/// Returns `panels + 1` values starting at 0.
pub fn cumulative_simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> Vec<f64> {
    let n = panels.max(1);
    let h = (b - a) / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    let mut left = f(a);
    let mut acc = 0.0;
    for m in 0..n {
        let x0 = a + m as f64 * h;
        let mid = f(x0 + 0.5 * h);
        let right = if m + 1 == n { f(b) } else { f(x0 + h) };
        acc += (left + 4.0 * mid + right) * h / 6.0;
        out.push(acc);
        left = right;
    }
    out
}

/// Doubles the panel count until two successive Simpson estimates of the
/// total agree to `rel_tol`, returning the final panel count.
pub fn richardson_panels<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    start: usize,
    rel_tol: f64,
    max_panels: usize,
) -> Result<usize> {
    let mut n = start.max(2);
    let mut prev = simpson(&mut f, a, b, n);
    loop {
        let next = simpson(&mut f, a, b, 2 * n);
        let scale = next.abs().max(1e-300);
        if (next - prev).abs() <= rel_tol * scale {
            return Ok(2 * n);
        }
        if 2 * n >= max_panels {
            return Err(Error::NoConvergence { iterations: 2 * n, residual: (next - prev).abs() / scale });
        }
        n *= 2;
        prev = next;
    }
}

/// Bisection on a sign-changing bracket `[lo, hi]` down to width `tol`.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::InvalidParameter(format!("bracket [{lo}, {hi}] does not change sign ({f_lo:e}, {f_hi:e})")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo) <= tol {
            return Ok(mid);
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
