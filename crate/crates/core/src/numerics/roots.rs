//! Root finders for the two transcendental equations behind the
//! truncated-exponential input construction.
//!
//! Both left-hand sides are strictly monotone, so a bracketing bisection is
//! guaranteed to converge; a Newton step polishes the result.

use serde::Serialize;

use crate::channel::ChannelGains;
use crate::error::{Error, Result};
use crate::numerics::special::{logsumexp, truncexp_mean, truncexp_mean_derivative};

/// Residual accepted as a converged root.
pub const ROOT_TOLERANCE: f64 = 1e-10;

const MAX_BISECTIONS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootResult {
    pub root: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Bisection on a decreasing function `f` over `[lo, hi]` with `f(lo) > 0 > f(hi)`.
fn bisect_decreasing(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, usize) {
    let mut iterations = 0;
    while iterations < MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi), iterations)
}

/// Solves `1/mu - e^{-mu}/(1 - e^{-mu}) = lambda` for the unique `mu > 0`.
///
/// `lambda` is the mean of a truncated exponential on `[0, 1]` and must lie in
/// the open interval `(0, 1/2)`.
pub fn solve_mu(lambda: f64) -> Result<RootResult> {
    if !(lambda > 0.0 && lambda < 0.5) {
        return Err(Error::Domain(format!("lambda = {lambda} outside (0, 1/2)")));
    }
    let f = |mu: f64| truncexp_mean(mu) - lambda;

    // Near lambda = 1/2 the root is about 12 (1/2 - lambda).
    let mut lo = (6.0 * (0.5 - lambda)).min(1e-3);
    while f(lo) <= 0.0 {
        lo *= 0.5;
        if lo < f64::MIN_POSITIVE {
            return Err(Error::NoConvergence(format!("no lower bracket for lambda = {lambda}")));
        }
    }
    let mut hi = f64::max(4.0, 2.0 / lambda);
    while f(hi) >= 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::NoConvergence(format!("no upper bracket for lambda = {lambda}")));
        }
    }
    let (mut root, mut iterations) = bisect_decreasing(f, lo, hi);

    for _ in 0..3 {
        let slope = truncexp_mean_derivative(root);
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        let step = root - f(root) / slope;
        if step > lo && step < hi && f(step).abs() < f(root).abs() {
            root = step;
            iterations += 1;
        } else {
            break;
        }
    }

    finish(root, f(root), iterations, "solve_mu")
}

/// Solves `sum_k h_k k a^k / sum_j h_j a^j = target` for the unique `a > 0`.
///
/// The ratio increases from 1 (as `a -> 0`) to `nt` (as `a -> inf`), so
/// `target` must lie in `(1, nt)`. Work is done in `ln a` with softmax weights,
/// which keeps very large or very small roots representable.
pub fn solve_a(ch: &ChannelGains, target: f64) -> Result<RootResult> {
    let nt = ch.nt() as f64;
    if !(target > 1.0 && target < nt) {
        return Err(Error::Domain(format!("target = {target} outside (1, {nt})")));
    }
    let log_h: Vec<f64> = ch.gains().iter().map(|h| h.ln()).collect();
    let g = |x: f64| target - weighted_index_mean(&log_h, x).0;

    // Geometric bracket expansion around a = 1.
    let mut lo = -1.0;
    while g(lo) <= 0.0 {
        lo *= 2.0;
        if lo < -1e6 {
            return Err(Error::NoConvergence(format!("no lower bracket for target = {target}")));
        }
    }
    let mut hi = 1.0;
    while g(hi) >= 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NoConvergence(format!("no upper bracket for target = {target}")));
        }
    }
    let (mut x, mut iterations) = bisect_decreasing(g, lo, hi);

    for _ in 0..3 {
        let (_, var) = weighted_index_mean(&log_h, x);
        if var <= 0.0 {
            break;
        }
        // d(mean)/dx = variance of k under the softmax weights.
        let step = x + g(x) / var;
        if step > lo && step < hi && g(step).abs() < g(x).abs() {
            x = step;
            iterations += 1;
        } else {
            break;
        }
    }

    finish(x.exp(), -g(x), iterations, "solve_a")
}

/// Mean and variance of the index `k` (1-based) under weights `h_k e^{k x}`.
fn weighted_index_mean(log_h: &[f64], x: f64) -> (f64, f64) {
    let logits: Vec<f64> = log_h.iter().enumerate().map(|(i, lh)| lh + (i + 1) as f64 * x).collect();
    let norm = logsumexp(&logits);
    let mut mean = 0.0;
    let mut second = 0.0;
    for (i, l) in logits.iter().enumerate() {
        let w = (l - norm).exp();
        let k = (i + 1) as f64;
        mean += w * k;
        second += w * k * k;
    }
    (mean, (second - mean * mean).max(0.0))
}

/// Probability vector `p_k = h_k a^k / sum_j h_j a^j`, evaluated in log space.
pub fn geometric_weights(ch: &ChannelGains, a: f64) -> Vec<f64> {
    let x = a.ln();
    let logits: Vec<f64> = ch.gains().iter().enumerate().map(|(i, h)| h.ln() + (i + 1) as f64 * x).collect();
    let norm = logsumexp(&logits);
    let mut p: Vec<f64> = logits.iter().map(|l| (l - norm).exp()).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    p
}

fn finish(root: f64, residual: f64, iterations: usize, what: &str) -> Result<RootResult> {
    if residual.abs() <= ROOT_TOLERANCE && root.is_finite() {
        Ok(RootResult { root, residual, iterations })
    } else {
        Err(Error::NoConvergence(format!("{what}: residual {residual:e} at {root}")))
    }
}
