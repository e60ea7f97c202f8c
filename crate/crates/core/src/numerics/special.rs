//! Special functions and information measures.
//!
//! Everything here works in nats. The truncated exponential helpers refer to
//! the law on `[0, 1]` with density proportional to `exp(-mu * v)`.

use crate::error::{Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
pub fn qfunc(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return 1.0;
    }
    0.5 * libm::erfc(x / SQRT_2)
}

/// `ln Q(x)`, finite far into the upper tail where `Q` itself underflows.
pub fn log_qfunc(x: f64) -> f64 {
    if x < 0.0 {
        return (-qfunc(-x)).ln_1p();
    }
    if x < 30.0 {
        return qfunc(x).ln();
    }
    // Asymptotic expansion of Mills' ratio; truncation error below 1e-14 at x = 30.
    let z = 1.0 / (x * x);
    let series = 1.0 - z * (1.0 - 3.0 * z * (1.0 - 5.0 * z * (1.0 - 7.0 * z * (1.0 - 9.0 * z))));
    -0.5 * x * x - LN_SQRT_2PI - x.ln() + series.ln()
}

/// `1 - 2 Q(x)` for `x >= 0`, computed without cancellation near zero.
pub fn one_minus_two_q(x: f64) -> f64 {
    libm::erf(x / SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

/// Natural log of the standard normal density.
pub fn normal_log_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// Mean of the truncated exponential on `[0, 1]` with rate `mu`:
/// `1/mu - e^{-mu}/(1 - e^{-mu})`.
///
/// Strictly decreasing from 1/2 (as `mu -> 0`) to 0 (as `mu -> inf`).
pub fn truncexp_mean(mu: f64) -> f64 {
    if mu.abs() < 0.05 {
        let m2 = mu * mu;
        return 0.5 - mu / 12.0 + mu * m2 / 720.0 - mu * m2 * m2 / 30240.0;
    }
    1.0 / mu - 1.0 / mu.exp_m1()
}

/// Derivative of [`truncexp_mean`] with respect to `mu`.
pub fn truncexp_mean_derivative(mu: f64) -> f64 {
    if mu.abs() < 0.05 {
        let m2 = mu * mu;
        return -1.0 / 12.0 + m2 / 240.0 - m2 * m2 / 6048.0;
    }
    let sh = (0.5 * mu).sinh();
    -1.0 / (mu * mu) + 1.0 / (4.0 * sh * sh)
}

/// Differential entropy (nats) of the truncated exponential on `[0, 1]`:
/// `1 - ln(mu/(1 - e^{-mu})) - mu e^{-mu}/(1 - e^{-mu})`.
///
/// Nonpositive, zero only in the uniform limit `mu -> 0`.
pub fn truncexp_entropy(mu: f64) -> f64 {
    if mu < 0.05 {
        let m2 = mu * mu;
        return -m2 / 24.0 + m2 * m2 / 960.0 - m2 * m2 * m2 / 36288.0;
    }
    let log_norm = mu.ln() - (-(-mu).exp()).ln_1p();
    1.0 - log_norm - mu / mu.exp_m1()
}

/// `ln(sum(exp(xs)))`, stable for large magnitudes.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    if max == f64::INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Kullback–Leibler divergence `D(p || q)` in nats, with `0 ln 0 = 0`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(p.len(), q.len()));
    }
    if let Some(k) = q.iter().position(|&qk| !(qk > 0.0)) {
        return Err(Error::ZeroReference(k));
    }
    if p.iter().any(|&pk| !(pk >= 0.0) || !pk.is_finite()) {
        return Err(Error::Domain("p has a negative or non-finite entry".into()));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("p sums to {total}, not 1")));
    }
    Ok(p.iter().zip(q).filter(|(&pk, _)| pk > 0.0).map(|(&pk, &qk)| pk * (pk / qk).ln()).sum::<f64>().max(0.0))
}

/// Shannon entropy (nats) of a probability vector.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn qfunc_reference_values() {
        assert_eq!(qfunc(0.0), 0.5);
        assert_eq!(qfunc(f64::INFINITY), 0.0);
        assert_eq!(qfunc(f64::NEG_INFINITY), 1.0);
        // mpmath, 40 digits
        assert_relative_eq!(qfunc(1.0), 0.158_655_253_931_457_05, max_relative = 1e-12);
        assert_relative_eq!(qfunc(-1.0), 1.0 - 0.158_655_253_931_457_05, max_relative = 1e-12);
        assert_relative_eq!(qfunc(5.0), 2.866_515_718_791_939e-7, max_relative = 1e-12);
    }

    #[test]
    fn log_qfunc_matches_across_threshold() {
        for &x in &[-3.0, -0.5, 0.0, 2.0, 10.0, 29.9, 30.0, 30.1, 37.0] {
            assert_relative_eq!(log_qfunc(x), qfunc(x).ln(), max_relative = 1e-12);
        }
        // Far tail stays finite and follows -x^2/2.
        let v = log_qfunc(200.0);
        assert!(v.is_finite());
        assert!((v + 0.5 * 200.0 * 200.0).abs() < 10.0);
    }

    #[test]
    fn truncexp_entropy_limits_and_golden() {
        assert_eq!(truncexp_entropy(0.0), 0.0);
        assert!(truncexp_entropy(1e-9).abs() < 1e-18);
        // mpmath, 40 digits
        assert_relative_eq!(truncexp_entropy(1.0), -0.040_651_852_256_408_3, max_relative = 1e-12);
        // series/direct agreement at the switch point
        let below = truncexp_entropy(0.049_999_999);
        let above = truncexp_entropy(0.050_000_001);
        assert!((below - above).abs() < 1e-9);
        // diverges like 1 - ln mu
        let big = 1e6;
        assert_relative_eq!(truncexp_entropy(big), 1.0 - f64::ln(big), max_relative = 1e-12);
    }

    #[test]
    fn truncexp_mean_series_matches_direct() {
        for &mu in &[0.049_999, 0.05, 0.051] {
            let direct = 1.0 / mu - 1.0 / f64::exp_m1(mu);
            assert_relative_eq!(truncexp_mean(mu), direct, max_relative = 1e-13);
        }
    }

    #[test]
    fn kl_examples_and_errors() {
        let q = [0.5, 0.5];
        assert_eq!(kl_divergence(&q, &q).unwrap(), 0.0);
        assert_relative_eq!(kl_divergence(&[1.0, 0.0], &q).unwrap(), std::f64::consts::LN_2);
        let r = [3.0 / 6.5, 2.0 / 6.5, 1.5 / 6.5];
        assert!(kl_divergence(&r, &r).unwrap().abs() < 1e-15);
        assert_eq!(kl_divergence(&[1.0], &q), Err(Error::DimensionMismatch(1, 2)));
        assert_eq!(kl_divergence(&[0.5, 0.5], &[1.0, 0.0]), Err(Error::ZeroReference(1)));
    }

    #[test]
    fn logsumexp_is_stable() {
        assert_relative_eq!(logsumexp(&[1000.0, 1000.0]), 1000.0 + std::f64::consts::LN_2);
        assert_eq!(logsumexp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
    }
}
