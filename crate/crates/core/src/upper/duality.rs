//! Duality-based upper bound for `alpha < alpha_th`.
//!
//! The objective `F(p, delta, mu)` is `sup_p inf_{delta, mu}`-ed. For fixed
//! `(delta, mu)` it splits as `const + c . p - D(p || h/s_nt)`, so the supremum
//! over `{p : sum p_k (k-1) <= alpha}` is a tilted Gibbs law and comes with an
//! exact dual certificate. The reported value is that certified supremum at
//! the best `(delta, mu)` found, which is a valid upper bound for any choice of
//! `(delta, mu)`: the search only affects tightness.

use std::f64::consts::{E, PI};

use serde::Serialize;

use crate::asymptotics::schedule_mu;
use crate::channel::{ChannelGains, Noise, PowerBudget};
use crate::error::{Error, Result};
use crate::lower::{optimize_nu, BoundEvaluation, BoundKind, Diagnostics, NuOptimum, Witnesses};
use crate::numerics::simplex::nelder_mead;
use crate::numerics::special::{kl_divergence, logsumexp, one_minus_two_q, qfunc};

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// Settings of the `(delta, mu)` search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualitySearch {
    /// Number of starting points used, 1 to 3.
    pub multistarts: usize,
    /// Objective evaluations per start.
    pub max_evals: usize,
    /// Exponent of the three-case `mu` rule used for the first start.
    pub zeta: f64,
}

impl Default for DualitySearch {
    fn default() -> Self {
        DualitySearch { multistarts: 3, max_evals: 500, zeta: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityWitness {
    pub p: Vec<f64>,
    pub delta: f64,
    pub mu: f64,
    pub certificate_gap: f64,
}

/// `F(p, delta, mu) = constant + sum_k coeffs_k p_k - D(p || h/s_nt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualityTerms {
    pub constant: f64,
    pub coeffs: Vec<f64>,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {v}")))
    }
}

pub fn duality_terms(
    ch: &ChannelGains,
    budget: &PowerBudget,
    noise: &Noise,
    delta: f64,
    mu: f64,
) -> Result<DualityTerms> {
    check_positive("delta", delta)?;
    check_positive("mu", mu)?;
    let a = budget.amplitude();
    let sigma = noise.sigma();
    let r = delta / sigma;
    let gauss = (-0.5 * r * r).exp();
    let constant = 0.5 * ((a * ch.total() / sigma).powi(2) / (2.0 * PI * E)).ln() - mu.ln() - one_minus_two_q(r).ln()
        + qfunc(r)
        + r / SQRT_2PI * gauss
        + mu * budget.alpha();
    let coeffs = ch
        .gains()
        .iter()
        .enumerate()
        .map(|(i, &h)| {
            let t = delta / (a * h);
            let tail = (-0.5 * ((a * h + delta) / sigma).powi(2)).exp();
            mu * t + (-(-mu * (1.0 + 2.0 * t)).exp_m1()).ln() + mu * sigma / (a * SQRT_2PI) / h * (gauss - tail)
                - mu * i as f64
        })
        .collect();
    Ok(DualityTerms { constant, coeffs })
}

/// The bracketed duality objective, evaluated term by term.
pub fn duality_objective(
    ch: &ChannelGains,
    budget: &PowerBudget,
    noise: &Noise,
    p: &[f64],
    delta: f64,
    mu: f64,
) -> Result<f64> {
    check_positive("delta", delta)?;
    check_positive("mu", mu)?;
    let kl = kl_divergence(p, &ch.reference_law())?;
    let load: f64 = p.iter().enumerate().map(|(i, v)| i as f64 * v).sum();
    let alpha = budget.alpha();
    if load > alpha + 1e-12 {
        return Err(Error::Domain(format!("sum p_k (k-1) = {load} exceeds alpha = {alpha}")));
    }
    let a = budget.amplitude();
    let sigma = noise.sigma();
    let r = delta / sigma;
    let gauss = (-r * r / 2.0).exp();
    let mut value = 0.5 * (a * a * ch.total().powi(2) / (2.0 * PI * E * sigma * sigma)).ln();
    value -= mu.ln();
    value -= one_minus_two_q(r).ln();
    value += qfunc(r) + delta / (SQRT_2PI * sigma) * gauss;
    value -= kl;
    for (pk, h) in p.iter().zip(ch.gains()) {
        let ah = a * h;
        value += pk * ((mu * delta / ah).exp() - (-mu * (1.0 + delta / ah)).exp()).ln();
        value += mu * sigma / (a * SQRT_2PI) * pk / h * (gauss - (-(ah + delta).powi(2) / (2.0 * sigma * sigma)).exp());
    }
    value += mu * (alpha - load);
    Ok(value)
}

/// Supremum over feasible `p` of `c . p - D(p || r)` with its certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedSup {
    /// Feasible maximizer (to within `gap`).
    pub p: Vec<f64>,
    /// `c . p - D(p || r)` at `p`.
    pub primal: f64,
    /// Dual value minus primal; the true supremum lies in `[primal, primal + gap]`.
    pub gap: f64,
    /// Multiplier of the load constraint.
    pub theta: f64,
}

fn tilted(log_r: &[f64], c: &[f64], theta: f64) -> (Vec<f64>, f64) {
    let logits: Vec<f64> = log_r.iter().zip(c).enumerate().map(|(i, (lr, ck))| lr + ck - theta * i as f64).collect();
    let norm = logsumexp(&logits);
    let mut p: Vec<f64> = logits.iter().map(|l| (l - norm).exp()).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    (p, norm)
}

fn load(p: &[f64]) -> f64 {
    p.iter().enumerate().map(|(i, v)| i as f64 * v).sum()
}

/// Maximizes `c . p - D(p || h/s_nt)` over `{p : sum p_k (k-1) <= alpha}` by
/// exponential tilting `p ~ r_k exp(c_k - theta (k-1))`.
pub fn certified_sup(ch: &ChannelGains, alpha: f64, c: &[f64]) -> Result<CertifiedSup> {
    let r = ch.reference_law();
    let log_r: Vec<f64> = r.iter().map(|v| v.ln()).collect();
    let value_of =
        |p: &[f64]| -> Result<f64> { Ok(p.iter().zip(c).map(|(p, c)| p * c).sum::<f64>() - kl_divergence(p, &r)?) };

    let (p0, norm0) = tilted(&log_r, c, 0.0);
    if load(&p0) <= alpha {
        let primal = value_of(&p0)?;
        return Ok(CertifiedSup { gap: (norm0 - primal).max(0.0), p: p0, primal, theta: 0.0 });
    }
    let mut hi = 1.0;
    while load(&tilted(&log_r, c, hi).0) > alpha {
        hi *= 2.0;
        if hi > 1e8 {
            return Err(Error::NoConvergence(format!("no feasible tilt for alpha = {alpha}")));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if load(&tilted(&log_r, c, mid).0) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (p, norm) = tilted(&log_r, c, hi);
    let primal = value_of(&p)?;
    let dual = norm + hi * alpha;
    Ok(CertifiedSup { gap: (dual - primal).max(0.0), p, primal, theta: hi })
}

/// Certified value `const + primal + gap` at one `(delta, mu)`.
pub fn certified_value(
    ch: &ChannelGains,
    budget: &PowerBudget,
    noise: &Noise,
    delta: f64,
    mu: f64,
) -> Result<(f64, CertifiedSup)> {
    let terms = duality_terms(ch, budget, noise, delta, mu)?;
    let sup = certified_sup(ch, budget.alpha(), &terms.coeffs)?;
    let value = terms.constant + sup.primal + sup.gap;
    if !value.is_finite() {
        return Err(Error::Domain(format!("duality objective not finite at delta = {delta}, mu = {mu}")));
    }
    Ok((value, sup))
}

fn starting_points(budget: &PowerBudget, noise: &Noise, nu: &NuOptimum, zeta: f64) -> Result<Vec<(f64, f64)>> {
    let sigma = noise.sigma();
    let snr = budget.amplitude() / sigma;
    let delta0 = sigma * snr.ln_1p();
    let lambda = budget.alpha() - load(&nu.best.p);
    let mu_schedule = schedule_mu(snr.max(1.0), lambda, zeta)?;
    Ok(vec![(delta0, mu_schedule), (sigma, 1.0), (delta0, nu.best.mu)])
}

/// Duality upper bound reusing a precomputed `lambda` optimum.
pub fn upper_bound_duality_with(
    ch: &ChannelGains,
    budget: &PowerBudget,
    noise: &Noise,
    search: &DualitySearch,
    nu: &NuOptimum,
) -> Result<BoundEvaluation> {
    if ch.nt() < 2 {
        return Err(Error::MisoOnly);
    }
    let threshold = ch.alpha_threshold();
    if budget.alpha() >= threshold {
        return Err(Error::Regime(format!(
            "alpha = {} >= alpha_th = {threshold}: the duality bound does not apply",
            budget.alpha()
        )));
    }
    if search.multistarts == 0 || search.max_evals == 0 {
        return Err(Error::Domain("duality search needs at least one start and one evaluation".into()));
    }
    let sigma = noise.sigma();
    let objective = |x: &[f64]| {
        certified_value(ch, budget, noise, sigma * x[0].exp(), x[1].exp()).map_or(f64::INFINITY, |(v, _)| v)
    };

    let mut best: Option<(f64, f64, f64)> = None;
    let mut evaluations = 0;
    for (delta0, mu0) in starting_points(budget, noise, nu, search.zeta)?.into_iter().take(search.multistarts) {
        let start = [(delta0 / sigma).ln(), mu0.ln()];
        let out = nelder_mead(objective, &start, 0.5, search.max_evals, 1e-12);
        evaluations += out.evaluations;
        if out.value.is_finite() && best.is_none_or(|(v, _, _)| out.value < v) {
            best = Some((out.value, sigma * out.point[0].exp(), out.point[1].exp()));
        }
    }
    let (_, delta, mu) =
        best.ok_or_else(|| Error::NoConvergence("duality objective not finite at any start".into()))?;
    let (value, sup) = certified_value(ch, budget, noise, delta, mu)?;
    let lambda = budget.alpha() - load(&sup.p);
    Ok(BoundEvaluation {
        kind: BoundKind::UpperDuality,
        value,
        witnesses: Witnesses {
            lambda: Some(lambda),
            mu: Some(mu),
            p: Some(sup.p),
            delta: Some(delta),
            certificate_gap: Some(sup.gap),
            ..Witnesses::default()
        },
        diagnostics: Diagnostics { max_residual: 0.0, evaluations },
    })
}

pub fn upper_bound_duality(ch: &ChannelGains, budget: &PowerBudget, noise: &Noise) -> Result<BoundEvaluation> {
    upper_bound_duality_search(ch, budget, noise, &DualitySearch::default())
}

pub fn upper_bound_duality_search(
    ch: &ChannelGains,
    budget: &PowerBudget,
    noise: &Noise,
    search: &DualitySearch,
) -> Result<BoundEvaluation> {
    let nu = optimize_nu(ch, budget.alpha())?;
    upper_bound_duality_with(ch, budget, noise, search, &nu)
}

impl DualityWitness {
    pub fn from_evaluation(eval: &BoundEvaluation) -> Option<Self> {
        let w = &eval.witnesses;
        Some(DualityWitness { p: w.p.clone()?, delta: w.delta?, mu: w.mu?, certificate_gap: w.certificate_gap? })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(a: f64) -> (ChannelGains, PowerBudget, Noise) {
        let ch = ChannelGains::new(&[3.0, 2.0, 1.5]).unwrap();
        let b = PowerBudget::new(&ch, a, 0.6).unwrap();
        (ch, b, Noise::new(1.0).unwrap())
    }

    #[test]
    fn split_matches_direct_formula() {
        let (ch, b, n) = setup(4.0);
        let p = [0.7, 0.2, 0.1];
        for (delta, mu) in [(0.3, 0.5), (1.7, 2.0), (5.0, 0.01)] {
            let t = duality_terms(&ch, &b, &n, delta, mu).unwrap();
            let split = t.constant + p.iter().zip(&t.coeffs).map(|(p, c)| p * c).sum::<f64>()
                - kl_divergence(&p, &ch.reference_law()).unwrap();
            let direct = duality_objective(&ch, &b, &n, &p, delta, mu).unwrap();
            assert!((split - direct).abs() < 1e-11, "{split} vs {direct}");
        }
    }

    #[test]
    fn certified_sup_dominates_feasible_points() {
        let (ch, b, n) = setup(10.0);
        let t = duality_terms(&ch, &b, &n, 1.2, 1.5).unwrap();
        let sup = certified_sup(&ch, 0.6, &t.coeffs).unwrap();
        assert!(load(&sup.p) <= 0.6 + 1e-12);
        let r = ch.reference_law();
        let steps = 100;
        for i in 0..=steps {
            for j in 0..=steps - i {
                let p = [i as f64 / steps as f64, j as f64 / steps as f64, (steps - i - j) as f64 / steps as f64];
                if load(&p) > 0.6 {
                    continue;
                }
                let v = p.iter().zip(&t.coeffs).map(|(p, c)| p * c).sum::<f64>() - kl_divergence(&p, &r).unwrap();
                assert!(v <= sup.primal + sup.gap + 1e-12);
            }
        }
        assert!(sup.gap < 1e-9);
    }

    #[test]
    fn domain_errors() {
        let (ch, b, n) = setup(1.0);
        assert!(duality_objective(&ch, &b, &n, &[0.2, 0.2, 0.6], 1.0, 1.0).is_err());
        assert!(duality_objective(&ch, &b, &n, &[1.0, 0.0, 0.0], 0.0, 1.0).is_err());
        assert!(duality_objective(&ch, &b, &n, &[1.0, 0.0, 0.0], 1.0, -1.0).is_err());
        let high = PowerBudget::new(&ch, 1.0, 1.3).unwrap();
        assert!(matches!(upper_bound_duality(&ch, &high, &n), Err(Error::Regime(_))));
    }

    #[test]
    fn crippled_search_is_still_an_upper_bound_of_the_full_one() {
        let (ch, b, n) = setup(10.0);
        let full = upper_bound_duality(&ch, &b, &n).unwrap();
        let weak = upper_bound_duality_search(
            &ch,
            &b,
            &n,
            &DualitySearch { multistarts: 1, max_evals: 10, ..DualitySearch::default() },
        )
        .unwrap();
        assert!(full.value <= weak.value + 1e-12);
    }
}
