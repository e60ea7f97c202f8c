//! High- and low-SNR asymptotics and the parameter schedule of the
//! duality bound.

use std::f64::consts::{E, PI};

use serde::Serialize;

use crate::channel::{ChannelGains, Noise, PowerBudget};
use crate::error::{Error, Result};
use crate::lower::{lower_bound_epi_with, optimize_nu};
use crate::numerics::roots::solve_mu;
use crate::upper::duality::{upper_bound_duality_with, DualitySearch};
use crate::upper::vmax::vmax;

/// The supremum term of the high-SNR capacity expansion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticGap {
    /// `sup_lambda [h_trunc(mu) - D(p || h/s_nt)]`, zero when `alpha >= alpha_th`.
    pub gap: f64,
    pub lambda_star: Option<f64>,
    pub mu_star: Option<f64>,
    pub p_star: Option<Vec<f64>>,
}

pub fn high_snr_gap(ch: &ChannelGains, alpha: f64) -> Result<AsymptoticGap> {
    if ch.nt() < 2 {
        return Err(Error::MisoOnly);
    }
    let nt = ch.nt() as f64;
    if !(alpha > 0.0 && alpha <= nt) {
        return Err(Error::InvalidBudget(format!("alpha = {alpha} outside (0, {nt}]")));
    }
    if alpha >= ch.alpha_threshold() {
        return Ok(AsymptoticGap { gap: 0.0, lambda_star: None, mu_star: None, p_star: None });
    }
    let opt = optimize_nu(ch, alpha)?;
    Ok(AsymptoticGap {
        gap: opt.best.value,
        lambda_star: Some(opt.best.lambda),
        mu_star: Some(opt.best.mu),
        p_star: Some(opt.best.p),
    })
}

/// `1/2 ln(s_nt^2 / (2 pi e sigma^2)) + gap`: the limit of `C - ln A` as `A -> inf`.
pub fn asymptotic_intercept(ch: &ChannelGains, noise: &Noise, gap: f64) -> f64 {
    0.5 * (ch.total().powi(2) / (2.0 * PI * E * noise.sigma().powi(2))).ln() + gap
}

/// `gamma / 2`, the limit of `C / (A^2/sigma^2)` as `A -> 0`.
pub fn low_snr_slope(ch: &ChannelGains, alpha: f64) -> Result<f64> {
    let budget = PowerBudget::new(ch, 1.0, alpha)?;
    Ok(0.5 * vmax(ch, &budget).gamma)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScheduleCase {
    /// `A^{zeta-1} < lambda < 1/2`: `mu` solves the truncated-exponential mean equation.
    Interior,
    /// `lambda <= A^{zeta-1}`: `mu = A^{1-zeta}`.
    SmallLambda,
    /// `lambda >= 1/2`: `mu = 1/A`.
    LargeLambda,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduleParams {
    pub zeta: f64,
    pub lambda: f64,
    pub delta: f64,
    pub mu: f64,
    pub case: ScheduleCase,
}

fn schedule_case(amplitude: f64, lambda: f64, zeta: f64) -> Result<(f64, ScheduleCase)> {
    if !(amplitude >= 1.0) {
        return Err(Error::Domain(format!("the schedule needs A >= 1, got {amplitude}")));
    }
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(Error::Domain(format!("zeta = {zeta} outside (0, 1)")));
    }
    let cut = amplitude.powf(zeta - 1.0);
    // When both edge cases hold (A^{zeta-1} >= 1/2) the small-lambda rule wins.
    let (mu, case) = if lambda <= cut {
        (amplitude.powf(1.0 - zeta), ScheduleCase::SmallLambda)
    } else if lambda >= 0.5 {
        (1.0 / amplitude, ScheduleCase::LargeLambda)
    } else {
        (solve_mu(lambda)?.root, ScheduleCase::Interior)
    };
    let cap = amplitude.powf(1.0 - zeta);
    if mu > cap * (1.0 + 1e-12) {
        return Err(Error::NoConvergence(format!("scheduled mu = {mu} exceeds A^(1-zeta) = {cap}")));
    }
    Ok((mu, case))
}

/// Three-case `mu` rule for a given `lambda`.
pub fn schedule_mu(amplitude: f64, lambda: f64, zeta: f64) -> Result<f64> {
    schedule_case(amplitude, lambda, zeta).map(|(mu, _)| mu)
}

/// `delta = ln(1 + A)` and the three-case `mu` for `lambda(p) = alpha - sum p_k (k-1)`.
pub fn schedule_params(ch: &ChannelGains, budget: &PowerBudget, p: &[f64], zeta: f64) -> Result<ScheduleParams> {
    if p.len() != ch.nt() {
        return Err(Error::DimensionMismatch(p.len(), ch.nt()));
    }
    let total: f64 = p.iter().sum();
    if p.iter().any(|v| !(*v >= 0.0)) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::Domain("p is not a probability vector".into()));
    }
    let lambda = budget.alpha() - p.iter().enumerate().map(|(i, v)| i as f64 * v).sum::<f64>();
    if lambda < -1e-12 {
        return Err(Error::Domain(format!("p overspends the average budget by {}", -lambda)));
    }
    let amplitude = budget.amplitude();
    let (mu, case) = schedule_case(amplitude, lambda, zeta)?;
    Ok(ScheduleParams { zeta, lambda, delta: amplitude.ln_1p(), mu, case })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeRow {
    pub amplitude: f64,
    pub lower_minus_log: f64,
    pub upper_minus_log: f64,
    pub limit: f64,
}

impl ProbeRow {
    pub fn difference(&self) -> f64 {
        self.upper_minus_log - self.lower_minus_log
    }
}

/// Lower and duality upper bounds minus `ln A` on an increasing amplitude
/// grid, next to their common high-SNR limit.
pub fn convergence_probe(
    ch: &ChannelGains,
    alpha: f64,
    noise: &Noise,
    amplitudes: &[f64],
    search: &DualitySearch,
) -> Result<Vec<ProbeRow>> {
    if amplitudes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("amplitude grid must be increasing".into()));
    }
    let nu = optimize_nu(ch, alpha)?;
    let limit = asymptotic_intercept(ch, noise, nu.nu());
    amplitudes
        .iter()
        .map(|&a| {
            let budget = PowerBudget::new(ch, a, alpha)?;
            let lower = lower_bound_epi_with(&nu, ch, &budget, noise)?.value;
            let upper = upper_bound_duality_with(ch, &budget, noise, search, &nu)?.value;
            Ok(ProbeRow { amplitude: a, lower_minus_log: lower - a.ln(), upper_minus_log: upper - a.ln(), limit })
        })
        .collect()
}
