//! Capacity lower bounds from the entropy power inequality.
//!
//! Below the threshold `alpha_th` the aggregate input is a concatenation of
//! truncated exponentials, one per interval `(s_{k-1} A, s_k A]`, whose
//! parameters come from a one-dimensional search over the mean `lambda` of the
//! modulating LED. At or above the threshold a uniform aggregate input is
//! admissible.

use std::f64::consts::{E, PI};

use serde::Serialize;

use crate::channel::{
    admissible_average_power, ChannelGains, InputVectorLaw, IntervalLaw, Noise, PowerBudget, PowerCheck,
};
use crate::error::{Error, Result};
use crate::numerics::roots::{geometric_weights, solve_a, solve_mu};
use crate::numerics::special::{kl_divergence, truncexp_entropy};

/// Smallest `alpha` accepted by the truncated-exponential machinery.
pub const MIN_ALPHA: f64 = 1e-6;
/// Inset applied to both ends of the open `lambda` interval.
pub const LAMBDA_INSET: f64 = 1e-9;
/// Step of the dense `lambda` grid.
pub const LAMBDA_GRID_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    LowerEpi,
    LowerUniform,
    UpperSiso,
    UpperVmax,
    UpperDuality,
}

impl BoundKind {
    pub const ALL: [BoundKind; 5] = [
        BoundKind::LowerEpi,
        BoundKind::LowerUniform,
        BoundKind::UpperSiso,
        BoundKind::UpperVmax,
        BoundKind::UpperDuality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::LowerEpi => "lower-epi",
            BoundKind::LowerUniform => "lower-uniform",
            BoundKind::UpperSiso => "upper-siso",
            BoundKind::UpperVmax => "upper-vmax",
            BoundKind::UpperDuality => "upper-duality",
        }
    }

    pub fn is_upper(self) -> bool {
        matches!(self, BoundKind::UpperSiso | BoundKind::UpperVmax | BoundKind::UpperDuality)
    }
}

impl std::str::FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| Error::Domain(format!("unknown bound `{s}`")))
    }
}

impl std::fmt::Display for BoundKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Optimizer witnesses attached to a bound value.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Witnesses {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate_gap: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Largest root-finder residual encountered for the reported witness.
    pub max_residual: f64,
    /// Objective evaluations spent by the optimizer.
    pub evaluations: usize,
}

/// One bound value in nats with its witnesses.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundEvaluation {
    pub kind: BoundKind,
    pub value: f64,
    pub witnesses: Witnesses,
    pub diagnostics: Diagnostics,
}

/// Open interval `(max{0, 1/2 + alpha - alpha_th}, min{1/2, alpha})` of
/// admissible `lambda` values.
pub fn lambda_interval(ch: &ChannelGains, alpha: f64) -> Result<(f64, f64)> {
    if ch.nt() < 2 {
        return Err(Error::MisoOnly);
    }
    if !(alpha >= MIN_ALPHA) {
        return Err(Error::Domain(format!("alpha = {alpha} below supported minimum {MIN_ALPHA}")));
    }
    let threshold = ch.alpha_threshold();
    if alpha >= threshold {
        return Err(Error::Regime(format!("alpha = {alpha} >= alpha_th = {threshold}; use the uniform-input bound")));
    }
    Ok((f64::max(0.0, 0.5 + alpha - threshold), f64::min(0.5, alpha)))
}

/// The objective evaluated at one `lambda`, with the quantities it is built from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NuPoint {
    pub lambda: f64,
    pub mu: f64,
    pub a: f64,
    pub p: Vec<f64>,
    pub value: f64,
    pub max_residual: f64,
}

/// `h_trunc(mu(lambda)) - D(p || h/s_nt)` with the full breakdown.
pub fn nu_point(ch: &ChannelGains, alpha: f64, lambda: f64) -> Result<NuPoint> {
    let (lo, hi) = lambda_interval(ch, alpha)?;
    if !(lambda >= lo && lambda <= hi) {
        return Err(Error::Domain(format!("lambda = {lambda} outside ({lo}, {hi})")));
    }
    let mu = solve_mu(lambda)?;
    let a = solve_a(ch, alpha - lambda + 1.0)?;
    let p = geometric_weights(ch, a.root);
    let value = truncexp_entropy(mu.root) - kl_divergence(&p, &ch.reference_law())?;
    Ok(NuPoint { lambda, mu: mu.root, a: a.root, p, value, max_residual: mu.residual.abs().max(a.residual.abs()) })
}

/// `1 - ln(mu/(1-e^{-mu})) - mu e^{-mu}/(1-e^{-mu}) - D(p || h/s_nt)` at one
/// `lambda`; always nonpositive.
pub fn nu_objective(ch: &ChannelGains, alpha: f64, lambda: f64) -> Result<f64> {
    nu_point(ch, alpha, lambda).map(|pt| pt.value)
}

/// Supremum of [`nu_objective`] over the `lambda` interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NuOptimum {
    pub alpha: f64,
    pub best: NuPoint,
    pub evaluations: usize,
    /// Golden-section value minus the dense-grid maximum (negative when the grid won).
    pub golden_vs_grid: f64,
}

impl NuOptimum {
    pub fn nu(&self) -> f64 {
        self.best.value
    }
}

fn golden_max(ch: &ChannelGains, alpha: f64, mut lo: f64, mut hi: f64, evaluations: &mut usize) -> Result<NuPoint> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = nu_point(ch, alpha, x1)?;
    let mut f2 = nu_point(ch, alpha, x2)?;
    *evaluations += 2;
    while hi - lo > 1e-11 {
        if f1.value < f2.value {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = nu_point(ch, alpha, x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = nu_point(ch, alpha, x1)?;
        }
        *evaluations += 1;
    }
    Ok(if f1.value >= f2.value { f1 } else { f2 })
}

/// Maximizes the `lambda` objective: golden-section over the inset interval,
/// checked against a dense grid that has the final word, then refined
/// around the best grid point.
pub fn optimize_nu(ch: &ChannelGains, alpha: f64) -> Result<NuOptimum> {
    let (lo, hi) = lambda_interval(ch, alpha)?;
    let lo = lo + LAMBDA_INSET;
    let hi = hi - LAMBDA_INSET;
    if !(hi > lo) {
        return Err(Error::Domain(format!("lambda interval collapsed at alpha = {alpha}")));
    }
    let mut evaluations = 0;
    let golden = golden_max(ch, alpha, lo, hi, &mut evaluations)?;

    let steps = ((hi - lo) / LAMBDA_GRID_STEP).ceil() as usize;
    let mut grid_best: Option<NuPoint> = None;
    for i in 0..=steps {
        let lambda = (lo + i as f64 * LAMBDA_GRID_STEP).min(hi);
        let pt = nu_point(ch, alpha, lambda)?;
        evaluations += 1;
        if grid_best.as_ref().is_none_or(|b| pt.value > b.value) {
            grid_best = Some(pt);
        }
    }
    let grid_best = grid_best.expect("grid has at least one point");
    let golden_vs_grid = golden.value - grid_best.value;

    let r_lo = (grid_best.lambda - LAMBDA_GRID_STEP).max(lo);
    let r_hi = (grid_best.lambda + LAMBDA_GRID_STEP).min(hi);
    let refined = if r_hi > r_lo { golden_max(ch, alpha, r_lo, r_hi, &mut evaluations)? } else { grid_best.clone() };

    let best =
        [golden, grid_best, refined].into_iter().max_by(|a, b| a.value.total_cmp(&b.value)).expect("three candidates");
    Ok(NuOptimum { alpha, best, evaluations, golden_vs_grid })
}

/// `1/2 ln(1 + A^2 s_nt^2 e^{2 nu} / (2 pi e sigma^2))`.
pub fn epi_value(ch: &ChannelGains, amplitude: f64, sigma: f64, nu: f64) -> f64 {
    let snr = (amplitude * ch.total() / sigma).powi(2) * (2.0 * nu).exp() / (2.0 * PI * E);
    0.5 * snr.ln_1p()
}

/// EPI lower bound using a precomputed `lambda` optimum (it does not depend on `A` or `sigma`).
pub fn lower_bound_epi_with(
    optimum: &NuOptimum,
    ch: &ChannelGains,
    budget: &PowerBudget,
    noise: &Noise,
) -> Result<BoundEvaluation> {
    if (optimum.alpha - budget.alpha()).abs() > 0.0 {
        return Err(Error::Domain("lambda optimum was computed for a different alpha".into()));
    }
    let best = &optimum.best;
    Ok(BoundEvaluation {
        kind: BoundKind::LowerEpi,
        value: epi_value(ch, budget.amplitude(), noise.sigma(), best.value),
        witnesses: Witnesses {
            lambda: Some(best.lambda),
            mu: Some(best.mu),
            a: Some(best.a),
            p: Some(best.p.clone()),
            ..Witnesses::default()
        },
        diagnostics: Diagnostics { max_residual: best.max_residual, evaluations: optimum.evaluations },
    })
}

/// Lower bound for `alpha < alpha_th` with a truncated-exponential mixture input.
pub fn lower_bound_epi(ch: &ChannelGains, budget: &PowerBudget, noise: &Noise) -> Result<BoundEvaluation> {
    let optimum = optimize_nu(ch, budget.alpha())?;
    lower_bound_epi_with(&optimum, ch, budget, noise)
}

/// Lower bound for `alpha >= alpha_th` with a uniform aggregate input.
pub fn lower_bound_uniform(ch: &ChannelGains, budget: &PowerBudget, noise: &Noise) -> Result<BoundEvaluation> {
    let threshold = ch.alpha_threshold();
    if budget.alpha() < threshold {
        return Err(Error::Regime(format!(
            "alpha = {} < alpha_th = {threshold}: the uniform input exceeds the average budget",
            budget.alpha()
        )));
    }
    Ok(BoundEvaluation {
        kind: BoundKind::LowerUniform,
        value: epi_value(ch, budget.amplitude(), noise.sigma(), 0.0),
        witnesses: Witnesses { p: Some(ch.reference_law()), ..Witnesses::default() },
        diagnostics: Diagnostics::default(),
    })
}

/// One piece of a piecewise law on the aggregate input: mass `mass` spread on
/// `[lo, hi]` with density proportional to `exp(-rate (x - lo))`
/// (`rate = 0` is uniform).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
    pub rate: f64,
}

/// Law of the aggregate input built from `lambda`: on `(s_{k-1} A, s_k A]` the
/// density is `p_k/(h_k A) * mu/(1-e^{-mu}) * exp(-mu (x - s_{k-1} A)/(h_k A))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncExpMixtureDensity {
    pub channel: ChannelGains,
    pub amplitude: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub mu: f64,
    pub a: f64,
    pub p: Vec<f64>,
}

impl TruncExpMixtureDensity {
    pub fn pdf(&self, x: f64) -> f64 {
        let amp = self.amplitude;
        let ch = &self.channel;
        if !(0.0..=ch.total() * amp).contains(&x) {
            return 0.0;
        }
        let k = ch.interval_index(x, amp);
        let h = ch.gains()[k - 1];
        let norm = self.mu / (-(-self.mu).exp_m1());
        self.p[k - 1] / (h * amp) * norm * (-self.mu * (x - ch.cumulative()[k - 1] * amp) / (h * amp)).exp()
    }

    pub fn segments(&self) -> Vec<Segment> {
        let amp = self.amplitude;
        let s = self.channel.cumulative();
        self.channel
            .gains()
            .iter()
            .enumerate()
            .map(|(i, h)| Segment { lo: s[i] * amp, hi: s[i + 1] * amp, mass: self.p[i], rate: self.mu / (h * amp) })
            .collect()
    }

    /// `sum_k p_k (k - 1) - (alpha - lambda)`.
    pub fn choice_residual(&self) -> f64 {
        let load: f64 = self.p.iter().enumerate().map(|(i, p)| i as f64 * p).sum();
        load - (self.alpha - self.lambda)
    }

    /// The law in canonical vector form (truncated exponential on the modulating LED).
    pub fn to_vector_law(&self) -> InputVectorLaw {
        InputVectorLaw {
            amplitude: self.amplitude,
            interval_probs: self.p.clone(),
            levels: vec![IntervalLaw::TruncExp { rate: self.mu }; self.channel.nt()],
        }
    }

    pub fn power_check(&self) -> Result<PowerCheck> {
        let budget = PowerBudget::new(&self.channel, self.amplitude, self.alpha)?;
        admissible_average_power(&self.to_vector_law(), &self.channel, &budget)
    }

    /// `-D(p || h/s_nt) + ln(s_nt A) + h_trunc(mu)`.
    pub fn differential_entropy(&self) -> f64 {
        let kl = kl_divergence(&self.p, &self.channel.reference_law()).unwrap_or(f64::INFINITY);
        -kl + (self.channel.total() * self.amplitude).ln() + truncexp_entropy(self.mu)
    }
}

/// Builds the truncated-exponential mixture for one `lambda`.
pub fn build_density(ch: &ChannelGains, budget: &PowerBudget, lambda: f64) -> Result<TruncExpMixtureDensity> {
    let pt = nu_point(ch, budget.alpha(), lambda)?;
    Ok(TruncExpMixtureDensity {
        channel: ch.clone(),
        amplitude: budget.amplitude(),
        alpha: budget.alpha(),
        lambda,
        mu: pt.mu,
        a: pt.a,
        p: pt.p,
    })
}
