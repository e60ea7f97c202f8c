//! Channel gains, power budgets, regime classification and the
//! energy-efficient correspondence between the aggregate input
//! `xbar = h . x` and the LED intensity vector.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::special::truncexp_mean;

/// Relative slack used when comparing a consumed average power to the budget.
pub const POWER_TOLERANCE: f64 = 1e-9;

/// LED gains sorted so that `h_1 >= h_2 >= ... >= h_nt > 0`, with cumulative
/// sums `s_0 = 0, s_k = s_{k-1} + h_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelGains {
    gains: Vec<f64>,
    cumulative: Vec<f64>,
}

impl ChannelGains {
    /// Builds a channel from arbitrary-order positive gains (sorted here).
    pub fn new(gains: &[f64]) -> Result<Self> {
        if gains.is_empty() {
            return Err(Error::EmptyGains);
        }
        if let Some((index, &value)) = gains.iter().enumerate().find(|(_, g)| !(**g > 0.0) || !g.is_finite()) {
            return Err(Error::NonpositiveGain { index, value });
        }
        let mut sorted = gains.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let mut cumulative = Vec::with_capacity(sorted.len() + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for g in &sorted {
            acc += g;
            cumulative.push(acc);
        }
        Ok(Self { gains: sorted, cumulative })
    }

    pub fn nt(&self) -> usize {
        self.gains.len()
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    /// `s_0, ..., s_nt`.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// `s_nt`, the aggregate gain when every LED is at full intensity.
    pub fn total(&self) -> f64 {
        self.cumulative[self.nt()]
    }

    /// The probability vector `h / s_nt`.
    pub fn reference_law(&self) -> Vec<f64> {
        let total = self.total();
        self.gains.iter().map(|h| h / total).collect()
    }

    /// `1/2 + (1/s_nt) sum_k h_k (k - 1)`: the smallest `alpha` for which a
    /// uniform aggregate input on `[0, s_nt A]` is admissible.
    pub fn alpha_threshold(&self) -> f64 {
        let weighted: f64 = self.gains.iter().enumerate().map(|(i, h)| h * i as f64).sum();
        0.5 + weighted / self.total()
    }

    /// 1-based interval index `k` of `xbar`: index 1 owns `[0, s_1 A]`, index
    /// `k > 1` owns `(s_{k-1} A, s_k A]`. Ties resolve to the lower index.
    pub fn interval_index(&self, xbar: f64, amplitude: f64) -> usize {
        (1..=self.nt()).find(|&k| xbar <= self.cumulative[k] * amplitude).unwrap_or(self.nt())
    }
}

/// Shorthand for [`ChannelGains::new`].
pub fn make_channel(gains: &[f64]) -> Result<ChannelGains> {
    ChannelGains::new(gains)
}

/// Peak amplitude `A` per LED and the ratio `alpha = E / A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerBudget {
    amplitude: f64,
    alpha: f64,
}

impl PowerBudget {
    /// Requires `A > 0` and `0 < alpha <= nt`.
    pub fn new(ch: &ChannelGains, amplitude: f64, alpha: f64) -> Result<Self> {
        if !(amplitude > 0.0) || !amplitude.is_finite() {
            return Err(Error::InvalidBudget(format!("amplitude must be positive, got {amplitude}")));
        }
        let nt = ch.nt() as f64;
        if !(alpha > 0.0 && alpha <= nt) {
            return Err(Error::InvalidBudget(format!("alpha = {alpha} outside (0, {nt}]")));
        }
        Ok(Self { amplitude, alpha })
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `E = alpha A`.
    pub fn average(&self) -> f64 {
        self.alpha * self.amplitude
    }

    /// Same ratio, different amplitude.
    pub fn with_amplitude(&self, amplitude: f64) -> Result<Self> {
        if !(amplitude > 0.0) || !amplitude.is_finite() {
            return Err(Error::InvalidBudget(format!("amplitude must be positive, got {amplitude}")));
        }
        Ok(Self { amplitude, ..*self })
    }
}

/// Standard deviation of the additive Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Noise(f64);

impl Noise {
    pub fn new(sigma: f64) -> Result<Self> {
        if sigma > 0.0 && sigma.is_finite() {
            Ok(Self(sigma))
        } else {
            Err(Error::InvalidNoise(sigma))
        }
    }

    pub fn sigma(&self) -> f64 {
        self.0
    }
}

/// Which constraints shape the admissible aggregate inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RegimeClass {
    /// No peak constraint: a SISO channel with average budget `h_1 E`.
    AverageOnly { siso_average: f64 },
    /// `alpha >= nt/2`: a SISO channel with peak `s_nt A` (average `s_nt A / 2` inactive).
    PeakDominant { siso_peak: f64, siso_average: f64 },
    /// `alpha < nt/2`: both constraints are active.
    BothActive,
}

pub fn classify_regime(ch: &ChannelGains, budget: &PowerBudget) -> RegimeClass {
    if budget.alpha() < 0.5 * ch.nt() as f64 {
        RegimeClass::BothActive
    } else {
        let peak = ch.total() * budget.amplitude();
        RegimeClass::PeakDominant { siso_peak: peak, siso_average: 0.5 * peak }
    }
}

/// Regime of a channel with only an average budget `average` (no peak limit).
pub fn classify_average_only(ch: &ChannelGains, average: f64) -> RegimeClass {
    RegimeClass::AverageOnly { siso_average: ch.gains()[0] * average }
}

/// Law of the modulating LED's intensity on `[0, A]`, given the interval index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum IntervalLaw {
    /// Deterministic level.
    Point(f64),
    /// Uniform on `[0, A]`.
    Uniform,
    /// Density proportional to `exp(-rate x / A)` on `[0, A]`.
    TruncExp { rate: f64 },
    /// Finitely many `(level, mass)` pairs.
    Discrete(Vec<(f64, f64)>),
}

/// A law on the intensity vector in canonical energy-efficient form: with
/// probability `p_k` LEDs `1..k-1` are at `A`, LED `k` follows `levels[k-1]`,
/// and the remaining LEDs are off.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputVectorLaw {
    pub amplitude: f64,
    pub interval_probs: Vec<f64>,
    pub levels: Vec<IntervalLaw>,
}

impl InputVectorLaw {
    /// `E[X_k | U = k]` for the modulating LED.
    fn level_mean(&self, k: usize) -> f64 {
        let a = self.amplitude;
        match &self.levels[k - 1] {
            IntervalLaw::Point(x) => *x,
            IntervalLaw::Uniform => 0.5 * a,
            IntervalLaw::TruncExp { rate } => a * truncexp_mean(*rate),
            IntervalLaw::Discrete(atoms) => atoms.iter().map(|(x, m)| x * m).sum(),
        }
    }

    fn validate(&self, ch: &ChannelGains) -> Result<()> {
        let nt = ch.nt();
        let malformed = |msg: String| Err(Error::MalformedLaw(msg));
        if self.interval_probs.len() != nt || self.levels.len() != nt {
            return malformed(format!(
                "expected {nt} intervals, got {} probabilities and {} level laws",
                self.interval_probs.len(),
                self.levels.len()
            ));
        }
        if self.interval_probs.iter().any(|p| !(*p >= 0.0)) {
            return malformed("interval probabilities must be nonnegative".into());
        }
        let total: f64 = self.interval_probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return malformed(format!("interval probabilities sum to {total}"));
        }
        let a = self.amplitude;
        let in_range = |x: f64| (0.0..=a).contains(&x);
        for (i, law) in self.levels.iter().enumerate() {
            let k = i + 1;
            let active = self.interval_probs[i] > 0.0;
            // For k > 1 the interval is left-open: a zero level belongs to interval k - 1.
            let zero_forbidden = k > 1 && active;
            match law {
                IntervalLaw::Point(x) => {
                    if !in_range(*x) || (zero_forbidden && *x == 0.0) {
                        return malformed(format!("level {x} outside the support of interval {k}"));
                    }
                }
                IntervalLaw::Uniform => {}
                IntervalLaw::TruncExp { rate } => {
                    if !(*rate > 0.0) || !rate.is_finite() {
                        return malformed(format!("truncated exponential rate {rate} in interval {k}"));
                    }
                }
                IntervalLaw::Discrete(atoms) => {
                    let mass: f64 = atoms.iter().map(|(_, m)| m).sum();
                    if atoms.iter().any(|(x, m)| !in_range(*x) || !(*m >= 0.0)) || (mass - 1.0).abs() > 1e-9 {
                        return malformed(format!("discrete level law of interval {k} is not a law on [0, A]"));
                    }
                    if zero_forbidden && atoms.iter().any(|(x, m)| *x == 0.0 && *m > 0.0) {
                        return malformed(format!("interval {k} places mass on its excluded left endpoint"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Outcome of an average-power admissibility check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerCheck {
    pub consumed: f64,
    pub budget: f64,
    pub admissible: bool,
}

/// Average input power `sum_k p_k ((E[xbar | U=k] - A s_{k-1}) / h_k + (k-1) A)`
/// of a canonical law, compared to `alpha A`.
pub fn admissible_average_power(law: &InputVectorLaw, ch: &ChannelGains, budget: &PowerBudget) -> Result<PowerCheck> {
    law.validate(ch)?;
    let a = budget.amplitude();
    if (law.amplitude - a).abs() > 1e-12 * a {
        return Err(Error::MalformedLaw(format!("law amplitude {} differs from budget amplitude {a}", law.amplitude)));
    }
    let s = ch.cumulative();
    let consumed: f64 = (1..=ch.nt())
        .map(|k| {
            let h = ch.gains()[k - 1];
            let cond_mean_xbar = s[k - 1] * a + h * law.level_mean(k);
            law.interval_probs[k - 1] * ((cond_mean_xbar - a * s[k - 1]) / h + (k - 1) as f64 * a)
        })
        .sum();
    let limit = budget.average();
    Ok(PowerCheck { consumed, budget: limit, admissible: consumed <= limit * (1.0 + POWER_TOLERANCE) })
}

/// Minimum-energy intensity vector producing aggregate input `xbar`: LEDs
/// before the interval index saturate at `A`, the indexed LED modulates, the
/// rest are off.
pub fn lift_scalar_to_vector(xbar: f64, ch: &ChannelGains, budget: &PowerBudget) -> Result<Vec<f64>> {
    let a = budget.amplitude();
    let peak = ch.total() * a;
    if !(0.0..=peak).contains(&xbar) {
        return Err(Error::OutOfRange { value: xbar, lo: 0.0, hi: peak });
    }
    let k = ch.interval_index(xbar, a);
    let s = ch.cumulative();
    let mut x = vec![0.0; ch.nt()];
    x[..k - 1].iter_mut().for_each(|v| *v = a);
    x[k - 1] = ((xbar - a * s[k - 1]) / ch.gains()[k - 1]).clamp(0.0, a);
    Ok(x)
}
