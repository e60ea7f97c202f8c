//! Independent numerical checks: exact mutual information of concrete input
//! laws, a brute-force variance search, and the bound-ordering harness.

pub mod bruteforce;
pub mod density;

pub use bruteforce::{bruteforce_vmax, BruteForceVmax};
pub use density::{
    log_output_density, monte_carlo_mutual_information, mutual_information, output_density, AggregateLaw, MIEstimate,
};

use serde::Serialize;

use crate::channel::{ChannelGains, Noise, PowerBudget};
use crate::error::{Error, Result};
use crate::lower::{build_density, lower_bound_epi_with, lower_bound_uniform, optimize_nu, BoundKind, NuOptimum};
use crate::upper::duality::{upper_bound_duality_with, DualitySearch};
use crate::upper::siso::upper_bound_siso;
use crate::upper::vmax::{vmax, VmaxResult};
use crate::upper::vmax_evaluation;

/// Default slack allowed in ordering checks, in nats.
pub const SANDWICH_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichOptions {
    pub search: DualitySearch,
    pub mi_tolerance: f64,
    pub tolerance: f64,
    /// Test hook: adds the offset to one bound before the ordering checks.
    #[serde(skip)]
    pub tamper: Option<(BoundKind, f64)>,
}

impl Default for SandwichOptions {
    fn default() -> Self {
        SandwichOptions {
            search: DualitySearch::default(),
            mi_tolerance: 1e-9,
            tolerance: SANDWICH_TOLERANCE,
            tamper: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichRow {
    pub amplitude: f64,
    /// True when the bounds were computed on the equivalent single-LED channel.
    pub reduced: bool,
    pub lower: Vec<(BoundKind, f64)>,
    pub mutual_information: MIEstimate,
    pub upper: Vec<(BoundKind, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub amplitude: f64,
    pub smaller: String,
    pub larger: String,
    /// How far `smaller` exceeds `larger`.
    pub excess: f64,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "A = {}: {} exceeds {} by {:e} nats", self.amplitude, self.smaller, self.larger, self.excess)
    }
}

enum Route {
    /// Truncated-exponential input and all three upper bounds.
    Exponential(NuOptimum),
    /// Uniform input; the average constraint does not bind at high SNR.
    Uniform,
}

/// Precomputed, amplitude-independent state for sweeping the harness.
pub struct SandwichContext {
    channel: ChannelGains,
    alpha: f64,
    noise: Noise,
    reduced: bool,
    route: Route,
    variance: VmaxResult,
    options: SandwichOptions,
}

impl SandwichContext {
    pub fn new(ch: &ChannelGains, alpha: f64, noise: &Noise, options: SandwichOptions) -> Result<Self> {
        PowerBudget::new(ch, 1.0, alpha)?;
        let reduced = alpha >= 0.5 * ch.nt() as f64;
        let (channel, alpha) = if reduced {
            // A single LED with gain s_nt and peak A; the mean A s_nt / 2 of the
            // uniform input is always affordable.
            (ChannelGains::new(&[ch.total()])?, 0.5)
        } else {
            (ch.clone(), alpha)
        };
        let route = if !reduced && alpha < channel.alpha_threshold() {
            if channel.nt() < 2 {
                return Err(Error::MisoOnly);
            }
            Route::Exponential(optimize_nu(&channel, alpha)?)
        } else {
            Route::Uniform
        };
        let variance = vmax(&channel, &PowerBudget::new(&channel, 1.0, alpha)?);
        Ok(SandwichContext { channel, alpha, noise: *noise, reduced, route, variance, options })
    }

    pub fn point(&self, amplitude: f64) -> Result<SandwichRow> {
        let ch = &self.channel;
        let noise = &self.noise;
        let budget = PowerBudget::new(ch, amplitude, self.alpha)?;
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        let law = match &self.route {
            Route::Exponential(nu) => {
                lower.push((BoundKind::LowerEpi, lower_bound_epi_with(nu, ch, &budget, noise)?.value));
                let ub = upper_bound_duality_with(ch, &budget, noise, &self.options.search, nu)?;
                upper.push((BoundKind::UpperDuality, ub.value));
                AggregateLaw::from_density(&build_density(ch, &budget, nu.best.lambda)?)
            }
            Route::Uniform => {
                lower.push((BoundKind::LowerUniform, lower_bound_uniform(ch, &budget, noise)?.value));
                AggregateLaw::uniform(0.0, ch.total() * amplitude)?
            }
        };
        upper.push((BoundKind::UpperSiso, upper_bound_siso(ch, &budget, noise)?.value));
        upper.push((BoundKind::UpperVmax, vmax_evaluation(&self.variance, amplitude, noise.sigma()).value));
        if let Some((kind, offset)) = self.options.tamper {
            for (k, v) in lower.iter_mut().chain(upper.iter_mut()) {
                if *k == kind {
                    *v += offset;
                }
            }
        }
        let mutual_information = mutual_information(&law, noise, self.options.mi_tolerance)?;
        Ok(SandwichRow { amplitude, reduced: self.reduced, lower, mutual_information, upper })
    }

    pub fn violations(&self, row: &SandwichRow) -> Vec<Violation> {
        let tol = self.options.tolerance;
        let mi = row.mutual_information.value;
        let mut out = Vec::new();
        let mut check = |smaller: String, a: f64, larger: String, b: f64| {
            if !(a.is_finite() && b.is_finite()) || a > b + tol {
                out.push(Violation { amplitude: row.amplitude, smaller, larger, excess: a - b });
            }
        };
        for (k, v) in &row.lower {
            check(k.name().to_string(), *v, "mutual-information".into(), mi);
        }
        for (k, v) in &row.upper {
            check("mutual-information".into(), mi, k.name().to_string(), *v);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    pub rows: Vec<SandwichRow>,
    pub violations: Vec<Violation>,
}

/// Evaluates every applicable bound and the exact mutual information of the
/// bound's own input on each amplitude, listing ordering violations.
pub fn sandwich_report(
    ch: &ChannelGains,
    alpha: f64,
    noise: &Noise,
    amplitudes: &[f64],
    options: SandwichOptions,
) -> Result<SandwichReport> {
    let ctx = SandwichContext::new(ch, alpha, noise, options)?;
    let mut rows = Vec::with_capacity(amplitudes.len());
    let mut violations = Vec::new();
    for &a in amplitudes {
        let row = ctx.point(a)?;
        violations.extend(ctx.violations(&row));
        rows.push(row);
    }
    Ok(SandwichReport { rows, violations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tamper_is_detected() {
        let ch = ChannelGains::new(&[3.0, 2.0, 1.5]).unwrap();
        let noise = Noise::new(1.0).unwrap();
        let amps = [1.0, 10.0];
        let clean = sandwich_report(&ch, 0.6, &noise, &amps, SandwichOptions::default()).unwrap();
        assert!(clean.violations.is_empty(), "{:?}", clean.violations);
        let opts = SandwichOptions { tamper: Some((BoundKind::UpperVmax, -10.0)), ..SandwichOptions::default() };
        let bad = sandwich_report(&ch, 0.6, &noise, &amps, opts).unwrap();
        assert_eq!(bad.violations.len(), 2);
    }

    #[test]
    fn uniform_and_reduced_routes() {
        let ch = ChannelGains::new(&[3.0, 2.0, 1.5]).unwrap();
        let noise = Noise::new(1.0).unwrap();
        let mid = sandwich_report(&ch, 1.3, &noise, &[0.5, 5.0], SandwichOptions::default()).unwrap();
        assert!(mid.violations.is_empty());
        assert_eq!(mid.rows[0].lower[0].0, BoundKind::LowerUniform);
        let high = sandwich_report(&ch, 2.0, &noise, &[0.5, 5.0], SandwichOptions::default()).unwrap();
        assert!(high.violations.is_empty());
        assert!(high.rows[0].reduced);
    }
}
