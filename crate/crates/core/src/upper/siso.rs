//! Upper bounds on the capacity of the scalar channel `Y = X + Z` with
//! `0 <= X <= peak`, `E[X] <= avg`, and the MISO bound obtained by dropping
//! the average constraint.

use std::path::Path;

use crate::channel::{ChannelGains, Noise, PowerBudget};
use crate::error::{Error, Result};
use crate::lower::{BoundEvaluation, BoundKind, Diagnostics, Witnesses};

/// Source of scalar-channel capacity upper bounds.
pub trait SisoProvider: Send + Sync {
    fn name(&self) -> &str;
    /// Upper bound in nats on the capacity with peak `peak`, mean `avg` and noise `sigma`.
    fn upper_bound(&self, peak: f64, avg: f64, sigma: f64) -> Result<f64>;
}

fn check_siso_args(peak: f64, avg: f64, sigma: f64) -> Result<()> {
    if !(peak > 0.0) || !peak.is_finite() {
        return Err(Error::Domain(format!("peak must be positive, got {peak}")));
    }
    if !(avg > 0.0 && avg <= peak) {
        return Err(Error::Domain(format!("average {avg} outside (0, {peak}]")));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidNoise(sigma));
    }
    Ok(())
}

/// `1/2 ln(1 + V/sigma^2)` with `V` the largest variance on `[0, peak]` with mean at most `avg`.
#[derive(Debug, Clone, Copy, Default)]
pub struct VarianceProvider;

impl VarianceProvider {
    pub fn max_variance(peak: f64, avg: f64) -> f64 {
        if avg >= 0.5 * peak {
            0.25 * peak * peak
        } else {
            let beta = avg / peak;
            beta * (1.0 - beta) * peak * peak
        }
    }
}

impl SisoProvider for VarianceProvider {
    fn name(&self) -> &str {
        "variance"
    }

    fn upper_bound(&self, peak: f64, avg: f64, sigma: f64) -> Result<f64> {
        check_siso_args(peak, avg, sigma)?;
        Ok(0.5 * (Self::max_variance(peak, avg) / (sigma * sigma)).ln_1p())
    }
}

/// Bound read from a table of `peak_over_sigma, capacity_nats` rows, linearly
/// interpolated. The rows describe the peak-limited channel, which also bounds
/// every tighter average constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedProvider {
    rows: Vec<(f64, f64)>,
}

impl TabulatedProvider {
    pub fn new(rows: Vec<(f64, f64)>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::Table("need at least two rows".into()));
        }
        if rows.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::Table("entries must be finite".into()));
        }
        if rows.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::Table("first column must be strictly increasing".into()));
        }
        Ok(TabulatedProvider { rows })
    }

    /// Parses comma-separated rows; blank lines and lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let parse =
                |s: &str| s.parse::<f64>().map_err(|e| Error::Table(format!("line {}: `{s}`: {e}", lineno + 1)));
            match fields.as_slice() {
                [x, y] => rows.push((parse(x)?, parse(y)?)),
                _ => {
                    return Err(Error::Table(format!("line {}: expected `peak_over_sigma, capacity_nats`", lineno + 1)))
                }
            }
        }
        Self::new(rows)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Table(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn interpolate(&self, x: f64) -> Result<f64> {
        let (first, last) = (self.rows[0].0, self.rows[self.rows.len() - 1].0);
        if !(x >= first && x <= last) {
            return Err(Error::OutOfRange { value: x, lo: first, hi: last });
        }
        let i = self.rows.partition_point(|(r, _)| *r <= x).clamp(1, self.rows.len() - 1);
        let (x0, y0) = self.rows[i - 1];
        let (x1, y1) = self.rows[i];
        Ok(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    }
}

impl SisoProvider for TabulatedProvider {
    fn name(&self) -> &str {
        "table"
    }

    fn upper_bound(&self, peak: f64, avg: f64, sigma: f64) -> Result<f64> {
        check_siso_args(peak, avg, sigma)?;
        self.interpolate(peak / sigma)
    }
}

/// Scalar-channel bound from the built-in variance provider.
pub fn siso_upper_bound(peak: f64, avg: f64, noise: &Noise) -> Result<f64> {
    VarianceProvider.upper_bound(peak, avg, noise.sigma())
}

pub fn upper_bound_siso_with(
    provider: &dyn SisoProvider,
    ch: &ChannelGains,
    budget: &PowerBudget,
    noise: &Noise,
) -> Result<BoundEvaluation> {
    let peak = ch.total() * budget.amplitude();
    Ok(BoundEvaluation {
        kind: BoundKind::UpperSiso,
        value: provider.upper_bound(peak, 0.5 * peak, noise.sigma())?,
        witnesses: Witnesses::default(),
        diagnostics: Diagnostics::default(),
    })
}

/// Capacity of the scalar channel with peak `s_nt A` and no average limit.
pub fn upper_bound_siso(ch: &ChannelGains, budget: &PowerBudget, noise: &Noise) -> Result<BoundEvaluation> {
    upper_bound_siso_with(&VarianceProvider, ch, budget, noise)
}
