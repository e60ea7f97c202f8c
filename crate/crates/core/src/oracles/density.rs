//! Output density and mutual information of piecewise aggregate-input laws.

use std::f64::consts::{E, PI};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::channel::Noise;
use crate::error::{Error, Result};
use crate::lower::{Segment, TruncExpMixtureDensity};
use crate::numerics::quad::{integrate, DEFAULT_MAX_PANELS};
use crate::numerics::special::{log_qfunc, logsumexp, normal_log_pdf, qfunc};
use crate::upper::vmax::DiscreteInputLaw;

/// Aggregate-input law made of exponential/uniform segments and atoms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateLaw {
    pub segments: Vec<Segment>,
    /// `(location, mass)` pairs.
    pub atoms: Vec<(f64, f64)>,
}

impl AggregateLaw {
    pub fn point(x: f64) -> Self {
        AggregateLaw { segments: Vec::new(), atoms: vec![(x, 1.0)] }
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::Domain(format!("empty uniform support [{lo}, {hi}]")));
        }
        Ok(AggregateLaw { segments: vec![Segment { lo, hi, mass: 1.0, rate: 0.0 }], atoms: Vec::new() })
    }

    pub fn from_density(d: &TruncExpMixtureDensity) -> Self {
        AggregateLaw { segments: d.segments(), atoms: Vec::new() }
    }

    pub fn from_discrete(law: &DiscreteInputLaw) -> Self {
        let atoms = law.atoms.iter().zip(&law.masses).filter(|(_, m)| **m > 0.0).map(|(a, m)| (*a, *m)).collect();
        AggregateLaw { segments: Vec::new(), atoms }
    }

    fn support(&self) -> (f64, f64) {
        let lo = self.segments.iter().map(|s| s.lo).chain(self.atoms.iter().map(|a| a.0)).fold(f64::INFINITY, f64::min);
        let hi =
            self.segments.iter().map(|s| s.hi).chain(self.atoms.iter().map(|a| a.0)).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

/// `ln(Q(u1) - Q(u2))` for `u1 < u2`, choosing the form that avoids cancellation.
fn log_q_difference(u1: f64, u2: f64) -> f64 {
    if u1 >= 0.0 {
        let (l1, l2) = (log_qfunc(u1), log_qfunc(u2));
        l1 + (-(l2 - l1).exp_m1()).ln()
    } else if u2 <= 0.0 {
        let (l1, l2) = (log_qfunc(-u2), log_qfunc(-u1));
        l1 + (-(l2 - l1).exp_m1()).ln()
    } else {
        (-(qfunc(u2) + qfunc(-u1))).ln_1p()
    }
}

/// Log of one segment's contribution to the output density at `y`.
fn log_segment_term(seg: &Segment, sigma: f64, y: f64) -> f64 {
    let width = seg.hi - seg.lo;
    if seg.mass <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if width <= 0.0 {
        return seg.mass.ln() + normal_log_pdf((y - seg.lo) / sigma) - sigma.ln();
    }
    let b = seg.rate;
    let log_norm = if b > 0.0 { b.ln() - (-(-b * width).exp_m1()).ln() } else { -width.ln() };
    let shift = b * sigma * sigma;
    let u1 = (seg.lo - y + shift) / sigma;
    let u2 = (seg.hi - y + shift) / sigma;
    seg.mass.ln() + log_norm - b * (y - seg.lo) + 0.5 * shift * b + log_q_difference(u1, u2)
}

/// `ln f_Y(y)` for `Y = X + Z`, `Z ~ N(0, sigma^2)`.
pub fn log_output_density(law: &AggregateLaw, noise: &Noise, y: f64) -> f64 {
    let sigma = noise.sigma();
    let mut terms: Vec<f64> = law.segments.iter().map(|s| log_segment_term(s, sigma, y)).collect();
    terms.extend(
        law.atoms.iter().filter(|(_, m)| *m > 0.0).map(|(x, m)| m.ln() + normal_log_pdf((y - x) / sigma) - sigma.ln()),
    );
    logsumexp(&terms)
}

pub fn output_density(law: &AggregateLaw, noise: &Noise, y: f64) -> f64 {
    log_output_density(law, noise, y).exp()
}

fn integration_breakpoints(law: &AggregateLaw, sigma: f64) -> Vec<f64> {
    let (lo, hi) = law.support();
    let (a, b) = (lo - 10.0 * sigma, hi + 10.0 * sigma);
    let mut pts = vec![a, b];
    for s in &law.segments {
        pts.extend([s.lo, s.hi]);
    }
    for (x, _) in &law.atoms {
        pts.extend([*x - 3.0 * sigma, *x, *x + 3.0 * sigma]);
    }
    pts.retain(|p| *p >= a && *p <= b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MIEstimate {
    pub value: f64,
    pub estimated_error: f64,
}

/// `h(Y) - 1/2 ln(2 pi e sigma^2)` with `h(Y)` by adaptive quadrature over
/// `[min - 10 sigma, max + 10 sigma]`.
pub fn mutual_information(law: &AggregateLaw, noise: &Noise, tol: f64) -> Result<MIEstimate> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let sigma = noise.sigma();
    let breaks = integration_breakpoints(law, sigma);
    let integrand = |y: f64| {
        let lf = log_output_density(law, noise, y);
        if lf == f64::NEG_INFINITY {
            0.0
        } else {
            -lf.exp() * lf
        }
    };
    let h = integrate(integrand, &breaks, tol, DEFAULT_MAX_PANELS)?;
    let noise_entropy = 0.5 * (2.0 * PI * E * sigma * sigma).ln();
    Ok(MIEstimate { value: (h.value - noise_entropy).max(0.0), estimated_error: h.abs_error })
}

/// Differential entropy of the input law itself (segments only), by quadrature.
pub fn input_entropy(law: &AggregateLaw, tol: f64) -> Result<f64> {
    if !law.atoms.is_empty() {
        return Err(Error::Domain("a law with atoms has no differential entropy".into()));
    }
    let mut total = 0.0;
    for s in &law.segments {
        let width = s.hi - s.lo;
        if width <= 0.0 || s.mass <= 0.0 {
            continue;
        }
        let log_norm = if s.rate > 0.0 { s.rate.ln() - (-(-s.rate * width).exp_m1()).ln() } else { -width.ln() };
        let integrand = |x: f64| {
            let lf = s.mass.ln() + log_norm - s.rate * (x - s.lo);
            -lf.exp() * lf
        };
        total += integrate(integrand, &[s.lo, s.hi], tol, DEFAULT_MAX_PANELS)?.value;
    }
    Ok(total)
}

fn sample_input<R: Rng>(law: &AggregateLaw, rng: &mut R) -> f64 {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for s in &law.segments {
        acc += s.mass;
        if u < acc {
            let v: f64 = rng.gen();
            let width = s.hi - s.lo;
            return if s.rate > 0.0 {
                s.lo - (v * (-s.rate * width).exp_m1()).ln_1p() / s.rate
            } else {
                s.lo + v * width
            };
        }
    }
    for (x, m) in &law.atoms {
        acc += m;
        if u < acc {
            return *x;
        }
    }
    // Rounding left a sliver of mass: fall back to the last piece.
    law.atoms.last().map(|a| a.0).or_else(|| law.segments.last().map(|s| s.hi)).unwrap_or(0.0)
}

/// Monte-Carlo estimate of the mutual information with its standard error.
pub fn monte_carlo_mutual_information(
    law: &AggregateLaw,
    noise: &Noise,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if samples < 2 {
        return Err(Error::Domain("need at least two samples".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = noise.sigma();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let z: f64 = rng.sample(StandardNormal);
        let y = sample_input(law, &mut rng) + sigma * z;
        let v = -log_output_density(law, noise, y);
        sum += v;
        sum_sq += v * v;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok((mean - 0.5 * (2.0 * PI * E * sigma * sigma).ln(), (var / n).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::special::normal_pdf;

    #[test]
    fn point_mass_gives_gaussian_and_zero_information() {
        let noise = Noise::new(0.7).unwrap();
        let law = AggregateLaw::point(0.0);
        for y in [-2.0, 0.0, 0.3, 5.0] {
            let want = normal_pdf(y / 0.7) / 0.7;
            assert!((output_density(&law, &noise, y) - want).abs() < 1e-15);
        }
        assert!(mutual_information(&law, &noise, 1e-10).unwrap().value < 1e-9);
    }

    #[test]
    fn two_point_midpoint() {
        let noise = Noise::new(1.0).unwrap();
        let c = 2.0;
        let law = AggregateLaw { segments: vec![], atoms: vec![(0.0, 0.5), (c, 0.5)] };
        assert!((output_density(&law, &noise, c / 2.0) - normal_pdf(c / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn segment_density_matches_numeric_convolution() {
        let noise = Noise::new(0.4).unwrap();
        let seg = Segment { lo: 1.0, hi: 2.5, mass: 1.0, rate: 1.3 };
        let law = AggregateLaw { segments: vec![seg], atoms: vec![] };
        let norm = 1.3 / (1.0 - (-1.3f64 * 1.5).exp());
        for y in [-1.0, 0.8, 1.7, 3.0, 6.0] {
            let direct = integrate(
                |x| norm * (-1.3 * (x - 1.0)).exp() * normal_pdf((y - x) / 0.4) / 0.4,
                &[1.0, 2.5],
                1e-14,
                DEFAULT_MAX_PANELS,
            )
            .unwrap()
            .value;
            let got = output_density(&law, &noise, y);
            assert!((got - direct).abs() <= 1e-12 + 1e-10 * direct, "y = {y}: {got} vs {direct}");
        }
    }

    #[test]
    fn steep_segments_stay_finite() {
        let noise = Noise::new(1.0).unwrap();
        let seg = Segment { lo: 0.0, hi: 1e-3, mass: 1.0, rate: 5e3 };
        let law = AggregateLaw { segments: vec![seg], atoms: vec![] };
        let v = log_output_density(&law, &noise, 40.0);
        assert!(v.is_finite());
        assert!((v - normal_log_pdf(40.0)).abs() < 0.1);
    }

    #[test]
    fn density_integrates_to_one() {
        let noise = Noise::new(1.0).unwrap();
        let law = AggregateLaw {
            segments: vec![
                Segment { lo: 0.0, hi: 3.0, mass: 0.6, rate: 0.8 },
                Segment { lo: 3.0, hi: 5.0, mass: 0.3, rate: 0.0 },
            ],
            atoms: vec![(5.0, 0.1)],
        };
        let mass =
            integrate(|y| output_density(&law, &noise, y), &[-10.0, 0.0, 3.0, 5.0, 15.0], 1e-12, DEFAULT_MAX_PANELS)
                .unwrap()
                .value;
        assert!((mass - 1.0).abs() < 1e-8);
    }
}
