//! Maximum variance of the aggregate input.
//!
//! Over laws supported on `{0, s_1 A, ..., s_nt A}` with masses `q_k`, the
//! variance `A^2 (sum s_k^2 q_k - (sum s_k q_k)^2)` is a concave quadratic on
//! the polytope `{q >= 0, sum q_k <= 1, sum k q_k <= alpha}`. The maximum is
//! found by golden-section over `m = sum s_k q_k`; for fixed `m` the remaining
//! problem is a linear program solved by enumerating bases.

use serde::Serialize;

use crate::channel::{ChannelGains, PowerBudget};
use crate::error::{Error, Result};
use crate::numerics::polytope::{capped_simplex_vertices, max_linear};

/// Law of the aggregate input on finitely many atoms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteInputLaw {
    pub atoms: Vec<f64>,
    pub masses: Vec<f64>,
}

impl DiscreteInputLaw {
    pub fn new(atoms: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if atoms.len() != masses.len() {
            return Err(Error::DimensionMismatch(atoms.len(), masses.len()));
        }
        if masses.iter().any(|m| !(*m >= 0.0)) || atoms.iter().any(|a| !a.is_finite()) {
            return Err(Error::MalformedLaw("atoms must be finite and masses nonnegative".into()));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::MalformedLaw(format!("masses sum to {total}")));
        }
        Ok(DiscreteInputLaw { atoms, masses })
    }

    /// Law with masses `q_0..q_nt` on `{0, s_1 A, ..., s_nt A}`.
    pub fn on_cumulative_gains(ch: &ChannelGains, amplitude: f64, q: &[f64]) -> Result<Self> {
        if q.len() != ch.nt() + 1 {
            return Err(Error::DimensionMismatch(q.len(), ch.nt() + 1));
        }
        let atoms = ch.cumulative().iter().map(|s| s * amplitude).collect();
        Self::new(atoms, q.to_vec())
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().zip(&self.masses).map(|(a, m)| a * m).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.atoms.iter().zip(&self.masses).map(|(a, m)| m * (a - mean).powi(2)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VmaxResult {
    /// `V_max = gamma A^2`.
    pub gamma: f64,
    pub law: DiscreteInputLaw,
    /// Upper bound on `gamma_true - gamma` from a supergradient linear program.
    pub certificate_gap: f64,
}

impl VmaxResult {
    /// `gamma + certificate_gap`, an upper bound on the exact maximum.
    pub fn certified_gamma(&self) -> f64 {
        self.gamma + self.certificate_gap
    }
}

/// `sum s_k^2 q_k - (sum s_k q_k)^2` for `q = (q_0, ..., q_nt)`.
pub fn variance_objective(ch: &ChannelGains, q: &[f64]) -> f64 {
    let s = ch.cumulative();
    let m: f64 = s.iter().zip(q).map(|(s, q)| s * q).sum();
    let second: f64 = s.iter().zip(q).map(|(s, q)| s * s * q).sum();
    second - m * m
}

/// Solves the 3x3 system `cols * x = rhs` by Gaussian elimination with partial
/// pivoting; `None` if singular.
fn solve3(cols: [[f64; 3]; 3], rhs: [f64; 3]) -> Option<[f64; 3]> {
    // Row-major augmented matrix.
    let mut m = [[0.0; 4]; 3];
    for r in 0..3 {
        for c in 0..3 {
            m[r][c] = cols[c][r];
        }
        m[r][3] = rhs[r];
    }
    let scale = m.iter().flat_map(|r| r[..3].iter()).fold(0.0f64, |a, v| a.max(v.abs()));
    for c in 0..3 {
        let pivot = (c..3).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))?;
        if m[pivot][c].abs() <= 1e-12 * scale.max(1.0) {
            return None;
        }
        m.swap(c, pivot);
        for r in 0..3 {
            if r != c {
                let f = m[r][c] / m[c][c];
                for k in c..4 {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}

/// `max sum s_k^2 q_k` subject to `sum s_k q_k = m`, `sum q_k <= 1`,
/// `sum k q_k <= alpha`, `q >= 0` (indices `k = 1..nt`). Returns the optimal
/// full vector `(q_0, ..., q_nt)`, or `None` if infeasible.
fn inner_lp(ch: &ChannelGains, alpha: f64, m: f64) -> Option<(f64, Vec<f64>)> {
    let nt = ch.nt();
    let s = &ch.cumulative()[1..];
    // Columns: q_1..q_nt, then the two slacks.
    let column = |j: usize| -> ([f64; 3], f64) {
        if j < nt {
            ([s[j], 1.0, (j + 1) as f64], s[j] * s[j])
        } else if j == nt {
            ([0.0, 1.0, 0.0], 0.0)
        } else {
            ([0.0, 0.0, 1.0], 0.0)
        }
    };
    let n = nt + 2;
    let rhs = [m, 1.0, alpha];
    let mut best: Option<(f64, Vec<f64>)> = None;
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let (ca, oa) = column(a);
                let (cb, ob) = column(b);
                let (cc, oc) = column(c);
                let Some(x) = solve3([ca, cb, cc], rhs) else { continue };
                if x.iter().any(|v| *v < -1e-12) {
                    continue;
                }
                let value = oa * x[0] + ob * x[1] + oc * x[2];
                if best.as_ref().is_none_or(|(v, _)| value > *v) {
                    let mut q = vec![0.0; nt + 1];
                    for (idx, val) in [(a, x[0]), (b, x[1]), (c, x[2])] {
                        if idx < nt {
                            q[idx + 1] = val.max(0.0);
                        }
                    }
                    best = Some((value, q));
                }
            }
        }
    }
    best.map(|(v, mut q)| {
        q[0] = 1.0 - q[1..].iter().sum::<f64>();
        (v, q)
    })
}

/// Projects a nearly feasible `(q_0, ..., q_nt)` onto the polytope.
fn make_feasible(mut q: Vec<f64>, alpha: f64) -> Vec<f64> {
    q.iter_mut().for_each(|v| *v = v.max(0.0));
    let load: f64 = q.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    if load > alpha {
        let f = alpha / load;
        q[1..].iter_mut().for_each(|v| *v *= f);
    }
    let rest: f64 = q[1..].iter().sum();
    if rest > 1.0 {
        q[1..].iter_mut().for_each(|v| *v /= rest);
    }
    q[0] = (1.0 - q[1..].iter().sum::<f64>()).max(0.0);
    q
}

/// Vertices `(q_0, ..., q_nt)` of the feasible polytope.
pub fn feasible_vertices(ch: &ChannelGains, alpha: f64) -> Vec<Vec<f64>> {
    let weights: Vec<f64> = (0..=ch.nt()).map(|k| k as f64).collect();
    capped_simplex_vertices(&weights, alpha)
}

/// Maximizes the aggregate-input variance under the peak and average limits.
pub fn vmax(ch: &ChannelGains, budget: &PowerBudget) -> VmaxResult {
    let alpha = budget.alpha();
    let s = ch.cumulative();
    let vertices = feasible_vertices(ch, alpha);
    let m_max = vertices.iter().map(|v| v.iter().zip(s).map(|(q, s)| q * s).sum::<f64>()).fold(0.0f64, f64::max);

    let g = |m: f64| inner_lp(ch, alpha, m).map_or(f64::NEG_INFINITY, |(v, _)| v - m * m);
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (0.0, m_max);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (g(x1), g(x2));
    while hi - lo > 1e-13 * m_max.max(1.0) {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = g(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = g(x1);
        }
    }
    let m_best = 0.5 * (lo + hi);

    let mut candidates: Vec<Vec<f64>> = vertices.clone();
    if let Some((_, q)) = inner_lp(ch, alpha, m_best) {
        candidates.push(make_feasible(q, alpha));
    }
    // On a linear piece LP(m) = c0 + c1 m the maximizer of LP(m) - m^2 is c1/2.
    let h = 1e-5 * m_max.max(1.0);
    let lp = |m: f64| inner_lp(ch, alpha, m).map(|(v, _)| v);
    if let (Some(l), Some(c), Some(r)) = (lp(m_best - h), lp(m_best), lp(m_best + h)) {
        if (l + r - 2.0 * c).abs() <= 1e-12 * c.abs().max(1.0) {
            let m_star = (r - l) / (4.0 * h);
            if (m_star - m_best).abs() < h {
                if let Some((_, q)) = inner_lp(ch, alpha, m_star) {
                    candidates.push(make_feasible(q, alpha));
                }
            }
        }
    }
    let q = candidates
        .into_iter()
        .max_by(|a, b| variance_objective(ch, a).total_cmp(&variance_objective(ch, b)))
        .expect("the polytope always contains q = 0");
    let gamma = variance_objective(ch, &q).max(0.0);

    // Supergradient of the concave objective at q.
    let m: f64 = s.iter().zip(&q).map(|(s, q)| s * q).sum();
    let grad: Vec<f64> = s.iter().map(|s| s * s - 2.0 * m * s).collect();
    let at_q: f64 = grad.iter().zip(&q).map(|(g, q)| g * q).sum();
    let (best_linear, _) = max_linear(&vertices, &grad);
    let certificate_gap = (best_linear - at_q).max(0.0);

    let law = DiscreteInputLaw { atoms: s.iter().map(|s| s * budget.amplitude()).collect(), masses: q };
    VmaxResult { gamma, law, certificate_gap }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(gains: &[f64], alpha: f64) -> VmaxResult {
        let ch = ChannelGains::new(gains).unwrap();
        let b = PowerBudget::new(&ch, 1.0, alpha).unwrap();
        vmax(&ch, &b)
    }

    #[test]
    fn table_rows() {
        let r = run(&[3.0, 2.2, 0.1], 0.9);
        assert!((r.gamma - 6.6924).abs() < 1e-3);
        assert!((r.law.masses[0] - 0.55).abs() < 1e-6 && (r.law.masses[2] - 0.45).abs() < 1e-6);

        let r = run(&[3.0, 2.2, 1.1], 0.7);
        assert!((r.gamma - 7.1001).abs() < 1e-3);
        assert!((r.law.masses[0] - 0.7667).abs() < 1e-3 && (r.law.masses[3] - 0.2333).abs() < 1e-3);

        let r = run(&[3.0, 1.5, 0.3], 0.95);
        assert!((r.gamma - 5.1158).abs() < 1e-3);
        for (got, want) in [(r.law.masses[0], 0.5907), (r.law.masses[2], 0.2780), (r.law.masses[3], 0.1313)] {
            assert!((got - want).abs() < 1e-3, "{got} vs {want}");
        }
        assert!(r.certificate_gap < 1e-9, "gap {}", r.certificate_gap);
    }

    #[test]
    fn two_led_values() {
        assert!((run(&[3.0, 1.0], 1.0).gamma - 4.0).abs() < 1e-9);
        assert!((run(&[3.0, 1.0], 0.5).gamma - 3.0).abs() < 1e-9);
        assert!((run(&[3.0, 1.0], 0.05).gamma - 0.4275).abs() < 1e-9);
    }

    #[test]
    fn unconstrained_average_gives_quarter_square() {
        let r = run(&[3.0, 2.0, 1.5], 3.0);
        assert!((r.gamma - 6.5f64.powi(2) / 4.0).abs() < 1e-9);
        assert!(r.gamma <= 6.5f64.powi(2) / 4.0 + 1e-12);
    }

    #[test]
    fn law_moments_match_gamma() {
        let r = run(&[3.0, 1.5, 0.3], 0.95);
        assert!((r.law.variance() - r.gamma).abs() < 1e-12);
    }
}
