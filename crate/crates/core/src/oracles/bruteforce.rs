//! Brute-force search for the largest aggregate-input variance.
//!
//! Each LED is restricted to `{0, A}` and the law is put in canonical form:
//! with probability `q_k` the `k` strongest LEDs are on. Candidates are the
//! polytope vertices, random feasible `q`, and every stationary point of the
//! variance restricted to a face of the polytope. The variance of each
//! candidate is computed from the explicit intensity vectors.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use crate::channel::{ChannelGains, PowerBudget};
use crate::error::{Error, Result};
use crate::upper::vmax::feasible_vertices;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BruteForceVmax {
    /// Largest `Var(h^T X)` found.
    pub variance: f64,
    /// `(q_0, ..., q_nt)` of the best candidate.
    pub q: Vec<f64>,
    pub candidates: usize,
}

/// `Var(h^T X)` when, with probability `q_k`, LEDs `1..k` are at `A` and the rest off.
fn quantized_variance(ch: &ChannelGains, amplitude: f64, q: &[f64]) -> f64 {
    let outputs: Vec<f64> = (0..q.len())
        .map(|k| {
            let x: Vec<f64> = (0..ch.nt()).map(|i| if i < k { amplitude } else { 0.0 }).collect();
            x.iter().zip(ch.gains()).map(|(x, h)| x * h).sum()
        })
        .collect();
    let mean: f64 = outputs.iter().zip(q).map(|(y, q)| y * q).sum();
    outputs.iter().zip(q).map(|(y, q)| q * (y - mean).powi(2)).sum()
}

fn feasible(q: &[f64], alpha: f64) -> bool {
    let load: f64 = q.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    let rest: f64 = q[1..].iter().sum();
    q.iter().all(|v| *v >= -1e-12) && rest <= 1.0 + 1e-12 && load <= alpha * (1.0 + 1e-12)
}

/// Dense linear solve with partial pivoting; `None` when singular.
fn solve_dense(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for c in 0..n {
        let pivot = (c..n).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))?;
        if m[pivot][c].abs() < 1e-12 {
            return None;
        }
        m.swap(c, pivot);
        rhs.swap(c, pivot);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..n {
                m[r][k] -= f * m[c][k];
            }
            rhs[r] -= f * rhs[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let tail: f64 = (r + 1..n).map(|k| m[r][k] * x[k]).sum();
        x[r] = (rhs[r] - tail) / m[r][r];
    }
    Some(x)
}

/// Stationary points of `sum s_k^2 q_k - (sum s_k q_k)^2` on the faces where
/// the support is `S` and the constraints in `active` hold with equality.
fn face_stationary_points(ch: &ChannelGains, alpha: f64) -> Vec<Vec<f64>> {
    let nt = ch.nt();
    let s = ch.cumulative();
    let mut out = Vec::new();
    for mask in 1u32..(1 << nt) {
        let support: Vec<usize> = (1..=nt).filter(|k| mask & (1 << (k - 1)) != 0).collect();
        for (mass_active, load_active) in [(false, false), (true, false), (false, true), (true, true)] {
            let n_active = mass_active as usize + load_active as usize;
            if support.len() != n_active + 1 {
                continue;
            }
            // Stationarity: s_k^2 - 2 m s_k = a1 [mass] + a2 k [load] for k in S.
            // Unknowns (m, a1?, a2?).
            let rows: Vec<Vec<f64>> = support
                .iter()
                .map(|&k| {
                    let mut row = vec![2.0 * s[k]];
                    if mass_active {
                        row.push(1.0);
                    }
                    if load_active {
                        row.push(k as f64);
                    }
                    row
                })
                .collect();
            let rhs: Vec<f64> = support.iter().map(|&k| s[k] * s[k]).collect();
            let Some(sol) = solve_dense(rows, rhs) else { continue };
            let m = sol[0];
            // Then q_S from: sum s_k q_k = m, [sum q_k = 1], [sum k q_k = alpha].
            let mut rows = vec![support.iter().map(|&k| s[k]).collect::<Vec<f64>>()];
            let mut rhs = vec![m];
            if mass_active {
                rows.push(vec![1.0; support.len()]);
                rhs.push(1.0);
            }
            if load_active {
                rows.push(support.iter().map(|&k| k as f64).collect());
                rhs.push(alpha);
            }
            let Some(qs) = solve_dense(rows, rhs) else { continue };
            let mut q = vec![0.0; nt + 1];
            for (&k, v) in support.iter().zip(&qs) {
                q[k] = *v;
            }
            q[0] = 1.0 - qs.iter().sum::<f64>();
            if feasible(&q, alpha) && q[0] >= -1e-12 {
                q.iter_mut().for_each(|v| *v = v.max(0.0));
                out.push(q);
            }
        }
    }
    out
}

/// Largest quantized variance over vertices, face-stationary points and
/// `samples` random feasible laws.
pub fn bruteforce_vmax(ch: &ChannelGains, budget: &PowerBudget, samples: usize, seed: u64) -> Result<BruteForceVmax> {
    if samples == 0 {
        return Err(Error::Domain("need at least one random sample".into()));
    }
    let alpha = budget.alpha();
    let amplitude = budget.amplitude();
    let nt = ch.nt();
    let mut best = (f64::NEG_INFINITY, Vec::new());
    let mut candidates = 0;
    let mut consider = |q: Vec<f64>| {
        let v = quantized_variance(ch, amplitude, &q);
        if v > best.0 {
            best = (v, q);
        }
    };
    for q in feasible_vertices(ch, alpha).into_iter().chain(face_stationary_points(ch, alpha)) {
        consider(q);
        candidates += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        // Uniform point of the simplex over (q_0, ..., q_nt), then shrunk toward q_0 if it overspends.
        let mut q: Vec<f64> = (0..=nt).map(|_| Exp1.sample(&mut rng)).collect::<Vec<f64>>();
        let total: f64 = q.iter().sum();
        q.iter_mut().for_each(|v| *v /= total);
        let load: f64 = q.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
        if load > alpha {
            let f = alpha / load * rng.gen::<f64>().sqrt();
            q[1..].iter_mut().for_each(|v| *v *= f);
            q[0] = 1.0 - q[1..].iter().sum::<f64>();
        }
        consider(q);
        candidates += 1;
    }
    Ok(BruteForceVmax { variance: best.0, q: best.1, candidates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::upper::vmax::vmax;

    #[test]
    fn table_row_with_interior_optimum() {
        let ch = ChannelGains::new(&[3.0, 1.5, 0.3]).unwrap();
        let b = PowerBudget::new(&ch, 1.0, 0.95).unwrap();
        let bf = bruteforce_vmax(&ch, &b, 10_000, 1).unwrap();
        let exact = vmax(&ch, &b);
        assert!((bf.variance - 5.1158).abs() < 1e-3);
        assert!(bf.variance <= exact.certified_gamma() + 1e-9);
        assert!(bf.variance >= exact.gamma - 1e-6);
    }

    #[test]
    fn scales_with_amplitude_squared() {
        let ch = ChannelGains::new(&[3.0, 1.0]).unwrap();
        let b = PowerBudget::new(&ch, 2.0, 0.5).unwrap();
        let bf = bruteforce_vmax(&ch, &b, 1000, 3).unwrap();
        assert!((bf.variance - 3.0 * 4.0).abs() < 1e-9);
    }
}
