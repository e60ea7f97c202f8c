//! Derivative-free Nelder–Mead minimization with a hard evaluation budget.

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOutcome {
    /// Best point seen over all evaluations (not only the final simplex).
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Minimizes `f` starting from `start`, with initial edge length `step`.
///
/// Non-finite objective values are treated as `+inf`. Stops after
/// `max_evals` evaluations or when the simplex values agree within `ftol`.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    start: &[f64],
    step: f64,
    max_evals: usize,
    ftol: f64,
) -> SimplexOutcome {
    let n = start.len();
    let mut evaluations = 0;
    let mut best = SimplexOutcome { point: start.to_vec(), value: f64::INFINITY, evaluations: 0 };
    let mut eval = |x: &[f64], evaluations: &mut usize, best: &mut SimplexOutcome| -> f64 {
        *evaluations += 1;
        let v = f(x);
        let v = if v.is_finite() { v } else { f64::INFINITY };
        if v < best.value {
            best.value = v;
            best.point = x.to_vec();
        }
        v
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(start, &mut evaluations, &mut best);
    simplex.push((start.to_vec(), v0));
    for i in 0..n {
        if evaluations >= max_evals {
            break;
        }
        let mut x = start.to_vec();
        x[i] += step;
        let v = eval(&x, &mut evaluations, &mut best);
        simplex.push((x, v));
    }
    if simplex.len() < n + 1 {
        best.evaluations = evaluations;
        return best;
    }

    while evaluations < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (lo, hi) = (simplex[0].1, simplex[n].1);
        if hi.is_finite() && (hi - lo).abs() <= ftol * (1.0 + lo.abs()) {
            break;
        }
        let centroid: Vec<f64> =
            (0..n).map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&simplex[n].0).map(|(c, w)| c + t * (w - c)).collect() };

        let reflected = along(-1.0);
        let fr = eval(&reflected, &mut evaluations, &mut best);
        if fr < simplex[0].1 {
            if evaluations >= max_evals {
                simplex[n] = (reflected, fr);
                break;
            }
            let expanded = along(-2.0);
            let fe = eval(&expanded, &mut evaluations, &mut best);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        if evaluations >= max_evals {
            break;
        }
        let (contracted, t) = if fr < simplex[n].1 { (along(-0.5), fr) } else { (along(0.5), simplex[n].1) };
        let fc = eval(&contracted, &mut evaluations, &mut best);
        if fc < t {
            simplex[n] = (contracted, fc);
            continue;
        }
        // shrink toward the best vertex
        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            if evaluations >= max_evals {
                break;
            }
            let x: Vec<f64> = anchor.iter().zip(&vertex.0).map(|(a, v)| a + 0.5 * (v - a)).collect();
            let v = eval(&x, &mut evaluations, &mut best);
            *vertex = (x, v);
        }
    }
    best.evaluations = evaluations;
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_minimum() {
        let out = nelder_mead(|x| (x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2), &[0.0, 0.0], 0.5, 500, 1e-14);
        assert!((out.point[0] - 1.0).abs() < 1e-4);
        assert!((out.point[1] + 2.0).abs() < 1e-4);
        assert!(out.evaluations <= 500);
    }

    #[test]
    fn respects_budget_and_tracks_best() {
        let mut calls = 0;
        let out = nelder_mead(
            |x| {
                calls += 1;
                x[0].powi(2) + x[1].powi(2)
            },
            &[3.0, 3.0],
            1.0,
            10,
            0.0,
        );
        assert_eq!(out.evaluations, 10);
        assert_eq!(calls, 10);
        assert!(out.value <= 18.0);
    }

    #[test]
    fn survives_non_finite_regions() {
        let out = nelder_mead(|x| if x[0] < 0.0 { f64::NAN } else { (x[0] - 2.0).powi(2) }, &[0.5], 1.0, 200, 1e-14);
        assert!((out.point[0] - 2.0).abs() < 1e-4);
    }
}
