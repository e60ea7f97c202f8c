//! Vertices of a simplex cut by one weighted-sum constraint.
//!
//! Both the variance program and the duality certificate optimize over
//! `{x in simplex : sum_i w_i x_i <= cap}`; linear programs over that set are
//! solved exactly by vertex enumeration.

/// Vertices of `{x >= 0, sum x = 1, sum w_i x_i <= cap}`.
///
/// They are the simplex corners `e_i` with `w_i <= cap`, plus the points where
/// an edge `e_i -- e_j` with `w_i < cap < w_j` crosses the hyperplane.
pub fn capped_simplex_vertices(weights: &[f64], cap: f64) -> Vec<Vec<f64>> {
    let n = weights.len();
    let mut out = Vec::new();
    for i in 0..n {
        if weights[i] <= cap {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            out.push(v);
        }
    }
    for i in 0..n {
        for j in 0..n {
            if weights[i] < cap && cap < weights[j] {
                let span = weights[j] - weights[i];
                let mut v = vec![0.0; n];
                v[i] = (weights[j] - cap) / span;
                v[j] = (cap - weights[i]) / span;
                out.push(v);
            }
        }
    }
    out
}

/// Maximum of `g . x` over the given vertex set, with the maximizing index.
pub fn max_linear(vertices: &[Vec<f64>], g: &[f64]) -> (f64, usize) {
    vertices
        .iter()
        .enumerate()
        .map(|(i, v)| (v.iter().zip(g).map(|(a, b)| a * b).sum::<f64>(), i))
        .fold((f64::NEG_INFINITY, 0), |acc, x| if x.0 > acc.0 { x } else { acc })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertices_are_feasible_and_complete() {
        let w = [0.0, 1.0, 2.0, 3.0];
        let verts = capped_simplex_vertices(&w, 0.9);
        // e_0 plus edges 0-1, 0-2, 0-3
        assert_eq!(verts.len(), 4);
        for v in &verts {
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            let load: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
            assert!(load <= 0.9 + 1e-15);
        }
        let loose = capped_simplex_vertices(&w, 3.0);
        assert_eq!(loose.len(), 4);
    }

    #[test]
    fn linear_max_picks_best_vertex() {
        let verts = capped_simplex_vertices(&[0.0, 1.0, 2.0], 1.0);
        let (val, _) = max_linear(&verts, &[0.0, 0.0, 5.0]);
        assert!((val - 2.5).abs() < 1e-15);
    }
}
