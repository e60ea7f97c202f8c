//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Default cap on the number of panels before giving up.
pub const DEFAULT_MAX_PANELS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Panel {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.abs() * WGK[7];
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    // QUADPACK error scaling
    if asc != 0.0 && error != 0.0 {
        error = asc * f64::min(1.0, (200.0 * error / asc).powf(1.5));
    }
    let resabs = abs_sum * half.abs();
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Panel { lo, hi, value, error }
}

/// Integrates `f` over consecutive panels delimited by `breakpoints`
/// (sorted, first = lower limit, last = upper limit) until the summed error
/// estimate is at most `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, breakpoints: &[f64], tol: f64, max_panels: usize) -> Result<QuadResult> {
    if breakpoints.len() < 2 {
        return Err(Error::Domain("quadrature needs at least two breakpoints".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("quadrature tolerance must be positive, got {tol}")));
    }
    if breakpoints.windows(2).any(|w| !(w[0] <= w[1])) || breakpoints.iter().any(|b| !b.is_finite()) {
        return Err(Error::Domain("quadrature breakpoints must be finite and sorted".into()));
    }
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in breakpoints.windows(2) {
        if w[1] > w[0] {
            heap.push(gauss_kronrod(&f, w[0], w[1]));
            evaluations += 15;
        }
    }
    let mut running_error: f64 = heap.iter().map(|p| p.error).sum();
    loop {
        if running_error <= tol || !running_error.is_finite() {
            // Re-sum exactly before deciding.
            let value: f64 = heap.iter().map(|p| p.value).sum();
            let error: f64 = heap.iter().map(|p| p.error).sum();
            if !value.is_finite() || !error.is_finite() {
                return Err(Error::Domain("integrand is not finite on the interval".into()));
            }
            if error <= tol {
                return Ok(QuadResult { value, abs_error: error, evaluations });
            }
            running_error = error;
        }
        if heap.len() >= max_panels {
            return Err(Error::NoConvergence(format!(
                "quadrature panel budget ({max_panels}) exhausted, error estimate {running_error:e}"
            )));
        }
        let worst = heap.pop().expect("heap is nonempty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            return Err(Error::NoConvergence(format!(
                "quadrature panel at {} cannot be refined further, error estimate {running_error:e}",
                worst.lo
            )));
        }
        let left = gauss_kronrod(&f, worst.lo, mid);
        let right = gauss_kronrod(&f, mid, worst.hi);
        running_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        evaluations += 30;
    }
}

/// Adaptive quadrature of `f` on `[lo, hi]` to absolute error `tol`.
pub fn adaptive_quad<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(hi >= lo) {
        return Err(Error::Domain(format!("invalid interval [{lo}, {hi}]")));
    }
    integrate(f, &[lo, hi], tol, DEFAULT_MAX_PANELS).map(|r| r.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::special::{normal_pdf, qfunc};
    use approx::assert_relative_eq;

    #[test]
    fn polynomials_are_exact() {
        assert_relative_eq!(adaptive_quad(|_| 1.0, 0.0, 1.0, 1e-12).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(adaptive_quad(|x| x, 0.0, 1.0, 1e-12).unwrap(), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn normal_density_mass() {
        let oracle = 1.0 - 2.0 * qfunc(8.0);
        let v = adaptive_quad(normal_pdf, -8.0, 8.0, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
        assert!((v - oracle).abs() < 1e-13);
    }

    #[test]
    fn refines_kinks() {
        let v = integrate(|x: f64| x.abs().sqrt(), &[-1.0, 1.0], 1e-10, DEFAULT_MAX_PANELS).unwrap();
        assert_relative_eq!(v.value, 4.0 / 3.0, max_relative = 1e-9);
    }

    #[test]
    fn reports_budget_exhaustion() {
        let r = integrate(|x: f64| (1.0 / x).sin(), &[1e-6, 1.0], 1e-14, 8);
        assert!(matches!(r, Err(Error::NoConvergence(_))));
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(adaptive_quad(|x| x, 1.0, 0.0, 1e-9).is_err());
        assert!(adaptive_quad(|x| x, 0.0, 1.0, 0.0).is_err());
    }
}
