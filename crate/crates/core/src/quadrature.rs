//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate falls below `max(abs_tol, rel_tol * |integral|)` or the interval
//! budget is exhausted. Known interior kinks should be passed as breakpoints.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

// Kronrod abscissae on [0, 1); odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_64, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Tolerances and interval budget.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub const fn relative(rel: f64) -> Self {
        Self { abs: 0.0, rel, max_intervals: 400 }
    }
}

/// One Gauss–Kronrod 7/15 panel; returns (kronrod, |kronrod - gauss|).
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Panel {
    a: f64,
    b: f64,
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

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> QuadResult {
    integrate_with_breakpoints(f, &[a, b], tol)
}

/// Integrates `f` over `[points[0], points[last]]`, seeding one panel per
/// sub-interval so that kinks at the interior points are never straddled.
pub fn integrate_with_breakpoints<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], tol: Tolerance) -> QuadResult {
    assert!(points.len() >= 2, "need at least one interval");
    let mut heap = BinaryHeap::with_capacity(2 * tol.max_intervals.max(points.len()));
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in points.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let (value, error) = gk15(&mut f, w[0], w[1]);
        total += value;
        total_err += error;
        heap.push(Panel { a: w[0], b: w[1], value, error });
    }
    let mut evaluations = 15 * heap.len();
    while total_err > tol.abs.max(tol.rel * total.abs()) {
        if heap.len() >= tol.max_intervals {
            return QuadResult { value: total, error: total_err, evaluations, converged: false };
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval below floating-point resolution
            heap.push(worst);
            return QuadResult { value: total, error: total_err, evaluations, converged: false };
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        evaluations += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // Re-sum from the panels to shed the drift of the running updates.
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = crate::stats::pairwise_sum(&panels.iter().map(|p| p.value).collect::<Vec<_>>());
    let error = panels.iter().map(|p| p.error).sum();
    QuadResult { value, error, evaluations, converged: true }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn monomial_integral(k: i32) -> f64 {
        // over [-1, 1]
        if k % 2 == 1 {
            0.0
        } else {
            2.0 / (k as f64 + 1.0)
        }
    }

    #[test]
    fn kronrod_exact_through_degree_22() {
        for k in 0..=22 {
            let (v, _) = gk15(&mut |x: f64| x.powi(k), -1.0, 1.0);
            assert!((v - monomial_integral(k)).abs() < 1e-14, "degree {k}: {v}");
        }
    }

    #[test]
    fn gauss_exact_through_degree_13() {
        for k in 0..=13 {
            let (_, err) = gk15(&mut |x: f64| x.powi(k), -1.0, 1.0);
            assert!(err < 1e-14, "degree {k}: gauss/kronrod disagree by {err}");
        }
        let (_, err) = gk15(&mut |x: f64| x.powi(14), -1.0, 1.0);
        assert!(err > 1e-6);
    }

    #[test]
    fn adaptive_handles_sqrt_endpoint() {
        let r = integrate(|x: f64| x.sqrt(), 0.0, 1.0, Tolerance::relative(1e-12));
        assert!(r.converged);
        assert!((r.value - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn breakpoints_resolve_kink() {
        let r = integrate_with_breakpoints(|x: f64| (x - 0.3).abs(), &[0.0, 0.3, 1.0], Tolerance::relative(1e-14));
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-15);
        assert_eq!(r.evaluations, 30);
    }

    #[test]
    fn reports_non_convergence() {
        let r = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, Tolerance { abs: 0.0, rel: 1e-15, max_intervals: 8 });
        assert!(!r.converged);
    }
}
