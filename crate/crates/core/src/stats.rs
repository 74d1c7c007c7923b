//! Deterministic summation and summary statistics.
//!
//! Aggregates are built from fixed-size chunks combined in index order, so a
//! result does not depend on how the chunks were scheduled across threads.

use serde::{Deserialize, Serialize};

/// Pairwise (cascade) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Count, mean and centered second moment of a sample, mergeable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    /// Two-pass moments of an in-memory sample.
    pub fn from_slice(xs: &[f64]) -> Self {
        if xs.is_empty() {
            return Self::default();
        }
        let n = xs.len() as f64;
        let mean = pairwise_sum(xs) / n;
        let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        Self { count: xs.len() as u64, mean, m2: pairwise_sum(&dev) }
    }

    /// Chan's parallel update.
    pub fn merge(&self, other: &Self) -> Self {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let n = self.count + other.count;
        let (na, nb) = (self.count as f64, other.count as f64);
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * nb / n as f64;
        let m2 = self.m2 + other.m2 + delta * delta * na * nb / n as f64;
        Self { count: n, mean, m2 }
    }

    /// Merges a sequence by a balanced tree in index order.
    pub fn merge_all(parts: &[Moments]) -> Self {
        match parts.len() {
            0 => Self::default(),
            1 => parts[0],
            n => {
                let mid = n / 2;
                Self::merge_all(&parts[..mid]).merge(&Self::merge_all(&parts[mid..]))
            }
        }
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.std_dev() / (self.count as f64).sqrt()
        }
    }
}

/// Straight-line fit `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub intercept_se: f64,
}

/// Weighted least squares. With weights `1/σ²` the standard errors are the
/// usual parameter errors for known measurement variances.
pub fn weighted_line_fit(xs: &[f64], ys: &[f64], weights: &[f64]) -> Option<LineFit> {
    assert_eq!(xs.len(), ys.len());
    assert_eq!(xs.len(), weights.len());
    if xs.len() < 2 {
        return None;
    }
    let s: f64 = weights.iter().sum();
    let sx: f64 = xs.iter().zip(weights).map(|(x, w)| w * x).sum();
    let sy: f64 = ys.iter().zip(weights).map(|(y, w)| w * y).sum();
    let xbar = sx / s;
    let ybar = sy / s;
    let sxx: f64 = xs.iter().zip(weights).map(|(x, w)| w * (x - xbar) * (x - xbar)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).zip(weights).map(|((x, y), w)| w * (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    Some(LineFit { slope, intercept, slope_se: (1.0 / sxx).sqrt(), intercept_se: (1.0 / s + xbar * xbar / sxx).sqrt() })
}

/// Ordinary least squares; standard errors from the residual variance.
pub fn line_fit(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let w = vec![1.0; xs.len()];
    let mut fit = weighted_line_fit(xs, ys, &w)?;
    let n = xs.len();
    if n > 2 {
        let rss: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| {
                let r = y - fit.intercept - fit.slope * x;
                r * r
            })
            .sum();
        let sigma = (rss / (n - 2) as f64).sqrt();
        fit.slope_se *= sigma;
        fit.intercept_se *= sigma;
    } else {
        fit.slope_se = f64::NAN;
        fit.intercept_se = f64::NAN;
    }
    Some(fit)
}
