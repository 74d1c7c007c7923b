//! Integral formulas for the expected facet count and mean valence.
//!
//! With `G(x)` the smaller cap area of a quadruple `x ∈ (T²)⁴`,
//!
//! ```text
//! E f₃ = (1/24) ∫ λ⁴ (e^{−λG} + e^{−λ(4π²−G)}) dx
//! E v̄  = (1/12) ∫ λ⁴ (e^{−λG} h(4λπ² − λG) + e^{−4λπ²+λG} h(λG)) dx
//!        + 2 − P(n = 2) − 2 P(n < 2)
//! ```
//!
//! where `h(ν) = E 1/(ζ + 4)` for `ζ ~ Pois(ν)`. The integrals are estimated
//! by plain Monte Carlo over uniform quadruples.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::DomainError;
use crate::measure::{draw_cap, CHUNK, QUADRUPLE_MEASURE};
use crate::sampling::SeedSpec;
use crate::stats::Moments;
use crate::torus::{cap_measure, TORUS_AREA};

/// Below this rate `h_closed` evaluates the series.
pub const H_SERIES_SWITCH: f64 = 0.5;

/// Relative truncation tolerance of the series inside `h_closed`.
const H_SERIES_TOL: f64 = 1e-17;

/// `h(ν)` in closed form, without the small-`ν` fallback:
/// `(ν³ − 3ν² + 6ν − 6(1 − e^{−ν}))/ν⁴`.
pub fn h_closed_form(nu: f64) -> f64 {
    let nu2 = nu * nu;
    (nu2 * nu - 3.0 * nu2 + 6.0 * nu + 6.0 * (-nu).exp_m1()) / (nu2 * nu2)
}

/// `h(ν) = 1/ν − 3/ν² + 6/ν³ − (6 − 6e^{−ν})/ν⁴`, by series below
/// [`H_SERIES_SWITCH`] where the closed form cancels.
pub fn h_closed(nu: f64) -> Result<f64, DomainError> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(DomainError { name: "h_closed", value: nu, domain: "(0, ∞)" });
    }
    Ok(if nu < H_SERIES_SWITCH { h_series(nu, H_SERIES_TOL) } else { h_closed_form(nu) })
}

/// `h(ν) = Σⱼ e^{−ν} νʲ / (j! (j + 4))`, summed until past the mode and the
/// next term falls below `tol` times the partial sum.
pub fn h_series(nu: f64, tol: f64) -> f64 {
    assert!(nu >= 0.0 && nu.is_finite() && tol > 0.0);
    // log-space pmf keeps e^{−ν} from underflowing
    let ln_nu = if nu > 0.0 { nu.ln() } else { f64::NEG_INFINITY };
    let mut ln_p = -nu;
    let mut sum = 0.0;
    let mut j = 0u64;
    loop {
        let term = ln_p.exp() / (j as f64 + 4.0);
        sum += term;
        let next = if nu > 0.0 { (ln_p + ln_nu - ((j + 1) as f64).ln()).exp() / (j as f64 + 5.0) } else { 0.0 };
        if (j as f64) + 1.0 > nu && next < tol * sum {
            return sum;
        }
        j += 1;
        ln_p += ln_nu - (j as f64).ln();
    }
}

/// Poisson point masses used by the valence formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallCountProbs {
    pub p_lt2: f64,
    pub p_eq2: f64,
    pub p_eq3: f64,
    pub p_ge4: f64,
}

/// `P(ζ < 2)`, `P(ζ = 2)`, `P(ζ = 3)`, `P(ζ ≥ 4)` for `ζ ~ Pois(ν)`.
pub fn poisson_small_probs(nu: f64) -> Result<SmallCountProbs, DomainError> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(DomainError { name: "poisson_small_probs", value: nu, domain: "(0, ∞)" });
    }
    let p0 = (-nu).exp();
    let p1 = p0 * nu;
    let p2 = p1 * nu / 2.0;
    let p3 = p2 * nu / 3.0;
    let p_ge4 = if nu < 1.0 {
        // the complement would cancel; sum the tail directly
        let mut term = p3;
        let mut tail = 0.0;
        let mut k = 3.0;
        loop {
            k += 1.0;
            term *= nu / k;
            tail += term;
            if term < 1e-18 * tail {
                break tail;
            }
        }
    } else {
        1.0 - (p0 + p1 + p2 + p3)
    };
    Ok(SmallCountProbs { p_lt2: p0 + p1, p_eq2: p2, p_eq3: p3, p_ge4 })
}

/// Monte Carlo estimate of one of the integral formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralEstimate {
    pub value: f64,
    pub standard_error: f64,
    pub samples: u64,
    pub lambda: f64,
}

/// Valence estimate split into its parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValenceEstimate {
    pub estimate: IntegralEstimate,
    /// Contribution of the `e^{−4λπ²+λG} h(λG)` term alone.
    pub tail_term: f64,
    /// Analytic bound `64π⁸ e^{−2λπ²}` on the tail term.
    pub tail_bound: f64,
    /// `2 − P(n = 2) − 2P(n < 2)`.
    pub correction: f64,
}

/// Cap areas of `samples` uniform quadruples, chunked over substreams of `seed`.
pub fn sample_cap_areas(samples: usize, seed: SeedSpec) -> Vec<f64> {
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seed.substream(c as u64).rng();
            let mut resampled = 0;
            let n = CHUNK.min(samples - c * CHUNK);
            (0..n).map(|_| cap_measure(&draw_cap(&mut rng, &mut resampled))).collect()
        })
        .collect();
    parts.concat()
}

/// Chunked moments of `f` over `xs`, merged in index order.
fn chunked_moments(xs: &[f64], f: impl Fn(f64) -> f64 + Sync) -> Moments {
    let parts: Vec<Moments> =
        xs.par_chunks(CHUNK).map(|c| Moments::from_slice(&c.iter().map(|&g| f(g)).collect::<Vec<_>>())).collect();
    Moments::merge_all(&parts)
}

fn check_lambda(lambda: f64) -> Result<(), DomainError> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(DomainError { name: "lambda", value: lambda, domain: "(0, ∞)" })
    }
}

/// `E f₃` from precomputed cap areas.
pub fn ef3_from_areas(lambda: f64, areas: &[f64]) -> Result<IntegralEstimate, DomainError> {
    check_lambda(lambda)?;
    let m = chunked_moments(areas, |g| (-lambda * g).exp() + (-lambda * (TORUS_AREA - g)).exp());
    let scale = QUADRUPLE_MEASURE / 24.0 * lambda.powi(4);
    Ok(IntegralEstimate { value: scale * m.mean, standard_error: scale * m.std_error(), samples: m.count, lambda })
}

/// `E f₃` by Monte Carlo over `samples` uniform quadruples.
pub fn ef3_formula(lambda: f64, samples: usize, seed: SeedSpec) -> Result<IntegralEstimate, DomainError> {
    check_lambda(lambda)?;
    ef3_from_areas(lambda, &sample_cap_areas(samples, seed))
}

fn h(nu: f64) -> f64 {
    h_closed(nu).expect("positive argument")
}

/// `E v̄` from precomputed cap areas.
pub fn evbar_from_areas(lambda: f64, areas: &[f64]) -> Result<ValenceEstimate, DomainError> {
    check_lambda(lambda)?;
    let nu = TORUS_AREA * lambda;
    let head = |g: f64| (-lambda * g).exp() * h(nu - lambda * g);
    let tail = |g: f64| (-nu + lambda * g).exp() * h(lambda * g);
    let m = chunked_moments(areas, |g| head(g) + tail(g));
    let t = chunked_moments(areas, tail);
    let scale = QUADRUPLE_MEASURE / 12.0 * lambda.powi(4);
    let probs = poisson_small_probs(nu)?;
    let correction = 2.0 - probs.p_eq2 - 2.0 * probs.p_lt2;
    let pi8 = QUADRUPLE_MEASURE / 256.0;
    Ok(ValenceEstimate {
        estimate: IntegralEstimate {
            value: scale * m.mean + correction,
            standard_error: scale * m.std_error(),
            samples: m.count,
            lambda,
        },
        tail_term: scale * t.mean,
        tail_bound: 64.0 * pi8 * (-nu / 2.0).exp(),
        correction,
    })
}

/// `E v̄` by Monte Carlo over `samples` uniform quadruples.
pub fn evbar_formula(lambda: f64, samples: usize, seed: SeedSpec) -> Result<ValenceEstimate, DomainError> {
    check_lambda(lambda)?;
    evbar_from_areas(lambda, &sample_cap_areas(samples, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    const H1: f64 = 0.207_276_647_028_653_93;

    #[test]
    fn h_reference_values() {
        assert!((h_closed(1.0).unwrap() - H1).abs() < 1e-15);
        assert!((h_series(1.0, 1e-15) - H1).abs() < 1e-12 * H1);
        assert!((h_closed(0.1).unwrap() - 0.245_082_157_574_389_85).abs() < 1e-16);
        assert!((h_closed(0.5).unwrap() - 0.226_943_332_412_808_67).abs() < 1e-16);
        assert_eq!(h_series(0.0, 1e-15), 0.25);
        assert!((h_closed(1e-12).unwrap() - 0.25).abs() < 1e-12);
        let h100 = h_closed(100.0).unwrap();
        assert!((h100 * 100.0 - 1.0).abs() < 0.05);
        assert!((h_series(50.0, 1e-16) / h_closed(50.0).unwrap() - 1.0).abs() < 1e-10);
        assert!(h_closed(0.0).is_err());
        assert!(h_closed(-1.0).is_err());
    }

    #[test]
    fn h_monotone_and_bounded() {
        let mut prev = 0.25;
        for i in 0..=200 {
            let nu = 0.1 * 1000f64.powf(i as f64 / 200.0);
            let v = h_closed(nu).unwrap();
            assert!(v < prev && v <= 0.25);
            prev = v;
        }
    }

    #[test]
    fn h_large_argument_does_not_underflow() {
        let v = h_series(1000.0, 1e-16);
        assert!((v / h_closed(1000.0).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn small_probs() {
        for nu in [0.01, 0.3, 0.999, 1.0, 2.5, TORUS_AREA, 200.0] {
            let p = poisson_small_probs(nu).unwrap();
            let s = p.p_lt2 + p.p_eq2 + p.p_eq3 + p.p_ge4;
            assert!((s - 1.0).abs() < 1e-14, "nu {nu}: {s}");
        }
        let p = poisson_small_probs(0.01).unwrap();
        assert!((p.p_lt2 - 0.999_950_332_4).abs() < 1e-9);
        let q = poisson_small_probs(TORUS_AREA).unwrap();
        let expect = (-TORUS_AREA).exp() * (1.0 + TORUS_AREA);
        assert!((q.p_lt2 / expect - 1.0).abs() < 1e-14);
        assert!(poisson_small_probs(0.0).is_err());
    }

    #[test]
    fn summands_bounded() {
        let areas = sample_cap_areas(10_000, SeedSpec::new(9, 0));
        let lambda: f64 = 2.0;
        for &g in &areas {
            let s = (-lambda * g).exp() + (-lambda * (TORUS_AREA - g)).exp();
            assert!(s > 0.0 && s <= 2.0);
        }
        let a = ef3_from_areas(lambda, &areas).unwrap();
        assert!(a.value > 0.0 && a.standard_error > 0.0);
        assert_eq!(a.samples, 10_000);
    }

    #[test]
    fn valence_tail_is_negligible() {
        let areas = sample_cap_areas(10_000, SeedSpec::new(9, 1));
        for lambda in [0.5, 1.0, 2.0] {
            let v = evbar_from_areas(lambda, &areas).unwrap();
            assert!(v.tail_term >= 0.0 && v.tail_term < v.tail_bound, "{v:?}");
        }
    }

    #[test]
    fn estimates_are_reproducible() {
        let a = ef3_formula(1.0, 9000, SeedSpec::new(10, 0)).unwrap();
        let b = ef3_formula(1.0, 9000, SeedSpec::new(10, 0)).unwrap();
        assert_eq!(a, b);
        assert!(ef3_formula(-1.0, 10, SeedSpec::new(10, 0)).is_err());
    }
}
