//! Measure functions of the cap-area distribution over quadruples.
//!
//! For a quadruple `x ∈ (T²)⁴` let `G(x)` be the area of the smaller cap cut
//! off by the hyperplane through `x`. The measure functions are
//!
//! ```text
//! M(t) = mes₈{x : G(x) < t}
//! N(t) = mes₈{x : G(x) < t, min(a, b) < 100}
//! L(t) = mes₈{x : G(x) < t, min(a, b) ≥ 100}
//! ```
//!
//! estimated here by uniform sampling of quadruples, and compared with the
//! `t³|ln t|` growth law. The module also carries the change of variables
//! `(α, β, φ₀, ψ₀, θ₁..θ₄) → (φ₁, ψ₁, …, φ₄, ψ₄)` used for small caps, its
//! reduced Jacobian, and the closed form of `∫∫ α²β² dα dβ` over the small-cap
//! region.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DomainError, GeometryError, MeasureError};
use crate::sampling::{uniform_torus_points, SeedSpec};
use crate::stats::{line_fit, LineFit};
use crate::torus::{cap_from_points, cap_measure, normalize_angle, Cap, TorusPoint, HALF_TORUS_AREA};

/// `min(a, b)` below this puts a quadruple in the `N` branch.
pub const BRANCH_LIMIT: f64 = 100.0;

/// `mes₈((T²)⁴) = (4π²)⁴`.
pub const QUADRUPLE_MEASURE: f64 = 256.0 * PI * PI * PI * PI * PI * PI * PI * PI;

/// Quadruples per random substream.
pub const CHUNK: usize = 4096;

/// Minimum hits per threshold inside a fitted range.
pub const HIT_FLOOR: u64 = 100;

/// Upper end of the `(α, β)` box in the small-cap parametrization.
pub const SMALL_CAP_LIMIT: f64 = 0.01;

/// Cap of one sampled quadruple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapSampleRecord {
    pub a: f64,
    pub b: f64,
    pub g: f64,
    pub small_branch: bool,
}

impl CapSampleRecord {
    pub fn from_cap(cap: &Cap) -> Self {
        Self { a: cap.a, b: cap.b, g: cap_measure(cap), small_branch: cap.a.min(cap.b) < BRANCH_LIMIT }
    }
}

/// Sampled records plus the number of discarded degenerate quadruples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapSampleBatch {
    pub records: Vec<CapSampleRecord>,
    pub resampled: u64,
}

/// Draws the cap of one uniform quadruple, redrawing degenerate ones.
pub fn draw_cap<R: Rng + ?Sized>(rng: &mut R, resampled: &mut u64) -> Cap {
    loop {
        let p = uniform_torus_points(rng, 4);
        match cap_from_points([p[0], p[1], p[2], p[3]]) {
            Ok(cap) => return cap,
            Err(GeometryError::AffinelyDependent | GeometryError::EmptyBoundary { .. }) => *resampled += 1,
            Err(e) => unreachable!("cap of sampled quadruple: {e}"),
        }
    }
}

/// Number of records in chunk `c` of a `k`-sample campaign.
fn chunk_len(k: usize, c: usize) -> usize {
    CHUNK.min(k - c * CHUNK)
}

/// `k` cap records of independent uniform quadruples. Chunk `c` of
/// [`CHUNK`] records is drawn from `seed.substream(c)`, so the output does
/// not depend on the thread count.
pub fn sample_cap_records(k: usize, seed: SeedSpec) -> CapSampleBatch {
    let chunks = k.div_ceil(CHUNK);
    let parts: Vec<(Vec<CapSampleRecord>, u64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seed.substream(c as u64).rng();
            let mut resampled = 0;
            let recs =
                (0..chunk_len(k, c)).map(|_| CapSampleRecord::from_cap(&draw_cap(&mut rng, &mut resampled))).collect();
            (recs, resampled)
        })
        .collect();
    let mut records = Vec::with_capacity(k);
    let mut resampled = 0;
    for (r, n) in parts {
        records.extend(r);
        resampled += n;
    }
    CapSampleBatch { records, resampled }
}

/// Mergeable histogram of cap areas against a fixed threshold grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileAccumulator {
    thresholds: Vec<f64>,
    /// `small[i]`: small-branch records with exactly `i` thresholds `≤ g`.
    small: Vec<u64>,
    large: Vec<u64>,
    pub resampled: u64,
}

impl ProfileAccumulator {
    pub fn new(thresholds: &[f64]) -> Result<Self, MeasureError> {
        if thresholds.iter().any(|t| !t.is_finite()) || thresholds.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(MeasureError::InvalidThresholds);
        }
        let n = thresholds.len() + 1;
        Ok(Self { thresholds: thresholds.to_vec(), small: vec![0; n], large: vec![0; n], resampled: 0 })
    }

    pub fn push(&mut self, r: &CapSampleRecord) {
        let bin = self.thresholds.partition_point(|&t| t <= r.g);
        if r.small_branch {
            self.small[bin] += 1;
        } else {
            self.large[bin] += 1;
        }
    }

    pub fn merge(&mut self, other: &Self) {
        assert_eq!(self.thresholds, other.thresholds, "merging different grids");
        for (x, y) in self.small.iter_mut().zip(&other.small) {
            *x += y;
        }
        for (x, y) in self.large.iter_mut().zip(&other.large) {
            *x += y;
        }
        self.resampled += other.resampled;
    }

    pub fn count(&self) -> u64 {
        self.small.iter().chain(&self.large).sum()
    }

    /// Scaled empirical measure functions with binomial standard errors.
    pub fn finish(&self) -> Result<MeasureProfile, MeasureError> {
        let total = self.count();
        if total == 0 {
            return Err(MeasureError::EmptyInput);
        }
        let k = self.thresholds.len();
        let (mut n_count, mut l_count) = (Vec::with_capacity(k), Vec::with_capacity(k));
        let (mut cs, mut cl) = (0u64, 0u64);
        // records with g < thresholds[i] sit in bins 0..=i
        for i in 0..k {
            cs += self.small[i];
            cl += self.large[i];
            n_count.push(cs);
            l_count.push(cl);
        }
        let nf = total as f64;
        let scale = |c: u64| QUADRUPLE_MEASURE * (c as f64 / nf);
        let se = |c: u64| {
            let p = c as f64 / nf;
            QUADRUPLE_MEASURE * (p * (1.0 - p) / nf).sqrt()
        };
        let n_hat: Vec<f64> = n_count.iter().map(|&c| scale(c)).collect();
        let l_hat: Vec<f64> = l_count.iter().map(|&c| scale(c)).collect();
        let m_hat = n_hat.iter().zip(&l_hat).map(|(n, l)| n + l).collect();
        let m_count: Vec<u64> = n_count.iter().zip(&l_count).map(|(n, l)| n + l).collect();
        Ok(MeasureProfile {
            thresholds: self.thresholds.clone(),
            m_se: m_count.iter().map(|&c| se(c)).collect(),
            n_se: n_count.iter().map(|&c| se(c)).collect(),
            l_se: l_count.iter().map(|&c| se(c)).collect(),
            m_hat,
            n_hat,
            l_hat,
            m_count,
            n_count,
            l_count,
            sample_count: total,
            resampled: self.resampled,
        })
    }
}

/// Empirical `M`, `N`, `L` on a threshold grid, scaled by `256π⁸`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureProfile {
    pub thresholds: Vec<f64>,
    /// `n_hat + l_hat`, elementwise.
    pub m_hat: Vec<f64>,
    pub n_hat: Vec<f64>,
    pub l_hat: Vec<f64>,
    pub m_se: Vec<f64>,
    pub n_se: Vec<f64>,
    pub l_se: Vec<f64>,
    pub m_count: Vec<u64>,
    pub n_count: Vec<u64>,
    pub l_count: Vec<u64>,
    pub sample_count: u64,
    pub resampled: u64,
}

/// Empirical profile of `records` at `thresholds` (finite, strictly increasing).
pub fn estimate_profile(records: &[CapSampleRecord], thresholds: &[f64]) -> Result<MeasureProfile, MeasureError> {
    let mut acc = ProfileAccumulator::new(thresholds)?;
    for r in records {
        acc.push(r);
    }
    acc.finish()
}

/// Samples `k` quadruples and accumulates their profile without storing
/// the records.
pub fn sample_profile(k: usize, seed: SeedSpec, thresholds: &[f64]) -> Result<MeasureProfile, MeasureError> {
    let empty = ProfileAccumulator::new(thresholds)?;
    let chunks = k.div_ceil(CHUNK);
    let parts: Vec<ProfileAccumulator> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = empty.clone();
            let mut rng = seed.substream(c as u64).rng();
            let mut resampled = 0;
            for _ in 0..chunk_len(k, c) {
                acc.push(&CapSampleRecord::from_cap(&draw_cap(&mut rng, &mut resampled)));
            }
            acc.resampled = resampled;
            acc
        })
        .collect();
    let mut total = empty;
    for p in &parts {
        total.merge(p);
    }
    total.finish()
}

/// `bins` geometrically spaced thresholds from `t_min` to `t_max` inclusive.
pub fn geometric_thresholds(t_min: f64, t_max: f64, bins: usize) -> Vec<f64> {
    assert!(t_min > 0.0 && t_max > t_min && bins >= 2);
    let ratio = (t_max / t_min).ln();
    let mut out: Vec<f64> = (0..bins).map(|i| t_min * (ratio * i as f64 / (bins - 1) as f64).exp()).collect();
    out[bins - 1] = t_max;
    out
}

/// Default grid: 60 geometric thresholds over `[10⁻³, 2π²]`.
pub fn default_thresholds() -> Vec<f64> {
    geometric_thresholds(1e-3, HALF_TORUS_AREA, 60)
}

/// `t³|ln t|`.
pub fn scaling_law(t: f64) -> f64 {
    t * t * t * t.ln().abs()
}

/// Log-log fit of one measure function against its growth law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentFit {
    pub fit: LineFit,
    /// Minimum and maximum of estimate / law over the range.
    pub gamma_low: f64,
    pub gamma_high: f64,
    pub bins: usize,
}

fn component_fit(ts: &[f64], ys: &[f64], law: impl Fn(f64) -> f64) -> Option<ComponentFit> {
    if ys.iter().any(|&y| !(y > 0.0)) {
        return None;
    }
    let xs: Vec<f64> = ts.iter().map(|&t| law(t).ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let fit = line_fit(&xs, &ly)?;
    let ratios: Vec<f64> = ts.iter().zip(ys).map(|(&t, y)| y / law(t)).collect();
    Some(ComponentFit {
        fit,
        gamma_low: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        gamma_high: ratios.iter().copied().fold(0.0, f64::max),
        bins: ts.len(),
    })
}

/// Empirical growth constants of the measure functions over a range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFitReport {
    pub fit_range: (f64, f64),
    /// Slope of `ln m_hat` against `ln(t³|ln t|)`.
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
    /// Extremes of `m_hat / (t³|ln t|)` over the range.
    pub gamma_low: f64,
    pub gamma_high: f64,
    pub bins: usize,
    pub min_hits: u64,
    /// `n_hat` against `t³`; absent when some bin has no small-branch hit.
    pub n_fit: Option<ComponentFit>,
    /// `l_hat` against `t³|ln t|`; absent when some bin has no large-branch hit.
    pub l_fit: Option<ComponentFit>,
}

impl ScalingFitReport {
    pub fn ratio_spread(&self) -> f64 {
        self.gamma_high / self.gamma_low
    }
}

/// Fits the thresholds of `profile` inside `[t_min, t_max]`.
pub fn fit_scaling(profile: &MeasureProfile, t_min: f64, t_max: f64) -> Result<ScalingFitReport, MeasureError> {
    if !(t_min > 0.0 && t_min < t_max && t_max < 0.5) {
        return Err(MeasureError::InvalidRange { t_min, t_max });
    }
    let idx: Vec<usize> =
        (0..profile.thresholds.len()).filter(|&i| (t_min..=t_max).contains(&profile.thresholds[i])).collect();
    if idx.len() < 3 {
        return Err(MeasureError::InsufficientData(format!("{} thresholds in range, need 3", idx.len())));
    }
    let min_hits = idx.iter().map(|&i| profile.m_count[i]).min().unwrap_or(0);
    if min_hits < HIT_FLOOR {
        return Err(MeasureError::InsufficientData(format!(
            "a threshold in range has {min_hits} hits, need {HIT_FLOOR}"
        )));
    }
    let ts: Vec<f64> = idx.iter().map(|&i| profile.thresholds[i]).collect();
    let pick = |v: &[f64]| idx.iter().map(|&i| v[i]).collect::<Vec<f64>>();
    let m = component_fit(&ts, &pick(&profile.m_hat), scaling_law)
        .ok_or_else(|| MeasureError::InsufficientData("degenerate fit".into()))?;
    Ok(ScalingFitReport {
        fit_range: (t_min, t_max),
        slope: m.fit.slope,
        slope_se: m.fit.slope_se,
        intercept: m.fit.intercept,
        gamma_low: m.gamma_low,
        gamma_high: m.gamma_high,
        bins: ts.len(),
        min_hits,
        n_fit: component_fit(&ts, &pick(&profile.n_hat), |t| t * t * t),
        l_fit: component_fit(&ts, &pick(&profile.l_hat), scaling_law),
    })
}

/// Small-cap parametrization of a quadruple on the cap boundary:
/// `sin((φᵢ−φ₀)/2) = α cos θᵢ`, `sin((ψᵢ−ψ₀)/2) = β sin θᵢ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaParam {
    pub alpha: f64,
    pub beta: f64,
    pub phi0: f64,
    pub psi0: f64,
    pub theta: [f64; 4],
}

impl ThetaParam {
    /// Requires `α, β ∈ (0, 1/100)`; angles are normalized.
    pub fn new(alpha: f64, beta: f64, phi0: f64, psi0: f64, theta: [f64; 4]) -> Result<Self, DomainError> {
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !(v > 0.0 && v < SMALL_CAP_LIMIT) {
                return Err(DomainError { name, value: v, domain: "(0, 1/100)" });
            }
        }
        Ok(Self {
            alpha,
            beta,
            phi0: normalize_angle(phi0),
            psi0: normalize_angle(psi0),
            theta: theta.map(normalize_angle),
        })
    }
}

/// The four boundary points of the parametrized cap.
pub fn theta_to_points(p: &ThetaParam) -> [TorusPoint; 4] {
    p.theta
        .map(|t| TorusPoint::new(p.phi0 + 2.0 * (p.alpha * t.cos()).asin(), p.psi0 + 2.0 * (p.beta * t.sin()).asin()))
}

/// Parity of a permutation of `0..4`.
fn parity(p: &[usize; 4]) -> f64 {
    let mut inversions = 0;
    for i in 0..4 {
        for j in i + 1..4 {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    let p = [i, j, k, l];
                    if (0..4).all(|m| p.contains(&m)) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// `Σ sign(ijkl) cᵢ² cⱼ sₖ² sₗ · wⱼ zₗ` over permutations of four indices.
fn weighted_sum(c: &[f64; 4], s: &[f64; 4], w: &[f64; 4], z: &[f64; 4]) -> f64 {
    permutations4()
        .iter()
        .map(|&[i, j, k, l]| parity(&[i, j, k, l]) * c[i] * c[i] * c[j] * s[k] * s[k] * s[l] * w[j] * z[l])
        .sum()
}

/// `Σ sign(ijkl) cos²θᵢ cos θⱼ sin²θₖ sin θₗ`, from the cosines and sines.
pub fn signed_theta_sum(cos: &[f64; 4], sin: &[f64; 4]) -> f64 {
    weighted_sum(cos, sin, &[1.0; 4], &[1.0; 4])
}

/// Reduced Jacobian `J₁ = J/(α²β²)` of the small-cap parametrization,
/// evaluated as the 24-term permutation sum.
pub fn jacobian_reduced(p: &ThetaParam) -> f64 {
    let pts = theta_to_points(p);
    let cphi = pts.map(|q| (normalize_angle(q.phi() - p.phi0) * 0.5).cos());
    let cpsi = pts.map(|q| (normalize_angle(q.psi() - p.psi0) * 0.5).cos());
    let c = p.theta.map(f64::cos);
    let s = p.theta.map(f64::sin);
    let denom: f64 = cphi.iter().chain(&cpsi).product();
    64.0 * weighted_sum(&c, &s, &cphi, &cpsi) / denom
}

/// Outputs `(φ₁, ψ₁, …, φ₄, ψ₄)` as functions of the eight parameters
/// `(φ₀, ψ₀, α, β, θ₁, …, θ₄)`, split into the centre offset and the small
/// displacement from it so that differences of the two can be taken apart.
fn theta_map(x: &[f64; 8]) -> ([f64; 8], [f64; 8]) {
    let mut offset = [0.0; 8];
    let mut disp = [0.0; 8];
    for i in 0..4 {
        offset[2 * i] = x[0];
        offset[2 * i + 1] = x[1];
        disp[2 * i] = 2.0 * (x[2] * x[4 + i].cos()).asin();
        disp[2 * i + 1] = 2.0 * (x[3] * x[4 + i].sin()).asin();
    }
    (offset, disp)
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant<const N: usize>(mut m: [[f64; N]; N]) -> f64 {
    let mut det = 1.0;
    for k in 0..N {
        let p = (k..N).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs())).unwrap();
        if m[p][k] == 0.0 {
            return 0.0;
        }
        if p != k {
            m.swap(p, k);
            det = -det;
        }
        det *= m[k][k];
        for i in k + 1..N {
            let f = m[i][k] / m[k][k];
            for j in k..N {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    det
}

/// Jacobian determinant of [`theta_to_points`] by central differences.
pub fn jacobian_finite_difference(p: &ThetaParam, step: f64) -> f64 {
    let x = [p.phi0, p.psi0, p.alpha, p.beta, p.theta[0], p.theta[1], p.theta[2], p.theta[3]];
    let mut m = [[0.0; 8]; 8];
    for (r, row) in m.iter_mut().enumerate() {
        let (mut hi, mut lo) = (x, x);
        hi[r] += step;
        lo[r] -= step;
        let ((oh, dh), (ol, dl)) = (theta_map(&hi), theta_map(&lo));
        for c in 0..8 {
            row[c] = ((oh[c] - ol[c]) + (dh[c] - dl[c])) / (2.0 * step);
        }
    }
    determinant(m)
}

/// Finite-difference step of the Jacobian check.
pub const JACOBIAN_FD_STEP: f64 = 1e-6;

/// Agreement of `α²β²·J₁` with the finite-difference determinant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobianCheck {
    pub samples: usize,
    pub tolerance: f64,
    pub max_relative_error: f64,
    pub failures: usize,
    /// Signed θ-sum at `θ = (−π/2, 0, π/2, π)`.
    pub reference_signed_sum: f64,
    /// Smallest `|J₁|` on the grid around the reference point.
    pub grid_min_abs_j1: f64,
    pub grid_points: usize,
}

impl JacobianCheck {
    pub fn pass(&self) -> bool {
        self.failures == 0 && self.reference_signed_sum == 4.0 && self.grid_min_abs_j1 > 64.0
    }
}

/// Half-width of the θ box around `(−π/2, 0, π/2, π)` on which `|J₁| > 64`.
pub const J1_GRID_HALF_WIDTH: f64 = 0.05;

/// Random parameter draw for the Jacobian check: `α, β` log-uniform on
/// `[10⁻⁴, 10⁻²)`, angles uniform.
pub fn random_theta_param<R: Rng + ?Sized>(rng: &mut R) -> ThetaParam {
    let mut ang = || PI - 2.0 * PI * rng.random::<f64>();
    let (phi0, psi0) = (ang(), ang());
    let theta = [ang(), ang(), ang(), ang()];
    let alpha = 1e-4 * 100f64.powf(rng.random::<f64>());
    let beta = 1e-4 * 100f64.powf(rng.random::<f64>());
    ThetaParam::new(alpha.min(0.0099), beta.min(0.0099), phi0, psi0, theta).expect("draw in domain")
}

/// Compares the analytic and finite-difference Jacobians on `samples`
/// random draws and scans `|J₁|` on a `5⁴` θ-grid for several `(α, β)`.
pub fn jacobian_check(samples: usize, tolerance: f64, seed: SeedSpec) -> JacobianCheck {
    let mut rng = seed.rng();
    let mut max_rel: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..samples {
        let p = random_theta_param(&mut rng);
        let analytic = p.alpha * p.alpha * p.beta * p.beta * jacobian_reduced(&p);
        let fd = jacobian_finite_difference(&p, JACOBIAN_FD_STEP);
        let rel = (analytic.abs() - fd.abs()).abs() / fd.abs();
        if !(rel < tolerance) {
            failures += 1;
        }
        max_rel = max_rel.max(if rel.is_nan() { f64::INFINITY } else { rel });
    }
    let reference = [-PI / 2.0, 0.0, PI / 2.0, PI];
    let mut grid_min = f64::INFINITY;
    let mut grid_points = 0;
    let offsets: Vec<f64> = (0..5).map(|i| J1_GRID_HALF_WIDTH * (i as f64 / 2.0 - 1.0)).collect();
    for &(alpha, beta) in &[(1e-4, 1e-4), (1e-3, 5e-3), (0.0099, 0.0099), (0.0099, 1e-4)] {
        for &d0 in &offsets {
            for &d1 in &offsets {
                for &d2 in &offsets {
                    for &d3 in &offsets {
                        let th = [reference[0] + d0, reference[1] + d1, reference[2] + d2, reference[3] + d3];
                        let p = ThetaParam::new(alpha, beta, 0.7, -1.9, th).expect("grid in domain");
                        grid_min = grid_min.min(jacobian_reduced(&p).abs());
                        grid_points += 1;
                    }
                }
            }
        }
    }
    JacobianCheck {
        samples,
        tolerance,
        max_relative_error: max_rel,
        failures,
        reference_signed_sum: signed_theta_sum(&[0.0, 1.0, 0.0, -1.0], &[-1.0, 0.0, 1.0, 0.0]),
        grid_min_abs_j1: grid_min,
        grid_points,
    }
}

/// `∫∫ α²β² dα dβ` over `{max(α, β) < 1/100, αβ < τ}`, for `0 < τ < 10⁻⁴`:
/// `τ³/9 − (2 ln 100/3) τ³ + (1/3) τ³ |ln τ|`.
pub fn alpha_beta_integral(tau: f64) -> Result<f64, DomainError> {
    if !(tau > 0.0 && tau < SMALL_CAP_LIMIT * SMALL_CAP_LIMIT) {
        return Err(DomainError { name: "alpha_beta_integral", value: tau, domain: "(0, 1/10000)" });
    }
    let t3 = tau * tau * tau;
    Ok(t3 / 9.0 - (2.0 * 100f64.ln() / 3.0) * t3 + t3 * tau.ln().abs() / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{cap_from_points, Cap};

    fn rec(g: f64, small: bool) -> CapSampleRecord {
        CapSampleRecord { a: 1.0, b: 1.0, g, small_branch: small }
    }

    #[test]
    fn profile_counts_and_scaling() {
        let recs = [rec(0.05, true), rec(0.15, false), rec(0.15, true), rec(3.0, true), rec(HALF_TORUS_AREA, false)];
        let ts = [-1.0, 0.0, 0.1, 0.15, 0.2, HALF_TORUS_AREA, 25.0];
        let p = estimate_profile(&recs, &ts).unwrap();
        assert_eq!(p.m_count, vec![0, 0, 1, 1, 3, 4, 5]);
        assert_eq!(p.n_count, vec![0, 0, 1, 1, 2, 3, 3]);
        assert_eq!(p.l_count, vec![0, 0, 0, 0, 1, 1, 2]);
        for i in 0..ts.len() {
            assert_eq!(p.m_hat[i], p.n_hat[i] + p.l_hat[i]);
        }
        assert!((p.m_hat[6] - QUADRUPLE_MEASURE).abs() <= 1e-15 * QUADRUPLE_MEASURE);
        assert!(p.m_hat.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(p.m_se[6], 0.0);
    }

    #[test]
    fn profile_errors() {
        assert_eq!(estimate_profile(&[], &[1.0]), Err(MeasureError::EmptyInput));
        assert_eq!(estimate_profile(&[rec(1.0, true)], &[2.0, 1.0]), Err(MeasureError::InvalidThresholds));
        assert_eq!(estimate_profile(&[rec(1.0, true)], &[f64::NAN]), Err(MeasureError::InvalidThresholds));
    }

    #[test]
    fn accumulator_merge_matches_single_pass() {
        let batch = sample_cap_records(5000, SeedSpec::new(3, 0));
        let ts = default_thresholds();
        let whole = estimate_profile(&batch.records, &ts).unwrap();
        let mut a = ProfileAccumulator::new(&ts).unwrap();
        let mut b = a.clone();
        for r in &batch.records[..1234] {
            a.push(r);
        }
        for r in &batch.records[1234..] {
            b.push(r);
        }
        a.merge(&b);
        assert_eq!(a.finish().unwrap(), whole);
        let streamed = sample_profile(5000, SeedSpec::new(3, 0), &ts).unwrap();
        assert_eq!(streamed.m_count, whole.m_count);
    }

    #[test]
    fn records_satisfy_cap_invariants() {
        let batch = sample_cap_records(20_000, SeedSpec::new(4, 1));
        assert_eq!(batch.records.len(), 20_000);
        for r in &batch.records {
            assert!(r.g > 0.0 && r.g <= HALF_TORUS_AREA);
            assert!(r.a * r.a + r.b * r.b >= 2.0 - 1e-9);
            assert_eq!(r.small_branch, r.a.min(r.b) < BRANCH_LIMIT);
        }
        assert_eq!(sample_cap_records(20_000, SeedSpec::new(4, 1)), batch);
    }

    #[test]
    fn thresholds_grid() {
        let t = default_thresholds();
        assert_eq!(t.len(), 60);
        assert_eq!(t[0], 1e-3);
        assert_eq!(t[59], HALF_TORUS_AREA);
        let r = t[1] / t[0];
        assert!(t.windows(2).all(|w| ((w[1] / w[0]) / r - 1.0).abs() < 1e-12));
    }

    #[test]
    fn fit_range_checks() {
        let batch = sample_cap_records(1000, SeedSpec::new(5, 0));
        let p = estimate_profile(&batch.records, &default_thresholds()).unwrap();
        assert!(matches!(fit_scaling(&p, 0.3, 0.1), Err(MeasureError::InvalidRange { .. })));
        assert!(matches!(fit_scaling(&p, 0.01, 0.6), Err(MeasureError::InvalidRange { .. })));
        assert!(matches!(fit_scaling(&p, 0.005, 0.3), Err(MeasureError::InsufficientData(_))));
    }

    #[test]
    fn theta_points_lie_on_boundary() {
        let p = ThetaParam::new(0.004, 0.004, 0.3, -2.0, [0.1, 1.7, -2.5, 3.0]).unwrap();
        let cap = Cap::new(1.0 / p.alpha, 1.0 / p.beta, p.phi0, p.psi0).unwrap();
        for q in theta_to_points(&p) {
            assert!((cap.level(q) - 1.0).abs() < 1e-12);
        }
        let p = ThetaParam::new(0.003, 0.007, 1.0, 2.0, [0.0, 1.0, 2.0, 3.0]).unwrap();
        let q = theta_to_points(&p)[0];
        assert!((q.phi() - (1.0 + 2.0 * 0.003f64.asin())).abs() < 1e-15);
        assert_eq!(q.psi(), 2.0);
    }

    #[test]
    fn theta_round_trip() {
        let p = ThetaParam::new(0.002, 0.005, -1.2, 2.9, [-2.0, -0.4, 1.1, 2.6]).unwrap();
        let cap = cap_from_points(theta_to_points(&p)).unwrap();
        assert!((cap.a - 500.0).abs() < 1e-6 * 500.0);
        assert!((cap.b - 200.0).abs() < 1e-6 * 200.0);
        assert!(normalize_angle(cap.phi0 - p.phi0).abs() < 1e-6);
        assert!(normalize_angle(cap.psi0 - p.psi0).abs() < 1e-6);
    }

    #[test]
    fn theta_param_domain() {
        assert!(ThetaParam::new(0.0, 0.005, 0.0, 0.0, [0.0; 4]).is_err());
        assert!(ThetaParam::new(0.005, 0.01, 0.0, 0.0, [0.0; 4]).is_err());
    }

    #[test]
    fn signed_sum_at_reference_point() {
        // θ = (−π/2, 0, π/2, π)
        let cos = [0.0, 1.0, 0.0, -1.0];
        let sin = [-1.0, 0.0, 1.0, 0.0];
        assert_eq!(signed_theta_sum(&cos, &sin), 4.0);
        let p = ThetaParam::new(1e-3, 1e-3, 0.0, 0.0, [-PI / 2.0, 0.0, PI / 2.0, PI]).unwrap();
        let j = jacobian_reduced(&p).abs();
        assert!((j / 256.0 - 1.0).abs() < 0.01, "{j}");
    }

    #[test]
    fn jacobian_vanishes_for_equal_thetas() {
        let p = ThetaParam::new(0.005, 0.002, 0.4, 0.4, [0.7; 4]).unwrap();
        assert!(jacobian_reduced(&p).abs() < 1e-12);
    }

    #[test]
    fn jacobian_check_passes() {
        let r = jacobian_check(1000, 1e-5, SeedSpec::new(12, 0));
        assert!(r.pass(), "{r:?}");
        assert_eq!(r.grid_points, 4 * 625);
    }

    #[test]
    fn determinant_of_known_matrix() {
        let m = [[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]];
        assert!((determinant(m) - 18.0).abs() < 1e-12);
        assert_eq!(determinant([[1.0, 2.0], [2.0, 4.0]]), 0.0);
    }

    #[test]
    fn alpha_beta_integral_domain_and_ratio() {
        assert!(alpha_beta_integral(1.0 / 5000.0).is_err());
        assert!(alpha_beta_integral(0.0).is_err());
        let r = alpha_beta_integral(1e-6).unwrap() / alpha_beta_integral(1e-5).unwrap();
        let l = |t: f64| t.ln().abs() + 1.0 / 3.0 - 2.0 * 100f64.ln();
        assert!((r - 1e-3 * l(1e-6) / l(1e-5)).abs() < 1e-15);
    }
}
