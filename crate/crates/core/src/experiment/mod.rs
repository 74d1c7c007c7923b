//! Batch experiments: hull simulation campaigns, cap and measure-profile
//! campaigns, integral cross-validation and the valence regression.
//!
//! Trial `i` at rate index `k` draws from the stream
//! `(master_seed, k·2³² + i)`, so results do not depend on scheduling; all
//! aggregates are pairwise sums over index-ordered data.

pub mod config;
pub mod output;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{ef3_from_areas, evbar_from_areas, sample_cap_areas, IntegralEstimate, ValenceEstimate};
use crate::hull::{build_hull, f_vector, mean_valence, validate};
use crate::measure::{
    fit_scaling, geometric_thresholds, jacobian_check, sample_cap_records, sample_profile, JacobianCheck,
    MeasureProfile, ScalingFitReport,
};
use crate::sampling::{sample_process, SeedSpec};
use crate::stats::{weighted_line_fit, Moments};
use crate::torus::{embed, CAP_BOUND_HIGH, CAP_BOUND_LOW, TORUS_AREA};

pub use config::{ExperimentConfig, Format, Mode, ResolvedConfig, REGRESSION_LAMBDAS};

/// Stream index of trial `trial` at rate index `k`.
pub fn trial_stream(k: usize, trial: u64) -> u64 {
    ((k as u64) << 32) + trial
}

/// Stream reserved for the cap-area sample of a campaign; never a trial stream.
pub const CAP_STREAM: u64 = u64::MAX;

/// One simulated hull.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    /// Stream index under the campaign's master seed.
    pub seed: u64,
    pub lambda: f64,
    pub n_points: u64,
    pub f0: u64,
    pub f1: u64,
    pub f2: u64,
    pub f3: u64,
    pub vbar: f64,
    pub euler_residual: i64,
    pub r1_residual: i64,
    pub r2_residual: i64,
    pub degenerate: bool,
}

/// Samples and hulls one process; a nonzero residual or a broken ridge on a
/// full-dimensional hull is an invariant violation.
pub fn simulate_trial(lambda: f64, seed: SeedSpec, trial: u64) -> Result<TrialRecord> {
    let sample = sample_process(lambda, seed)?;
    let pts: Vec<_> = sample.points.iter().map(|&p| embed(p)).collect();
    let hull = build_hull(&pts)?;
    let f = f_vector(&hull);
    let report = validate(&hull, &f);
    let rec = TrialRecord {
        trial,
        seed: seed.stream_index,
        lambda,
        n_points: pts.len() as u64,
        f0: f.f0,
        f1: f.f1,
        f2: f.f2,
        f3: f.f3,
        vbar: mean_valence(&f),
        euler_residual: report.euler_residual,
        r1_residual: report.r1_residual,
        r2_residual: report.r2_residual,
        degenerate: report.degenerate,
    };
    if !rec.degenerate && (!report.is_clean() || rec.f0 != rec.n_points) {
        return Err(Error::InvariantViolation(format!(
            "trial {trial} (stream {}): f = {f:?}, report = {report:?}, n = {}",
            seed.stream_index, rec.n_points
        )));
    }
    Ok(rec)
}

/// `trials` independent hulls at rate `lambda`, in trial order.
pub fn simulate_trials(lambda: f64, trials: u64, master_seed: u64, k: usize) -> Result<Vec<TrialRecord>> {
    let results: Vec<Result<TrialRecord>> = (0..trials)
        .into_par_iter()
        .map(|i| simulate_trial(lambda, SeedSpec::new(master_seed, trial_stream(k, i)), i))
        .collect();
    // first failure in trial order, independent of scheduling
    results.into_iter().collect()
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
}

impl From<Moments> for MeanSe {
    fn from(m: Moments) -> Self {
        Self { mean: m.mean, se: m.std_error() }
    }
}

fn mean_se(records: &[TrialRecord], f: impl Fn(&TrialRecord) -> f64) -> MeanSe {
    Moments::from_slice(&records.iter().map(f).collect::<Vec<_>>()).into()
}

/// Per-rate summary of a simulation campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub lambda: f64,
    pub trials: u64,
    /// `E n = 4π²λ`.
    pub expected_points: f64,
    pub n_points: MeanSe,
    pub f0: MeanSe,
    pub f1: MeanSe,
    pub f2: MeanSe,
    pub f3: MeanSe,
    pub vbar: MeanSe,
    pub degenerate_trials: u64,
}

pub fn summarize(lambda: f64, records: &[TrialRecord]) -> SimulationSummary {
    SimulationSummary {
        lambda,
        trials: records.len() as u64,
        expected_points: TORUS_AREA * lambda,
        n_points: mean_se(records, |r| r.n_points as f64),
        f0: mean_se(records, |r| r.f0 as f64),
        f1: mean_se(records, |r| r.f1 as f64),
        f2: mean_se(records, |r| r.f2 as f64),
        f3: mean_se(records, |r| r.f3 as f64),
        vbar: mean_se(records, |r| r.vbar),
        degenerate_trials: records.iter().filter(|r| r.degenerate).count() as u64,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub summary: SimulationSummary,
    pub trials: Vec<TrialRecord>,
}

pub fn run_simulate(cfg: &ResolvedConfig) -> Result<SimulateReport> {
    let lambda = cfg.lambdas[0];
    let trials = simulate_trials(lambda, cfg.trials, cfg.master_seed, 0)?;
    Ok(SimulateReport { summary: summarize(lambda, &trials), trials })
}

/// Weighted least squares of mean valence against `log₁₀(4π²λ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
    pub intercept_se: f64,
    pub lambdas: Vec<f64>,
    pub log10_n: Vec<f64>,
    pub mean_vbar: Vec<f64>,
    pub se_vbar: Vec<f64>,
    pub summaries: Vec<SimulationSummary>,
    #[serde(skip)]
    pub trials: Vec<TrialRecord>,
}

pub fn run_regress(cfg: &ResolvedConfig) -> Result<RegressionReport> {
    let mut summaries = Vec::new();
    let mut all = Vec::new();
    for (k, &lambda) in cfg.lambdas.iter().enumerate() {
        let recs = simulate_trials(lambda, cfg.trials, cfg.master_seed, k)?;
        summaries.push(summarize(lambda, &recs));
        all.extend(recs);
    }
    let log10_n: Vec<f64> = cfg.lambdas.iter().map(|l| (TORUS_AREA * l).log10()).collect();
    let mean_vbar: Vec<f64> = summaries.iter().map(|s| s.vbar.mean).collect();
    let se_vbar: Vec<f64> = summaries.iter().map(|s| s.vbar.se).collect();
    if let Some(bad) = se_vbar.iter().find(|&&s| !(s > 0.0)) {
        return Err(Error::Config(format!("regression needs positive standard errors, got {bad}; raise --trials")));
    }
    let weights: Vec<f64> = se_vbar.iter().map(|s| 1.0 / (s * s)).collect();
    let fit = weighted_line_fit(&log10_n, &mean_vbar, &weights)
        .ok_or_else(|| Error::Config("regression is singular: rates must be distinct".into()))?;
    Ok(RegressionReport {
        slope: fit.slope,
        slope_se: fit.slope_se,
        intercept: fit.intercept,
        intercept_se: fit.intercept_se,
        lambdas: cfg.lambdas.clone(),
        log10_n,
        mean_vbar,
        se_vbar,
        summaries,
        trials: all,
    })
}

/// Agreement of an integral-formula estimate with a simulation mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub formula: f64,
    pub formula_se: f64,
    pub simulation: f64,
    pub simulation_se: f64,
    pub combined_se: f64,
    /// `|formula − simulation| / combined_se`.
    pub z: f64,
    /// `z ≤` [`CROSS_CHECK_Z`].
    pub pass: bool,
}

/// Acceptance band of the cross-validation in combined standard errors.
pub const CROSS_CHECK_Z: f64 = 3.0;

impl CrossCheck {
    pub fn new(formula: &IntegralEstimate, simulation: MeanSe) -> Self {
        let combined_se = formula.standard_error.hypot(simulation.se);
        let z = (formula.value - simulation.mean).abs() / combined_se;
        Self {
            formula: formula.value,
            formula_se: formula.standard_error,
            simulation: simulation.mean,
            simulation_se: simulation.se,
            combined_se,
            z,
            pass: z <= CROSS_CHECK_Z,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralsEntry {
    pub lambda: f64,
    pub ef3: IntegralEstimate,
    pub evbar: ValenceEstimate,
    pub ef3_check: CrossCheck,
    pub evbar_check: CrossCheck,
    pub tail_within_bound: bool,
    pub simulation: SimulationSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralsReport {
    pub samples: u64,
    pub trials: u64,
    pub entries: Vec<IntegralsEntry>,
    pub pass: bool,
}

/// One cap-area sample shared by every rate, checked against simulation.
pub fn run_integrals(cfg: &ResolvedConfig) -> Result<IntegralsReport> {
    let areas = sample_cap_areas(cfg.samples as usize, SeedSpec::new(cfg.master_seed, CAP_STREAM));
    let mut entries = Vec::new();
    for (k, &lambda) in cfg.lambdas.iter().enumerate() {
        let ef3 = ef3_from_areas(lambda, &areas)?;
        let evbar = evbar_from_areas(lambda, &areas)?;
        let recs = simulate_trials(lambda, cfg.trials, cfg.master_seed, k)?;
        let simulation = summarize(lambda, &recs);
        entries.push(IntegralsEntry {
            lambda,
            ef3_check: CrossCheck::new(&ef3, simulation.f3),
            evbar_check: CrossCheck::new(&evbar.estimate, simulation.vbar),
            tail_within_bound: evbar.tail_term <= evbar.tail_bound,
            ef3,
            evbar,
            simulation,
        });
    }
    let pass = entries.iter().all(|e| e.ef3_check.pass && e.evbar_check.pass && e.tail_within_bound);
    Ok(IntegralsReport { samples: cfg.samples, trials: cfg.trials, entries, pass })
}

/// Cap-bound statistic `(a+1)(b+1)G` over random caps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapsReport {
    pub samples: u64,
    pub resampled: u64,
    pub bound_low: f64,
    pub bound_high: f64,
    pub min_statistic: f64,
    pub max_statistic: f64,
    pub violations: u64,
    pub area: MeanSe,
    pub small_branch: u64,
}

pub fn run_caps(cfg: &ResolvedConfig) -> Result<CapsReport> {
    let batch = sample_cap_records(cfg.samples as usize, SeedSpec::new(cfg.master_seed, CAP_STREAM));
    let stats: Vec<f64> = batch.records.iter().map(|r| (r.a + 1.0) * (r.b + 1.0) * r.g).collect();
    let areas: Vec<f64> = batch.records.iter().map(|r| r.g).collect();
    Ok(CapsReport {
        samples: cfg.samples,
        resampled: batch.resampled,
        bound_low: CAP_BOUND_LOW,
        bound_high: CAP_BOUND_HIGH,
        min_statistic: stats.iter().copied().fold(f64::INFINITY, f64::min),
        max_statistic: stats.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        violations: stats.iter().filter(|&&s| !(CAP_BOUND_LOW..=CAP_BOUND_HIGH).contains(&s)).count() as u64,
        area: Moments::from_slice(&areas).into(),
        small_branch: batch.records.iter().filter(|r| r.small_branch).count() as u64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureFitReport {
    pub profile: MeasureProfile,
    /// `m_hat = n_hat + l_hat` bit for bit.
    pub split_identity: bool,
    pub fit: Option<ScalingFitReport>,
    /// Why the fit could not be made, when it could not.
    pub fit_error: Option<String>,
}

pub fn run_measure_fit(cfg: &ResolvedConfig) -> Result<MeasureFitReport> {
    let thresholds = geometric_thresholds(cfg.t_min, cfg.t_max, cfg.bins);
    let profile = sample_profile(cfg.samples as usize, SeedSpec::new(cfg.master_seed, CAP_STREAM), &thresholds)?;
    let split_identity =
        profile.m_hat.iter().zip(profile.n_hat.iter().zip(&profile.l_hat)).all(|(m, (n, l))| *m == n + l);
    let (fit, fit_error) = match fit_scaling(&profile, cfg.t_min, cfg.t_max) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(MeasureFitReport { profile, split_identity, fit, fit_error })
}

pub fn run_jacobian_check(cfg: &ResolvedConfig) -> Result<JacobianCheck> {
    Ok(jacobian_check(cfg.samples as usize, cfg.tol, SeedSpec::new(cfg.master_seed, CAP_STREAM)))
}

/// Result of any mode; built once per run, so variant sizes do not matter.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Report {
    Simulate(SimulateReport),
    Caps(CapsReport),
    MeasureFit(MeasureFitReport),
    Integrals(IntegralsReport),
    Regress(RegressionReport),
    JacobianCheck(JacobianCheck),
}

pub fn run(cfg: &ResolvedConfig) -> Result<Report> {
    Ok(match cfg.mode {
        Mode::Simulate => Report::Simulate(run_simulate(cfg)?),
        Mode::Caps => Report::Caps(run_caps(cfg)?),
        Mode::MeasureFit => Report::MeasureFit(run_measure_fit(cfg)?),
        Mode::Integrals => Report::Integrals(run_integrals(cfg)?),
        Mode::Regress => Report::Regress(run_regress(cfg)?),
        Mode::JacobianCheck => Report::JacobianCheck(run_jacobian_check(cfg)?),
    })
}
