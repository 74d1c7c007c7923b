//! Result emission. The primary output depends only on the configuration;
//! wall-clock metadata goes to a sidecar file so reruns stay byte-identical.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{Format, Report, ResolvedConfig, TrialRecord};
use crate::error::Result;
use crate::measure::scaling_law;

pub const CSV_HEADER: &str =
    "trial,seed,lambda,n_points,f0,f1,f2,f3,vbar,euler_residual,r1_residual,r2_residual,degenerate";

/// Decimal with 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// One header line plus one row per trial, in trial order.
pub fn trial_csv(records: &[TrialRecord]) -> String {
    let mut s = String::with_capacity(128 * (records.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.trial,
            r.seed,
            num(r.lambda),
            r.n_points,
            r.f0,
            r.f1,
            r.f2,
            r.f3,
            num(r.vbar),
            r.euler_residual,
            r.r1_residual,
            r.r2_residual,
            r.degenerate
        );
    }
    s
}

fn two_column(header: &str, xs: &[f64], ys: &[f64]) -> String {
    let mut s = format!("# {header}\n");
    for (x, y) in xs.iter().zip(ys) {
        let _ = writeln!(s, "{} {}", num(*x), num(*y));
    }
    s
}

/// Plot-ready data files as `(file suffix, contents)`.
pub fn dat_files(report: &Report) -> Vec<(&'static str, String)> {
    match report {
        Report::MeasureFit(r) => {
            let p = &r.profile;
            let law: Vec<f64> = p.thresholds.iter().map(|&t| scaling_law(t)).collect();
            vec![
                ("_m.dat", two_column("t m_hat", &p.thresholds, &p.m_hat)),
                ("_n.dat", two_column("t n_hat", &p.thresholds, &p.n_hat)),
                ("_l.dat", two_column("t l_hat", &p.thresholds, &p.l_hat)),
                ("_law.dat", two_column("t t^3|ln t|", &p.thresholds, &law)),
            ]
        }
        Report::Regress(r) => vec![("_vbar.dat", two_column("log10_n mean_vbar", &r.log10_n, &r.mean_vbar))],
        Report::Integrals(r) => {
            let lambdas: Vec<f64> = r.entries.iter().map(|e| e.lambda).collect();
            let col = |f: &dyn Fn(&super::IntegralsEntry) -> f64| r.entries.iter().map(f).collect::<Vec<f64>>();
            vec![
                ("_ef3_formula.dat", two_column("lambda ef3_formula", &lambdas, &col(&|e| e.ef3.value))),
                ("_ef3_simulation.dat", two_column("lambda ef3_simulation", &lambdas, &col(&|e| e.simulation.f3.mean))),
                ("_evbar_formula.dat", two_column("lambda evbar_formula", &lambdas, &col(&|e| e.evbar.estimate.value))),
                (
                    "_evbar_simulation.dat",
                    two_column("lambda evbar_simulation", &lambdas, &col(&|e| e.simulation.vbar.mean)),
                ),
            ]
        }
        Report::Simulate(_) | Report::Caps(_) | Report::JacobianCheck(_) => Vec::new(),
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    mode: &'static str,
    config: &'a ResolvedConfig,
    result: &'a Report,
}

/// JSON document: mode, resolved configuration and result.
pub fn report_json(cfg: &ResolvedConfig, report: &Report) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Envelope { mode: cfg.mode.name(), config: cfg, result: report })?;
    s.push('\n');
    Ok(s)
}

/// Run metadata that legitimately varies between identical runs.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub wall_clock_seconds: f64,
    pub threads: usize,
    pub version: &'static str,
}

/// `out` with its file stem extended by `suffix`.
pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}{suffix}"))
}

fn trial_records(report: &Report) -> Option<&[TrialRecord]> {
    match report {
        Report::Simulate(r) => Some(&r.trials),
        Report::Regress(r) => Some(&r.trials),
        _ => None,
    }
}

/// Writes the report to `out`, or to stdout when `out` is `None`.
///
/// JSON format writes the envelope. CSV format writes the trial table for
/// trial-based modes (the envelope goes to `<stem>.summary.json`) and the
/// envelope plus plot-ready `.dat` files otherwise. Metadata goes to
/// `<stem>.meta.json`, or to stderr for stdout output.
pub fn emit(cfg: &ResolvedConfig, report: &Report, out: Option<&Path>, meta: &RunMetadata) -> Result<()> {
    let json = report_json(cfg, report)?;
    let primary = match (cfg.format, trial_records(report)) {
        (Format::Csv, Some(recs)) => trial_csv(recs),
        _ => json.clone(),
    };
    let meta_json = serde_json::to_string_pretty(meta)? + "\n";
    match out {
        Some(path) => {
            std::fs::write(path, primary)?;
            if cfg.format == Format::Csv {
                if trial_records(report).is_some() {
                    std::fs::write(sibling(path, ".summary.json"), &json)?;
                }
                for (suffix, body) in dat_files(report) {
                    std::fs::write(sibling(path, suffix), body)?;
                }
            }
            std::fs::write(sibling(path, ".meta.json"), meta_json)?;
        }
        None => {
            std::io::stdout().lock().write_all(primary.as_bytes())?;
            eprint!("{meta_json}");
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_row_format() {
        let r = TrialRecord {
            trial: 3,
            seed: 3,
            lambda: 1.0,
            n_points: 40,
            f0: 40,
            f1: 200,
            f2: 320,
            f3: 160,
            vbar: 10.0,
            euler_residual: 0,
            r1_residual: 0,
            r2_residual: 0,
            degenerate: false,
        };
        let s = trial_csv(&[r]);
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.next(), Some("3,3,1.0000000000000000e0,40,40,200,320,160,1.0000000000000000e1,0,0,0,false"));
    }

    #[test]
    fn sibling_paths() {
        assert_eq!(sibling(Path::new("/tmp/run.json"), ".meta.json"), PathBuf::from("/tmp/run.meta.json"));
        assert_eq!(sibling(Path::new("out"), "_m.dat"), PathBuf::from("out_m.dat"));
    }
}
