//! CSV and JSON emission. Column order is fixed; floats carry 17 significant digits.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::BenchError;
use crate::race::RaceReport;
use crate::sweep::SweepReport;

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const REFERENCE_FILE: &str = "reference.csv";
pub const TIMINGS_FILE: &str = "timings.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const RACE_FILE: &str = "race.csv";
pub const RACE_TRIALS_FILE: &str = "race_trials.csv";
pub const RACE_MANIFEST_FILE: &str = "race_manifest.json";

pub const RESULTS_COLUMNS: [&str; 13] = [
    "method",
    "family",
    "d",
    "replication",
    "instance_seed",
    "run_seed",
    "output_index",
    "value",
    "gap",
    "residual",
    "rel_gap",
    "rel_residual",
    "samples",
];
pub const SUMMARY_COLUMNS: [&str; 12] = [
    "method",
    "family",
    "d",
    "log2_d",
    "replications",
    "mean_gap",
    "mean_residual",
    "rel_gap",
    "rel_residual",
    "rel_gap_of_means",
    "rel_residual_of_means",
    "samples",
];
pub const REFERENCE_COLUMNS: [&str; 6] = ["d", "replication", "instance_seed", "f_star", "residual", "iterations"];
pub const TIMINGS_COLUMNS: [&str; 4] = ["task", "d", "replication", "wall_secs"];
pub const RACE_COLUMNS: [&str; 8] =
    ["d", "family", "solver", "trials", "mean_secs", "mean_objective", "max_rel_gap", "converged"];
pub const RACE_TRIALS_COLUMNS: [&str; 12] = [
    "d",
    "family",
    "trial",
    "solver_secs",
    "solver_repeats",
    "solver_objective",
    "admm_secs",
    "admm_iterations",
    "admm_stop",
    "admm_objective",
    "rel_gap",
    "admm_ball_violation",
];

pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

pub fn log2_dim(d: usize) -> f64 {
    (d as f64).log2()
}

fn write_csv<const N: usize>(path: &Path, columns: [&str; N], rows: impl Iterator<Item = [String; N]>) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(columns)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), BenchError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| BenchError::Io(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

#[derive(Serialize)]
struct AveragingEntry<'a> {
    method: &'a str,
    d: usize,
    normalize_then_mean: [f64; 2],
    mean_then_normalize: [f64; 2],
}

#[derive(Serialize)]
struct SweepManifest<'a> {
    tool: &'static str,
    version: &'static str,
    seed: u64,
    base_dim: usize,
    config: &'a crate::config::SweepConfig,
    files: Vec<&'static str>,
    /// `[gap, residual]` under both orders; the CSVs report `normalize_then_mean`.
    averaging: Vec<AveragingEntry<'a>>,
    failures: &'a [crate::sweep::RunFailure],
}

/// Writes every sweep file except the timings, which are not reproducible.
pub fn write_sweep(dir: &Path, cfg: &ExperimentConfig, report: &SweepReport) -> Result<Vec<PathBuf>, BenchError> {
    fs::create_dir_all(dir)?;
    let path = |name: &str| dir.join(name);
    write_csv(
        &path(RESULTS_FILE),
        RESULTS_COLUMNS,
        report.rows.iter().map(|r| {
            [
                r.method.clone(),
                r.family.clone(),
                r.d.to_string(),
                r.replication.to_string(),
                r.instance_seed.to_string(),
                r.run_seed.to_string(),
                r.output_index.to_string(),
                fmt_f64(r.value),
                fmt_f64(r.gap),
                fmt_f64(r.residual),
                fmt_f64(r.rel_gap),
                fmt_f64(r.rel_residual),
                r.samples.to_string(),
            ]
        }),
    )?;
    write_csv(
        &path(SUMMARY_FILE),
        SUMMARY_COLUMNS,
        report.summary.iter().map(|r| {
            [
                r.method.clone(),
                r.family.clone(),
                r.d.to_string(),
                fmt_f64(log2_dim(r.d)),
                r.replications.to_string(),
                fmt_f64(r.mean_gap),
                fmt_f64(r.mean_residual),
                fmt_f64(r.rel_gap),
                fmt_f64(r.rel_residual),
                fmt_f64(r.rel_gap_of_means),
                fmt_f64(r.rel_residual_of_means),
                r.samples.to_string(),
            ]
        }),
    )?;
    write_csv(
        &path(REFERENCE_FILE),
        REFERENCE_COLUMNS,
        report.references.iter().map(|r| {
            [
                r.d.to_string(),
                r.replication.to_string(),
                r.instance_seed.to_string(),
                fmt_f64(r.f_star),
                fmt_f64(r.residual),
                r.iterations.to_string(),
            ]
        }),
    )?;
    let manifest = SweepManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        base_dim: cfg.sweep.base_dim(),
        config: &cfg.sweep,
        files: vec![RESULTS_FILE, SUMMARY_FILE, REFERENCE_FILE, TIMINGS_FILE],
        averaging: report
            .summary
            .iter()
            .map(|r| AveragingEntry {
                method: &r.method,
                d: r.d,
                normalize_then_mean: [r.rel_gap, r.rel_residual],
                mean_then_normalize: [r.rel_gap_of_means, r.rel_residual_of_means],
            })
            .collect(),
        failures: &report.failures,
    };
    write_json(&path(MANIFEST_FILE), &manifest)?;
    Ok([RESULTS_FILE, SUMMARY_FILE, REFERENCE_FILE, MANIFEST_FILE].iter().map(|f| path(f)).collect())
}

pub fn write_timings(dir: &Path, report: &SweepReport) -> Result<PathBuf, BenchError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(TIMINGS_FILE);
    write_csv(
        &path,
        TIMINGS_COLUMNS,
        report
            .timings
            .iter()
            .map(|t| [t.task.clone(), t.d.to_string(), t.replication.to_string(), fmt_f64(t.wall_secs)]),
    )?;
    Ok(path)
}

#[derive(Serialize)]
struct RaceManifest<'a> {
    tool: &'static str,
    version: &'static str,
    seed: u64,
    config: &'a crate::config::RaceConfig,
    files: [&'static str; 2],
}

pub fn write_race(dir: &Path, cfg: &ExperimentConfig, report: &RaceReport) -> Result<Vec<PathBuf>, BenchError> {
    fs::create_dir_all(dir)?;
    let path = |name: &str| dir.join(name);
    write_csv(
        &path(RACE_FILE),
        RACE_COLUMNS,
        report.summary.iter().map(|r| {
            [
                r.d.to_string(),
                r.family.name().to_string(),
                r.solver.to_string(),
                r.trials.to_string(),
                fmt_f64(r.mean_secs),
                fmt_f64(r.mean_objective),
                fmt_f64(r.max_rel_gap),
                r.converged.to_string(),
            ]
        }),
    )?;
    write_csv(
        &path(RACE_TRIALS_FILE),
        RACE_TRIALS_COLUMNS,
        report.trials.iter().map(|r| {
            [
                r.d.to_string(),
                r.family.name().to_string(),
                r.trial.to_string(),
                fmt_f64(r.solver_secs),
                r.solver_repeats.to_string(),
                fmt_f64(r.solver_objective),
                fmt_f64(r.admm_secs),
                r.admm_iterations.to_string(),
                serde_json::to_value(r.admm_stop).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
                fmt_f64(r.admm_objective),
                fmt_f64(r.rel_gap),
                fmt_f64(r.admm_ball_violation),
            ]
        }),
    )?;
    let manifest = RaceManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        config: &cfg.race,
        files: [RACE_FILE, RACE_TRIALS_FILE],
    };
    write_json(&path(RACE_MANIFEST_FILE), &manifest)?;
    Ok([RACE_FILE, RACE_TRIALS_FILE, RACE_MANIFEST_FILE].iter().map(|f| path(f)).collect())
}
