//! Dimension sweep: every method on every `(d, replication)` instance.

use std::collections::BTreeMap;
use std::time::Instant;

use disfom::{generate_instance, SyntheticQpInstance};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::SweepConfig;
use crate::derive_seed;
use crate::error::BenchError;
use crate::methods::run_method;

const INSTANCE_SEED: u64 = 1;
const RUN_SEED: u64 = 2;

/// `f*` of one `(d, replication)` instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReferenceRow {
    pub d: usize,
    pub replication: usize,
    pub instance_seed: u64,
    pub f_star: f64,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub method: String,
    pub family: String,
    pub d: usize,
    pub replication: usize,
    pub instance_seed: u64,
    pub run_seed: u64,
    pub output_index: usize,
    pub value: f64,
    pub gap: f64,
    pub residual: f64,
    /// Normalized by the same method and replication at the base dimension.
    pub rel_gap: f64,
    pub rel_residual: f64,
    pub samples: u64,
}

/// Mean over replications for one `(method, d)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub method: String,
    pub family: String,
    pub d: usize,
    pub replications: usize,
    pub mean_gap: f64,
    pub mean_residual: f64,
    /// Normalize each replication, then average.
    pub rel_gap: f64,
    pub rel_residual: f64,
    /// Average, then normalize by the base-dimension average.
    pub rel_gap_of_means: f64,
    pub rel_residual_of_means: f64,
    pub samples: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunFailure {
    pub method: String,
    pub d: usize,
    pub replication: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimingRow {
    pub task: String,
    pub d: usize,
    pub replication: usize,
    pub wall_secs: f64,
}

#[derive(Clone, Debug, Default)]
pub struct SweepReport {
    pub references: Vec<ReferenceRow>,
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
    pub failures: Vec<RunFailure>,
    pub timings: Vec<TimingRow>,
}

impl SweepReport {
    pub fn total_runs(&self) -> usize {
        self.rows.len() + self.failures.len()
    }
}

fn prepare(
    cfg: &SweepConfig,
    seed: u64,
    d: usize,
    rep: usize,
) -> (Result<(SyntheticQpInstance, ReferenceRow), String>, TimingRow) {
    let start = Instant::now();
    let instance_seed = derive_seed(seed, d as u64, rep as u64, INSTANCE_SEED);
    let result = generate_instance(&cfg.problem.spec(d, instance_seed))
        .and_then(|inst| {
            let r = inst.reference_optimum()?;
            let grad = inst.exact_gradient(r.x.as_slice())?;
            let residual =
                disfom::residual_inf(r.x.as_slice(), &grad, inst.region(), disfom::DEFAULT_ACTIVE_TOL)?.residual_inf;
            let row = ReferenceRow { d, replication: rep, instance_seed, f_star: r.value, residual, iterations: r.iterations };
            Ok((inst, row))
        })
        .map_err(|e| e.to_string());
    let timing = TimingRow { task: "reference".into(), d, replication: rep, wall_secs: start.elapsed().as_secs_f64() };
    (result, timing)
}

/// Runs the sweep on `workers` threads. Runs are independent and single-threaded
/// internally; results are collected in `(method, d, replication)` order.
pub fn run_dimension_sweep(cfg: &SweepConfig, seed: u64, workers: usize) -> Result<SweepReport, BenchError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| BenchError::Config(format!("cannot start {workers} workers: {e}")))?;

    let cells: Vec<(usize, usize)> =
        cfg.dims.iter().flat_map(|&d| (0..cfg.replications).map(move |r| (d, r))).collect();
    let prepared: Vec<_> = pool.install(|| cells.par_iter().map(|&(d, r)| prepare(cfg, seed, d, r)).collect());

    let mut report = SweepReport::default();
    let mut instances = BTreeMap::new();
    let mut cell_errors = BTreeMap::new();
    for (&(d, r), (result, timing)) in cells.iter().zip(prepared) {
        report.timings.push(timing);
        match result {
            Ok((inst, row)) => {
                report.references.push(row.clone());
                instances.insert((d, r), (inst, row));
            }
            Err(message) => {
                cell_errors.insert((d, r), message);
            }
        }
    }

    let tasks: Vec<(usize, usize, usize)> = (0..cfg.methods.len())
        .flat_map(|m| cells.iter().map(move |&(d, r)| (m, d, r)))
        .collect();
    let outcomes: Vec<_> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(m, d, r)| {
                let (inst, reference) = match instances.get(&(d, r)) {
                    Some(v) => v,
                    None => return Err(format!("instance unavailable: {}", cell_errors[&(d, r)])),
                };
                let run_seed = derive_seed(seed, d as u64, r as u64, RUN_SEED);
                run_method(inst, &cfg.methods[m], reference.f_star, run_seed)
                    .map(|o| (o, reference.instance_seed, run_seed))
                    .map_err(|e| e.to_string())
            })
            .collect()
    });

    for (&(m, d, r), outcome) in tasks.iter().zip(outcomes) {
        let spec = &cfg.methods[m];
        match outcome {
            Ok((o, instance_seed, run_seed)) => {
                report.timings.push(TimingRow { task: spec.name.clone(), d, replication: r, wall_secs: o.wall_secs });
                report.rows.push(ResultRow {
                    method: spec.name.clone(),
                    family: spec.family().into(),
                    d,
                    replication: r,
                    instance_seed,
                    run_seed,
                    output_index: o.output_index,
                    value: o.value,
                    gap: o.gap,
                    residual: o.residual,
                    rel_gap: f64::NAN,
                    rel_residual: f64::NAN,
                    samples: o.samples,
                });
            }
            Err(message) => report.failures.push(RunFailure { method: spec.name.clone(), d, replication: r, message }),
        }
    }
    normalize(&mut report.rows, cfg.base_dim());
    report.summary = summarize(cfg, &report.rows);
    Ok(report)
}

fn normalize(rows: &mut [ResultRow], base_dim: usize) {
    let base: BTreeMap<(String, usize), (f64, f64)> = rows
        .iter()
        .filter(|r| r.d == base_dim)
        .map(|r| ((r.method.clone(), r.replication), (r.gap, r.residual)))
        .collect();
    for row in rows.iter_mut() {
        if let Some(&(gap, residual)) = base.get(&(row.method.clone(), row.replication)) {
            row.rel_gap = row.gap / gap;
            row.rel_residual = row.residual / residual;
        }
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

fn summarize(cfg: &SweepConfig, rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut out = Vec::new();
    for spec in &cfg.methods {
        let of = |d: usize| rows.iter().filter(move |r| r.method == spec.name && r.d == d);
        let base_gap = mean(of(cfg.base_dim()).map(|r| r.gap));
        let base_residual = mean(of(cfg.base_dim()).map(|r| r.residual));
        for &d in &cfg.dims {
            let n = of(d).count();
            if n == 0 {
                continue;
            }
            let mean_gap = mean(of(d).map(|r| r.gap));
            let mean_residual = mean(of(d).map(|r| r.residual));
            out.push(SummaryRow {
                method: spec.name.clone(),
                family: spec.family().into(),
                d,
                replications: n,
                mean_gap,
                mean_residual,
                rel_gap: mean(of(d).map(|r| r.rel_gap)),
                rel_residual: mean(of(d).map(|r| r.rel_residual)),
                rel_gap_of_means: mean_gap / base_gap,
                rel_residual_of_means: mean_residual / base_residual,
                samples: of(d).map(|r| r.samples).max().unwrap_or(0),
            });
        }
    }
    out
}
