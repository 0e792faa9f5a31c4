//! Turning a method descriptor into a run on one synthetic instance.

use std::time::Instant;

use disfom::optimizers::{disfom_run, smd_run, OptimizerConfig, OutputRule, RunTrace, SmdConfig, StepTolerances};
use disfom::{residual_inf, Error, Result, SyntheticQpInstance, DEFAULT_ACTIVE_TOL};

use crate::config::{MethodSpec, UpdateRule};

/// Metrics of one run at its output point `x^{Y+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub output_index: usize,
    pub value: f64,
    pub gap: f64,
    pub residual: f64,
    pub samples: u64,
    pub wall_secs: f64,
}

/// `α = c/√K` with the default `c = √(f(x¹)/(ρL²))`, `ρ = λ/2 − λ_min`.
pub fn mirror_step_size(inst: &SyntheticQpInstance, c: Option<f64>, x1: &[f64], iterations: usize) -> Result<f64> {
    match c {
        Some(c) => Ok(c / (iterations as f64).sqrt()),
        None => {
            let rho = 0.5 * inst.lambda_reg() - inst.lambda_min();
            if rho <= 0.0 {
                return Err(Error::InvalidParameter(format!("mirror step needs λ/2 > λ_min, got ρ = {rho}")));
            }
            SmdConfig::step_size(inst.exact_value(x1)?, rho, inst.lipschitz(), iterations)
        }
    }
}

/// Runs `spec` from `x¹ = 0`, recording diagnostics every `record_every` steps.
pub fn run_trace(inst: &SyntheticQpInstance, spec: &MethodSpec, seed: u64, record_every: usize) -> Result<RunTrace<f64>> {
    let d = inst.dim();
    let x1 = vec![0.0; d];
    let cfg = OptimizerConfig {
        eta: spec.update.eta_scale().unwrap_or(1.0) / inst.lipschitz(),
        iterations: spec.iterations,
        prox: spec.update.prox().map_err(|e| Error::InvalidParameter(e.to_string()))?,
        estimator: spec.estimator,
        region: inst.region().clone(),
        seed,
        record_every,
        output_rule: OutputRule::RandomUniform,
    };
    match spec.update {
        UpdateRule::Mirror { c } => {
            let step = mirror_step_size(inst, c, &x1, spec.iterations)?;
            smd_run(inst, &x1, &cfg, &SmdConfig::for_dimension(d, step)?)
        }
        _ => disfom_run(inst, &x1, &cfg, &StepTolerances::default()),
    }
}

pub fn run_method(inst: &SyntheticQpInstance, spec: &MethodSpec, f_star: f64, seed: u64) -> Result<RunOutcome> {
    let start = Instant::now();
    // diagnostics only at the output index and the last step
    let trace = run_trace(inst, spec, seed, spec.iterations)?;
    let wall_secs = start.elapsed().as_secs_f64();
    let x = trace.output.as_slice();
    let value = inst.exact_value(x)?;
    let grad = inst.exact_gradient(x)?;
    let residual = residual_inf(x, &grad, inst.region(), DEFAULT_ACTIVE_TOL)?.residual_inf;
    Ok(RunOutcome {
        output_index: trace.output_index,
        value,
        gap: value - f_star,
        residual,
        samples: trace.samples,
        wall_secs,
    })
}
