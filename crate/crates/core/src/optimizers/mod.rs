//! The proximal stochastic method with ℓ1-geometry steps, its Euclidean baselines,
//! stochastic mirror descent, and a backtracking reference solver.

mod hyper;
mod pgd;
mod smd;
mod step;

use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{is_feasible, norm_inf, residual_inf, DenseVector, FeasibleRegion, ProxTerm, DEFAULT_ACTIVE_TOL};
use crate::sampling::{tag, EstimatorConfig, GradientEstimator, StochasticOracle, Substreams};
use crate::scalar::Scalar;

pub use hyper::{suggest_hyperparameters, suggest_hyperparameters_with, HyperMode, Hyperparameters};
pub use pgd::{pgd_backtracking, PgdOptions, PgdResult};
pub use smd::{mirror_step, smd_run, SmdConfig};
pub use step::{check_supported, proximal_step, StepOutcome, StepTolerances};

/// Feasibility slack accepted for iterates.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Which iterate a run returns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputRule {
    /// `x^{Y+1}` with `Y` uniform on `{1, …, K}`.
    RandomUniform,
    /// `x^{K+1}`.
    Last,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizerConfig<T> {
    pub eta: T,
    /// Iteration budget `K`.
    pub iterations: usize,
    pub prox: ProxTerm<T>,
    pub estimator: EstimatorConfig,
    pub region: FeasibleRegion<T>,
    pub seed: u64,
    pub record_every: usize,
    pub output_rule: OutputRule,
}

impl<T: Scalar> OptimizerConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta.is_finite() && self.eta > T::zero()) {
            return Err(Error::InvalidParameter(format!("step size must be > 0, got {}", self.eta)));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidParameter("iteration budget must be >= 1".into()));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter("record_every must be >= 1".into()));
        }
        self.prox.validate()?;
        self.region.validate()?;
        self.estimator.validate()
    }
}

/// Diagnostics of one iteration `k`, describing `x^{k+1}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord<T> {
    pub k: usize,
    pub objective: Option<T>,
    /// ℓ∞ stationarity residual (unconstrained and box regions only).
    pub residual: Option<T>,
    /// `‖x^{k+1} − x^k‖₁`.
    pub step_l1: T,
    /// `‖G^k − ∇f(x^k)‖∞²`.
    pub estimator_error: Option<T>,
    pub elapsed_secs: f64,
    pub samples: u64,
    pub xi_reconstructed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunTrace<T> {
    pub records: Vec<RunRecord<T>>,
    /// The index `Y`.
    pub output_index: usize,
    /// `x^{Y+1}`.
    pub output: DenseVector<T>,
    pub samples: u64,
    /// Total subproblem solver iterations.
    pub inner_iterations: usize,
    pub config: OptimizerConfig<T>,
}

/// Draws the output index `Y` of a run.
pub fn draw_output_index(rule: OutputRule, iterations: usize, streams: &Substreams) -> usize {
    match rule {
        OutputRule::RandomUniform => streams.stream(0, 0, tag::OUTPUT).random_range(1..=iterations),
        OutputRule::Last => iterations,
    }
}

/// One step of a method: maps `(k, x^k, G^k)` to `x^{k+1}` with its solver diagnostics.
pub(crate) struct StepResult<T> {
    pub next: DenseVector<T>,
    pub xi_reconstructed: bool,
    pub iterations: usize,
}

pub(crate) fn run_loop<T, O, S>(oracle: &O, x1: &[T], cfg: &OptimizerConfig<T>, mut step: S) -> Result<RunTrace<T>>
where
    T: Scalar,
    O: StochasticOracle<T> + ?Sized,
    S: FnMut(usize, &[T], &[T]) -> Result<StepResult<T>>,
{
    cfg.validate()?;
    if x1.len() != oracle.dim() {
        return Err(Error::DimensionMismatch { expected: oracle.dim(), found: x1.len() });
    }
    if let Some(d) = cfg.region.dim() {
        if d != x1.len() {
            return Err(Error::DimensionMismatch { expected: d, found: x1.len() });
        }
    }
    let tol = T::lit(FEASIBILITY_TOL);
    if !is_feasible(x1, &cfg.region, tol)? {
        return Err(Error::Infeasible("initial point is not feasible".into()));
    }
    let start = Instant::now();
    let streams = Substreams::new(cfg.seed);
    let y = draw_output_index(cfg.output_rule, cfg.iterations, &streams);
    let mut estimator = GradientEstimator::new(cfg.estimator, streams)?;
    let residual_supported = matches!(cfg.region, FeasibleRegion::Unconstrained | FeasibleRegion::Box { .. });

    let mut x = DenseVector::from_computed(x1.to_vec(), "initial point")?;
    let mut output = None;
    let mut records = Vec::with_capacity(cfg.iterations / cfg.record_every + 2);
    let mut inner = 0usize;
    for k in 1..=cfg.iterations {
        let estimate = estimator.next(oracle, &x)?;
        let record = k % cfg.record_every == 0 || k == y || k == cfg.iterations;
        let estimator_error = if record {
            match oracle.exact_gradient(&x) {
                Some(g) => {
                    let g = g?;
                    let diff: Vec<T> = estimate.gradient.iter().zip(&g).map(|(a, b)| *a - *b).collect();
                    let e = norm_inf(&diff);
                    Some(e * e)
                }
                None => None,
            }
        } else {
            None
        };
        let out = step(k, &x, &estimate.gradient)?;
        inner += out.iterations;
        if !is_feasible(&out.next, &cfg.region, tol)? {
            return Err(Error::Infeasible(format!("iterate {} left the feasible region", k + 1)));
        }
        if record {
            let step_l1 = out.next.iter().zip(x.iter()).map(|(a, b)| (*a - *b).abs()).sum();
            let objective = oracle.exact_value(&out.next).transpose()?;
            let residual = match (residual_supported, oracle.exact_gradient(&out.next)) {
                (true, Some(g)) => {
                    let g = g?;
                    Some(residual_inf(&out.next, &g, &cfg.region, T::lit(DEFAULT_ACTIVE_TOL))?.residual_inf)
                }
                _ => None,
            };
            records.push(RunRecord {
                k,
                objective,
                residual,
                step_l1,
                estimator_error,
                elapsed_secs: start.elapsed().as_secs_f64(),
                samples: estimator.samples(),
                xi_reconstructed: out.xi_reconstructed,
            });
        }
        x = out.next;
        if k == y {
            output = Some(x.clone());
        }
    }
    Ok(RunTrace {
        records,
        output_index: y,
        output: output.expect("output index lies in 1..=K"),
        samples: estimator.samples(),
        inner_iterations: inner,
        config: cfg.clone(),
    })
}

/// Runs the proximal stochastic method `x^{k+1} = P_X^k(x^k − ηG^k)` for `K` steps.
pub fn disfom_run<T, O>(oracle: &O, x1: &[T], cfg: &OptimizerConfig<T>, tol: &StepTolerances<T>) -> Result<RunTrace<T>>
where
    T: Scalar,
    O: StochasticOracle<T> + ?Sized,
{
    check_supported(&cfg.prox, &cfg.region)?;
    run_loop(oracle, x1, cfg, |_, x, g| {
        let out = proximal_step(x, g, cfg.eta, &cfg.prox, &cfg.region, tol)?;
        Ok(StepResult { next: out.next, xi_reconstructed: out.xi_reconstructed, iterations: out.iterations })
    })
}
