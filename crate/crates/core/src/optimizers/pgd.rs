use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{euclidean_project, DenseVector, FeasibleRegion};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PgdOptions<T> {
    /// Armijo sufficient-decrease constant.
    pub c1: T,
    /// Backtracking factor.
    pub beta: T,
    /// Stop once `‖x^{k+1} − x^k‖₁ ≤ epsilon`.
    pub epsilon: T,
    pub max_iterations: usize,
}

impl<T: Scalar> Default for PgdOptions<T> {
    fn default() -> Self {
        Self { c1: T::lit(0.25), beta: T::lit(0.5), epsilon: T::lit(1e-10), max_iterations: 1_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PgdResult<T> {
    pub x: DenseVector<T>,
    pub value: T,
    pub iterations: usize,
    /// `‖x^{k+1} − x^k‖₁` of the stopping step.
    pub last_step_l1: T,
    pub backtracks: usize,
}

/// Halvings after which a trial step is accepted regardless of the decrease test; only
/// reached when rounding in `f` hides a decrease far below `epsilon`.
const MAX_BACKTRACKS: usize = 200;

/// Projected gradient with Armijo backtracking, restarting from `α = 1` every iteration.
pub fn pgd_backtracking<T, F, G>(
    objective: F,
    gradient: G,
    region: &FeasibleRegion<T>,
    x0: &[T],
    opts: &PgdOptions<T>,
) -> Result<PgdResult<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> Result<T>,
    G: Fn(&[T]) -> Result<Vec<T>>,
{
    if !matches!(region, FeasibleRegion::Unconstrained | FeasibleRegion::Box { .. }) {
        return Err(Error::Unsupported(format!("projected gradient over a {} region", region.name())));
    }
    if !(opts.c1 > T::zero() && opts.c1 < T::one() && opts.beta > T::zero() && opts.beta < T::one()) {
        return Err(Error::InvalidParameter("backtracking needs c1, beta in (0, 1)".into()));
    }
    let mut x = euclidean_project(x0, region)?;
    let mut fx = objective(&x)?;
    let mut backtracks = 0;
    for k in 0..opts.max_iterations {
        let g = gradient(&x)?;
        let mut alpha = T::one();
        let mut halvings = 0;
        let (trial, f_trial) = loop {
            let v: Vec<T> = x.iter().zip(&g).map(|(xi, gi)| *xi - alpha * *gi).collect();
            let trial = euclidean_project(&v, region)?;
            let f_trial = objective(&trial)?;
            let decrease: T = g.iter().zip(trial.iter().zip(x.iter())).map(|(gi, (t, xi))| *gi * (*t - *xi)).sum();
            if f_trial <= fx + opts.c1 * decrease || halvings == MAX_BACKTRACKS {
                break (trial, f_trial);
            }
            alpha *= opts.beta;
            halvings += 1;
        };
        backtracks += halvings;
        let step: T = trial.iter().zip(x.iter()).map(|(a, b)| (*a - *b).abs()).sum();
        if step <= opts.epsilon {
            return Ok(PgdResult { x, value: fx, iterations: k + 1, last_step_l1: step, backtracks });
        }
        x = trial;
        fx = f_trial;
    }
    Err(Error::MaxIterations { iterations: opts.max_iterations, context: "projected gradient" })
}
