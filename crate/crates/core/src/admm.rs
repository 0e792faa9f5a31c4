//! Scaled-form ADMM for the ℓ1-squared proximal subproblem over a box and over an
//! ℓ1 ball intersected with a box, used as an independent reference solver.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{check_dim, dist_l1, DenseVector};
use crate::prox::{check_box, l1sq_objective, project_l1_ball, prox_l1sq_unconstrained};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AdmmConfig<T> {
    /// Scaled penalty `β`.
    pub beta: T,
    pub max_wall_time: Duration,
    pub max_iterations: usize,
    /// Primal and dual residual threshold (used when no value target is set).
    pub feas_tol: T,
    /// Stop once the feasible iterate's objective is at or below this value.
    pub value_target: Option<T>,
    /// Ball-constraint slack required before the value target counts (ball-box only).
    pub ball_tol: T,
    /// Keep the per-iteration progress measure.
    pub track_progress: bool,
}

impl<T: Scalar> AdmmConfig<T> {
    fn with_beta(beta: T) -> Self {
        Self {
            beta,
            max_wall_time: Duration::from_secs(60),
            max_iterations: 1_000_000,
            feas_tol: T::lit(1e-10),
            value_target: None,
            ball_tol: T::lit(1e-12),
            track_progress: false,
        }
    }

    /// `β = 0.1 + 0.3 ln d`.
    pub fn for_box(d: usize) -> Self {
        Self::with_beta(T::lit(0.1) + T::lit(0.3) * T::from_count(d).ln())
    }

    /// `β = 100 + 300 ln d`.
    pub fn for_l1box(d: usize) -> Self {
        Self::with_beta(T::lit(100.0) + T::lit(300.0) * T::from_count(d).ln())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta > T::zero()) {
            return Err(Error::InvalidParameter(format!("ADMM penalty must be > 0, got {}", self.beta)));
        }
        if !(self.feas_tol >= T::zero() && self.ball_tol >= T::zero()) {
            return Err(Error::InvalidParameter("ADMM tolerances must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AdmmStop {
    ValueTarget,
    Residuals,
    MaxIterations,
    WallTime,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmmResult<T> {
    /// The box-feasible splitting iterate.
    pub x: DenseVector<T>,
    pub objective: T,
    pub iterations: usize,
    pub wall_time: Duration,
    pub stop: AdmmStop,
    /// `β(‖Δy‖² + ‖Δu‖²)` per iteration, when tracked.
    pub progress: Vec<T>,
}

fn sq_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| (*x - *y) * (*x - *y)).sum()
}

struct Monitor<T> {
    start: Instant,
    cfg: AdmmConfig<T>,
    progress: Vec<T>,
}

impl<T: Scalar> Monitor<T> {
    fn new(cfg: &AdmmConfig<T>) -> Self {
        Self { start: Instant::now(), cfg: *cfg, progress: Vec::new() }
    }

    /// Decides whether iteration `t` (1-based) ends the run.
    fn check(&mut self, t: usize, objective: T, ball_ok: bool, primal: T, dual: T, step: T) -> Option<AdmmStop> {
        if self.cfg.track_progress {
            self.progress.push(step);
        }
        match self.cfg.value_target {
            Some(target) if ball_ok && objective <= target => return Some(AdmmStop::ValueTarget),
            None if primal <= self.cfg.feas_tol && dual <= self.cfg.feas_tol => return Some(AdmmStop::Residuals),
            _ => {}
        }
        if t >= self.cfg.max_iterations {
            return Some(AdmmStop::MaxIterations);
        }
        if self.start.elapsed() >= self.cfg.max_wall_time {
            return Some(AdmmStop::WallTime);
        }
        None
    }
}

/// ADMM on `min ½‖x − v‖² + (ρ̂/2)‖x‖₁² + δ_{[l,u]}(y)` subject to `x = y`.
pub fn admm_solve_box<T: Scalar>(
    v: &[T],
    rho_hat: T,
    lower: &[T],
    upper: &[T],
    cfg: &AdmmConfig<T>,
) -> Result<AdmmResult<T>> {
    cfg.validate()?;
    check_box(v.len(), lower, upper, true)?;
    let d = v.len();
    let beta = cfg.beta;
    let one = T::one();
    let penalty = rho_hat / (one + beta);
    let mut monitor = Monitor::new(cfg);
    let mut y: Vec<T> = (0..d).map(|i| v[i].clip(lower[i], upper[i])).collect();
    let mut u = vec![T::zero(); d];
    let mut c = vec![T::zero(); d];
    let mut t = 0;
    let stop = loop {
        t += 1;
        for i in 0..d {
            c[i] = (v[i] + beta * (y[i] - u[i])) / (one + beta);
        }
        let x = prox_l1sq_unconstrained(&c, penalty)?.z.into_vec();
        let y_new: Vec<T> = (0..d).map(|i| (x[i] + u[i]).clip(lower[i], upper[i])).collect();
        let u_new: Vec<T> = (0..d).map(|i| u[i] + x[i] - y_new[i]).collect();
        let primal = sq_dist(&x, &y_new).sqrt();
        let dy = sq_dist(&y_new, &y);
        let step = beta * (dy + sq_dist(&u_new, &u));
        let dual = beta * dy.sqrt();
        y = y_new;
        u = u_new;
        let objective = l1sq_objective(&y, v, rho_hat);
        if let Some(stop) = monitor.check(t, objective, true, primal, dual, step) {
            break stop;
        }
    };
    let objective = l1sq_objective(&y, v, rho_hat);
    Ok(AdmmResult {
        x: DenseVector::from_computed(y, "ADMM iterate")?,
        objective,
        iterations: t,
        wall_time: monitor.start.elapsed(),
        stop,
        progress: monitor.progress,
    })
}

/// ADMM on `min ½‖x − v‖² + (ρ̂/2)‖x‖₁²` subject to `x − w = y₁`, `‖y₁‖₁ ≤ α`, `x = y₂ ∈ [l, u]`.
#[allow(clippy::too_many_arguments)]
pub fn admm_solve_l1box<T: Scalar>(
    v: &[T],
    rho_hat: T,
    w: &[T],
    alpha: T,
    lower: &[T],
    upper: &[T],
    cfg: &AdmmConfig<T>,
) -> Result<AdmmResult<T>> {
    cfg.validate()?;
    check_dim(v.len(), w.len())?;
    check_box(v.len(), lower, upper, false)?;
    let d = v.len();
    let gap: T = (0..d).map(|i| (w[i].clip(lower[i], upper[i]) - w[i]).abs()).sum();
    if gap > alpha {
        return Err(Error::Infeasible(format!("ℓ1 ball of radius {alpha} misses the box (gap {gap})")));
    }
    let beta = cfg.beta;
    let one = T::one();
    let two = T::lit(2.0);
    let penalty = rho_hat / (one + two * beta);
    let mut monitor = Monitor::new(cfg);
    let x0: Vec<T> = (0..d).map(|i| v[i].clip(lower[i], upper[i])).collect();
    let shifted: Vec<T> = x0.iter().zip(w).map(|(a, b)| *a - *b).collect();
    let mut y1 = project_l1_ball(&shifted, alpha)?.z.into_vec();
    let mut y2 = x0;
    let mut u1 = vec![T::zero(); d];
    let mut u2 = vec![T::zero(); d];
    let mut c = vec![T::zero(); d];
    let mut t = 0;
    let stop = loop {
        t += 1;
        for i in 0..d {
            c[i] = (v[i] + beta * (w[i] + y1[i] - u1[i]) + beta * (y2[i] - u2[i])) / (one + two * beta);
        }
        let x = prox_l1sq_unconstrained(&c, penalty)?.z.into_vec();
        let a: Vec<T> = (0..d).map(|i| x[i] - w[i] + u1[i]).collect();
        let y1_new = project_l1_ball(&a, alpha)?.z.into_vec();
        let y2_new: Vec<T> = (0..d).map(|i| (x[i] + u2[i]).clip(lower[i], upper[i])).collect();
        let u1_new: Vec<T> = (0..d).map(|i| u1[i] + x[i] - w[i] - y1_new[i]).collect();
        let u2_new: Vec<T> = (0..d).map(|i| u2[i] + x[i] - y2_new[i]).collect();
        let r1: T = (0..d).map(|i| (x[i] - w[i] - y1_new[i]) * (x[i] - w[i] - y1_new[i])).sum();
        let primal = (r1 + sq_dist(&x, &y2_new)).sqrt();
        let dy = sq_dist(&y1_new, &y1) + sq_dist(&y2_new, &y2);
        let step = beta * (dy + sq_dist(&u1_new, &u1) + sq_dist(&u2_new, &u2));
        let dual = beta * dy.sqrt();
        y1 = y1_new;
        y2 = y2_new;
        u1 = u1_new;
        u2 = u2_new;
        let objective = l1sq_objective(&y2, v, rho_hat);
        let ball_ok = dist_l1(&y2, w) - alpha < cfg.ball_tol;
        if let Some(stop) = monitor.check(t, objective, ball_ok, primal, dual, step) {
            break stop;
        }
    };
    let objective = l1sq_objective(&y2, v, rho_hat);
    Ok(AdmmResult {
        x: DenseVector::from_computed(y2, "ADMM iterate")?,
        objective,
        iterations: t,
        wall_time: monitor.start.elapsed(),
        stop,
        progress: monitor.progress,
    })
}
