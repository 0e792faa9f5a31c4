//! Timing race between the bisection solvers and ADMM on random subproblems.
//!
//! Runs on a single thread so that timings are not skewed by contention.

use std::time::{Duration, Instant};

use disfom::prox::{l1sq_objective, prox_l1sq_box, prox_l1sq_l1box, L1BoxTolerances};
use disfom::sampling::Substreams;
use disfom::{admm_solve_box, admm_solve_l1box, dist_l1, AdmmConfig, AdmmResult, AdmmStop};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::config::RaceConfig;
use crate::error::BenchError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Box,
    L1Box,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Self::Box => "box",
            Self::L1Box => "l1box",
        }
    }

    fn tag(self) -> u64 {
        match self {
            Self::Box => 11,
            Self::L1Box => 12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRow {
    pub d: usize,
    pub family: Family,
    pub trial: usize,
    /// Mean over `solver_repeats` back-to-back solves.
    pub solver_secs: f64,
    pub solver_repeats: usize,
    pub solver_objective: f64,
    pub admm_secs: f64,
    pub admm_iterations: usize,
    pub admm_stop: AdmmStop,
    pub admm_objective: f64,
    /// `(f_admm − f_solver) / (1 + |f_solver|)`.
    pub rel_gap: f64,
    /// `max(0, ‖x − w‖₁ − α)` of the ADMM point (zero for the box family).
    pub admm_ball_violation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RaceRow {
    pub d: usize,
    pub family: Family,
    pub solver: &'static str,
    pub trials: usize,
    pub mean_secs: f64,
    pub mean_objective: f64,
    /// Largest `|rel_gap|` over the trials.
    pub max_rel_gap: f64,
    /// Trials in which the solver met its own stopping rule rather than a cap.
    pub converged: usize,
}

#[derive(Clone, Debug, Default)]
pub struct RaceReport {
    pub trials: Vec<TrialRow>,
    pub summary: Vec<RaceRow>,
}

impl RaceReport {
    /// Mean ADMM time over mean specialized time.
    pub fn speedup(&self, d: usize, family: Family) -> Option<f64> {
        let find = |solver| self.summary.iter().find(|r| r.d == d && r.family == family && r.solver == solver);
        Some(find("admm")?.mean_secs / find("specialized")?.mean_secs)
    }
}

/// Repeats `f` until `min_secs` have passed; returns the last value, the mean time and the count.
fn timed<R>(min_secs: f64, mut f: impl FnMut() -> R) -> (R, f64, usize) {
    let start = Instant::now();
    let mut n = 0;
    loop {
        let out = f();
        n += 1;
        let elapsed = start.elapsed().as_secs_f64();
        if elapsed >= min_secs {
            return (out, elapsed / n as f64, n);
        }
    }
}

fn run_error(e: disfom::Error) -> BenchError {
    BenchError::Run(e.to_string())
}

struct Trial<'a> {
    cfg: &'a RaceConfig,
    d: usize,
    trial: usize,
}

impl Trial<'_> {
    fn finish(&self, family: Family, solver: (f64, f64, usize), admm: AdmmResult<f64>, violation: f64) -> TrialRow {
        let (objective, secs, repeats) = solver;
        TrialRow {
            d: self.d,
            family,
            trial: self.trial,
            solver_secs: secs,
            solver_repeats: repeats,
            solver_objective: objective,
            admm_secs: admm.wall_time.as_secs_f64(),
            admm_iterations: admm.iterations,
            admm_stop: admm.stop,
            admm_objective: admm.objective,
            rel_gap: (admm.objective - objective) / (1.0 + objective.abs()),
            admm_ball_violation: violation.max(0.0),
        }
    }

    fn admm_cfg(base: AdmmConfig<f64>, target: f64, cap_secs: f64, ball_tol: f64) -> AdmmConfig<f64> {
        AdmmConfig {
            max_wall_time: Duration::from_secs_f64(cap_secs),
            max_iterations: usize::MAX,
            value_target: Some(target),
            ball_tol,
            ..base
        }
    }

    fn run_box(&self, seed: u64) -> Result<TrialRow, BenchError> {
        let p = &self.cfg.boxed;
        let d = self.d;
        let mut rng = Substreams::new(seed).stream(d as u64, self.trial as u64, Family::Box.tag());
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let lower = vec![-p.bound; d];
        let upper = vec![p.bound; d];
        let (sol, secs, repeats) = timed(self.cfg.min_timing_secs, || prox_l1sq_box(&v, p.rho_hat, &lower, &upper, p.solver_tol));
        let sol = sol.map_err(run_error)?;
        let objective = l1sq_objective(sol.z.as_slice(), &v, p.rho_hat);
        let cfg = Self::admm_cfg(AdmmConfig::for_box(d), objective, p.admm_time_multiple * secs, 0.0);
        let admm = admm_solve_box(&v, p.rho_hat, &lower, &upper, &cfg).map_err(run_error)?;
        Ok(self.finish(Family::Box, (objective, secs, repeats), admm, 0.0))
    }

    fn run_l1box(&self, seed: u64) -> Result<TrialRow, BenchError> {
        let p = &self.cfg.l1box;
        let d = self.d;
        let mut rng = Substreams::new(seed).stream(d as u64, self.trial as u64, Family::L1Box.tag());
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-p.v_half_width..=p.v_half_width)).collect();
        let w: Vec<f64> = (0..d).map(|_| rng.random_range(-p.w_half_width..=p.w_half_width)).collect();
        let lower = vec![-p.bound; d];
        let upper = vec![p.bound; d];
        let tol = L1BoxTolerances { tau: p.solver_tol, mu: p.solver_tol, ball: p.ball_tol };
        let (sol, secs, repeats) =
            timed(self.cfg.min_timing_secs, || prox_l1sq_l1box(&v, p.rho_hat, &w, p.alpha, &lower, &upper, &tol));
        let sol = sol.map_err(run_error)?;
        let objective = l1sq_objective(sol.z.as_slice(), &v, p.rho_hat);
        let cfg = Self::admm_cfg(AdmmConfig::for_l1box(d), objective, p.admm_time_multiple * secs, p.ball_tol);
        let admm = admm_solve_l1box(&v, p.rho_hat, &w, p.alpha, &lower, &upper, &cfg).map_err(run_error)?;
        let violation = dist_l1(admm.x.as_slice(), &w) - p.alpha;
        Ok(self.finish(Family::L1Box, (objective, secs, repeats), admm, violation))
    }
}

pub fn run_timing_race(cfg: &RaceConfig, seed: u64, families: &[Family]) -> Result<RaceReport, BenchError> {
    cfg.validate()?;
    let mut report = RaceReport::default();
    for &family in families {
        for &d in &cfg.dims {
            let first = report.trials.len();
            for trial in 0..cfg.trials {
                let t = Trial { cfg, d, trial };
                let row = match family {
                    Family::Box => t.run_box(seed)?,
                    Family::L1Box => t.run_l1box(seed)?,
                };
                report.trials.push(row);
            }
            let rows = &report.trials[first..];
            let n = rows.len() as f64;
            let max_gap = rows.iter().fold(0.0f64, |m, r| m.max(r.rel_gap.abs()));
            report.summary.push(RaceRow {
                d,
                family,
                solver: "specialized",
                trials: rows.len(),
                mean_secs: rows.iter().map(|r| r.solver_secs).sum::<f64>() / n,
                mean_objective: rows.iter().map(|r| r.solver_objective).sum::<f64>() / n,
                max_rel_gap: 0.0,
                converged: rows.len(),
            });
            report.summary.push(RaceRow {
                d,
                family,
                solver: "admm",
                trials: rows.len(),
                mean_secs: rows.iter().map(|r| r.admm_secs).sum::<f64>() / n,
                mean_objective: rows.iter().map(|r| r.admm_objective).sum::<f64>() / n,
                max_rel_gap: max_gap,
                converged: rows.iter().filter(|r| r.admm_stop == AdmmStop::ValueTarget).count(),
            });
        }
    }
    Ok(report)
}
