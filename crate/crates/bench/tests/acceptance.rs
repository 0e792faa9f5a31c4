//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
//!
//! The process exits 0 so that the workspace test run reports every line; set
//! `ACCEPTANCE_STRICT=1` to exit 1 when any criterion fails, and `ACCEPTANCE_ONLY=<prefix>`
//! to run only the criteria whose id starts with the prefix.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::cell::RefCell;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use disfom::optimizers::{
    disfom_run, draw_output_index, proximal_step, smd_run, OptimizerConfig, OutputRule, SmdConfig, StepTolerances,
};
use disfom::prox::{
    kkt_case2, kkt_l1sq, l1sq_objective, prox_case2_shifted, prox_l1sq_box, prox_l1sq_l1box, prox_l1sq_unconstrained,
    L1BoxTolerances,
};
use disfom::sampling::{
    variance_probe_inf, EstimatorConfig, GradientEstimator, SpiderConfig, StochasticOracle, Stream, Substreams,
};
use disfom::{
    admm_solve_box, admm_solve_l1box, dist_l1, generate_instance, is_feasible, norm_inf, residual_inf,
    sigma_sq_trunc_normal, AdmmConfig, AdmmStop, DenseVector, FeasibleRegion, ProxTerm, Result, SyntheticQpInstance,
    DEFAULT_ACTIVE_TOL,
};
use disfom_bench::config::ProblemConfig;
use disfom_bench::methods::{run_method, run_trace};
use disfom_bench::{derive_seed, run_dimension_sweep, run_timing_race, ExperimentConfig, Family, MethodSpec};
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use support::{solve, Gen, Problem};

const SEED: u64 = 2024;

/// Outcome of one check: pass flag and a one-line detail.
type Verdict = (bool, String);

struct Report {
    failed: usize,
}

impl Report {
    fn selected(id: &str) -> bool {
        std::env::var("ACCEPTANCE_ONLY").map_or(true, |p| id.starts_with(&p))
    }

    fn check(&mut self, id: &str, title: &str, f: impl FnOnce() -> Verdict) {
        if !Self::selected(id) {
            return;
        }
        let start = Instant::now();
        let (ok, detail) = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(v) => v,
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        if !ok {
            self.failed += 1;
        }
        let secs = start.elapsed().as_secs_f64();
        println!("{} criterion {id} ({title}): {detail} [{secs:.1}s]", if ok { "PASS" } else { "FAIL" });
    }
}

fn instance(d: usize, seed: u64) -> SyntheticQpInstance {
    generate_instance(&ProblemConfig::default().spec(d, seed)).unwrap()
}

fn region_box(lower: &[f64], upper: &[f64]) -> FeasibleRegion<f64> {
    FeasibleRegion::boxed(DenseVector::from_slice(lower).unwrap(), DenseVector::from_slice(upper).unwrap()).unwrap()
}

// ---------------------------------------------------------------------------
// 1. subproblem solvers against the projected-gradient oracle

const ORACLE_TOL: f64 = 1e-10;
const ORACLE_CAP: usize = 2_000_000;

#[derive(Default)]
struct Worst {
    objective: f64,
    kkt: f64,
    admm: f64,
    admm_capped: usize,
    admm_ball: f64,
    secs: f64,
}

impl Worst {
    fn record(&mut self, objective: f64, kkt: f64) {
        self.objective = self.objective.max(objective);
        self.kkt = self.kkt.max(kkt);
    }
}

/// Residual stop two orders below the agreement tolerance.
fn admm_cfg(mut cfg: AdmmConfig<f64>) -> AdmmConfig<f64> {
    cfg.feas_tol = 1e-8;
    cfg.max_wall_time = Duration::from_secs(10);
    cfg
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

fn prox_equivalence() -> Verdict {
    let n = 1000;
    let mut worst = [Worst::default(), Worst::default(), Worst::default(), Worst::default()];

    let clock = Instant::now();
    let mut g = Gen::new(101);
    for _ in 0..n {
        let d = g.dim(50);
        let v = g.vector(d, 6.0);
        let rho = g.rho();
        let wide = v.iter().fold(0.0_f64, |m, x| m.max(x.abs())) + 1.0;
        let s = prox_l1sq_unconstrained(&v, rho).unwrap();
        let r = solve(&Problem { v: &v, rho, lower: &vec![-wide; d], upper: &vec![wide; d], ball: None }, ORACLE_TOL, ORACLE_CAP);
        let k = kkt_l1sq(&v, rho, &FeasibleRegion::Unconstrained, &s).unwrap();
        worst[0].record((l1sq_objective(s.z.as_slice(), &v, rho) - r.objective).abs(), k.max);
    }

    worst[0].secs = clock.elapsed().as_secs_f64();
    let mut g = Gen::new(102);
    for _ in 0..n {
        let c = g.box_case(50);
        let d = c.v.len();
        let s = prox_l1sq_box(&c.v, c.rho, &c.lower, &c.upper, 1e-13).unwrap();
        let r = solve(&Problem { v: &c.v, rho: c.rho, lower: &c.lower, upper: &c.upper, ball: None }, ORACLE_TOL, ORACLE_CAP);
        let k = kkt_l1sq(&c.v, c.rho, &region_box(&c.lower, &c.upper), &s).unwrap();
        worst[1].record((l1sq_objective(s.z.as_slice(), &c.v, c.rho) - r.objective).abs(), k.max);
        let a = admm_solve_box(&c.v, c.rho, &c.lower, &c.upper, &admm_cfg(AdmmConfig::for_box(d))).unwrap();
        worst[1].admm = worst[1].admm.max(relative(a.objective, r.objective));
        worst[1].admm_capped += usize::from(a.stop != AdmmStop::Residuals);
    }

    worst[1].secs = clock.elapsed().as_secs_f64();
    let mut g = Gen::new(103);
    let tol = L1BoxTolerances::uniform(1e-13, 1e-12);
    for _ in 0..n {
        let c = g.ball_box_case(50);
        let d = c.v.len();
        let s = prox_l1sq_l1box(&c.v, c.rho, &c.w, c.alpha, &c.lower, &c.upper, &tol).unwrap();
        let p = Problem { v: &c.v, rho: c.rho, lower: &c.lower, upper: &c.upper, ball: Some((&c.w, c.alpha)) };
        let r = solve(&p, ORACLE_TOL, ORACLE_CAP);
        let region = FeasibleRegion::l1_ball_box(
            DenseVector::from_slice(&c.w).unwrap(),
            c.alpha,
            DenseVector::from_slice(&c.lower).unwrap(),
            DenseVector::from_slice(&c.upper).unwrap(),
        )
        .unwrap();
        let k = kkt_l1sq(&c.v, c.rho, &region, &s).unwrap();
        worst[2].record((l1sq_objective(s.z.as_slice(), &c.v, c.rho) - r.objective).abs(), k.max);
        let cfg = admm_cfg(AdmmConfig::for_l1box(d));
        let a = admm_solve_l1box(&c.v, c.rho, &c.w, c.alpha, &c.lower, &c.upper, &cfg).unwrap();
        worst[2].admm_ball = worst[2].admm_ball.max(dist_l1(a.x.as_slice(), &c.w) - c.alpha);
        worst[2].admm = worst[2].admm.max(relative(a.objective, r.objective));
        worst[2].admm_capped += usize::from(a.stop != AdmmStop::Residuals);
    }

    worst[2].secs = clock.elapsed().as_secs_f64();
    let mut g = Gen::new(104);
    for _ in 0..n {
        let d = g.dim(50);
        let v = g.vector(d, 6.0);
        let (lower, upper) = g.bounds(d);
        let center: Vec<f64> = (0..d).map(|i| g.rng.random_range(lower[i]..upper[i])).collect();
        let psi = g.rng.random_range(0.05..(1.0 + d as f64));
        let region = region_box(&lower, &upper);
        let s = prox_case2_shifted(&v, &center, psi, &region, 1e-13).unwrap();
        let r = solve(&Problem { v: &v, rho: 0.0, lower: &lower, upper: &upper, ball: Some((&center, psi)) }, ORACLE_TOL, ORACLE_CAP);
        let k = kkt_case2(&v, &center, psi, &region, &s).unwrap();
        let ball = (dist_l1(s.z.as_slice(), &center) - psi).max(0.0);
        worst[3].record((l1sq_objective(s.z.as_slice(), &v, 0.0) - r.objective).abs(), k.max.max(ball));
    }

    worst[3].secs = clock.elapsed().as_secs_f64();
    let names = ["unconstrained", "box", "ball-box", "trust-region box"];
    let ok = worst.iter().all(|w| w.objective <= 1e-8 && w.kkt <= 1e-8) && worst[1].admm <= 1e-6 && worst[2].admm <= 1e-6;
    let detail = names
        .iter()
        .zip(&worst)
        .map(|(name, w)| {
            let admm = if w.admm > 0.0 || w.admm_capped > 0 {
                format!(", admm rel {:.1e} ball {:.1e} ({} capped)", w.admm, w.admm_ball, w.admm_capped)
            } else {
                String::new()
            };
            format!("{name}: obj {:.1e}, kkt {:.1e}{admm} at {:.0}s", w.objective, w.kkt, w.secs)
        })
        .collect::<Vec<_>>()
        .join("; ");
    (ok, format!("{n} instances per family; {detail}"))
}

// ---------------------------------------------------------------------------
// 2. variance reduction in the max-norm

fn variance_reduction() -> Verdict {
    let d = 512;
    let inst = instance(d, derive_seed(SEED, d as u64, 0, 1));
    let x = vec![0.0; d];
    let trials = 10_000;
    let small = variance_probe_inf(&inst, &x, 4, trials, &Substreams::new(1)).unwrap();
    let large = variance_probe_inf(&inst, &x, 16, trials, &Substreams::new(2)).unwrap();
    let shrink = small / large;

    // a fixed path: exact-gradient steps of the variance-reduced method's update
    let spider = SpiderConfig { q0: 9, m1: 1000, m: 100 };
    let k_max = 1350;
    let eta = 1.0 / inst.lipschitz();
    let prox = ProxTerm::l1_squared(128.0).unwrap();
    let mut path = vec![x.clone()];
    for _ in 1..k_max {
        let last = path.last().unwrap();
        let grad = inst.exact_gradient(last).unwrap();
        path.push(proximal_step(last, &grad, eta, &prox, inst.region(), &StepTolerances::default()).unwrap().next.into_vec());
    }
    let budget = EstimatorConfig::Spider(spider).samples_through(k_max);
    let m = budget.div_ceil(k_max as u64) as usize;
    let mean_error = |config: EstimatorConfig, seed: u64| -> (f64, u64) {
        let mut est = GradientEstimator::new(config, Substreams::new(seed)).unwrap();
        let mut total = 0.0;
        for p in &path {
            let e = est.next(&inst, p).unwrap();
            let g = inst.exact_gradient(p).unwrap();
            let diff: Vec<f64> = e.gradient.iter().zip(&g).map(|(a, b)| a - b).collect();
            total += norm_inf(&diff).powi(2);
        }
        (total / path.len() as f64, est.samples())
    };
    let median = |mut v: Vec<f64>| {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v[1]
    };
    let mut vr = Vec::new();
    let mut mb = Vec::new();
    let mut samples = (0, 0);
    for seed in 1..=3 {
        let (e, s) = mean_error(EstimatorConfig::Spider(spider), seed);
        vr.push(e);
        samples.0 = s;
        let (e, s) = mean_error(EstimatorConfig::Minibatch { m }, seed);
        mb.push(e);
        samples.1 = s;
    }
    let (vr, mb) = (median(vr), median(mb));
    let ok = shrink >= 2.0 && vr < mb && samples.1 >= samples.0;
    (
        ok,
        format!(
            "probe m=4 vs 16 shrinks {shrink:.2}x (>= 2); trace-mean error spider {vr:.3e} vs minibatch m={m} {mb:.3e} \
             ({} vs {} samples)",
            samples.0, samples.1
        ),
    )
}

// ---------------------------------------------------------------------------
// 3. dimension sensitivity at desk scale

fn dimension_sweep(report: &mut Report) {
    if !Report::selected("3") {
        return;
    }
    let mut cfg = ExperimentConfig::default();
    cfg.seed = SEED;
    cfg.sweep.dims = vec![128, 512, 2048];
    cfg.sweep.replications = 3;
    let start = Instant::now();
    let sweep = match run_dimension_sweep(&cfg.sweep, cfg.seed, 1) {
        Ok(s) if s.failures.is_empty() => s,
        Ok(s) => {
            report.check("3", "dimension sweep", || (false, format!("{} runs failed", s.failures.len())));
            return;
        }
        Err(e) => {
            report.check("3", "dimension sweep", || (false, e.to_string()));
            return;
        }
    };
    let elapsed = start.elapsed().as_secs_f64();
    let at = |method: &str, d: usize| sweep.summary.iter().find(|r| r.method == method && r.d == d).unwrap().clone();
    let top = 2048;

    report.check("3a", "SGD residual growth vs DISFOM_minibatch", || {
        let (sgd, dis) = (at("SGD", top), at("DISFOM_minibatch", top));
        let ratio = sgd.rel_residual / dis.rel_residual;
        (
            ratio >= 2.0,
            format!(
                "rel residual at d=2048: SGD {:.3} vs DISFOM_minibatch {:.3}, ratio {ratio:.2} (>= 2); \
                 mean-then-normalize {:.3} vs {:.3}; sweep took {elapsed:.0}s",
                sgd.rel_residual, dis.rel_residual, sgd.rel_residual_of_means, dis.rel_residual_of_means
            ),
        )
    });
    report.check("3b", "SPIDER gap growth vs DISFOM_vr", || {
        let (sp, dis) = (at("SPIDER", top), at("DISFOM_vr", top));
        let ratio = sp.rel_gap / dis.rel_gap;
        (
            ratio >= 2.0,
            format!(
                "rel gap at d=2048: SPIDER {:.3} vs DISFOM_vr {:.3}, ratio {ratio:.2} (>= 2); mean-then-normalize {:.3} vs {:.3}",
                sp.rel_gap, dis.rel_gap, sp.rel_gap_of_means, dis.rel_gap_of_means
            ),
        )
    });
    report.check("3c", "DISFOM and SMD within 3x of d=128", || {
        let mut ok = true;
        let mut parts = Vec::new();
        for method in ["DISFOM_minibatch", "DISFOM_vr", "SMD_minibatch", "SMD_vr"] {
            let mut extreme: f64 = 1.0;
            let mut extreme_of_means: f64 = 1.0;
            for &d in &[512, 2048] {
                let r = at(method, d);
                for v in [r.rel_gap, r.rel_residual] {
                    if !(v <= 3.0 && v >= 1.0 / 3.0) {
                        ok = false;
                    }
                    if v.ln().abs() > extreme.ln().abs() {
                        extreme = v;
                    }
                }
                for v in [r.rel_gap_of_means, r.rel_residual_of_means] {
                    if v.ln().abs() > extreme_of_means.ln().abs() {
                        extreme_of_means = v;
                    }
                }
            }
            parts.push(format!("{method} {extreme:.3} (mean-then-normalize {extreme_of_means:.3})"));
        }
        (ok, format!("most extreme rel metric per method: {}", parts.join(", ")))
    });
}

// ---------------------------------------------------------------------------
// 4. timing race on box subproblems

fn timing_race() -> Verdict {
    let mut cfg = ExperimentConfig::default().race;
    cfg.dims = vec![64, 256, 1024];
    cfg.trials = 10;
    let race = run_timing_race(&cfg, SEED, &[Family::Box]).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for &d in &cfg.dims {
        let speedup = race.speedup(d, Family::Box).unwrap();
        let admm = race.summary.iter().find(|r| r.d == d && r.solver == "admm").unwrap();
        ok &= speedup >= 5.0 && admm.max_rel_gap <= 1e-6 && admm.converged == admm.trials;
        parts.push(format!("d={d}: {speedup:.1}x, gap {:.1e}, {}/{} reached", admm.max_rel_gap, admm.converged, admm.trials));
    }
    (ok, format!("{} (>= 5x, gap <= 1e-6)", parts.join("; ")))
}

// ---------------------------------------------------------------------------
// 5. reference optimum

fn reference_optimum() -> Verdict {
    let mut worst_residual: f64 = 0.0;
    let mut worst_step: f64 = 0.0;
    let mut deterministic = true;
    let mut count = 0;
    for log2 in 7..=11 {
        let d = 1usize << log2;
        for rep in 0..3 {
            let inst = instance(d, derive_seed(SEED, d as u64, rep, 1));
            let a = inst.reference_optimum().unwrap();
            let b = instance(d, derive_seed(SEED, d as u64, rep, 1)).reference_optimum().unwrap();
            let grad = inst.exact_gradient(a.x.as_slice()).unwrap();
            let r = residual_inf(a.x.as_slice(), &grad, inst.region(), DEFAULT_ACTIVE_TOL).unwrap().residual_inf;
            worst_residual = worst_residual.max(r);
            worst_step = worst_step.max(a.last_step_l1);
            let bits = |v: &[f64]| v.iter().map(|t| t.to_bits()).collect::<Vec<_>>();
            deterministic &= bits(a.x.as_slice()) == bits(b.x.as_slice()) && a.value.to_bits() == b.value.to_bits();
            count += 1;
        }
    }
    let ok = worst_residual <= 1e-6 && worst_step <= 1e-10 && deterministic;
    (
        ok,
        format!(
            "{count} instances d=128..2048: max residual {worst_residual:.1e} (<= 1e-6), max final step {worst_step:.1e} \
             (<= 1e-10), reruns identical: {deterministic}"
        ),
    )
}

// ---------------------------------------------------------------------------
// 6. structural invariants

/// Records every point at which a gradient is requested.
struct Watch<'a> {
    inner: &'a SyntheticQpInstance,
    seen: RefCell<Vec<Vec<f64>>>,
}

impl StochasticOracle<f64> for Watch<'_> {
    type Sample = <SyntheticQpInstance as StochasticOracle<f64>>::Sample;
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn draw(&self, rng: &mut Stream) -> Self::Sample {
        StochasticOracle::<f64>::draw(self.inner, rng)
    }
    fn accumulate_gradient(&self, x: &[f64], s: &Self::Sample, w: f64, out: &mut [f64]) -> Result<()> {
        let mut seen = self.seen.borrow_mut();
        if seen.last().map_or(true, |p| p.as_slice() != x) {
            seen.push(x.to_vec());
        }
        self.inner.accumulate_gradient(x, s, w, out)
    }
    fn exact_gradient(&self, x: &[f64]) -> Option<Result<Vec<f64>>> {
        StochasticOracle::<f64>::exact_gradient(self.inner, x)
    }
    fn exact_value(&self, x: &[f64]) -> Option<Result<f64>> {
        StochasticOracle::<f64>::exact_value(self.inner, x)
    }
}

fn short_config(inst: &SyntheticQpInstance, prox: ProxTerm<f64>, estimator: EstimatorConfig) -> OptimizerConfig<f64> {
    OptimizerConfig {
        eta: 1.0 / inst.lipschitz(),
        iterations: 30,
        prox,
        estimator,
        region: inst.region().clone(),
        seed: 9,
        record_every: 1,
        output_rule: OutputRule::RandomUniform,
    }
}

fn feasibility() -> Verdict {
    let d = 128;
    let inst = instance(d, 61);
    let x1 = vec![0.0; d];
    let mb = EstimatorConfig::Minibatch { m: 50 };
    let vr = EstimatorConfig::Spider(SpiderConfig { q0: 9, m1: 100, m: 10 });
    let mut points = 0;
    let mut ok = true;
    let mut runs: Vec<(ProxTerm<f64>, EstimatorConfig, bool)> = vec![
        (ProxTerm::l1_squared(2.0).unwrap(), mb, false),
        (ProxTerm::l1_squared(128.0).unwrap(), vr, false),
        (ProxTerm::Euclidean, mb, false),
        (ProxTerm::Euclidean, vr, false),
        (ProxTerm::Euclidean, mb, true),
        (ProxTerm::Euclidean, vr, true),
    ];
    runs.push((ProxTerm::l1_ball(0.05).unwrap(), mb, false));
    for (prox, est, mirror) in runs {
        let watch = Watch { inner: &inst, seen: RefCell::new(vec![]) };
        let cfg = short_config(&inst, prox, est);
        let trace = if mirror {
            smd_run(&watch, &x1, &cfg, &SmdConfig::for_dimension(d, 0.05).unwrap()).unwrap()
        } else {
            disfom_run(&watch, &x1, &cfg, &StepTolerances::default()).unwrap()
        };
        let seen = watch.seen.borrow();
        points += seen.len() + 1;
        ok &= seen.len() >= 30;
        ok &= seen.iter().chain(std::iter::once(&trace.output.as_slice().to_vec())).all(|x| is_feasible(x, inst.region(), 1e-9).unwrap());
    }
    (ok, format!("{points} watched points over 7 runs, all within 1e-9 of the box"))
}

fn trust_region() -> Verdict {
    let inst = instance(128, 62);
    let x1 = vec![0.0; 128];
    let mut worst: f64 = f64::NEG_INFINITY;
    for psi in [0.01, 0.2, 3.0] {
        for est in [EstimatorConfig::Minibatch { m: 20 }, EstimatorConfig::Spider(SpiderConfig { q0: 5, m1: 50, m: 5 })] {
            let watch = Watch { inner: &inst, seen: RefCell::new(vec![]) };
            let trace = disfom_run(&watch, &x1, &short_config(&inst, ProxTerm::l1_ball(psi).unwrap(), est), &StepTolerances::default()).unwrap();
            for r in &trace.records {
                worst = worst.max(r.step_l1 - psi);
            }
            // spider alternates between the current and previous points, so only steps between minibatch points count
            if matches!(est, EstimatorConfig::Minibatch { .. }) {
                for w in watch.seen.borrow().windows(2) {
                    worst = worst.max(dist_l1(&w[0], &w[1]) - psi);
                }
            }
        }
    }
    (worst <= 1e-9, format!("max step excess over psi {worst:.1e} (<= 1e-9)"))
}

fn uniform_output() -> Verdict {
    let k = 10;
    let n = 100_000;
    let mut counts = vec![0u64; k];
    for seed in 0..n {
        counts[draw_output_index(OutputRule::RandomUniform, k, &Substreams::new(seed)) - 1] += 1;
    }
    let expected = n as f64 / k as f64;
    let chi2: f64 = counts.iter().map(|c| (*c as f64 - expected).powi(2) / expected).sum();
    let critical = ChiSquared::new((k - 1) as f64).unwrap().inverse_cdf(0.99);
    (chi2 < critical, format!("chi2 {chi2:.2} < {critical:.2} over {n} draws of Y on [10]"))
}

fn sample_accounting() -> Verdict {
    let d = 128;
    let inst = instance(d, 63);
    let spec = MethodSpec::published_defaults().into_iter().find(|m| m.name == "DISFOM_vr").unwrap();
    let (q0, m1, m) = (9u64, 1000u64, 100u64);
    let k = spec.iterations as u64;
    let refreshes = k.div_ceil(q0);
    let expected = refreshes * m1 + (k - refreshes) * 2 * m;
    let outcome = run_method(&inst, &spec, 0.0, 64).unwrap();
    let trace = run_trace(&inst, &spec, 64, 150).unwrap();
    let monotone = trace.records.windows(2).all(|w| w[1].samples >= w[0].samples);
    let ok = expected == 390_000 && outcome.samples == expected && trace.samples == expected && monotone;
    (ok, format!("DISFOM_vr at d=128 drew {} samples, schedule gives {expected}", outcome.samples))
}

fn finite_differences() -> Verdict {
    let d = 128;
    let inst = instance(d, 64);
    let mut rng = Substreams::new(64).stream(0, 0, 99);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let g = inst.exact_gradient(&x).unwrap();
        for i in 0..d {
            let h = 1e-6 * (1.0 + x[i].abs());
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (inst.exact_value(&xp).unwrap() - inst.exact_value(&xm).unwrap()) / (2.0 * h);
            worst = worst.max((fd - g[i]).abs() / (1.0 + g[i].abs()));
        }
    }
    (worst <= 1e-6, format!("max relative deviation {worst:.1e} over 640 coordinates (<= 1e-6)"))
}

fn truncated_variance() -> Verdict {
    // 1 − 2u·φ(u)/(Φ(u) − Φ(−u)) at u = 3, evaluated to 40 digits
    let exact = 0.973_336_924_662_541_476_588_1;
    let got = sigma_sq_trunc_normal(3.0).unwrap();
    ((got - exact).abs() <= 1e-6, format!("sigma^2(3) = {got:.16} vs {exact:.16}"))
}

fn cli_reruns() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("small.toml");
    std::fs::write(
        &config,
        "seed = 5\n[sweep]\ndims = [128, 256]\nreplications = 2\n\n\
         [[sweep.methods]]\nname = \"DISFOM_vr\"\niterations = 20\n\
         update = { rule = \"l1_squared\", rho_hat = 128.0, eta_scale = 1.0 }\n\
         estimator = { kind = \"spider\", q0 = 3, m1 = 30, m = 5 }\n\n\
         [[sweep.methods]]\nname = \"SMD_minibatch\"\niterations = 20\n\
         update = { rule = \"mirror\" }\nestimator = { kind = \"minibatch\", m = 20 }\n",
    )
    .unwrap();
    let mut outputs = Vec::new();
    for (name, workers) in [("a", "1"), ("b", "1"), ("c", "2")] {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_disfom-bench"))
            .args(["sweep", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--workers", workers])
            .output()
            .unwrap()
            .status;
        assert!(status.success(), "sweep exited with {status}");
        outputs.push(out);
    }
    let files = ["results.csv", "summary.csv", "reference.csv", "manifest.json"];
    let same = files.iter().all(|f| {
        let first = std::fs::read(outputs[0].join(f)).unwrap();
        outputs[1..].iter().all(|o| std::fs::read(o.join(f)).unwrap() == first)
    });
    (same, format!("{} files identical across 3 runs (1, 1 and 2 workers)", files.len()))
}

fn main() {
    let mut report = Report { failed: 0 };
    report.check("1", "prox oracle equivalence", prox_equivalence);
    report.check("2", "variance reduction in the max-norm", variance_reduction);
    dimension_sweep(&mut report);
    report.check("4", "timing race", timing_race);
    report.check("5", "reference optimum", reference_optimum);
    report.check("6a", "feasibility of all iterates", feasibility);
    report.check("6b", "trust-region step bound", trust_region);
    report.check("6c", "uniform output index", uniform_output);
    report.check("6d", "sample accounting", sample_accounting);
    report.check("6e", "gradient vs finite differences", finite_differences);
    report.check("6f", "truncated-normal variance", truncated_variance);
    report.check("6g", "byte-identical CLI reruns", cli_reruns);
    println!("acceptance: {} check(s) failed", report.failed);
    if report.failed > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
