//! Experiment configuration. Every constant of the published protocol is a named
//! default, so an empty file reproduces the full experiment.

use std::collections::BTreeSet;
use std::path::Path;

use disfom::optimizers::check_supported;
use disfom::sampling::{EstimatorConfig, SpiderConfig};
use disfom::{FeasibleRegion, ProxTerm, SyntheticQpSpec};
use serde::{Deserialize, Serialize};

use crate::error::BenchError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub sweep: SweepConfig,
    pub race: RaceConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self { seed: 2024, sweep: SweepConfig::default(), race: RaceConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub dims: Vec<usize>,
    pub replications: usize,
    pub problem: ProblemConfig,
    pub methods: Vec<MethodSpec>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            dims: (7..=14).map(|p| 1usize << p).collect(),
            replications: 3,
            problem: ProblemConfig::default(),
            methods: MethodSpec::published_defaults(),
        }
    }
}

/// Problem constants shared by every dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    pub lambda_reg: f64,
    pub box_half_width: f64,
    pub trunc: f64,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        let s = SyntheticQpSpec::default();
        Self { lambda_reg: s.lambda_reg, box_half_width: s.box_half_width, trunc: s.trunc }
    }
}

impl ProblemConfig {
    pub fn spec(&self, d: usize, seed: u64) -> SyntheticQpSpec {
        SyntheticQpSpec {
            lambda_reg: self.lambda_reg,
            box_half_width: self.box_half_width,
            trunc: self.trunc,
            ..SyntheticQpSpec::with_dim(d, seed)
        }
    }
}

/// How a method turns `(x^k, G^k)` into `x^{k+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum UpdateRule {
    /// Proximal step with `φ = (ρ̂/2)‖·‖₁²` and `η = eta_scale / L`.
    L1Squared { rho_hat: f64, eta_scale: f64 },
    /// Proximal step with the ℓ1 trust region of radius `psi` and `η = eta_scale / L`.
    L1Ball { psi: f64, eta_scale: f64 },
    /// Projected step with `η = eta_scale / L`.
    Euclidean { eta_scale: f64 },
    /// Mirror descent with `α = c/√K`; `c = √(f(x¹)/(ρL²))` with `ρ = λ/2 − λ_min` when absent.
    Mirror { c: Option<f64> },
}

impl UpdateRule {
    pub fn prox(&self) -> Result<ProxTerm<f64>, BenchError> {
        let p = match *self {
            Self::L1Squared { rho_hat, .. } => ProxTerm::l1_squared(rho_hat),
            Self::L1Ball { psi, .. } => ProxTerm::l1_ball(psi),
            Self::Euclidean { .. } | Self::Mirror { .. } => Ok(ProxTerm::Euclidean),
        };
        p.map_err(|e| BenchError::Config(e.to_string()))
    }

    pub fn eta_scale(&self) -> Option<f64> {
        match *self {
            Self::L1Squared { eta_scale, .. } | Self::L1Ball { eta_scale, .. } | Self::Euclidean { eta_scale } => {
                Some(eta_scale)
            }
            Self::Mirror { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSpec {
    pub name: String,
    pub iterations: usize,
    pub update: UpdateRule,
    pub estimator: EstimatorConfig,
}

impl MethodSpec {
    pub fn published_defaults() -> Vec<Self> {
        let mb = EstimatorConfig::Minibatch { m: 1000 };
        let vr = EstimatorConfig::Spider(SpiderConfig { q0: 9, m1: 1000, m: 100 });
        let m = |name: &str, iterations, update, estimator| Self { name: name.into(), iterations, update, estimator };
        vec![
            m("DISFOM_minibatch", 300, UpdateRule::L1Squared { rho_hat: 2.0, eta_scale: 1.0 }, mb),
            m("DISFOM_vr", 1350, UpdateRule::L1Squared { rho_hat: 128.0, eta_scale: 1.0 }, vr),
            m("SGD", 300, UpdateRule::Euclidean { eta_scale: 1.0 }, mb),
            m("SPIDER", 1350, UpdateRule::Euclidean { eta_scale: 0.1 }, vr),
            m("SMD_minibatch", 300, UpdateRule::Mirror { c: None }, mb),
            m("SMD_vr", 1350, UpdateRule::Mirror { c: None }, vr),
        ]
    }

    /// `minibatch` or `vr`, the grouping used for plotting.
    pub fn family(&self) -> &'static str {
        match self.estimator {
            EstimatorConfig::Minibatch { .. } => "minibatch",
            EstimatorConfig::Spider(_) => "vr",
        }
    }

    /// Gradient evaluations of a full run.
    pub fn sample_budget(&self) -> u64 {
        self.estimator.samples_through(self.iterations)
    }

    fn validate(&self, region: &FeasibleRegion<f64>, dims: &[usize]) -> Result<(), BenchError> {
        let err = |msg: String| BenchError::Config(format!("method {}: {msg}", self.name));
        if self.name.is_empty() || self.name.contains([',', '"', '\n']) {
            return Err(err("name must be nonempty without commas, quotes or newlines".into()));
        }
        if self.iterations == 0 {
            return Err(err("iterations must be >= 1".into()));
        }
        self.estimator.validate().map_err(|e| err(e.to_string()))?;
        if let Some(s) = self.update.eta_scale() {
            if !(s.is_finite() && s > 0.0) {
                return Err(err(format!("eta_scale must be > 0, got {s}")));
            }
        }
        match self.update {
            UpdateRule::Mirror { c: Some(c) } if !(c.is_finite() && c > 0.0) => {
                return Err(err(format!("mirror constant must be > 0, got {c}")));
            }
            UpdateRule::Mirror { .. } if dims.iter().any(|d| *d < 3) => {
                return Err(err("mirror descent needs d >= 3".into()));
            }
            _ => {}
        }
        let prox = self.update.prox()?;
        check_supported(&prox, region).map_err(|e| err(e.to_string()))
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.dims.is_empty() {
            return Err(BenchError::Config("dims must be nonempty".into()));
        }
        if self.replications == 0 {
            return Err(BenchError::Config("replications must be >= 1".into()));
        }
        let mut sorted = self.dims.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted != self.dims {
            return Err(BenchError::Config("dims must be strictly increasing".into()));
        }
        for &d in &self.dims {
            self.problem.spec(d, 0).validate().map_err(|e| BenchError::Config(e.to_string()))?;
        }
        if self.methods.is_empty() {
            return Err(BenchError::Config("methods must be nonempty".into()));
        }
        let mut names = BTreeSet::new();
        for m in &self.methods {
            if !names.insert(m.name.as_str()) {
                return Err(BenchError::Config(format!("duplicate method name {}", m.name)));
            }
        }
        let region = FeasibleRegion::cube(1, self.problem.box_half_width)
            .map_err(|e| BenchError::Config(e.to_string()))?;
        self.methods.iter().try_for_each(|m| m.validate(&region, &self.dims))
    }

    /// The dimension every relative metric is normalized by.
    pub fn base_dim(&self) -> usize {
        self.dims[0]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RaceConfig {
    pub dims: Vec<usize>,
    pub trials: usize,
    /// Each solve is repeated until this much time has passed, then averaged.
    pub min_timing_secs: f64,
    pub boxed: BoxRace,
    pub l1box: L1BoxRace,
}

impl Default for RaceConfig {
    fn default() -> Self {
        Self {
            dims: (6..=13).map(|p| 1usize << p).collect(),
            trials: 10,
            min_timing_secs: 2e-3,
            boxed: BoxRace::default(),
            l1box: L1BoxRace::default(),
        }
    }
}

/// `v ~ N(0, I)`, bounds `±bound`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoxRace {
    pub rho_hat: f64,
    pub bound: f64,
    pub solver_tol: f64,
    /// ADMM is stopped at this multiple of the specialized solver's time.
    pub admm_time_multiple: f64,
}

impl Default for BoxRace {
    fn default() -> Self {
        Self { rho_hat: 1.0, bound: 20.0, solver_tol: 1e-10, admm_time_multiple: 100.0 }
    }
}

/// `v ~ U[−v_half_width, v_half_width]^d`, `w ~ U[−w_half_width, w_half_width]^d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct L1BoxRace {
    pub rho_hat: f64,
    pub bound: f64,
    pub alpha: f64,
    pub v_half_width: f64,
    pub w_half_width: f64,
    pub solver_tol: f64,
    pub ball_tol: f64,
    pub admm_time_multiple: f64,
}

impl Default for L1BoxRace {
    fn default() -> Self {
        Self {
            rho_hat: 1.0,
            bound: 20.0,
            alpha: 10.0,
            v_half_width: 50.0,
            w_half_width: 20.0,
            solver_tol: 1e-6,
            ball_tol: 1e-12,
            admm_time_multiple: 10.0,
        }
    }
}

impl RaceConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |msg: &str| Err(BenchError::Config(format!("race: {msg}")));
        if self.dims.is_empty() || self.dims.contains(&0) {
            return bad("dims must be nonempty and positive");
        }
        if self.trials == 0 {
            return bad("trials must be >= 1");
        }
        if !(self.min_timing_secs >= 0.0) {
            return bad("min_timing_secs must be >= 0");
        }
        let b = &self.boxed;
        let l = &self.l1box;
        let positive = [
            b.rho_hat,
            b.bound,
            b.solver_tol,
            b.admm_time_multiple,
            l.rho_hat,
            l.bound,
            l.alpha,
            l.v_half_width,
            l.w_half_width,
            l.solver_tol,
            l.ball_tol,
            l.admm_time_multiple,
        ];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return bad("all family parameters must be finite and > 0");
        }
        Ok(())
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        self.sweep.validate()?;
        self.race.validate()
    }
}
