//! Stochastic gradient oracles and the minibatch / recursive variance-reduced estimators.
//!
//! Every draw comes from its own random stream keyed by `(master seed, step, draw, purpose)`,
//! so estimates are reproducible regardless of how runs are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_dim, norm_inf, DenseVector};
use crate::scalar::Scalar;

/// Random stream handed to oracles.
pub type Stream = ChaCha8Rng;

/// A stochastic first-order oracle `G(x, ζ)` with `E[G(x, ζ)] = ∇f(x)`.
pub trait StochasticOracle<T: Scalar> {
    /// One realization of the randomness `ζ`.
    type Sample;

    fn dim(&self) -> usize;

    fn draw(&self, rng: &mut Stream) -> Self::Sample;

    /// `out += weight · G(x, sample)`; counts as one gradient evaluation.
    fn accumulate_gradient(&self, x: &[T], sample: &Self::Sample, weight: T, out: &mut [T]) -> Result<()>;

    /// `∇f(x)` when available in closed form.
    fn exact_gradient(&self, _x: &[T]) -> Option<Result<Vec<T>>> {
        None
    }

    /// `f(x)` when available in closed form.
    fn exact_value(&self, _x: &[T]) -> Option<Result<T>> {
        None
    }
}

/// Purpose tags separating the substreams of one run.
pub mod tag {
    /// Minibatch draws; refresh steps of the recursive estimator reuse them.
    pub const MINIBATCH: u64 = 1;
    pub const PAIRED: u64 = 3;
    pub const PROBE: u64 = 4;
    pub const OUTPUT: u64 = 5;
    pub const MONTE_CARLO: u64 = 6;
    pub const INSTANCE: u64 = 7;
}

/// Factory of independent random streams derived from a master seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substreams {
    pub master: u64,
}

impl Substreams {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    /// The stream for draw `i` of step `k` used for `purpose`.
    pub fn stream(&self, k: u64, i: u64, purpose: u64) -> Stream {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.master.to_le_bytes());
        key[8..16].copy_from_slice(&k.to_le_bytes());
        key[16..24].copy_from_slice(&i.to_le_bytes());
        key[24..].copy_from_slice(&purpose.to_le_bytes());
        ChaCha8Rng::from_seed(key)
    }

    /// A child factory, e.g. one per replication.
    pub fn child(&self, index: u64) -> Self {
        use rand::RngCore;
        Self { master: self.stream(u64::MAX, index, u64::MAX).next_u64() }
    }
}

/// Gradient estimator schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimatorConfig {
    Minibatch { m: usize },
    Spider(SpiderConfig),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpiderConfig {
    /// Refresh interval.
    pub q0: usize,
    /// Refresh batch size.
    pub m1: usize,
    /// Batch size of the recursive steps.
    pub m: usize,
}

impl SpiderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.q0 == 0 || self.m1 == 0 || self.m == 0 {
            return Err(Error::InvalidParameter(format!("spider schedule needs q0, m1, m >= 1, got {self:?}")));
        }
        Ok(())
    }

    /// Step `k ≥ 1` is a refresh iff `k ≡ 1 (mod q0)`.
    pub fn is_refresh(&self, k: usize) -> bool {
        (k - 1) % self.q0 == 0
    }

    /// Gradient evaluations consumed by steps `1..=k`; a paired draw counts twice.
    pub fn samples_through(&self, k: usize) -> u64 {
        let refresh = k.div_ceil(self.q0) as u64;
        refresh * self.m1 as u64 + (k as u64 - refresh) * 2 * self.m as u64
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Minibatch { m } if *m == 0 => Err(Error::InvalidParameter("minibatch size must be >= 1".into())),
            Self::Minibatch { .. } => Ok(()),
            Self::Spider(cfg) => cfg.validate(),
        }
    }

    /// Gradient evaluations consumed by steps `1..=k`.
    pub fn samples_through(&self, k: usize) -> u64 {
        match self {
            Self::Minibatch { m } => (k * m) as u64,
            Self::Spider(cfg) => cfg.samples_through(k),
        }
    }
}

/// Previous step's data carried by the recursive estimator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpiderState<T> {
    pub last_estimate: DenseVector<T>,
    pub last_point: DenseVector<T>,
    pub step_index: usize,
}

/// An estimate with its cost.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientEstimate<T> {
    pub gradient: DenseVector<T>,
    pub samples: u64,
    pub refresh: bool,
}

fn batch_sum<T, O>(oracle: &O, x: &[T], m: usize, streams: &Substreams, k: u64, purpose: u64) -> Result<Vec<T>>
where
    T: Scalar,
    O: StochasticOracle<T> + ?Sized,
{
    let mut out = vec![T::zero(); x.len()];
    for i in 0..m {
        let sample = oracle.draw(&mut streams.stream(k, i as u64, purpose));
        oracle.accumulate_gradient(x, &sample, T::one(), &mut out)?;
    }
    Ok(out)
}

fn check_oracle_dim<T: Scalar, O: StochasticOracle<T> + ?Sized>(oracle: &O, x: &[T]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::Empty);
    }
    check_dim(oracle.dim(), x.len())
}

/// Mean of `m` independent sampled gradients at `x`, drawn from the substreams of step `k`.
pub fn minibatch_gradient<T, O>(oracle: &O, x: &[T], m: usize, streams: &Substreams, k: u64) -> Result<DenseVector<T>>
where
    T: Scalar,
    O: StochasticOracle<T> + ?Sized,
{
    check_oracle_dim(oracle, x)?;
    if m == 0 {
        return Err(Error::InvalidParameter("minibatch size must be >= 1".into()));
    }
    let inv = T::one() / T::from_count(m);
    let sum = batch_sum(oracle, x, m, streams, k, tag::MINIBATCH)?;
    DenseVector::from_computed(sum.into_iter().map(|s| s * inv).collect(), "minibatch gradient")
}

/// One step of the recursive estimator.
///
/// Refresh steps average `m1` draws at `x`. Other steps add to the previous estimate the
/// mean of `G(x, ζ_i) − G(x_prev, ζ_i)` over `m` draws, each draw used at both points.
pub fn spider_step<T, O>(
    oracle: &O,
    x: &[T],
    state: Option<&SpiderState<T>>,
    cfg: &SpiderConfig,
    streams: &Substreams,
) -> Result<(GradientEstimate<T>, SpiderState<T>)>
where
    T: Scalar,
    O: StochasticOracle<T> + ?Sized,
{
    cfg.validate()?;
    check_oracle_dim(oracle, x)?;
    let k = state.map_or(1, |s| s.step_index + 1);
    if let Some(s) = state {
        if s.step_index == 0 || s.last_point.dim() != x.len() || s.last_estimate.dim() != x.len() {
            return Err(Error::State(format!(
                "spider state at step {} does not match an iterate of dimension {}",
                s.step_index,
                x.len()
            )));
        }
    }
    let refresh = cfg.is_refresh(k);
    let (gradient, samples) = match state {
        Some(prev) if !refresh => {
            let mut diff = vec![T::zero(); x.len()];
            for i in 0..cfg.m {
                let sample = oracle.draw(&mut streams.stream(k as u64, i as u64, tag::PAIRED));
                oracle.accumulate_gradient(x, &sample, T::one(), &mut diff)?;
                oracle.accumulate_gradient(prev.last_point.as_slice(), &sample, -T::one(), &mut diff)?;
            }
            let inv = T::one() / T::from_count(cfg.m);
            let g: Vec<T> = diff.iter().zip(prev.last_estimate.iter()).map(|(d, g)| *d * inv + *g).collect();
            (g, 2 * cfg.m as u64)
        }
        None if !refresh => unreachable!("step 1 is always a refresh"),
        _ => {
            let inv = T::one() / T::from_count(cfg.m1);
            let sum = batch_sum(oracle, x, cfg.m1, streams, k as u64, tag::MINIBATCH)?;
            (sum.into_iter().map(|s| s * inv).collect(), cfg.m1 as u64)
        }
    };
    let gradient = DenseVector::from_computed(gradient, "spider estimate")?;
    let next = SpiderState {
        last_estimate: gradient.clone(),
        last_point: DenseVector::from_computed(x.to_vec(), "iterate")?,
        step_index: k,
    };
    Ok((GradientEstimate { gradient, samples, refresh }, next))
}

/// Stateful driver of either estimator across the steps of one run.
#[derive(Clone, Debug)]
pub struct GradientEstimator<T> {
    config: EstimatorConfig,
    streams: Substreams,
    spider: Option<SpiderState<T>>,
    step: usize,
    samples: u64,
}

impl<T: Scalar> GradientEstimator<T> {
    pub fn new(config: EstimatorConfig, streams: Substreams) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, streams, spider: None, step: 0, samples: 0 })
    }

    /// Estimate `G^k` at the current iterate, advancing `k` by one.
    pub fn next<O: StochasticOracle<T> + ?Sized>(&mut self, oracle: &O, x: &[T]) -> Result<GradientEstimate<T>> {
        let estimate = match &self.config {
            EstimatorConfig::Minibatch { m } => {
                let k = self.step + 1;
                let g = minibatch_gradient(oracle, x, *m, &self.streams, k as u64)?;
                GradientEstimate { gradient: g, samples: *m as u64, refresh: true }
            }
            EstimatorConfig::Spider(cfg) => {
                let (est, state) = spider_step(oracle, x, self.spider.as_ref(), cfg, &self.streams)?;
                self.spider = Some(state);
                est
            }
        };
        self.step += 1;
        self.samples += estimate.samples;
        Ok(estimate)
    }

    /// Steps taken so far.
    pub fn step(&self) -> usize {
        self.step
    }

    /// Gradient evaluations consumed so far.
    pub fn samples(&self) -> u64 {
        self.samples
    }
}

/// Monte-Carlo estimate of `E‖minibatch_gradient(x, m) − ∇f(x)‖∞²` over `trials` batches.
pub fn variance_probe_inf<T, O>(oracle: &O, x: &[T], m: usize, trials: usize, streams: &Substreams) -> Result<T>
where
    T: Scalar,
    O: StochasticOracle<T> + ?Sized,
{
    if trials < 30 {
        return Err(Error::InvalidParameter(format!("variance probe needs at least 30 trials, got {trials}")));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("minibatch size must be >= 1".into()));
    }
    check_oracle_dim(oracle, x)?;
    let exact = oracle
        .exact_gradient(x)
        .ok_or_else(|| Error::Oracle("variance probe needs an exact gradient".into()))??;
    let inv = T::one() / T::from_count(m);
    let mut total = T::zero();
    for t in 0..trials {
        let sum = batch_sum(oracle, x, m, streams, t as u64 + 1, tag::PROBE)?;
        let err: Vec<T> = sum.iter().zip(&exact).map(|(s, g)| *s * inv - *g).collect();
        let e = norm_inf(&err);
        total += e * e;
    }
    Ok(total / T::from_count(trials))
}
