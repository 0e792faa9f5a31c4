//! The synthetic nonconvex stochastic least-squares problem
//!
//! ```text
//! f(x) = ½ E[(αᵀx − b)²] + λ Σ x_i²/(1 + x_i²),   b = αᵀx_true + w,   X = [−R, R]^d
//! ```
//!
//! with `α = Σ^{1/2}s`, `s` and `w` truncated standard normal on `[−u, u]`, and `Σ`
//! the identity except for a random `100 × 100` leading block with spectrum in `[1, 2]`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_dim, DenseVector, FeasibleRegion};
use crate::optimizers::{pgd_backtracking, PgdOptions, PgdResult};
use crate::sampling::{tag, Stream, StochasticOracle, Substreams};

/// Size of the random covariance block.
pub const SUB_BLOCK: usize = 100;

const MAX_QR_RETRIES: usize = 8;
const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITERATIONS: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticQpSpec {
    pub d: usize,
    pub seed: u64,
    /// Regularization weight `λ`.
    pub lambda_reg: f64,
    /// Box half-width `R`.
    pub box_half_width: f64,
    /// Truncation half-width `u`.
    pub trunc: f64,
    pub sub_block: usize,
}

impl Default for SyntheticQpSpec {
    fn default() -> Self {
        Self { d: 128, seed: 0, lambda_reg: 2.5, box_half_width: 3.0, trunc: 3.0, sub_block: SUB_BLOCK }
    }
}

impl SyntheticQpSpec {
    pub fn with_dim(d: usize, seed: u64) -> Self {
        Self { d, seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sub_block != SUB_BLOCK {
            return Err(Error::InvalidParameter(format!("covariance block must be {SUB_BLOCK}, got {}", self.sub_block)));
        }
        if self.d < self.sub_block {
            return Err(Error::InvalidParameter(format!("d = {} is below the block size {}", self.d, self.sub_block)));
        }
        for (name, v) in [("lambda_reg", self.lambda_reg), ("box_half_width", self.box_half_width), ("trunc", self.trunc)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// A generated problem; immutable and shareable across threads.
#[derive(Clone, Debug)]
pub struct SyntheticQpInstance {
    spec: SyntheticQpSpec,
    /// Symmetric square root of the covariance block; `Σ^{1/2}` is the identity elsewhere.
    factor: DMatrix<f64>,
    /// Diagonal of the spectral factor used to build the block.
    spectrum: Vec<f64>,
    x_true: Vec<f64>,
    sigma_sq: f64,
    lambda_max: f64,
    lipschitz: f64,
    region: FeasibleRegion<f64>,
}

/// One draw `(α, w)` of the sampling distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct QpSample {
    pub alpha: Vec<f64>,
    pub w: f64,
}

/// Variance of the standard normal truncated to `[−u, u]`.
pub fn sigma_sq_trunc_normal(u: f64) -> Result<f64> {
    if !(u > 0.0) || u.is_nan() {
        return Err(Error::InvalidParameter(format!("truncation half-width must be > 0, got {u}")));
    }
    if u.is_infinite() {
        return Ok(1.0);
    }
    // Φ(u) − Φ(−u) = erf(u/√2)
    let mass = libm::erf(u / std::f64::consts::SQRT_2);
    let density = 2.0 * u / (2.0 * std::f64::consts::PI).sqrt() * (-0.5 * u * u).exp();
    Ok(1.0 - density / mass)
}

/// Standard normal conditioned on `[−u, u]`, by rejection.
pub fn sample_trunc_normal<R: Rng + ?Sized>(rng: &mut R, u: f64) -> f64 {
    loop {
        let z: f64 = StandardNormal.sample(rng);
        if z.abs() <= u {
            return z;
        }
    }
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power iteration,
/// stopping once `‖Av − θv‖ ≤ tol·θ` for the Rayleigh quotient `θ`.
pub fn power_iteration(a: &DMatrix<f64>, tol: f64, max_iterations: usize) -> Result<f64> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::InvalidParameter("power iteration needs a non-empty square matrix".into()));
    }
    // a start vector with positive overlap on every eigenvector of a generic matrix
    let mut v = DVector::from_fn(n, |i, _| 1.0 + (i as f64 + 1.0).sqrt().fract());
    v /= v.norm();
    for _ in 0..max_iterations {
        let av = a * &v;
        let theta = v.dot(&av);
        let residual = (&av - &v * theta).norm();
        if residual <= tol * theta.abs() || theta == 0.0 {
            return Ok(theta);
        }
        let norm = av.norm();
        v = av / norm;
    }
    Err(Error::MaxIterations { iterations: max_iterations, context: "power iteration" })
}

fn random_orthonormal(rng: &mut Stream, n: usize) -> Result<DMatrix<f64>> {
    for _ in 0..MAX_QR_RETRIES {
        let m = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>());
        let qr = m.qr();
        let r = qr.r();
        let scale = r.diagonal().iter().fold(0.0_f64, |s, v| s.max(v.abs()));
        if r.diagonal().iter().all(|v| v.abs() > 1e-12 * scale) {
            return Ok(qr.q());
        }
    }
    Err(Error::Oracle(format!("orthonormalization failed after {MAX_QR_RETRIES} draws")))
}

/// Builds the instance deterministically from `spec.seed`.
pub fn generate_instance(spec: &SyntheticQpSpec) -> Result<SyntheticQpInstance> {
    spec.validate()?;
    let n = spec.sub_block;
    let mut rng = Substreams::new(spec.seed).stream(0, 0, tag::INSTANCE);
    let q = random_orthonormal(&mut rng, n)?;
    let spectrum: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..2.0)).collect();
    let root = DMatrix::from_diagonal(&DVector::from_iterator(n, spectrum.iter().map(|v| v.sqrt())));
    let f = &q * root * q.transpose();
    let factor = (&f + f.transpose()) * 0.5;

    let sigma_sq = sigma_sq_trunc_normal(spec.trunc)?;
    let block = &factor * &factor;
    let block_max = power_iteration(&block, POWER_TOL, POWER_MAX_ITERATIONS)?;
    let outside = if spec.d > n { 1.0 } else { 0.0 };
    let lambda_max = sigma_sq * block_max.max(outside);
    let lipschitz = lambda_max + 2.0 * spec.lambda_reg;

    let mut x_true = vec![0.0; spec.d];
    x_true[..n].iter_mut().for_each(|v| *v = 1.0);
    let region = FeasibleRegion::cube(spec.d, spec.box_half_width)?;
    Ok(SyntheticQpInstance {
        spec: spec.clone(),
        factor,
        spectrum,
        x_true,
        sigma_sq,
        lambda_max,
        lipschitz,
        region,
    })
}

impl SyntheticQpInstance {
    pub fn spec(&self) -> &SyntheticQpSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.d
    }

    /// The symmetric square root of the covariance block.
    pub fn factor_block(&self) -> &DMatrix<f64> {
        &self.factor
    }

    /// The spectral values the covariance block was built from.
    pub fn block_spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn x_true(&self) -> &[f64] {
        &self.x_true
    }

    pub fn sigma_sq(&self) -> f64 {
        self.sigma_sq
    }

    pub fn lambda_reg(&self) -> f64 {
        self.spec.lambda_reg
    }

    /// `λ_max(σ²Σ)`.
    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// `λ_min(σ²Σ) = σ²`.
    pub fn lambda_min(&self) -> f64 {
        self.sigma_sq
    }

    /// Lipschitz constant of `∇f`, `λ_max(σ²Σ) + 2λ`.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Weak-convexity modulus `λ/2 − λ_min(σ²Σ)`.
    pub fn weak_convexity(&self) -> f64 {
        self.spec.lambda_reg / 2.0 - self.lambda_min()
    }

    pub fn region(&self) -> &FeasibleRegion<f64> {
        &self.region
    }

    /// `Σ^{1/2} y`: the block factor on the leading coordinates, identity elsewhere.
    pub fn apply_factor(&self, y: &[f64]) -> Vec<f64> {
        let n = self.spec.sub_block;
        let head = &self.factor * DVector::from_column_slice(&y[..n]);
        head.iter().copied().chain(y[n..].iter().copied()).collect()
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        check_dim(self.spec.d, x.len())?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("iterate"));
        }
        Ok(())
    }

    /// Closed-form `f(x)`.
    pub fn exact_value(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        let e: Vec<f64> = x.iter().zip(&self.x_true).map(|(a, b)| a - b).collect();
        // eᵀΣe = ‖Σ^{1/2}e‖² with a symmetric factor
        let quad: f64 = self.apply_factor(&e).iter().map(|v| v * v).sum();
        let reg: f64 = x.iter().map(|v| v * v / (1.0 + v * v)).sum();
        Ok(0.5 * self.sigma_sq * quad + self.spec.lambda_reg * reg + 0.5 * self.sigma_sq)
    }

    /// Closed-form `∇f(x) = σ²Σ(x − x_true) + λ(2x_i/(1 + x_i²)²)_i`.
    pub fn exact_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        let e: Vec<f64> = x.iter().zip(&self.x_true).map(|(a, b)| a - b).collect();
        let se = self.apply_factor(&self.apply_factor(&e));
        Ok(se.iter().zip(x).map(|(s, v)| self.sigma_sq * s + self.reg_grad(*v)).collect())
    }

    fn reg_grad(&self, v: f64) -> f64 {
        let q = 1.0 + v * v;
        self.spec.lambda_reg * 2.0 * v / (q * q)
    }

    /// Draws `(α, w)` with `α = Σ^{1/2}s`.
    pub fn draw_sample(&self, rng: &mut Stream) -> QpSample {
        let u = self.spec.trunc;
        let s: Vec<f64> = (0..self.spec.d).map(|_| sample_trunc_normal(rng, u)).collect();
        let w = sample_trunc_normal(rng, u);
        QpSample { alpha: self.apply_factor(&s), w }
    }

    /// `α(αᵀ(x − x_true) − w) + λ(2x_i/(1 + x_i²)²)_i` for the given draw.
    pub fn sample_gradient_with(&self, x: &[f64], sample: &QpSample) -> Result<Vec<f64>> {
        let mut out = vec![0.0; x.len()];
        self.accumulate(x, sample, 1.0, &mut out)?;
        Ok(out)
    }

    /// A fresh sampled gradient at `x`.
    pub fn sample_gradient(&self, x: &[f64], rng: &mut Stream) -> Result<Vec<f64>> {
        let sample = self.draw_sample(rng);
        self.sample_gradient_with(x, &sample)
    }

    fn accumulate(&self, x: &[f64], sample: &QpSample, weight: f64, out: &mut [f64]) -> Result<()> {
        self.check(x)?;
        check_dim(x.len(), out.len())?;
        let r: f64 = sample.alpha.iter().zip(x.iter().zip(&self.x_true)).map(|(a, (xi, ti))| a * (xi - ti)).sum::<f64>()
            - sample.w;
        let wr = weight * r;
        for i in 0..x.len() {
            out[i] += wr * sample.alpha[i] + weight * self.reg_grad(x[i]);
        }
        Ok(())
    }

    /// Stationary point of the closed form over the box by projected gradient from 0.
    pub fn reference_optimum(&self) -> Result<PgdResult<f64>> {
        let x0 = vec![0.0; self.spec.d];
        pgd_backtracking(
            |x| self.exact_value(x),
            |x| self.exact_gradient(x),
            &self.region,
            &x0,
            &PgdOptions::default(),
        )
    }

    /// `f*` and its minimizer estimate.
    pub fn reference_value(&self) -> Result<(DenseVector<f64>, f64)> {
        let r = self.reference_optimum()?;
        Ok((r.x, r.value))
    }
}

impl StochasticOracle<f64> for SyntheticQpInstance {
    type Sample = QpSample;

    fn dim(&self) -> usize {
        self.spec.d
    }

    fn draw(&self, rng: &mut Stream) -> QpSample {
        self.draw_sample(rng)
    }

    fn accumulate_gradient(&self, x: &[f64], sample: &QpSample, weight: f64, out: &mut [f64]) -> Result<()> {
        self.accumulate(x, sample, weight, out)
    }

    fn exact_gradient(&self, x: &[f64]) -> Option<Result<Vec<f64>>> {
        Some(SyntheticQpInstance::exact_gradient(self, x))
    }

    fn exact_value(&self, x: &[f64]) -> Option<Result<f64>> {
        Some(SyntheticQpInstance::exact_value(self, x))
    }
}
