use serde::Serialize;

use super::{run_loop, OptimizerConfig, RunTrace, StepResult};
use crate::error::{Error, Result};
use crate::geometry::{DenseVector, FeasibleRegion};
use crate::prox::bisect_monotone;
use crate::sampling::StochasticOracle;
use crate::scalar::Scalar;

/// Mirror descent with the distance generating function `ω(x) = (C/2)‖x‖_p²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SmdConfig<T> {
    /// `p ∈ (1, 2]`.
    pub p_exponent: T,
    /// `C > 0`.
    pub strong_convexity_scale: T,
    /// Step `α`.
    pub step: T,
    /// Relative bracket width of the scalar search inside a box-constrained mirror step.
    pub subproblem_tol: T,
}

impl<T: Scalar> SmdConfig<T> {
    /// `p = 1 + 1/ln d`, `C = e² ln d`, so that `ω` is 1-strongly convex in `‖·‖₁`; needs `d ≥ 3`.
    pub fn for_dimension(d: usize, step: T) -> Result<Self> {
        if d < 3 {
            return Err(Error::InvalidParameter(format!("ℓ1 mirror map needs d >= 3, got {d}")));
        }
        let ln_d = T::from_count(d).ln();
        let cfg = Self {
            p_exponent: T::one() + T::one() / ln_d,
            strong_convexity_scale: T::lit(std::f64::consts::E).powi(2) * ln_d,
            step,
            subproblem_tol: T::lit(1e-14),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `α = c/√K` with `c = √(f(x¹)/(ρL²))`.
    pub fn step_size(f_x1: T, rho: T, lipschitz: T, iterations: usize) -> Result<T> {
        if !(f_x1 > T::zero() && rho > T::zero() && lipschitz > T::zero() && iterations > 0) {
            return Err(Error::InvalidParameter(format!(
                "mirror step needs f(x1), rho, L > 0 (got {f_x1}, {rho}, {lipschitz})"
            )));
        }
        let c = (f_x1 / (rho * lipschitz * lipschitz)).sqrt();
        Ok(c / T::from_count(iterations).sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.p_exponent;
        if !(p > T::one() && p <= T::lit(2.0)) {
            return Err(Error::InvalidParameter(format!("p must lie in (1, 2], got {p}")));
        }
        for (name, v) in [("C", self.strong_convexity_scale), ("step", self.step), ("subproblem_tol", self.subproblem_tol)] {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

fn norm_p<T: Scalar>(x: &[T], p: T) -> T {
    let m = x.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if m == T::zero() {
        return T::zero();
    }
    m * x.iter().map(|v| (v.abs() / m).powf(p)).sum::<T>().powf(T::one() / p)
}

/// `∇ω(x) = C‖x‖_p^{2−p} sgn(x)|x|^{p−1}`.
fn grad_omega<T: Scalar>(x: &[T], p: T, c: T) -> Vec<T> {
    let n = norm_p(x, p);
    if n == T::zero() {
        return vec![T::zero(); x.len()];
    }
    // C‖x‖_p^{2−p}|x_i|^{p−1} = C‖x‖_p (|x_i|/‖x‖_p)^{p−1}
    x.iter().map(|v| c * n * (v.abs() / n).powf(p - T::one()) * v.sgn()).collect()
}

/// `argmin_{z ∈ X} ⟨αG, z⟩ + D_ω(z, x)`; returns the point and the scalar search steps.
///
/// With `θ = ∇ω(x) − αG` the minimizer over a box is
/// `z_i(N) = clip(sgn(θ_i)(|θ_i|/(C N^{2−p}))^{1/(p−1)})` at the unique fixed point
/// `N = ‖z(N)‖_p`, found by bisection on the increasing map `N ↦ N − ‖z(N)‖_p`.
pub fn mirror_step<T: Scalar>(
    x: &[T],
    g: &[T],
    cfg: &SmdConfig<T>,
    region: &FeasibleRegion<T>,
) -> Result<(Vec<T>, usize)> {
    cfg.validate()?;
    if x.len() != g.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: g.len() });
    }
    let (p, c, one) = (cfg.p_exponent, cfg.strong_convexity_scale, T::one());
    let theta: Vec<T> =
        grad_omega(x, p, c).iter().zip(g).map(|(w, gi)| *w - cfg.step * *gi).collect();
    match region {
        FeasibleRegion::Unconstrained => {
            // z = ∇ω*(θ) = (1/C)‖θ‖_q^{2−q} sgn(θ)|θ|^{q−1}
            let q = p / (p - one);
            let n = norm_p(&theta, q);
            if n == T::zero() {
                return Ok((vec![T::zero(); x.len()], 0));
            }
            Ok((theta.iter().map(|t| n / c * (t.abs() / n).powf(q - one) * t.sgn()).collect(), 0))
        }
        FeasibleRegion::Box { lower, upper } => {
            let inv = one / (p - one);
            let z_at = |n: T| -> Vec<T> {
                let scale = c * n.powf(T::lit(2.0) - p);
                (0..theta.len())
                    .map(|i| {
                        let t = theta[i];
                        let mag = if t == T::zero() { T::zero() } else { (t.abs() / scale).powf(inv) };
                        (mag * t.sgn()).clip(lower[i], upper[i])
                    })
                    .collect()
            };
            let far: Vec<T> = (0..theta.len()).map(|i| lower[i].abs().max(upper[i].abs())).collect();
            let n_max = norm_p(&far, p);
            let root = bisect_monotone(
                |n| n - norm_p(&z_at(n), p),
                T::zero(),
                n_max,
                cfg.subproblem_tol * n_max,
                crate::prox::MAX_BISECTION_STEPS,
            )?;
            Ok((z_at(root.point), root.iterations))
        }
        other => Err(Error::Unsupported(format!("mirror step over a {} region", other.name()))),
    }
}

/// Stochastic mirror descent with the `ℓ_p²` mirror map; `cfg.prox` and `cfg.eta` are
/// unused, the step is `smd.step`.
pub fn smd_run<T, O>(oracle: &O, x1: &[T], cfg: &OptimizerConfig<T>, smd: &SmdConfig<T>) -> Result<RunTrace<T>>
where
    T: Scalar,
    O: StochasticOracle<T> + ?Sized,
{
    smd.validate()?;
    if !matches!(cfg.region, FeasibleRegion::Unconstrained | FeasibleRegion::Box { .. }) {
        return Err(Error::Unsupported(format!("mirror descent over a {} region", cfg.region.name())));
    }
    run_loop(oracle, x1, cfg, |_, x, g| {
        let (z, iterations) = mirror_step(x, g, smd, &cfg.region)?;
        Ok(StepResult { next: DenseVector::from_computed(z, "mirror iterate")?, xi_reconstructed: false, iterations })
    })
}
