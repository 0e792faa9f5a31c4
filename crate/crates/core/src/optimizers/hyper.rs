use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum HyperMode {
    /// ℓ1-squared term, minibatch estimator.
    Case1Minibatch,
    /// ℓ1-squared term, recursive estimator.
    Case1VR,
    /// ℓ1-ball trust region, minibatch estimator.
    Case2Minibatch,
    /// ℓ1-ball trust region, recursive estimator.
    Case2VR,
}

/// Parameters achieving an `ε`-stationary output in expectation, up to constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Hyperparameters<T> {
    pub eta: T,
    pub iterations: u64,
    /// Minibatch size (minibatch modes).
    pub batch: Option<u64>,
    /// Refresh batch `m₁` (recursive modes).
    pub refresh_batch: Option<u64>,
    /// Refresh interval `q = √m₁/Ω`, real valued (recursive modes).
    pub refresh_interval: Option<T>,
    /// Recursive batch `m = qΩ²`, real valued (recursive modes).
    pub recursive_batch: Option<T>,
    /// `Ω = e² ln d` (recursive modes).
    pub omega: Option<T>,
    /// Smallest admissible `ρ̂` and whether the bound is strict (ℓ1-squared modes).
    pub rho_hat_min: Option<(T, bool)>,
    /// Trust-region radius `ψ = ε/L` (ℓ1-ball modes).
    pub psi: Option<T>,
    /// Analysis parameter `t`: `2η/ρ̂` at the smallest `ρ̂` or `1/L`.
    pub t: Option<T>,
}

/// `⌈x⌉`, treating values within a relative `1e−9` of an integer as that integer.
fn ceil_robust<T: Scalar>(x: T) -> u64 {
    let r = x.round();
    let v = if (x - r).abs() <= T::lit(1e-9) * x.abs().max(T::one()) { r } else { x.ceil() };
    v.to_u64().unwrap_or(u64::MAX).max(1)
}

/// Parameter recipes with the unknown sub-Gaussian constant `c = 1`.
pub fn suggest_hyperparameters<T: Scalar>(
    epsilon: T,
    d: usize,
    lipschitz: T,
    delta_f: T,
    sigma_inf: T,
    mode: HyperMode,
) -> Result<Hyperparameters<T>> {
    suggest_hyperparameters_with(epsilon, d, lipschitz, delta_f, sigma_inf, mode, T::one())
}

/// Parameter recipes with an explicit sub-Gaussian constant `c`.
pub fn suggest_hyperparameters_with<T: Scalar>(
    epsilon: T,
    d: usize,
    lipschitz: T,
    delta_f: T,
    sigma_inf: T,
    mode: HyperMode,
    c: T,
) -> Result<Hyperparameters<T>> {
    for (name, v) in [("epsilon", epsilon), ("L", lipschitz), ("delta_f", delta_f), ("sigma_inf", sigma_inf), ("c", c)] {
        if !(v.is_finite() && v > T::zero()) {
            return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
        }
    }
    if d < 2 {
        return Err(Error::InvalidParameter(format!("dimension must be >= 2, got {d}")));
    }
    let eps2 = epsilon * epsilon;
    let log_d = T::from_count(d).ln();
    let noise = c * log_d * sigma_inf * sigma_inf / eps2;
    let eta = T::one() / lipschitz;
    let iterations = ceil_robust(delta_f * lipschitz / eps2);
    let omega = T::lit(std::f64::consts::E).powi(2) * log_d;
    let mut h = Hyperparameters {
        eta,
        iterations,
        batch: None,
        refresh_batch: None,
        refresh_interval: None,
        recursive_batch: None,
        omega: None,
        rho_hat_min: None,
        psi: None,
        t: None,
    };
    let vr = matches!(mode, HyperMode::Case1VR | HyperMode::Case2VR);
    if vr {
        let m1 = ceil_robust(omega * noise);
        let root = T::from_u64(m1).expect("batch fits the scalar").sqrt();
        h.refresh_batch = Some(m1);
        h.refresh_interval = Some(root / omega);
        h.recursive_batch = Some(root * omega);
        h.omega = Some(omega);
    } else {
        h.batch = Some(ceil_robust(noise));
    }
    match mode {
        HyperMode::Case1Minibatch => {
            h.rho_hat_min = Some((T::lit(2.0), true));
            h.t = Some(eta);
        }
        HyperMode::Case1VR => {
            h.rho_hat_min = Some((T::lit(6.0), false));
            h.t = Some(T::lit(2.0) * eta / T::lit(6.0));
        }
        HyperMode::Case2Minibatch | HyperMode::Case2VR => {
            h.psi = Some(epsilon / lipschitz);
            h.t = Some(T::one() / lipschitz);
        }
    }
    Ok(h)
}
