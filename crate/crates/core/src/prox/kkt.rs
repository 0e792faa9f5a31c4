use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{check_dim, dist_l1, norm_l1, FeasibleRegion};
use crate::scalar::Scalar;

use super::ProxSolution;

/// Violations of the optimality system of a proximal subproblem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KktReport<T> {
    /// Largest distance from `v − z` to the subdifferential of the penalty plus the normal cone.
    pub stationarity: T,
    pub primal: T,
    /// `multiplier · |constraint slack|` for the ball constraint.
    pub complementarity: T,
    pub max: T,
}

/// Closed interval with possibly infinite ends.
#[derive(Clone, Copy)]
struct Interval<T> {
    lo: T,
    hi: T,
}

impl<T: Scalar> Interval<T> {
    fn point(x: T) -> Self {
        Self { lo: x, hi: x }
    }

    fn plus(self, o: Self) -> Self {
        Self { lo: self.lo + o.lo, hi: self.hi + o.hi }
    }

    fn dist(self, x: T) -> T {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            T::zero()
        }
    }
}

/// `weight · ∂|· − at|` evaluated at `z`; points within `kink` of the kink take the full interval.
fn abs_subdiff<T: Scalar>(z: T, at: T, weight: T, kink: T) -> Interval<T> {
    let t = z - at;
    if t > kink {
        Interval::point(weight)
    } else if t < -kink {
        Interval::point(-weight)
    } else {
        Interval { lo: -weight, hi: weight }
    }
}

fn box_normal<T: Scalar>(z: T, lower: T, upper: T, kink: T) -> Interval<T> {
    let lo = if z - lower <= kink { T::neg_infinity() } else { T::zero() };
    let hi = if upper - z <= kink { T::infinity() } else { T::zero() };
    Interval { lo, hi }
}

fn kink_tol<T: Scalar>(scale: T) -> T {
    T::lit(16.0) * T::epsilon() * scale.max(T::one())
}

struct Parts<'a, T> {
    bounds: Option<(&'a [T], &'a [T])>,
    ball: Option<(&'a [T], T)>,
}

fn parts<T: Scalar>(region: &FeasibleRegion<T>, d: usize) -> Result<Parts<'_, T>> {
    match region {
        FeasibleRegion::Unconstrained => Ok(Parts { bounds: None, ball: None }),
        FeasibleRegion::Box { lower, upper } => {
            check_dim(d, lower.dim())?;
            Ok(Parts { bounds: Some((lower.as_slice(), upper.as_slice())), ball: None })
        }
        FeasibleRegion::L1BallBox { center, radius, lower, upper } => {
            check_dim(d, lower.dim())?;
            Ok(Parts {
                bounds: Some((lower.as_slice(), upper.as_slice())),
                ball: Some((center.as_slice(), *radius)),
            })
        }
        other => Err(Error::Unsupported(format!("optimality check over a {} region", other.name()))),
    }
}

fn report<T: Scalar>(
    z: &[T],
    v: &[T],
    bounds: Option<(&[T], &[T])>,
    penalty: impl Fn(usize, T) -> Interval<T>,
    ball: Option<(&[T], T, T)>,
) -> KktReport<T> {
    let scale = z.iter().chain(v).fold(T::zero(), |m, x| m.max(x.abs()));
    let kink = kink_tol(scale);
    let mut stationarity = T::zero();
    let mut primal = T::zero();
    for i in 0..z.len() {
        let mut set = penalty(i, kink);
        if let Some((lower, upper)) = bounds {
            set = set.plus(box_normal(z[i], lower[i], upper[i], kink));
            primal = primal.max((lower[i] - z[i]).pos()).max((z[i] - upper[i]).pos());
        }
        stationarity = stationarity.max(set.dist(v[i] - z[i]));
    }
    let mut complementarity = T::zero();
    if let Some((center, radius, multiplier)) = ball {
        let slack = dist_l1(z, center) - radius;
        primal = primal.max(slack.pos());
        complementarity = multiplier * slack.abs();
    }
    let max = stationarity.max(primal).max(complementarity);
    KktReport { stationarity, primal, complementarity, max }
}

/// Optimality violations of `sol` for `min_{z ∈ X} ½‖z − v‖² + (ρ̂/2)‖z‖₁²`, with the
/// shrinkage level recomputed as `ρ̂‖z‖₁` and the ball multiplier taken from `sol.mu`.
pub fn kkt_l1sq<T: Scalar>(
    v: &[T],
    rho_hat: T,
    region: &FeasibleRegion<T>,
    sol: &ProxSolution<T>,
) -> Result<KktReport<T>> {
    let z = sol.z.as_slice();
    check_dim(v.len(), z.len())?;
    let p = parts(region, v.len())?;
    let tau = rho_hat * norm_l1(z);
    let mu = sol.mu;
    if mu < T::zero() {
        return Err(Error::InvalidParameter("negative ball multiplier".into()));
    }
    let penalty = |i: usize, kink: T| {
        let base = abs_subdiff(z[i], T::zero(), tau, kink);
        match p.ball {
            Some((w, _)) => base.plus(abs_subdiff(z[i], w[i], mu, kink)),
            None => base,
        }
    };
    Ok(report(z, v, p.bounds, penalty, p.ball.map(|(w, a)| (w, a, mu))))
}

/// Optimality violations of `sol` for `min ½‖z − v‖²` over `‖z − center‖₁ ≤ ψ` and the
/// region (unconstrained or box), with the ball multiplier taken from `sol.tau`.
pub fn kkt_case2<T: Scalar>(
    v: &[T],
    center: &[T],
    psi: T,
    region: &FeasibleRegion<T>,
    sol: &ProxSolution<T>,
) -> Result<KktReport<T>> {
    let z = sol.z.as_slice();
    check_dim(v.len(), z.len())?;
    check_dim(v.len(), center.len())?;
    let p = parts(region, v.len())?;
    if p.ball.is_some() {
        return Err(Error::Unsupported("ℓ1-ball prox over an ℓ1-ball region".into()));
    }
    let lambda = sol.tau;
    if lambda < T::zero() {
        return Err(Error::InvalidParameter("negative ball multiplier".into()));
    }
    let penalty = |i: usize, kink: T| abs_subdiff(z[i], center[i], lambda, kink);
    Ok(report(z, v, p.bounds, penalty, Some((center, psi, lambda))))
}
