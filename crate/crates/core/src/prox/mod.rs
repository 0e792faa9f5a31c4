//! Exact solvers for the proximal step subproblem
//!
//! ```text
//! min_{z ∈ X}  ½‖z − v‖² + φ(z)
//! ```
//!
//! for `φ = (ρ̂/2)‖·‖₁²` (unconstrained, box, ℓ1-ball ∩ box) and for the ℓ1-ball
//! indicator (unconstrained, box). Polyhedral regions are reduced to QP data only.

mod ball;
mod bisect;
mod kkt;
mod l1sq;
mod qp;

use serde::Serialize;

use crate::geometry::{dist_l1, norm_l1, DenseVector};
use crate::scalar::Scalar;

pub use ball::{project_l1_ball, prox_case2_shifted};
pub use bisect::{bisect_monotone, Root};
pub use bisect::polish_linear;
pub use kkt::{kkt_case2, kkt_l1sq, KktReport};
pub use l1sq::{
    box_root_function, l1box_argmin_1d, l1box_inner_root_function, l1box_outer_root_function,
    prox_l1sq_box, prox_l1sq_l1box, prox_l1sq_unconstrained, L1BoxTolerances,
};
pub(crate) use l1sq::check_box;
pub use qp::{reformulate_polyhedron_qp, QpReformulation};

/// Bracket-width tolerance for the box-constrained search.
pub const DEFAULT_BOX_TOL: f64 = 1e-10;
/// Bracket-width tolerance for the nested ℓ1 + box searches.
pub const DEFAULT_NESTED_TOL: f64 = 1e-6;
/// Ball-feasibility slack accepted by the nested searches.
pub const DEFAULT_BALL_TOL: f64 = 1e-12;

pub(crate) const MAX_BISECTION_STEPS: usize = 400;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProxSolution<T> {
    pub z: DenseVector<T>,
    /// Shrinkage level `ρ̂‖z‖₁` (ℓ1-squared term) or the ball multiplier (ℓ1-ball term).
    pub tau: T,
    /// Multiplier of an explicit ℓ1-ball constraint; zero when inactive.
    pub mu: T,
    pub iterations: usize,
}

/// `½‖z − v‖² + (ρ̂/2)‖z‖₁²`.
pub fn l1sq_objective<T: Scalar>(z: &[T], v: &[T], rho_hat: T) -> T {
    let half = T::lit(0.5);
    let l1 = norm_l1(z);
    half * z.iter().zip(v).map(|(a, b)| (*a - *b) * (*a - *b)).sum::<T>() + half * rho_hat * l1 * l1
}

/// `½‖z − v‖²`.
pub fn euclidean_objective<T: Scalar>(z: &[T], v: &[T]) -> T {
    T::lit(0.5) * z.iter().zip(v).map(|(a, b)| (*a - *b) * (*a - *b)).sum::<T>()
}

/// `‖z − w‖₁ − α`, positive when the ball constraint is violated.
pub fn ball_violation<T: Scalar>(z: &[T], w: &[T], alpha: T) -> T {
    dist_l1(z, w) - alpha
}

/// Soft-thresholding `sgn(x)(|x| − t)₊`.
#[inline]
pub(crate) fn soft<T: Scalar>(x: T, t: T) -> T {
    x.sgn() * (x.abs() - t).pos()
}

/// Sorts indices by `key`, breaking ties by original index.
pub(crate) fn sorted_indices<T: Scalar>(n: usize, key: impl Fn(usize) -> T, descending: bool) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        let (ka, kb) = if descending { (key(b), key(a)) } else { (key(a), key(b)) };
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    idx
}

pub(crate) fn check_finite<T: Scalar>(v: &[T], what: &'static str) -> crate::Result<()> {
    if v.is_empty() {
        return Err(crate::Error::Empty);
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(crate::Error::NonFinite(what));
    }
    Ok(())
}

pub(crate) fn check_positive<T: Scalar>(x: T, what: &str) -> crate::Result<()> {
    if x.is_finite() && x > T::zero() {
        Ok(())
    } else {
        Err(crate::Error::InvalidParameter(format!("{what} must be finite and > 0, got {x}")))
    }
}
