use std::cell::RefCell;

use super::{
    bisect_monotone, check_finite, check_positive, polish_linear, soft, sorted_indices, ProxSolution,
    DEFAULT_BALL_TOL, DEFAULT_NESTED_TOL, MAX_BISECTION_STEPS,
};
use crate::error::{Error, Result};
use crate::geometry::{check_dim, dist_l1, norm_inf, norm_l1, DenseVector};
use crate::scalar::Scalar;

/// Closed-form minimizer of `½‖z − v‖² + (ρ̂/2)‖z‖₁²` via the sorted threshold search.
pub fn prox_l1sq_unconstrained<T: Scalar>(v: &[T], rho_hat: T) -> Result<ProxSolution<T>> {
    check_finite(v, "prox input")?;
    check_positive(rho_hat, "rho_hat")?;
    let d = v.len();
    if v.iter().all(|x| *x == T::zero()) {
        return Ok(ProxSolution {
            z: DenseVector::from_vec_unchecked(vec![T::zero(); d]),
            tau: T::zero(),
            mu: T::zero(),
            iterations: 0,
        });
    }

    // a[j] = |v_{i_{j+1}}| in ascending order
    let order = sorted_indices(d, |i| v[i].abs(), false);
    let a: Vec<T> = order.iter().map(|&i| v[i].abs()).collect();
    let mut prefix = vec![T::zero(); d + 1];
    for j in 0..d {
        prefix[j + 1] = prefix[j] + a[j];
    }
    let mut suffix = vec![T::zero(); d + 1];
    for j in (0..d).rev() {
        suffix[j] = suffix[j + 1] + a[j];
    }
    let norm = suffix[0];
    let one = T::one();
    // s_0 = 0; s_k = Σ_{t<k} a_t + ((d − k + 1)ρ̂ + 1)/ρ̂ · a_k for k ≥ 1
    let s = |k: usize| -> T {
        if k == 0 {
            T::zero()
        } else {
            let c = (T::from_count(d - k + 1) * rho_hat + one) / rho_hat;
            prefix[k - 1] + c * a[k - 1]
        }
    };
    // number of k in 0..=d with s_k ≤ ‖v‖₁ (s is nondecreasing)
    let (mut lo, mut hi) = (0usize, d + 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if s(mid) <= norm {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    let k_bar = lo.saturating_sub(1).min(d - 1);
    let tail = suffix[k_bar];
    let shrink = rho_hat * tail / (rho_hat * T::from_count(d - k_bar) + one);

    let mut z = vec![T::zero(); d];
    for &i in &order[k_bar..] {
        z[i] = soft(v[i], shrink);
    }
    let tau = rho_hat * norm_l1(&z);
    Ok(ProxSolution { z: DenseVector::from_vec_unchecked(z), tau, mu: T::zero(), iterations: 0 })
}

/// `R(τ) = τ − ρ̂ Σ |clip_[l,u](sgn(v_i)(|v_i| − τ)₊)|`, nondecreasing in `τ`.
pub fn box_root_function<T: Scalar>(v: &[T], rho_hat: T, lower: &[T], upper: &[T], tau: T) -> T {
    let s: T = (0..v.len()).map(|i| soft(v[i], tau).clip(lower[i], upper[i]).abs()).sum();
    tau - rho_hat * s
}

/// Minimizer of `½‖z − v‖² + (ρ̂/2)‖z‖₁²` subject to `lower ≤ z ≤ upper`.
///
/// Bisection on the shrinkage level with bracket width `tol`, followed by one exact
/// step on the final linear piece of the root function.
pub fn prox_l1sq_box<T: Scalar>(
    v: &[T],
    rho_hat: T,
    lower: &[T],
    upper: &[T],
    tol: T,
) -> Result<ProxSolution<T>> {
    check_finite(v, "prox input")?;
    check_positive(rho_hat, "rho_hat")?;
    check_positive(tol, "tolerance")?;
    check_box(v.len(), lower, upper, true)?;

    // |clip(soft(v_i, τ))| ≤ max(|v_i|, dist(0, [l_i, u_i])) for every τ ≥ 0, so R(hi) ≥ 0
    let hi: T = rho_hat
        * (0..v.len()).map(|i| v[i].abs().max(lower[i].max(-upper[i]).max(T::zero()))).sum::<T>();
    let r = |tau: T| box_root_function(v, rho_hat, lower, upper, tau);
    let root = bisect_monotone(r, T::zero(), hi, tol, MAX_BISECTION_STEPS)?;
    let free = (0..v.len())
        .filter(|&i| {
            let t = soft(v[i], root.point);
            t != T::zero() && t > lower[i] && t < upper[i]
        })
        .count();
    let slope = T::one() + rho_hat * T::from_count(free);
    let (tau, _) = polish_linear(r, root.point, root.residual, slope, root.lo, root.hi);
    let z: Vec<T> = (0..v.len()).map(|i| soft(v[i], tau).clip(lower[i], upper[i])).collect();
    Ok(ProxSolution { z: DenseVector::from_vec_unchecked(z), tau, mu: T::zero(), iterations: root.iterations })
}

/// Tolerances of the nested search used by [`prox_l1sq_l1box`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct L1BoxTolerances<T> {
    /// Bracket width for the inner shrinkage search.
    pub tau: T,
    /// Bracket width for the outer ball-multiplier search.
    pub mu: T,
    /// Accepted ball-constraint violation of the returned point.
    pub ball: T,
}

impl<T: Scalar> Default for L1BoxTolerances<T> {
    fn default() -> Self {
        Self { tau: T::lit(DEFAULT_NESTED_TOL), mu: T::lit(DEFAULT_NESTED_TOL), ball: T::lit(DEFAULT_BALL_TOL) }
    }
}

impl<T: Scalar> L1BoxTolerances<T> {
    pub fn uniform(width: T, ball: T) -> Self {
        Self { tau: width, mu: width, ball }
    }
}

/// Minimizer over `[l, u]` of the convex 1-D function `½(z − v)² + τ|z| + μ|z − w|`.
///
/// Returns the point and whether it lies strictly inside a linear piece of the
/// penalty and strictly inside the interval (so that it moves with slope ∓1 in `τ`).
pub fn l1box_argmin_1d<T: Scalar>(v: T, tau: T, mu: T, w: T, lower: T, upper: T) -> (T, bool) {
    let zero = T::zero();
    let (k1, k2) = if w < zero { (w, zero) } else { (zero, w) };
    let (z, free) = 'min: {
        let left = v + tau + mu;
        if left < k1 {
            break 'min (left, true);
        }
        if k1 < k2 {
            // between the kinks one of |z|, |z − w| increases and the other decreases
            let slope_mid = if w > zero { tau - mu } else { mu - tau };
            let mid = v - slope_mid;
            if mid <= k1 {
                break 'min (k1, false);
            }
            if mid < k2 {
                break 'min (mid, true);
            }
        }
        let right = v - tau - mu;
        if right > k2 {
            (right, true)
        } else {
            (k2, false)
        }
    };
    if z <= lower {
        (lower, false)
    } else if z >= upper {
        (upper, false)
    } else {
        (z, free)
    }
}

/// `R₂(τ; μ) = τ − ρ̂ Σ |x̄_i(τ, μ)|`; with `μ = 0` this is the phase-one function `R₁`.
pub fn l1box_inner_root_function<T: Scalar>(
    v: &[T],
    rho_hat: T,
    w: &[T],
    lower: &[T],
    upper: &[T],
    mu: T,
    tau: T,
) -> T {
    let s: T = (0..v.len()).map(|i| l1box_argmin_1d(v[i], tau, mu, w[i], lower[i], upper[i]).0.abs()).sum();
    tau - rho_hat * s
}

struct Inner<T> {
    tau: T,
    x: Vec<T>,
    iterations: usize,
}

fn solve_inner<T: Scalar>(
    v: &[T],
    rho_hat: T,
    w: &[T],
    lower: &[T],
    upper: &[T],
    mu: T,
    tol: T,
) -> Result<Inner<T>> {
    let hi: T = rho_hat * (0..v.len()).map(|i| lower[i].abs().max(upper[i].abs())).sum::<T>();
    let r = |tau: T| l1box_inner_root_function(v, rho_hat, w, lower, upper, mu, tau);
    let root = bisect_monotone(r, T::zero(), hi, tol, MAX_BISECTION_STEPS)?;
    let free =
        (0..v.len()).filter(|&i| l1box_argmin_1d(v[i], root.point, mu, w[i], lower[i], upper[i]).1).count();
    let slope = T::one() + rho_hat * T::from_count(free);
    let (tau, _) = polish_linear(r, root.point, root.residual, slope, root.lo, root.hi);
    let x = (0..v.len()).map(|i| l1box_argmin_1d(v[i], tau, mu, w[i], lower[i], upper[i]).0).collect();
    Ok(Inner { tau, x, iterations: root.iterations })
}

/// `R₃(μ) = ‖x̄(μ, τ*(μ)) − w‖₁ − α`, nonincreasing in `μ`.
#[allow(clippy::too_many_arguments)]
pub fn l1box_outer_root_function<T: Scalar>(
    v: &[T],
    rho_hat: T,
    w: &[T],
    alpha: T,
    lower: &[T],
    upper: &[T],
    mu: T,
    tau_tol: T,
) -> Result<T> {
    let inner = solve_inner(v, rho_hat, w, lower, upper, mu, tau_tol)?;
    Ok(dist_l1(&inner.x, w) - alpha)
}

/// Minimizer of `½‖x − v‖² + (ρ̂/2)‖x‖₁²` subject to `‖x − w‖₁ ≤ α` and `lower ≤ x ≤ upper`.
///
/// Phase one solves the box problem ignoring the ball. If that point leaves the ball,
/// the ball multiplier `μ` is found by an outer bisection whose every evaluation
/// solves the inner shrinkage equation for that `μ`.
pub fn prox_l1sq_l1box<T: Scalar>(
    v: &[T],
    rho_hat: T,
    w: &[T],
    alpha: T,
    lower: &[T],
    upper: &[T],
    tol: &L1BoxTolerances<T>,
) -> Result<ProxSolution<T>> {
    check_finite(v, "prox input")?;
    check_finite(w, "ball center")?;
    check_dim(v.len(), w.len())?;
    check_positive(rho_hat, "rho_hat")?;
    check_positive(alpha, "alpha")?;
    check_positive(tol.tau, "tau tolerance")?;
    check_positive(tol.mu, "mu tolerance")?;
    if !(tol.ball >= T::zero()) {
        return Err(Error::InvalidParameter("ball tolerance must be >= 0".into()));
    }
    check_box(v.len(), lower, upper, false)?;

    let x_hat: Vec<T> = (0..w.len()).map(|i| w[i].clip(lower[i], upper[i])).collect();
    let gap = dist_l1(&x_hat, w);
    if gap > alpha + tol.ball {
        return Err(Error::Infeasible(format!("ℓ1 ball of radius {alpha} misses the box (gap {gap})")));
    }

    let phase1 = solve_inner(v, rho_hat, w, lower, upper, T::zero(), tol.tau)?;
    if dist_l1(&phase1.x, w) - alpha <= tol.ball {
        return Ok(ProxSolution {
            z: DenseVector::from_vec_unchecked(phase1.x),
            tau: phase1.tau,
            mu: T::zero(),
            iterations: phase1.iterations,
        });
    }

    let d_hat: Vec<T> = x_hat.iter().zip(v).map(|(a, b)| *a - *b).collect();
    let mu_hat = T::lit(2.0) * (norm_inf(&d_hat) + rho_hat * norm_l1(&x_hat));

    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let inner_steps = RefCell::new(phase1.iterations);
    let solve_at = |mu: T| -> Option<Inner<T>> {
        match solve_inner(v, rho_hat, w, lower, upper, mu, tol.tau) {
            Ok(inner) => {
                *inner_steps.borrow_mut() += inner.iterations;
                Some(inner)
            }
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                None
            }
        }
    };
    // slack(μ) = α − ‖x̄(μ) − w‖₁ is nondecreasing
    let slack = |mu: T| solve_at(mu).map_or(T::nan(), |inner| alpha - dist_l1(&inner.x, w));
    let root = bisect_monotone(slack, T::zero(), mu_hat, tol.mu, MAX_BISECTION_STEPS);
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    let root = root?;

    // Candidate multipliers: the bracket's feasible end, its midpoint and the secant
    // root (exact when the bracket sits on one linear piece of R₃).
    let mut candidates = vec![root.hi, root.point];
    if root.hi > root.lo {
        let s_lo = slack(root.lo);
        let s_hi = slack(root.hi);
        if s_hi > s_lo {
            let mu_s = root.lo - s_lo * (root.hi - root.lo) / (s_hi - s_lo);
            if mu_s >= root.lo && mu_s <= root.hi {
                candidates.push(mu_s);
            }
        }
    }
    let mut best: Option<(T, Inner<T>, T)> = None;
    for mu in candidates {
        let Some(inner) = solve_at(mu) else { continue };
        let viol = dist_l1(&inner.x, w) - alpha;
        if viol > tol.ball {
            continue;
        }
        let better = match &best {
            None => true,
            Some((_, _, b)) => viol.abs() < b.abs(),
        };
        if better {
            best = Some((mu, inner, viol));
        }
    }
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    let (mu, inner, _) = best.ok_or(Error::BracketViolation {
        lo: root.lo.as_f64(),
        hi: root.hi.as_f64(),
        f_lo: f64::NAN,
        f_hi: f64::NAN,
    })?;
    let iterations = root.iterations + *inner_steps.borrow();
    Ok(ProxSolution { z: DenseVector::from_vec_unchecked(inner.x), tau: inner.tau, mu, iterations })
}

pub(crate) fn check_box<T: Scalar>(d: usize, lower: &[T], upper: &[T], strict: bool) -> Result<()> {
    check_dim(d, lower.len())?;
    check_dim(d, upper.len())?;
    check_finite(lower, "lower bounds")?;
    check_finite(upper, "upper bounds")?;
    let bad = (0..d).find(|&i| if strict { lower[i] >= upper[i] } else { lower[i] > upper[i] });
    if let Some(i) = bad {
        return Err(Error::InvalidParameter(format!(
            "invalid bounds at coordinate {i}: [{}, {}]",
            lower[i], upper[i]
        )));
    }
    Ok(())
}
