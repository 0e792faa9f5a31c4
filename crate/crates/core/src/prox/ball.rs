use super::{
    bisect_monotone, check_box, check_finite, check_positive, polish_linear, soft, sorted_indices, ProxSolution,
    DEFAULT_BALL_TOL, MAX_BISECTION_STEPS,
};
use crate::error::{Error, Result};
use crate::geometry::{check_dim, norm_inf, norm_l1, DenseVector, FeasibleRegion};
use crate::scalar::Scalar;

/// Euclidean projection of `v` onto `{z : ‖z‖₁ ≤ ψ}`; `tau` carries the threshold `λ`.
pub fn project_l1_ball<T: Scalar>(v: &[T], psi: T) -> Result<ProxSolution<T>> {
    check_finite(v, "projection input")?;
    check_positive(psi, "psi")?;
    let d = v.len();
    if norm_l1(v) <= psi {
        return Ok(ProxSolution { z: DenseVector::from_vec_unchecked(v.to_vec()), tau: T::zero(), mu: T::zero(), iterations: 0 });
    }
    let order = sorted_indices(d, |i| v[i].abs(), true);
    let a: Vec<T> = order.iter().map(|&i| v[i].abs()).collect();
    let mut prefix = vec![T::zero(); d + 1];
    for j in 0..d {
        prefix[j + 1] = prefix[j] + a[j];
    }
    // s_m = S_m − m·a_{m+1}, s_d = S_d; nondecreasing with s_0 = 0 < ψ < s_d
    let s = |m: usize| if m == d { prefix[d] } else { prefix[m] - T::from_count(m) * a[m] };
    let (mut lo, mut hi) = (1usize, d);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if psi <= s(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let m_bar = lo;
    let lambda = ((prefix[m_bar] - psi) / T::from_count(m_bar)).pos();
    let z: Vec<T> = v.iter().map(|&x| soft(x, lambda)).collect();
    Ok(ProxSolution { z: DenseVector::from_vec_unchecked(z), tau: lambda, mu: T::zero(), iterations: 0 })
}

/// Minimizer of `½‖z − v‖²` over `‖z − center‖₁ ≤ ψ`, intersected with the region when
/// it is a box. `tau` carries the ball multiplier.
pub fn prox_case2_shifted<T: Scalar>(
    v: &[T],
    center: &[T],
    psi: T,
    region: &FeasibleRegion<T>,
    tol: T,
) -> Result<ProxSolution<T>> {
    check_finite(v, "prox input")?;
    check_finite(center, "ball center")?;
    check_dim(v.len(), center.len())?;
    check_positive(psi, "psi")?;
    check_positive(tol, "tolerance")?;
    let shifted: Vec<T> = v.iter().zip(center).map(|(a, c)| *a - *c).collect();
    match region {
        FeasibleRegion::Unconstrained => {
            let mut sol = project_l1_ball(&shifted, psi)?;
            let z: Vec<T> = sol.z.iter().zip(center).map(|(y, c)| *y + *c).collect();
            sol.z = DenseVector::from_vec_unchecked(z);
            Ok(sol)
        }
        FeasibleRegion::Box { lower, upper } => {
            check_box(v.len(), lower, upper, true)?;
            if let Some(i) = (0..v.len()).find(|&i| center[i] < lower[i] || center[i] > upper[i]) {
                return Err(Error::Infeasible(format!("ball center leaves the box at coordinate {i}")));
            }
            let lo: Vec<T> = lower.iter().zip(center).map(|(l, c)| *l - *c).collect();
            let hi: Vec<T> = upper.iter().zip(center).map(|(u, c)| *u - *c).collect();
            let y = |mu: T| -> Vec<T> {
                (0..shifted.len()).map(|i| soft(shifted[i], mu).clip(lo[i], hi[i])).collect()
            };
            let finish = |mu: T, iterations: usize| {
                let z: Vec<T> = y(mu)
                    .iter()
                    .enumerate()
                    .map(|(i, yi)| (*yi + center[i]).clip(lower[i], upper[i]))
                    .collect();
                ProxSolution { z: DenseVector::from_vec_unchecked(z), tau: mu, mu: T::zero(), iterations }
            };
            if norm_l1(&y(T::zero())) <= psi {
                return Ok(finish(T::zero(), 0));
            }
            // slack(μ) = ψ − ‖y(μ)‖₁ is nondecreasing: 0 lies in every shifted interval
            let slack = |mu: T| psi - norm_l1(&y(mu));
            let root = bisect_monotone(slack, T::zero(), norm_inf(&shifted), tol, MAX_BISECTION_STEPS)?;
            let free = (0..shifted.len())
                .filter(|&i| {
                    let t = soft(shifted[i], root.hi);
                    t != T::zero() && t > lo[i] && t < hi[i]
                })
                .count();
            let s_hi = slack(root.hi);
            let (cand, s_cand) =
                polish_linear(slack, root.hi, s_hi, T::from_count(free), root.lo, root.hi);
            let accept = T::lit(DEFAULT_BALL_TOL) * psi.max(T::one());
            let mu = if s_cand >= -accept { cand } else { root.hi };
            Ok(finish(mu, root.iterations))
        }
        other => Err(Error::Unsupported(format!("ℓ1-ball prox over a {} region", other.name()))),
    }
}
