use crate::error::{Error, Result};
use crate::geometry::{euclidean_project, DenseVector, FeasibleRegion, ProxTerm};
use crate::prox::{
    project_l1_ball, prox_case2_shifted, prox_l1sq_box, prox_l1sq_l1box, prox_l1sq_unconstrained, L1BoxTolerances,
};
use crate::scalar::Scalar;

/// Result of one proximal projection step from `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome<T> {
    pub next: DenseVector<T>,
    /// A subgradient `ξ ∈ ∂φ(Δx)` certifying the step: `Δx + ηG + ξ ∈ −N_X(x⁺)`.
    pub xi: Vec<T>,
    /// Set when `∂φ(Δx)` is not a singleton on some coordinate and `ξ` was chosen from it.
    pub xi_reconstructed: bool,
    /// Bisection steps spent inside the subproblem solver.
    pub iterations: usize,
}

/// Tolerances of the subproblem solvers used by a step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepTolerances<T> {
    /// Bracket width of the box and ball-box searches.
    pub bracket: T,
    pub nested: L1BoxTolerances<T>,
}

impl<T: Scalar> Default for StepTolerances<T> {
    fn default() -> Self {
        Self { bracket: T::lit(crate::prox::DEFAULT_BOX_TOL), nested: L1BoxTolerances::default() }
    }
}

/// Whether a `(φ, X)` pair has a subproblem solver.
pub fn check_supported<T: Scalar>(prox: &ProxTerm<T>, region: &FeasibleRegion<T>) -> Result<()> {
    let ok = matches!(
        (prox, region),
        (ProxTerm::L1Squared { .. }, FeasibleRegion::Unconstrained | FeasibleRegion::Box { .. } | FeasibleRegion::L1BallBox { .. })
            | (ProxTerm::L1BallIndicator { .. } | ProxTerm::Euclidean, FeasibleRegion::Unconstrained | FeasibleRegion::Box { .. })
    );
    if ok {
        Ok(())
    } else {
        let term = match prox {
            ProxTerm::L1Squared { .. } => "ℓ1-squared",
            ProxTerm::L1BallIndicator { .. } => "ℓ1-ball",
            ProxTerm::Euclidean => "euclidean",
        };
        Err(Error::Unsupported(format!("no step solver for the {term} term over a {} region", region.name())))
    }
}

/// `x⁺ = argmin_{z ∈ X} ½‖z − (x − ηG)‖² + φ(z − x)`.
///
/// The proximal term is centered at `x`, so the origin-centered solvers receive the
/// shifted input `−ηG` and the shifted region, and the result is shifted back.
pub fn proximal_step<T: Scalar>(
    x: &[T],
    g: &[T],
    eta: T,
    prox: &ProxTerm<T>,
    region: &FeasibleRegion<T>,
    tol: &StepTolerances<T>,
) -> Result<StepOutcome<T>> {
    check_supported(prox, region)?;
    let d = x.len();
    if g.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: g.len() });
    }
    let shifted_v: Vec<T> = g.iter().map(|gi| -eta * *gi).collect();
    let shift = |b: &[T]| -> Vec<T> { b.iter().zip(x).map(|(bi, xi)| *bi - *xi).collect() };

    let (next, multiplier, iterations): (Vec<T>, T, usize) = match (prox, region) {
        (ProxTerm::Euclidean, _) => {
            let v: Vec<T> = x.iter().zip(&shifted_v).map(|(a, b)| *a + *b).collect();
            (euclidean_project(&v, region)?.into_vec(), T::zero(), 0)
        }
        (ProxTerm::L1Squared { rho_hat }, FeasibleRegion::Unconstrained) => {
            let s = prox_l1sq_unconstrained(&shifted_v, *rho_hat)?;
            (unshift(x, &s.z, None), s.tau, 0)
        }
        (ProxTerm::L1Squared { rho_hat }, FeasibleRegion::Box { lower, upper }) => {
            let s = prox_l1sq_box(&shifted_v, *rho_hat, &shift(lower), &shift(upper), tol.bracket)?;
            (unshift(x, &s.z, Some((lower, upper))), s.tau, s.iterations)
        }
        (ProxTerm::L1Squared { rho_hat }, FeasibleRegion::L1BallBox { center, radius, lower, upper }) => {
            let s = prox_l1sq_l1box(
                &shifted_v,
                *rho_hat,
                &shift(center),
                *radius,
                &shift(lower),
                &shift(upper),
                &tol.nested,
            )?;
            (unshift(x, &s.z, Some((lower, upper))), s.tau, s.iterations)
        }
        (ProxTerm::L1BallIndicator { psi }, FeasibleRegion::Unconstrained) => {
            let s = project_l1_ball(&shifted_v, *psi)?;
            (unshift(x, &s.z, None), s.tau, 0)
        }
        (ProxTerm::L1BallIndicator { psi }, FeasibleRegion::Box { .. }) => {
            let v: Vec<T> = x.iter().zip(&shifted_v).map(|(a, b)| *a + *b).collect();
            let s = prox_case2_shifted(&v, x, *psi, region, tol.bracket)?;
            (s.z.into_vec(), s.tau, s.iterations)
        }
        _ => unreachable!("filtered by check_supported"),
    };

    // ξ_i = multiplier·sgn(Δx_i) off the kink; on it, the element of [−multiplier, multiplier]
    // nearest to −ηG_i
    let mut xi = vec![T::zero(); d];
    let mut reconstructed = false;
    if !matches!(prox, ProxTerm::Euclidean) {
        let tau = match prox {
            ProxTerm::L1Squared { rho_hat } => {
                *rho_hat * next.iter().zip(x).map(|(a, b)| (*a - *b).abs()).sum::<T>()
            }
            _ => multiplier,
        };
        for i in 0..d {
            let step = next[i] - x[i];
            if step != T::zero() {
                xi[i] = tau * step.sgn();
            } else {
                if tau > T::zero() {
                    reconstructed = true;
                }
                xi[i] = shifted_v[i].clip(-tau, tau);
            }
        }
    }
    let next = DenseVector::from_computed(next, "iterate")?;
    Ok(StepOutcome { next, xi, xi_reconstructed: reconstructed, iterations })
}

fn unshift<T: Scalar>(x: &[T], z: &[T], bounds: Option<(&DenseVector<T>, &DenseVector<T>)>) -> Vec<T> {
    match bounds {
        Some((lower, upper)) => (0..x.len()).map(|i| (x[i] + z[i]).clip(lower[i], upper[i])).collect(),
        None => x.iter().zip(z).map(|(a, b)| *a + *b).collect(),
    }
}
