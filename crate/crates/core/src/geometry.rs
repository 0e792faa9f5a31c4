//! Vectors, feasible regions and the ℓ∞ stationarity residual.

use std::ops::{Deref, Index};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default absolute tolerance for deciding that a bound constraint is active.
pub const DEFAULT_ACTIVE_TOL: f64 = 1e-10;

/// A dense, non-empty vector with finite entries.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(try_from = "Vec<T>")]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct DenseVector<T>(Vec<T>);

impl<T: Serialize> Serialize for DenseVector<T> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<T: Scalar> DenseVector<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("vector"));
        }
        Ok(Self(values))
    }

    pub fn from_slice(values: &[T]) -> Result<Self> {
        Self::new(values.to_vec())
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::filled(dim, T::zero())
    }

    pub fn filled(dim: usize, value: T) -> Result<Self> {
        Self::new(vec![value; dim])
    }

    /// Wraps values produced by internal arithmetic on already validated data.
    pub(crate) fn from_vec_unchecked(values: Vec<T>) -> Self {
        debug_assert!(!values.is_empty());
        debug_assert!(values.iter().all(|v| v.is_finite()), "non-finite entry");
        Self(values)
    }

    /// Validates a vector computed from finite inputs; non-finite results are reported.
    pub(crate) fn from_computed(values: Vec<T>, what: &'static str) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(what));
        }
        Ok(Self(values))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }

    pub fn norm_l1(&self) -> T {
        norm_l1(&self.0)
    }

    pub fn norm_l2(&self) -> T {
        norm_l2(&self.0)
    }

    pub fn norm_inf(&self) -> T {
        norm_inf(&self.0)
    }

    pub fn dot(&self, other: &Self) -> Result<T> {
        check_dim(self.dim(), other.dim())?;
        Ok(dot(&self.0, &other.0))
    }

    /// `self − other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self::from_vec_unchecked(
            self.0.iter().zip(&other.0).map(|(a, b)| *a - *b).collect(),
        ))
    }

    /// `self + scale · other`.
    pub fn add_scaled(&self, scale: T, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Self::from_computed(
            self.0.iter().zip(&other.0).map(|(a, b)| *a + scale * *b).collect(),
            "scaled sum",
        )
    }

    pub fn scale(&self, c: T) -> Result<Self> {
        Self::from_computed(self.0.iter().map(|a| *a * c).collect(), "scaled vector")
    }
}

impl<T> Deref for DenseVector<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T> Index<usize> for DenseVector<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T: Scalar> TryFrom<Vec<T>> for DenseVector<T> {
    type Error = Error;
    fn try_from(v: Vec<T>) -> Result<Self> {
        Self::new(v)
    }
}

impl<T> From<DenseVector<T>> for Vec<T> {
    fn from(v: DenseVector<T>) -> Vec<T> {
        v.0
    }
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn matvec(&self, x: &[T]) -> Result<Vec<T>> {
        check_dim(self.cols, x.len())?;
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        self.rows == self.cols
            && (0..self.rows)
                .all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }
}

/// The constraint set `X` of the outer problem.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeasibleRegion<T> {
    Unconstrained,
    Box { lower: DenseVector<T>, upper: DenseVector<T> },
    L1BallBox { center: DenseVector<T>, radius: T, lower: DenseVector<T>, upper: DenseVector<T> },
    Polyhedron { a: DenseMatrix<T>, b: DenseVector<T> },
}

impl<T: Scalar> FeasibleRegion<T> {
    /// Box `lower ≤ x ≤ upper` with `lower_i < upper_i`.
    pub fn boxed(lower: DenseVector<T>, upper: DenseVector<T>) -> Result<Self> {
        let region = Self::Box { lower, upper };
        region.validate()?;
        Ok(region)
    }

    /// The cube `[−r, r]^d`.
    pub fn cube(dim: usize, half_width: T) -> Result<Self> {
        Self::boxed(DenseVector::filled(dim, -half_width)?, DenseVector::filled(dim, half_width)?)
    }

    pub fn l1_ball_box(
        center: DenseVector<T>,
        radius: T,
        lower: DenseVector<T>,
        upper: DenseVector<T>,
    ) -> Result<Self> {
        let region = Self::L1BallBox { center, radius, lower, upper };
        region.validate()?;
        Ok(region)
    }

    pub fn polyhedron(a: DenseMatrix<T>, b: DenseVector<T>) -> Result<Self> {
        let region = Self::Polyhedron { a, b };
        region.validate()?;
        Ok(region)
    }

    /// Dimension fixed by the region data; `None` for `Unconstrained`.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::Unconstrained => None,
            Self::Box { lower, .. } | Self::L1BallBox { lower, .. } => Some(lower.dim()),
            Self::Polyhedron { a, .. } => Some(a.cols()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Unconstrained => "unconstrained",
            Self::Box { .. } => "box",
            Self::L1BallBox { .. } => "l1_ball_box",
            Self::Polyhedron { .. } => "polyhedron",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Unconstrained => Ok(()),
            Self::Box { lower, upper } => {
                check_dim(lower.dim(), upper.dim())?;
                if let Some(i) = (0..lower.dim()).find(|&i| lower[i] >= upper[i]) {
                    return Err(Error::InvalidParameter(format!(
                        "box bounds require lower < upper (coordinate {i}: {} vs {})",
                        lower[i], upper[i]
                    )));
                }
                Ok(())
            }
            Self::L1BallBox { center, radius, lower, upper } => {
                check_dim(lower.dim(), upper.dim())?;
                check_dim(lower.dim(), center.dim())?;
                if !(radius.is_finite() && *radius > T::zero()) {
                    return Err(Error::InvalidParameter(format!("ball radius must be > 0, got {radius}")));
                }
                if let Some(i) = (0..lower.dim()).find(|&i| lower[i] > upper[i]) {
                    return Err(Error::InvalidParameter(format!(
                        "box bounds require lower <= upper (coordinate {i})"
                    )));
                }
                // the box point nearest to the center in ℓ1 is its coordinatewise clip
                let gap: T = (0..lower.dim())
                    .map(|i| (center[i].clip(lower[i], upper[i]) - center[i]).abs())
                    .sum();
                if gap > *radius {
                    return Err(Error::Infeasible(format!(
                        "ℓ1 ball of radius {radius} does not meet the box (ℓ1 gap {gap})"
                    )));
                }
                Ok(())
            }
            Self::Polyhedron { a, b } => check_dim(a.rows(), b.dim()),
        }
    }
}

/// The non-smooth proximal term `φ` of the step subproblem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProxTerm<T> {
    /// `φ(y) = (ρ̂/2)‖y‖₁²`.
    L1Squared { rho_hat: T },
    /// `φ(y) = δ{‖y‖₁ ≤ ψ}`.
    L1BallIndicator { psi: T },
    /// `φ ≡ 0`: plain Euclidean projection step.
    Euclidean,
}

impl<T: Scalar> ProxTerm<T> {
    pub fn l1_squared(rho_hat: T) -> Result<Self> {
        let p = Self::L1Squared { rho_hat };
        p.validate()?;
        Ok(p)
    }

    pub fn l1_ball(psi: T) -> Result<Self> {
        let p = Self::L1BallIndicator { psi };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::L1Squared { rho_hat } if !(rho_hat.is_finite() && rho_hat > T::zero()) => {
                Err(Error::InvalidParameter(format!("rho_hat must be > 0, got {rho_hat}")))
            }
            Self::L1BallIndicator { psi } if !(psi.is_finite() && psi > T::zero()) => {
                Err(Error::InvalidParameter(format!("psi must be > 0, got {psi}")))
            }
            _ => Ok(()),
        }
    }
}

/// Breakdown of `dist_∞(0, ∇f(x) + N_X(x))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport<T> {
    pub residual_inf: T,
    pub per_coordinate: DenseVector<T>,
    /// Coordinates sitting on a bound (within the active tolerance).
    pub active_set: Vec<usize>,
}

pub fn is_feasible<T: Scalar>(x: &[T], region: &FeasibleRegion<T>, tol: T) -> Result<bool> {
    if let Some(d) = region.dim() {
        check_dim(d, x.len())?;
    }
    let in_box = |lower: &[T], upper: &[T]| {
        x.iter().zip(lower.iter().zip(upper)).all(|(&xi, (&l, &u))| xi >= l - tol && xi <= u + tol)
    };
    Ok(match region {
        FeasibleRegion::Unconstrained => true,
        FeasibleRegion::Box { lower, upper } => in_box(lower, upper),
        FeasibleRegion::L1BallBox { center, radius, lower, upper } => {
            in_box(lower, upper) && dist_l1(x, center) <= *radius + tol
        }
        FeasibleRegion::Polyhedron { a, b } => {
            (0..a.rows()).all(|i| dot(a.row(i), x) >= b[i] - tol)
        }
    })
}

/// ℓ∞ distance from the origin to `∇f(x) + N_X(x)` for unconstrained and box regions.
pub fn residual_inf<T: Scalar>(
    x: &[T],
    grad: &[T],
    region: &FeasibleRegion<T>,
    active_tol: T,
) -> Result<ResidualReport<T>> {
    check_dim(x.len(), grad.len())?;
    if x.is_empty() {
        return Err(Error::Empty);
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("gradient"));
    }
    let mut active_set = Vec::new();
    let per: Vec<T> = match region {
        FeasibleRegion::Unconstrained => grad.iter().map(|g| g.abs()).collect(),
        FeasibleRegion::Box { lower, upper } => {
            if !is_feasible(x, region, active_tol)? {
                return Err(Error::Infeasible("residual requested at a point outside the box".into()));
            }
            (0..x.len())
                .map(|i| {
                    if (x[i] - lower[i]).abs() <= active_tol {
                        active_set.push(i);
                        (-grad[i]).pos()
                    } else if (upper[i] - x[i]).abs() <= active_tol {
                        active_set.push(i);
                        grad[i].pos()
                    } else {
                        grad[i].abs()
                    }
                })
                .collect()
        }
        other => {
            return Err(Error::Unsupported(format!("residual_inf on a {} region", other.name())));
        }
    };
    let residual_inf = norm_inf(&per);
    Ok(ResidualReport { residual_inf, per_coordinate: DenseVector::from_vec_unchecked(per), active_set })
}

/// Euclidean projection onto an unconstrained or box region.
pub fn euclidean_project<T: Scalar>(v: &[T], region: &FeasibleRegion<T>) -> Result<DenseVector<T>> {
    match region {
        FeasibleRegion::Unconstrained => DenseVector::from_slice(v),
        FeasibleRegion::Box { lower, upper } => {
            check_dim(lower.dim(), v.len())?;
            DenseVector::new(clip_slice(v, lower, upper))
        }
        other => Err(Error::Unsupported(format!("Euclidean projection onto a {} region", other.name()))),
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

pub(crate) fn clip_slice<T: Scalar>(v: &[T], lower: &[T], upper: &[T]) -> Vec<T> {
    v.iter().zip(lower.iter().zip(upper)).map(|(&x, (&l, &u))| x.clip(l, u)).collect()
}

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + *x * *y)
}

#[inline]
pub fn norm_l1<T: Scalar>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |acc, x| acc + x.abs())
}

#[inline]
pub fn norm_l2<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

#[inline]
pub fn norm_inf<T: Scalar>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

#[inline]
pub fn dist_l1<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + (*x - *y).abs())
}
