use serde::Serialize;

use crate::error::Result;
use crate::geometry::{check_dim, DenseMatrix, DenseVector};
use crate::scalar::Scalar;

use super::{check_finite, check_positive};

/// Data of `min ½ zᵀQz + pᵀz  s.t.  Ãz ≥ b, z ≥ 0` over the split `z = (x⁺; x⁻)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QpReformulation<T> {
    pub q: DenseMatrix<T>,
    pub p: DenseVector<T>,
    pub a_tilde: DenseMatrix<T>,
    pub b: DenseVector<T>,
}

impl<T: Scalar> QpReformulation<T> {
    pub fn dim(&self) -> usize {
        self.p.dim() / 2
    }

    /// `(x⁺; x⁻)` for a point `x` of the original problem.
    pub fn lift(&self, x: &[T]) -> Result<Vec<T>> {
        check_dim(self.dim(), x.len())?;
        Ok(x.iter().map(|v| v.pos()).chain(x.iter().map(|v| (-*v).pos())).collect())
    }

    /// `x⁺ − x⁻`.
    pub fn project_down(&self, z: &[T]) -> Result<Vec<T>> {
        check_dim(2 * self.dim(), z.len())?;
        let d = self.dim();
        Ok((0..d).map(|i| z[i] - z[d + i]).collect())
    }

    /// `½ zᵀQz + pᵀz`.
    pub fn objective(&self, z: &[T]) -> Result<T> {
        let qz = self.q.matvec(z)?;
        let half = T::lit(0.5);
        Ok(z.iter().zip(&qz).zip(self.p.iter()).map(|((zi, qi), pi)| half * *zi * *qi + *pi * *zi).sum())
    }
}

/// Reduces `min ½‖x − v‖² + (ρ̂/2)‖x‖₁²  s.t.  Ax ≥ b` to QP data without solving it.
pub fn reformulate_polyhedron_qp<T: Scalar>(
    v: &[T],
    rho_hat: T,
    a: &DenseMatrix<T>,
    b: &[T],
) -> Result<QpReformulation<T>> {
    check_finite(v, "prox input")?;
    check_positive(rho_hat, "rho_hat")?;
    let d = v.len();
    check_dim(d, a.cols())?;
    check_dim(a.rows(), b.len())?;
    let q = DenseMatrix::from_fn(2 * d, 2 * d, |i, j| {
        let block = if i % d == j % d {
            if (i < d) == (j < d) {
                T::one()
            } else {
                -T::one()
            }
        } else {
            T::zero()
        };
        block + rho_hat
    });
    let p: Vec<T> = v.iter().map(|x| -*x).chain(v.iter().copied()).collect();
    let a_tilde = DenseMatrix::from_fn(a.rows(), 2 * d, |i, j| if j < d { a.get(i, j) } else { -a.get(i, j - d) });
    Ok(QpReformulation {
        q,
        p: DenseVector::from_vec_unchecked(p),
        a_tilde,
        b: DenseVector::from_vec_unchecked(b.to_vec()),
    })
}
