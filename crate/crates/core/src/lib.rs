//! Dimension-insensitive stochastic first-order methods for nonconvex problems over
//! simple constraint sets, with exact solvers for the ℓ1-geometry proximal steps.
//!
//! The solvers are generic over [`Scalar`] (`f32` or `f64`); the aliases below fix
//! `f64`, which the problem generator and the benchmark harness use throughout.

pub mod admm;
pub mod error;
pub mod geometry;
pub mod optimizers;
pub mod problems;
pub mod prox;
pub mod sampling;
pub mod scalar;

pub use error::{Error, Result};
pub use geometry::{
    dist_l1, dot, euclidean_project, is_feasible, norm_inf, norm_l1, norm_l2, residual_inf, DenseMatrix,
    DenseVector, FeasibleRegion, ProxTerm, ResidualReport, DEFAULT_ACTIVE_TOL,
};
pub use prox::ProxSolution;
pub use scalar::Scalar;

pub type Vector = DenseVector<f64>;
pub type Matrix = DenseMatrix<f64>;
pub type Region = FeasibleRegion<f64>;
pub type Penalty = ProxTerm<f64>;
pub type Solution = ProxSolution<f64>;

pub type Vector32 = DenseVector<f32>;
pub type Region32 = FeasibleRegion<f32>;
pub type Penalty32 = ProxTerm<f32>;
pub type Solution32 = ProxSolution<f32>;

pub use admm::{admm_solve_box, admm_solve_l1box, AdmmConfig, AdmmResult, AdmmStop};
pub use problems::{generate_instance, sigma_sq_trunc_normal, SyntheticQpInstance, SyntheticQpSpec};
