//! Effective coefficients of periodic multiscale elliptic operators.
//!
//! Four cell-problem methods are provided, all discretized with Q1 finite
//! elements on a structured grid of the cell `K_R = [-R/2, R/2]^d`:
//!
//! * periodic reference: corrector problem on the unit cell with periodic
//!   boundary conditions,
//! * elliptic: truncated Dirichlet cell problem on `K_R`,
//! * parabolic: heat-type cell problem up to time `T` with filtered
//!   space-time averaging over `K_L`,
//! * modified elliptic: Dirichlet cell problem with a spectral
//!   `e^{-A_N T}` correction of the load, filtered averaging over `K_L`.
//!
//! The [`harness`] module runs single computations and convergence sweeps
//! over `R` against the periodic reference.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fem;
pub mod harness;
pub mod homogenize;
pub mod filters;
pub mod linalg;
pub mod matrix;
pub mod quadrature;
pub mod tensor_field;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use tensor_field::TensorField;
