//! Homogenization methods and their parameter rules.

mod elliptic;
mod modified;
mod parabolic;
mod params;
mod periodic;

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

pub use elliptic::{elliptic_correctors, solve_elliptic, solve_elliptic_dirichlet};
pub use modified::{modified_correctors, modified_tensor, solve_modified_elliptic, spectral_correction};
pub use parabolic::{evolve_parabolic, evolve_parabolic_system, solve_parabolic, upscale_parabolic, ParabolicTrajectory, TimeOptions};
pub use params::{optimal_params, time_scaling, Method, MethodParams, ModeRule};
pub use periodic::solve_periodic_reference;

/// Numerical tolerances shared by all methods.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    pub eig_tol: f64,
    pub seed: u64,
    /// Gauss points per axis for cell integrals.
    pub quad_points: usize,
    /// Average the modified-elliptic output with its transpose.
    pub symmetrize: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            cg_tol: 1e-10,
            cg_max_iter: 50_000,
            eig_tol: 1e-8,
            seed: 42,
            quad_points: crate::fem::DEFAULT_QUAD_POINTS,
            symmetrize: false,
        }
    }
}

impl SolverOptions {
    pub(crate) fn cg(&self) -> crate::linalg::CgOptions {
        crate::linalg::CgOptions {
            tol: self.cg_tol,
            max_iter: self.cg_max_iter,
            ..Default::default()
        }
    }

    pub(crate) fn eig(&self) -> crate::linalg::EigOptions {
        crate::linalg::EigOptions { tol: self.eig_tol, seed: self.seed, max_basis: None }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `‖A - Aᵀ‖_F` before any symmetrization.
    pub asymmetry: f64,
    pub spectral_min: f64,
    pub spectral_max: f64,
    pub solver_iterations: usize,
    pub wall_time_ms: f64,
    /// Time steps accepted by the parabolic integrator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_steps: Option<usize>,
    /// Largest eigenvalue used in the spectral correction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub largest_mode: Option<f64>,
}

/// Effective tensor produced by one method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogenizedTensor {
    pub values: Matrix,
    pub method: Method,
    pub params: MethodParams,
    pub diagnostics: Diagnostics,
}

impl HomogenizedTensor {
    pub(crate) fn new(values: Matrix, method: Method, params: MethodParams, iterations: usize, elapsed: Duration) -> Self {
        let ev = values.symmetric_eigenvalues();
        HomogenizedTensor {
            values,
            method,
            params,
            diagnostics: Diagnostics {
                asymmetry: values.asymmetry(),
                spectral_min: ev[0],
                spectral_max: ev[ev.len() - 1],
                solver_iterations: iterations,
                wall_time_ms: elapsed.as_secs_f64() * 1e3,
                time_steps: None,
                largest_mode: None,
            },
        }
    }

    pub fn error_against(&self, reference: &Matrix) -> f64 {
        self.values.sub(reference).frobenius_norm()
    }
}
