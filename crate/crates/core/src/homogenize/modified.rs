//! Dirichlet cell problem on `K_R` whose load has the slow part of the heat
//! semigroup removed: `K χ^i = b^i - Σ_k e^{-λ_k T} (φ_k·b^i) M φ_k` with the
//! `N` smallest generalized eigenpairs `K φ = λ M φ`.

use std::time::Instant;

use super::{HomogenizedTensor, Method, MethodParams, SolverOptions};
use crate::error::{invalid, Result};
use crate::fem::{assemble_with, filtered_flux_tensor, Boundary, FemSystem, Grid};
use crate::filters::{make_filter, BoxFilter};
use crate::linalg::{axpy, cg_solve, dot, smallest_eigpairs, EigPairs};
use crate::matrix::Matrix;
use crate::tensor_field::TensorField;

/// `Σ_k e^{-λ_k T} (φ_k·b) M φ_k`, the truncated `M e^{-A T} M⁻¹ b`.
pub fn spectral_correction(system: &FemSystem, eig: &EigPairs, t: f64, load: &[f64]) -> Vec<f64> {
    let mut modal = vec![0.0; load.len()];
    for (lambda, phi) in eig.values.iter().zip(&eig.vectors) {
        let g = dot(phi, load);
        axpy((-lambda * t).exp() * g, phi, &mut modal);
    }
    system.mass.matvec(&modal)
}

/// Correctors `χ^i_{R,T,N}` for every direction and the total CG iterations.
pub fn modified_correctors(system: &FemSystem, eig: &EigPairs, t: f64, opts: &SolverOptions) -> Result<(Vec<Vec<f64>>, usize)> {
    if system.grid.bc() != Boundary::Dirichlet {
        return invalid("the modified elliptic problem needs Dirichlet boundary conditions");
    }
    if !(t > 0.0 && t.is_finite()) {
        return invalid(format!("T must be positive and finite, got {t}"));
    }
    let mut out = Vec::with_capacity(system.loads.len());
    let mut iterations = 0;
    for load in &system.loads {
        let mut b = load.clone();
        axpy(-1.0, &spectral_correction(system, eig, t, load), &mut b);
        let (chi, stats) = cg_solve(&system.stiffness, &b, &opts.cg())?;
        iterations += stats.iterations;
        out.push(chi);
    }
    Ok((out, iterations))
}

/// `∫_{K_L} (a_ij + Σ_k a_ik ∂_k χ^j) μ_L dy`, not symmetric in general.
pub fn modified_tensor(system: &FemSystem, field: &TensorField, filter: &BoxFilter, chis: &[Vec<f64>]) -> Result<Matrix> {
    filtered_flux_tensor(&system.grid, field, filter, chis)
}

pub fn solve_modified_elliptic(field: &TensorField, params: &MethodParams, h: f64, opts: &SolverOptions) -> Result<HomogenizedTensor> {
    params.validate(Method::ModifiedElliptic)?;
    let start = Instant::now();
    let grid = Grid::with_mesh_size(field.dim(), params.r, h, Boundary::Dirichlet)?;
    if params.n_modes >= grid.dof_count() {
        return invalid(format!("N = {} must be below the number of unknowns {}", params.n_modes, grid.dof_count()));
    }
    let system = assemble_with(field, &grid, opts.quad_points)?;
    let eig = smallest_eigpairs(&system.stiffness, &system.mass, params.n_modes, &opts.eig())?;
    let filter = BoxFilter::new(make_filter(params.q as i64)?, params.l, field.dim())?;
    let (chis, iterations) = modified_correctors(&system, &eig, params.t.expect("validated"), opts)?;
    let raw = modified_tensor(&system, field, &filter, &chis)?;
    let values = if opts.symmetrize { raw.symmetrized() } else { raw };
    let mut out = HomogenizedTensor::new(values, Method::ModifiedElliptic, *params, iterations, start.elapsed());
    out.diagnostics.asymmetry = raw.asymmetry();
    out.diagnostics.largest_mode = eig.values.last().copied();
    Ok(out)
}
