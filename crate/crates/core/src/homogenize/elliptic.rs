use std::time::Instant;

use super::periodic::remove_mean;
use super::{HomogenizedTensor, Method, MethodParams, SolverOptions};
use crate::error::Result;
use crate::fem::{assemble_with, Boundary, FemSystem, Grid};
use crate::linalg::cg_solve;
use crate::matrix::Matrix;
use crate::tensor_field::TensorField;

/// Solves `K ψ^i = b^i` for every direction. Returns the correctors and the
/// total CG iteration count.
pub fn elliptic_correctors(system: &FemSystem, opts: &SolverOptions) -> Result<(Vec<Vec<f64>>, usize)> {
    let periodic = system.grid.bc() == Boundary::Periodic;
    let mut out = Vec::with_capacity(system.loads.len());
    let mut iterations = 0;
    for load in &system.loads {
        let mut b = load.clone();
        if periodic {
            remove_mean(&mut b);
        }
        let (mut psi, stats) = cg_solve(&system.stiffness, &b, &opts.cg())?;
        if periodic {
            remove_mean(&mut psi);
        }
        iterations += stats.iterations;
        out.push(psi);
    }
    Ok((out, iterations))
}

/// `|K_R|⁻¹ [∫ a_ij - ∫ ∇ψ^i · a ∇ψ^j]`, computed on the upper triangle and
/// mirrored.
pub(crate) fn energy_form(system: &FemSystem, psis: &[Vec<f64>]) -> Matrix {
    let dim = psis.len();
    let kpsi: Vec<Vec<f64>> = psis.iter().map(|p| system.stiffness.matvec(p)).collect();
    let mut out = Matrix::zeros(dim);
    let vol = system.grid.volume();
    for i in 0..dim {
        for j in i..dim {
            let e = crate::linalg::dot(&psis[i], &kpsi[j]);
            let v = (system.coeff_integral.get(i, j) - e) / vol;
            out.set(i, j, v);
            out.set(j, i, v);
        }
    }
    out
}

/// Truncated cell problem on `K_R` with homogeneous Dirichlet data.
pub fn solve_elliptic_dirichlet(field: &TensorField, r: f64, h: f64, opts: &SolverOptions) -> Result<HomogenizedTensor> {
    solve_elliptic(field, r, h, Boundary::Dirichlet, opts)
}

/// Truncated cell problem on `K_R` with the given boundary condition
/// (periodic means periodic with period `R`).
pub fn solve_elliptic(field: &TensorField, r: f64, h: f64, bc: Boundary, opts: &SolverOptions) -> Result<HomogenizedTensor> {
    let start = Instant::now();
    let grid = Grid::with_mesh_size(field.dim(), r, h, bc)?;
    let system = assemble_with(field, &grid, opts.quad_points)?;
    let (psis, iterations) = elliptic_correctors(&system, opts)?;
    let values = energy_form(&system, &psis);
    Ok(HomogenizedTensor::new(values, Method::Elliptic, MethodParams::full_cell(r), iterations, start.elapsed()))
}
