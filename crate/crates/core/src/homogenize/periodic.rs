use std::time::Instant;

use super::{HomogenizedTensor, Method, MethodParams, SolverOptions};
use crate::error::{invalid, Result};
use crate::fem::{assemble_with, corrected_energy_tensor, Boundary, Grid};
use crate::linalg::cg_solve;
use crate::tensor_field::TensorField;

/// Reference tensor from the periodic corrector problem on the unit cell.
///
/// The correctors are the zero-mean solutions of `K χ^i = b^i`; the load is
/// projected onto the complement of the constants first, which keeps the
/// singular system consistent for CG.
pub fn solve_periodic_reference(field: &TensorField, h: f64, opts: &SolverOptions) -> Result<HomogenizedTensor> {
    match field.period() {
        Some(p) if (p - 1.0).abs() < 1e-12 => {}
        other => return invalid(format!("periodic reference needs a field of period 1, got {other:?}")),
    }
    let start = Instant::now();
    let dim = field.dim();
    let grid = Grid::with_mesh_size(dim, 1.0, h, Boundary::Periodic)?;
    let system = assemble_with(field, &grid, opts.quad_points)?;
    let mut chis = Vec::with_capacity(dim);
    let mut iterations = 0;
    for load in &system.loads {
        let mut b = load.clone();
        remove_mean(&mut b);
        let (mut chi, stats) = cg_solve(&system.stiffness, &b, &opts.cg())?;
        remove_mean(&mut chi);
        iterations += stats.iterations;
        chis.push(chi);
    }
    let values = corrected_energy_tensor(&grid, field, &chis, opts.quad_points)?.scale(1.0 / grid.volume());
    Ok(HomogenizedTensor::new(values, Method::Periodic, MethodParams::full_cell(1.0), iterations, start.elapsed()))
}

/// Subtracts the arithmetic mean, which on a uniform periodic grid is also
/// the `L²` mean of the interpolant.
pub(crate) fn remove_mean(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    for x in v.iter_mut() {
        *x -= mean;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::tensor_field::{benchmark_homogenized_2d, benchmark_tensor_2d};

    #[test]
    fn constant_field_is_reproduced() {
        for dim in 1..=3 {
            let f = TensorField::constant(dim, 2.5).unwrap();
            let a0 = solve_periodic_reference(&f, 0.25, &SolverOptions::default()).unwrap();
            assert!(a0.values.sub(&Matrix::scaled_identity(dim, 2.5)).frobenius_norm() < 1e-12);
        }
    }

    #[test]
    fn laminate_harmonic_mean_1d() {
        let f = TensorField::checkerboard(1, 1.0, 4.0).unwrap();
        let a0 = solve_periodic_reference(&f, 1.0 / 64.0, &SolverOptions::default()).unwrap();
        assert!((a0.values.get(0, 0) - 1.6).abs() < 1e-3, "{}", a0.values.get(0, 0));
    }

    #[test]
    fn benchmark_matches_laminate_oracle() {
        let f = benchmark_tensor_2d();
        let a0 = solve_periodic_reference(&f, 1.0 / 32.0, &SolverOptions::default()).unwrap();
        let exact = benchmark_homogenized_2d();
        assert!(a0.error_against(&exact) < 5e-3, "{:?}", a0.values);
        assert!(a0.diagnostics.asymmetry <= 1e-12 * a0.values.frobenius_norm());
        assert!(a0.diagnostics.spectral_min >= f.alpha() && a0.diagnostics.spectral_max <= f.beta());
    }

    #[test]
    fn rejects_non_periodic_field() {
        let f = TensorField::new("np", 1, 1.0, 1.0, None, |_| Matrix::identity(1)).unwrap();
        assert!(solve_periodic_reference(&f, 0.1, &SolverOptions::default()).is_err());
    }
}
