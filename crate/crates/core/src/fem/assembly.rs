use rayon::prelude::*;

use super::element::{RefElement, MAX_CORNERS};
use super::grid::Grid;
use crate::error::{invalid, Result};
use crate::linalg::SparseSym;
use crate::matrix::Matrix;
use crate::tensor_field::TensorField;

/// Gauss points per axis used for cell integrals unless overridden.
pub const DEFAULT_QUAD_POINTS: usize = 3;

/// Assembled cell-problem operators on a grid.
///
/// * `stiffness`: `∫ a ∇φ_u · ∇φ_v`
/// * `mass`: `∫ φ_u φ_v`
/// * `loads[i]`: `-∫ a e_i · ∇φ_v`, the weak form of `∇·(a e_i)`
#[derive(Clone, Debug)]
pub struct FemSystem {
    pub grid: Grid,
    pub stiffness: SparseSym,
    pub mass: SparseSym,
    pub loads: Vec<Vec<f64>>,
    /// `∫_{K_R} a(y) dy`.
    pub coeff_integral: Matrix,
    pub quad_points: usize,
}

struct CellContribution {
    ke: [[f64; MAX_CORNERS]; MAX_CORNERS],
    be: [[f64; MAX_CORNERS]; 3],
    aint: [[f64; 3]; 3],
}

/// Assembles stiffness, mass and divergence loads with the default rule.
pub fn assemble(field: &TensorField, grid: &Grid) -> Result<FemSystem> {
    assemble_with(field, grid, DEFAULT_QUAD_POINTS)
}

pub fn assemble_with(field: &TensorField, grid: &Grid, quad_points: usize) -> Result<FemSystem> {
    let dim = grid.dim();
    if field.dim() != dim {
        return invalid(format!("field dimension {} does not match grid dimension {dim}", field.dim()));
    }
    if quad_points < 2 {
        return invalid("assembly needs at least 2 Gauss points per axis");
    }
    let el = RefElement::new(dim, quad_points);
    let h = grid.h();
    let vol = h.powi(dim as i32);
    let nc = el.corners;

    let mut me = [[0.0; MAX_CORNERS]; MAX_CORNERS];
    for q in 0..el.points.len() {
        let w = el.weights[q] * vol;
        for a in 0..nc {
            for b in 0..nc {
                me[a][b] += w * el.vals[q][a] * el.vals[q][b];
            }
        }
    }

    let cells: Vec<CellContribution> = (0..grid.cell_count())
        .into_par_iter()
        .map(|c| {
            let base = grid.cell_index(c);
            let mut out = CellContribution {
                ke: [[0.0; MAX_CORNERS]; MAX_CORNERS],
                be: [[0.0; MAX_CORNERS]; 3],
                aint: [[0.0; 3]; 3],
            };
            let mut y = [0.0; 3];
            for q in 0..el.points.len() {
                for k in 0..dim {
                    y[k] = grid.coord(base[k]) + h * el.points[q][k];
                }
                let a = field.eval(&y[..dim]);
                let w = el.weights[q] * vol;
                // physical gradients
                let mut g = [[0.0; 3]; MAX_CORNERS];
                for (ga, rg) in g.iter_mut().zip(&el.grads[q]).take(nc) {
                    for k in 0..dim {
                        ga[k] = rg[k] / h;
                    }
                }
                for i in 0..dim {
                    for j in 0..dim {
                        out.aint[i][j] += w * a.get(i, j);
                    }
                }
                for aa in 0..nc {
                    // a ∇φ_a
                    let mut ag = [0.0; 3];
                    for k in 0..dim {
                        for l in 0..dim {
                            ag[k] += a.get(k, l) * g[aa][l];
                        }
                    }
                    for bb in aa..nc {
                        let mut s = 0.0;
                        for k in 0..dim {
                            s += ag[k] * g[bb][k];
                        }
                        out.ke[aa][bb] += w * s;
                    }
                    // -∫ a e_i · ∇φ_a = -Σ_k a_ki ∂_k φ_a
                    for i in 0..dim {
                        let mut s = 0.0;
                        for k in 0..dim {
                            s += a.get(k, i) * g[aa][k];
                        }
                        out.be[i][aa] -= w * s;
                    }
                }
            }
            for aa in 0..nc {
                for bb in 0..aa {
                    out.ke[aa][bb] = out.ke[bb][aa];
                }
            }
            out
        })
        .collect();

    let ndof = grid.dof_count();
    let mut kt = Vec::with_capacity(grid.cell_count() * nc * nc);
    let mut mt = Vec::with_capacity(grid.cell_count() * nc * nc);
    let mut loads = vec![vec![0.0; ndof]; dim];
    let mut aint = [[0.0; 3]; 3];
    for (c, cell) in cells.iter().enumerate() {
        let dofs = grid.cell_dofs(c);
        for aa in 0..nc {
            let Some(u) = dofs[aa] else { continue };
            for (i, load) in loads.iter_mut().enumerate() {
                load[u] += cell.be[i][aa];
            }
            for bb in 0..nc {
                let Some(v) = dofs[bb] else { continue };
                kt.push((u, v, cell.ke[aa][bb]));
                mt.push((u, v, me[aa][bb]));
            }
        }
        for i in 0..dim {
            for j in 0..dim {
                aint[i][j] += cell.aint[i][j];
            }
        }
    }
    let mut coeff_integral = Matrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            coeff_integral.set(i, j, aint[i][j]);
        }
    }
    let mut stiffness = SparseSym::from_triplets(ndof, &kt)?;
    let mut mass = SparseSym::from_triplets(ndof, &mt)?;
    stiffness.symmetrize_values();
    mass.symmetrize_values();
    Ok(FemSystem {
        grid: *grid,
        stiffness,
        mass,
        loads,
        coeff_integral,
        quad_points,
    })
}

impl FemSystem {
    /// `‖u‖_{L²}` of a nodal vector.
    pub fn l2_norm(&self, u: &[f64]) -> f64 {
        self.mass.quad_form(u, u).max(0.0).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::grid::{build_grid, Boundary};
    use crate::tensor_field::benchmark_tensor_2d;

    #[test]
    fn one_dimensional_stencil_matches_hand_assembly() {
        // element matrix on [0,h]: (1/h) [[1,-1],[-1,1]] and (h/6) [[2,1],[1,2]]
        let f = TensorField::constant(1, 1.0).unwrap();
        let g = build_grid(1, 1.0, 4, Boundary::Dirichlet).unwrap();
        let s = assemble(&f, &g).unwrap();
        let h = 0.25;
        for i in 0..3 {
            assert!((s.stiffness.get(i, i) - 2.0 / h).abs() < 1e-12);
            assert!((s.mass.get(i, i) - 4.0 * h / 6.0).abs() < 1e-14);
            if i + 1 < 3 {
                assert!((s.stiffness.get(i, i + 1) + 1.0 / h).abs() < 1e-12);
                assert!((s.mass.get(i, i + 1) - h / 6.0).abs() < 1e-14);
            }
        }
        assert_eq!(s.stiffness.nnz(), 7);
    }

    #[test]
    fn constant_coefficient_has_zero_loads() {
        for dim in 1..=3 {
            let f = TensorField::constant(dim, 3.0).unwrap();
            for bc in [Boundary::Dirichlet, Boundary::Periodic] {
                let g = build_grid(dim, 1.7, 5, bc).unwrap();
                let s = assemble(&f, &g).unwrap();
                let scale = 3.0 * g.h().powi(dim as i32 - 1);
                for load in &s.loads {
                    assert!(load.iter().all(|v| v.abs() < 1e-14 * scale));
                }
            }
        }
    }

    #[test]
    fn periodic_mass_totals_volume_and_stiffness_kills_constants() {
        let f = benchmark_tensor_2d();
        let g = build_grid(2, 1.0, 8, Boundary::Periodic).unwrap();
        let s = assemble(&f, &g).unwrap();
        let ones = vec![1.0; g.dof_count()];
        let total: f64 = s.mass.matvec(&ones).iter().sum();
        assert!((total - 1.0).abs() < 1e-13);
        let k1 = s.stiffness.matvec(&ones);
        assert!(k1.iter().all(|v| v.abs() < 1e-13));
        assert_eq!(s.stiffness.max_asymmetry(), 0.0);
        assert_eq!(s.mass.max_asymmetry(), 0.0);
        let load_sum: Vec<f64> = s.loads.iter().map(|l| l.iter().sum()).collect();
        assert!(load_sum.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn dirichlet_mass_with_boundary_totals_volume() {
        // interior mass plus boundary contributions sums to R^d; with a
        // periodic grid of the same side all nodes are unknowns
        let f = TensorField::constant(2, 1.0).unwrap();
        let g = build_grid(2, 2.5, 10, Boundary::Periodic).unwrap();
        let s = assemble(&f, &g).unwrap();
        let total: f64 = s.mass.matvec(&vec![1.0; g.dof_count()]).iter().sum();
        assert!((total - 2.5 * 2.5).abs() < 1e-12);
    }

    #[test]
    fn quadrature_exact_energies_for_bilinear_data() {
        // hat function energies for a = diag(2, 3): the 2D Q1 hat has
        // ∫(∂_k φ)² = 4/3 and ∫φ² = (2h/3)², independent of the rule
        let f = TensorField::new("diag", 2, 2.0, 3.0, None, |_| Matrix::diagonal(&[2.0, 3.0])).unwrap();
        let g = build_grid(2, 2.0, 6, Boundary::Periodic).unwrap();
        let h = g.h();
        for qp in [2, 3, 5] {
            let s = assemble_with(&f, &g, qp).unwrap();
            let k = s.stiffness.get(7, 7);
            assert!((k - 20.0 / 3.0).abs() < 1e-13 * 20.0 / 3.0);
            let m = s.mass.get(7, 7);
            assert!((m - 4.0 * h * h / 9.0).abs() < 1e-13 * m);
            assert!((s.coeff_integral.get(0, 0) - 8.0).abs() < 1e-13 * 8.0);
            assert!((s.coeff_integral.get(1, 1) - 12.0).abs() < 1e-13 * 12.0);
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let f = TensorField::constant(2, 1.0).unwrap();
        let g = build_grid(1, 1.0, 4, Boundary::Dirichlet).unwrap();
        assert!(assemble(&f, &g).is_err());
    }

    #[test]
    fn dirichlet_stiffness_is_positive_definite() {
        let f = benchmark_tensor_2d();
        let g = build_grid(2, 1.3, 6, Boundary::Dirichlet).unwrap();
        let s = assemble(&f, &g).unwrap();
        let n = g.dof_count();
        let dense = nalgebra::DMatrix::from_fn(n, n, |i, j| s.stiffness.get(i, j));
        let ev = dense.symmetric_eigenvalues();
        assert!(ev.iter().all(|&l| l > 0.0));
    }
}
