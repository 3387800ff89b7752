//! Filter-weighted integrals over `K_L` of finite element functions.
//!
//! Cells cut by the boundary of `K_L` are integrated only over the part
//! inside the support, so the discontinuity of the order-0 filter (and the
//! limited smoothness of higher orders) at `±L/2` costs no accuracy. The
//! filter is evaluated pointwise at the quadrature nodes.

use super::assembly::DEFAULT_QUAD_POINTS;
use super::element::{shape, RefElement, MAX_CORNERS};
use super::grid::Grid;
use crate::error::{invalid, Result};
use crate::filters::BoxFilter;
use crate::linalg::SparseSym;
use crate::matrix::Matrix;
use crate::quadrature::GaussLegendre;
use crate::tensor_field::TensorField;

/// Cell index along one axis with its clipped rule `(xi, y, weight)`.
type AxisRule = (usize, Vec<(f64, f64, f64)>);

/// A quadrature node: reference coordinates in the cell, physical point,
/// and the weight already multiplied by `μ_L`.
#[derive(Clone, Copy, Debug)]
struct Node {
    xi: [f64; 3],
    y: [f64; 3],
    w: f64,
}

/// Per-cell nodes of the filter-weighted rule.
struct FilterRule {
    cells: Vec<(usize, Vec<Node>)>,
}

fn check(grid: &Grid, filter: &BoxFilter) -> Result<()> {
    if filter.dim() != grid.dim() {
        return invalid(format!("filter dimension {} does not match grid dimension {}", filter.dim(), grid.dim()));
    }
    if filter.side() > grid.side() * (1.0 + 1e-12) {
        return invalid(format!("filter side L = {} exceeds domain side R = {}", filter.side(), grid.side()));
    }
    Ok(())
}

impl FilterRule {
    fn new(grid: &Grid, filter: &BoxFilter) -> Self {
        let dim = grid.dim();
        let n = grid.cells_per_axis();
        let h = grid.h();
        let half = 0.5 * filter.side().min(grid.side());
        let gauss = GaussLegendre::new(DEFAULT_QUAD_POINTS.max(filter.q() as usize + 2));

        // per axis: for each intersecting cell index, the clipped 1D rule as
        // (xi, y, weight * 1D filter factor)
        let mut axis_rules: Vec<Vec<AxisRule>> = Vec::with_capacity(dim);
        let mut mapped = Vec::new();
        for _ in 0..dim {
            let mut per_axis = Vec::new();
            for k in 0..n {
                let x0 = grid.coord(k);
                let x1 = grid.coord(k + 1);
                let lo = x0.max(-half);
                let hi = x1.min(half);
                if hi <= lo {
                    continue;
                }
                mapped.clear();
                gauss.mapped(lo, hi, &mut mapped);
                let pts = mapped
                    .iter()
                    .map(|&(y, w)| ((y - x0) / h, y, w * filter.factor(y)))
                    .collect();
                per_axis.push((k, pts));
            }
            axis_rules.push(per_axis);
        }

        let counts: Vec<usize> = axis_rules.iter().map(|r| r.len()).collect();
        let total: usize = counts.iter().product();
        let mut cells = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut sel = [0usize; 3];
            for k in 0..dim {
                sel[k] = rem % counts[k];
                rem /= counts[k];
            }
            let mut cell = 0usize;
            let mut stride = 1usize;
            for k in 0..dim {
                cell += axis_rules[k][sel[k]].0 * stride;
                stride *= n;
            }
            let npts: Vec<usize> = (0..dim).map(|k| axis_rules[k][sel[k]].1.len()).collect();
            let m: usize = npts.iter().product();
            let mut nodes = Vec::with_capacity(m);
            for p in 0..m {
                let mut r = p;
                let mut node = Node { xi: [0.0; 3], y: [0.0; 3], w: 1.0 };
                for k in 0..dim {
                    let (xi, y, w) = axis_rules[k][sel[k]].1[r % npts[k]];
                    r /= npts[k];
                    node.xi[k] = xi;
                    node.y[k] = y;
                    node.w *= w;
                }
                nodes.push(node);
            }
            cells.push((cell, nodes));
        }
        FilterRule { cells }
    }
}

fn check_vec(grid: &Grid, u: &[f64]) -> Result<()> {
    if u.len() != grid.dof_count() {
        return invalid(format!("nodal vector has length {}, grid has {} unknowns", u.len(), grid.dof_count()));
    }
    Ok(())
}

#[inline]
fn gather(dofs: &[Option<usize>; 8], corners: usize, u: &[f64]) -> [f64; MAX_CORNERS] {
    let mut out = [0.0; MAX_CORNERS];
    for a in 0..corners {
        if let Some(d) = dofs[a] {
            out[a] = u[d];
        }
    }
    out
}

/// `∫_{K_L} u_h v_h μ_L dy`.
pub fn filtered_bilinear(grid: &Grid, filter: &BoxFilter, u: &[f64], v: &[f64]) -> Result<f64> {
    check(grid, filter)?;
    check_vec(grid, u)?;
    check_vec(grid, v)?;
    let dim = grid.dim();
    let nc = 1 << dim;
    let rule = FilterRule::new(grid, filter);
    let mut total = 0.0;
    for (cell, nodes) in &rule.cells {
        let dofs = grid.cell_dofs(*cell);
        let ue = gather(&dofs, nc, u);
        let ve = gather(&dofs, nc, v);
        for node in nodes {
            let (vals, _) = shape(dim, &node.xi);
            let mut uh = 0.0;
            let mut vh = 0.0;
            for a in 0..nc {
                uh += vals[a] * ue[a];
                vh += vals[a] * ve[a];
            }
            total += node.w * uh * vh;
        }
    }
    Ok(total)
}

/// Filter-weighted mass matrix `M^μ_uv = ∫_{K_L} φ_u φ_v μ_L`, so that
/// `uᵀ M^μ v` reproduces [`filtered_bilinear`] with the same rule.
pub fn weighted_mass(grid: &Grid, filter: &BoxFilter) -> Result<SparseSym> {
    check(grid, filter)?;
    let dim = grid.dim();
    let nc = 1 << dim;
    let rule = FilterRule::new(grid, filter);
    let mut trip = Vec::new();
    for (cell, nodes) in &rule.cells {
        let dofs = grid.cell_dofs(*cell);
        let mut me = [[0.0; MAX_CORNERS]; MAX_CORNERS];
        for node in nodes {
            let (vals, _) = shape(dim, &node.xi);
            for a in 0..nc {
                for b in a..nc {
                    me[a][b] += node.w * vals[a] * vals[b];
                }
            }
        }
        for a in 0..nc {
            let Some(u) = dofs[a] else { continue };
            for b in 0..nc {
                let Some(v) = dofs[b] else { continue };
                trip.push((u, v, if a <= b { me[a][b] } else { me[b][a] }));
            }
        }
    }
    let mut m = SparseSym::from_triplets(grid.dof_count(), &trip)?;
    m.symmetrize_values();
    Ok(m)
}

/// `∫_{K_L} (a_ij + Σ_k a_ik ∂_k χ^j) μ_L dy` for all `i, j`.
///
/// `chis` holds one corrector per direction `j`; an empty slice means all
/// correctors vanish and the result is the filtered average of `a`.
pub fn filtered_flux_tensor(grid: &Grid, field: &TensorField, filter: &BoxFilter, chis: &[Vec<f64>]) -> Result<Matrix> {
    check(grid, filter)?;
    let dim = grid.dim();
    if field.dim() != dim {
        return invalid(format!("field dimension {} does not match grid dimension {dim}", field.dim()));
    }
    if !chis.is_empty() && chis.len() != dim {
        return invalid(format!("expected {dim} correctors, got {}", chis.len()));
    }
    for chi in chis {
        check_vec(grid, chi)?;
    }
    let nc = 1 << dim;
    let h = grid.h();
    let rule = FilterRule::new(grid, filter);
    let mut acc = [[0.0; 3]; 3];
    for (cell, nodes) in &rule.cells {
        let dofs = grid.cell_dofs(*cell);
        let ce: Vec<[f64; MAX_CORNERS]> = chis.iter().map(|c| gather(&dofs, nc, c)).collect();
        for node in nodes {
            let a = field.eval(&node.y[..dim]);
            let (_, grads) = shape(dim, &node.xi);
            // ∇χ^j at the node
            let mut gchi = [[0.0; 3]; 3];
            for (j, c) in ce.iter().enumerate() {
                for aa in 0..nc {
                    for k in 0..dim {
                        gchi[j][k] += c[aa] * grads[aa][k] / h;
                    }
                }
            }
            for i in 0..dim {
                for j in 0..dim {
                    let mut s = a.get(i, j);
                    for k in 0..dim {
                        s += a.get(i, k) * gchi[j][k];
                    }
                    acc[i][j] += node.w * s;
                }
            }
        }
    }
    let mut out = Matrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            out.set(i, j, acc[i][j]);
        }
    }
    Ok(out)
}

/// Single entry `(i, j)` of [`filtered_flux_tensor`] with corrector `chi = χ^j`.
pub fn filtered_flux_average(
    grid: &Grid,
    field: &TensorField,
    filter: &BoxFilter,
    chi: &[f64],
    j: usize,
    i: usize,
) -> Result<f64> {
    let dim = grid.dim();
    if i >= dim || j >= dim {
        return invalid(format!("direction out of range: ({i}, {j}) for dimension {dim}"));
    }
    check_vec(grid, chi)?;
    let mut chis = vec![vec![0.0; chi.len()]; dim];
    chis[j] = chi.to_vec();
    Ok(filtered_flux_tensor(grid, field, filter, &chis)?.get(i, j))
}

/// `∫_{K_L} a μ_L dy`.
pub fn filtered_coeff_average(grid: &Grid, field: &TensorField, filter: &BoxFilter) -> Result<Matrix> {
    filtered_flux_tensor(grid, field, filter, &[])
}

/// `∫_{K_R} (e_i + ∇χ^i) · a (e_j + ∇χ^j) dy` over the whole grid with the
/// cell rule of `quad_points` Gauss points per axis.
pub fn corrected_energy_tensor(grid: &Grid, field: &TensorField, chis: &[Vec<f64>], quad_points: usize) -> Result<Matrix> {
    let dim = grid.dim();
    if field.dim() != dim {
        return invalid(format!("field dimension {} does not match grid dimension {dim}", field.dim()));
    }
    if chis.len() != dim {
        return invalid(format!("expected {dim} correctors, got {}", chis.len()));
    }
    for chi in chis {
        check_vec(grid, chi)?;
    }
    let el = RefElement::new(dim, quad_points.max(2));
    let nc = el.corners;
    let h = grid.h();
    let vol = h.powi(dim as i32);
    let mut acc = [[0.0; 3]; 3];
    let mut y = [0.0; 3];
    for c in 0..grid.cell_count() {
        let base = grid.cell_index(c);
        let dofs = grid.cell_dofs(c);
        let ce: Vec<[f64; MAX_CORNERS]> = chis.iter().map(|x| gather(&dofs, nc, x)).collect();
        for q in 0..el.points.len() {
            for k in 0..dim {
                y[k] = grid.coord(base[k]) + h * el.points[q][k];
            }
            let a = field.eval(&y[..dim]);
            // columns e_j + ∇χ^j
            let mut cols = [[0.0; 3]; 3];
            for (j, c) in ce.iter().enumerate() {
                cols[j][j] = 1.0;
                for aa in 0..nc {
                    for k in 0..dim {
                        cols[j][k] += c[aa] * el.grads[q][aa][k] / h;
                    }
                }
            }
            let w = el.weights[q] * vol;
            for i in 0..dim {
                for j in i..dim {
                    let mut s = 0.0;
                    for k in 0..dim {
                        for l in 0..dim {
                            s += cols[i][k] * a.get(k, l) * cols[j][l];
                        }
                    }
                    acc[i][j] += w * s;
                }
            }
        }
    }
    let mut out = Matrix::zeros(dim);
    for i in 0..dim {
        for j in i..dim {
            out.set(i, j, acc[i][j]);
            out.set(j, i, acc[i][j]);
        }
    }
    Ok(out)
}
