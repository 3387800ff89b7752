use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Dirichlet,
    Periodic,
}

impl std::str::FromStr for Boundary {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" => Ok(Boundary::Dirichlet),
            "periodic" => Ok(Boundary::Periodic),
            _ => Err(crate::Error::Config(format!("unknown boundary condition '{s}'"))),
        }
    }
}

/// Uniform tensor-product grid of `K_R = [-R/2, R/2]^d` with Q1 elements.
///
/// Unknowns are numbered lexicographically (first axis fastest). Dirichlet
/// grids carry only the `(n-1)^d` interior nodes; periodic grids identify
/// opposite faces and carry `n^d` nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    side: f64,
    n: usize,
    h: f64,
    bc: Boundary,
}

pub fn build_grid(dim: usize, side: f64, n_cells_per_axis: usize, bc: Boundary) -> Result<Grid> {
    if !(1..=3).contains(&dim) {
        return invalid(format!("grid dimension must be 1, 2 or 3, got {dim}"));
    }
    if !(side > 0.0 && side.is_finite()) {
        return invalid(format!("domain side must be positive, got {side}"));
    }
    if n_cells_per_axis < 2 {
        return invalid(format!("need at least 2 cells per axis, got {n_cells_per_axis}"));
    }
    Ok(Grid { dim, side, n: n_cells_per_axis, h: side / n_cells_per_axis as f64, bc })
}

impl Grid {
    /// Grid whose mesh size is as close as possible to `h_target`.
    pub fn with_mesh_size(dim: usize, side: f64, h_target: f64, bc: Boundary) -> Result<Grid> {
        if !(h_target > 0.0 && h_target.is_finite()) {
            return invalid(format!("mesh size must be positive, got {h_target}"));
        }
        let n = ((side / h_target).round() as usize).max(2);
        build_grid(dim, side, n, bc)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn cells_per_axis(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn bc(&self) -> Boundary {
        self.bc
    }

    /// `|K_R| = R^d`.
    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim as i32)
    }

    /// Geometric nodes including the boundary: `(n+1)^d` (Dirichlet) or
    /// `n^d` distinct nodes after wrap identification (periodic).
    pub fn node_count(&self) -> usize {
        match self.bc {
            Boundary::Dirichlet => (self.n + 1).pow(self.dim as u32),
            Boundary::Periodic => self.n.pow(self.dim as u32),
        }
    }

    /// Number of unknowns.
    pub fn dof_count(&self) -> usize {
        match self.bc {
            Boundary::Dirichlet => (self.n - 1).pow(self.dim as u32),
            Boundary::Periodic => self.n.pow(self.dim as u32),
        }
    }

    pub fn cell_count(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// Coordinate of grid line `k` (0..=n) along any axis.
    #[inline]
    pub fn coord(&self, k: usize) -> f64 {
        if k == self.n {
            return 0.5 * self.side;
        }
        -0.5 * self.side + self.side * k as f64 / self.n as f64
    }

    /// Unknown attached to the node with grid indices `idx` (each in 0..=n).
    #[inline]
    pub fn dof(&self, idx: &[usize]) -> Option<usize> {
        let mut out = 0usize;
        let mut stride = 1usize;
        match self.bc {
            Boundary::Dirichlet => {
                for &k in &idx[..self.dim] {
                    if k == 0 || k >= self.n {
                        return None;
                    }
                    out += (k - 1) * stride;
                    stride *= self.n - 1;
                }
            }
            Boundary::Periodic => {
                for &k in &idx[..self.dim] {
                    out += (k % self.n) * stride;
                    stride *= self.n;
                }
            }
        }
        Some(out)
    }

    /// Grid indices of the node carrying unknown `dof`.
    pub fn dof_node(&self, dof: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        let mut rem = dof;
        let (m, off) = match self.bc {
            Boundary::Dirichlet => (self.n - 1, 1),
            Boundary::Periodic => (self.n, 0),
        };
        for k in idx.iter_mut().take(self.dim) {
            *k = rem % m + off;
            rem /= m;
        }
        idx
    }

    /// Coordinates of the node carrying unknown `dof`.
    pub fn dof_coords(&self, dof: usize) -> [f64; 3] {
        let idx = self.dof_node(dof);
        let mut x = [0.0; 3];
        for k in 0..self.dim {
            x[k] = self.coord(idx[k]);
        }
        x
    }

    /// Lower-corner grid indices of cell `c`.
    #[inline]
    pub fn cell_index(&self, c: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        let mut rem = c;
        for k in idx.iter_mut().take(self.dim) {
            *k = rem % self.n;
            rem /= self.n;
        }
        idx
    }

    /// Unknowns of the `2^d` cell corners (bit `k` of the corner number
    /// selects the upper node along axis `k`); `None` on Dirichlet boundary.
    pub fn cell_dofs(&self, c: usize) -> [Option<usize>; 8] {
        let base = self.cell_index(c);
        let mut out = [None; 8];
        for (a, slot) in out.iter_mut().enumerate().take(1 << self.dim) {
            let mut idx = base;
            for (k, ik) in idx.iter_mut().enumerate().take(self.dim) {
                *ik += (a >> k) & 1;
            }
            *slot = self.dof(&idx);
        }
        out
    }

    /// Nodal interpolant of `f` on the unknowns.
    pub fn interpolate(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        (0..self.dof_count())
            .map(|i| {
                let x = self.dof_coords(i);
                f(&x[..self.dim])
            })
            .collect()
    }
}
