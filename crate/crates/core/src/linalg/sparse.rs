use rayon::prelude::*;

use crate::error::{invalid, Result};

/// Rows above this size use a parallel matvec. Each row is reduced
/// sequentially, so results do not depend on the thread count.
const PAR_MATVEC_ROWS: usize = 20_000;

/// Symmetric sparse matrix in compressed row form; both triangles are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSym {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SparseSym {
    /// Builds from `(row, col, value)` triplets, summing duplicates.
    /// Both `(i, j)` and `(j, i)` must be supplied for off-diagonal entries.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        if n > u32::MAX as usize {
            return invalid(format!("matrix size {n} exceeds the 32-bit index range"));
        }
        let mut counts = vec![0usize; n + 1];
        for &(i, j, _) in triplets {
            if i >= n || j >= n {
                return invalid(format!("triplet ({i}, {j}) out of range for n = {n}"));
            }
            counts[i + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut raw_cols = vec![0usize; triplets.len()];
        let mut raw_vals = vec![0.0; triplets.len()];
        let mut next = counts.clone();
        for &(i, j, v) in triplets {
            raw_cols[next[i]] = j;
            raw_vals[next[i]] = v;
            next[i] += 1;
        }

        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for i in 0..n {
            scratch.clear();
            scratch.extend((counts[i]..counts[i + 1]).map(|k| (raw_cols[k], raw_vals[k])));
            scratch.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < scratch.len() {
                let c = scratch[k].0;
                let mut s = 0.0;
                while k < scratch.len() && scratch[k].0 == c {
                    s += scratch[k].1;
                    k += 1;
                }
                cols.push(c as u32);
                vals.push(s);
            }
            row_ptr.push(cols.len());
        }
        let out = SparseSym { n, row_ptr, cols, vals };
        if !out.is_structurally_symmetric() {
            return invalid("sparse matrix is not structurally symmetric");
        }
        Ok(out)
    }

    pub fn identity(n: usize) -> Self {
        SparseSym {
            n,
            row_ptr: (0..=n).collect(),
            cols: (0..n as u32).collect(),
            vals: vec![1.0; n],
        }
    }

    /// Dense symmetric input; zero entries are skipped.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut t = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n, &t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().map(|&c| c as usize).zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&(j as u32)) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Largest `|i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.n)
            .flat_map(|i| self.row(i).map(move |(j, _)| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    /// `y = A x`.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        let row = |(i, yi): (usize, &mut f64)| {
            let r = self.row_ptr[i]..self.row_ptr[i + 1];
            *yi = self.cols[r.clone()].iter().zip(&self.vals[r]).map(|(&c, v)| v * x[c as usize]).sum();
        };
        if self.n >= PAR_MATVEC_ROWS {
            y.par_iter_mut().enumerate().for_each(row);
        } else {
            y.iter_mut().enumerate().for_each(row);
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn quad_form(&self, x: &[f64], y: &[f64]) -> f64 {
        super::dot(x, &self.matvec(y))
    }

    /// `a * self + b * other`, merging sparsity patterns.
    pub fn linear_combination(&self, a: f64, other: &SparseSym, b: f64) -> SparseSym {
        assert_eq!(self.n, other.n);
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        let mut cols = Vec::with_capacity(self.nnz().max(other.nnz()));
        let mut vals = Vec::with_capacity(cols.capacity());
        row_ptr.push(0);
        for i in 0..self.n {
            let (mut p, pe) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let (mut q, qe) = (other.row_ptr[i], other.row_ptr[i + 1]);
            while p < pe || q < qe {
                let cp = if p < pe { self.cols[p] } else { u32::MAX };
                let cq = if q < qe { other.cols[q] } else { u32::MAX };
                if cp == cq {
                    cols.push(cp);
                    vals.push(a * self.vals[p] + b * other.vals[q]);
                    p += 1;
                    q += 1;
                } else if cp < cq {
                    cols.push(cp);
                    vals.push(a * self.vals[p]);
                    p += 1;
                } else {
                    cols.push(cq);
                    vals.push(b * other.vals[q]);
                    q += 1;
                }
            }
            row_ptr.push(cols.len());
        }
        SparseSym { n: self.n, row_ptr, cols, vals }
    }

    /// Replaces each off-diagonal pair by its mean, removing roundoff
    /// asymmetry left by summation order.
    pub fn symmetrize_values(&mut self) {
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[k] as usize;
                if j <= i {
                    continue;
                }
                let r = self.row_ptr[j]..self.row_ptr[j + 1];
                let kt = r.start + self.cols[r].binary_search(&(i as u32)).expect("structurally symmetric");
                let mean = 0.5 * (self.vals[k] + self.vals[kt]);
                self.vals[k] = mean;
                self.vals[kt] = mean;
            }
        }
    }

    /// `max |A_ij - A_ji|` over stored entries.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    fn is_structurally_symmetric(&self) -> bool {
        (0..self.n).all(|i| {
            self.row(i).all(|(j, _)| {
                let r = self.row_ptr[j]..self.row_ptr[j + 1];
                self.cols[r].binary_search(&(i as u32)).is_ok()
            })
        })
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }
}
