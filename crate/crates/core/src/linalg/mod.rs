//! Sparse symmetric linear algebra: CSR storage, preconditioned conjugate
//! gradients, a banded Cholesky factorization and a shift-invert Lanczos
//! eigensolver for `K φ = λ M φ`.

mod cg;
mod cholesky;
mod lanczos;
mod sparse;

pub use cg::{cg_solve, cg_solve_from, CgOptions, CgStats, Preconditioner};
pub use cholesky::BandedCholesky;
pub use lanczos::{smallest_eigpairs, EigOptions, EigPairs};
pub use sparse::SparseSym;

/// Four interleaved partial sums, so the reduction vectorizes; the order is
/// fixed and results are reproducible.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
