use super::{axpy, dot, norm2, SparseSym};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Preconditioner {
    None,
    #[default]
    Jacobi,
}

#[derive(Clone, Copy, Debug)]
pub struct CgOptions {
    /// Target relative residual `‖b - Ax‖ / ‖b‖`.
    pub tol: f64,
    pub max_iter: usize,
    pub precond: Preconditioner,
    /// Record `½ xᵀAx - bᵀx` after every iteration.
    pub track_energy: bool,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions {
            tol: 1e-10,
            max_iter: 20_000,
            precond: Preconditioner::Jacobi,
            track_energy: false,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CgStats {
    pub iterations: usize,
    pub relative_residual: f64,
    /// Values of the quadratic functional `½ xᵀAx - bᵀx`, which equals
    /// `½‖x - x*‖²_A` up to a constant; empty unless tracking was requested.
    pub energy: Vec<f64>,
}

/// Solves `A x = b` from a zero initial guess.
pub fn cg_solve(a: &SparseSym, b: &[f64], opts: &CgOptions) -> Result<(Vec<f64>, CgStats)> {
    cg_solve_from(a, b, vec![0.0; b.len()], opts)
}

/// Preconditioned conjugate gradients from the initial guess `x`.
///
/// Consistent singular systems (periodic stiffness with a load orthogonal to
/// the kernel) are accepted; the kernel component of the result is whatever
/// the iteration produces and should be fixed by the caller.
pub fn cg_solve_from(a: &SparseSym, b: &[f64], mut x: Vec<f64>, opts: &CgOptions) -> Result<(Vec<f64>, CgStats)> {
    let n = a.n();
    if b.len() != n || x.len() != n {
        return crate::error::invalid(format!("cg: dimension mismatch (matrix {n}, rhs {}, guess {})", b.len(), x.len()));
    }
    let bnorm = norm2(b);
    let mut stats = CgStats::default();
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], stats));
    }
    let inv_diag: Vec<f64> = match opts.precond {
        Preconditioner::None => vec![1.0; n],
        Preconditioner::Jacobi => a
            .diagonal()
            .iter()
            .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
            .collect(),
    };

    let mut r = a.matvec(&x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut rnorm = norm2(&r);
    if opts.track_energy {
        stats.energy.push(energy(&x, b, &r));
    }
    if rnorm <= opts.tol * bnorm {
        stats.relative_residual = rnorm / bnorm;
        return Ok((x, stats));
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rho = dot(&r, &z);
    let mut ap = vec![0.0; n];

    for it in 1..=opts.max_iter {
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::SolverFailure {
                message: "cg: operator is not positive definite on the search direction".into(),
                residual: rnorm / bnorm,
                iterations: it,
            });
        }
        let alpha = rho / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        rnorm = norm2(&r);
        if opts.track_energy {
            stats.energy.push(energy(&x, b, &r));
        }
        if rnorm <= opts.tol * bnorm {
            stats.iterations = it;
            stats.relative_residual = rnorm / bnorm;
            return Ok((x, stats));
        }
        for ((zi, ri), di) in z.iter_mut().zip(&r).zip(&inv_diag) {
            *zi = ri * di;
        }
        let rho_new = dot(&r, &z);
        let beta = rho_new / rho;
        rho = rho_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Err(Error::SolverFailure {
        message: "cg: iteration limit reached".into(),
        residual: rnorm / bnorm,
        iterations: opts.max_iter,
    })
}

/// `½ xᵀAx - bᵀx` using `Ax = b - r`.
fn energy(x: &[f64], b: &[f64], r: &[f64]) -> f64 {
    -0.5 * x.iter().zip(b.iter().zip(r)).map(|(xi, (bi, ri))| xi * (bi + ri)).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    fn lap1d_fem(n_cells: usize, len: f64) -> (SparseSym, SparseSym) {
        // interior Q1 stiffness and mass on a uniform grid
        let h = len / n_cells as f64;
        let m = n_cells - 1;
        let (mut k, mut ms) = (Vec::new(), Vec::new());
        for i in 0..m {
            k.push((i, i, 2.0 / h));
            ms.push((i, i, 4.0 * h / 6.0));
            if i + 1 < m {
                for (a, b) in [(i, i + 1), (i + 1, i)] {
                    k.push((a, b, -1.0 / h));
                    ms.push((a, b, h / 6.0));
                }
            }
        }
        (SparseSym::from_triplets(m, &k).unwrap(), SparseSym::from_triplets(m, &ms).unwrap())
    }

    #[test]
    fn identity_converges_in_one_iteration() {
        let a = SparseSym::identity(5);
        let b = vec![1.0, -2.0, 3.0, 0.5, 7.0];
        let (x, st) = cg_solve(&a, &b, &CgOptions::default()).unwrap();
        assert_eq!(st.iterations, 1);
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let (k, _) = lap1d_fem(5, 1.0);
        let (x, st) = cg_solve(&k, &[0.0; 4], &CgOptions::default()).unwrap();
        assert_eq!(x, vec![0.0; 4]);
        assert_eq!(st.iterations, 0);
    }

    #[test]
    fn matches_dense_factorization() {
        let (k, m) = lap1d_fem(5, 1.0);
        let b = m.matvec(&[1.0; 4]);
        let dense = DMatrix::from_fn(4, 4, |i, j| k.get(i, j));
        let oracle = dense.cholesky().unwrap().solve(&DVector::from_vec(b.clone()));
        for precond in [Preconditioner::None, Preconditioner::Jacobi] {
            let opts = CgOptions { tol: 1e-12, precond, ..Default::default() };
            let (x, _) = cg_solve(&k, &b, &opts).unwrap();
            for i in 0..4 {
                assert!((x[i] - oracle[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn energy_is_monotone() {
        let (k, m) = lap1d_fem(200, 1.0);
        let b: Vec<f64> = (0..199).map(|i| ((i * 7) % 13) as f64 - 6.0).collect();
        let a = k.linear_combination(1.0, &m, 3.0);
        let opts = CgOptions { tol: 1e-12, track_energy: true, ..Default::default() };
        let (_, st) = cg_solve(&a, &b, &opts).unwrap();
        assert!(st.energy.len() > 10);
        for w in st.energy.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].abs(), "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn reports_non_convergence() {
        let (k, _) = lap1d_fem(400, 1.0);
        let b = vec![1.0; 399];
        let opts = CgOptions { tol: 1e-14, max_iter: 3, ..Default::default() };
        match cg_solve(&k, &b, &opts) {
            Err(Error::SolverFailure { residual, iterations, .. }) => {
                assert_eq!(iterations, 3);
                assert!(residual > 0.0);
            }
            other => panic!("expected solver failure, got {other:?}"),
        }
    }
}
