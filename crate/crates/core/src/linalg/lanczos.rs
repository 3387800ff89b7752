use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{axpy, dot, BandedCholesky, SparseSym};
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct EigOptions {
    /// Relative residual target for every returned pair.
    pub tol: f64,
    /// Seed of the random Lanczos starting vector.
    pub seed: u64,
    /// Cap on the Krylov basis size; defaults to `max(4N, N + 100)`.
    pub max_basis: Option<usize>,
}

impl Default for EigOptions {
    fn default() -> Self {
        EigOptions { tol: 1e-8, seed: 42, max_basis: None }
    }
}

/// Generalized eigenpairs `K φ = λ M φ`, ascending, `M`-orthonormal.
#[derive(Clone, Debug)]
pub struct EigPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    /// Post-hoc relative residuals `‖K⁻¹Mφ - λ⁻¹φ‖_M λ`, one per pair.
    pub residuals: Vec<f64>,
    pub basis_size: usize,
}

impl EigPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// The `count` smallest eigenpairs of `K φ = λ M φ` for SPD `K`, `M`.
///
/// Lanczos runs on the shift-inverted operator `K⁻¹M`, which is self-adjoint
/// in the `M` inner product and maps the smallest `λ` to its dominant
/// eigenvalues `1/λ`. `K` is factored once; the basis is fully
/// reorthogonalized.
pub fn smallest_eigpairs(k: &SparseSym, m: &SparseSym, count: usize, opts: &EigOptions) -> Result<EigPairs> {
    let n = k.n();
    if m.n() != n {
        return invalid(format!("eigen: stiffness has size {n}, mass has size {}", m.n()));
    }
    if count == 0 {
        return invalid("eigen: requested zero eigenpairs");
    }
    if count >= n {
        return invalid(format!("eigen: requested {count} pairs from a problem of dimension {n}"));
    }
    let factor = BandedCholesky::factor(k)?;
    let max_basis = opts.max_basis.unwrap_or((4 * count).max(count + 100)).clamp(count + 1, n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
    let mut alphas: Vec<f64> = Vec::with_capacity(max_basis);
    let mut betas: Vec<f64> = Vec::with_capacity(max_basis);

    let start = random_unit(&mut rng, n, m, &basis).ok_or_else(|| Error::SolverFailure {
        message: "eigen: could not build a starting vector".into(),
        residual: f64::NAN,
        iterations: 0,
    })?;
    basis.push(start);

    let check_every = 10;
    loop {
        let j = basis.len() - 1;
        let mut w = factor.solve(&m.matvec(&basis[j]));
        let mut alpha = 0.0;
        for _pass in 0..2 {
            let mw = m.matvec(&w);
            for (i, v) in basis.iter().enumerate() {
                let c = dot(v, &mw);
                if i == j {
                    alpha += c;
                }
                axpy(-c, v, &mut w);
            }
        }
        alphas.push(alpha);
        let beta = m.quad_form(&w, &w).max(0.0).sqrt();
        let size = basis.len();
        let breakdown = beta <= 1e-13 * alpha.abs();
        betas.push(if breakdown { 0.0 } else { beta });

        let at_cap = size >= max_basis;
        if size >= count && ((size - count).is_multiple_of(check_every) || at_cap || breakdown) {
            if let Some(pairs) = ritz_pairs(&basis, &alphas, &betas, count, opts.tol, at_cap) {
                return finalize(m, &factor, pairs, opts.tol, size);
            }
            if at_cap {
                return Err(Error::SolverFailure {
                    message: format!("eigen: {count} pairs not converged within a basis of {size}"),
                    residual: f64::NAN,
                    iterations: size,
                });
            }
        }
        if at_cap {
            // only reachable when size < count, which the clamp excludes
            unreachable!("basis cap below requested count");
        }
        if breakdown {
            // invariant subspace found: continue with a fresh orthogonal direction
            let next = random_unit(&mut rng, n, m, &basis).ok_or_else(|| Error::SolverFailure {
                message: "eigen: Krylov space exhausted".into(),
                residual: f64::NAN,
                iterations: size,
            })?;
            basis.push(next);
        } else {
            for wi in w.iter_mut() {
                *wi /= beta;
            }
            basis.push(w);
        }
    }
}

type RitzPairs = Vec<(f64, Vec<f64>)>;

/// Ritz values `θ` (largest first) with basis coefficients, if the `count`
/// largest satisfy `|β_m s_mk| <= tol θ_k` (or `force` is set).
fn ritz_pairs(basis: &[Vec<f64>], alphas: &[f64], betas: &[f64], count: usize, tol: f64, force: bool) -> Option<RitzPairs> {
    let m = alphas.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alphas[i]
        } else if i + 1 == j {
            betas[i]
        } else if j + 1 == i {
            betas[j]
        } else {
            0.0
        }
    });
    let eig = t.symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let last_beta = betas[m - 1];
    let converged = order[..count].iter().all(|&c| {
        let theta = eig.eigenvalues[c];
        theta > 0.0 && (last_beta * eig.eigenvectors[(m - 1, c)]).abs() <= tol * theta
    });
    if !converged && !force {
        return None;
    }
    let n = basis[0].len();
    let pairs = order[..count]
        .iter()
        .map(|&c| {
            let mut phi = vec![0.0; n];
            for (i, v) in basis.iter().enumerate() {
                axpy(eig.eigenvectors[(i, c)], v, &mut phi);
            }
            (eig.eigenvalues[c], phi)
        })
        .collect();
    Some(pairs)
}

fn finalize(
    m: &SparseSym,
    factor: &BandedCholesky,
    pairs: RitzPairs,
    tol: f64,
    basis_size: usize,
) -> Result<EigPairs> {
    let mut values = Vec::with_capacity(pairs.len());
    let mut vectors = Vec::with_capacity(pairs.len());
    let mut residuals = Vec::with_capacity(pairs.len());
    // pairs arrive with θ descending, i.e. λ ascending
    for (theta, mut phi) in pairs {
        let norm = m.quad_form(&phi, &phi).sqrt();
        for p in phi.iter_mut() {
            *p /= norm;
        }
        let mut r = factor.solve(&m.matvec(&phi));
        axpy(-theta, &phi, &mut r);
        let rel = m.quad_form(&r, &r).sqrt() / theta;
        if !(rel <= 10.0 * tol) {
            return Err(Error::SolverFailure {
                message: "eigen: Ritz pair failed the post-hoc residual check".into(),
                residual: rel,
                iterations: basis_size,
            });
        }
        values.push(1.0 / theta);
        vectors.push(phi);
        residuals.push(rel);
    }
    Ok(EigPairs { values, vectors, residuals, basis_size })
}

/// Random vector `M`-orthogonalized against `basis` and `M`-normalized.
fn random_unit(rng: &mut ChaCha8Rng, n: usize, m: &SparseSym, basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    for _attempt in 0..5 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let before = m.quad_form(&v, &v).sqrt();
        for _pass in 0..2 {
            let mv = m.matvec(&v);
            for b in basis {
                let c = dot(b, &mv);
                axpy(-c, b, &mut v);
            }
        }
        let nrm = m.quad_form(&v, &v).sqrt();
        if nrm > 1e-8 * before {
            for x in v.iter_mut() {
                *x /= nrm;
            }
            return Some(v);
        }
    }
    None
}
