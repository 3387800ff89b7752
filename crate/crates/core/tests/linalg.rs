use cellhom::linalg::{cg_solve, dot, smallest_eigpairs, BandedCholesky, CgOptions, EigOptions, SparseSym};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random symmetric positive definite band matrix built from triplets.
fn random_spd(n: usize, band: usize, seed: u64) -> SparseSym {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Vec::new();
    let mut rowsum = vec![0.0; n];
    for i in 0..n {
        for j in i + 1..(i + band + 1).min(n) {
            let v: f64 = rng.gen_range(-1.0..1.0);
            t.push((i, j, v));
            t.push((j, i, v));
            rowsum[i] += v.abs();
            rowsum[j] += v.abs();
        }
    }
    for (i, s) in rowsum.iter().enumerate() {
        t.push((i, i, s + rng.gen_range(0.1..1.0)));
    }
    SparseSym::from_triplets(n, &t).unwrap()
}

fn dense(a: &SparseSym) -> DMatrix<f64> {
    let d = a.to_dense();
    DMatrix::from_fn(a.n(), a.n(), |i, j| d[i][j])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cg_matches_dense_solve(n in 5usize..60, band in 1usize..5, seed in any::<u64>()) {
        let a = random_spd(n, band, seed);
        let b: Vec<f64> = (0..n).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
        let (x, stats) = cg_solve(&a, &b, &CgOptions { tol: 1e-12, ..Default::default() }).unwrap();
        let exact = dense(&a).lu().solve(&DVector::from_vec(b)).unwrap();
        let err = x.iter().zip(exact.iter()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-9 * exact.amax().max(1.0), "err {err} after {} iterations", stats.iterations);
    }

    #[test]
    fn banded_cholesky_solves(n in 3usize..50, band in 1usize..6, seed in any::<u64>()) {
        let a = random_spd(n, band, seed);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = BandedCholesky::factor(&a).unwrap().solve(&b);
        let r = a.matvec(&x);
        let res = r.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        prop_assert!(res < 1e-11);
    }

    #[test]
    fn matvec_is_symmetric(n in 2usize..40, seed in any::<u64>()) {
        let a = random_spd(n, 3, seed);
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).cos()).collect();
        let y: Vec<f64> = (0..n).map(|i| (i as f64 * 1.3).sin()).collect();
        let lhs = dot(&a.matvec(&x), &y);
        let rhs = dot(&x, &a.matvec(&y));
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }
}

#[test]
fn generalized_eigenpairs_match_dense_oracle() {
    let k = random_spd(40, 3, 7);
    let m = random_spd(40, 1, 11);
    let pairs = smallest_eigpairs(&k, &m, 6, &EigOptions::default()).unwrap();

    // oracle: L⁻¹ K L⁻ᵀ with M = L Lᵀ
    let chol = dense(&m).cholesky().unwrap();
    let linv = chol.l().try_inverse().unwrap();
    let c = &linv * dense(&k) * linv.transpose();
    let mut ev: Vec<f64> = SymmetricEigen::new(c).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    for (got, want) in pairs.values.iter().zip(&ev) {
        assert!((got - want).abs() < 1e-8 * want, "{got} vs {want}");
    }
    assert!(pairs.values.windows(2).all(|w| w[0] <= w[1]));
    for (i, u) in pairs.vectors.iter().enumerate() {
        for (j, v) in pairs.vectors.iter().enumerate() {
            let g = m.quad_form(u, v);
            let target = if i == j { 1.0 } else { 0.0 };
            assert!((g - target).abs() < 1e-9, "M-gram ({i}, {j}) = {g}");
        }
    }
}

#[test]
fn eigensolver_rejects_bad_counts() {
    let k = random_spd(10, 2, 1);
    let m = SparseSym::identity(10);
    assert!(smallest_eigpairs(&k, &m, 0, &EigOptions::default()).is_err());
    assert!(smallest_eigpairs(&k, &m, 10, &EigOptions::default()).is_err());
}
