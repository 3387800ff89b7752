use cellhom::fem::{assemble, build_grid, filtered_bilinear, weighted_mass, Boundary, Grid};
use cellhom::filters::{make_filter, BoxFilter};
use cellhom::linalg::dot;
use cellhom::tensor_field::{benchmark_tensor_2d, TensorField};
use proptest::prelude::*;

#[test]
fn periodic_stiffness_annihilates_constants() {
    let f = benchmark_tensor_2d();
    let grid = build_grid(2, 2.0, 16, Boundary::Periodic).unwrap();
    let sys = assemble(&f, &grid).unwrap();
    let ones = vec![1.0; grid.dof_count()];
    let k1 = sys.stiffness.matvec(&ones);
    assert!(k1.iter().all(|v| v.abs() < 1e-12));
    // total mass equals the cell volume
    assert!((sys.mass.quad_form(&ones, &ones) - grid.volume()).abs() < 1e-12);
    // periodic loads integrate to zero
    for b in &sys.loads {
        assert!(b.iter().sum::<f64>().abs() < 1e-12);
    }
}

#[test]
fn constant_field_has_zero_loads_on_dirichlet_grid() {
    let f = TensorField::constant(2, 3.0).unwrap();
    let grid = Grid::with_mesh_size(2, 2.7, 0.1, Boundary::Dirichlet).unwrap();
    let sys = assemble(&f, &grid).unwrap();
    for b in &sys.loads {
        assert!(b.iter().all(|v| v.abs() < 1e-13));
    }
    assert!((sys.coeff_integral.get(0, 0) - 3.0 * grid.volume()).abs() < 1e-12);
}

#[test]
fn interior_dofs_exclude_dirichlet_boundary() {
    let grid = build_grid(2, 3.0, 6, Boundary::Dirichlet).unwrap();
    assert_eq!(grid.dof_count(), 25);
    let grid = build_grid(2, 3.0, 6, Boundary::Periodic).unwrap();
    assert_eq!(grid.dof_count(), 36);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn weighted_mass_reproduces_filtered_product(q in 0u32..4, l in 0.6f64..2.0, seed in 0u32..1000) {
        let grid = build_grid(2, 2.0, 10, Boundary::Dirichlet).unwrap();
        let filter = BoxFilter::new(make_filter(q as i64).unwrap(), l, 2).unwrap();
        let wm = weighted_mass(&grid, &filter).unwrap();
        let s = seed as f64;
        let u = grid.interpolate(|y| (1.3 * y[0] + s).sin() * (0.7 * y[1] - s).cos());
        let v = grid.interpolate(|y| (y[0] * y[1] + 0.1 * s).cos());
        let direct = filtered_bilinear(&grid, &filter, &u, &v).unwrap();
        prop_assert!((dot(&u, &wm.matvec(&v)) - direct).abs() < 1e-12);
    }

    #[test]
    fn stiffness_is_positive_on_dirichlet_grids(n in 3usize..12, seed in 0u64..500) {
        let f = TensorField::checkerboard(2, 1.0, 4.0).unwrap();
        let grid = build_grid(2, 2.5, n, Boundary::Dirichlet).unwrap();
        let sys = assemble(&f, &grid).unwrap();
        let x: Vec<f64> = (0..grid.dof_count()).map(|i| ((i as u64 * 31 + seed) % 17) as f64 - 8.0).collect();
        if x.iter().any(|v| *v != 0.0) {
            prop_assert!(sys.stiffness.quad_form(&x, &x) > 0.0);
        }
        prop_assert_eq!(sys.stiffness.max_asymmetry(), 0.0);
    }
}
