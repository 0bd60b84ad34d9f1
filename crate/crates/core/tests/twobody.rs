use bosebox::eigen::{dense_lowest, SymmetricOperator};
use bosebox::potential::Potential;
use bosebox::twobody::{
    rescale_to_unit_box, solve_ground_state, verify_minimizer_properties, BoxGeometry, TwoBodyOperator,
};

fn soft(kappa: f64) -> Potential {
    Potential::soft_sphere(1.0, 1.0, kappa).unwrap()
}

fn dense_check(g: &BoxGeometry, pot: &Potential, check_vector: bool) {
    let sol = solve_ground_state(g, pot, 1e-14).unwrap();
    let op = TwoBodyOperator::new(g, pot);
    let (want, vec) = dense_lowest(op.to_dense());
    assert!((sol.eigenvalue - want).abs() <= 1e-9 * want.abs().max(1e-3), "{:?}: {} vs {want}", g, sol.eigenvalue);
    if check_vector {
        let norm = g.cell_volume().sqrt();
        let sign = if vec.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        let worst = sol
            .field
            .values
            .iter()
            .zip(&vec)
            .map(|(a, b)| (a * norm - sign * b).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-9, "{g:?}: eigenvector deviation {worst}");
    }
}

#[test]
fn matches_dense_solver_in_one_dimension() {
    for m in [4, 8, 13, 20] {
        for (ell, kappa) in [(3.0, 1.0), (6.0, 4.0)] {
            dense_check(&BoxGeometry::new(1, ell, m).unwrap(), &soft(kappa), true);
        }
    }
    let poly = Potential::truncated_polynomial(2.0, 1.2, 3.0).unwrap();
    dense_check(&BoxGeometry::new(1, 5.0, 8).unwrap(), &poly, true);
}

#[test]
fn matches_dense_solver_in_two_dimensions() {
    dense_check(&BoxGeometry::new(2, 4.0, 4).unwrap(), &soft(2.0), true);
    dense_check(&BoxGeometry::new(2, 5.0, 6).unwrap(), &soft(1.0), true);
}

#[test]
fn one_dimensional_small_grid_oracle() {
    // 64 unknowns
    let g = BoxGeometry::new(1, 4.0, 8).unwrap();
    let pot = soft(1.0);
    let sol = solve_ground_state(&g, &pot, 1e-13).unwrap();
    let (want, _) = dense_lowest(TwoBodyOperator::new(&g, &pot).to_dense());
    assert!((sol.eigenvalue - want).abs() < 1e-10);
}

#[test]
fn minimizer_is_positive_symmetric_and_normalized() {
    let g = BoxGeometry::new(2, 4.0, 8).unwrap();
    let sol = solve_ground_state(&g, &soft(2.0), 1e-12).unwrap();
    assert!(sol.field.values.iter().all(|&v| v > 0.0));
    assert!(sol.field.exchange_asymmetry() < 1e-12);
    assert!((sol.field.norm_l2() - 1.0).abs() < 1e-12);
}

#[test]
fn eigenvalue_is_monotone_in_coupling_and_below_constant_trial() {
    let g = BoxGeometry::new(2, 4.0, 6).unwrap();
    let mut prev = 0.0;
    for kappa in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0] {
        let pot = soft(kappa);
        let sol = solve_ground_state(&g, &pot, 1e-12).unwrap();
        let trial = TwoBodyOperator::new(&g, &pot).constant_trial_quotient();
        assert!(sol.eigenvalue >= prev - 1e-13);
        assert!(sol.eigenvalue <= trial + 1e-13);
        assert!(sol.eigenvalue <= kappa * pot.v0() + 1e-13);
        prev = sol.eigenvalue;
    }
}

#[test]
fn unit_box_problem_is_an_exact_rescaling() {
    // power-of-two box side: every scaled quantity is exact in floating point
    let ell = 4.0;
    let pot = soft(1.5);
    let g = BoxGeometry::new(2, ell, 8).unwrap();
    let sol = solve_ground_state(&g, &pot, 1e-10).unwrap();
    let unit = BoxGeometry::new(2, 1.0, 8).unwrap();
    let sol1 = solve_ground_state(&unit, &pot.rescaled(ell).unwrap(), 1e-10).unwrap();
    let (f_ell, lam) = rescale_to_unit_box(&sol);
    assert_eq!(lam, sol1.eigenvalue);
    assert_eq!(f_ell.geometry, unit);
    // ‖f_ℓ‖ on the unit double box is ℓ^{-d}
    assert!((f_ell.norm_l2() - ell.powi(-2)).abs() < 1e-14);
}

#[test]
fn rescaling_holds_to_rounding_for_general_sides() {
    let ell = 3.3;
    let pot = soft(1.5);
    let sol = solve_ground_state(&BoxGeometry::new(1, ell, 10).unwrap(), &pot, 1e-13).unwrap();
    let sol1 = solve_ground_state(&BoxGeometry::new(1, 1.0, 10).unwrap(), &pot.rescaled(ell).unwrap(), 1e-13).unwrap();
    let (_, lam) = rescale_to_unit_box(&sol);
    assert!(((lam - sol1.eigenvalue) / lam).abs() < 1e-12);
}

#[test]
fn refinement_converges_at_second_order_for_smooth_potentials() {
    let pot = Potential::truncated_polynomial(1.0, 1.5, 2.0).unwrap();
    let lam = |m: usize| solve_ground_state(&BoxGeometry::new(1, 4.0, m).unwrap(), &pot, 1e-14).unwrap().eigenvalue;
    let (a, b, c) = (lam(16), lam(32), lam(64));
    let order = ((a - b) / (b - c)).abs().log2();
    assert!(order >= 1.7, "observed order {order}");
}

#[test]
fn free_problem_reports_zero_deviations() {
    let g = BoxGeometry::new(2, 3.0, 5).unwrap();
    let sol = solve_ground_state(&g, &soft(0.0), 1e-12).unwrap();
    let rep = verify_minimizer_properties(&sol, 0.0);
    assert_eq!(rep.gradient_energy, 0.0);
    assert_eq!(rep.l2_ratio, 0.0);
    assert_eq!(rep.l1_ratio, 0.0);
    assert_eq!(rep.decay_ratio, 0.0);
    assert_eq!(rep.com_gradient_ratio, 0.0);
    assert!((rep.sup_ratio - 1.0).abs() < 1e-14);
}

#[test]
fn gradient_energy_matches_quadratic_form() {
    let g = BoxGeometry::new(2, 4.0, 6).unwrap();
    let pot = soft(2.0);
    let sol = solve_ground_state(&g, &pot, 1e-13).unwrap();
    let rep = verify_minimizer_properties(&sol, 0.1);
    let op = TwoBodyOperator::new(&g, &pot);
    let f = &sol.field.values;
    let mut af = vec![0.0; f.len()];
    op.apply(f, &mut af);
    let m2 = g.points_per_particle();
    let pot_part: f64 = (0..f.len()).map(|i| op.potential_at(i / m2, i % m2) * f[i] * f[i]).sum();
    let total: f64 = f.iter().zip(&af).map(|(a, b)| a * b).sum();
    let kinetic = (total - pot_part) * g.cell_volume();
    assert!((kinetic - rep.gradient_energy).abs() < 1e-12);
}
