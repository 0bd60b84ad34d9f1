use bosebox::kernels::{
    build_w_and_k, hyperbolic_identity_defect, hyperbolic_split, hyperbolic_split_with, project_eta, verify_prop_eta,
    KernelMatrix,
};
use bosebox::potential::Potential;
use bosebox::twobody::{rescale_to_unit_box, solve_ground_state, BoxGeometry, GridField};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Symmetric kernel whose operator has spectral norm `target`.
fn random_kernel(size: usize, target: f64, seed: u64) -> KernelMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = DMatrix::from_fn(size, size, |_, _| rng.gen_range(-1.0..1.0));
    let a = &b + b.transpose();
    let norm = SymmetricEigen::new(a.clone()).eigenvalues.amax();
    let op = a * (target / norm);
    KernelMatrix::from_operator_matrix(1, size, op, 0.0)
}

fn spectral(op: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let e = SymmetricEigen::new(op.clone());
    let d = DMatrix::from_diagonal(&e.eigenvalues.map(f));
    &e.eigenvectors * d * e.eigenvectors.transpose()
}

#[test]
fn series_matches_spectral_oracle() {
    for seed in 0..5 {
        let eta = random_kernel(50, 0.5, seed);
        let h = hyperbolic_split(&eta);
        let a = eta.operator_matrix();
        let sinh = spectral(&a, f64::sinh);
        let cosh = spectral(&a, f64::cosh);
        assert!((h.sigma.operator_matrix() - sinh).amax() < 1e-10);
        assert!((h.gamma.operator_matrix() - cosh).amax() < 1e-10);
    }
}

#[test]
fn series_matches_oracle_up_to_size_200() {
    for size in [10, 80, 200] {
        let eta = random_kernel(size, 0.9, size as u64);
        let h = hyperbolic_split(&eta);
        let sinh = spectral(&eta.operator_matrix(), f64::sinh);
        assert!((h.sigma.operator_matrix() - sinh).amax() < 1e-10);
    }
}

#[test]
fn rank_one_closed_form() {
    let size = 12;
    let theta = 0.7;
    let u = DMatrix::from_fn(size, 1, |i, _| ((i as f64) * 0.37).cos());
    let u = &u / u.norm();
    let proj = &u * u.transpose();
    let eta = KernelMatrix::from_operator_matrix(1, size, &proj * theta, 0.0);
    let h = hyperbolic_split(&eta);
    assert!((h.sigma.operator_matrix() - &proj * theta.sinh()).amax() < 1e-14);
    let mut gamma = &proj * (theta.cosh() - 1.0);
    for i in 0..size {
        gamma[(i, i)] += 1.0;
    }
    assert!((h.gamma.operator_matrix() - gamma).amax() < 1e-14);
}

#[test]
fn truncation_beyond_the_guard_is_negligible() {
    let eta = random_kernel(40, 0.5, 9);
    let full = hyperbolic_split_with(&eta, 60).sigma.hs_norm();
    let more = hyperbolic_split_with(&eta, 90).sigma.hs_norm();
    assert!((full - more).abs() < 1e-14);
}

#[test]
fn hyperbolic_identity() {
    for seed in 0..3 {
        let h = hyperbolic_split(&random_kernel(30, 0.5, seed));
        assert!(hyperbolic_identity_defect(&h) < 1e-12);
    }
}

#[test]
fn free_problem_gives_zero_kernels() {
    let g = BoxGeometry::new(1, 1.0, 8).unwrap();
    let f = GridField::constant(g, 1.0 / 3.0);
    let (w, k) = build_w_and_k(&f, 3.0, 2.0, 4).unwrap();
    assert!(w.sup() < 1e-15 && k.sup() < 1e-15);
    let (eta, _) = project_eta(&k);
    let h = hyperbolic_split(&eta);
    let rep = verify_prop_eta(&eta, &h, 2.0, 3.0, 0.0);
    assert_eq!(rep.eta_hs_ratio, 0.0);
    assert_eq!(rep.r_pointwise_ratio, 0.0);
}

#[test]
fn rejects_grid_mismatch() {
    let f = GridField::constant(BoxGeometry::new(1, 1.0, 8).unwrap(), 1.0);
    assert!(build_w_and_k(&f, 2.0, 1.0, 3).is_err());
    let f = GridField::constant(BoxGeometry::new(1, 2.0, 8).unwrap(), 1.0);
    assert!(build_w_and_k(&f, 2.0, 1.0, 4).is_err());
}

#[test]
fn pipeline_kernels_satisfy_structural_identities() {
    let ell = 4.0;
    let pot = Potential::soft_sphere(1.0, 1.0, 2.0).unwrap();
    let sol = solve_ground_state(&BoxGeometry::new(2, ell, 8).unwrap(), &pot, 1e-10).unwrap();
    let (f_ell, _) = rescale_to_unit_box(&sol);
    let (w, k) = build_w_and_k(&f_ell, ell, 2.0, 8).unwrap();
    assert!(w.asymmetry() < 1e-12);
    let (eta, _) = project_eta(&k);
    let h = hyperbolic_split(&eta);
    let rep = verify_prop_eta(&eta, &h, 2.0, ell, pot.kappa());
    assert!(rep.hyperbolic_identity_defect < 1e-12);
    assert!(rep.max_row_integral < 1e-12, "{}", rep.max_row_integral);
    assert!(rep.max_asymmetry < 1e-12);
    assert!(rep.sigma_ratio.is_finite() && rep.p_ratio.is_finite());
    assert!(rep.regime_ok);
}
