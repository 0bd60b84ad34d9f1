use bosebox::energy::{lowest_modes, MatrixElementTable, DEFAULT_ORDER};
use bosebox::fock::*;
use bosebox::twobody::{solve_with, BoxGeometry, PotentialSampling, SolverOptions};
use bosebox::Potential;

fn soft(kappa: f64) -> Potential {
    Potential::soft_sphere(1.0, 1.0, kappa).unwrap()
}

fn hamiltonian(kappa: f64, d: usize, ell: f64, n: usize, modes: usize) -> ManyBodyOperator {
    let list = lowest_modes(d, modes);
    let table = MatrixElementTable::new(&soft(kappa), ell, &list, DEFAULT_ORDER).unwrap();
    build_hamiltonian(&table, FockBasis::new(list, n).unwrap()).unwrap()
}

#[test]
fn single_particle_sits_in_the_constant_mode() {
    let s = solve_toy(&soft(1.0), 3, 4.0, 1, 8, DEFAULT_ORDER).unwrap();
    assert!(s.energy.abs() < 1e-12);
    assert!(s.depletion.abs() < 1e-12);
}

#[test]
fn free_gas_is_condensed() {
    for n in 1..=4 {
        let h = hamiltonian(0.0, 3, 4.0, n, 7);
        let (e, v) = ground_state(&h).unwrap();
        assert_eq!(e, 0.0);
        assert!((v[0].abs() - 1.0).abs() < 1e-14);
        assert!(depletion(&v, &h.basis).abs() < 1e-14);
    }
}

#[test]
fn hamiltonian_is_symmetric() {
    let h = hamiltonian(1.0, 3, 3.0, 3, 8);
    assert!(h.asymmetry() < 1e-12);
    let d = h.dense();
    // condensate diagonal element is the constant-mode interaction
    let list = lowest_modes(3, 8);
    let t = MatrixElementTable::new(&soft(1.0), 3.0, &list, DEFAULT_ORDER).unwrap();
    assert!((d[(0, 0)] - 3.0 * t.get(0, 0, 0, 0)).abs() < 1e-12);
}

#[test]
fn energy_nondecreasing_in_coupling_and_depletion_grows_from_zero() {
    let mut last_e = -1.0;
    let mut last_dep = -1.0;
    for &k in &[0.0, 0.01, 0.1, 0.5, 1.0, 2.0] {
        let s = solve_toy(&soft(k), 3, 3.0, 2, 8, DEFAULT_ORDER).unwrap();
        assert!(s.energy >= last_e);
        assert!(s.depletion >= last_dep - 1e-15);
        if k == 0.01 {
            assert!(s.depletion < 1e-3);
        }
        last_e = s.energy;
        last_dep = s.depletion;
    }
}

#[test]
fn energy_falls_as_modes_are_added() {
    let mut last = f64::INFINITY;
    for modes in [1, 4, 7, 8, 11] {
        let s = solve_toy(&soft(1.0), 3, 4.0, 2, modes, DEFAULT_ORDER).unwrap();
        assert!(s.energy <= last + 1e-12, "modes={modes}");
        last = s.energy;
    }
}

#[test]
fn superadditive() {
    let ell = 4.0;
    let e = |n: usize| solve_toy(&soft(1.0), 3, ell, n, 8, DEFAULT_ORDER).unwrap().energy;
    let es: Vec<f64> = (0..=4).map(|n| if n == 0 { 0.0 } else { e(n) }).collect();
    for (a, b) in [(1, 1), (1, 2), (2, 2)] {
        assert!(es[a + b] >= es[a] + es[b] - 1e-10, "E({}) < E({a}) + E({b})", a + b);
    }
}

#[test]
fn box_energy_scales_exactly() {
    let s = solve_toy(&soft(1.0), 3, 4.0, 3, 7, DEFAULT_ORDER).unwrap();
    assert_eq!(s.energy_box * 16.0, s.energy);
}

#[test]
fn dense_and_iterative_agree() {
    let h = hamiltonian(1.0, 3, 3.0, 3, 10);
    let (e1, v1) = ground_state(&h).unwrap();
    let (e2, v2) = ground_state_iterative(&h).unwrap();
    assert!((e1 - e2).abs() < 1e-8 * e1.abs());
    let overlap: f64 = v1.iter().zip(&v2).map(|(a, b)| a * b).sum();
    assert!(overlap.abs() > 1.0 - 1e-6);
}

#[test]
fn two_particles_approach_the_grid_two_body_energy_in_one_dimension() {
    // both discretize −∂²_x − ∂²_y + W(x − y) on the unit square
    let ell = 3.0;
    let g = BoxGeometry::new(1, ell, 240).unwrap();
    let sol = solve_with(&g, &soft(1.0), SolverOptions { tol: 1e-12, max_iter: 500, sampling: PotentialSampling::CellAverage })
        .unwrap();
    let reference = ell * ell * sol.eigenvalue;
    let mut gaps = Vec::new();
    for modes in [2, 4, 8, 16] {
        let s = solve_toy(&soft(1.0), 1, ell, 2, modes, 40).unwrap();
        gaps.push(s.energy - reference);
    }
    for pair in gaps.windows(2) {
        assert!(pair[1] < pair[0], "{gaps:?}");
    }
    assert!(gaps[3] > -1e-3 && gaps[3] < 0.1 * gaps[0], "{gaps:?}");
}
