//! The two-body problem on the double box Λ_ℓ × Λ_ℓ with Neumann boundary
//! conditions: minimize ∫ κV(x−y)|g|² + |∇_x g|² + |∇_y g|² at ‖g‖₂ = 1.

mod field;
mod operator;
mod properties;

pub use field::{BoxGeometry, GridField};
pub use operator::{LaplacePreconditioner, PotentialSampling, TwoBodyOperator};
pub(crate) use operator::add_neumann_stencil;
pub use properties::{verify_minimizer_properties, PropertyReport};

use serde::Serialize;

use crate::eigen::{lobpcg, LobpcgOptions};
use crate::error::{Error, Result};
use crate::potential::Potential;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 500;

#[derive(Debug, Clone, Serialize)]
pub struct TwoBodySolution {
    /// Minimizer, L²-normalized over Λ_ℓ × Λ_ℓ with positive mean.
    #[serde(skip)]
    pub field: GridField,
    pub geometry: BoxGeometry,
    pub eigenvalue: f64,
    pub iterations: usize,
    pub residual: f64,
    pub history: Vec<f64>,
    pub warnings: Vec<String>,
    pub sampling: PotentialSampling,
    #[serde(skip)]
    pub potential: Potential,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub sampling: PotentialSampling,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER, sampling: PotentialSampling::CellCenter }
    }
}

/// Lowest eigenpair of −Δ_x − Δ_y + κV(x−y) in the exchange-symmetric
/// subspace. `tol` bounds the residual relative to the operator norm bound.
pub fn solve_ground_state(geometry: &BoxGeometry, pot: &Potential, tol: f64) -> Result<TwoBodySolution> {
    solve_with(geometry, pot, SolverOptions { tol, ..Default::default() })
}

pub fn solve_with(geometry: &BoxGeometry, pot: &Potential, opts: SolverOptions) -> Result<TwoBodySolution> {
    if pot.kappa() < 0.0 {
        return Err(Error::Invalid("coupling must be nonnegative".into()));
    }
    let op = TwoBodyOperator::with_sampling(geometry, pot, opts.sampling);
    let pre = LaplacePreconditioner::new(geometry, (std::f64::consts::PI / geometry.ell).powi(2));
    let big_m = geometry.points_per_particle();
    let precond = |r: &[f64], out: &mut [f64]| pre.apply(r, out);
    let project = |v: &mut [f64]| field::symmetrize_in_place(v, big_m);
    let x0 = vec![1.0; geometry.unknowns()];
    let lob = LobpcgOptions { tol: opts.tol, max_iter: opts.max_iter };
    let eig = lobpcg(&op, Some(&precond), Some(&project), x0, lob)?;

    let mut v = eig.vector;
    let sum: f64 = crate::par::sum_by(v.len(), |i| v[i]);
    let scale = if sum < 0.0 { -1.0 } else { 1.0 } / geometry.cell_volume().sqrt();
    crate::par::scale(scale, &mut v);
    let field = GridField::new(geometry.clone(), v)?;
    Ok(TwoBodySolution {
        field,
        geometry: geometry.clone(),
        eigenvalue: eig.value,
        iterations: eig.iterations,
        residual: eig.residual,
        history: eig.history,
        warnings: op.warnings().to_vec(),
        sampling: opts.sampling,
        potential: pot.clone(),
    })
}

/// f_ℓ(x, y) = f(ℓx, ℓy) on Λ₁ × Λ₁ (same array) and the eigenvalue ℓ²λ_ℓ.
pub fn rescale_to_unit_box(sol: &TwoBodySolution) -> (GridField, f64) {
    let ell = sol.geometry.ell;
    (sol.field.rescaled(ell), ell * ell * sol.eigenvalue)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_ground_state_is_constant() {
        let g = BoxGeometry::new(2, 3.0, 5).unwrap();
        let p = Potential::soft_sphere(1.0, 1.0, 0.0).unwrap();
        let s = solve_ground_state(&g, &p, 1e-12).unwrap();
        assert_eq!(s.eigenvalue, 0.0);
        let c = 3f64.powi(-2);
        assert!(s.field.values.iter().all(|v| (v - c).abs() < 1e-14));
        assert_eq!(s.iterations, 0);
    }

    #[test]
    fn rescaling_twice_is_identity() {
        let g = BoxGeometry::new(1, 4.0, 6).unwrap();
        let p = Potential::soft_sphere(1.0, 1.0, 1.0).unwrap();
        let s = solve_ground_state(&g, &p, 1e-10).unwrap();
        let (unit, _) = rescale_to_unit_box(&s);
        let back = unit.rescaled(0.25);
        assert_eq!(back.geometry, s.geometry);
        assert_eq!(back.values, s.field.values);
    }
}
