//! Lower bound on the energy per particle in the thermodynamic limit from a
//! Neumann cell decomposition.

use crate::energy::lhy_energy;
use crate::potential::Potential;
use crate::scattering::scattering_length;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DEFAULT_REGIME: f64 = 0.1;

/// One cell of side ℓ at mean occupation ρℓ³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellProblem {
    pub density: f64,
    pub scattering_length: f64,
    pub kappa: f64,
    pub ell: f64,
    /// Occupation above which the superadditivity bound is used.
    pub p_cut: f64,
    /// A = 1 − C 𝔞 ln(ℓ/𝔞)/ℓ
    pub a_factor: f64,
    /// The constant C multiplying the linear term.
    pub c_lin: f64,
    /// Regime constant c in p_cut = cℓ/κ.
    pub c_regime: f64,
}

impl CellProblem {
    pub fn new(density: f64, a: f64, kappa: f64, ell: f64, c_regime: f64, c_const: f64) -> Result<Self> {
        if !(ell > 0.0) || !(density > 0.0) || !(kappa > 0.0) || !(a >= 0.0) {
            return Err(Error::Domain("need ℓ, ρ, κ > 0 and 𝔞 ≥ 0".into()));
        }
        let a_factor = if a > 0.0 { 1.0 - c_const * a * (ell / a).ln() / ell } else { 1.0 };
        Self::from_parts(density, ell, c_regime * ell / kappa, a_factor, c_const).map(|mut p| {
            p.scattering_length = a;
            p.kappa = kappa;
            p.c_regime = c_regime;
            p
        })
    }

    /// A problem given directly by its objective constants.
    pub fn from_parts(density: f64, ell: f64, p_cut: f64, a_factor: f64, c_lin: f64) -> Result<Self> {
        if a_factor <= 0.0 {
            return Err(Error::Regime(format!("A = {a_factor} ≤ 0: ℓ too small for the bound")));
        }
        if !(p_cut >= 1.0) {
            return Err(Error::Regime(format!("occupancy cutoff {p_cut} is below one particle")));
        }
        Ok(Self {
            density,
            scattering_length: f64::NAN,
            kappa: f64::NAN,
            ell,
            p_cut,
            a_factor,
            c_lin,
            c_regime: f64::NAN,
        })
    }

    /// ρℓ³
    pub fn occupation(&self) -> f64 {
        self.density * self.ell.powi(3)
    }

    /// t²A − tC + ½(ρℓ³ − t)(p A − C)
    pub fn objective(&self, t: f64) -> f64 {
        let (a, c, p, nbar) = (self.a_factor, self.c_lin, self.p_cut, self.occupation());
        t * t * a - t * c + 0.5 * (nbar - t) * (p * a - c)
    }

    /// Per-cell lower bound in units of 4π𝔞/ℓ³ for n particles: n²A − nC
    /// below the cutoff and ⌊n/p⌋(p²A − pC) above it, with the integer
    /// cutoff ⌈p⌉ as the smallest occupation not covered by the first form.
    pub fn cell_bound(&self, n: usize) -> f64 {
        let (a, c) = (self.a_factor, self.c_lin);
        let nf = n as f64;
        if nf < self.p_cut {
            nf * nf * a - nf * c
        } else {
            let p = self.p_cut;
            (nf / p).floor() * (p * p * a - p * c)
        }
    }
}

/// Minimizer of the relaxed objective over t ∈ [1, ρℓ³]: the clamped vertex
/// of the parabola compared with both ends.
pub fn minimize_occupancy(prob: &CellProblem) -> Result<(f64, f64)> {
    let nbar = prob.occupation();
    if !(nbar >= 1.0) {
        return Err(Error::Domain(format!("need at least one particle per cell on average, got ρℓ³ = {nbar}")));
    }
    if prob.a_factor <= 0.0 {
        return Err(Error::Regime(format!("A = {} ≤ 0: ℓ too small for the bound", prob.a_factor)));
    }
    let vertex = (prob.p_cut * prob.a_factor + prob.c_lin) / (4.0 * prob.a_factor);
    let mut best = (1.0, prob.objective(1.0));
    for t in [vertex.clamp(1.0, nbar), nbar] {
        let v = prob.objective(t);
        if v < best.1 {
            best = (t, v);
        }
    }
    Ok(best)
}

/// Largest N handled by the enumeration (number of partitions of N).
pub const MAX_PARTICLES: usize = 60;

/// min Σ_k E(n_k) over Σ n_k = N with `cells` cells. Since the sum does not
/// depend on cell labels, the enumeration runs over partitions of N into at
/// most `cells` parts. `energies[n]` = E(n) for n = 0, …, N.
pub fn brute_force_cell_minimum(n: usize, cells: usize, energies: &[f64]) -> Result<f64> {
    if n > MAX_PARTICLES {
        return Err(Error::Size(format!("{n} particles exceed the enumeration limit {MAX_PARTICLES}")));
    }
    if cells == 0 {
        return Err(Error::Domain("need at least one cell".into()));
    }
    if energies.len() < n + 1 {
        return Err(Error::Dimension(format!("energy table has {} entries, need {}", energies.len(), n + 1)));
    }
    fn go(left: usize, max_part: usize, parts_left: usize, acc: f64, e: &[f64], best: &mut f64) {
        if left == 0 {
            // remaining cells are empty
            let total = acc + parts_left as f64 * e[0];
            if total < *best {
                *best = total;
            }
            return;
        }
        if parts_left == 0 {
            return;
        }
        for k in (1..=max_part.min(left)).rev() {
            go(left - k, k, parts_left - 1, acc + e[k], e, best);
        }
    }
    let mut best = f64::INFINITY;
    go(n, n, cells, 0.0, energies, &mut best);
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub rho: f64,
    pub ell: f64,
    pub p_cut: f64,
    pub bound: f64,
    pub lhy: f64,
    /// bound / lhy
    pub ratio: f64,
    /// bound / (4π𝔞ρ)
    pub leading_ratio: f64,
    pub regime_ok: bool,
    pub c_regime: f64,
    pub c_const: f64,
}

/// For each density: ℓ = (c/4)^{1/2}(κρ)^{−1/2} and the bound
/// 4π𝔞ρ[1 − C(ρ𝔞³)^{1/2} ln(1/ρ) − C(ρ𝔞³)^{1/2}].
pub fn lower_bound_rows(a: f64, kappa: f64, rhos: &[f64], c_regime: f64, c_const: f64) -> Result<Vec<BoundRow>> {
    if !(kappa > 0.0) || !(c_regime > 0.0) {
        return Err(Error::Domain("κ and c must be positive".into()));
    }
    rhos.iter()
        .map(|&rho| {
            if !(rho > 0.0 && rho < 1.0) {
                return Err(Error::Domain(format!("density {rho} outside (0, 1)")));
            }
            let ell = (c_regime / 4.0).sqrt() / (kappa * rho).sqrt();
            let p_cut = c_regime * ell / kappa;
            let gas = (rho * a.powi(3)).sqrt();
            let lead = 4.0 * PI * a * rho;
            let bound = lead * (1.0 - c_const * gas * (1.0 / rho).ln() - c_const * gas);
            let lhy = lhy_energy(rho, a)?;
            let occupancy = 4.0 * rho * ell.powi(3);
            Ok(BoundRow {
                rho,
                ell,
                p_cut,
                bound,
                lhy,
                ratio: if lhy > 0.0 { bound / lhy } else { f64::NAN },
                leading_ratio: if lead > 0.0 { bound / lead } else { f64::NAN },
                regime_ok: p_cut >= occupancy * (1.0 - 1e-12),
                c_regime,
                c_const,
            })
        })
        .collect()
}

/// `lower_bound_rows` with 𝔞 and κ taken from the potential.
pub fn lower_bound_curve(pot: &Potential, rhos: &[f64], c_regime: f64, c_const: f64) -> Result<Vec<BoundRow>> {
    let a = scattering_length(pot)?;
    lower_bound_rows(a, pot.kappa(), rhos, c_regime, c_const)
}
