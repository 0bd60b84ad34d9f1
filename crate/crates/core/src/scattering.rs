//! Zero-energy s-wave scattering: −u'' + (κ/2)V u = 0 with u(0) = 0, solved
//! outward and normalized so that u(r) = r − 𝔞 past the support of V.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::quad;

pub const DEFAULT_STEPS: usize = 20_000;

/// Default outer radius, three times the interaction range.
pub fn default_r_max(pot: &Potential) -> f64 {
    3.0 * pot.r0()
}

#[derive(Debug, Clone, Serialize)]
pub struct RadialSolution {
    /// Grid radii: the uniform grid with the potential's knots inserted.
    pub radii: Vec<f64>,
    /// u(r) = r f₀(r)
    pub u: Vec<f64>,
    /// u'(r)
    pub du: Vec<f64>,
    pub scattering_length: f64,
    /// Estimated global error of u, from comparison with a run at half the step.
    pub residual: f64,
    /// min f₀
    pub c0: f64,
}

impl RadialSolution {
    /// f₀(r) = u(r)/r at grid point `i` (f₀(0) = u'(0)).
    pub fn f0(&self, i: usize) -> f64 {
        if self.radii[i] == 0.0 {
            self.du[i]
        } else {
            self.u[i] / self.radii[i]
        }
    }
}

/// Summary emitted by the `scatter` command.
#[derive(Debug, Clone, Serialize)]
pub struct ScatteringReport {
    pub a: f64,
    pub a_integral: f64,
    pub residual: f64,
    pub c0: f64,
    pub r_max: f64,
    pub n_steps: usize,
}

pub fn solve_zero_energy(pot: &Potential, r_max: f64, n_steps: usize) -> Result<RadialSolution> {
    if !(r_max > pot.r0()) {
        return Err(Error::Invalid(format!("r_max = {r_max} must exceed R0 = {}", pot.r0())));
    }
    if n_steps < 100 {
        return Err(Error::Invalid(format!("n_steps = {n_steps} must be at least 100")));
    }
    let coarse = normalized(pot, r_max, n_steps)?;
    let fine = normalized(pot, r_max, 2 * n_steps)?;
    // every coarse radius is also a fine radius (same quotients i/n = 2i/2n)
    let mut residual: f64 = 0.0;
    let mut j = 0;
    for (i, &r) in coarse.radii.iter().enumerate() {
        while fine.radii[j] < r {
            j += 1;
        }
        debug_assert_eq!(fine.radii[j], r);
        residual = residual.max((coarse.u[i] - fine.u[j]).abs());
    }
    Ok(RadialSolution { residual, ..coarse })
}

fn grid(pot: &Potential, r_max: f64, n_steps: usize) -> Vec<f64> {
    let mut radii: Vec<f64> = (0..=n_steps).map(|i| r_max * (i as f64 / n_steps as f64)).collect();
    radii.extend(pot.knots().into_iter().filter(|&k| k > 0.0 && k < r_max));
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    radii
}

fn normalized(pot: &Potential, r_max: f64, n_steps: usize) -> Result<RadialSolution> {
    let radii = grid(pot, r_max, n_steps);
    let half_kappa = 0.5 * pot.kappa();
    let mut u = Vec::with_capacity(radii.len());
    let mut du = Vec::with_capacity(radii.len());
    let (mut y, mut dy) = (0.0, 1.0);
    u.push(y);
    du.push(dy);
    for w in radii.windows(2) {
        let (a, b) = (w[0], w[1]);
        let h = b - a;
        // the step lies inside one smooth piece of V
        let q = |r: f64| half_kappa * pot.evaluate_on_piece(r, a, b);
        let (qa, qm, qb) = (q(a), q(a + 0.5 * h), q(b));
        let k1 = (dy, qa * y);
        let k2 = (dy + 0.5 * h * k1.1, qm * (y + 0.5 * h * k1.0));
        let k3 = (dy + 0.5 * h * k2.1, qm * (y + 0.5 * h * k2.0));
        let k4 = (dy + h * k3.1, qb * (y + h * k3.0));
        y += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        dy += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        if !(y > 0.0) {
            return Err(Error::Invalid(format!(
                "radial solution vanished at r = {b}; potential too attractive or corrupt"
            )));
        }
        u.push(y);
        du.push(dy);
    }

    // least-squares fit u = A r + B over the free region r > R0
    let r0 = pot.r0();
    let (mut n, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&r, &v) in radii.iter().zip(&u) {
        if r > r0 {
            n += 1.0;
            sx += r;
            sy += v;
            sxx += r * r;
            sxy += r * v;
        }
    }
    if n < 2.0 {
        return Err(Error::Invalid("fewer than two grid points outside the support".into()));
    }
    let (mx, my) = (sx / n, sy / n);
    let slope = (sxy / n - mx * my) / (sxx / n - mx * mx);
    let intercept = my - slope * mx;
    if !(slope > 0.0) {
        return Err(Error::Invalid("radial solution has nonpositive asymptotic slope".into()));
    }
    for v in u.iter_mut().chain(du.iter_mut()) {
        *v /= slope;
    }
    let scattering_length = -intercept / slope;
    let mut sol = RadialSolution { radii, u, du, scattering_length, residual: 0.0, c0: 0.0 };
    sol.c0 = (0..sol.radii.len()).map(|i| sol.f0(i)).fold(f64::INFINITY, f64::min);
    Ok(sol)
}

/// 𝔞 = (1/8π) ∫ κV f₀ = (κ/2) ∫₀^R0 V(r) r u(r) dr, with u interpolated by
/// cubic Hermite polynomials between grid points.
pub fn scattering_length_via_integral(sol: &RadialSolution, pot: &Potential) -> Result<f64> {
    let (x, w) = quad::gauss_legendre(6);
    let r0 = pot.r0();
    let mut total = 0.0;
    for i in 0..sol.radii.len() - 1 {
        let (a, b) = (sol.radii[i], sol.radii[i + 1]);
        if a >= r0 {
            break;
        }
        let h = b - a;
        let (u0, u1, d0, d1) = (sol.u[i], sol.u[i + 1], sol.du[i] * h, sol.du[i + 1] * h);
        let mut s = 0.0;
        for (&xi, &wi) in x.iter().zip(&w) {
            let t = 0.5 * (xi + 1.0);
            let r = a + t * h;
            let (t2, t3) = (t * t, t * t * t);
            let uu = (2.0 * t3 - 3.0 * t2 + 1.0) * u0
                + (t3 - 2.0 * t2 + t) * d0
                + (-2.0 * t3 + 3.0 * t2) * u1
                + (t3 - t2) * d1;
            s += wi * pot.evaluate_on_piece(r, a, b) * r * uu;
        }
        total += 0.5 * h * s;
    }
    let a_int = 0.5 * pot.kappa() * total;
    let a = sol.scattering_length;
    if (a_int - a).abs() > 1e-6 * a.abs().max(1e-12) {
        return Err(Error::Consistency(format!(
            "scattering length routes disagree: asymptotic {a}, integral {a_int}"
        )));
    }
    Ok(a_int)
}

/// Solves and cross-checks both routes.
pub fn scatter(pot: &Potential, r_max: f64, n_steps: usize) -> Result<ScatteringReport> {
    let sol = solve_zero_energy(pot, r_max, n_steps)?;
    let a_integral = scattering_length_via_integral(&sol, pot)?;
    Ok(ScatteringReport {
        a: sol.scattering_length,
        a_integral,
        residual: sol.residual,
        c0: sol.c0,
        r_max,
        n_steps,
    })
}

/// Scattering length with default resolution.
pub fn scattering_length(pot: &Potential) -> Result<f64> {
    Ok(solve_zero_energy(pot, default_r_max(pot), DEFAULT_STEPS)?.scattering_length)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_equation_has_zero_length() {
        let p = Potential::soft_sphere(1.0, 1.0, 0.0).unwrap();
        let s = solve_zero_energy(&p, 3.0, 1000).unwrap();
        assert_eq!(s.scattering_length, 0.0);
        assert!(s.u.iter().zip(&s.radii).all(|(u, r)| u == r));
        assert_eq!(scattering_length_via_integral(&s, &p).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = Potential::soft_sphere(1.0, 1.0, 1.0).unwrap();
        assert!(solve_zero_energy(&p, 0.5, 1000).is_err());
        assert!(solve_zero_energy(&p, 3.0, 10).is_err());
    }

    #[test]
    fn f0_is_bounded_and_increasing() {
        let p = Potential::truncated_polynomial(3.0, 1.0, 2.0).unwrap();
        let s = solve_zero_energy(&p, 3.0, 4000).unwrap();
        let f: Vec<f64> = (0..s.radii.len()).map(|i| s.f0(i)).collect();
        assert!(f.iter().all(|&v| v > 0.0 && v <= 1.0 + 1e-12));
        assert!(f.windows(2).all(|w| w[1] >= w[0] - 1e-14));
        assert_eq!(s.c0, f[0]);
    }
}
