//! Continuum interaction matrix elements V_{ℓ,pqrs} of the rescaled
//! potential in the Neumann cosine basis.
//!
//! In relative coordinates u = x − y the x-integral factorizes per axis into
//! an elementary trigonometric integral, leaving a d-dimensional radial
//! integral over the support of the potential. That integral is done in
//! polar/spherical coordinates separately on every orthant, where the axis
//! factors are analytic.

use super::modes::ModeIndex;
use crate::potential::Potential;
use crate::quad::gauss_legendre_on;
use crate::{Error, Result};
use rayon::prelude::*;
use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};

pub const DEFAULT_ORDER: usize = 20;
/// Absolute tolerance on the quadrature error estimate, relative to the
/// scale Σ|weights|.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// ∫ cos(πω t + φ) dt over [a, b] for integer ω.
#[inline]
fn cos_integral(omega: i64, phi: f64, a: f64, b: f64) -> f64 {
    if omega == 0 {
        (b - a) * phi.cos()
    } else {
        let w = PI * omega as f64;
        ((w * b + phi).sin() - (w * a + phi).sin()) / w
    }
}

/// Per-axis factor
/// ∫ φ_p(x) φ_r(x) φ_q(x − u) φ_s(x − u) dx over x, x − u ∈ [−½, ½].
pub fn axis_overlap(p: u32, q: u32, r: u32, s: u32, u: f64) -> f64 {
    if u.abs() >= 1.0 {
        return 0.0;
    }
    let (a, b) = if u >= 0.0 { (u, 1.0) } else { (0.0, 1.0 + u) };
    let (p, q, r, s) = (p as i64, q as i64, r as i64, s as i64);
    let alphas = [p - r, p + r];
    let betas = [q - s, q + s];
    let mut total = 0.0;
    for &al in &alphas {
        for &be in &betas {
            let shift = PI * be as f64 * u;
            total += cos_integral(al + be, -shift, a, b) + cos_integral(al - be, shift, a, b);
        }
    }
    let norm = [p, q, r, s].iter().map(|&k| if k == 0 { 1.0 } else { 2.0f64.sqrt() }).product::<f64>();
    norm * total / 8.0
}

/// Quadrature nodes u ∈ ℝ^d with weights already multiplied by the rescaled
/// coupled potential and the polar Jacobian.
#[derive(Debug, Clone)]
struct RelativeRule {
    d: usize,
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl RelativeRule {
    fn new(pot: &Potential, d: usize, order: usize) -> Self {
        let knots = pot.knots();
        let mut radial = Vec::new();
        let mut lo = 0.0;
        for &hi in &knots {
            let (x, w) = gauss_legendre_on(order, lo, hi);
            for (r, wr) in x.into_iter().zip(w) {
                radial.push((r, wr * pot.kappa() * pot.evaluate_on_piece(r, lo, hi)));
            }
            lo = hi;
        }
        // directions in the positive orthant with their surface weights
        let dirs: Vec<([f64; 3], f64)> = match d {
            1 => vec![([1.0, 0.0, 0.0], 1.0)],
            2 => {
                let (t, w) = gauss_legendre_on(order, 0.0, FRAC_PI_2);
                t.into_iter().zip(w).map(|(t, w)| ([t.cos(), t.sin(), 0.0], w)).collect()
            }
            _ => {
                // polar angle itself rather than cos θ keeps the axis
                // components analytic at the pole
                let (th, wth) = gauss_legendre_on(order, 0.0, FRAC_PI_2);
                let (ph, wph) = gauss_legendre_on(order, 0.0, FRAC_PI_2);
                let mut v = Vec::new();
                for (&t, &wt) in th.iter().zip(&wth) {
                    let (st, ct) = t.sin_cos();
                    for (&f, &wf) in ph.iter().zip(&wph) {
                        v.push(([st * f.cos(), st * f.sin(), ct], wt * st * wf));
                    }
                }
                v
            }
        };
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for signs in 0..(1usize << d) {
            for &(dir, wd) in &dirs {
                for &(r, wr) in &radial {
                    if wr == 0.0 {
                        continue;
                    }
                    let mut u = [0.0; 3];
                    for a in 0..d {
                        let sg = if signs >> a & 1 == 1 { -1.0 } else { 1.0 };
                        u[a] = sg * r * dir[a];
                    }
                    points.push(u);
                    weights.push(wr * wd * r.powi(d as i32 - 1));
                }
            }
        }
        Self { d, points, weights }
    }

    fn scale(&self) -> f64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }
}

fn check_support(pot: &Potential, ell: f64) -> Result<Potential> {
    if !(ell > 0.0) || !ell.is_finite() {
        return Err(Error::Domain(format!("box side must be positive, got {ell}")));
    }
    if pot.r0() > ell {
        return Err(Error::Domain(format!(
            "potential range {} exceeds the box side {ell}; relative coordinates leave the box",
            pot.r0()
        )));
    }
    pot.rescaled(ell)
}

fn evaluate_rule(rule: &RelativeRule, p: &ModeIndex, q: &ModeIndex, r: &ModeIndex, s: &ModeIndex) -> f64 {
    let d = rule.d;
    rule.points
        .iter()
        .zip(&rule.weights)
        .map(|(u, w)| {
            let mut prod = *w;
            for a in 0..d {
                prod *= axis_overlap(p.0[a], q.0[a], r.0[a], s.0[a], u[a]);
            }
            prod
        })
        .sum()
}

/// V_{ℓ,pqrs} = ∫∫ κℓ²V(ℓ(x−y)) φ_p(x) φ_q(y) φ_r(x) φ_s(y) dx dy on Λ₁².
///
/// The error estimate compares the rule of the requested order with one of
/// two thirds the order; a precision error is returned when it exceeds
/// `DEFAULT_TOLERANCE` times the quadrature scale.
pub fn matrix_element(
    pot: &Potential,
    ell: f64,
    p: &ModeIndex,
    q: &ModeIndex,
    r: &ModeIndex,
    s: &ModeIndex,
    order: usize,
) -> Result<f64> {
    let d = p.dim();
    if [q, r, s].iter().any(|m| m.dim() != d) || !(1..=3).contains(&d) {
        return Err(Error::Dimension("mode indices must share a dimension in 1..=3".into()));
    }
    let scaled = check_support(pot, ell)?;
    let fine = RelativeRule::new(&scaled, d, order.max(3));
    let coarse = RelativeRule::new(&scaled, d, (2 * order / 3).max(2));
    let v = evaluate_rule(&fine, p, q, r, s);
    let err = (v - evaluate_rule(&coarse, p, q, r, s)).abs();
    let tol = DEFAULT_TOLERANCE * fine.scale().max(f64::MIN_POSITIVE);
    if err > tol {
        return Err(Error::Precision(format!(
            "matrix element quadrature under-resolved: estimated error {err:.3e} above {tol:.3e} at order {order}"
        )));
    }
    Ok(v)
}

/// All V_{ℓ,pqrs} for a mode list, stored densely with index
/// ((p·M + q)·M + r)·M + s.
#[derive(Debug, Clone)]
pub struct MatrixElementTable {
    pub modes: Vec<ModeIndex>,
    pub ell: f64,
    pub values: Vec<f64>,
    /// Largest difference to the reduced-order rule over all elements.
    pub error_estimate: f64,
}

type AxisKey = (usize, u32, u32, u32, u32);

/// Per-axis factor tables at the rule nodes, keyed by the canonical axis
/// quadruple (g is symmetric under p↔r and q↔s).
fn axis_tables(rule: &RelativeRule, modes: &[ModeIndex]) -> HashMap<AxisKey, Vec<f64>> {
    let d = rule.d;
    let mut keys = Vec::new();
    for a in 0..d {
        let mut ks: Vec<u32> = modes.iter().map(|m| m.0[a]).collect();
        ks.sort_unstable();
        ks.dedup();
        for &p in &ks {
            for &r in ks.iter().filter(|&&r| r >= p) {
                for &q in &ks {
                    for &s in ks.iter().filter(|&&s| s >= q) {
                        keys.push((a, p, q, r, s));
                    }
                }
            }
        }
    }
    keys.into_par_iter()
        .map(|k| {
            let (a, p, q, r, s) = k;
            let vals = rule.points.iter().map(|u| axis_overlap(p, q, r, s, u[a])).collect();
            (k, vals)
        })
        .collect()
}

fn axis_key(a: usize, p: u32, q: u32, r: u32, s: u32) -> AxisKey {
    (a, p.min(r), q.min(s), p.max(r), q.max(s))
}

fn table_values(rule: &RelativeRule, modes: &[ModeIndex]) -> Vec<f64> {
    let mm = modes.len();
    let d = rule.d;
    let tables = axis_tables(rule, modes);
    // canonical representative under x↔y relabeling and complex conjugation
    let canon = |p: usize, q: usize, r: usize, s: usize| -> (usize, usize, usize, usize) {
        [(p, q, r, s), (q, p, s, r), (r, s, p, q), (s, r, q, p)].into_iter().min().unwrap()
    };
    let mut reps = Vec::new();
    for p in 0..mm {
        for q in 0..mm {
            for r in 0..mm {
                for s in 0..mm {
                    if canon(p, q, r, s) == (p, q, r, s) {
                        reps.push((p, q, r, s));
                    }
                }
            }
        }
    }
    let computed: Vec<f64> = reps
        .par_iter()
        .map(|&(p, q, r, s)| {
            let cols: Vec<&Vec<f64>> = (0..d)
                .map(|a| &tables[&axis_key(a, modes[p].0[a], modes[q].0[a], modes[r].0[a], modes[s].0[a])])
                .collect();
            let mut acc = 0.0;
            for (i, w) in rule.weights.iter().enumerate() {
                let mut prod = *w;
                for c in &cols {
                    prod *= c[i];
                }
                acc += prod;
            }
            acc
        })
        .collect();
    let lookup: HashMap<(usize, usize, usize, usize), f64> = reps.into_iter().zip(computed).collect();
    let mut values = vec![0.0; mm.pow(4)];
    for p in 0..mm {
        for q in 0..mm {
            for r in 0..mm {
                for s in 0..mm {
                    values[((p * mm + q) * mm + r) * mm + s] = lookup[&canon(p, q, r, s)];
                }
            }
        }
    }
    values
}

impl MatrixElementTable {
    pub fn new(pot: &Potential, ell: f64, modes: &[ModeIndex], order: usize) -> Result<Self> {
        let d = modes.first().map(|m| m.dim()).unwrap_or(0);
        if modes.iter().any(|m| m.dim() != d) || !(1..=3).contains(&d) {
            return Err(Error::Dimension("mode indices must share a dimension in 1..=3".into()));
        }
        let scaled = check_support(pot, ell)?;
        let fine = RelativeRule::new(&scaled, d, order.max(3));
        let coarse = RelativeRule::new(&scaled, d, (2 * order / 3).max(2));
        let values = table_values(&fine, modes);
        let reduced = table_values(&coarse, modes);
        let error_estimate = values.iter().zip(&reduced).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let tol = DEFAULT_TOLERANCE * fine.scale().max(f64::MIN_POSITIVE);
        if error_estimate > tol {
            return Err(Error::Precision(format!(
                "matrix element table under-resolved: estimated error {error_estimate:.3e} above {tol:.3e} at order {order}"
            )));
        }
        Ok(Self { modes: modes.to_vec(), ell, values, error_estimate })
    }

    pub fn len_modes(&self) -> usize {
        self.modes.len()
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let m = self.modes.len();
        self.values[((p * m + q) * m + r) * m + s]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlap_at_zero_is_orthonormality() {
        // u = 0: ∫ φ_p φ_r φ_q φ_s; with q = s = 0 this is δ_pr
        assert!((axis_overlap(2, 0, 2, 0, 0.0) - 1.0).abs() < 1e-14);
        assert!(axis_overlap(1, 0, 2, 0, 0.0).abs() < 1e-14);
        assert!((axis_overlap(0, 0, 0, 0, 0.3) - 0.7).abs() < 1e-14);
    }

    #[test]
    fn overlap_matches_quadrature() {
        let (x, w) = gauss_legendre_on(60, 0.25, 1.0);
        let f = |k: u32, t: f64| if k == 0 { 1.0 } else { 2f64.sqrt() * (PI * k as f64 * t).cos() };
        let direct: f64 = x.iter().zip(&w).map(|(&t, &w)| w * f(1, t) * f(3, t) * f(2, t - 0.25) * f(1, t - 0.25)).sum();
        assert!((axis_overlap(1, 2, 3, 1, 0.25) - direct).abs() < 1e-13);
    }
}
