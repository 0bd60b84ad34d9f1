use serde::Serialize;

use super::operator::TwoBodyOperator;
use super::TwoBodySolution;
use crate::par;

/// Measures of the computed minimizer against the reference scales of the
/// three-dimensional estimates (with ℓ^{-3} read as ℓ^{-d}).
#[derive(Debug, Clone, Serialize)]
pub struct PropertyReport {
    pub d: usize,
    pub ell: f64,
    pub m: usize,
    pub kappa: f64,
    pub eigenvalue: f64,
    pub scattering_length: f64,
    /// λ_ℓ ℓ³ / (8π𝔞), NaN when 𝔞 = 0
    pub normalized_eigenvalue: f64,
    /// κ ⟨V⟩ over the grid: the Rayleigh quotient of the constant function
    pub constant_trial_quotient: f64,
    /// (i) ∫ |∇_x f|² + |∇_y f|²
    pub gradient_energy: f64,
    pub gradient_ratio: f64,
    /// (ii) sup |f| and sup |f| ℓ^d
    pub sup_f: f64,
    pub sup_ratio: f64,
    pub min_f: f64,
    /// (iii) ‖ℓ^{-d} − f‖₂ and its ratio to κ/ℓ
    pub l2_deviation: f64,
    pub l2_ratio: f64,
    /// (iii) ‖ℓ^{-d} − f‖₁ and its ratio to κℓ²
    pub l1_deviation: f64,
    pub l1_ratio: f64,
    /// (iv) sup (|x−y| + 1)|1 − ℓ^d f| / κ
    pub decay_ratio: f64,
    /// (v) sup (dist((x+y)/2, ∂Λ)^{5/3} + 1)|∇_{x+y} f| ℓ^d / κ
    pub com_gradient_ratio: f64,
    pub exchange_asymmetry: f64,
    pub residual: f64,
    pub iterations: usize,
}

fn ratio(measure: f64, scale: f64) -> f64 {
    if measure == 0.0 {
        0.0
    } else {
        measure / scale
    }
}

pub fn verify_minimizer_properties(sol: &TwoBodySolution, scattering_length: f64) -> PropertyReport {
    let g = &sol.geometry;
    let f = &sol.field.values;
    let (d, m, h, ell) = (g.d, g.m, g.h(), g.ell);
    let big_m = g.points_per_particle();
    let kappa = sol.potential.kappa();
    let vol = g.cell_volume();
    let c = ell.powi(-(d as i32));
    let ld = ell.powi(d as i32);

    // forward differences between neighbouring cells along all 2d axes
    let strides: Vec<usize> = (0..2 * d).map(|a| m.pow((2 * d - 1 - a) as u32)).collect();
    let grad_sum = par::sum_by(f.len(), |i| {
        let mut s = 0.0;
        for &st in &strides {
            if (i / st) % m != m - 1 {
                let df = f[i + st] - f[i];
                s += df * df;
            }
        }
        s
    });
    let gradient_energy = grad_sum * vol / (h * h);

    let sup_f = par::max_by(f.len(), |i| f[i].abs());
    let min_f = -par::max_by(f.len(), |i| -f[i]);
    let l2_deviation = (par::sum_by(f.len(), |i| (c - f[i]).powi(2)) * vol).sqrt();
    let l1_deviation = par::sum_by(f.len(), |i| (c - f[i]).abs()) * vol;

    let decay = par::max_by(f.len(), |i| {
        let (x, y) = (g.decode(i / big_m), g.decode(i % big_m));
        let r = (0..d).map(|a| ((x[a] as f64 - y[a] as f64) * h).powi(2)).sum::<f64>().sqrt();
        (r + 1.0) * (1.0 - ld * f[i]).abs()
    });

    // (∇_x + ∇_y) f by central differences along the diagonal shift, with
    // mirrored ghosts at the faces
    let com = par::max_by(f.len(), |i| {
        let (xi, yi) = (i / big_m, i % big_m);
        let (x, y) = (g.decode(xi), g.decode(yi));
        let mut grad2 = 0.0;
        let mut dist = f64::INFINITY;
        for a in 0..d {
            let st = m.pow((d - 1 - a) as u32);
            let step = |idx: usize, k: usize, up: bool| -> (usize, usize) {
                if up {
                    if k == m - 1 { (idx, 0) } else { (idx + st, 1) }
                } else if k == 0 {
                    (idx, 0)
                } else {
                    (idx - st, 1)
                }
            };
            let (xp, sxp) = step(xi, x[a], true);
            let (yp, syp) = step(yi, y[a], true);
            let (xm, sxm) = step(xi, x[a], false);
            let (ym, sym) = step(yi, y[a], false);
            let span = (sxp.max(syp) + sxm.max(sym)) as f64 * h;
            let df = if span > 0.0 { (f[xp * big_m + yp] - f[xm * big_m + ym]) / span } else { 0.0 };
            grad2 += df * df;
            let mid = 0.5 * (g.center(x[a]) + g.center(y[a]));
            dist = dist.min(0.5 * ell - mid.abs());
        }
        (dist.powf(5.0 / 3.0) + 1.0) * grad2.sqrt()
    });

    let op = TwoBodyOperator::with_sampling(g, &sol.potential, sol.sampling);
    let a = scattering_length;
    PropertyReport {
        d,
        ell,
        m,
        kappa,
        eigenvalue: sol.eigenvalue,
        scattering_length: a,
        normalized_eigenvalue: if a > 0.0 {
            sol.eigenvalue * ell.powi(3) / (8.0 * std::f64::consts::PI * a)
        } else {
            f64::NAN
        },
        constant_trial_quotient: op.constant_trial_quotient(),
        gradient_energy,
        gradient_ratio: ratio(gradient_energy, kappa * c),
        sup_f,
        sup_ratio: sup_f * ld,
        min_f,
        l2_deviation,
        l2_ratio: ratio(l2_deviation, kappa / ell),
        l1_deviation,
        l1_ratio: ratio(l1_deviation, kappa * ell * ell),
        decay_ratio: ratio(decay, kappa),
        com_gradient_ratio: ratio(com * ld, kappa),
        exchange_asymmetry: sol.field.exchange_asymmetry(),
        residual: sol.residual,
        iterations: sol.iterations,
    }
}
