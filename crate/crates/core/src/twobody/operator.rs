use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::BoxGeometry;
use crate::dct::{transform_all, CosineBasis};
use crate::eigen::SymmetricOperator;
use crate::potential::Potential;
use crate::quad::gauss_legendre_on;

/// How κV(x − y) is discretized on a pair of grid cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialSampling {
    /// Value at the displacement of the two cell centers.
    #[default]
    CellCenter,
    /// Mean of κV(x − y) over x and y ranging through their cells; per axis
    /// the displacement then carries the triangular weight (1 − |t|/h)/h.
    CellAverage,
}

const AVERAGE_NODES: usize = 16;

impl PotentialSampling {
    /// κV at lattice displacement k·h (|k| per axis).
    fn sample(self, pot: &Potential, k: &[usize], h: f64) -> f64 {
        let center2: f64 = k.iter().map(|&c| (c as f64 * h).powi(2)).sum();
        match self {
            PotentialSampling::CellCenter => pot.coupled(center2.sqrt()),
            PotentialSampling::CellAverage => {
                let near2: f64 = k.iter().map(|&c| ((c as f64 - 1.0).max(0.0) * h).powi(2)).sum();
                if near2.sqrt() > pot.r0() || pot.kappa() == 0.0 {
                    return 0.0;
                }
                let (mut t, mut w) = gauss_legendre_on(AVERAGE_NODES, -h, 0.0);
                let (t2, w2) = gauss_legendre_on(AVERAGE_NODES, 0.0, h);
                t.extend(t2);
                w.extend(w2);
                let wt: Vec<f64> = t.iter().zip(&w).map(|(ti, wi)| wi * (1.0 - ti.abs() / h) / h).collect();
                let n = t.len();
                let total = n.pow(k.len() as u32);
                let mut sum = 0.0;
                for mut lin in 0..total {
                    let mut r2 = 0.0;
                    let mut weight = 1.0;
                    for &c in k {
                        let j = lin % n;
                        lin /= n;
                        let u = c as f64 * h + t[j];
                        r2 += u * u;
                        weight *= wt[j];
                    }
                    sum += weight * pot.coupled(r2.sqrt());
                }
                sum
            }
        }
    }
}

/// v ↦ (−Δ_x − Δ_y + κV(x−y)) v with the (2·2d+1)-point Laplacian and mirrored
/// ghost values; V is sampled at cell centers.
pub struct TwoBodyOperator {
    geometry: BoxGeometry,
    big_m: usize,
    inv_h2: f64,
    /// κV at every lattice displacement in {−(m−1), …, m−1}^d
    table: Vec<f64>,
    x_offset: Vec<usize>,
    y_offset: Vec<usize>,
    norm_bound: f64,
    warnings: Vec<String>,
}

impl TwoBodyOperator {
    pub fn new(geometry: &BoxGeometry, pot: &Potential) -> Self {
        Self::with_sampling(geometry, pot, PotentialSampling::CellCenter)
    }

    pub fn with_sampling(geometry: &BoxGeometry, pot: &Potential, sampling: PotentialSampling) -> Self {
        let (d, m, h) = (geometry.d, geometry.m, geometry.h());
        let span = 2 * m - 1;
        let weights: Vec<usize> = (0..d).map(|a| span.pow((d - 1 - a) as u32)).collect();
        let mut cache: HashMap<[usize; 3], f64> = HashMap::new();
        let table: Vec<f64> = (0..span.pow(d as u32))
            .map(|mut idx| {
                let mut key = [0usize; 3];
                for a in 0..d {
                    key[a] = (idx % span).abs_diff(m - 1);
                    idx /= span;
                }
                // V is radial, so the value depends on the sorted |k| only
                key[..d].sort_unstable();
                *cache.entry(key).or_insert_with(|| sampling.sample(pot, &key[..d], h))
            })
            .collect();
        let big_m = geometry.points_per_particle();
        let mut x_offset = Vec::with_capacity(big_m);
        let mut y_offset = Vec::with_capacity(big_m);
        for p in 0..big_m {
            let ix = geometry.decode(p);
            x_offset.push((0..d).map(|a| (ix[a] + m - 1) * weights[a]).sum());
            y_offset.push((0..d).map(|a| ix[a] * weights[a]).sum());
        }
        let vmax = table.iter().copied().fold(0.0, f64::max);
        let inv_h2 = 1.0 / (h * h);
        let mut warnings = Vec::new();
        if pot.kappa() > 0.0 && h > pot.r0() {
            warnings.push(format!("potential under-resolved: grid spacing {h} exceeds the range {}", pot.r0()));
        }
        Self {
            geometry: geometry.clone(),
            big_m,
            inv_h2,
            table,
            x_offset,
            y_offset,
            norm_bound: 8.0 * d as f64 * inv_h2 + vmax,
            warnings,
        }
    }

    pub fn geometry(&self) -> &BoxGeometry {
        &self.geometry
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// κV(x − y) for per-particle indices x, y.
    #[inline]
    pub fn potential_at(&self, x: usize, y: usize) -> f64 {
        self.table[self.x_offset[x] - self.y_offset[y]]
    }

    /// ⟨v, κV v⟩ / ⟨v, v⟩ for the constant trial function.
    pub fn constant_trial_quotient(&self) -> f64 {
        let m = self.big_m;
        crate::par::sum_by(m * m, |i| self.potential_at(i / m, i % m)) / (m * m) as f64
    }
}

/// out += Σ_axes (2v_i − v_{i−1} − v_{i+1}) · s over an m^axes block, with
/// mirrored ghosts.
pub(crate) fn add_neumann_stencil(v: &[f64], out: &mut [f64], m: usize, axes: usize, s: f64) {
    for a in 0..axes {
        let stride = m.pow((axes - 1 - a) as u32);
        let block = m * stride;
        for b0 in (0..v.len()).step_by(block) {
            for i in 0..m {
                let row = b0 + i * stride;
                let left = if i == 0 { row } else { row - stride };
                let right = if i == m - 1 { row } else { row + stride };
                for t in 0..stride {
                    out[row + t] += s * (2.0 * v[row + t] - v[left + t] - v[right + t]);
                }
            }
        }
    }
}

impl SymmetricOperator for TwoBodyOperator {
    fn dim(&self) -> usize {
        self.big_m * self.big_m
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let (d, m, big_m, s) = (self.geometry.d, self.geometry.m, self.big_m, self.inv_h2);
        out.par_chunks_mut(big_m).enumerate().for_each(|(x, row_out)| {
            let row = &v[x * big_m..(x + 1) * big_m];
            let base = self.x_offset[x];
            for (y, o) in row_out.iter_mut().enumerate() {
                *o = self.table[base - self.y_offset[y]] * row[y];
            }
            add_neumann_stencil(row, row_out, m, d, s);
            let ix = self.geometry.decode(x);
            for a in 0..d {
                let stride = m.pow((d - 1 - a) as u32);
                let l = if ix[a] == 0 { x } else { x - stride };
                let r = if ix[a] == m - 1 { x } else { x + stride };
                let vl = &v[l * big_m..(l + 1) * big_m];
                let vr = &v[r * big_m..(r + 1) * big_m];
                for y in 0..big_m {
                    row_out[y] += s * (2.0 * row[y] - vl[y] - vr[y]);
                }
            }
        });
    }

    fn norm_bound(&self) -> f64 {
        self.norm_bound
    }
}

/// Exact inverse of (−Δ_x − Δ_y + σ) in the discrete cosine eigenbasis.
pub struct LaplacePreconditioner {
    m: usize,
    axes: usize,
    basis: CosineBasis,
    /// Laplacian eigenvalue sums per per-particle mode index
    particle_eigs: Vec<f64>,
    sigma: f64,
}

impl LaplacePreconditioner {
    pub fn new(geometry: &BoxGeometry, sigma: f64) -> Self {
        let basis = CosineBasis::new(geometry.m);
        let inv_h2 = 1.0 / geometry.h().powi(2);
        let particle_eigs = (0..geometry.points_per_particle())
            .map(|p| {
                let k = geometry.decode(p);
                (0..geometry.d).map(|a| basis.eigenvalues[k[a]] * inv_h2).sum()
            })
            .collect();
        Self { m: geometry.m, axes: 2 * geometry.d, basis, particle_eigs, sigma }
    }

    pub fn apply(&self, r: &[f64], out: &mut [f64]) {
        out.copy_from_slice(r);
        transform_all(out, self.m, self.axes, &self.basis.matrix, false);
        let big_m = self.particle_eigs.len();
        out.par_chunks_mut(big_m).enumerate().for_each(|(x, row)| {
            let ex = self.particle_eigs[x] + self.sigma;
            for (o, ey) in row.iter_mut().zip(&self.particle_eigs) {
                *o /= ex + ey;
            }
        });
        transform_all(out, self.m, self.axes, &self.basis.matrix, true);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pot(kappa: f64) -> Potential {
        Potential::soft_sphere(1.0, 1.0, kappa).unwrap()
    }

    #[test]
    fn annihilates_constants_without_interaction() {
        let g = BoxGeometry::new(2, 3.0, 5).unwrap();
        let op = TwoBodyOperator::new(&g, &pot(0.0));
        let v = vec![2.5; g.unknowns()];
        let mut out = vec![1.0; g.unknowns()];
        op.apply(&v, &mut out);
        assert!(out.iter().all(|&o| o == 0.0));
    }

    #[test]
    fn is_symmetric() {
        let g = BoxGeometry::new(2, 4.0, 5).unwrap();
        let op = TwoBodyOperator::new(&g, &pot(1.3));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u: Vec<f64> = (0..g.unknowns()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..g.unknowns()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut au = vec![0.0; u.len()];
        let mut av = vec![0.0; u.len()];
        op.apply(&u, &mut au);
        op.apply(&v, &mut av);
        let a: f64 = u.iter().zip(&av).map(|(x, y)| x * y).sum();
        let b: f64 = au.iter().zip(&v).map(|(x, y)| x * y).sum();
        assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn cosine_modes_follow_the_discrete_dispersion() {
        let g = BoxGeometry::new(1, 2.0, 8).unwrap();
        let op = TwoBodyOperator::new(&g, &pot(0.0));
        let b = CosineBasis::new(8);
        let (p, q) = (3, 5);
        let v: Vec<f64> = (0..64).map(|i| b.matrix[p * 8 + i / 8] * b.matrix[q * 8 + i % 8]).collect();
        let mut out = vec![0.0; 64];
        op.apply(&v, &mut out);
        let h = g.h();
        let lam = 4.0 / (h * h) * ((3.0 * std::f64::consts::PI * h / 4.0).sin().powi(2)
            + (5.0 * std::f64::consts::PI * h / 4.0).sin().powi(2));
        for (o, vi) in out.iter().zip(&v) {
            assert!((o - lam * vi).abs() < 1e-12);
        }
    }

    #[test]
    fn preconditioner_inverts_shifted_laplacian() {
        let g = BoxGeometry::new(2, 3.0, 4).unwrap();
        let op = TwoBodyOperator::new(&g, &pot(0.0));
        let pre = LaplacePreconditioner::new(&g, 0.7);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let r: Vec<f64> = (0..g.unknowns()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut z = vec![0.0; r.len()];
        pre.apply(&r, &mut z);
        let mut az = vec![0.0; r.len()];
        op.apply(&z, &mut az);
        for i in 0..r.len() {
            assert!((az[i] + 0.7 * z[i] - r[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn cell_average_of_a_wide_plateau_is_the_plateau() {
        let g = BoxGeometry::new(2, 2.0, 4).unwrap();
        let op = TwoBodyOperator::with_sampling(&g, &Potential::soft_sphere(1.0, 10.0, 0.5).unwrap(), PotentialSampling::CellAverage);
        for x in 0..16 {
            for y in 0..16 {
                assert!((op.potential_at(x, y) - 0.5).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn cell_average_smooths_the_sphere_edge() {
        let g = BoxGeometry::new(1, 4.0, 8).unwrap();
        let pot = pot(1.0);
        let c = TwoBodyOperator::new(&g, &pot);
        let a = TwoBodyOperator::with_sampling(&g, &pot, PotentialSampling::CellAverage);
        // displacement 2h = 1.0 sits on the edge of the support
        assert_eq!(c.potential_at(2, 0), 1.0);
        let v = a.potential_at(2, 0);
        assert!(v > 0.4 && v < 0.6, "{v}");
        // ∫ V(u) du is preserved by the averaging: Σ_k V_k h = 2R0
        let total: f64 = (0..8).map(|k| a.potential_at(k, 0) * if k == 0 { 1.0 } else { 2.0 }).sum::<f64>() * g.h();
        assert!((total - 2.0).abs() < 1e-3, "{total}");
    }

    #[test]
    fn warns_when_potential_is_under_resolved() {
        let g = BoxGeometry::new(1, 10.0, 4).unwrap();
        let op = TwoBodyOperator::new(&g, &pot(1.0));
        assert_eq!(op.warnings().len(), 1);
    }
}
