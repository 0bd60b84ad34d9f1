//! Correlation kernels on the unit box Λ₁: w_ℓ = 1 − ℓ^d f_ℓ, k = −n w_ℓ,
//! η = QkQ, and the operator functions sinh(η), cosh(η).

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::twobody::{BoxGeometry, GridField};

pub const SERIES_GUARD: usize = 60;
pub const DEFAULT_COARSE: usize = 8;

/// Integral kernel c·δ(x−y) + K(x, y) on an m^d cell-centered grid of Λ₁.
/// Operator composition carries the quadrature weight h^d:
/// (AB)(x, y) = Σ_z A(x, z) B(z, y) h^d.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub d: usize,
    pub m: usize,
    /// Coefficient of the identity (δ) part.
    pub identity: f64,
    pub values: DMatrix<f64>,
    pub symmetric: bool,
}

impl KernelMatrix {
    pub fn zeros(d: usize, m: usize) -> Self {
        let n = m.pow(d as u32);
        Self { d, m, identity: 0.0, values: DMatrix::zeros(n, n), symmetric: true }
    }

    pub fn from_values(d: usize, m: usize, values: DMatrix<f64>) -> Result<Self> {
        let n = m.pow(d as u32);
        if values.nrows() != n || values.ncols() != n {
            return Err(Error::Dimension(format!("kernel must be {n}×{n}, got {}×{}", values.nrows(), values.ncols())));
        }
        let symmetric = values == values.transpose();
        Ok(Self { d, m, identity: 0.0, values, symmetric })
    }

    pub fn size(&self) -> usize {
        self.values.nrows()
    }

    /// Quadrature weight h^d.
    pub fn weight(&self) -> f64 {
        (self.m as f64).powi(-(self.d as i32))
    }

    /// Matrix of the operator on grid values: c·I + K h^d.
    pub fn operator_matrix(&self) -> DMatrix<f64> {
        let mut a = &self.values * self.weight();
        for i in 0..self.size() {
            a[(i, i)] += self.identity;
        }
        a
    }

    /// Kernel of an operator given by its matrix on grid values, keeping the
    /// identity coefficient `identity` separate.
    pub fn from_operator_matrix(d: usize, m: usize, mut a: DMatrix<f64>, identity: f64) -> Self {
        let n = a.nrows();
        for i in 0..n {
            a[(i, i)] -= identity;
        }
        let w = (m as f64).powi(-(d as i32));
        let values = a / w;
        let symmetric = values == values.transpose();
        Self { d, m, identity, values, symmetric }
    }

    pub fn compose(&self, other: &KernelMatrix) -> Result<KernelMatrix> {
        self.same_grid(other)?;
        let values = &self.values * &other.values * self.weight()
            + &other.values * self.identity
            + &self.values * other.identity;
        let symmetric = values == values.transpose();
        Ok(KernelMatrix { d: self.d, m: self.m, identity: self.identity * other.identity, values, symmetric })
    }

    fn same_grid(&self, other: &KernelMatrix) -> Result<()> {
        if (self.d, self.m) != (other.d, other.m) {
            return Err(Error::Dimension(format!(
                "kernels on different grids: d={}, m={} vs d={}, m={}",
                self.d, self.m, other.d, other.m
            )));
        }
        Ok(())
    }

    /// Hilbert–Schmidt norm of the kernel part: (Σ K² h^{2d})^{1/2}.
    pub fn hs_norm(&self) -> f64 {
        self.values.norm() * self.weight()
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// max |K(x, y) − K(y, x)|
    pub fn asymmetry(&self) -> f64 {
        let n = self.size();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                worst = worst.max((self.values[(i, j)] - self.values[(j, i)]).abs());
            }
        }
        worst
    }

    /// ‖K_x‖₂ = (Σ_y K(x, y)² h^d)^{1/2} for every row x.
    pub fn row_norms(&self) -> Vec<f64> {
        let w = self.weight();
        (0..self.size()).map(|i| (self.values.row(i).norm_squared() * w).sqrt()).collect()
    }

    /// max_x |Σ_y K(x, y) h^d|, i.e. how far the kernel is from annihilating constants.
    pub fn max_row_integral(&self) -> f64 {
        let w = self.weight();
        (0..self.size()).map(|i| (self.values.row(i).sum() * w).abs()).fold(0.0, f64::max)
    }

    fn decode(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for a in (0..self.d).rev() {
            out[a] = idx % self.m;
            idx /= self.m;
        }
        out
    }

    /// (∫∫ |∇_x K|² + |∇_y K|²)^{1/2} by forward differences between cells.
    pub fn gradient_hs_norm(&self) -> f64 {
        let (d, m) = (self.d, self.m);
        let h = 1.0 / m as f64;
        let n = self.size();
        let mut s = 0.0;
        for a in 0..d {
            let st = m.pow((d - 1 - a) as u32);
            for i in 0..n {
                if self.decode(i)[a] == m - 1 {
                    continue;
                }
                for j in 0..n {
                    // both arguments, using K(x, y) and K(y, x) for the y-derivative
                    let dx = self.values[(i + st, j)] - self.values[(i, j)];
                    let dy = self.values[(j, i + st)] - self.values[(j, i)];
                    s += dx * dx + dy * dy;
                }
            }
        }
        (s / (h * h)).sqrt() * self.weight()
    }

    /// Distance between cell centers of grid points i and j.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.decode(i), self.decode(j));
        let h = 1.0 / self.m as f64;
        (0..self.d).map(|k| ((a[k] as f64 - b[k] as f64) * h).powi(2)).sum::<f64>().sqrt()
    }
}

/// Restricts a unit-box field to a coarser grid by averaging the fine cells.
pub fn restrict(field: &GridField, coarse_m: usize) -> Result<DMatrix<f64>> {
    let g = &field.geometry;
    if g.ell != 1.0 {
        return Err(Error::Dimension(format!("field lives on a box of side {}, expected the unit box", g.ell)));
    }
    if coarse_m == 0 || g.m % coarse_m != 0 {
        return Err(Error::Dimension(format!("coarse grid {coarse_m} does not divide the field grid {}", g.m)));
    }
    let ratio = g.m / coarse_m;
    let d = g.d;
    let coarse = BoxGeometry { d, ell: 1.0, m: coarse_m };
    let big_m = g.points_per_particle();
    let nc = coarse.points_per_particle();
    let map = |p: usize| -> usize {
        let ix = g.decode(p);
        (0..d).fold(0, |acc, a| acc * coarse_m + ix[a] / ratio)
    };
    let cell: Vec<usize> = (0..big_m).map(map).collect();
    let mut out = DMatrix::zeros(nc, nc);
    for x in 0..big_m {
        for y in 0..big_m {
            out[(cell[x], cell[y])] += field.values[x * big_m + y];
        }
    }
    Ok(out / (ratio.pow(2 * d as u32) as f64))
}

/// w_ℓ = 1 − ℓ^d f_ℓ and k = −n w_ℓ on the coarse grid.
pub fn build_w_and_k(f_ell: &GridField, ell: f64, n: f64, coarse_m: usize) -> Result<(KernelMatrix, KernelMatrix)> {
    let d = f_ell.geometry.d;
    let f = restrict(f_ell, coarse_m)?;
    let ld = ell.powi(d as i32);
    let w = f.map(|v| 1.0 - ld * v);
    let k = &w * (-n);
    Ok((KernelMatrix::from_values(d, coarse_m, w)?, KernelMatrix::from_values(d, coarse_m, k)?))
}

/// η = QkQ with Q = 1 − |φ₀⟩⟨φ₀|, and μ = η − k.
pub fn project_eta(k: &KernelMatrix) -> (KernelMatrix, KernelMatrix) {
    let n = k.size();
    let w = k.weight();
    let row: Vec<f64> = (0..n).map(|i| k.values.row(i).sum() * w).collect();
    let col: Vec<f64> = (0..n).map(|j| k.values.column(j).sum() * w).collect();
    let total = k.values.sum() * w * w;
    let mu = DMatrix::from_fn(n, n, |i, j| -col[j] - row[i] + total);
    let eta = &k.values + &mu;
    let sym = k.symmetric;
    let make = |values: DMatrix<f64>| KernelMatrix { d: k.d, m: k.m, identity: 0.0, symmetric: sym, values };
    let (mut eta, mut mu) = (make(eta), make(mu));
    if sym {
        symmetrize(&mut eta.values);
        symmetrize(&mut mu.values);
    }
    (eta, mu)
}

fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let s = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = s;
            a[(j, i)] = s;
        }
    }
}

#[derive(Debug, Clone)]
pub struct HyperbolicKernels {
    /// sinh(η)
    pub sigma: KernelMatrix,
    /// cosh(η) = 1 + p
    pub gamma: KernelMatrix,
    pub p: KernelMatrix,
    /// sinh(η) − η
    pub r: KernelMatrix,
    pub terms: usize,
}

/// Power series for sinh and cosh of the operator with kernel η; terms are
/// added until they no longer change the partial sums (guarded at 60).
pub fn hyperbolic_split(eta: &KernelMatrix) -> HyperbolicKernels {
    hyperbolic_split_with(eta, SERIES_GUARD)
}

pub fn hyperbolic_split_with(eta: &KernelMatrix, guard: usize) -> HyperbolicKernels {
    let a = eta.operator_matrix();
    let a2 = &a * &a;
    // odd powers for sinh, even powers (from the square on) for cosh − 1
    let mut odd = a.clone();
    let mut even = a2.clone() * 0.5;
    let mut sinh = odd.clone();
    let mut cosh_m1 = even.clone();
    let mut terms = 1;
    for k in 1..guard {
        let kf = k as f64;
        odd = &a2 * &odd / ((2.0 * kf) * (2.0 * kf + 1.0));
        even = &a2 * &even / ((2.0 * kf + 1.0) * (2.0 * kf + 2.0));
        let before = (sinh.clone(), cosh_m1.clone());
        sinh += &odd;
        cosh_m1 += &even;
        terms = k + 1;
        if sinh == before.0 && cosh_m1 == before.1 {
            break;
        }
    }
    let (d, m) = (eta.d, eta.m);
    let mut sigma = KernelMatrix::from_operator_matrix(d, m, sinh, 0.0);
    let mut p = KernelMatrix::from_operator_matrix(d, m, cosh_m1, 0.0);
    if eta.symmetric {
        symmetrize(&mut sigma.values);
        symmetrize(&mut p.values);
        sigma.symmetric = true;
        p.symmetric = true;
    }
    let mut gamma = p.clone();
    gamma.identity = 1.0;
    let r = KernelMatrix { values: &sigma.values - &eta.values, ..sigma.clone() };
    HyperbolicKernels { sigma, gamma, p, r, terms }
}

/// Largest entry of the operator matrix of γ² − σ² − 1.
pub fn hyperbolic_identity_defect(h: &HyperbolicKernels) -> f64 {
    let g = h.gamma.operator_matrix();
    let s = h.sigma.operator_matrix();
    let mut defect = &g * &g - &s * &s;
    for i in 0..defect.nrows() {
        defect[(i, i)] -= 1.0;
    }
    defect.iter().fold(0.0, |a, v| a.max(v.abs()))
}

fn ratio(measure: f64, scale: f64) -> f64 {
    if measure == 0.0 {
        0.0
    } else {
        measure / scale
    }
}

/// Measured kernel norms against the reference scales of the η estimates.
#[derive(Debug, Clone, Serialize)]
pub struct EtaReport {
    pub n: f64,
    pub ell: f64,
    pub kappa: f64,
    pub coarse_m: usize,
    pub n_over_ell: f64,
    /// n/ℓ ≤ 1
    pub regime_ok: bool,
    pub eta_hs: f64,
    /// ‖η‖₂ / (κn/ℓ)
    pub eta_hs_ratio: f64,
    pub eta_gradient_hs: f64,
    /// ‖∇η‖₂ / (κ^{1/2} n ℓ^{-1/2})
    pub eta_gradient_ratio: f64,
    pub eta_sup: f64,
    /// sup|η| / n
    pub eta_sup_ratio: f64,
    /// sup |η(x,y)| (|x−y| + ℓ^{-1}) ℓ / (κn)
    pub eta_decay_ratio: f64,
    pub eta_row_sup: f64,
    /// sup_x ‖η_x‖ / (κn/ℓ)
    pub eta_row_ratio: f64,
    /// ‖σ‖₂ / ‖η‖₂
    pub sigma_ratio: f64,
    /// ‖p‖₂ / ‖η‖₂
    pub p_ratio: f64,
    /// sup |r(x,y)| / (‖η‖₂ ‖η_x‖ ‖η_y‖)
    pub r_pointwise_ratio: f64,
    /// sup |p(x,y)| / (‖η_x‖ ‖η_y‖)
    pub p_pointwise_ratio: f64,
    pub hyperbolic_identity_defect: f64,
    pub max_asymmetry: f64,
    /// max over η, σ, p of max_x |∫ K(x, y) dy|
    pub max_row_integral: f64,
    pub series_terms: usize,
}

pub fn verify_prop_eta(
    eta: &KernelMatrix,
    hyp: &HyperbolicKernels,
    n: f64,
    ell: f64,
    kappa: f64,
) -> EtaReport {
    let eta_hs = eta.hs_norm();
    let rows = eta.row_norms();
    let size = eta.size();
    let mut decay: f64 = 0.0;
    let mut rp: f64 = 0.0;
    let mut pp: f64 = 0.0;
    for i in 0..size {
        for j in 0..size {
            let e = eta.values[(i, j)].abs();
            decay = decay.max(e * (eta.distance(i, j) + 1.0 / ell));
            let rr = hyp.r.values[(i, j)].abs();
            let pv = hyp.p.values[(i, j)].abs();
            rp = rp.max(ratio(rr, eta_hs * rows[i] * rows[j]));
            pp = pp.max(ratio(pv, rows[i] * rows[j]));
        }
    }
    let eta_grad = eta.gradient_hs_norm();
    let eta_sup = eta.sup();
    let row_sup = rows.iter().copied().fold(0.0, f64::max);
    let scale = kappa * n / ell;
    EtaReport {
        n,
        ell,
        kappa,
        coarse_m: eta.m,
        n_over_ell: n / ell,
        regime_ok: n / ell <= 1.0,
        eta_hs,
        eta_hs_ratio: ratio(eta_hs, scale),
        eta_gradient_hs: eta_grad,
        eta_gradient_ratio: ratio(eta_grad, kappa.sqrt() * n / ell.sqrt()),
        eta_sup,
        eta_sup_ratio: ratio(eta_sup, n),
        eta_decay_ratio: ratio(decay, scale),
        eta_row_sup: row_sup,
        eta_row_ratio: ratio(row_sup, scale),
        sigma_ratio: ratio(hyp.sigma.hs_norm(), eta_hs),
        p_ratio: ratio(hyp.p.hs_norm(), eta_hs),
        r_pointwise_ratio: rp,
        p_pointwise_ratio: pp,
        hyperbolic_identity_defect: hyperbolic_identity_defect(hyp),
        max_asymmetry: [eta, &hyp.sigma, &hyp.p, &hyp.r].iter().map(|k| k.asymmetry()).fold(0.0, f64::max),
        max_row_integral: [eta, &hyp.sigma, &hyp.p].iter().map(|k| k.max_row_integral()).fold(0.0, f64::max),
        series_terms: hyp.terms,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_kernel_gives_identity_functions() {
        let eta = KernelMatrix::zeros(1, 6);
        let h = hyperbolic_split(&eta);
        assert_eq!(h.sigma.sup(), 0.0);
        assert_eq!(h.p.sup(), 0.0);
        assert_eq!(h.r.sup(), 0.0);
        assert_eq!(h.gamma.identity, 1.0);
    }

    #[test]
    fn projection_kills_row_integrals() {
        let k = KernelMatrix::from_values(1, 5, DMatrix::from_fn(5, 5, |i, j| (i + j) as f64 + 0.3 * (i * j) as f64)).unwrap();
        let (eta, mu) = project_eta(&k);
        assert!(eta.max_row_integral() < 1e-12);
        let back = &eta.values - &mu.values;
        assert!((back - &k.values).amax() < 1e-12);
    }

    #[test]
    fn projection_of_centered_kernel_is_identity() {
        // rows already integrate to zero
        let k = KernelMatrix::from_values(1, 4, DMatrix::from_fn(4, 4, |i, j| if (i + j) % 2 == 0 { 1.0 } else { -1.0 })).unwrap();
        let (eta, mu) = project_eta(&k);
        assert_eq!(mu.sup(), 0.0);
        assert_eq!(eta.values, k.values);
    }

    #[test]
    fn composition_includes_quadrature_weight() {
        // constant kernel 1 on the unit interval: (1∘1)(x, y) = ∫ dz = 1
        let one = KernelMatrix::from_values(1, 7, DMatrix::from_element(7, 7, 1.0)).unwrap();
        let sq = one.compose(&one).unwrap();
        assert!((sq.values.add_scalar(-1.0)).amax() < 1e-14);
    }

    #[test]
    fn restriction_averages_cells() {
        let g = BoxGeometry::new(1, 1.0, 4).unwrap();
        let f = GridField::new(g, (0..16).map(|i| i as f64).collect()).unwrap();
        let c = restrict(&f, 2).unwrap();
        // coarse (0,0) averages fine (0,0),(0,1),(1,0),(1,1) = 0,1,4,5
        assert_eq!(c[(0, 0)], 2.5);
        assert!(restrict(&f, 3).is_err());
    }
}
