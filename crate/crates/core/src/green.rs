//! Resolvent kernels of −Δ + ε: the free kernel in R^D and the Neumann Green
//! function of the cube [−ℓ/2, ℓ/2]^D built from image charges.

use std::f64::consts::PI;

use serde::Serialize;

use crate::bessel::k_unchecked;
use crate::error::{Error, Result};
use crate::par;

pub const DEFAULT_RADIUS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreeKernelSpec {
    pub dim: usize,
    pub eps: f64,
    /// Relative accuracy of the Bessel evaluations backing the kernel.
    pub bessel_tolerance: f64,
}

impl FreeKernelSpec {
    /// `dim` must be even, or 1 for the exponential one-dimensional kernel.
    pub fn new(dim: usize, eps: f64) -> Result<Self> {
        if dim == 0 || dim > 16 || (dim > 1 && dim % 2 == 1) {
            return Err(Error::Dimension(format!("kernel dimension must be 1 or even and at most 16, got {dim}")));
        }
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::Domain(format!("epsilon must be positive, got {eps}")));
        }
        Ok(Self { dim, eps, bessel_tolerance: 1e-12 })
    }

    /// Kernel as a function of the distance r > 0.
    pub fn radial(&self, r: f64) -> f64 {
        let s = self.eps.sqrt();
        if self.dim == 1 {
            return (-s * r).exp() / (2.0 * s);
        }
        let nu = (self.dim / 2 - 1) as u32;
        let z = s * r;
        (2.0 * PI).powf(-(self.dim as f64) / 2.0) * (s / r).powi(nu as i32) * k_unchecked(nu, z)
    }

    /// dG̃/dr at distance r > 0.
    pub fn radial_derivative(&self, r: f64) -> f64 {
        let s = self.eps.sqrt();
        if self.dim == 1 {
            return -0.5 * (-s * r).exp();
        }
        // d/dz [z^{-ν} K_ν(z)] = −z^{-ν} K_{ν+1}(z)
        let nu = (self.dim / 2 - 1) as u32;
        let z = s * r;
        -(2.0 * PI).powf(-(self.dim as f64) / 2.0) * (s / r).powi(nu as i32) * s * k_unchecked(nu + 1, z)
    }
}

fn check_dim(spec: &FreeKernelSpec, v: &[f64]) -> Result<()> {
    if v.len() != spec.dim {
        return Err(Error::Dimension(format!("expected a {}-vector, got length {}", spec.dim, v.len())));
    }
    Ok(())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// G̃_ε(x)
pub fn free_kernel(spec: &FreeKernelSpec, x: &[f64]) -> Result<f64> {
    check_dim(spec, x)?;
    let r = norm(x);
    if r == 0.0 {
        return Err(Error::Singular("free kernel evaluated at the origin".into()));
    }
    Ok(spec.radial(r))
}

/// ∇G̃_ε(x)
pub fn free_kernel_gradient(spec: &FreeKernelSpec, x: &[f64]) -> Result<Vec<f64>> {
    check_dim(spec, x)?;
    let r = norm(x);
    if r == 0.0 {
        return Err(Error::Singular("free kernel gradient evaluated at the origin".into()));
    }
    let g = spec.radial_derivative(r) / r;
    Ok(x.iter().map(|c| g * c).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct ImageChargeSet {
    pub source: Vec<f64>,
    /// Reflection multi-indices n ≠ 0, in lexicographic order.
    pub indices: Vec<Vec<i64>>,
    pub points: Vec<Vec<f64>>,
    pub radius: usize,
}

/// n-th image coordinate: nℓ + (−1)^n y.
#[inline]
pub fn image_coordinate(n: i64, ell: f64, y: f64) -> f64 {
    let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    n as f64 * ell + sign * y
}

fn check_in_cube(ell: f64, p: &[f64], what: &str) -> Result<()> {
    if !(ell > 0.0) {
        return Err(Error::Domain(format!("box side must be positive, got {ell}")));
    }
    if let Some(c) = p.iter().find(|c| !(c.abs() <= 0.5 * ell)) {
        return Err(Error::Domain(format!("{what} coordinate {c} lies outside the cube of side {ell}")));
    }
    Ok(())
}

/// Decodes a linear index over [−R, R]^D (last axis fastest).
fn multi_index(mut lin: usize, radius: usize, dim: usize, out: &mut [i64]) {
    let w = 2 * radius + 1;
    for j in (0..dim).rev() {
        out[j] = (lin % w) as i64 - radius as i64;
        lin /= w;
    }
}

pub fn enumerate_images(ell: f64, y: &[f64], radius: usize) -> Result<ImageChargeSet> {
    check_in_cube(ell, y, "source")?;
    if radius < 1 {
        return Err(Error::Invalid("image radius must be at least 1".into()));
    }
    let dim = y.len();
    let total = (2 * radius + 1).checked_pow(dim as u32).filter(|&t| t <= 50_000_000).ok_or_else(|| {
        Error::Size(format!("(2·{radius}+1)^{dim} images are too many to store"))
    })?;
    let mut indices = Vec::with_capacity(total - 1);
    let mut points = Vec::with_capacity(total - 1);
    let mut n = vec![0i64; dim];
    for lin in 0..total {
        multi_index(lin, radius, dim, &mut n);
        if n.iter().all(|&c| c == 0) {
            continue;
        }
        points.push(n.iter().zip(y).map(|(&nj, &yj)| image_coordinate(nj, ell, yj)).collect());
        indices.push(n.clone());
    }
    Ok(ImageChargeSet { source: y.to_vec(), indices, points, radius })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreenValue {
    pub value: f64,
    /// Bound on the omitted images: Σ_{k>R} [(2k+1)^D − (2k−1)^D] G̃((k−1)ℓ).
    pub tail_estimate: f64,
}

/// Σ over |n_j| ≤ R of G̃(x − y_n), including n = 0.
fn image_sum(spec: &FreeKernelSpec, ell: f64, x: &[f64], y: &[f64], radius: usize) -> f64 {
    let dim = spec.dim;
    let total = (2 * radius + 1).pow(dim as u32);
    par::sum_by(total, |lin| {
        let mut n = [0i64; 16];
        multi_index(lin, radius, dim, &mut n[..dim]);
        let mut r2 = 0.0;
        for j in 0..dim {
            let d = x[j] - image_coordinate(n[j], ell, y[j]);
            r2 += d * d;
        }
        if r2 == 0.0 {
            f64::INFINITY
        } else {
            spec.radial(r2.sqrt())
        }
    })
}

pub fn tail_estimate(spec: &FreeKernelSpec, ell: f64, radius: usize) -> f64 {
    if radius == 0 {
        return f64::INFINITY;
    }
    let dim = spec.dim as i32;
    let mut total = 0.0;
    for k in radius + 1..radius + 100_000 {
        let kf = k as f64;
        let count = (2.0 * kf + 1.0).powi(dim) - (2.0 * kf - 1.0).powi(dim);
        let term = count * spec.radial((kf - 1.0) * ell);
        total += term;
        if term <= 1e-17 * total || term == 0.0 {
            break;
        }
    }
    total
}

/// Neumann Green function G_ε(x, y), symmetrized by evaluating the image
/// construction from both arguments.
pub fn neumann_green(spec: &FreeKernelSpec, ell: f64, x: &[f64], y: &[f64], radius: usize) -> Result<GreenValue> {
    check_dim(spec, x)?;
    check_dim(spec, y)?;
    check_in_cube(ell, x, "x")?;
    check_in_cube(ell, y, "y")?;
    if x == y {
        return Err(Error::Singular("Green function evaluated on the diagonal".into()));
    }
    let a = image_sum(spec, ell, x, y, radius);
    let b = image_sum(spec, ell, y, x, radius);
    let value = 0.5 * (a + b);
    if !value.is_finite() {
        return Err(Error::Singular("an image charge coincides with the evaluation point".into()));
    }
    Ok(GreenValue { value, tail_estimate: tail_estimate(spec, ell, radius) })
}

/// ∇_x G_ε(x, y) from the truncated image sum.
pub fn neumann_green_gradient(
    spec: &FreeKernelSpec,
    ell: f64,
    x: &[f64],
    y: &[f64],
    radius: usize,
) -> Result<Vec<f64>> {
    check_dim(spec, x)?;
    check_dim(spec, y)?;
    check_in_cube(ell, y, "y")?;
    let dim = spec.dim;
    let total = (2 * radius + 1).pow(dim as u32);
    let component = |i: usize| {
        par::sum_by(total, |lin| {
            let mut n = [0i64; 16];
            multi_index(lin, radius, dim, &mut n[..dim]);
            let mut d = [0.0; 16];
            for j in 0..dim {
                d[j] = x[j] - image_coordinate(n[j], ell, y[j]);
            }
            let r = norm(&d[..dim]);
            if r == 0.0 {
                f64::NAN
            } else {
                spec.radial_derivative(r) * d[i] / r
            }
        })
    };
    let grad: Vec<f64> = (0..dim).map(component).collect();
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Singular("an image charge coincides with the evaluation point".into()));
    }
    Ok(grad)
}

#[derive(Debug, Clone, Serialize)]
pub struct GreenSample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub green: f64,
    /// G_ε / (|x−y|^{-4} + (ℓ⁶ε)^{-1})
    pub ratio: f64,
    /// max_i |∂_i G_ε − ∂_i G̃_ε(x−y)| / (Σ_near |x−y_n|^{-5} + (ε^{1/2}ℓ⁶)^{-1})
    pub gradient_ratio: f64,
    /// Whether |x−y|^{-4} is the larger of the two terms in the bound.
    pub near_dominated: bool,
    pub near_images: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GreenBoundsReport {
    pub ell: f64,
    pub eps: f64,
    pub radius: usize,
    pub sup_ratio: f64,
    pub sup_gradient_ratio: f64,
    pub samples: Vec<GreenSample>,
}

/// Empirical constants in the pointwise bounds for the six-dimensional Neumann
/// Green function over the given sample pairs.
pub fn verify_green_bounds(
    spec: &FreeKernelSpec,
    ell: f64,
    pairs: &[(Vec<f64>, Vec<f64>)],
    radius: usize,
) -> Result<GreenBoundsReport> {
    if spec.dim != 6 {
        return Err(Error::Dimension(format!("bounds are stated for D = 6, got {}", spec.dim)));
    }
    let eps = spec.eps;
    let mut samples = Vec::with_capacity(pairs.len());
    for (x, y) in pairs {
        let g = neumann_green(spec, ell, x, y, radius)?.value;
        let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        let r = norm(&diff);
        let near_term = r.powi(-4);
        let far_term = 1.0 / (ell.powi(6) * eps);
        let ratio = g / (near_term + far_term);

        let grad = neumann_green_gradient(spec, ell, x, y, radius)?;
        let free = free_kernel_gradient(spec, &diff)?;
        let worst = grad.iter().zip(&free).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        // reflections of y lying within distance ℓ of y, found geometrically
        let set = enumerate_images(ell, y, 1)?;
        let mut near_images = 0;
        let mut near_sum = 0.0;
        for p in &set.points {
            let dy: f64 = norm(&p.iter().zip(y).map(|(a, b)| a - b).collect::<Vec<_>>());
            if dy < ell {
                near_images += 1;
                let dx = norm(&p.iter().zip(x.iter()).map(|(a, b)| a - b).collect::<Vec<_>>());
                near_sum += dx.powi(-5);
            }
        }
        let gradient_ratio = worst / (near_sum + 1.0 / (eps.sqrt() * ell.powi(6)));
        samples.push(GreenSample {
            x: x.clone(),
            y: y.clone(),
            green: g,
            ratio,
            gradient_ratio,
            near_dominated: near_term > far_term,
            near_images,
        });
    }
    let sup_ratio = samples.iter().map(|s| s.ratio).fold(0.0, f64::max);
    let sup_gradient_ratio = samples.iter().map(|s| s.gradient_ratio).fold(0.0, f64::max);
    Ok(GreenBoundsReport { ell, eps, radius, sup_ratio, sup_gradient_ratio, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_dimension_and_bad_eps() {
        assert!(FreeKernelSpec::new(3, 1.0).is_err());
        assert!(FreeKernelSpec::new(6, 0.0).is_err());
        assert!(FreeKernelSpec::new(2, 1.0).is_ok());
    }

    #[test]
    fn origin_is_singular() {
        let s = FreeKernelSpec::new(6, 1.0).unwrap();
        assert!(matches!(free_kernel(&s, &[0.0; 6]), Err(Error::Singular(_))));
    }

    #[test]
    fn one_dimensional_images() {
        let set = enumerate_images(2.0, &[0.5], 1).unwrap();
        assert_eq!(set.points, vec![vec![-2.5], vec![1.5]]);
    }

    #[test]
    fn image_count() {
        assert_eq!(enumerate_images(1.0, &[0.1, -0.2], 1).unwrap().points.len(), 8);
        assert_eq!(enumerate_images(1.0, &[0.1, -0.2, 0.3], 2).unwrap().points.len(), 124);
    }

    #[test]
    fn centered_source_images_are_sign_symmetric() {
        let set = enumerate_images(1.0, &[0.0, 0.0], 2).unwrap();
        for p in &set.points {
            let flipped: Vec<f64> = p.iter().map(|c| -c).collect();
            assert!(set.points.contains(&flipped));
        }
    }

    #[test]
    fn source_outside_cube_is_rejected() {
        assert!(matches!(enumerate_images(1.0, &[0.7], 1), Err(Error::Domain(_))));
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let s = FreeKernelSpec::new(6, 0.7).unwrap();
        let x = [0.3, -0.2, 0.5, 0.1, 0.4, -0.6];
        let g = free_kernel_gradient(&s, &x).unwrap();
        for i in 0..6 {
            let h = 1e-6;
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let fd = (free_kernel(&s, &xp).unwrap() - free_kernel(&s, &xm).unwrap()) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-7 * g[i].abs().max(1e-3));
        }
    }
}
