use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cell-centered tensor grid on Λ_ℓ × Λ_ℓ, Λ_ℓ = [−ℓ/2, ℓ/2]^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxGeometry {
    pub d: usize,
    pub ell: f64,
    pub m: usize,
}

impl BoxGeometry {
    pub fn new(d: usize, ell: f64, m: usize) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::Dimension(format!("spatial dimension must be 1, 2 or 3, got {d}")));
        }
        if m < 4 {
            return Err(Error::Invalid(format!("need at least 4 points per axis, got {m}")));
        }
        if !(ell > 0.0) || !ell.is_finite() {
            return Err(Error::Invalid(format!("box side must be positive, got {ell}")));
        }
        m.checked_pow(2 * d as u32)
            .filter(|&n| n <= 1 << 28)
            .ok_or_else(|| Error::Size(format!("{m}^{} unknowns exceed the supported size", 2 * d)))?;
        Ok(Self { d, ell, m })
    }

    pub fn h(&self) -> f64 {
        self.ell / self.m as f64
    }

    /// Grid points per particle, M = m^d.
    pub fn points_per_particle(&self) -> usize {
        self.m.pow(self.d as u32)
    }

    pub fn unknowns(&self) -> usize {
        self.points_per_particle().pow(2)
    }

    /// Quadrature weight h^{2d} of one cell of the double box.
    pub fn cell_volume(&self) -> f64 {
        self.h().powi(2 * self.d as i32)
    }

    /// Coordinate of cell center i along one axis.
    pub fn center(&self, i: usize) -> f64 {
        -0.5 * self.ell + (i as f64 + 0.5) * self.h()
    }

    /// Per-axis indices of a per-particle index (first axis slowest).
    pub fn decode(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for a in (0..self.d).rev() {
            out[a] = idx % self.m;
            idx /= self.m;
        }
        out
    }

    pub fn rescaled(&self, factor: f64) -> Self {
        Self { ell: self.ell / factor, ..self.clone() }
    }
}

/// Real values on the double-box grid, index (x₁..x_d, y₁..y_d) with the last
/// axis fastest: a row-major M × M matrix with rows labelled by x.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub geometry: BoxGeometry,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn new(geometry: BoxGeometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geometry.unknowns() {
            return Err(Error::Dimension(format!(
                "field has {} values, geometry needs {}",
                values.len(),
                geometry.unknowns()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("field contains non-finite values".into()));
        }
        Ok(Self { geometry, values })
    }

    pub fn constant(geometry: BoxGeometry, c: f64) -> Self {
        let n = geometry.unknowns();
        Self { geometry, values: vec![c; n] }
    }

    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.values[x * self.geometry.points_per_particle() + y]
    }

    pub fn norm_l2(&self) -> f64 {
        let s = crate::par::sum_by(self.values.len(), |i| self.values[i] * self.values[i]);
        (s * self.geometry.cell_volume()).sqrt()
    }

    pub fn norm_l1(&self) -> f64 {
        crate::par::sum_by(self.values.len(), |i| self.values[i].abs()) * self.geometry.cell_volume()
    }

    pub fn mean(&self) -> f64 {
        crate::par::sum_by(self.values.len(), |i| self.values[i]) / self.values.len() as f64
    }

    /// max |f(x, y) − f(y, x)|
    pub fn exchange_asymmetry(&self) -> f64 {
        let m = self.geometry.points_per_particle();
        crate::par::max_by(m * m, |i| (self.values[i] - self.values[(i % m) * m + i / m]).abs())
    }

    /// Same values on the box of side ℓ/factor: g(x, y) = f(factor·x, factor·y).
    pub fn rescaled(&self, factor: f64) -> Self {
        Self { geometry: self.geometry.rescaled(factor), values: self.values.clone() }
    }
}

/// v ← (v + vᵀ)/2 for a row-major M × M matrix.
pub(crate) fn symmetrize_in_place(v: &mut [f64], m: usize) {
    for i in 0..m {
        for j in i + 1..m {
            let s = 0.5 * (v[i * m + j] + v[j * m + i]);
            v[i * m + j] = s;
            v[j * m + i] = s;
        }
    }
}
