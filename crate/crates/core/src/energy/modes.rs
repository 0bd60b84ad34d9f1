use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Neumann cosine mode p = π(k₁, …, k_d) on Λ₁ = [−½, ½]^d.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeIndex(pub Vec<u32>);

impl ModeIndex {
    pub fn zero(d: usize) -> Self {
        Self(vec![0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Integer part Σ kᵢ² of p²/π².
    pub fn k2(&self) -> u64 {
        self.0.iter().map(|&k| (k as u64).pow(2)).sum()
    }

    /// p² = π² Σ kᵢ²
    pub fn p2(&self) -> f64 {
        PI * PI * self.k2() as f64
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }

    /// Number of axes with nonzero index.
    pub fn active_axes(&self) -> usize {
        self.0.iter().filter(|&&k| k != 0).count()
    }
}

/// Per-axis normalization: 1 for k = 0, √2 otherwise (unit L² norm on [−½, ½]).
#[inline]
pub fn axis_norm(k: u32) -> f64 {
    if k == 0 {
        1.0
    } else {
        std::f64::consts::SQRT_2
    }
}

/// φ_p(x) = Π √2 cos(πkᵢ(xᵢ + ½)) over axes with kᵢ ≠ 0.
pub fn mode_function(p: &ModeIndex, x: &[f64]) -> f64 {
    p.0.iter()
        .zip(x)
        .map(|(&k, &xi)| if k == 0 { 1.0 } else { axis_norm(k) * (PI * k as f64 * (xi + 0.5)).cos() })
        .product()
}

/// L² norm on Λ₁ of the function with the prefactor (1/2)^{3/2}
/// for every p ≠ 0 and no other normalization.
pub fn half_prefactor_norm(p: &ModeIndex) -> f64 {
    if p.is_zero() {
        1.0
    } else {
        (0.125f64 * 0.5f64.powi(p.active_axes() as i32)).sqrt()
    }
}

/// The `count` modes of lowest p², ties broken lexicographically on the
/// integer tuple.
pub fn lowest_modes(d: usize, count: usize) -> Vec<ModeIndex> {
    let mut kmax = 0u32;
    loop {
        let n = (kmax as usize + 1).pow(d as u32);
        if n >= count {
            let mut all: Vec<ModeIndex> = (0..n)
                .map(|mut lin| {
                    let mut k = vec![0u32; d];
                    for a in (0..d).rev() {
                        k[a] = (lin % (kmax as usize + 1)) as u32;
                        lin /= kmax as usize + 1;
                    }
                    ModeIndex(k)
                })
                .collect();
            all.sort_by(|a, b| a.k2().cmp(&b.k2()).then_with(|| a.cmp(b)));
            // every mode with k2 ≤ kmax² is present in the enumerated cube
            if all[count - 1].k2() <= (kmax as u64).pow(2) || count == 0 {
                all.truncate(count);
                return all;
            }
        }
        kmax += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_mode_is_one() {
        assert_eq!(mode_function(&ModeIndex::zero(3), &[0.1, -0.4, 0.3]), 1.0);
    }

    #[test]
    fn lowest_modes_order() {
        let m = lowest_modes(3, 11);
        let want: Vec<Vec<u32>> = vec![
            vec![0, 0, 0],
            vec![0, 0, 1],
            vec![0, 1, 0],
            vec![1, 0, 0],
            vec![0, 1, 1],
            vec![1, 0, 1],
            vec![1, 1, 0],
            vec![1, 1, 1],
            vec![0, 0, 2],
            vec![0, 2, 0],
            vec![2, 0, 0],
        ];
        assert_eq!(m.into_iter().map(|p| p.0).collect::<Vec<_>>(), want);
    }

    #[test]
    fn half_prefactor_is_not_unit_norm() {
        assert_eq!(half_prefactor_norm(&ModeIndex(vec![1, 1, 1])), 0.125);
        assert_eq!(half_prefactor_norm(&ModeIndex::zero(3)), 1.0);
    }
}
