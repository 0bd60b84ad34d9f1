use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Predicted window |e − 4π𝔞n²/ℓ| ≤ C(n/ℓ + n² ln ℓ / ℓ²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpWindow {
    pub center: f64,
    pub halfwidth: f64,
    pub constant: f64,
}

impl GpWindow {
    pub fn lower(&self) -> f64 {
        self.center - self.halfwidth
    }

    pub fn upper(&self) -> f64 {
        self.center + self.halfwidth
    }

    pub fn contains(&self, e: f64) -> bool {
        (e - self.center).abs() <= self.halfwidth
    }
}

fn window_scale(n: f64, ell: f64) -> f64 {
    n / ell + n * n * ell.ln() / (ell * ell)
}

pub fn gp_energy_window(n: f64, ell: f64, a: f64, constant: f64) -> Result<GpWindow> {
    if !(n >= 0.0) || !(ell >= 1.0) || !(a >= 0.0) {
        return Err(Error::Domain(format!("need n ≥ 0, ℓ ≥ 1 and 𝔞 ≥ 0; got n={n}, ℓ={ell}, 𝔞={a}")));
    }
    Ok(GpWindow {
        center: 4.0 * PI * a * n * n / ell,
        halfwidth: constant * window_scale(n, ell),
        constant,
    })
}

/// Smallest C for which every sample (n, ℓ, e) lies in its window.
pub fn fit_window_constant(samples: &[(f64, f64, f64)], a: f64) -> Result<f64> {
    let mut c: f64 = 0.0;
    for &(n, ell, e) in samples {
        let s = window_scale(n, ell);
        let center = 4.0 * PI * a * n * n / ell;
        if s > 0.0 {
            c = c.max((e - center).abs() / s);
        } else if (e - center).abs() > 0.0 {
            return Err(Error::InsufficientData(format!("sample (n={n}, ℓ={ell}) has zero window scale")));
        }
    }
    if samples.is_empty() {
        return Err(Error::InsufficientData("no samples to fit the window constant".into()));
    }
    Ok(c)
}

/// 128 / (15 √π)
pub fn lhy_coefficient() -> f64 {
    128.0 / (15.0 * PI.sqrt())
}

/// Energy per particle 4πρ𝔞 [1 + 128/(15√π) √(ρ𝔞³)].
pub fn lhy_energy(rho: f64, a: f64) -> Result<f64> {
    if !(rho >= 0.0) || !(a >= 0.0) {
        return Err(Error::Domain(format!("density and scattering length must be nonnegative, got ρ={rho}, 𝔞={a}")));
    }
    let gas = rho * a.powi(3);
    if gas >= 1.0 {
        return Err(Error::Regime(format!("ρ𝔞³ = {gas} is not dilute")));
    }
    Ok(4.0 * PI * rho * a * (1.0 + lhy_coefficient() * gas.sqrt()))
}

/// One row of the b_Λ convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellTrace {
    pub cutoff: f64,
    /// Σ_{0<|p|≤M} cos|p|/p² over p ∈ Z³
    pub raw: f64,
    /// Same sum smoothed by a triangular radial window
    pub averaged: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicGroundState {
    pub energy: f64,
    pub b_lambda: f64,
    pub bogoliubov_sum: f64,
    /// Lattice cutoff |p| ≤ 2π·K of the Bogoliubov sum.
    pub bogoliubov_cutoff: usize,
    /// Largest |summand| on the outermost included shell.
    pub bogoliubov_shell_max: f64,
    /// Asymptotic tail −(8π𝔞)³/(4π² P) beyond the cutoff P, already included.
    pub bogoliubov_tail: f64,
    pub trace: Vec<ShellTrace>,
    /// Change of the averaged sum between the last two trace rows.
    pub b_lambda_spread: f64,
    pub converged: bool,
    pub lattice_convention: String,
}

/// Width of each of the two box windows whose convolution smooths the
/// spherical partial sums of cos|p|/p².
pub const B_LAMBDA_WINDOW: f64 = 2.0 * PI;

/// Number of representations r₃(k) of every k ≤ kmax as a sum of three squares.
fn three_square_counts(kmax: u64) -> Vec<u64> {
    let mut counts = vec![0u64; kmax as usize + 1];
    let r = (kmax as f64).sqrt() as i64 + 1;
    for x in -r..=r {
        let x2 = (x * x) as u64;
        if x2 > kmax {
            continue;
        }
        for y in -r..=r {
            let xy = x2 + (y * y) as u64;
            if xy > kmax {
                continue;
            }
            for z in -r..=r {
                let s = xy + (z * z) as u64;
                if s <= kmax {
                    counts[s as usize] += 1;
                }
            }
        }
    }
    counts
}

/// Weight of a jump at distance t beyond the cutoff under the triangular
/// window of total width 2W.
fn window_weight(t: f64, w: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else if t < w {
        1.0 - 0.5 * (t / w).powi(2)
    } else if t < 2.0 * w {
        0.5 * (2.0 - t / w).powi(2)
    } else {
        0.0
    }
}

fn b_lambda_trace(cutoffs: &[f64]) -> Vec<ShellTrace> {
    let reach = cutoffs.iter().cloned().fold(0.0, f64::max) + 2.0 * B_LAMBDA_WINDOW;
    let kmax = (reach * reach).ceil() as u64;
    let counts = three_square_counts(kmax);
    let shells: Vec<(f64, f64)> = (1..=kmax)
        .filter(|&k| counts[k as usize] > 0)
        .map(|k| {
            let r = (k as f64).sqrt();
            (r, counts[k as usize] as f64 * r.cos() / k as f64)
        })
        .collect();
    cutoffs
        .iter()
        .map(|&m| {
            let raw = shells.iter().filter(|s| s.0 <= m).map(|s| s.1).sum();
            let averaged = shells.iter().map(|s| s.1 * window_weight(s.0 - m, B_LAMBDA_WINDOW)).sum();
            ShellTrace { cutoff: m, raw, averaged }
        })
        .collect()
}

fn bogoliubov_summand(p2: f64, alpha: f64) -> f64 {
    // p² + α − √(p⁴ + 2αp²) − α²/(2p²) with α = 8π𝔞, rewritten without
    // cancellation using (p² ± α)² − (p⁴ + 2αp²) = α² or α² − 4αp².
    let root = (p2 * p2 + 2.0 * alpha * p2).sqrt();
    let num = (alpha * alpha - 4.0 * alpha * p2) / (p2 - alpha + root);
    alpha * alpha * num / (2.0 * p2 * (p2 + alpha + root))
}

/// Σ over p ∈ 2πZ³ \ {0}, |p| ≤ 2πK, extending K until the outermost shell
/// is below `shell_tol` in absolute value.
fn bogoliubov_sum(a: f64, min_k: usize, shell_tol: f64) -> (f64, usize, f64, f64) {
    let alpha = 8.0 * PI * a;
    if alpha == 0.0 {
        return (0.0, min_k, 0.0, 0.0);
    }
    let tp2 = 4.0 * PI * PI;
    // the summand is ≈ −α³/(2p⁴) on large shells
    let mut k = min_k.max(1);
    while alpha.powi(3) / (2.0 * (tp2 * (k * k) as f64).powi(2)) >= shell_tol {
        k += 1;
    }
    let kmax = (k * k) as u64;
    let counts = three_square_counts(kmax);
    let mut by_shell: BTreeMap<u64, f64> = BTreeMap::new();
    for (n, &c) in counts.iter().enumerate().skip(1) {
        if c > 0 {
            by_shell.insert(n as u64, c as f64 * bogoliubov_summand(tp2 * n as f64, alpha));
        }
    }
    // sum from the outside in for accuracy
    let sum: f64 = by_shell.values().rev().sum();
    let shell_max = bogoliubov_summand(tp2 * kmax as f64, alpha).abs();
    let p_cut = 2.0 * PI * k as f64;
    let tail = -alpha.powi(3) / (4.0 * PI * PI * p_cut);
    (sum + tail, k, shell_max, tail)
}

/// e_N ≈ 4π(N−1)𝔞 + b_Λ𝔞² − ½ Σ_p [p² + 8π𝔞 − √(p⁴ + 16π𝔞p²) − (8π𝔞)²/(2p²)].
///
/// b_Λ is estimated from partial sums at cutoffs M, M+10, M+20, …, M+40 in
/// lattice units; `converged` requires the smoothed sum to move by less than
/// 5·10⁻⁴ between the last two cutoffs.
pub fn periodic_ground_state(a: f64, n: f64, cutoff: usize) -> Result<PeriodicGroundState> {
    if cutoff < 4 {
        return Err(Error::Domain(format!("cutoff must be at least 4, got {cutoff}")));
    }
    if !(a >= 0.0) || !(n >= 1.0) {
        return Err(Error::Domain(format!("need 𝔞 ≥ 0 and N ≥ 1, got 𝔞={a}, N={n}")));
    }
    let cutoffs: Vec<f64> = (0..5).map(|i| (cutoff + 10 * i) as f64).collect();
    let trace = b_lambda_trace(&cutoffs);
    let last = trace[trace.len() - 1].averaged;
    let spread = (last - trace[trace.len() - 2].averaged).abs();
    let earlier = (trace[1].averaged - trace[0].averaged).abs();
    let b_lambda = 2.0 - last;
    let converged = spread < 5e-4 && spread <= earlier.max(5e-4);
    let (bog, k, shell_max, tail) = bogoliubov_sum(a, cutoff, 1e-8);
    let energy = 4.0 * PI * (n - 1.0) * a + b_lambda * a * a - 0.5 * bog;
    Ok(PeriodicGroundState {
        energy,
        b_lambda,
        bogoliubov_sum: bog,
        bogoliubov_cutoff: k,
        bogoliubov_shell_max: shell_max,
        bogoliubov_tail: tail,
        trace,
        b_lambda_spread: spread,
        converged,
        lattice_convention: "Bogoliubov sum over 2πZ³\\{0}; b_Λ sum over Z³\\{0}".into(),
    })
}
