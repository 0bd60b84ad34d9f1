use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Least-squares line through (ln x, ln |y|).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    /// Standard error of the slope; zero for two points or exact fits.
    pub stderr: f64,
    pub intercept: f64,
    pub points: usize,
}

pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() != ys.len() {
        return Err(Error::Dimension(format!("{} abscissae for {} values", xs.len(), ys.len())));
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientData(format!("slope fit needs at least 3 points, got {}", xs.len())));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite() || *v == 0.0) || xs.iter().any(|&x| x < 0.0) {
        return Err(Error::Domain("log-log fit needs finite nonzero values and positive abscissae".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.abs().ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all sweep values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = (ssr / (k - 2.0) / sxx).sqrt();
    Ok(SlopeFit { slope, stderr, intercept, points: xs.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackedSlope {
    pub quantity: String,
    pub sweep: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub fit: SlopeFit,
    pub expected: Option<f64>,
    pub tolerance: f64,
    /// |slope − expected| ≤ tolerance; true when nothing is expected.
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub config_hash: String,
    pub slopes: Vec<TrackedSlope>,
    pub all_pass: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let xs = [2.0, 3.0, 5.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 / x).collect();
        let f = fit_loglog(&xs, &ys).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_has_zero_slope() {
        let f = fit_loglog(&[1.0, 2.0, 4.0], &[3.0, 3.0, 3.0]).unwrap();
        assert!(f.slope.abs() < 1e-15 && f.stderr < 1e-15);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(fit_loglog(&[1.0, 2.0], &[1.0, 2.0]), Err(Error::InsufficientData(_))));
    }
}
