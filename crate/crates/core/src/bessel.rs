//! Modified Bessel functions of the second kind, K_n(z), for integer order.
//!
//! K_0 and K_1 come from the logarithmic power series for z ≤ 2 and from
//! Steed's continued fraction for z > 2; higher orders follow by upward
//! recurrence, which is stable for K.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 2.0;

/// K_ν(z) for integer ν ≥ 0 and z > 0.
pub fn bessel_k(nu: u32, z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("bessel_k needs z > 0, got {z}")));
    }
    Ok(k_unchecked(nu, z))
}

/// K_ν(z) without argument checking; `z` must be positive and finite.
pub(crate) fn k_unchecked(nu: u32, z: f64) -> f64 {
    let (k0, k1) = k0_k1(z);
    match nu {
        0 => k0,
        1 => k1,
        _ => {
            let (mut km, mut k) = (k0, k1);
            for n in 1..nu {
                let kp = km + 2.0 * n as f64 / z * k;
                km = k;
                k = kp;
            }
            k
        }
    }
}

fn k0_k1(z: f64) -> (f64, f64) {
    if z <= SERIES_LIMIT {
        k0_k1_series(z)
    } else {
        k0_k1_steed(z)
    }
}

fn k0_k1_series(z: f64) -> (f64, f64) {
    let y = 0.25 * z * z;
    let lg = (0.5 * z).ln();
    // I_0, I_1 and the digamma-weighted sums, accumulated together
    let mut i0 = 0.0;
    let mut i1 = 0.0;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut t0 = 1.0; // y^k / (k!)²
    let mut t1 = 1.0; // y^k / (k! (k+1)!)
    let mut psi_k1 = -EULER_GAMMA; // ψ(k+1)
    for k in 0..60 {
        let psi_k2 = psi_k1 + 1.0 / (k as f64 + 1.0); // ψ(k+2)
        i0 += t0;
        i1 += t1;
        s0 += t0 * psi_k1;
        s1 += t1 * (psi_k1 + psi_k2);
        if t0 < 1e-17 * i0.abs() && t1 < 1e-17 * i1.abs() {
            break;
        }
        let kf = k as f64 + 1.0;
        t0 *= y / (kf * kf);
        t1 *= y / (kf * (kf + 1.0));
        psi_k1 = psi_k2;
    }
    let i1 = 0.5 * z * i1;
    let k0 = -lg * i0 + s0;
    let k1 = 1.0 / z + lg * i1 - 0.25 * z * s1;
    (k0, k1)
}

fn k0_k1_steed(x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..10_000 {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0 = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn rejects_nonpositive_argument() {
        assert!(matches!(bessel_k(2, 0.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_k(0, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn small_argument_limit() {
        let z: f64 = 1e-4;
        let v = z * z * bessel_k(2, z).unwrap() / 2.0;
        assert!((v - 1.0).abs() < 1e-7);
    }

    #[test]
    fn derivative_relation() {
        // K_0' = -K_1
        for &z in &[0.3, 1.7, 2.0, 2.3, 6.0, 15.0] {
            let hh = 1e-5 * z;
            let d = (bessel_k(0, z + hh).unwrap() - bessel_k(0, z - hh).unwrap()) / (2.0 * hh);
            assert!(rel(-d, bessel_k(1, z).unwrap()) < 1e-8, "z = {z}");
        }
    }

    #[test]
    fn continuous_across_crossover() {
        let below = k0_k1_series(SERIES_LIMIT);
        let above = k0_k1_steed(SERIES_LIMIT);
        assert!(rel(below.0, above.0) < 1e-14);
        assert!(rel(below.1, above.1) < 1e-14);
    }
}
