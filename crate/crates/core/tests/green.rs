use bosebox::green::{
    free_kernel, free_kernel_gradient, neumann_green, neumann_green_gradient, tail_estimate, verify_green_bounds,
    FreeKernelSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INV_4PI3: f64 = 0.008_062_883_608_299_872; // 1/(4π³)

fn interval_green(eps: f64, ell: f64, x: f64, y: f64) -> f64 {
    let k = eps.sqrt();
    let (lo, hi) = (x.min(y), x.max(y));
    (k * (lo + 0.5 * ell)).cosh() * (k * (0.5 * ell - hi)).cosh() / (k * (k * ell).sinh())
}

#[test]
fn six_dimensional_small_argument_constant() {
    let spec = FreeKernelSpec::new(6, 1e-8).unwrap();
    let mut x = [0.0; 6];
    x[2] = 1.0;
    let v = free_kernel(&spec, &x).unwrap();
    assert!(((v - INV_4PI3) / INV_4PI3).abs() < 1e-4);
}

#[test]
fn radial_symmetry() {
    let spec = FreeKernelSpec::new(6, 0.3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let x: Vec<f64> = (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let mx: Vec<f64> = x.iter().map(|c| -c).collect();
        assert_eq!(free_kernel(&spec, &x).unwrap(), free_kernel(&spec, &mx).unwrap());
    }
}

#[test]
fn large_distance_log_derivative() {
    let spec = FreeKernelSpec::new(6, 1.0).unwrap();
    let mut last = f64::INFINITY;
    for r in [20.0, 80.0, 320.0] {
        let mut x = [0.0; 6];
        x[0] = r;
        let logder = free_kernel_gradient(&spec, &x).unwrap()[0] / free_kernel(&spec, &x).unwrap();
        let dev = (logder + 1.0).abs();
        assert!(dev < last);
        last = dev;
    }
    assert!(last < 0.01);
}

#[test]
fn interval_green_function_from_images() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let ell = rng.gen_range(0.5..4.0);
        let eps = rng.gen_range(0.5..1.0) / (ell * ell);
        let x = rng.gen_range(-0.5..0.5) * ell;
        let y = rng.gen_range(-0.5..0.5) * ell;
        if x == y {
            continue;
        }
        let spec = FreeKernelSpec::new(1, eps).unwrap();
        let g = neumann_green(&spec, ell, &[x], &[y], 40).unwrap();
        let want = interval_green(eps, ell, x, y);
        assert!(((g.value - want) / want).abs() < 1e-10, "{} vs {want}", g.value);
    }
}

#[test]
fn green_is_symmetric() {
    let spec = FreeKernelSpec::new(2, 0.8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let x: Vec<f64> = (0..2).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let y: Vec<f64> = (0..2).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let a = neumann_green(&spec, 1.0, &x, &y, 4).unwrap().value;
        let b = neumann_green(&spec, 1.0, &y, &x, 4).unwrap().value;
        assert_eq!(a, b);
    }
}

#[test]
fn satisfies_the_resolvent_equation_off_the_diagonal() {
    let eps = 1.0;
    let spec = FreeKernelSpec::new(2, eps).unwrap();
    let y = [0.1, -0.2];
    let x = [-0.3, 0.25];
    let h = 1e-3;
    let g = |p: [f64; 2]| neumann_green(&spec, 1.0, &p, &y, 8).unwrap().value;
    let c = g(x);
    let lap = (g([x[0] + h, x[1]]) + g([x[0] - h, x[1]]) + g([x[0], x[1] + h]) + g([x[0], x[1] - h]) - 4.0 * c) / (h * h);
    assert!((-lap + eps * c).abs() < 1e-5 * c.abs().max(1.0), "{}", -lap + eps * c);
}

#[test]
fn truncation_change_is_below_tail_estimate() {
    let spec = FreeKernelSpec::new(2, 1.0).unwrap();
    let x = [0.2, 0.4];
    let y = [-0.35, 0.1];
    for r in 1..6 {
        let a = neumann_green(&spec, 1.0, &x, &y, r).unwrap();
        let b = neumann_green(&spec, 1.0, &x, &y, r + 1).unwrap();
        assert!((b.value - a.value).abs() <= a.tail_estimate);
        assert!(b.tail_estimate < a.tail_estimate);
    }
}

#[test]
fn six_dimensional_normal_derivative_decays_with_radius() {
    let ell = 1.0;
    let spec = FreeKernelSpec::new(6, 1.0).unwrap();
    let x = [0.5, 0.1, -0.2, 0.3, 0.0, -0.1];
    let y = [0.1, -0.3, 0.2, 0.0, 0.25, 0.15];
    let mut prev = f64::INFINITY;
    for r in 1..=3 {
        let normal = neumann_green_gradient(&spec, ell, &x, &y, r).unwrap()[0].abs();
        assert!(normal < prev, "radius {r}: {normal}");
        // the unreflected outer shell sits at distance ≥ rℓ from the face
        assert!(normal <= tail_estimate(&spec, ell, r));
        prev = normal;
    }
}

#[test]
fn bounds_report_is_finite() {
    let ell = 1.0;
    let spec = FreeKernelSpec::new(6, 1.0 / (ell * ell)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut pairs = Vec::new();
    for i in 0..6 {
        let y: Vec<f64> = (0..6).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let scale = if i < 3 { 0.01 } else { 1.0 };
        let x: Vec<f64> = y.iter().map(|c| (c + scale * rng.gen_range(-0.5..0.5)).clamp(-0.5, 0.5)).collect();
        pairs.push((x, y));
    }
    let rep = verify_green_bounds(&spec, ell, &pairs, 2).unwrap();
    assert!(rep.sup_ratio.is_finite() && rep.sup_ratio > 0.0);
    assert!(rep.sup_gradient_ratio.is_finite());
    assert!(rep.samples[..3].iter().all(|s| s.near_dominated));
}
