use bosebox::bessel::bessel_k;

// 25-digit reference values of K_n(z).
const TABLE: &[(u32, f64, f64)] = &[
    (0, 0.1, 2.427069024702016557818679),
    (0, 1.0, 0.4210244382407083333356274),
    (0, 2.0, 0.1138938727495334356527196),
    (1, 1.0, 0.60190723019723457473754),
    (1, 5.0, 0.004044613445452164208365022),
    (2, 0.01, 19999.50006838940979090578),
    (2, 1.0, 1.624838898635177482810707),
    (2, 2.0, 0.2537597545660558629373184),
    (2, 10.0, 2.150981700693276873066456e-5),
    (2, 25.0, 3.746783808069109057013766e-12),
    (3, 2.5, 0.2682271463934492027663765),
    (3, 7.3, 0.0005471740027076481326392003),
    (3, 40.0, 9.378903724645300547403538e-19),
    (4, 0.5, 752.2450979104039460714248),
];

#[test]
fn matches_reference_table() {
    for &(n, z, want) in TABLE {
        let got = bessel_k(n, z).unwrap();
        let rel = ((got - want) / want).abs();
        assert!(rel < 1e-12, "K_{n}({z}) = {got}, want {want}, rel {rel:.2e}");
    }
}

/// Large-argument expansion with optimal truncation; the last retained term
/// is halved, which is accurate to about 1e-12 at z = 10.
fn asymptotic(nu: u32, z: f64) -> f64 {
    let mu = 4.0 * (nu as f64).powi(2);
    let mut term = 1.0;
    let mut sum = 0.0;
    let mut k = 1;
    loop {
        let next = term * (mu - ((2 * k - 1) as f64).powi(2)) / (k as f64 * 8.0 * z);
        if next.abs() >= term.abs() || next == 0.0 {
            sum += 0.5 * term;
            break;
        }
        sum += term;
        term = next;
        k += 1;
    }
    (std::f64::consts::PI / (2.0 * z)).sqrt() * (-z).exp() * sum
}

#[test]
fn agrees_with_asymptotic_expansion_at_ten() {
    for nu in 0..4 {
        let exact = bessel_k(nu, 10.0).unwrap();
        let scaled = exact * 10f64.exp() * 10f64.sqrt();
        assert!(scaled.is_finite());
        let rel = ((exact - asymptotic(nu, 10.0)) / exact).abs();
        assert!(rel < 1e-10, "nu={nu} rel={rel:.2e}");
    }
}

#[test]
fn recurrence_holds_across_orders() {
    for &z in &[0.2, 1.0, 3.0, 9.0, 30.0] {
        for n in 1..6u32 {
            let lhs = bessel_k(n + 1, z).unwrap();
            let rhs = bessel_k(n - 1, z).unwrap() + 2.0 * n as f64 / z * bessel_k(n, z).unwrap();
            assert!(((lhs - rhs) / lhs).abs() < 1e-14);
        }
    }
}
