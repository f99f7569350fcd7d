use num_complex::Complex64;
use polarlet::special::*;
use proptest::prelude::*;
use std::f64::consts::PI;

/// Bessel's integral J_n(x) = (1/π)∫₀^π cos(nτ − x sin τ) dτ by the midpoint rule,
/// which converges geometrically for this periodic integrand.
fn bessel_integral(n: u32, x: f64) -> f64 {
    let m = 4000;
    let h = PI / m as f64;
    (0..m)
        .map(|i| {
            let t = (i as f64 + 0.5) * h;
            (n as f64 * t - x * t.sin()).cos()
        })
        .sum::<f64>()
        * h
        / PI
}

#[test]
fn bessel_matches_integral_representation() {
    for n in 0..8 {
        for &x in &[0.0, 0.3, 1.0, 2.5, 7.0, 13.2, 30.0, 60.0] {
            let want = bessel_integral(n, x);
            let got = bessel_j(n, x);
            assert!((got - want).abs() < 1e-12, "J_{n}({x}) = {got}, want {want}");
        }
    }
}

#[test]
fn bessel_sequence_agrees_with_single_orders() {
    let seq = bessel_j_seq(12, 9.5);
    for (n, v) in seq.iter().enumerate() {
        assert!((v - bessel_j(n as u32, 9.5)).abs() < 1e-13);
    }
}

#[test]
fn low_order_legendre() {
    for &x in &[-0.9f64, -0.2, 0.0, 0.4, 1.0] {
        let s = (1.0 - x * x).sqrt();
        assert!((assoc_legendre(1, 0, x).unwrap() - x).abs() < 1e-14);
        assert!((assoc_legendre(1, 1, x).unwrap() + s).abs() < 1e-14);
        assert!((assoc_legendre(2, 0, x).unwrap() - 0.5 * (3.0 * x * x - 1.0)).abs() < 1e-14);
        assert!((assoc_legendre(2, 1, x).unwrap() + 3.0 * x * s).abs() < 1e-14);
        assert!((assoc_legendre(2, 2, x).unwrap() - 3.0 * s * s).abs() < 1e-14);
    }
    assert!(assoc_legendre(2, 3, 0.1).is_err());
    assert!(assoc_legendre(2, 1, 1.5).is_err());
}

#[test]
fn spherical_harmonics_are_orthonormal() {
    // product rule: Gauss–Legendre in cos θ, uniform in φ
    let (nt, np) = (24, 48);
    let gl = polarlet::quad::GaussLegendre::new(nt);
    let (xs, ws) = gl.composite(-1.0, 1.0, 1);
    let pairs = [(0, 0), (1, -1), (1, 1), (2, 0), (3, 2), (4, -3), (5, 5)];
    for &(l1, m1) in &pairs {
        for &(l2, m2) in &pairs {
            let mut s = Complex64::new(0.0, 0.0);
            for (x, w) in xs.iter().zip(&ws) {
                for k in 0..np {
                    let phi = 2.0 * PI * k as f64 / np as f64;
                    let d = SphericalDirection::new(x.acos(), phi).unwrap();
                    s += sph_harm(l1, m1, d).unwrap() * sph_harm(l2, m2, d).unwrap().conj() * (w * 2.0 * PI / np as f64);
                }
            }
            let want = if (l1, m1) == (l2, m2) { 1.0 } else { 0.0 };
            assert!((s - want).norm() < 1e-12, "<Y{l1}{m1}, Y{l2}{m2}> = {s}");
        }
    }
}

#[test]
fn wigner_small_d_closed_forms() {
    for &b in &[0.0, 0.4, 1.3, 2.9] {
        let (s, c) = f64::sin_cos(b);
        assert!((wigner_d(1, 0, 0, b).unwrap() - c).abs() < 1e-14);
        assert!((wigner_d(1, 1, 0, b).unwrap() + s / 2f64.sqrt()).abs() < 1e-14);
        assert!((wigner_d(1, 1, 1, b).unwrap() - (1.0 + c) / 2.0).abs() < 1e-14);
        assert!((wigner_d(1, 1, -1, b).unwrap() - (1.0 - c) / 2.0).abs() < 1e-14);
        assert!((wigner_d(2, 0, 0, b).unwrap() - 0.5 * (3.0 * c * c - 1.0)).abs() < 1e-14);
        assert!((wigner_d(2, 2, 0, b).unwrap() - (3.0f64 / 8.0).sqrt() * s * s).abs() < 1e-14);
    }
}

/// E_ν(x) for real x > 0 and real ν by direct quadrature of ∫₁^∞ e^{−xt} t^{−ν} dt
/// after t = 1/u, i.e. ∫₀¹ e^{−x/u} u^{ν−2} du.
fn expint_real(nu: f64, x: f64) -> f64 {
    let gl = polarlet::quad::GaussLegendre::new(20);
    gl.integrate(0.0, 1.0, 400, |u| if u <= 0.0 { 0.0 } else { (-x / u).exp() * u.powf(nu - 2.0) })
}

#[test]
fn expint_real_arguments() {
    for &(nu, x) in &[(1.0, 0.5), (1.0, 2.0), (2.5, 1.0), (0.3, 3.0), (4.0, 0.2)] {
        let got = expint(Complex64::new(nu, 0.0), Complex64::new(x, 0.0)).unwrap();
        let want = expint_real(nu, x);
        assert!((got.re - want).abs() < 1e-10 * want.max(1.0) && got.im.abs() < 1e-12, "E_{nu}({x}) = {got}, want {want}");
    }
}

#[test]
fn expint_recurrence_for_complex_order() {
    // ν E_{ν+1}(z) = e^{−z} − z E_ν(z)
    for &(nu, z) in &[
        (Complex64::new(0.0, 2.26), Complex64::new(0.0, 0.7)),
        (Complex64::new(0.0, -2.26), Complex64::new(0.0, -3.1)),
        (Complex64::new(0.5, 1.0), Complex64::new(1.2, 0.4)),
    ] {
        let lhs = nu * expint(nu + 1.0, z).unwrap();
        let rhs = (-z).exp() - z * expint(nu, z).unwrap();
        assert!((lhs - rhs).norm() < 1e-10, "{lhs} vs {rhs}");
    }
}

proptest! {
    #[test]
    fn wigner_rows_are_unit_vectors(l in 0u32..7, m in -6i32..7, beta in 0.0f64..PI) {
        prop_assume!(m.unsigned_abs() <= l);
        let s: f64 = (-(l as i32)..=l as i32).map(|mp| wigner_d(l, mp, m, beta).unwrap().powi(2)).sum();
        prop_assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn harmonics_addition_theorem(l in 0u32..8, t1 in 0.0f64..PI, p1 in 0.0f64..6.28, t2 in 0.0f64..PI, p2 in 0.0f64..6.28) {
        let a = SphericalDirection::new(t1, p1).unwrap();
        let b = SphericalDirection::new(t2, p2).unwrap();
        let s: Complex64 = (-(l as i32)..=l as i32)
            .map(|m| sph_harm(l, m, a).unwrap() * sph_harm(l, m, b).unwrap().conj())
            .sum();
        let va = a.to_vector();
        let vb = b.to_vector();
        let c = (va[0] * vb[0] + va[1] * vb[1] + va[2] * vb[2]).clamp(-1.0, 1.0);
        let want = (2 * l + 1) as f64 / (4.0 * PI) * assoc_legendre(l, 0, c).unwrap();
        prop_assert!((s - want).norm() < 1e-12);
    }
}
