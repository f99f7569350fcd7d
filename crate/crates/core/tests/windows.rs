use polarlet::angular::*;
use polarlet::radial::*;
use polarlet::special::SphericalDirection;
use proptest::prelude::*;
use std::f64::consts::PI;

/// 2∫ĥ(ρ) cos(ρx) dρ by composite Simpson on the support [π/4, π].
fn h1_oracle(x: f64) -> f64 {
    let (a, b, n) = (PI / 4.0, PI, 20000);
    let h = (b - a) / n as f64;
    let f = |r: f64| h_hat(r) * (r * x).cos();
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    2.0 * s * h / 3.0
}

#[test]
fn window_values() {
    assert_eq!(h_hat(0.5), 0.0);
    assert!((h_hat(PI / 2.0) - 1.0).abs() < 1e-15);
    assert!(h_hat(PI).abs() < 1e-15);
    assert_eq!(phi_hat(0.1), 1.0);
    assert_eq!(phi_hat(2.0), 0.0);
}

#[test]
fn slice_profile_matches_quadrature() {
    assert!((h1_profile(0.0) - h1_at_zero()).abs() < 1e-9);
    assert!((h1_at_zero() - 2.900876).abs() < 1e-6);
    for &x in &[0.0, 0.37, 1.0, 2.2, 5.5, 11.0, 23.7, 40.0] {
        let want = h1_oracle(x);
        assert!((h1_profile(x) - want).abs() < 1e-8, "h1({x}) = {} vs {want}", h1_profile(x));
    }
}

#[cfg(feature = "closed-form")]
#[test]
fn closed_form_slice_profile() {
    for &x in &[0.25, 1.0, 3.0, 7.5] {
        assert!((h1_closed_form(x).unwrap() - h1_oracle(x)).abs() < 1e-8);
    }
}

#[test]
fn table_round_trip() {
    let t = ProfileBank::new(TableSpec { r_max: 8.0, samples: 512 }).slice(Window::Wavelet).unwrap();
    let mut buf = Vec::new();
    t.write_to(&mut buf).unwrap();
    let back = ProfileTable::read_from(&buf[..]).unwrap();
    for x in [0.0, 0.3, 4.1, 7.9] {
        assert_eq!(t.eval(x), back.eval(x));
    }
    buf[0] = b'X';
    assert!(ProfileTable::read_from(&buf[..]).is_err());
}

#[test]
fn hankel_tables_match_direct_evaluation() {
    let bank = ProfileBank::new(TableSpec { r_max: 16.0, samples: 4096 });
    let fam = bank.hankel_family(Window::Wavelet, 4).unwrap();
    let mut v = vec![0.0; 5];
    let mut d = vec![0.0; 5];
    for &r in &[0.0, 0.8, 3.3, 9.1, 15.0] {
        hankel_direct(Window::Wavelet, r, &mut v, &mut d);
        for n in 0..5 {
            assert!((fam[n].eval(r) - v[n]).abs() < 1e-9, "h_{n}({r})");
        }
    }
}

#[test]
fn directional_2d_windows_tile_the_circle() {
    for count in [1u16, 4, 6, 8, 12, 16] {
        let ws = make_directional_2d(1, count).unwrap();
        for i in 0..97 {
            let th = 2.0 * PI * i as f64 / 97.0;
            let s: f64 = ws.iter().map(|w| gamma_eval_2d(w, th).norm_sqr()).sum();
            assert!((s - 1.0).abs() < 1e-12, "K = {count}, θ = {th}: {s}");
        }
    }
}

proptest! {
    #[test]
    fn radial_partition_of_unity(r in 0.0f64..(4.0 * PI), j in 3u32..6) {
        prop_assert!(tiling_residual(r, j).abs() < 1e-12);
    }

    #[test]
    fn icosahedral_windows_tile_the_sphere(t in 0.0f64..PI, p in 0.0f64..(2.0 * PI)) {
        let ws = make_level_3d(1, 6).unwrap();
        let d = SphericalDirection::new(t, p).unwrap();
        let s: f64 = ws.iter().map(|w| w.eval(d).norm_sqr()).sum();
        prop_assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_moves_the_window(t in 0.0f64..PI, p in 0.0f64..(2.0 * PI), rt in 0.0f64..PI, rp in 0.0f64..(2.0 * PI)) {
        // the rotated window at ω reads the original at R_ν ω, R_ν = R_z(φ) R_y(θ)
        let w = make_level_3d(2, 6).unwrap().swap_remove(3);
        let nu = SphericalDirection::new(rt, rp).unwrap();
        let rw = rotate_kappa(&w, nu).unwrap();
        let om = SphericalDirection::new(t, p).unwrap();
        let moved = SphericalDirection::from_vector(rotate_vector(om.to_vector(), rp, rt, 0.0)).unwrap();
        prop_assert!((rw.eval(om) - w.eval(moved)).norm() < 1e-11);
    }
}
