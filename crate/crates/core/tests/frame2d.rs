use num_complex::Complex64;
use polarlet::coeffs::CoefficientSet;
use polarlet::frame::{Frame, FrameConfig, WaveletIndex};
use polarlet::quad::GaussLegendre;
use polarlet::signal::{error_metrics, GridSpec, SampledSignal};
use polarlet::transform::{analyze, synthesize, synthesize_direct};
use polarlet::Error;
use proptest::prelude::*;
use std::f64::consts::PI;

fn gaussian(grid: &GridSpec, c: [f64; 2], s: f64) -> SampledSignal {
    SampledSignal::from_fn(grid.clone(), |p| (-((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)) / (2.0 * s * s)).exp())
}

fn small_frame() -> (Frame, GridSpec) {
    (Frame::new(FrameConfig::directional_2d(3, -6.0, 6.0)).unwrap(), GridSpec::cube(2, -6.0, 6.0, 0.125).unwrap())
}

#[test]
fn round_trip_and_energy() {
    let (frame, grid) = small_frame();
    let f = gaussian(&grid, [0.4, -0.7], 0.8);
    let c = analyze(&f, &frame).unwrap();
    let r = synthesize(&c, &frame, &grid).unwrap();
    let e = error_metrics(&r, &f).unwrap();
    assert!(e.l2 < 1e-8, "{e:?}");
    // tight frame: Σ|f_s|² = ‖f‖²
    let energy: f64 = f.values.iter().map(|v| v * v).sum::<f64>() * grid.spacing * grid.spacing;
    assert!((c.norm_sqr() / energy - 1.0).abs() < 1e-8, "{} vs {energy}", c.norm_sqr());
}

/// (1/2π)∫ĝ(ξ) e^{i⟨ξ,x⟩} dξ in polar coordinates over the radial support [a, b].
fn inverse_ft(frame: &Frame, s: &WaveletIndex, x: [f64; 2], a: f64, b: f64) -> f64 {
    let gl = GaussLegendre::new(24);
    let (rs, ws) = gl.composite(a, b, 8);
    let na = 512;
    let mut sum = Complex64::new(0.0, 0.0);
    for (r, w) in rs.iter().zip(&ws) {
        for k in 0..na {
            let th = 2.0 * PI * k as f64 / na as f64;
            let xi = [r * th.cos(), r * th.sin()];
            let g = frame.eval_wavelet_freq(s, &xi).unwrap();
            sum += g * Complex64::from_polar(1.0, xi[0] * x[0] + xi[1] * x[1]) * (w * r * 2.0 * PI / na as f64);
        }
    }
    assert!(sum.im.abs() < 1e-10);
    sum.re / (2.0 * PI)
}

#[test]
fn spatial_wavelets_match_inverse_fourier_transform() {
    let (frame, _) = small_frame();
    let cases = [
        (WaveletIndex::new2(-1, 1, 0, 0), 0.0, PI / 2.0),
        (WaveletIndex::new2(0, 0, 0, 0), PI / 4.0, PI),
        (WaveletIndex::new2(1, 1, -2, 3), PI / 2.0, 2.0 * PI),
        (WaveletIndex::new2(2, 3, 1, 5), PI, 4.0 * PI),
    ];
    for (s, a, b) in cases {
        let c = frame.center(&s);
        for dx in [[0.0, 0.0], [0.3, -0.2], [1.1, 0.7], [-2.0, 0.4]] {
            let x = [c[0] + dx[0], c[1] + dx[1]];
            let want = inverse_ft(&frame, &s, x, a, b);
            let got = frame.eval_wavelet_space(&s, x).unwrap();
            assert!((got - want).abs() < 1e-7, "{s:?} at {x:?}: {got} vs {want}");
        }
    }
}

#[test]
fn direct_synthesis_agrees_with_periodic_synthesis_away_from_the_box() {
    let mut cfg = FrameConfig::directional_2d(2, -4.0, 4.0);
    cfg.apron = 16.0;
    let frame = Frame::new(cfg).unwrap();
    let grid = GridSpec::cube(2, -2.0, 2.0, 0.25).unwrap();
    let c = CoefficientSet::from_entries(
        frame.config().clone(),
        vec![
            (WaveletIndex::new2(0, 0, 0, 0), 1.0),
            (WaveletIndex::new2(1, 1, 0, 2), -0.5),
            (WaveletIndex::new2(2, -2, 3, 6), 0.25),
        ],
    )
    .unwrap();
    let a = synthesize(&c, &frame, &grid).unwrap();
    let b = synthesize_direct(&c, &frame, &grid, 64.0).unwrap();
    let m = error_metrics(&b, &a).unwrap();
    assert!(m.linf < 1e-3, "{m:?}");
}

#[test]
fn under_resolved_grid_is_rejected() {
    let frame = Frame::new(FrameConfig::directional_2d(3, -4.0, 4.0)).unwrap();
    let grid = GridSpec::cube(2, -4.0, 4.0, 0.5).unwrap();
    let f = gaussian(&grid, [0.0, 0.0], 1.0);
    assert!(matches!(analyze(&f, &frame), Err(Error::UnderResolved(_))));
}

#[test]
fn coefficient_files_round_trip() {
    let (frame, grid) = small_frame();
    let c = analyze(&gaussian(&grid, [1.0, 0.0], 0.8), &frame).unwrap();
    let mut buf = Vec::new();
    c.write_to(&mut buf).unwrap();
    let back = CoefficientSet::read_from(&buf[..]).unwrap();
    assert_eq!(back, c);
    assert_eq!(c.threshold(0.0).unwrap(), c);
    let t = c.threshold(1e-3 * c.max_abs()).unwrap();
    assert!(t.len() < c.len() && t.iter().all(|(_, v)| v.abs() > 1e-3 * c.max_abs()));
    buf.truncate(buf.len() - 3);
    assert!(CoefficientSet::read_from(&buf[..]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn analysis_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, cx in -1.0f64..1.0, cy in -1.0f64..1.0) {
        let frame = Frame::new(FrameConfig::directional_2d(1, -2.0, 2.0)).unwrap();
        let grid = GridSpec::cube(2, -2.0, 2.0, 0.5).unwrap();
        let f = gaussian(&grid, [cx, cy], 0.7);
        let g = gaussian(&grid, [cy, -cx], 1.1);
        let h = SampledSignal::new(grid.clone(), f.values.iter().zip(&g.values).map(|(x, y)| a * x + b * y).collect()).unwrap();
        let cf = analyze(&f, &frame).unwrap();
        let cg = analyze(&g, &frame).unwrap();
        let ch = analyze(&h, &frame).unwrap();
        let lin = cf.combine(a, &cg, b).unwrap();
        let scale = 1.0 + ch.max_abs();
        for (s, v) in ch.iter() {
            prop_assert!((v - lin.get(s).unwrap_or(0.0)).abs() < 1e-12 * scale);
        }
    }
}
