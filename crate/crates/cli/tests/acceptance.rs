//! End-to-end acceptance runs: one line per criterion, non-zero exit if any fails.

use polarlet::slice2d::ProjectOptions;
use polarlet::tomography::Phantom;
use polarlet_cli::experiments::*;
use polarlet_cli::signals::TestSignal;
use std::time::Instant;

type Check = anyhow::Result<(bool, String)>;

fn tightness() -> Check {
    let r = frame_tightness(10, 7)?;
    let worst = r.errors.iter().cloned().fold(0.0, f64::max);
    Ok((worst < 1e-6 && r.seconds < 30.0, format!("worst round-trip rel L2 {worst:.2e} over 10 signals, {:.1} s", r.seconds)))
}

fn tiling() -> Check {
    let t0 = Instant::now();
    let worst = (3..=6).map(|j| radial_tiling(200, j)).fold(0.0, f64::max);
    let s = t0.elapsed().as_secs_f64();
    Ok((worst < 1e-10 && s < 1.0, format!("max residual {worst:.2e} at 200 frequencies, J = 3..6, {s:.3} s")))
}

fn slice_oracle() -> Check {
    let t0 = Instant::now();
    let angles = [0.0, 30.0, 45.0, 90.0];
    let g = projection_errors(&TestSignal::unit_gaussian(), &Setup2D::gaussian(), &angles, &ProjectOptions::default())?;
    // the x1 axis (ν = e2) carries the reference figures; other angles are reported
    let axis = g.iter().find(|r| r.angle_deg == 90.0).map(|r| r.metrics).unwrap();
    let (l1, l2, li) = (axis.l1, axis.l2, axis.linf);
    let off = g.iter().map(|r| r.metrics.linf).fold(0.0, f64::max);
    let gauss_ok = l1 < 2.0 * 3.78e-3 && l2 < 2.0 * 2.0e-4 && li < 2.0 * 1.51e-5 && off < 2e-2;
    let mut worst = 0.0f64;
    for s in [TestSignal::smooth_box(), TestSignal::annulus()] {
        for r in projection_errors(&s, &Setup2D::standard(), &angles, &ProjectOptions::default())? {
            worst = worst.max(r.metrics.linf);
        }
    }
    let s = t0.elapsed().as_secs_f64();
    Ok((
        gauss_ok && worst < 2e-2 && s < 120.0,
        format!("Gaussian on x1 L1 {l1:.2e} L2 {l2:.2e} L∞ {li:.2e}, worst L∞ over angles {off:.2e}; box/annulus worst L∞ {worst:.2e}; {s:.1} s"),
    ))
}

fn locality_check() -> Check {
    let t0 = Instant::now();
    let r = locality(&Setup2D::gaussian())?;
    let s = t0.elapsed().as_secs_f64();
    Ok((
        (0.45..=0.60).contains(&r.count_ratio) && s < 60.0,
        format!("half/full evaluations {:.4}, time ratio {:.2}, {s:.1} s", r.count_ratio, r.time_ratio),
    ))
}

fn thresholding() -> Check {
    let t0 = Instant::now();
    let rows = threshold_sweep(&Phantom::shepp_logan_like(), &Setup2D::standard(), &[1.0, 0.015], 90.0)?;
    let s = t0.elapsed().as_secs_f64();
    let (base, at) = (rows[0].linf, rows[1].linf);
    Ok((
        at <= 2.5 * base && (rows[1].fraction - 0.015).abs() < 2e-3 && s < 300.0,
        format!("L∞ {at:.2e} at {:.2}% nonzeros vs {base:.2e} unthresholded (×{:.2}), {s:.1} s", 100.0 * rows[1].fraction, at / base),
    ))
}

fn closure() -> Check {
    let t0 = Instant::now();
    let cases = closure_3d(&Setup3D::default())?;
    let chain = cases.iter().map(|c| c.chain_linf).fold(0.0, f64::max);
    let dense = dense_oracle_3d(&[-1, 0, 1, 2])?;
    let worst = dense.iter().map(|c| c.linf).fold(0.0, f64::max);
    let s = t0.elapsed().as_secs_f64();
    Ok((
        chain < 5e-2 && worst < 1e-3 && s < 600.0,
        format!("3D→2D→1D vs 3D→1D worst L∞ {chain:.2e}; single-wavelet dense oracle worst L∞ {worst:.2e}; {s:.1} s"),
    ))
}

fn tomography_check() -> Check {
    let t0 = Instant::now();
    let setup = TomographySetup::default();
    let phantom = Phantom::shepp_logan_like();
    let sino = setup.sinogram(&phantom)?;
    let full = tomography(&setup, &phantom, &sino, &setup.frame()?.index_universe())?;
    let sp = sparse_tomography(&TomographySetup::sparse())?;
    let s = t0.elapsed().as_secs_f64();
    Ok((
        full.metrics.linf < 3e-2
            && sp.column_ratio <= 0.10
            && sp.in_region_sparse <= 2.0 * sp.in_region_full
            && s < 1200.0,
        format!(
            "phantom L∞ {:.2e} ({} columns); sparse {:.1}% of columns, in-region L∞ {:.2e} vs {:.2e} full; {s:.0} s",
            full.metrics.linf,
            full.columns,
            100.0 * sp.column_ratio,
            sp.in_region_sparse,
            sp.in_region_full,
        ),
    ))
}

fn slopes() -> Check {
    let t0 = Instant::now();
    let r = complexity(&Setup2D::standard())?;
    let s = t0.elapsed().as_secs_f64();
    let ok = |x: f64| (x - 1.0).abs() <= 0.15;
    Ok((
        ok(r.region_slope) && ok(r.coefficient_slope) && s < 300.0,
        format!("slope vs region length {:.3}, vs coefficients {:.3}; {s:.1} s", r.region_slope, r.coefficient_slope),
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("frame tightness", tightness),
        ("radial tiling", tiling),
        ("slice vs oracle", slice_oracle),
        ("locality", locality_check),
        ("thresholding", thresholding),
        ("3D closure", closure),
        ("tomography", tomography_check),
        ("complexity slopes", slopes),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let (ok, detail) = run().unwrap_or_else(|e| (false, format!("error: {e:#}")));
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        failed += usize::from(!ok);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
