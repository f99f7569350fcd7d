//! The numerical experiments behind the CLI commands and the acceptance suite.

use crate::signals::TestSignal;
use anyhow::{bail, Result};
use polarlet::coeffs::CoefficientSet;
use polarlet::frame::{Frame, FrameConfig, WaveletIndex};
use polarlet::radial::{tiling_residual, TableSpec};
use polarlet::signal::{error_metrics, relative_errors, ErrorMetrics, GridSpec, SampledSignal};
use polarlet::slice2d::{project, ProjectOptions, ProjectionDirection2D, ProjectionStats};
use polarlet::slice3d::{eval_sliced_2d, project_3d_to_1d, project_3d_to_2d, slice_to_2d, PlaneBasis};
use polarlet::special::SphericalDirection;
use polarlet::tomography::{
    reconstruct, select_sparse_basis, simulate_sinogram, Phantom, Region, Sinogram,
};
use polarlet::transform::{analyze, synthesize, synthesize_direct};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Instant;

/// 2D frame plus the sampling grid of the analyzed signal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Setup2D {
    /// square domain [−half, half]²
    pub half: f64,
    pub levels: i32,
    pub spacing: f64,
    pub apron: f64,
    pub orientations: Vec<u16>,
}

impl Setup2D {
    pub fn standard() -> Self {
        Self { half: 5.0, levels: 3, spacing: 0.125, apron: 8.0, orientations: polarlet::angular::DEFAULT_ORIENTATIONS.to_vec() }
    }

    /// Large apron around [−10, 10]², for comparisons with the analytic Gaussian projection.
    pub fn gaussian() -> Self {
        Self { half: 10.0, apron: 32.0, ..Self::standard() }
    }

    pub fn frame(&self) -> Result<Frame> {
        let mut cfg = FrameConfig::directional_2d(self.levels, -self.half, self.half);
        cfg.apron = self.apron;
        cfg.orientations = self.orientations.clone();
        Ok(Frame::new(cfg)?)
    }

    pub fn grid(&self) -> Result<GridSpec> {
        Ok(GridSpec::cube(2, -self.half, self.half, self.spacing)?)
    }

    /// Detector samples covering [−half, half].
    pub fn line(&self) -> Result<GridSpec> {
        let n = (2.0 * self.half / self.spacing).round() as usize + 1;
        Ok(GridSpec::new(vec![-self.half], self.spacing, vec![n])?)
    }
}

/// Analyzes a test signal sampled on the setup grid.
pub fn analyze_signal(signal: &TestSignal, setup: &Setup2D) -> Result<(Frame, SampledSignal, CoefficientSet)> {
    let frame = setup.frame()?;
    let f = SampledSignal::from_fn(setup.grid()?, |p| signal.eval([p[0], p[1]]));
    let c = analyze(&f, &frame)?;
    Ok((frame, f, c))
}

/// Reference projection: closed form where available, trapezoid rule (step h/4) otherwise.
pub fn reference_projection(signal: &TestSignal, nu: ProjectionDirection2D, line: &GridSpec, step: f64) -> Vec<f64> {
    line.axis(0)
        .map(|y| {
            signal
                .exact_line_integral(nu, y)
                .unwrap_or_else(|| signal.trapezoid_line_integral(nu, y, 8.0, step))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TightnessReport {
    pub errors: Vec<f64>,
    pub seconds: f64,
}

/// Round trip of random sums of Gaussian bumps that are band-limited below 2^{J−1}π
/// and below 1e-8 at the grid edge, where the zero padding would otherwise cut them.
pub fn frame_tightness(count: usize, seed: u64) -> Result<TightnessReport> {
    let t0 = Instant::now();
    let setup = Setup2D { apron: 2.0, ..Setup2D::standard() };
    let frame = setup.frame()?;
    let grid = setup.grid()?;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut errors = Vec::with_capacity(count);
    for _ in 0..count {
        let bumps: Vec<([f64; 2], f64, f64)> = (0..5)
            .map(|_| {
                ([rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)], rng.gen_range(0.45..0.55), rng.gen_range(-1.0..1.0))
            })
            .collect();
        let f = SampledSignal::from_fn(grid.clone(), |p| {
            bumps
                .iter()
                .map(|(c, s, a)| a * (-((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)) / (2.0 * s * s)).exp())
                .sum()
        });
        let c = analyze(&f, &frame)?;
        let r = synthesize(&c, &frame, &grid)?;
        errors.push(error_metrics(&r, &f)?.l2);
    }
    Ok(TightnessReport { errors, seconds: t0.elapsed().as_secs_f64() })
}

/// Largest |φ̂² + Σ ĥ(2^{-j}·)² − 1| over n frequencies in [0, 2^{J−1}π].
pub fn radial_tiling(n: usize, j_max: u32) -> f64 {
    let top = 2f64.powi(j_max as i32 - 1) * std::f64::consts::PI;
    (0..n)
        .map(|i| tiling_residual(top * i as f64 / (n - 1) as f64, j_max).abs())
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProjectionCase {
    pub signal: String,
    pub angle_deg: f64,
    pub metrics: ErrorMetrics,
    pub evaluations: u64,
    pub wavelets: usize,
    pub seconds: f64,
}

/// Projects analyzed coefficients at each angle and compares against the reference.
pub fn projection_errors(
    signal: &TestSignal,
    setup: &Setup2D,
    angles_deg: &[f64],
    opts: &ProjectOptions,
) -> Result<Vec<ProjectionCase>> {
    let (frame, _, c) = analyze_signal(signal, setup)?;
    let line = setup.line()?;
    let mut out = Vec::new();
    for &deg in angles_deg {
        let nu = ProjectionDirection2D::from_degrees(deg)?;
        let t0 = Instant::now();
        let (p, stats) = project(&c, &frame, nu, &line, opts)?;
        let seconds = t0.elapsed().as_secs_f64();
        let reference = reference_projection(signal, nu, &line, setup.spacing / 4.0);
        out.push(ProjectionCase {
            signal: signal.name().to_string(),
            angle_deg: deg,
            metrics: relative_errors(&p.values, &reference)?,
            evaluations: stats.evaluations,
            wavelets: stats.wavelets,
            seconds,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalityReport {
    pub full: ProjectionStats,
    pub half: ProjectionStats,
    pub count_ratio: f64,
    pub time_ratio: f64,
    /// largest difference between the half-axis and full-axis results on the half axis
    pub max_difference: f64,
    pub half_metrics: ErrorMetrics,
}

/// Unit Gaussian projected over the whole detector line and over its positive half.
pub fn locality(setup: &Setup2D) -> Result<LocalityReport> {
    let signal = TestSignal::unit_gaussian();
    let (frame, _, c) = analyze_signal(&signal, setup)?;
    let line = setup.line()?;
    let nu = ProjectionDirection2D::from_degrees(90.0)?;
    let opts = ProjectOptions { region_apron: ProjectOptions::default().support_radius, ..Default::default() };
    let t0 = Instant::now();
    let (full, fs) = project(&c, &frame, nu, &line, &opts)?;
    let t_full = t0.elapsed().as_secs_f64();
    let t0 = Instant::now();
    let (half, hs) = project(&c, &frame, nu, &line, &ProjectOptions { region: Some((0.0, setup.half)), ..opts })?;
    let t_half = t0.elapsed().as_secs_f64();
    let offset = full.values.len() - half.values.len();
    let max_difference = half.values.iter().zip(&full.values[offset..]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let reference = reference_projection(&signal, nu, &half.grid, setup.spacing / 4.0);
    Ok(LocalityReport {
        full: fs,
        half: hs,
        count_ratio: hs.evaluations as f64 / fs.evaluations as f64,
        time_ratio: t_half / t_full.max(1e-12),
        max_difference,
        half_metrics: relative_errors(&half.values, &reference)?,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub eps: f64,
    pub fraction: f64,
    pub nonzeros: usize,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub evaluations: u64,
    pub seconds: f64,
}

/// Projection error of the hard-thresholded expansion of a phantom, for target
/// fractions of retained coefficients.
pub fn threshold_sweep(phantom: &Phantom, setup: &Setup2D, fractions: &[f64], angle_deg: f64) -> Result<Vec<ThresholdRow>> {
    let signal = TestSignal::Phantom(phantom.clone());
    let (frame, _, c) = analyze_signal(&signal, setup)?;
    let line = setup.line()?;
    let nu = ProjectionDirection2D::from_degrees(angle_deg)?;
    let reference = reference_projection(&signal, nu, &line, setup.spacing / 4.0);
    let mut mags: Vec<f64> = c.iter().map(|(_, v)| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut rows = Vec::new();
    for &frac in fractions {
        if !(frac > 0.0 && frac <= 1.0) {
            bail!("fraction {frac} outside (0, 1]");
        }
        let keep = ((frac * mags.len() as f64).round() as usize).clamp(1, mags.len());
        // keep entries strictly above the first dropped magnitude
        let eps = if keep == mags.len() { 0.0 } else { mags[keep] };
        let t = c.threshold(eps)?;
        let t0 = Instant::now();
        let (p, stats) = project(&t, &frame, nu, &line, &ProjectOptions::default())?;
        let seconds = t0.elapsed().as_secs_f64();
        let m = relative_errors(&p.values, &reference)?;
        rows.push(ThresholdRow {
            eps,
            fraction: t.len() as f64 / c.len() as f64,
            nonzeros: t.len(),
            l1: m.l1,
            l2: m.l2,
            linf: m.linf,
            evaluations: stats.evaluations,
            seconds,
        });
    }
    Ok(rows)
}

/// One projection run of the cost benchmark.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchRow {
    pub sweep: String,
    pub region_length: f64,
    pub coefficients: usize,
    pub omega: f64,
    /// rotation of the directional test signal, degrees
    pub rotation: f64,
    pub seconds: f64,
    pub evaluations: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SlopeReport {
    pub rows: Vec<BenchRow>,
    pub region_slope: f64,
    pub coefficient_slope: f64,
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn bench_run(
    sweep: &str,
    c: &CoefficientSet,
    frame: &Frame,
    nu: ProjectionDirection2D,
    line: &GridSpec,
    opts: &ProjectOptions,
    rotation: f64,
) -> Result<BenchRow> {
    let t0 = Instant::now();
    let (_, s) = project(c, frame, nu, line, opts)?;
    Ok(BenchRow {
        sweep: sweep.to_string(),
        region_length: s.region_length,
        coefficients: c.len(),
        omega: s.omega,
        rotation,
        seconds: t0.elapsed().as_secs_f64(),
        evaluations: s.evaluations,
    })
}

/// Evaluation counts against region length, number of coefficients and ω, with
/// the compact-support options so that cost follows the counts directly.
pub fn complexity(setup: &Setup2D) -> Result<SlopeReport> {
    let signal = TestSignal::Gaussian { center: [0.3, -0.2], sigma: 1.0 };
    let (frame, _, c) = analyze_signal(&signal, setup)?;
    let line = setup.line()?;
    let nu = ProjectionDirection2D::from_degrees(90.0)?;
    let local = ProjectOptions::local();
    let mut rows = Vec::new();
    for f in [1.0, 2.0, 4.0, 8.0] {
        let opts = ProjectOptions { region: Some((0.0, f * setup.half / 8.0)), ..local };
        rows.push(bench_run("region", &c, &frame, nu, &line, &opts, 0.0)?);
    }
    for step in [8usize, 4, 2, 1] {
        let mut i = 0usize;
        let sub = c.filter(|_, _| {
            i += 1;
            (i - 1) % step == 0
        });
        rows.push(bench_run("coefficients", &sub, &frame, nu, &line, &local, 0.0)?);
    }
    // a thin ridge turned away from the detector axis loses its surviving orientations
    let grid = setup.grid()?;
    for deg in [0.0f64, 15.0, 30.0, 45.0, 60.0, 75.0, 90.0] {
        let (s, co) = deg.to_radians().sin_cos();
        let f = SampledSignal::from_fn(grid.clone(), |p| {
            let a = co * p[0] + s * p[1];
            let b = -s * p[0] + co * p[1];
            (-a * a / 8.0 - b * b / 0.08).exp()
        });
        let cr = analyze(&f, &frame)?;
        let cr = cr.threshold(1e-3 * cr.max_abs())?;
        let opts = ProjectOptions { omega_cut: 1e-3, ..local };
        rows.push(bench_run("omega", &cr, &frame, nu, &line, &opts, deg)?);
    }
    let pick = |name: &str, f: &dyn Fn(&BenchRow) -> f64| -> (Vec<f64>, Vec<f64>) {
        rows.iter().filter(|r| r.sweep == name).map(|r| (f(r), r.evaluations as f64)).unzip()
    };
    let (rl, re) = pick("region", &|r| r.region_length);
    let (kc, ke) = pick("coefficients", &|r| r.coefficients as f64);
    Ok(SlopeReport { region_slope: loglog_slope(&rl, &re), coefficient_slope: loglog_slope(&kc, &ke), rows })
}

/// 3D test signals as sums of anisotropic Gaussians (center, per-axis σ, amplitude).
pub fn signals_3d() -> Vec<(&'static str, Vec<([f64; 3], [f64; 3], f64)>)> {
    vec![
        ("gaussian", vec![([0.0, 0.0, 0.0], [1.0, 1.0, 1.0], 1.0)]),
        ("anisotropic", vec![([0.5, -0.3, 0.2], [1.2, 0.7, 0.9], 1.0)]),
        ("two-bumps", vec![([1.0, 0.5, -0.5], [0.6, 0.6, 0.6], 1.0), ([-1.2, -0.8, 0.7], [0.8, 0.5, 0.7], -0.7)]),
    ]
}

fn eval_bumps(b: &[([f64; 3], [f64; 3], f64)], p: [f64; 3]) -> f64 {
    b.iter()
        .map(|(c, s, a)| a * (-(0..3).map(|i| (p[i] - c[i]).powi(2) / (2.0 * s[i] * s[i])).sum::<f64>()).exp())
        .sum()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClosureCase {
    pub signal: String,
    /// 3D → 2D along e3 against the analytic plane projection
    pub plane_linf: f64,
    /// 3D → 1D against the analytic line projection
    pub line_linf: f64,
    /// (3D → 2D → analysis → 1D) against 3D → 1D
    pub chain_linf: f64,
}

/// Setup of the 3D experiments: [−6, 6]³, J = 2, h = 1/4 (49³ samples).
pub struct Setup3D {
    pub half: f64,
    pub levels: i32,
    pub spacing: f64,
}

impl Default for Setup3D {
    fn default() -> Self {
        Self { half: 6.0, levels: 2, spacing: 0.25 }
    }
}

/// Projection closure 3D → 2D → 1D versus 3D → 1D on the 3D test signals.
pub fn closure_3d(setup: &Setup3D) -> Result<Vec<ClosureCase>> {
    let frame3 = Frame::new(FrameConfig::directional_3d(setup.levels, -setup.half, setup.half))?;
    let frame2 = Frame::new(FrameConfig::directional_2d(setup.levels, -setup.half, setup.half))?;
    let grid3 = GridSpec::cube(3, -setup.half, setup.half, setup.spacing)?;
    let grid2 = GridSpec::cube(2, -setup.half, setup.half, setup.spacing)?;
    let n = grid2.shape[0];
    let line = GridSpec::new(vec![-setup.half], setup.spacing, vec![n])?;
    let e3 = SphericalDirection::north();
    let e1 = SphericalDirection::new(std::f64::consts::FRAC_PI_2, 0.0)?;
    let mut out = Vec::new();
    for (name, bumps) in signals_3d() {
        let f = SampledSignal::from_fn(grid3.clone(), |p| eval_bumps(&bumps, p));
        let c = analyze(&f, &frame3)?;
        let (plane, _) = project_3d_to_2d(&c, &frame3, e3, &grid2, &ProjectOptions::default())?;
        // analytic projections of the Gaussians
        let tau = 2.0 * std::f64::consts::PI;
        let plane_ref = SampledSignal::from_fn(grid2.clone(), |p| {
            bumps
                .iter()
                .map(|(c, s, a)| {
                    a * tau.sqrt() * s[2] * (-(p[0] - c[0]).powi(2) / (2.0 * s[0] * s[0]) - (p[1] - c[1]).powi(2) / (2.0 * s[1] * s[1])).exp()
                })
                .sum()
        });
        let line_ref: Vec<f64> = line
            .axis(0)
            .map(|x| bumps.iter().map(|(c, s, a)| a * tau * s[1] * s[2] * (-(x - c[0]).powi(2) / (2.0 * s[0] * s[0])).exp()).sum())
            .collect();
        let (direct, _) = project_3d_to_1d(&c, &frame3, e1, &line, &ProjectOptions::default())?;
        let c2 = analyze(&plane, &frame2)?;
        let (chained, _) = project(&c2, &frame2, ProjectionDirection2D::from_degrees(90.0)?, &line, &ProjectOptions::default())?;
        out.push(ClosureCase {
            signal: name.to_string(),
            plane_linf: error_metrics(&plane, &plane_ref)?.linf,
            line_linf: relative_errors(&direct.values, &line_ref)?.linf,
            chain_linf: relative_errors(&chained.values, &direct.values)?.linf,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DenseOracleCase {
    pub j: i32,
    pub t: u16,
    pub axis: String,
    pub linf: f64,
}

/// Single 3D frame functions synthesized on a 64³ grid and summed along a
/// coordinate axis, against their projected 2D polar wavelets.
pub fn dense_oracle_3d(levels: &[i32]) -> Result<Vec<DenseOracleCase>> {
    let n = 64usize;
    let mut out = Vec::new();
    for &j in levels {
        // the grid spacing follows the level, so every wavelet spans the same number of samples
        let scale = 2f64.powi(2 - j.max(0));
        let (lo, h) = (-8.0 * scale, 0.25 * scale);
        let mut cfg = FrameConfig::directional_3d(j.max(0), lo, lo + h * (n - 1) as f64);
        cfg.apron = 2.0 * scale;
        let frame = Frame::new(cfg)?;
        let grid = GridSpec::new(vec![lo; 3], h, vec![n; 3])?;
        let ts: Vec<u16> = if j < 0 { vec![0] } else { vec![0, 2] };
        for t in ts {
            let s = WaveletIndex::new3(j as i8, [1, -1, 0], t);
            let c = CoefficientSet::from_entries(frame.config().clone(), vec![(s, 1.0)])?;
            let vol = synthesize(&c, &frame, &grid)?;
            for (axis, dir) in [("e3", SphericalDirection::north()), ("e1", SphericalDirection::new(std::f64::consts::FRAC_PI_2, 0.0)?)] {
                let basis = PlaneBasis::new(dir);
                let w = slice_to_2d(&frame, &s, dir)?;
                let (mut worst, mut peak) = (0.0f64, 0.0f64);
                // summation axis and the two remaining axes in grid order
                let along = if axis == "e3" { 2 } else { 0 };
                let others: Vec<usize> = (0..3).filter(|&a| a != along).collect();
                for a in 0..n {
                    for b in 0..n {
                        let mut sum = 0.0;
                        let mut p = [0.0; 3];
                        for k in 0..n {
                            let mut idx = [0usize; 3];
                            idx[others[0]] = a;
                            idx[others[1]] = b;
                            idx[along] = k;
                            sum += vol.values[(idx[0] * n + idx[1]) * n + idx[2]];
                            if k == 0 {
                                p = [lo + h * idx[0] as f64, lo + h * idx[1] as f64, lo + h * idx[2] as f64];
                                p[along] = 0.0;
                            }
                        }
                        let dense = sum * h;
                        let sliced = eval_sliced_2d(&w, basis.coords(p), frame.bank())?;
                        worst = worst.max((dense - sliced).abs());
                        peak = peak.max(sliced.abs());
                    }
                }
                out.push(DenseOracleCase { j, t, axis: axis.to_string(), linf: worst / peak });
            }
        }
    }
    Ok(out)
}

/// Tomography setup: isotropic basis on [−half, half]², parallel-beam sinogram
/// over the domain diagonal.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TomographySetup {
    pub half: f64,
    pub levels: i32,
    pub orientations: usize,
    pub samples: usize,
    pub svd_cutoff: f64,
    pub eval_spacing: f64,
}

impl Default for TomographySetup {
    fn default() -> Self {
        Self { half: 3.0, levels: 3, orientations: 96, samples: 128, svd_cutoff: 1e-6, eval_spacing: 0.125 }
    }
}

impl TomographySetup {
    /// Wider domain for the sparse experiment, whose coarse levels need room around the balls.
    pub fn sparse() -> Self {
        Self { half: 4.0, ..Self::default() }
    }

    pub fn frame(&self) -> Result<Frame> {
        Ok(Frame::with_tables(FrameConfig::isotropic(2, self.levels, -self.half, self.half), TableSpec::WIDE)?)
    }

    pub fn extent(&self) -> (f64, f64) {
        let d = self.half * std::f64::consts::SQRT_2;
        (-d, d)
    }

    pub fn grid(&self) -> Result<GridSpec> {
        Ok(GridSpec::cube(2, -self.half, self.half, self.eval_spacing)?)
    }

    pub fn sinogram(&self, phantom: &Phantom) -> Result<Sinogram> {
        Ok(simulate_sinogram(phantom, self.orientations, self.samples, self.extent())?)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TomographyReport {
    pub columns: usize,
    pub rows: usize,
    pub rank: usize,
    pub residual: f64,
    pub metrics: ErrorMetrics,
    pub solve_seconds: f64,
    pub eval_seconds: f64,
    #[serde(skip)]
    pub image: SampledSignal,
    #[serde(skip)]
    pub coefficients: CoefficientSet,
}

/// Least-squares reconstruction from the sinogram in the given basis, evaluated
/// against the phantom on the setup grid.
pub fn tomography(setup: &TomographySetup, phantom: &Phantom, sino: &Sinogram, basis: &[WaveletIndex]) -> Result<TomographyReport> {
    let frame = setup.frame()?;
    let t0 = Instant::now();
    let rec = reconstruct(&frame, basis, sino, setup.svd_cutoff, 0.0)?;
    let solve_seconds = t0.elapsed().as_secs_f64();
    let grid = setup.grid()?;
    let t0 = Instant::now();
    let image = synthesize_direct(&rec.coefficients, &frame, &grid, 64.0)?;
    let eval_seconds = t0.elapsed().as_secs_f64();
    let truth = phantom.sample(&grid)?;
    Ok(TomographyReport {
        columns: basis.len(),
        rows: rec.rows,
        rank: rec.solution.rank,
        residual: rec.solution.residual,
        metrics: error_metrics(&image, &truth)?,
        solve_seconds,
        eval_seconds,
        image,
        coefficients: rec.coefficients,
    })
}

/// Boxes covering the disk |x − c| ≤ r, one horizontal strip per row of height h.
pub fn disk_regions(c: [f64; 2], r: f64, h: f64) -> Vec<Region> {
    let n = (r / h).floor() as i32;
    (-n..=n)
        .map(|i| {
            let y = c[1] + i as f64 * h;
            let w = (r * r - (i as f64 * h).powi(2)).max(0.0).sqrt();
            Region { lo: [c[0] - w, y - h / 2.0], hi: [c[0] + w, y + h / 2.0] }
        })
        .collect()
}

/// Regions of the sparse basis for [`Phantom::two_balls`]: every function at
/// j = −1, 0; disks around both balls at j = 1, 2; the small ball alone at j = 3.
/// Strips follow the translation step of each level.
pub fn two_ball_regions() -> BTreeMap<i32, Vec<Region>> {
    let (big, small) = ([0.0, 0.0], [2.0, 1.3]);
    let disks = |list: &[([f64; 2], f64)], h: f64| list.iter().flat_map(|&(c, r)| disk_regions(c, r, h)).collect::<Vec<_>>();
    let mut r = BTreeMap::new();
    r.insert(1, disks(&[(big, 2.4), (small, 0.9)], 0.5));
    r.insert(2, disks(&[(big, 2.1), (small, 0.8)], 0.25));
    r.insert(3, disks(&[(small, 0.55)], 0.125));
    r
}

#[derive(Clone, Debug, Serialize)]
pub struct SparseReport {
    pub full: TomographyReport,
    pub sparse: TomographyReport,
    pub column_ratio: f64,
    pub time_ratio: f64,
    /// relative L∞ error over samples inside the j = 2 and j = 3 regions
    pub in_region_full: f64,
    pub in_region_sparse: f64,
}

pub fn sparse_tomography(setup: &TomographySetup) -> Result<SparseReport> {
    let phantom = Phantom::two_balls();
    let sino = setup.sinogram(&phantom)?;
    let frame = setup.frame()?;
    let universe = frame.index_universe();
    let regions = two_ball_regions();
    let chosen = select_sparse_basis(&frame, &regions);
    let full = tomography(setup, &phantom, &sino, &universe)?;
    let sparse = tomography(setup, &phantom, &sino, &chosen)?;
    let grid = setup.grid()?;
    let truth = phantom.sample(&grid)?;
    let inside: Vec<usize> = (0..grid.len())
        .filter(|&i| {
            let p = grid.point(i);
            [2, 3].iter().any(|j| regions[j].iter().any(|r| r.contains([p[0], p[1]])))
        })
        .collect();
    let pick = |s: &SampledSignal| inside.iter().map(|&i| s.values[i]).collect::<Vec<_>>();
    let t = pick(&truth);
    Ok(SparseReport {
        column_ratio: chosen.len() as f64 / universe.len() as f64,
        time_ratio: sparse.solve_seconds / full.solve_seconds.max(1e-12),
        in_region_full: relative_errors(&pick(&full.image), &t)?.linf,
        in_region_sparse: relative_errors(&pick(&sparse.image), &t)?.linf,
        full,
        sparse,
    })
}
