//! Frame analysis and synthesis through periodic FFTs on a zero-padded grid.
//!
//! For level j with step Δ = q·h the coefficients are samples of the band-limited
//! convolution f * ψ̃ on the coarse lattice, obtained by folding the windowed
//! spectrum modulo N/q and taking one small inverse FFT per orientation.

use crate::coeffs::CoefficientSet;
use crate::error::{Error, Result};
use crate::fft::{fft_nd, good_size};
use crate::frame::{dilation, Frame, WaveletIndex};
use crate::signal::{GridSpec, SampledSignal};
use crate::slice3d::{plane_sum, PlaneKernel};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Zero-padded periodic grid with integer origin and integer extent.
#[derive(Clone, Debug)]
struct Padded {
    origin: [f64; 3],
    n: [usize; 3],
    h: f64,
    dim: usize,
}

impl Padded {
    fn total(&self) -> usize {
        self.n.iter().product()
    }

    /// Fold size per axis and the integer translation of the first coarse sample.
    fn level(&self, j: i32) -> ([usize; 3], [i32; 3]) {
        let delta = dilation(j);
        let mut nc = [1usize; 3];
        let mut k0 = [0i32; 3];
        for a in 0..self.dim {
            let q = (delta / self.h).round() as usize;
            nc[a] = self.n[a] / q;
            k0[a] = (self.origin[a] / delta).round() as i32;
        }
        (nc, k0)
    }
}

/// Grid spacing must divide the finest step; returns 1/h as an integer.
fn check_spacing(frame: &Frame, h: f64) -> Result<usize> {
    let inv = 1.0 / h;
    let m = inv.round();
    let finest = 1usize << frame.config().j_max;
    if (inv - m).abs() > 1e-9 * inv || m < 1.0 || (m as usize) % finest != 0 {
        return Err(Error::UnderResolved(format!(
            "spacing {h} must be 2^-{} / m for an integer m",
            frame.config().j_max
        )));
    }
    Ok(m as usize)
}

fn plan(frame: &Frame, h: f64, lo: &[f64], hi: &[f64]) -> Result<Padded> {
    let dim = frame.dim();
    let inv = check_spacing(frame, h)?;
    let apron = frame.config().apron;
    let mut origin = [0.0; 3];
    let mut n = [1usize; 3];
    for a in 0..dim {
        let o = (lo[a] - apron).floor();
        let need = (hi[a] + apron + h - o).ceil().max(1.0) as usize;
        let ext = good_size(need);
        origin[a] = o;
        n[a] = ext * inv;
    }
    let total: usize = n.iter().product();
    if total > 1 << 27 {
        return Err(Error::TooLarge(format!("padded grid of {total} points")));
    }
    Ok(Padded { origin, n, h, dim })
}

/// Bounding box of the frame domain and the sample grid.
fn base_box(frame: &Frame, grid: &GridSpec) -> (Vec<f64>, Vec<f64>) {
    let cfg = frame.config();
    let up = grid.upper();
    let lo = (0..grid.dim()).map(|a| cfg.domain_lo[a].min(grid.origin[a])).collect();
    let hi = (0..grid.dim()).map(|a| cfg.domain_hi[a].max(up[a])).collect();
    (lo, hi)
}

/// Calls `f(flat_index, fold_index, xi)` for every frequency inside the band box of level j.
fn for_band<F: FnMut(usize, usize, &[f64])>(p: &Padded, j: i32, nc: [usize; 3], mut f: F) {
    let delta = dilation(j);
    // |ξ_a| ≤ π/Δ suffices for every window
    let mut ranges = [(0i64, 0i64); 3];
    for a in 0..p.dim {
        let n = p.n[a] as i64;
        let kmax = (p.n[a] as f64 * p.h / (2.0 * delta)).floor() as i64;
        ranges[a] = (-(kmax.min(n / 2)), kmax.min((n - 1) / 2));
    }
    let step: Vec<f64> = (0..3).map(|a| 2.0 * PI / (p.n[a] as f64 * p.h)).collect();
    let mut xi = [0.0; 3];
    for k0 in ranges[0].0..=ranges[0].1 {
        xi[0] = k0 as f64 * step[0];
        let i0 = k0.rem_euclid(p.n[0] as i64) as usize;
        let c0 = k0.rem_euclid(nc[0] as i64) as usize;
        for k1 in ranges[1].0..=ranges[1].1 {
            xi[1] = k1 as f64 * step[1];
            let i1 = k1.rem_euclid(p.n[1] as i64) as usize;
            let c1 = k1.rem_euclid(nc[1] as i64) as usize;
            for k2 in ranges[2].0..=ranges[2].1 {
                xi[2] = k2 as f64 * step[2];
                let i2 = k2.rem_euclid(p.n[2] as i64) as usize;
                let c2 = k2.rem_euclid(nc[2] as i64) as usize;
                let flat = (i0 * p.n[1] + i1) * p.n[2] + i2;
                let fold = (c0 * nc[1] + c1) * nc[2] + c2;
                f(flat, fold, &xi[..p.dim]);
            }
        }
    }
}

/// f_s = ⟨f, ψ_s⟩ for every frame function on the padded periodic grid.
pub fn analyze(f: &SampledSignal, frame: &Frame) -> Result<CoefficientSet> {
    let dim = frame.dim();
    if f.grid.dim() != dim {
        return Err(Error::GridMismatch(format!("{}D signal for a {dim}D frame", f.grid.dim())));
    }
    let h = f.grid.spacing;
    let inv = check_spacing(frame, h)?;
    for o in &f.grid.origin {
        let s = o * inv as f64;
        if (s - s.round()).abs() > 1e-7 {
            return Err(Error::GridMismatch(format!("grid origin {o} is not a multiple of the spacing")));
        }
    }
    let (lo, hi) = base_box(frame, &f.grid);
    let p = plan(frame, h, &lo, &hi)?;
    let mut data = vec![Complex64::new(0.0, 0.0); p.total()];
    let off: Vec<usize> = (0..dim).map(|a| ((f.grid.origin[a] - p.origin[a]) / h).round() as usize).collect();
    let mut shape = [1usize; 3];
    shape[..dim].copy_from_slice(&f.grid.shape);
    let mut any = false;
    for i0 in 0..shape[0] {
        for i1 in 0..shape[1] {
            for i2 in 0..shape[2] {
                let v = f.values[(i0 * shape[1] + i1) * shape[2] + i2];
                any |= v != 0.0;
                let (a0, a1) = (i0 + off[0], i1 + off[1]);
                let a2 = if dim == 3 { i2 + off[2] } else { 0 };
                data[(a0 * p.n[1] + a1) * p.n[2] + a2] = Complex64::new(v, 0.0);
            }
        }
    }
    if !any {
        return Ok(CoefficientSet::empty(frame.config().clone()));
    }
    fft_nd(&mut data, &p.n, false);
    let norm_total = p.total() as f64;
    let mut entries = Vec::new();
    for j in frame.config().levels() {
        let (nc, k0) = p.level(j);
        let scale = dilation(j).powf(dim as f64 / 2.0) / norm_total;
        for t in 0..frame.config().orientation_count(j) {
            let mut g = vec![Complex64::new(0.0, 0.0); nc.iter().product()];
            for_band(&p, j, nc, |flat, fold, xi| {
                let w = frame.window(j, t, xi);
                if w != 0.0 {
                    g[fold] += data[flat] * w;
                }
            });
            fft_nd(&mut g, &nc, true);
            for c0 in 0..nc[0] {
                for c1 in 0..nc[1] {
                    for c2 in 0..nc[2] {
                        let v = g[(c0 * nc[1] + c1) * nc[2] + c2].re * scale;
                        if v != 0.0 {
                            let k = [k0[0] + c0 as i32, k0[1] + c1 as i32, if dim == 3 { k0[2] + c2 as i32 } else { 0 }];
                            entries.push((WaveletIndex { dim: dim as u8, j: j as i8, k, t }, v));
                        }
                    }
                }
            }
        }
    }
    CoefficientSet::from_entries(frame.config().clone(), entries)
}

/// Σ_s f_s ψ_s sampled on `grid`.
pub fn synthesize(c: &CoefficientSet, frame: &Frame, grid: &GridSpec) -> Result<SampledSignal> {
    let dim = frame.dim();
    if c.config() != frame.config() {
        return Err(Error::InvalidArgument("coefficients were produced by a different frame".into()));
    }
    if grid.dim() != dim {
        return Err(Error::GridMismatch(format!("{}D grid for a {dim}D frame", grid.dim())));
    }
    if c.is_empty() {
        return Ok(SampledSignal::zeros(grid.clone()));
    }
    let h = grid.spacing;
    let inv = check_spacing(frame, h)? as f64;
    for o in &grid.origin {
        if ((o * inv) - (o * inv).round()).abs() > 1e-7 {
            return Err(Error::GridMismatch(format!("grid origin {o} is not a multiple of the spacing")));
        }
    }
    // same periodic box as analysis unless some coefficient center falls outside it
    let (mut lo, mut hi) = base_box(frame, grid);
    let mut p = plan(frame, h, &lo, &hi)?;
    let mut outside = false;
    for (s, _) in c.iter() {
        let ctr = frame.center(s);
        for a in 0..dim {
            outside |= ctr[a] < p.origin[a] || ctr[a] > p.origin[a] + (p.n[a] - 1) as f64 * h;
            lo[a] = lo[a].min(ctr[a]);
            hi[a] = hi[a].max(ctr[a]);
        }
    }
    if outside {
        p = plan(frame, h, &lo, &hi)?;
    }
    let mut groups: BTreeMap<(i8, u16), Vec<([i32; 3], f64)>> = BTreeMap::new();
    for (s, v) in c.iter() {
        groups.entry((s.j, s.t)).or_default().push((s.k, v));
    }
    let mut spec = vec![Complex64::new(0.0, 0.0); p.total()];
    for ((j, t), list) in groups {
        let j = j as i32;
        let (nc, k0) = p.level(j);
        let mut g = vec![Complex64::new(0.0, 0.0); nc.iter().product()];
        for (k, v) in list {
            let mut idx = [0usize; 3];
            for a in 0..dim {
                idx[a] = (k[a] - k0[a]) as usize;
            }
            g[(idx[0] * nc[1] + idx[1]) * nc[2] + idx[2]] += v;
        }
        fft_nd(&mut g, &nc, false);
        let scale = dilation(j).powf(dim as f64 / 2.0) / h.powi(dim as i32);
        for_band(&p, j, nc, |flat, fold, xi| {
            let w = frame.window(j, t, xi);
            if w != 0.0 {
                spec[flat] += g[fold] * (w * scale);
            }
        });
    }
    fft_nd(&mut spec, &p.n, true);
    let norm_total = p.total() as f64;
    let off: Vec<usize> = (0..dim).map(|a| ((grid.origin[a] - p.origin[a]) / h).round() as usize).collect();
    let mut shape = [1usize; 3];
    shape[..dim].copy_from_slice(&grid.shape);
    let mut values = Vec::with_capacity(grid.len());
    for i0 in 0..shape[0] {
        for i1 in 0..shape[1] {
            for i2 in 0..shape[2] {
                let a2 = if dim == 3 { i2 + off[2] } else { 0 };
                values.push(spec[((i0 + off[0]) * p.n[1] + i1 + off[1]) * p.n[2] + a2].re / norm_total);
            }
        }
    }
    SampledSignal::new(grid.clone(), values)
}

/// Σ_s f_s ψ_s on a 2D grid by direct spatial summation, without periodization.
///
/// Each function is truncated at `support_radius` dilated units from its center.
pub fn synthesize_direct(c: &CoefficientSet, frame: &Frame, grid: &GridSpec, support_radius: f64) -> Result<SampledSignal> {
    if frame.dim() != 2 || grid.dim() != 2 {
        return Err(Error::InvalidArgument("direct synthesis is implemented for 2D frames".into()));
    }
    if c.config() != frame.config() {
        return Err(Error::InvalidArgument("coefficients were produced by a different frame".into()));
    }
    if !(support_radius > 0.0) {
        return Err(Error::InvalidArgument("support radius must be positive".into()));
    }
    let mut groups: BTreeMap<(i8, u16), Vec<([f64; 2], f64)>> = BTreeMap::new();
    for (s, v) in c.iter() {
        let ctr = frame.center(s);
        groups.entry((s.j, s.t)).or_default().push(([ctr[0], ctr[1]], v));
    }
    let mut kernels = Vec::with_capacity(groups.len());
    for ((j, t), items) in groups {
        let j = j as i32;
        let beta = if j < 0 { vec![Complex64::new(1.0, 0.0)] } else { frame.windows_2d(j)[t as usize].beta.clone() };
        let pre = 1.0 / (2.0 * PI * dilation(j));
        kernels.push((PlaneKernel::new(&beta, j, frame.bank(), pre)?, items));
    }
    let (values, _, _) = plane_sum(kernels, grid, support_radius, false);
    SampledSignal::new(grid.clone(), values)
}

/// The coefficient set with `eps` hard thresholding applied.
pub fn threshold(c: &CoefficientSet, eps: f64) -> Result<CoefficientSet> {
    c.threshold(eps)
}
