//! Projection of 2D frame expansions along a direction ν by summing closed-form
//! sliced (1D) wavelets.
//!
//! Rays are x = y·u + s·ν with detector axis u = (sin θ_ν, −cos θ_ν). The
//! projection of ψ_{j,k,t} is (1/2π)·γ̂_t(θ_u)·h¹(2^j y − 2^j⟨c, u⟩).

use crate::coeffs::CoefficientSet;
use crate::error::{Error, Result};
use crate::frame::{dilation, Frame, WaveletIndex};
use crate::radial::{ProfileBank, Window};
use crate::signal::{GridSpec, SampledSignal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Projection direction ν = (cos θ, sin θ), normalized to [0, 2π).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionDirection2D {
    pub theta_nu: f64,
}

fn snap(v: f64) -> f64 {
    if v.abs() < 1e-14 {
        0.0
    } else if (v.abs() - 1.0).abs() < 1e-14 {
        v.signum()
    } else {
        v
    }
}

impl ProjectionDirection2D {
    pub fn new(theta_nu: f64) -> Result<Self> {
        if !theta_nu.is_finite() {
            return Err(Error::InvalidArgument("non-finite projection angle".into()));
        }
        Ok(Self { theta_nu: theta_nu.rem_euclid(2.0 * PI) })
    }

    pub fn from_degrees(deg: f64) -> Result<Self> {
        Self::new(deg.to_radians())
    }

    /// Unit vector ν along which the signal is integrated.
    pub fn ray(&self) -> [f64; 2] {
        let (s, c) = self.theta_nu.sin_cos();
        [snap(c), snap(s)]
    }

    /// Unit vector u of the detector line (ν rotated by −90°).
    pub fn detector_axis(&self) -> [f64; 2] {
        let [c, s] = self.ray();
        [s, -c]
    }

    /// Polar angle of the detector axis.
    pub fn detector_angle(&self) -> f64 {
        self.theta_nu - PI / 2.0
    }
}

/// One projected wavelet: weight·P((y − center)/Δ) with P the slice profile of `window`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlicedWavelet1D {
    pub j: i32,
    /// position on the detector axis, in physical units
    pub center: f64,
    pub weight: f64,
    pub dilation: f64,
    pub window: Window,
}

impl SlicedWavelet1D {
    /// Center in dilated units, 2^j⟨c, u⟩.
    pub fn center_dilated(&self) -> f64 {
        self.center / self.dilation
    }
}

/// Sliced counterpart of a 2D frame function.
pub fn slice_wavelet(frame: &Frame, s: &WaveletIndex, nu: ProjectionDirection2D) -> Result<SlicedWavelet1D> {
    frame.check_index(s)?;
    if s.dim != 2 {
        return Err(Error::InvalidArgument("slice_wavelet takes 2D indices".into()));
    }
    let u = nu.detector_axis();
    let c = frame.center(s);
    let j = s.j as i32;
    let gamma = frame.angular(j, s.t, &u);
    Ok(SlicedWavelet1D {
        j,
        center: c[0] * u[0] + c[1] * u[1],
        weight: gamma / (2.0 * PI),
        dilation: dilation(j),
        window: if j < 0 { Window::Scaling } else { Window::Wavelet },
    })
}

/// Value of a sliced wavelet at detector coordinate y.
pub fn eval_sliced(w: &SlicedWavelet1D, y: f64, bank: &ProfileBank) -> Result<f64> {
    if w.weight == 0.0 {
        return Ok(0.0);
    }
    Ok(w.weight * bank.slice(w.window)?.eval((y - w.center) / w.dilation))
}

/// Culling and locality settings for projections.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectOptions {
    /// sliced wavelets with |weight| ≤ omega_cut are skipped
    pub omega_cut: f64,
    /// only samples in [a, b] are produced
    pub region: Option<(f64, f64)>,
    /// wavelets with centers farther than region_apron·Δ_j outside the region are skipped
    pub region_apron: f64,
    /// per-sample cutoff |y − center| ≤ support_radius·Δ_j; at most the table range
    pub support_radius: f64,
    /// sum wavelets sharing level and projected center before evaluation
    pub merge_coincident: bool,
}

impl Default for ProjectOptions {
    fn default() -> Self {
        Self { omega_cut: 1e-8, region: None, region_apron: 8.0, support_radius: 64.0, merge_coincident: true }
    }
}

impl ProjectOptions {
    /// Compact-support evaluation whose cost follows the sample count directly.
    pub fn local() -> Self {
        Self { support_radius: 8.0, merge_coincident: false, ..Self::default() }
    }
}

/// Cost counters of one projection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProjectionStats {
    /// (sample, wavelet) pairs evaluated
    pub evaluations: u64,
    pub coefficients: usize,
    pub culled_by_weight: usize,
    pub culled_by_region: usize,
    /// wavelets left after culling and merging
    pub wavelets: usize,
    /// fraction of coefficients surviving the weight cut
    pub omega: f64,
    pub samples: usize,
    pub region_length: f64,
}

/// Sliced wavelets of one level, ready for evaluation.
#[derive(Clone, Debug)]
pub(crate) struct Lane {
    pub window: Window,
    pub dilation: f64,
    pub items: Vec<(f64, f64)>,
}

/// Groups (level, position, amplitude) triples into lanes, applies region culling
/// and evaluates them on the samples of `grid` inside the region.
pub(crate) fn evaluate_lanes(
    mut lanes: BTreeMap<i32, Lane>,
    grid: &GridSpec,
    opts: &ProjectOptions,
    bank: &ProfileBank,
    stats: &mut ProjectionStats,
) -> Result<SampledSignal> {
    if grid.dim() != 1 {
        return Err(Error::GridMismatch("projection samples must form a 1D grid".into()));
    }
    if !(opts.omega_cut >= 0.0) || !(opts.support_radius > 0.0) || !(opts.region_apron >= 0.0) {
        return Err(Error::InvalidArgument("omega_cut, support radius and apron must be non-negative".into()));
    }
    let (a, b) = match opts.region {
        Some((a, b)) if a <= b => (a, b),
        Some((a, b)) => return Err(Error::InvalidArgument(format!("empty region [{a}, {b}]"))),
        None => (f64::NEG_INFINITY, f64::INFINITY),
    };
    let first = grid.origin[0];
    let h = grid.spacing;
    let idx: Vec<usize> = (0..grid.shape[0])
        .filter(|&i| {
            let y = first + h * i as f64;
            y >= a - 1e-12 && y <= b + 1e-12
        })
        .collect();
    let out_grid = if idx.is_empty() {
        return Err(Error::InvalidArgument("region contains no samples".into()));
    } else {
        GridSpec::new(vec![first + h * idx[0] as f64], h, vec![idx.len()])?
    };
    stats.samples = idx.len();
    stats.region_length = h * (idx.len() - 1) as f64;
    let mut prepared = Vec::new();
    for lane in lanes.values_mut() {
        let lo = a - opts.region_apron * lane.dilation;
        let hi = b + opts.region_apron * lane.dilation;
        let before = lane.items.len();
        lane.items.retain(|&(p, _)| p >= lo && p <= hi);
        stats.culled_by_region += before - lane.items.len();
        lane.items.sort_by(|x, y| x.0.total_cmp(&y.0));
        if opts.merge_coincident {
            let mut merged: Vec<(f64, f64)> = Vec::with_capacity(lane.items.len());
            for &(p, v) in &lane.items {
                match merged.last_mut() {
                    Some(last) if last.0 == p => last.1 += v,
                    _ => merged.push((p, v)),
                }
            }
            merged.retain(|e| e.1 != 0.0);
            lane.items = merged;
        }
        stats.wavelets += lane.items.len();
        let table = bank.slice(lane.window)?;
        let radius = opts.support_radius.min(table.r_max());
        prepared.push((lane.dilation, radius * lane.dilation, table, &lane.items));
    }
    let results: Vec<(f64, u64)> = idx
        .par_iter()
        .map(|&i| {
            let y = first + h * i as f64;
            let mut sum = 0.0;
            let mut count = 0u64;
            for (delta, reach, table, items) in &prepared {
                let start = items.partition_point(|e| e.0 < y - reach);
                let inv = 1.0 / delta;
                for &(p, v) in &items[start..] {
                    if p > y + reach {
                        break;
                    }
                    sum += v * table.eval((y - p) * inv);
                    count += 1;
                }
            }
            (sum, count)
        })
        .collect();
    stats.evaluations = results.iter().map(|r| r.1).sum();
    SampledSignal::new(out_grid, results.into_iter().map(|r| r.0).collect())
}

/// Projection f_ν(y) = Σ_s f_s ψ_s^{1,ν}(y) on the samples of `grid` (1D).
pub fn project(
    c: &CoefficientSet,
    frame: &Frame,
    nu: ProjectionDirection2D,
    grid: &GridSpec,
    opts: &ProjectOptions,
) -> Result<(SampledSignal, ProjectionStats)> {
    if frame.dim() != 2 || c.config() != frame.config() {
        return Err(Error::InvalidArgument("project needs 2D coefficients of this frame".into()));
    }
    let u = nu.detector_axis();
    let mut stats = ProjectionStats { coefficients: c.len(), ..Default::default() };
    // weights depend only on (j, t)
    let mut weights: BTreeMap<(i8, u16), f64> = BTreeMap::new();
    let mut lanes: BTreeMap<i32, Lane> = BTreeMap::new();
    for (s, v) in c.iter() {
        let w = *weights
            .entry((s.j, s.t))
            .or_insert_with(|| frame.angular(s.j as i32, s.t, &u) / (2.0 * PI));
        if w.abs() <= opts.omega_cut {
            stats.culled_by_weight += 1;
            continue;
        }
        let j = s.j as i32;
        let ctr = frame.center(s);
        let lane = lanes.entry(j).or_insert_with(|| Lane {
            window: if j < 0 { Window::Scaling } else { Window::Wavelet },
            dilation: dilation(j),
            items: Vec::new(),
        });
        lane.items.push((ctr[0] * u[0] + ctr[1] * u[1], v * w));
    }
    stats.omega = if c.is_empty() { 0.0 } else { 1.0 - stats.culled_by_weight as f64 / c.len() as f64 };
    let out = evaluate_lanes(lanes, grid, opts, frame.bank(), &mut stats)?;
    Ok((out, stats))
}

/// Coefficients of the projection along x₂: f¹_{j,k₁,t} = Σ_{k₂} f_{j,k,t}.
pub fn project_coeffs_axis(c: &CoefficientSet) -> BTreeMap<(i8, i32, u16), f64> {
    let mut out: BTreeMap<(i8, i32, u16), f64> = BTreeMap::new();
    for (s, v) in c.iter() {
        *out.entry((s.j, s.k[0], s.t)).or_insert(0.0) += v;
    }
    out.retain(|_, v| *v != 0.0);
    out
}
