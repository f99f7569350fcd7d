//! Projections of 3D frame expansions: along one axis onto a plane (a 2D polar
//! wavelet per frame function) and onto a line (a 1D wavelet per frame function).

use crate::angular::{equator_beta, pole_value, rotate_kappa, rotate_vector};
use crate::coeffs::CoefficientSet;
use crate::error::{Error, Result};
use crate::frame::{dilation, Frame, WaveletIndex};
use crate::radial::{ProfileBank, ProfileTable, Window};
use crate::signal::{GridSpec, SampledSignal};
use crate::slice2d::{evaluate_lanes, Lane, ProjectOptions, ProjectionStats, SlicedWavelet1D};
use crate::special::SphericalDirection;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

fn snap(v: [f64; 3]) -> [f64; 3] {
    v.map(|x| if x.abs() < 1e-14 { 0.0 } else if (x.abs() - 1.0).abs() < 1e-14 { x.signum() } else { x })
}

/// Orthonormal frame (e1, e2, ν) of the detector plane, e_i = R_ν e_i with
/// R_ν = R_z(φ_ν) R_y(θ_ν).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneBasis {
    pub e1: [f64; 3],
    pub e2: [f64; 3],
    pub nu: [f64; 3],
}

impl PlaneBasis {
    pub fn new(nu: SphericalDirection) -> Self {
        let r = |v| snap(rotate_vector(v, nu.phi, nu.theta, 0.0));
        Self { e1: r([1.0, 0.0, 0.0]), e2: r([0.0, 1.0, 0.0]), nu: r([0.0, 0.0, 1.0]) }
    }

    /// Plane coordinates of the orthogonal projection of x.
    pub fn coords(&self, x: [f64; 3]) -> [f64; 2] {
        [dot(self.e1, x), dot(self.e2, x)]
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// One projected 3D frame function, a 2D polar wavelet
/// (Δ^{-1/2}/2π) Σ_m i^m β_m e^{imθ} h_m(|y − center|/Δ).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlicedWavelet2D {
    pub j: i32,
    /// center in plane coordinates
    pub center: [f64; 2],
    /// β_m stored at m + l_max
    pub beta: Vec<Complex64>,
    pub dilation: f64,
    pub window: Window,
}

impl SlicedWavelet2D {
    pub fn l_max(&self) -> i32 {
        (self.beta.len() as i32 - 1) / 2
    }

    pub fn beta(&self, m: i32) -> Complex64 {
        let l = self.l_max();
        if m.abs() > l {
            Complex64::new(0.0, 0.0)
        } else {
            self.beta[(m + l) as usize]
        }
    }
}

/// β_m of the window (j, t) seen from direction ν.
fn projected_beta(frame: &Frame, j: i32, t: u16, nu: SphericalDirection) -> Result<Vec<Complex64>> {
    if j < 0 {
        return Ok(vec![Complex64::new(1.0, 0.0)]);
    }
    let w = &frame.windows_3d(j)[t as usize];
    equator_beta(&rotate_kappa(w, nu)?)
}

fn check_3d(frame: &Frame, s: &WaveletIndex) -> Result<()> {
    frame.check_index(s)?;
    if s.dim != 3 {
        return Err(Error::InvalidArgument("3D slicing takes 3D indices".into()));
    }
    Ok(())
}

/// Projection of ψ_s along ν as a 2D polar wavelet.
pub fn slice_to_2d(frame: &Frame, s: &WaveletIndex, nu: SphericalDirection) -> Result<SlicedWavelet2D> {
    check_3d(frame, s)?;
    let j = s.j as i32;
    let basis = PlaneBasis::new(nu);
    Ok(SlicedWavelet2D {
        j,
        center: basis.coords(frame.center(s)),
        beta: projected_beta(frame, j, s.t, nu)?,
        dilation: dilation(j),
        window: if j < 0 { Window::Scaling } else { Window::Wavelet },
    })
}

/// Evaluator of pre·Σ_m i^m β_m e^{imθ} h_m(r/Δ) shared by all functions of one (j, t).
pub(crate) struct PlaneKernel {
    dilation: f64,
    /// i^m β_m for m = −L..=L
    a: Vec<Complex64>,
    tables: Vec<Arc<ProfileTable>>,
    pre: f64,
}

impl PlaneKernel {
    pub(crate) fn new(beta: &[Complex64], j: i32, bank: &ProfileBank, pre: f64) -> Result<Self> {
        let l = (beta.len() as i32 - 1) / 2;
        let window = if j < 0 { Window::Scaling } else { Window::Wavelet };
        let delta = dilation(j);
        let a = (-l..=l).map(|m| Complex64::i().powi(m) * beta[(m + l) as usize]).collect();
        Ok(Self { dilation: delta, a, tables: bank.hankel_family(window, l as u32)?, pre })
    }

    #[inline]
    pub(crate) fn eval(&self, dx: f64, dy: f64) -> f64 {
        let r = (dx * dx + dy * dy).sqrt();
        let l = (self.a.len() as i32 - 1) / 2;
        let x = r / self.dilation;
        let mut sum = self.a[l as usize].re * self.tables[0].eval(x);
        if l > 0 {
            // e^{iθ} from the offset; at r = 0 only h_0 is nonzero
            let e = if r > 0.0 { Complex64::new(dx / r, dy / r) } else { Complex64::new(1.0, 0.0) };
            let mut em = Complex64::new(1.0, 0.0);
            for m in 1..=l {
                em *= e;
                let hm = self.tables[m as usize].eval(x);
                if hm == 0.0 {
                    continue;
                }
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let plus = self.a[(l + m) as usize] * em;
                let minus = self.a[(l - m) as usize] * em.conj() * sign;
                sum += (plus + minus).re * hm;
            }
        }
        self.pre * sum
    }
}

fn plane_prefactor(j: i32) -> f64 {
    dilation(j).powf(-0.5) / (2.0 * PI)
}

/// Value of a projected wavelet at plane coordinates y.
pub fn eval_sliced_2d(w: &SlicedWavelet2D, y: [f64; 2], bank: &ProfileBank) -> Result<f64> {
    let k = PlaneKernel::new(&w.beta, w.j, bank, plane_prefactor(w.j))?;
    Ok(k.eval(y[0] - w.center[0], y[1] - w.center[1]))
}

/// Σ_s f_s ψ_s^{2,ν} on a 2D grid of plane coordinates.
pub fn project_3d_to_2d(
    c: &CoefficientSet,
    frame: &Frame,
    nu: SphericalDirection,
    grid: &GridSpec,
    opts: &ProjectOptions,
) -> Result<(SampledSignal, ProjectionStats)> {
    if frame.dim() != 3 || c.config() != frame.config() {
        return Err(Error::InvalidArgument("project_3d_to_2d needs 3D coefficients of this frame".into()));
    }
    if grid.dim() != 2 {
        return Err(Error::GridMismatch("plane samples must form a 2D grid".into()));
    }
    if opts.region.is_some() {
        return Err(Error::InvalidArgument("interval regions apply to 1D projections only".into()));
    }
    let basis = PlaneBasis::new(nu);
    let mut stats = ProjectionStats { coefficients: c.len(), samples: grid.len(), ..Default::default() };
    let mut groups: BTreeMap<(i8, u16), Vec<([f64; 2], f64)>> = BTreeMap::new();
    for (s, v) in c.iter() {
        groups.entry((s.j, s.t)).or_default().push((basis.coords(frame.center(s)), v));
    }
    let mut kernels = Vec::new();
    for ((j, t), items) in groups {
        let j = j as i32;
        let beta = projected_beta(frame, j, t, nu)?;
        let size = beta.iter().map(|b| b.norm()).fold(0.0, f64::max);
        if size <= opts.omega_cut {
            stats.culled_by_weight += items.len();
            continue;
        }
        kernels.push((PlaneKernel::new(&beta, j, frame.bank(), plane_prefactor(j))?, items));
    }
    stats.omega = if c.is_empty() { 0.0 } else { 1.0 - stats.culled_by_weight as f64 / c.len() as f64 };
    let (values, evaluations, wavelets) = plane_sum(kernels, grid, opts.support_radius, opts.merge_coincident);
    stats.evaluations = evaluations;
    stats.wavelets = wavelets;
    let out = SampledSignal::new(grid.clone(), values)?;
    Ok((out, stats))
}

/// Sums kernel-weighted functions at every point of a 2D grid; items are
/// (center, amplitude) pairs. Returns values, evaluation count and function count.
pub(crate) fn plane_sum(
    groups: Vec<(PlaneKernel, Vec<([f64; 2], f64)>)>,
    grid: &GridSpec,
    support_radius: f64,
    merge: bool,
) -> (Vec<f64>, u64, usize) {
    let mut wavelets = 0;
    let mut prepared = Vec::with_capacity(groups.len());
    for (k, mut items) in groups {
        items.sort_by(|a, b| a.0[0].total_cmp(&b.0[0]).then(a.0[1].total_cmp(&b.0[1])));
        if merge {
            let mut merged: Vec<([f64; 2], f64)> = Vec::with_capacity(items.len());
            for (p, v) in items {
                match merged.last_mut() {
                    Some(last) if last.0 == p => last.1 += v,
                    _ => merged.push((p, v)),
                }
            }
            merged.retain(|e| e.1 != 0.0);
            items = merged;
        }
        wavelets += items.len();
        let reach = support_radius.min(k.tables[0].r_max()) * k.dilation;
        prepared.push((k, reach, items));
    }
    let results: Vec<(f64, u64)> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let p = grid.point(i);
            let mut sum = 0.0;
            let mut count = 0u64;
            for (k, reach, items) in &prepared {
                let start = items.partition_point(|e| e.0[0] < p[0] - reach);
                for &(q, v) in &items[start..] {
                    if q[0] > p[0] + reach {
                        break;
                    }
                    let (dx, dy) = (p[0] - q[0], p[1] - q[1]);
                    if dy.abs() > *reach || dx * dx + dy * dy > reach * reach {
                        continue;
                    }
                    sum += v * k.eval(dx, dy);
                    count += 1;
                }
            }
            (sum, count)
        })
        .collect();
    let evaluations = results.iter().map(|r| r.1).sum();
    (results.into_iter().map(|r| r.0).collect(), evaluations, wavelets)
}

/// Projection of ψ_s onto the line through the origin along `axis`.
pub fn slice_to_1d(frame: &Frame, s: &WaveletIndex, axis: SphericalDirection) -> Result<SlicedWavelet1D> {
    check_3d(frame, s)?;
    let j = s.j as i32;
    let delta = dilation(j);
    let gamma = if j < 0 { 1.0 } else { pole_value(&rotate_kappa(&frame.windows_3d(j)[s.t as usize], axis)?).re };
    Ok(SlicedWavelet1D {
        j,
        center: dot(frame.center(s), snap(axis.to_vector())),
        weight: delta.sqrt() * gamma / (2.0 * PI),
        dilation: delta,
        window: if j < 0 { Window::Scaling } else { Window::Wavelet },
    })
}

/// Σ_s f_s ψ_s^{1,axis} on the samples of a 1D grid.
pub fn project_3d_to_1d(
    c: &CoefficientSet,
    frame: &Frame,
    axis: SphericalDirection,
    grid: &GridSpec,
    opts: &ProjectOptions,
) -> Result<(SampledSignal, ProjectionStats)> {
    if frame.dim() != 3 || c.config() != frame.config() {
        return Err(Error::InvalidArgument("project_3d_to_1d needs 3D coefficients of this frame".into()));
    }
    let a = snap(axis.to_vector());
    let mut stats = ProjectionStats { coefficients: c.len(), ..Default::default() };
    let mut weights: BTreeMap<(i8, u16), f64> = BTreeMap::new();
    let mut lanes: BTreeMap<i32, Lane> = BTreeMap::new();
    for (s, v) in c.iter() {
        let j = s.j as i32;
        let w = *weights
            .entry((s.j, s.t))
            .or_insert_with(|| dilation(j).sqrt() * frame.angular(j, s.t, &a) / (2.0 * PI));
        if w.abs() <= opts.omega_cut {
            stats.culled_by_weight += 1;
            continue;
        }
        let lane = lanes.entry(j).or_insert_with(|| Lane {
            window: if j < 0 { Window::Scaling } else { Window::Wavelet },
            dilation: dilation(j),
            items: Vec::new(),
        });
        lane.items.push((dot(frame.center(s), a), v * w));
    }
    stats.omega = if c.is_empty() { 0.0 } else { 1.0 - stats.culled_by_weight as f64 / c.len() as f64 };
    let out = evaluate_lanes(lanes, grid, opts, frame.bank(), &mut stats)?;
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::FrameConfig;

    #[test]
    fn plane_basis_for_pole_is_identity() {
        let b = PlaneBasis::new(SphericalDirection::north());
        assert_eq!(b.e1, [1.0, 0.0, 0.0]);
        assert_eq!(b.e2, [0.0, 1.0, 0.0]);
        assert_eq!(b.nu, [0.0, 0.0, 1.0]);
    }

    #[test]
    fn line_center_is_dot_product() {
        let f = Frame::new(FrameConfig::directional_3d(1, -4.0, 4.0)).unwrap();
        let w = slice_to_1d(&f, &WaveletIndex::new3(0, [1, 2, 3], 0), SphericalDirection::north()).unwrap();
        assert_eq!(w.center, 3.0);
    }

    #[test]
    fn isotropic_beta_is_delta() {
        let f = Frame::new(FrameConfig::isotropic(3, 1, -2.0, 2.0)).unwrap();
        let s = WaveletIndex::new3(1, [0, 0, 0], 0);
        let a = slice_to_2d(&f, &s, SphericalDirection::new(0.4, 1.1).unwrap()).unwrap();
        assert_eq!(a.beta.len(), 1);
        assert!((a.beta[0].re - 1.0).abs() < 1e-14);
    }
}
