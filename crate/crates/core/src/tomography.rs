//! Parallel-beam tomography: phantoms, sinograms and least-squares reconstruction
//! in a basis of sliced frame functions.

use crate::coeffs::CoefficientSet;
use crate::error::{Error, Result};
use crate::frame::{Frame, WaveletIndex};
use crate::radial::Window;
use crate::signal::{GridSpec, SampledSignal};
use crate::slice2d::{slice_wavelet, ProjectionDirection2D};
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::householder;
use faer::linalg::qr::no_pivoting::factor;
use faer::{Conj, Mat, Par};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::{Read, Write};

/// Ellipse with density d·(1 − q²)^p, q the normalized elliptic radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    pub center: [f64; 2],
    pub semi_axes: [f64; 2],
    /// counter-clockwise rotation of the first semi-axis, radians
    #[serde(default)]
    pub rotation: f64,
    pub density: f64,
    /// smoothness exponent p; 0 gives an indicator
    #[serde(default)]
    pub profile: u32,
}

impl Ellipse {
    fn local(&self, x: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.rotation.sin_cos();
        let (dx, dy) = (x[0] - self.center[0], x[1] - self.center[1]);
        [(c * dx + s * dy) / self.semi_axes[0], (-s * dx + c * dy) / self.semi_axes[1]]
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let p = self.local(x);
        let q2 = p[0] * p[0] + p[1] * p[1];
        if q2 >= 1.0 {
            0.0
        } else {
            self.density * (1.0 - q2).powi(self.profile as i32)
        }
    }

    /// ∫ along the line x = base + s·dir (dir a unit vector).
    pub fn chord_integral(&self, base: [f64; 2], dir: [f64; 2]) -> f64 {
        let (s, c) = self.rotation.sin_cos();
        let p = self.local(base);
        let d = [(c * dir[0] + s * dir[1]) / self.semi_axes[0], (-s * dir[0] + c * dir[1]) / self.semi_axes[1]];
        let dd = d[0] * d[0] + d[1] * d[1];
        let pd = p[0] * d[0] + p[1] * d[1];
        let delta2 = (p[0] * p[0] + p[1] * p[1]) - pd * pd / dd;
        if delta2 >= 1.0 {
            return 0.0;
        }
        // ∫_{-1}^{1} (1 − v²)^p dv
        let mut beta = 2.0;
        for i in 1..=self.profile {
            beta *= 2.0 * i as f64 / (2.0 * i as f64 + 1.0);
        }
        self.density * (1.0 - delta2).powf(self.profile as f64 + 0.5) * beta / dd.sqrt()
    }
}

/// Sum of ellipses.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Phantom {
    pub ellipses: Vec<Ellipse>,
}

impl Phantom {
    pub fn validate(&self) -> Result<()> {
        for (i, e) in self.ellipses.iter().enumerate() {
            let finite = e.center.iter().chain(&e.semi_axes).all(|v| v.is_finite())
                && e.rotation.is_finite()
                && e.density.is_finite();
            if !finite || e.semi_axes.iter().any(|&a| a <= 0.0) {
                return Err(Error::InvalidArgument(format!("ellipse {i} needs finite values and positive semi-axes")));
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        self.ellipses.iter().map(|e| e.eval(x)).sum()
    }

    pub fn sample(&self, grid: &GridSpec) -> Result<SampledSignal> {
        if grid.dim() != 2 {
            return Err(Error::GridMismatch("phantoms are sampled on 2D grids".into()));
        }
        Ok(SampledSignal::from_fn(grid.clone(), |p| self.eval([p[0], p[1]])))
    }

    /// Head-like test object inside the disk of radius 2.6: an outer shell, interior
    /// ellipses and two off-center balls.
    pub fn shepp_logan_like() -> Self {
        let e = |center: [f64; 2], semi_axes: [f64; 2], rotation: f64, density: f64| Ellipse {
            center,
            semi_axes,
            rotation,
            density,
            profile: 2,
        };
        Self {
            ellipses: vec![
                e([0.0, 0.0], [2.175, 2.55], 0.0, 1.0),
                e([0.0, -0.06], [1.95, 2.325], 0.0, -0.6),
                e([0.5625, 0.1125], [0.375, 0.975], -0.3, -0.2),
                e([-0.5625, 0.1875], [0.4875, 1.1625], 0.3, -0.2),
                e([0.0, 0.975], [0.75, 0.75], 0.0, 0.3),
                e([-0.75, -1.35], [0.3, 0.3], 0.0, 0.4),
            ],
        }
    }

    /// A large central ball and a small off-center ball.
    pub fn two_balls() -> Self {
        Self {
            ellipses: vec![
                Ellipse { center: [0.0, 0.0], semi_axes: [1.5, 1.5], rotation: 0.0, density: 1.0, profile: 2 },
                Ellipse { center: [2.0, 1.3], semi_axes: [0.5, 0.5], rotation: 0.0, density: 1.0, profile: 2 },
            ],
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Phantom = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }
}

/// Line x = offset·u + s·ν with detector axis u = (sin θ_ν, −cos θ_ν).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray {
    pub direction: ProjectionDirection2D,
    pub offset: f64,
}

impl Ray {
    pub fn base(&self) -> [f64; 2] {
        let u = self.direction.detector_axis();
        [self.offset * u[0], self.offset * u[1]]
    }
}

/// Exact line integral of the phantom along the ray.
pub fn line_integral(p: &Phantom, r: &Ray) -> f64 {
    let base = r.base();
    let dir = r.direction.ray();
    p.ellipses.iter().map(|e| e.chord_integral(base, dir)).sum()
}

/// Midpoint ray marching over [−half_length, half_length] with the given step.
pub fn line_integral_marching(p: &Phantom, r: &Ray, half_length: f64, step: f64) -> f64 {
    let base = r.base();
    let dir = r.direction.ray();
    let n = (2.0 * half_length / step).ceil() as usize;
    let h = 2.0 * half_length / n as f64;
    (0..n)
        .map(|i| {
            let s = -half_length + (i as f64 + 0.5) * h;
            p.eval([base[0] + s * dir[0], base[1] + s * dir[1]])
        })
        .sum::<f64>()
        * h
}

/// Measurements m_ν(λ); values[a][i] belongs to angle a and offset i.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sinogram {
    /// ray direction angles θ_ν, radians
    pub angles: Vec<f64>,
    pub offsets: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl Sinogram {
    pub fn validate(&self) -> Result<()> {
        if self.angles.is_empty() || self.offsets.is_empty() {
            return Err(Error::InvalidArgument("sinogram needs at least one angle and one offset".into()));
        }
        if self.values.len() != self.angles.len() || self.values.iter().any(|r| r.len() != self.offsets.len()) {
            return Err(Error::InvalidArgument("sinogram values do not match angles × offsets".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.angles.len() * self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Measurement vector ordered angle-major.
    pub fn flatten(&self) -> Vec<f64> {
        self.values.iter().flatten().copied().collect()
    }

    /// Keeps the angles whose positions are listed.
    pub fn select_angles(&self, which: &[usize]) -> Result<Self> {
        if which.iter().any(|&a| a >= self.angles.len()) {
            return Err(Error::InvalidArgument("angle position out of range".into()));
        }
        Ok(Self {
            angles: which.iter().map(|&a| self.angles[a]).collect(),
            offsets: self.offsets.clone(),
            values: which.iter().map(|&a| self.values[a].clone()).collect(),
        })
    }

    /// CSV with header `offset,<angles>` and one row per detector offset.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        self.validate()?;
        let mut line = String::from("offset");
        for a in &self.angles {
            line.push_str(&format!(",{a:.17e}"));
        }
        writeln!(w, "{line}")?;
        for (i, o) in self.offsets.iter().enumerate() {
            line.clear();
            line.push_str(&format!("{o:.17e}"));
            for row in &self.values {
                line.push_str(&format!(",{:.17e}", row[i]));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(mut r: R) -> Result<Self> {
        let mut text = String::new();
        r.read_to_string(&mut text)?;
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let parse = |s: &str| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|_| Error::Format(format!("bad number {s:?} in sinogram")))
        };
        let header = lines.next().ok_or_else(|| Error::Format("empty sinogram file".into()))?;
        let mut cols = header.split(',');
        if cols.next().map(str::trim) != Some("offset") {
            return Err(Error::Format("sinogram header must start with `offset`".into()));
        }
        let angles = cols.map(parse).collect::<Result<Vec<_>>>()?;
        let mut offsets = Vec::new();
        let mut values = vec![Vec::new(); angles.len()];
        for l in lines {
            let fields = l.split(',').map(parse).collect::<Result<Vec<_>>>()?;
            if fields.len() != angles.len() + 1 {
                return Err(Error::Format(format!("sinogram row has {} fields, expected {}", fields.len(), angles.len() + 1)));
            }
            offsets.push(fields[0]);
            for (a, v) in fields[1..].iter().enumerate() {
                values[a].push(*v);
            }
        }
        let s = Self { angles, offsets, values };
        s.validate().map_err(|e| Error::Format(e.to_string()))?;
        Ok(s)
    }
}

/// Angles aπ/n for a = 0..n.
pub fn uniform_angles(n: usize) -> Vec<f64> {
    (0..n).map(|a| a as f64 * PI / n as f64).collect()
}

/// n offsets uniformly covering [lo, hi] with both ends included.
pub fn uniform_offsets(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Noiseless parallel-beam measurements of the phantom.
pub fn simulate_sinogram(p: &Phantom, n_orient: usize, n_samples: usize, extent: (f64, f64)) -> Result<Sinogram> {
    p.validate()?;
    if n_orient == 0 || n_samples == 0 {
        return Err(Error::InvalidArgument("sinogram needs at least one orientation and one sample".into()));
    }
    if !(extent.0 <= extent.1) {
        return Err(Error::InvalidArgument(format!("empty detector extent [{}, {}]", extent.0, extent.1)));
    }
    let angles = uniform_angles(n_orient);
    let offsets = uniform_offsets(n_samples, extent.0, extent.1);
    let mut values = Vec::with_capacity(n_orient);
    for &a in &angles {
        let direction = ProjectionDirection2D::new(a)?;
        values.push(offsets.iter().map(|&offset| line_integral(p, &Ray { direction, offset })).collect());
    }
    Ok(Sinogram { angles, offsets, values })
}

/// Largest dense system accepted by the solver.
pub const MAX_ROWS: usize = 100_000;
pub const MAX_COLS: usize = 10_000;

/// Dense system Z with rows (angle, offset) in angle-major order and one column per basis function.
#[derive(Clone, Debug)]
pub struct SystemMatrix {
    pub z: Mat<f64>,
    pub rows: Vec<(usize, usize)>,
    pub columns: Vec<WaveletIndex>,
}

/// Z[(a, i), s] = ψ_s^{1,ν_a}(λ_i).
pub fn assemble_system(frame: &Frame, basis: &[WaveletIndex], sino: &Sinogram, omega_cut: f64) -> Result<SystemMatrix> {
    sino.validate()?;
    if basis.is_empty() {
        return Err(Error::InvalidArgument("empty basis".into()));
    }
    if frame.dim() != 2 {
        return Err(Error::InvalidArgument("tomography uses a 2D frame".into()));
    }
    if !(omega_cut >= 0.0) {
        return Err(Error::InvalidArgument("omega_cut must be non-negative".into()));
    }
    let nrows = sino.len();
    if nrows > MAX_ROWS || basis.len() > MAX_COLS {
        return Err(Error::TooLarge(format!(
            "system of {nrows} × {} exceeds the dense limit {MAX_ROWS} × {MAX_COLS}",
            basis.len()
        )));
    }
    for s in basis {
        frame.check_index(s)?;
    }
    let dirs = sino.angles.iter().map(|&a| ProjectionDirection2D::new(a)).collect::<Result<Vec<_>>>()?;
    let bank = frame.bank();
    let scaling = bank.slice(Window::Scaling)?;
    let wavelet = bank.slice(Window::Wavelet)?;
    let mut z = Mat::<f64>::zeros(nrows, basis.len());
    const CHUNK: usize = 64;
    for (c, chunk) in basis.chunks(CHUNK).enumerate() {
        let cols: Vec<Vec<f64>> = chunk
            .par_iter()
            .map(|s| -> Result<Vec<f64>> {
                let mut col = vec![0.0; nrows];
                for (a, nu) in dirs.iter().enumerate() {
                    let w = slice_wavelet(frame, s, *nu)?;
                    if w.weight.abs() <= omega_cut {
                        continue;
                    }
                    let table = if w.window == Window::Scaling { &scaling } else { &wavelet };
                    for (i, &y) in sino.offsets.iter().enumerate() {
                        col[a * sino.offsets.len() + i] = w.weight * table.eval((y - w.center) / w.dilation);
                    }
                }
                Ok(col)
            })
            .collect::<Result<_>>()?;
        for (k, col) in cols.iter().enumerate() {
            let j = c * CHUNK + k;
            for (i, v) in col.iter().enumerate() {
                z[(i, j)] = *v;
            }
        }
    }
    let rows = (0..sino.angles.len()).flat_map(|a| (0..sino.offsets.len()).map(move |i| (a, i))).collect();
    Ok(SystemMatrix { z, rows, columns: basis.to_vec() })
}

/// Solution of min ‖Zx − m‖ with truncated singular values.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LsqSolution {
    pub x: Vec<f64>,
    /// singular values kept
    pub rank: usize,
    pub columns: usize,
    pub sigma_max: f64,
    pub sigma_min_kept: f64,
    pub residual: f64,
}

/// Minimum-norm least squares with singular values ≤ cutoff·σ_max treated as zero.
pub fn solve_lsq(z: &SystemMatrix, m: &[f64], cutoff: f64) -> Result<LsqSolution> {
    solve_lsq_dense(z.z.clone(), m, cutoff)
}

/// As [`solve_lsq`], consuming the matrix.
///
/// Tall systems are reduced to their R factor by Householder QR before the SVD.
pub fn solve_lsq_dense(mut a: Mat<f64>, m: &[f64], cutoff: f64) -> Result<LsqSolution> {
    let (nr, nc) = (a.nrows(), a.ncols());
    if nr == 0 || nc == 0 {
        return Err(Error::InvalidArgument("empty system".into()));
    }
    if m.len() != nr {
        return Err(Error::InvalidArgument(format!("{} measurements for {nr} rows", m.len())));
    }
    if !(cutoff >= 0.0) {
        return Err(Error::InvalidArgument("singular value cutoff must be non-negative".into()));
    }
    if m.iter().any(|v| !v.is_finite()) || a.col_iter().any(|c| c.iter().any(|v| !v.is_finite())) {
        return Err(Error::InvalidArgument("non-finite entries in the system".into()));
    }
    // b1 holds the part of m in the range of the square factor, tail the rest
    let (square, b1, tail) = if nr > nc {
        let bs = factor::recommended_blocksize::<f64>(nr, nc);
        let mut q = Mat::<f64>::zeros(bs, nc);
        let par = Par::Seq;
        let mut mem = MemBuffer::new(factor::qr_in_place_scratch::<f64>(nr, nc, bs, par, Default::default()));
        factor::qr_in_place(a.as_mut(), q.as_mut(), par, MemStack::new(&mut mem), Default::default());
        let mut rhs = Mat::<f64>::from_fn(nr, 1, |i, _| m[i]);
        let mut mem = MemBuffer::new(householder::apply_block_householder_sequence_transpose_on_the_left_in_place_scratch::<f64>(nr, bs, 1));
        householder::apply_block_householder_sequence_transpose_on_the_left_in_place_with_conj(
            a.as_ref(),
            q.as_ref(),
            Conj::No,
            rhs.as_mut(),
            par,
            MemStack::new(&mut mem),
        );
        let r = Mat::<f64>::from_fn(nc, nc, |i, j| if i <= j { a[(i, j)] } else { 0.0 });
        drop(a);
        let b1: Vec<f64> = (0..nc).map(|i| rhs[(i, 0)]).collect();
        let tail: f64 = (nc..nr).map(|i| rhs[(i, 0)] * rhs[(i, 0)]).sum();
        (r, b1, tail)
    } else {
        (a, m.to_vec(), 0.0)
    };
    let svd = square.thin_svd().map_err(|e| Error::NoConvergence(format!("singular value decomposition: {e:?}")))?;
    drop(square);
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let k_all = s.nrows();
    let sigma_max = if k_all > 0 { s[0] } else { 0.0 };
    let thresh = cutoff * sigma_max;
    let rank = (0..k_all).take_while(|&i| s[i] > thresh && s[i] > 0.0).count();
    let mut x = vec![0.0; nc];
    let mut captured = 0.0;
    for k in 0..rank {
        let coef: f64 = (0..u.nrows()).map(|i| u[(i, k)] * b1[i]).sum();
        captured += coef * coef;
        let scaled = coef / s[k];
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += v[(i, k)] * scaled;
        }
    }
    let b1n: f64 = b1.iter().map(|b| b * b).sum();
    let residual = (tail + (b1n - captured).max(0.0)).sqrt();
    Ok(LsqSolution {
        x,
        rank,
        columns: nc,
        sigma_max,
        sigma_min_kept: if rank > 0 { s[rank - 1] } else { 0.0 },
        residual,
    })
}

/// Axis-aligned box [lo, hi].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Region {
    pub fn around(center: [f64; 2], half: f64) -> Self {
        Self { lo: [center[0] - half, center[1] - half], hi: [center[0] + half, center[1] + half] }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        (0..2).all(|a| p[a] >= self.lo[a] && p[a] <= self.hi[a])
    }
}

/// Frame functions whose centers lie in the regions of their level; levels without
/// an entry contribute every function of the domain.
pub fn select_sparse_basis(frame: &Frame, regions: &BTreeMap<i32, Vec<Region>>) -> Vec<WaveletIndex> {
    frame
        .index_universe()
        .into_iter()
        .filter(|s| match regions.get(&(s.j as i32)) {
            None => true,
            Some(list) => {
                let c = frame.center(s);
                list.iter().any(|r| r.contains([c[0], c[1]]))
            }
        })
        .collect()
}

/// Coefficients and solver report of one reconstruction.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub coefficients: CoefficientSet,
    pub solution: LsqSolution,
    pub rows: usize,
}

/// Assembles and solves the system for the given basis.
pub fn reconstruct(frame: &Frame, basis: &[WaveletIndex], sino: &Sinogram, cutoff: f64, omega_cut: f64) -> Result<Reconstruction> {
    let sys = assemble_system(frame, basis, sino, omega_cut)?;
    let rows = sys.rows.len();
    let columns = sys.columns;
    let solution = solve_lsq_dense(sys.z, &sino.flatten(), cutoff)?;
    let entries = columns.into_iter().zip(solution.x.iter().copied()).collect();
    let coefficients = CoefficientSet::from_entries(frame.config().clone(), entries)?;
    Ok(Reconstruction { coefficients, solution, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk() -> Phantom {
        Phantom {
            ellipses: vec![Ellipse { center: [0.0, 0.0], semi_axes: [1.0, 1.0], rotation: 0.0, density: 1.0, profile: 0 }],
        }
    }

    #[test]
    fn diameter_chord() {
        let r = Ray { direction: ProjectionDirection2D::new(0.3).unwrap(), offset: 0.0 };
        assert!((line_integral(&disk(), &r) - 2.0).abs() < 1e-14);
        let miss = Ray { offset: 1.5, ..r };
        assert_eq!(line_integral(&disk(), &miss), 0.0);
    }

    #[test]
    fn identity_system() {
        let a = Mat::<f64>::identity(4, 4);
        let s = solve_lsq_dense(a, &[1.0, -2.0, 3.0, 0.5], 1e-6).unwrap();
        assert_eq!(s.rank, 4);
        for (x, m) in s.x.iter().zip([1.0, -2.0, 3.0, 0.5]) {
            assert!((x - m).abs() < 1e-14);
        }
    }

    #[test]
    fn csv_round_trip() {
        let s = simulate_sinogram(&disk(), 3, 4, (-1.5, 1.5)).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("offset,"));
        assert_eq!(Sinogram::read_csv(&buf[..]).unwrap(), s);
    }
}
