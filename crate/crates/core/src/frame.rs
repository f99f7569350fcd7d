//! Frame configuration, wavelet indices and pointwise evaluation of frame
//! functions in frequency and space.

use crate::angular::{self, AngularWindow2D, AngularWindow3D, DEFAULT_ORIENTATIONS};
use crate::error::{Error, Result};
use crate::radial::{h_hat, phi_hat, ProfileBank, TableSpec, Window};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Multi-index (dimension, level, translation, orientation) of one frame function.
///
/// Level −1 denotes the scaling functions. Unused translation components are 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WaveletIndex {
    pub dim: u8,
    pub j: i8,
    pub k: [i32; 3],
    pub t: u16,
}

impl WaveletIndex {
    pub fn new2(j: i8, k1: i32, k2: i32, t: u16) -> Self {
        Self { dim: 2, j, k: [k1, k2, 0], t }
    }

    pub fn new3(j: i8, k: [i32; 3], t: u16) -> Self {
        Self { dim: 3, j, k, t }
    }

    pub fn is_scaling(&self) -> bool {
        self.j < 0
    }
}

/// Placement of translation centers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpacingRule {
    /// centers at 2^{−j}·k for j ≥ 0 and at integer k for the scaling level
    #[default]
    Dyadic,
}

fn default_apron() -> f64 {
    2.0
}

/// Frame parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameConfig {
    pub dim: u8,
    pub j_max: i32,
    pub domain_lo: Vec<f64>,
    pub domain_hi: Vec<f64>,
    /// orientation counts for j = 0, 1, …; the last entry repeats for finer levels
    pub orientations: Vec<u16>,
    /// zero padding added around signals before periodic transforms
    #[serde(default = "default_apron")]
    pub apron: f64,
    #[serde(default)]
    pub spacing: SpacingRule,
}

impl FrameConfig {
    /// Directional 2D frame with the default orientation counts.
    pub fn directional_2d(j_max: i32, lo: f64, hi: f64) -> Self {
        Self {
            dim: 2,
            j_max,
            domain_lo: vec![lo; 2],
            domain_hi: vec![hi; 2],
            orientations: DEFAULT_ORIENTATIONS.to_vec(),
            apron: default_apron(),
            spacing: SpacingRule::Dyadic,
        }
    }

    pub fn isotropic(dim: u8, j_max: i32, lo: f64, hi: f64) -> Self {
        Self {
            dim,
            j_max,
            domain_lo: vec![lo; dim as usize],
            domain_hi: vec![hi; dim as usize],
            orientations: vec![1],
            apron: default_apron(),
            spacing: SpacingRule::Dyadic,
        }
    }

    /// 3D frame with six icosahedral orientations on every wavelet level.
    pub fn directional_3d(j_max: i32, lo: f64, hi: f64) -> Self {
        Self { orientations: vec![6], ..Self::isotropic(3, j_max, lo, hi) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(Error::InvalidArgument(format!("dimension {} not supported", self.dim)));
        }
        if !(0..=12).contains(&self.j_max) {
            return Err(Error::InvalidArgument(format!("j_max {} outside 0..=12", self.j_max)));
        }
        let d = self.dim as usize;
        if self.domain_lo.len() != d || self.domain_hi.len() != d {
            return Err(Error::InvalidArgument("domain bounds do not match the dimension".into()));
        }
        for (lo, hi) in self.domain_lo.iter().zip(&self.domain_hi) {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidArgument(format!("degenerate domain [{lo}, {hi}]")));
            }
        }
        if self.orientations.is_empty() || self.orientations.contains(&0) {
            return Err(Error::InvalidArgument("orientation counts must be positive".into()));
        }
        if self.dim == 3 && self.orientations.iter().any(|&c| c != 1 && c != 6) {
            return Err(Error::InvalidArgument("3D levels use 1 or 6 orientations".into()));
        }
        if !(self.apron >= 0.0) {
            return Err(Error::InvalidArgument("apron must be non-negative".into()));
        }
        Ok(())
    }

    pub fn orientation_count(&self, j: i32) -> u16 {
        if j < 0 {
            return 1;
        }
        let i = (j as usize).min(self.orientations.len() - 1);
        self.orientations[i]
    }

    pub fn levels(&self) -> impl Iterator<Item = i32> {
        -1..=self.j_max
    }
}

/// Translation step Δ_j of a level (1 for scaling functions).
pub fn dilation(j: i32) -> f64 {
    if j < 0 {
        1.0
    } else {
        0.5f64.powi(j)
    }
}

/// Radial window of level j at |ξ| = rho.
#[inline]
pub fn radial(j: i32, rho: f64) -> f64 {
    if j < 0 {
        phi_hat(rho)
    } else {
        h_hat(rho * dilation(j))
    }
}

/// A validated configuration together with its angular windows and profile tables.
#[derive(Clone)]
pub struct Frame {
    config: FrameConfig,
    windows_2d: Vec<Vec<AngularWindow2D>>,
    windows_3d: Vec<Vec<AngularWindow3D>>,
    /// (cos, sin) of each 2D window center
    centers_2d: Vec<Vec<(f64, f64)>>,
    bank: Arc<ProfileBank>,
}

impl std::fmt::Debug for Frame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Frame").field("config", &self.config).finish_non_exhaustive()
    }
}

impl Frame {
    pub fn new(config: FrameConfig) -> Result<Self> {
        Self::with_tables(config, TableSpec::DEFAULT)
    }

    pub fn with_tables(config: FrameConfig, tables: TableSpec) -> Result<Self> {
        config.validate()?;
        let mut windows_2d = Vec::new();
        let mut windows_3d = Vec::new();
        let mut centers_2d = Vec::new();
        for j in config.levels() {
            let count = config.orientation_count(j);
            if config.dim == 2 {
                let ws = angular::make_directional_2d(j, count)?;
                centers_2d.push(ws.iter().map(|w| (w.center_angle().cos(), w.center_angle().sin())).collect());
                windows_2d.push(ws);
            } else {
                windows_3d.push(angular::make_level_3d(j, count)?);
            }
        }
        Ok(Self { config, windows_2d, windows_3d, centers_2d, bank: ProfileBank::shared(tables) })
    }

    pub fn config(&self) -> &FrameConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.config.dim as usize
    }

    pub fn bank(&self) -> &ProfileBank {
        &self.bank
    }

    pub fn windows_2d(&self, j: i32) -> &[AngularWindow2D] {
        &self.windows_2d[(j + 1) as usize]
    }

    pub fn windows_3d(&self, j: i32) -> &[AngularWindow3D] {
        &self.windows_3d[(j + 1) as usize]
    }

    pub fn check_index(&self, s: &WaveletIndex) -> Result<()> {
        if s.dim != self.config.dim {
            return Err(Error::InvalidIndex(format!("index of dimension {} in a {}D frame", s.dim, self.config.dim)));
        }
        let j = s.j as i32;
        if j < -1 || j > self.config.j_max {
            return Err(Error::InvalidIndex(format!("level {j} outside -1..={}", self.config.j_max)));
        }
        if s.t >= self.config.orientation_count(j) {
            return Err(Error::InvalidIndex(format!("orientation {} at level {j}", s.t)));
        }
        if s.dim == 2 && s.k[2] != 0 {
            return Err(Error::InvalidIndex("2D index with a third translation component".into()));
        }
        Ok(())
    }

    /// Spatial center Δ_j·k.
    pub fn center(&self, s: &WaveletIndex) -> [f64; 3] {
        let d = dilation(s.j as i32);
        [d * s.k[0] as f64, d * s.k[1] as f64, d * s.k[2] as f64]
    }

    /// Real angular window γ̂_{j,t} at frequency direction ξ (any length).
    #[inline]
    pub fn angular(&self, j: i32, t: u16, xi: &[f64]) -> f64 {
        if j < 0 {
            return 1.0;
        }
        let li = (j + 1) as usize;
        if self.config.dim == 2 {
            let w = &self.windows_2d[li][t as usize];
            if w.count == 1 {
                return 1.0;
            }
            let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
            if r == 0.0 {
                return 0.0;
            }
            let (c, s) = self.centers_2d[li][t as usize];
            w.eval_cos((xi[0] * c + xi[1] * s) / r)
        } else {
            let w = &self.windows_3d[li][t as usize];
            match w.axis {
                None => 1.0,
                Some(a) => {
                    let r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
                    if r2 == 0.0 {
                        return 0.0;
                    }
                    let c = a[0] * xi[0] + a[1] * xi[1] + a[2] * xi[2];
                    (5.0f64 / 6.0).sqrt() * c * c / r2
                }
            }
        }
    }

    /// γ̂_{j,t}(ξ̄)·(radial window) without normalization or phase.
    #[inline]
    pub fn window(&self, j: i32, t: u16, xi: &[f64]) -> f64 {
        let rho = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        let r = radial(j, rho);
        if r == 0.0 {
            return 0.0;
        }
        r * self.angular(j, t, xi)
    }

    /// ψ̂_s(ξ) = (Δ_j/2π)^{d/2} γ̂(ξ̄) ĥ(Δ_j|ξ|) e^{−i⟨ξ, Δ_j k⟩}.
    pub fn eval_wavelet_freq(&self, s: &WaveletIndex, xi: &[f64]) -> Result<Complex64> {
        self.check_index(s)?;
        let d = self.dim();
        if xi.len() != d {
            return Err(Error::InvalidArgument(format!("frequency has {} components, frame is {d}D", xi.len())));
        }
        let delta = dilation(s.j as i32);
        let c = self.center(s);
        let phase: f64 = xi.iter().zip(&c).map(|(x, c)| x * c).sum();
        let amp = (delta / (2.0 * PI)).powf(d as f64 / 2.0) * self.window(s.j as i32, s.t, xi);
        Ok(Complex64::from_polar(amp, -phase))
    }

    /// Spatial value (2^j/2π) Σ_n i^n β_n e^{inθ} h_n(2^j|x − c|) of a 2D frame function.
    pub fn eval_wavelet_space(&self, s: &WaveletIndex, x: [f64; 2]) -> Result<f64> {
        self.check_index(s)?;
        if s.dim != 2 {
            return Err(Error::InvalidArgument("spatial evaluation is 2D only; use slice3d for 3D".into()));
        }
        let j = s.j as i32;
        let delta = dilation(j);
        let c = self.center(s);
        let (dx, dy) = (x[0] - c[0], x[1] - c[1]);
        let r = (dx * dx + dy * dy).sqrt() / delta;
        let theta = dy.atan2(dx);
        let pre = 1.0 / (2.0 * PI * delta);
        if j < 0 {
            let t = self.bank.hankel_family(Window::Scaling, 0)?;
            return Ok(pre * t[0].eval(r));
        }
        let w = &self.windows_2d(j)[s.t as usize];
        let h = w.half_width() as i32;
        let tables = self.bank.hankel_family(Window::Wavelet, h as u32)?;
        let mut sum = Complex64::new(0.0, 0.0);
        for n in -h..=h {
            let b = w.beta(n);
            if b.norm_sqr() == 0.0 {
                continue;
            }
            let hn = tables[n.unsigned_abs() as usize].eval(r);
            // h_{−n} = (−1)^n h_n
            let hn = if n < 0 && n % 2 != 0 { -hn } else { hn };
            sum += Complex64::i().powi(n) * b * Complex64::from_polar(hn, n as f64 * theta);
        }
        Ok(pre * sum.re)
    }

    /// Translation range of level j whose centers lie in the closed domain box.
    pub fn translation_range(&self, j: i32) -> Vec<(i32, i32)> {
        let d = dilation(j);
        self.config
            .domain_lo
            .iter()
            .zip(&self.config.domain_hi)
            .map(|(lo, hi)| ((lo / d - 1e-9).ceil() as i32, (hi / d + 1e-9).floor() as i32))
            .collect()
    }

    /// Every index with center inside the domain box.
    pub fn index_universe(&self) -> Vec<WaveletIndex> {
        let mut out = Vec::new();
        for j in self.config.levels() {
            let ranges = self.translation_range(j);
            let count = self.config.orientation_count(j);
            let r2 = if self.dim() == 3 { ranges[2] } else { (0, 0) };
            for k0 in ranges[0].0..=ranges[0].1 {
                for k1 in ranges[1].0..=ranges[1].1 {
                    for k2 in r2.0..=r2.1 {
                        for t in 0..count {
                            out.push(WaveletIndex { dim: self.config.dim, j: j as i8, k: [k0, k1, k2], t });
                        }
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let mut c = FrameConfig::directional_2d(3, -5.0, 5.0);
        assert!(c.validate().is_ok());
        c.domain_hi[0] = -6.0;
        assert!(c.validate().is_err());
        let mut c = FrameConfig::directional_3d(2, -1.0, 1.0);
        assert!(c.validate().is_ok());
        c.orientations = vec![4];
        assert!(c.validate().is_err());
    }

    #[test]
    fn orientation_counts_follow_defaults() {
        let c = FrameConfig::directional_2d(6, -1.0, 1.0);
        let counts: Vec<u16> = (-1..=6).map(|j| c.orientation_count(j)).collect();
        assert_eq!(counts, vec![1, 1, 4, 8, 12, 16, 16, 16]);
    }

    #[test]
    fn universe_count_for_unit_box() {
        let f = Frame::new(FrameConfig::isotropic(2, 3, -5.0, 5.0)).unwrap();
        assert_eq!(f.index_universe().len(), 121 + 121 + 441 + 1681 + 6561);
    }

    #[test]
    fn index_checks() {
        let f = Frame::new(FrameConfig::directional_2d(2, -1.0, 1.0)).unwrap();
        assert!(f.check_index(&WaveletIndex::new2(1, 0, 0, 3)).is_ok());
        assert!(f.check_index(&WaveletIndex::new2(1, 0, 0, 4)).is_err());
        assert!(f.check_index(&WaveletIndex::new2(3, 0, 0, 0)).is_err());
        assert!(f.check_index(&WaveletIndex::new3(0, [0, 0, 0], 0)).is_err());
    }
}
