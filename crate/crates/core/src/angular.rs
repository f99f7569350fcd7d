//! Angular windows: Fourier-series windows on the circle and spherical-harmonic
//! windows on the sphere, with Wigner-D rotation of the latter.

use crate::error::{Error, Result};
use crate::special::{binomial, sph_harm, sph_norm, wigner_d, SphericalDirection};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Highest spherical-harmonic band `rotate_kappa` accepts.
pub const MAX_BAND: u32 = 16;

/// Default orientation counts for levels j = 0, 1, 2, 3, 4 (and beyond).
pub const DEFAULT_ORIENTATIONS: [u16; 5] = [1, 4, 8, 12, 16];

/// Orientation window on the circle, γ̂(θ) = Σ_n β_n e^{inθ}.
///
/// Directional windows are α cos^{2p}(θ − πt/K) with p = ⌊(K−1)/2⌋, so they are
/// real, non-negative, π-periodic (hence real-valued wavelets) and their squares
/// sum to one over the K orientations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularWindow2D {
    pub level: i32,
    pub orientation: u16,
    pub count: u16,
    /// β_n for n = −half_width..=half_width
    pub beta: Vec<Complex64>,
}

impl AngularWindow2D {
    pub fn half_width(&self) -> usize {
        self.beta.len() / 2
    }

    pub fn beta(&self, n: i32) -> Complex64 {
        let h = self.half_width() as i32;
        if n.abs() > h {
            Complex64::new(0.0, 0.0)
        } else {
            self.beta[(n + h) as usize]
        }
    }

    /// Angle at which the window peaks.
    pub fn center_angle(&self) -> f64 {
        PI * self.orientation as f64 / self.count as f64
    }

    pub fn is_isotropic(&self) -> bool {
        self.count == 1
    }

    /// Fast real evaluation from the closed form, with `c` = cos(θ − center).
    #[inline]
    pub fn eval_cos(&self, c: f64) -> f64 {
        directional_profile(self.count, c)
    }
}

fn cos_power(count: u16) -> u32 {
    (count as u32 - 1) / 2
}

fn directional_amplitude(count: u16) -> f64 {
    let p = cos_power(count);
    (16f64.powi(p as i32) / (count as f64 * binomial(4 * p, 2 * p))).sqrt()
}

/// α cos^{2p}(Δθ) evaluated from c = cos(Δθ).
#[inline]
pub fn directional_profile(count: u16, c: f64) -> f64 {
    if count <= 1 {
        return 1.0;
    }
    directional_amplitude(count) * (c * c).powi(cos_power(count) as i32)
}

pub fn make_isotropic_2d() -> AngularWindow2D {
    AngularWindow2D { level: 0, orientation: 0, count: 1, beta: vec![Complex64::new(1.0, 0.0)] }
}

/// The `count` rotated windows of one level.
pub fn make_directional_2d(level: i32, count: u16) -> Result<Vec<AngularWindow2D>> {
    if count == 0 {
        return Err(Error::InvalidArgument("orientation count must be at least 1".into()));
    }
    if count == 1 {
        return Ok(vec![AngularWindow2D { level, ..make_isotropic_2d() }]);
    }
    let p = cos_power(count);
    let alpha = directional_amplitude(count);
    let h = 2 * p as i32;
    let mut out = Vec::with_capacity(count as usize);
    for t in 0..count {
        let center = PI * t as f64 / count as f64;
        let mut beta = vec![Complex64::new(0.0, 0.0); (2 * h + 1) as usize];
        for r in 0..=2 * p {
            let n = 2 * p as i32 - 2 * r as i32;
            let mag = alpha * 0.25f64.powi(p as i32) * binomial(2 * p, r);
            beta[(n + h) as usize] = Complex64::from_polar(mag, -(n as f64) * center);
        }
        out.push(AngularWindow2D { level, orientation: t, count, beta });
    }
    Ok(out)
}

/// Fourier-series evaluation Σ β_n e^{inθ}.
pub fn gamma_eval_2d(w: &AngularWindow2D, theta: f64) -> Complex64 {
    let h = w.half_width() as i32;
    w.beta
        .iter()
        .enumerate()
        .map(|(i, b)| b * Complex64::from_polar(1.0, (i as i32 - h) as f64 * theta))
        .sum()
}

/// Orientation window on the sphere, γ̂(ω) = Σ κ_lm y_lm(ω).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularWindow3D {
    pub level: i32,
    pub orientation: u16,
    pub l_max: u32,
    /// κ_lm stored at l² + l + m
    pub kappa: Vec<Complex64>,
    /// symmetry axis of a zonal window, if any
    pub axis: Option<[f64; 3]>,
}

impl AngularWindow3D {
    pub fn kappa(&self, l: u32, m: i32) -> Complex64 {
        if l > self.l_max || m.unsigned_abs() > l {
            return Complex64::new(0.0, 0.0);
        }
        self.kappa[((l * l + l) as i64 + m as i64) as usize]
    }

    fn kappa_mut(&mut self, l: u32, m: i32) -> &mut Complex64 {
        &mut self.kappa[((l * l + l) as i64 + m as i64) as usize]
    }

    pub fn eval(&self, dir: SphericalDirection) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for l in 0..=self.l_max {
            for m in -(l as i32)..=l as i32 {
                let k = self.kappa(l, m);
                if k != Complex64::new(0.0, 0.0) {
                    s += k * sph_harm(l, m, dir).expect("index in range");
                }
            }
        }
        s
    }

    pub fn is_isotropic(&self) -> bool {
        self.axis.is_none() && self.l_max == 0
    }

    /// L²(S²) norm of the window.
    pub fn norm(&self) -> f64 {
        self.kappa.iter().map(|k| k.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// γ̂ ≡ 1, i.e. κ_00 = 2√π.
pub fn make_isotropic_3d() -> AngularWindow3D {
    AngularWindow3D {
        level: 0,
        orientation: 0,
        l_max: 0,
        kappa: vec![Complex64::new(2.0 * PI.sqrt(), 0.0)],
        axis: None,
    }
}

/// The six icosahedron vertex axes (up to sign).
pub fn icosahedral_axes() -> [[f64; 3]; 6] {
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    let n = (1.0 + g * g).sqrt();
    [
        [0.0, 1.0 / n, g / n],
        [0.0, 1.0 / n, -g / n],
        [1.0 / n, g / n, 0.0],
        [1.0 / n, -g / n, 0.0],
        [g / n, 0.0, 1.0 / n],
        [-g / n, 0.0, 1.0 / n],
    ]
}

/// Zonal window √(5/6)·(a·ω)² around `axis`.
///
/// With the six icosahedral axes the squares tile the sphere exactly, since the
/// icosahedron vertices form a spherical 5-design.
pub fn make_zonal_3d(level: i32, orientation: u16, axis: [f64; 3]) -> Result<AngularWindow3D> {
    let dir = SphericalDirection::from_vector(axis)?;
    let a = dir.to_vector();
    let s = (5.0f64 / 6.0).sqrt();
    let mut w = AngularWindow3D {
        level,
        orientation,
        l_max: 2,
        kappa: vec![Complex64::new(0.0, 0.0); 9],
        axis: Some(a),
    };
    // (a·ω)² = 1/3 + (2/3) P_2(a·ω) and P_2(a·ω) = (4π/5) Σ_m y_2m(ω) conj(y_2m(a))
    *w.kappa_mut(0, 0) = Complex64::new(s * 2.0 * PI.sqrt() / 3.0, 0.0);
    for m in -2..=2 {
        *w.kappa_mut(2, m) = s * (2.0 / 3.0) * (4.0 * PI / 5.0) * sph_harm(2, m, dir)?.conj();
    }
    Ok(w)
}

/// Windows of one 3D level: isotropic for a count of 1, icosahedral zonal for 6.
pub fn make_level_3d(level: i32, count: u16) -> Result<Vec<AngularWindow3D>> {
    match count {
        1 => Ok(vec![AngularWindow3D { level, ..make_isotropic_3d() }]),
        6 => icosahedral_axes()
            .iter()
            .enumerate()
            .map(|(t, a)| make_zonal_3d(level, t as u16, *a))
            .collect(),
        _ => Err(Error::InvalidArgument(format!("3D levels support 1 or 6 orientations, got {count}"))),
    }
}

/// Active rotation by z-y-z Euler angles: returns κ' with γ'(ω) = γ(R⁻¹ω).
pub fn rotate_kappa_euler(w: &AngularWindow3D, alpha: f64, beta: f64, gamma: f64) -> Result<AngularWindow3D> {
    if w.l_max > MAX_BAND {
        return Err(Error::InvalidArgument(format!("band limit {} exceeds {MAX_BAND}", w.l_max)));
    }
    let mut out = AngularWindow3D { kappa: vec![Complex64::new(0.0, 0.0); w.kappa.len()], axis: None, ..w.clone() };
    for l in 0..=w.l_max {
        let li = l as i32;
        for mp in -li..=li {
            let mut s = Complex64::new(0.0, 0.0);
            for m in -li..=li {
                let k = w.kappa(l, m);
                if k == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let d = wigner_d(l, mp, m, beta)?;
                s += k * Complex64::from_polar(d, -(mp as f64) * alpha - m as f64 * gamma);
            }
            *out.kappa_mut(l, mp) = s;
        }
    }
    out.axis = w.axis.map(|a| rotate_vector(a, alpha, beta, gamma));
    Ok(out)
}

/// R(α, β, γ) = R_z(α) R_y(β) R_z(γ) applied to v.
pub fn rotate_vector(v: [f64; 3], alpha: f64, beta: f64, gamma: f64) -> [f64; 3] {
    let rz = |a: f64, v: [f64; 3]| {
        let (s, c) = a.sin_cos();
        [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]]
    };
    let ry = |b: f64, v: [f64; 3]| {
        let (s, c) = b.sin_cos();
        [c * v[0] + s * v[2], v[1], -s * v[0] + c * v[2]]
    };
    rz(alpha, ry(beta, rz(gamma, v)))
}

/// Coefficients of γ' with γ'(ω) = γ(R_ν ω), where R_ν = R_z(φ_ν) R_y(θ_ν) takes the
/// pole to ν; evaluating γ' at the pole gives γ(ν).
pub fn rotate_kappa(w: &AngularWindow3D, nu: SphericalDirection) -> Result<AngularWindow3D> {
    rotate_kappa_euler(w, 0.0, -nu.theta, -nu.phi)
}

/// Projected 2D coefficients β_m = Σ_l C_lm κ_lm P_l^m(0) of a (rotated) window.
pub fn equator_beta(w: &AngularWindow3D) -> Result<Vec<Complex64>> {
    let lm = w.l_max as i32;
    let mut beta = vec![Complex64::new(0.0, 0.0); (2 * lm + 1) as usize];
    for l in 0..=w.l_max {
        for m in -(l as i32)..=l as i32 {
            let p = crate::special::assoc_legendre(l, m, 0.0)?;
            beta[(m + lm) as usize] += w.kappa(l, m) * sph_norm(l, m) * p;
        }
    }
    Ok(beta)
}

/// Window value at the pole: Σ_l κ_l0 √((2l+1)/4π).
pub fn pole_value(w: &AngularWindow3D) -> Complex64 {
    (0..=w.l_max).map(|l| w.kappa(l, 0) * ((2 * l + 1) as f64 / (4.0 * PI)).sqrt()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotropic_2d_is_one() {
        let w = make_isotropic_2d();
        assert_eq!(gamma_eval_2d(&w, 0.0), Complex64::new(1.0, 0.0));
        assert!((gamma_eval_2d(&w, 1.3) - 1.0).norm() < 1e-15);
    }

    #[test]
    fn fourier_series_matches_closed_form() {
        for count in [4u16, 8, 12, 16] {
            let ws = make_directional_2d(2, count).unwrap();
            for w in &ws {
                for i in 0..50 {
                    let th = 0.1234 + i as f64 * 0.37;
                    let g = gamma_eval_2d(w, th);
                    let c = w.eval_cos((th - w.center_angle()).cos());
                    assert!((g.re - c).abs() < 1e-13 && g.im.abs() < 1e-13, "K={count}");
                }
            }
        }
    }

    #[test]
    fn window_peaks_at_center() {
        let ws = make_directional_2d(1, 8).unwrap();
        let w = &ws[3];
        let peak = gamma_eval_2d(w, w.center_angle()).re;
        for i in 0..200 {
            assert!(gamma_eval_2d(w, i as f64 * 0.0314).re <= peak + 1e-14);
        }
    }

    #[test]
    fn zero_count_rejected() {
        assert!(make_directional_2d(0, 0).is_err());
        assert!(make_level_3d(0, 4).is_err());
    }

    #[test]
    fn isotropic_3d_and_projection() {
        let w = make_isotropic_3d();
        let d = SphericalDirection::new(0.4, 2.0).unwrap();
        assert!((w.eval(d) - 1.0).norm() < 1e-14);
        let r = rotate_kappa(&w, d).unwrap();
        assert!((r.kappa(0, 0) - w.kappa(0, 0)).norm() < 1e-14);
        let beta = equator_beta(&r).unwrap();
        assert_eq!(beta.len(), 1);
        assert!((beta[0] - 1.0).norm() < 1e-14);
    }

    #[test]
    fn rotate_to_pole_reads_window_at_nu() {
        let w = make_zonal_3d(0, 0, [0.3, -0.5, 0.8]).unwrap();
        let nu = SphericalDirection::new(1.1, 4.0).unwrap();
        let r = rotate_kappa(&w, nu).unwrap();
        assert!((pole_value(&r) - w.eval(nu)).norm() < 1e-12);
    }

    #[test]
    fn oversized_band_rejected() {
        let mut w = make_isotropic_3d();
        w.l_max = MAX_BAND + 1;
        w.kappa = vec![Complex64::new(0.0, 0.0); ((MAX_BAND + 2) * (MAX_BAND + 2)) as usize];
        assert!(rotate_kappa(&w, SphericalDirection::north()).is_err());
    }
}
