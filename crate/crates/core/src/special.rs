//! Bessel functions, associated Legendre functions, spherical harmonics,
//! Wigner small-d elements and the generalized exponential integral.

use crate::error::{Error, Result};
use crate::quad;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Point on the unit sphere in geographic coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphericalDirection {
    /// polar angle from the +z axis, in [0, π]
    pub theta: f64,
    /// azimuth, in [0, 2π)
    pub phi: f64,
}

impl SphericalDirection {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidArgument("non-finite direction".into()));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidArgument(format!("theta {theta} outside [0, π]")));
        }
        Ok(Self { theta, phi: phi.rem_euclid(2.0 * PI) })
    }

    pub fn north() -> Self {
        Self { theta: 0.0, phi: 0.0 }
    }

    pub fn from_vector(v: [f64; 3]) -> Result<Self> {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidArgument("zero or non-finite vector".into()));
        }
        let theta = (v[2] / r).clamp(-1.0, 1.0).acos();
        let phi = v[1].atan2(v[0]).rem_euclid(2.0 * PI);
        Ok(Self { theta, phi })
    }

    pub fn to_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }
}

/// Bessel function of the first kind J_n(x).
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let mut out = vec![0.0; n as usize + 1];
    bessel_j_seq_into(x, &mut out);
    out[n as usize]
}

/// J_0(x), …, J_nmax(x).
pub fn bessel_j_seq(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    bessel_j_seq_into(x, &mut out);
    out
}

/// Fills `out[k] = J_k(x)` for every k < out.len().
pub fn bessel_j_seq_into(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    if x < 0.0 {
        bessel_j_seq_into(-x, out);
        for (k, v) in out.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
        return;
    }
    let nmax = out.len() - 1;
    if x == 0.0 {
        out.fill(0.0);
        out[0] = 1.0;
        return;
    }
    if x < 25.0 {
        miller_normalized(x, out);
        return;
    }
    let (j0, j1) = hankel_j01(x);
    out[0] = j0;
    if nmax == 0 {
        return;
    }
    out[1] = j1;
    let n_up = nmax.min(x.floor() as usize);
    for k in 1..n_up {
        out[k + 1] = 2.0 * k as f64 / x * out[k] - out[k - 1];
    }
    if n_up < nmax {
        // upward recurrence turns unstable past n ≈ x
        let lo = n_up - 1;
        let mut tail = vec![0.0; nmax - lo + 1];
        miller_raw(x, lo, &mut tail);
        let (anchor, t) = if out[n_up].abs() > out[lo].abs() { (out[n_up], tail[1]) } else { (out[lo], tail[0]) };
        let scale = anchor / t;
        for k in n_up + 1..=nmax {
            out[k] = tail[k - lo] * scale;
        }
    }
}

fn miller_start(nmax: usize, x: f64) -> usize {
    let top = (nmax as f64).max(x).max(1.0);
    let m = top as usize + 20 + (60.0 * top).sqrt() as usize;
    m + (m % 2)
}

/// Backward recurrence normalized with J_0 + 2 Σ J_2k = 1.
fn miller_normalized(x: f64, out: &mut [f64]) {
    let nmax = out.len() - 1;
    let m = miller_start(nmax, x);
    let mut jp = 0.0;
    let mut j = 1e-30;
    let mut norm = 0.0;
    out.fill(0.0);
    let mut k = m;
    loop {
        if k <= nmax {
            out[k] = j;
        }
        if k % 2 == 0 {
            norm += if k == 0 { j } else { 2.0 * j };
        }
        if k == 0 {
            break;
        }
        let jm = 2.0 * k as f64 / x * j - jp;
        jp = j;
        j = jm;
        k -= 1;
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    for v in out.iter_mut() {
        *v /= norm;
    }
}

/// Unnormalized backward recurrence filling `tail[k - lo]` for k ≥ lo.
fn miller_raw(x: f64, lo: usize, tail: &mut [f64]) {
    let nmax = lo + tail.len() - 1;
    let m = miller_start(nmax, x);
    let mut jp = 0.0;
    let mut j = 1e-30;
    let mut k = m;
    while k >= lo {
        if k <= nmax {
            tail[k - lo] = j;
        }
        if k == lo {
            break;
        }
        let jm = 2.0 * k as f64 / x * j - jp;
        jp = j;
        j = jm;
        k -= 1;
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp *= 1e-250;
            for v in tail.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
}

/// Hankel asymptotic expansion for J_0 and J_1 at large argument.
fn hankel_j01(x: f64) -> (f64, f64) {
    let pq = |mu: f64| {
        let mut p = 1.0;
        let mut q = 0.0;
        let mut t = 1.0f64;
        for k in 1..200 {
            let odd = (2 * k - 1) as f64;
            let next = t * (mu - odd * odd) / (8.0 * k as f64 * x);
            if next.abs() > t.abs() {
                break;
            }
            t = next;
            match k % 4 {
                1 => q += t,
                2 => p -= t,
                3 => q -= t,
                _ => p += t,
            }
            if t.abs() < 1e-17 {
                break;
            }
        }
        (p, q)
    };
    let (s, c) = x.sin_cos();
    let amp = (2.0 / (PI * x)).sqrt();
    let (p0, q0) = pq(0.0);
    // cos(x - π/4), sin(x - π/4)
    let c0 = (c + s) * FRAC_1_SQRT_2;
    let s0 = (s - c) * FRAC_1_SQRT_2;
    let j0 = amp * (p0 * c0 - q0 * s0);
    let (p1, q1) = pq(4.0);
    // cos(x - 3π/4), sin(x - 3π/4)
    let c1 = (s - c) * FRAC_1_SQRT_2;
    let s1 = -(s + c) * FRAC_1_SQRT_2;
    let j1 = amp * (p1 * c1 - q1 * s1);
    (j0, j1)
}

/// Associated Legendre function P_l^m(x) including the Condon–Shortley phase.
pub fn assoc_legendre(l: u32, m: i32, x: f64) -> Result<f64> {
    let ma = m.unsigned_abs();
    if ma > l {
        return Err(Error::InvalidIndex(format!("|m| = {ma} exceeds l = {l}")));
    }
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::InvalidArgument(format!("x = {x} outside [-1, 1]")));
    }
    let p = legendre_nonneg(l, ma, x);
    if m >= 0 {
        Ok(p)
    } else {
        let sign = if ma % 2 == 0 { 1.0 } else { -1.0 };
        Ok(sign * factorial_ratio(l - ma, l + ma) * p)
    }
}

fn legendre_nonneg(l: u32, m: u32, x: f64) -> f64 {
    let s = ((1.0 - x) * (1.0 + x)).sqrt();
    let mut pmm = 1.0;
    for i in 1..=m {
        pmm *= -((2 * i - 1) as f64) * s;
    }
    if l == m {
        return pmm;
    }
    let mut p0 = pmm;
    let mut p1 = x * (2 * m + 1) as f64 * pmm;
    for ll in m + 2..=l {
        let p2 = (x * (2 * ll - 1) as f64 * p1 - (ll + m - 1) as f64 * p0) / (ll - m) as f64;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// a!/b! for a ≤ b.
fn factorial_ratio(a: u32, b: u32) -> f64 {
    let mut r = 1.0;
    for i in a + 1..=b {
        r /= i as f64;
    }
    r
}

/// Normalization C_lm = sqrt((2l+1)/(4π) · (l−m)!/(l+m)!).
pub fn sph_norm(l: u32, m: i32) -> f64 {
    let ma = m.unsigned_abs();
    let ratio = if m >= 0 { factorial_ratio(l - ma, l + ma) } else { 1.0 / factorial_ratio(l - ma, l + ma) };
    ((2 * l + 1) as f64 / (4.0 * PI) * ratio).sqrt()
}

/// Orthonormal spherical harmonic y_lm(θ, φ) = C_lm P_l^m(cos θ) e^{imφ}.
pub fn sph_harm(l: u32, m: i32, dir: SphericalDirection) -> Result<Complex64> {
    let p = assoc_legendre(l, m, dir.theta.cos().clamp(-1.0, 1.0))?;
    Ok(Complex64::from_polar(sph_norm(l, m) * p, m as f64 * dir.phi))
}

/// Binomial coefficient as a float.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

fn jacobi(k: u32, a: f64, b: f64, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut p0 = 1.0;
    let mut p1 = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0;
    for n in 2..=k {
        let n = n as f64;
        let s = 2.0 * n + a + b;
        let c1 = 2.0 * n * (n + a + b) * (s - 2.0);
        let c2 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        let c3 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * s;
        let p2 = (c2 * p1 - c3 * p0) / c1;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Wigner small-d element d^l_{m_p m}(β).
pub fn wigner_d(l: u32, m_p: i32, m: i32, beta: f64) -> Result<f64> {
    let li = l as i32;
    if m_p.abs() > li || m.abs() > li {
        return Err(Error::InvalidIndex(format!("(m', m) = ({m_p}, {m}) out of range for l = {l}")));
    }
    let cands = [(li + m, 0), (li - m, 1), (li + m_p, 2), (li - m_p, 3)];
    let (k, case) = cands.iter().copied().min_by_key(|c| c.0).unwrap();
    let (a, lambda) = match case {
        0 => (m_p - m, m_p - m),
        1 => (m - m_p, 0),
        2 => (m - m_p, 0),
        _ => (m_p - m, m_p - m),
    };
    let b = 2 * li - 2 * k - a;
    let (k, a, b) = (k as u32, a as u32, b as u32);
    let sign = if lambda.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let coeff = (binomial(2 * l - k, k + a) / binomial(k + b, b)).sqrt();
    let (s, c) = (0.5 * beta).sin_cos();
    Ok(sign * coeff * s.powi(a as i32) * c.powi(b as i32) * jacobi(k, a as f64, b as f64, beta.cos()))
}

/// Full Wigner D^l_{m_p m}(α, β, γ) = e^{−i m_p α} d^l_{m_p m}(β) e^{−i m γ} for z-y-z Euler angles.
pub fn wigner_big_d(l: u32, m_p: i32, m: i32, alpha: f64, beta: f64, gamma: f64) -> Result<Complex64> {
    let d = wigner_d(l, m_p, m, beta)?;
    Ok(Complex64::from_polar(d, -(m_p as f64) * alpha - m as f64 * gamma))
}

/// Generalized exponential integral E_ν(z) = ∫₁^∞ e^{−zt} t^{−ν} dt for complex order.
///
/// Evaluated along the rotated contour t = 1 + u/z, which gives
/// E_ν(z) = e^{−z}/z ∫₀^∞ e^{−u} (1 + u/z)^{−ν} du and is valid for Re z ≥ 0, z ≠ 0
/// (the analytic continuation when the straight integral only converges conditionally).
pub fn expint(nu: Complex64, z: Complex64) -> Result<Complex64> {
    if !(nu.re.is_finite() && nu.im.is_finite() && z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidArgument("non-finite argument".into()));
    }
    if z.re < 0.0 || z.norm() == 0.0 {
        return Err(Error::InvalidArgument(format!("z = {z} must satisfy Re z ≥ 0 and z ≠ 0")));
    }
    let inv_z = z.inv();
    let integrand = |s: f64| {
        if s >= 1.0 {
            return Complex64::new(0.0, 0.0);
        }
        let one_m = 1.0 - s;
        let u = s / one_m;
        let base = Complex64::new(1.0, 0.0) + inv_z * u;
        let w = (-u).exp() / (one_m * one_m);
        if w == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        (-nu * base.ln()).exp() * w
    };
    let mut total = Complex64::new(0.0, 0.0);
    // split near the scale where (1 + u/z) departs from 1
    let knee = (z.norm() / (1.0 + z.norm())).clamp(1e-6, 0.5);
    for (a, b) in [(0.0, knee), (knee, 1.0)] {
        total += quad::adaptive_complex(integrand, a, b, 1e-300, 1e-13, 4000)?;
    }
    Ok((-z).exp() * inv_z * total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn bessel_reference_values() {
        let cases = [
            (0, 1.0, 0.76519768655796655145),
            (1, 2.5, 0.49709410246427403801),
            (5, 3.0, 0.043028434877047583925),
            (14, 7.5, 0.00047421465193957727613),
            (0, 30.0, -0.086367983581040211336),
            (3, 50.0, 0.092734804061634432021),
            (20, 30.0, 0.0048310199934040645386),
            (40, 30.0, 0.00036120236088965853089),
            (2, 1000.5, -0.01945452057608925114),
            (7, 9999.0, -0.007940631638856935153),
            (0, 24.9, 0.083245968353015490053),
            (30, 10.0, 1.5510960782574670069e-12),
            (2, 0.001, 1.2499998958333366406e-7),
        ];
        for (n, x, want) in cases {
            let got = bessel_j(n, x);
            assert!(rel(got, want) < 1e-12, "J_{n}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn bessel_at_origin_and_negative_argument() {
        assert_eq!(bessel_j(0, 0.0), 1.0);
        assert_eq!(bessel_j(1, 0.0), 0.0);
        assert!((bessel_j(3, -2.0) + bessel_j(3, 2.0)).abs() < 1e-16);
        assert!((bessel_j(2, -2.0) - bessel_j(2, 2.0)).abs() < 1e-16);
    }

    #[test]
    fn legendre_known_values() {
        assert_eq!(assoc_legendre(0, 0, 0.3).unwrap(), 1.0);
        assert_eq!(assoc_legendre(1, 0, 0.0).unwrap(), 0.0);
        let v = assoc_legendre(2, 1, 0.5).unwrap();
        assert!((v + 1.5 * 0.75f64.sqrt()).abs() < 1e-15);
        let v = assoc_legendre(2, -1, 0.5).unwrap();
        assert!((v - 0.25 * 0.75f64.sqrt()).abs() < 1e-15);
        assert!(assoc_legendre(1, 2, 0.0).is_err());
    }

    #[test]
    fn wigner_l1_closed_forms() {
        let b = 0.7f64;
        let d = |mp, m| wigner_d(1, mp, m, b).unwrap();
        assert!((d(1, 1) - (1.0 + b.cos()) / 2.0).abs() < 1e-15);
        assert!((d(1, 0) + b.sin() / 2f64.sqrt()).abs() < 1e-15);
        assert!((d(0, 1) - b.sin() / 2f64.sqrt()).abs() < 1e-15);
        assert!((d(1, -1) - (1.0 - b.cos()) / 2.0).abs() < 1e-15);
        assert!((d(0, 0) - b.cos()).abs() < 1e-15);
        assert!(wigner_d(1, 2, 0, b).is_err());
    }

    #[test]
    fn expint_reference_values() {
        let c = Complex64::new(0.0, PI / 4f64.ln());
        let i = Complex64::i();
        let cases = [
            (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.21938393439552027368, 0.0)),
            (c, i * (PI / 4.0), Complex64::new(-0.28942604184312146699, -0.16652985534559234035)),
            (-c, i * (PI / 4.0), Complex64::new(3.800106415537697204, -2.5698389822454191304)),
            (c, -i * PI, Complex64::new(-0.21964664097843341672, -0.61490241491459333189)),
            (Complex64::new(0.5, 0.3), Complex64::new(2.0, -1.0), Complex64::new(0.013210328838516711475, 0.051912120808585722962)),
            (Complex64::new(2.5, 0.0), Complex64::new(0.1, 0.0), Complex64::new(0.53150935083420170021, 0.0)),
            (c, i * PI, Complex64::new(0.014125307732837827442, 0.18696312753902117279)),
            (-c, i * 40.0, Complex64::new(-0.019772753546321619991, 0.017641929147683531843)),
            (Complex64::new(1.5, -2.0), Complex64::new(0.01, 0.5), Complex64::new(1.1786994226399097926, 0.27709677841223675204)),
        ];
        for (nu, z, want) in cases {
            let got = expint(nu, z).unwrap();
            assert!((got - want).norm() / want.norm() < 1e-10, "E_{nu}({z}) = {got}, want {want}");
        }
    }

    #[test]
    fn expint_rejects_left_half_plane() {
        assert!(expint(Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)).is_err());
        assert!(expint(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn direction_round_trip() {
        let d = SphericalDirection::new(1.1, 5.0).unwrap();
        let e = SphericalDirection::from_vector(d.to_vector()).unwrap();
        assert!((d.theta - e.theta).abs() < 1e-14 && (d.phi - e.phi).abs() < 1e-14);
        assert!(SphericalDirection::new(4.0, 0.0).is_err());
    }
}
