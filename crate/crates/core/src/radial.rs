//! Steerable-pyramid radial window, its scaling companion, and tabulated
//! spatial profiles (Hankel transforms h_n and 1D slice profiles).

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;
use crate::special::bessel_j_seq_into;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::io::{Read, Write};
use std::sync::{Arc, Mutex, OnceLock};

/// Lower edge of the wavelet pass band.
pub const LOW_CUT: f64 = FRAC_PI_4;
/// Upper edge of the wavelet pass band.
pub const HIGH_CUT: f64 = PI;

/// ĥ(r) = cos((π/2) log₂(2r/π)) on [π/4, π], zero elsewhere.
pub fn h_hat(r: f64) -> f64 {
    if !(LOW_CUT..=HIGH_CUT).contains(&r) {
        return 0.0;
    }
    (FRAC_PI_2 * (2.0 * r / PI).log2()).cos().max(0.0)
}

/// Scaling window: 1 on [0, π/4], sin(−(π/2) log₂(2r/π)) on [π/4, π/2], zero beyond.
pub fn phi_hat(r: f64) -> f64 {
    let r = r.abs();
    if r <= LOW_CUT {
        1.0
    } else if r < FRAC_PI_2 {
        (-FRAC_PI_2 * (2.0 * r / PI).log2()).sin()
    } else {
        0.0
    }
}

/// φ̂(r)² + Σ_{j=0..J} ĥ(2^{-j} r)² − 1.
///
/// Zero up to 2^{J−1}π; above that the level J+1 partner is missing.
pub fn tiling_residual(r: f64, j_max: u32) -> f64 {
    let mut s = phi_hat(r).powi(2);
    for j in 0..=j_max {
        s += h_hat(r * 0.5f64.powi(j as i32)).powi(2);
    }
    s - 1.0
}

/// Which radial window a profile is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Window {
    Wavelet,
    Scaling,
}

impl Window {
    pub fn eval(self, r: f64) -> f64 {
        match self {
            Window::Wavelet => h_hat(r),
            Window::Scaling => phi_hat(r),
        }
    }

    /// Smooth pieces of the window's support.
    fn pieces(self) -> &'static [(f64, f64)] {
        match self {
            Window::Wavelet => &[(LOW_CUT, HIGH_CUT)],
            Window::Scaling => &[(0.0, LOW_CUT), (LOW_CUT, FRAC_PI_2)],
        }
    }

    fn code(self) -> u32 {
        match self {
            Window::Wavelet => 0,
            Window::Scaling => 1,
        }
    }
}

/// A tabulated spatial profile.
///
/// `Hankel` is h_n(r) = ∫ w(ρ) J_n(ρr) ρ dρ, the radial part of a 2D polar wavelet.
/// `Slice` is H(x) = 2∫ w(ρ) cos(ρx) dρ, the profile of a projected (1D) wavelet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProfileKind {
    Hankel { order: u32, window: Window },
    Slice { window: Window },
}

impl ProfileKind {
    fn code(self) -> (u32, u32) {
        match self {
            ProfileKind::Hankel { order, window } => (window.code(), order),
            ProfileKind::Slice { window } => (2 + window.code(), 0),
        }
    }

    fn from_code(kind: u32, n: u32) -> Result<Self> {
        let window = if kind % 2 == 0 { Window::Wavelet } else { Window::Scaling };
        match kind {
            0 | 1 => Ok(ProfileKind::Hankel { order: n, window }),
            2 | 3 => Ok(ProfileKind::Slice { window }),
            _ => Err(Error::Format(format!("unknown profile kind {kind}"))),
        }
    }
}

const GL_NODES: usize = 24;
const PANEL_PHASE: f64 = 12.0;

fn rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(GL_NODES))
}

fn panels(width: f64, r: f64) -> usize {
    ((width * r.abs().max(1.0)) / PANEL_PHASE).ceil().max(2.0) as usize
}

/// Direct quadrature of h_n(r) and dh_n/dr for orders 0..out.len().
pub fn hankel_direct(window: Window, r: f64, values: &mut [f64], slopes: &mut [f64]) {
    let nmax = values.len() - 1;
    values.fill(0.0);
    slopes.fill(0.0);
    let mut j = vec![0.0; nmax + 2];
    for &(a, b) in window.pieces() {
        let (xs, ws) = rule().composite(a, b, panels(b - a, r));
        for (rho, w) in xs.into_iter().zip(ws) {
            let wv = window.eval(rho) * w;
            if wv == 0.0 {
                continue;
            }
            bessel_j_seq_into(rho * r, &mut j);
            for n in 0..=nmax {
                values[n] += wv * rho * j[n];
                let jm = if n == 0 { -j[1] } else { j[n - 1] };
                slopes[n] += wv * rho * rho * 0.5 * (jm - j[n + 1]);
            }
        }
    }
}

/// Direct quadrature of H(x) = 2∫ w cos(ρx) dρ and its derivative.
pub fn slice_direct(window: Window, x: f64) -> (f64, f64) {
    let mut v = 0.0;
    let mut d = 0.0;
    for &(a, b) in window.pieces() {
        let (xs, ws) = rule().composite(a, b, panels(b - a, x));
        for (rho, w) in xs.into_iter().zip(ws) {
            let wv = window.eval(rho) * w;
            let (s, c) = (rho * x).sin_cos();
            v += 2.0 * wv * c;
            d -= 2.0 * wv * rho * s;
        }
    }
    (v, d)
}

/// Uniformly sampled profile with cubic Hermite interpolation.
///
/// Queries beyond `r_max` return 0; the profiles decay algebraically, so
/// the table range bounds the truncation error.
#[derive(Clone, Debug)]
pub struct ProfileTable {
    kind: ProfileKind,
    r_max: f64,
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

pub const PSPT_MAGIC: &[u8; 4] = b"PSPT";
pub const PSPT_VERSION: u32 = 1;

impl ProfileTable {
    pub fn build(kind: ProfileKind, r_max: f64, samples: usize) -> Result<Self> {
        let mut tables = Self::build_family(kind, r_max, samples)?;
        Ok(tables.pop().expect("family is never empty"))
    }

    /// Builds the requested table; for Hankel kinds all lower orders come along
    /// for free and are returned first.
    fn build_family(kind: ProfileKind, r_max: f64, samples: usize) -> Result<Vec<Self>> {
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(Error::InvalidArgument(format!("r_max = {r_max} must be positive")));
        }
        if samples < 64 {
            return Err(Error::InvalidArgument(format!("{samples} samples; need at least 64")));
        }
        let step = r_max / (samples - 1) as f64;
        match kind {
            ProfileKind::Slice { window } => {
                let mut values = Vec::with_capacity(samples);
                let mut slopes = Vec::with_capacity(samples);
                for i in 0..samples {
                    let (v, d) = slice_direct(window, i as f64 * step);
                    values.push(v);
                    slopes.push(d);
                }
                Ok(vec![Self { kind, r_max, step, values, slopes }])
            }
            ProfileKind::Hankel { order, window } => {
                let n = order as usize;
                let mut values = vec![vec![0.0; samples]; n + 1];
                let mut slopes = vec![vec![0.0; samples]; n + 1];
                let mut v = vec![0.0; n + 1];
                let mut d = vec![0.0; n + 1];
                for i in 0..samples {
                    hankel_direct(window, i as f64 * step, &mut v, &mut d);
                    for k in 0..=n {
                        values[k][i] = v[k];
                        slopes[k][i] = d[k];
                    }
                }
                let out = values
                    .into_iter()
                    .zip(slopes)
                    .enumerate()
                    .map(|(k, (values, slopes))| Self {
                        kind: ProfileKind::Hankel { order: k as u32, window },
                        r_max,
                        step,
                        values,
                        slopes,
                    })
                    .collect::<Vec<_>>();
                if out.iter().any(|t| t.values.iter().any(|v| !v.is_finite())) {
                    return Err(Error::NoConvergence("profile quadrature produced non-finite values".into()));
                }
                Ok(out)
            }
        }
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn samples(&self) -> usize {
        self.values.len()
    }

    /// Sample radii and values.
    pub fn grid(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (i as f64 * self.step, v))
    }

    /// Interpolated value; slice profiles are even, Hankel profiles take |r|.
    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        if !(r <= self.r_max) {
            return 0.0;
        }
        let s = r / self.step;
        let i = (s as usize).min(self.values.len() - 2);
        let t = s - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * self.step, self.slopes[i + 1] * self.step);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1
    }

    /// Writes the table as: "PSPT", version u32, n u32, samples u64, r_max f64,
    /// kind u32, then `samples` values and `samples` slopes, all little-endian.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let (kind, n) = self.kind.code();
        w.write_all(PSPT_MAGIC)?;
        w.write_all(&PSPT_VERSION.to_le_bytes())?;
        w.write_all(&n.to_le_bytes())?;
        w.write_all(&(self.values.len() as u64).to_le_bytes())?;
        w.write_all(&self.r_max.to_le_bytes())?;
        w.write_all(&kind.to_le_bytes())?;
        for v in self.values.iter().chain(&self.slopes) {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != PSPT_MAGIC {
            return Err(Error::Format("bad profile table magic".into()));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != PSPT_VERSION {
            return Err(Error::Format(format!("unsupported profile table version {version}")));
        }
        r.read_exact(&mut b4)?;
        let n = u32::from_le_bytes(b4);
        r.read_exact(&mut b8)?;
        let samples = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b8)?;
        let r_max = f64::from_le_bytes(b8);
        r.read_exact(&mut b4)?;
        let kind = ProfileKind::from_code(u32::from_le_bytes(b4), n)?;
        if samples < 2 || !(r_max > 0.0) || samples > 1 << 28 {
            return Err(Error::Format("corrupt profile table header".into()));
        }
        let mut read_vec = |len: usize| -> Result<Vec<f64>> {
            let mut v = Vec::with_capacity(len);
            for _ in 0..len {
                r.read_exact(&mut b8)?;
                v.push(f64::from_le_bytes(b8));
            }
            Ok(v)
        };
        let values = read_vec(samples)?;
        let slopes = read_vec(samples)?;
        Ok(Self { kind, r_max, step: r_max / (samples - 1) as f64, values, slopes })
    }
}

/// Hankel profile table of order n for the wavelet window.
pub fn build_profile_table(n: u32, r_max: f64, samples: usize) -> Result<ProfileTable> {
    ProfileTable::build(ProfileKind::Hankel { order: n, window: Window::Wavelet }, r_max, samples)
}

/// Size of a table family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableSpec {
    pub r_max: f64,
    pub samples: usize,
}

impl TableSpec {
    pub const DEFAULT: TableSpec = TableSpec { r_max: 64.0, samples: 8192 };
    pub const WIDE: TableSpec = TableSpec { r_max: 128.0, samples: 16384 };
}

impl Default for TableSpec {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Lazily built, shared collection of profile tables of one size.
pub struct ProfileBank {
    spec: TableSpec,
    tables: Mutex<HashMap<ProfileKind, Arc<ProfileTable>>>,
}

impl ProfileBank {
    pub fn new(spec: TableSpec) -> Self {
        Self { spec, tables: Mutex::new(HashMap::new()) }
    }

    /// Process-wide bank for the given size.
    pub fn shared(spec: TableSpec) -> Arc<ProfileBank> {
        static BANKS: OnceLock<Mutex<Vec<Arc<ProfileBank>>>> = OnceLock::new();
        let banks = BANKS.get_or_init(|| Mutex::new(Vec::new()));
        let mut banks = banks.lock().unwrap();
        if let Some(b) = banks.iter().find(|b| b.spec == spec) {
            return b.clone();
        }
        let b = Arc::new(ProfileBank::new(spec));
        banks.push(b.clone());
        b
    }

    pub fn spec(&self) -> TableSpec {
        self.spec
    }

    pub fn get(&self, kind: ProfileKind) -> Result<Arc<ProfileTable>> {
        let mut tables = self.tables.lock().unwrap();
        if let Some(t) = tables.get(&kind) {
            return Ok(t.clone());
        }
        // build while holding the lock so concurrent callers don't duplicate work
        let family = ProfileTable::build_family(kind, self.spec.r_max, self.spec.samples)?;
        for t in family {
            tables.entry(t.kind).or_insert_with(|| Arc::new(t));
        }
        Ok(tables[&kind].clone())
    }

    /// Hankel tables of orders 0..=max_order, built in one quadrature pass.
    pub fn hankel_family(&self, window: Window, max_order: u32) -> Result<Vec<Arc<ProfileTable>>> {
        self.get(ProfileKind::Hankel { order: max_order, window })?;
        (0..=max_order).map(|n| self.get(ProfileKind::Hankel { order: n, window })).collect()
    }

    pub fn slice(&self, window: Window) -> Result<Arc<ProfileTable>> {
        self.get(ProfileKind::Slice { window })
    }
}

/// The 1D slice profile h¹(x) = 2∫ĥ(ρ) cos(ρx) dρ from the shared default table.
///
/// The 1/2π of the sliced wavelet lives in its weight, not here.
pub fn h1_profile(x: f64) -> f64 {
    ProfileBank::shared(TableSpec::DEFAULT)
        .slice(Window::Wavelet)
        .expect("default slice table builds")
        .eval(x)
}

/// h¹(0) in closed form: 2∫ĥ = (5/4) π² ln 2 / (ln²2 + π²/4).
pub fn h1_at_zero() -> f64 {
    let l = std::f64::consts::LN_2;
    1.25 * PI * PI * l / (l * l + PI * PI / 4.0)
}

/// Closed form of h¹ through exponential integrals of complex order.
///
/// With c = iπ/ln 4, z = iπx/4 and E_c = E_{c} − E_{−c}:
/// h¹(x) = (iπ/8)·[E_c(z) + E_c(−z) + 4E_c(4z) + 4E_c(−4z)].
#[cfg(feature = "closed-form")]
pub fn h1_closed_form(x: f64) -> Result<f64> {
    use crate::special::expint;
    use num_complex::Complex64;
    if x == 0.0 {
        return Ok(h1_at_zero());
    }
    let c = Complex64::new(0.0, PI / 4f64.ln());
    let ec = |z: Complex64| -> Result<Complex64> { Ok(expint(c, z)? - expint(-c, z)?) };
    let z = Complex64::new(0.0, PI * x / 4.0);
    let s = ec(z)? + ec(-z)? + (ec(z * 4.0)? + ec(-z * 4.0)?) * 4.0;
    Ok((Complex64::new(0.0, PI / 8.0) * s).re)
}
