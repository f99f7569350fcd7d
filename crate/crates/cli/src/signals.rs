//! Analytic test signals and their line-integral oracles.

use polarlet::slice2d::ProjectionDirection2D;
use polarlet::tomography::{line_integral, Phantom, Ray};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestSignal {
    /// exp(−|x − c|²/2σ²)
    Gaussian { center: [f64; 2], sigma: f64 },
    /// square [−half, half]² with erf edges of width sigma
    SmoothBox { half: f64, sigma: f64 },
    /// exp(−(|x| − radius)²/2w²)
    Annulus { radius: f64, width: f64 },
    Phantom(Phantom),
}

impl TestSignal {
    pub fn unit_gaussian() -> Self {
        TestSignal::Gaussian { center: [0.0, 0.0], sigma: 1.0 }
    }

    pub fn smooth_box() -> Self {
        TestSignal::SmoothBox { half: 2.5, sigma: 0.25 }
    }

    pub fn annulus() -> Self {
        TestSignal::Annulus { radius: 2.5, width: 0.25 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TestSignal::Gaussian { .. } => "gaussian",
            TestSignal::SmoothBox { .. } => "box",
            TestSignal::Annulus { .. } => "annulus",
            TestSignal::Phantom(_) => "phantom",
        }
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        match self {
            TestSignal::Gaussian { center, sigma } => {
                let (dx, dy) = (x[0] - center[0], x[1] - center[1]);
                (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp()
            }
            TestSignal::SmoothBox { half, sigma } => {
                let edge = |t: f64| {
                    let s = sigma * 2f64.sqrt();
                    0.5 * (libm::erf((half - t) / s) + libm::erf((half + t) / s))
                };
                edge(x[0]) * edge(x[1])
            }
            TestSignal::Annulus { radius, width } => {
                let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
                (-(r - radius).powi(2) / (2.0 * width * width)).exp()
            }
            TestSignal::Phantom(p) => p.eval(x),
        }
    }

    /// Closed form where one exists (Gaussian, phantom), otherwise `None`.
    pub fn exact_line_integral(&self, nu: ProjectionDirection2D, offset: f64) -> Option<f64> {
        match self {
            TestSignal::Gaussian { center, sigma } => {
                let u = nu.detector_axis();
                let d = offset - (center[0] * u[0] + center[1] * u[1]);
                Some((2.0 * PI).sqrt() * sigma * (-d * d / (2.0 * sigma * sigma)).exp())
            }
            TestSignal::Phantom(p) => Some(line_integral(p, &Ray { direction: nu, offset })),
            _ => None,
        }
    }

    /// Composite trapezoid rule along the ray over [−half_length, half_length].
    pub fn trapezoid_line_integral(&self, nu: ProjectionDirection2D, offset: f64, half_length: f64, step: f64) -> f64 {
        let u = nu.detector_axis();
        let v = nu.ray();
        let n = (2.0 * half_length / step).ceil() as usize;
        let h = 2.0 * half_length / n as f64;
        let mut sum = 0.0;
        for i in 0..=n {
            let s = -half_length + h * i as f64;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            sum += w * self.eval([offset * u[0] + s * v[0], offset * u[1] + s * v[1]]);
        }
        sum * h
    }
}
