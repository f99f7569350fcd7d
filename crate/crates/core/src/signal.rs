//! Regularly sampled signals in one to three dimensions and error metrics.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Uniform grid: point i has coordinates origin + spacing·i (last axis fastest).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: Vec<f64>,
    pub spacing: f64,
    pub shape: Vec<usize>,
}

impl GridSpec {
    pub fn new(origin: Vec<f64>, spacing: f64, shape: Vec<usize>) -> Result<Self> {
        if origin.len() != shape.len() || origin.is_empty() || origin.len() > 3 {
            return Err(Error::InvalidArgument(format!(
                "grid origin has {} axes but shape has {}",
                origin.len(),
                shape.len()
            )));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidArgument(format!("grid spacing {spacing} must be positive")));
        }
        if shape.iter().any(|&n| n == 0) || origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidArgument("grid needs finite origin and non-empty axes".into()));
        }
        Ok(Self { origin, spacing, shape })
    }

    /// Square/cubic grid covering [lo, hi] on every axis, endpoints included.
    pub fn cube(dim: usize, lo: f64, hi: f64, spacing: f64) -> Result<Self> {
        let n = ((hi - lo) / spacing).round() as i64 + 1;
        if n < 1 {
            return Err(Error::InvalidArgument(format!("empty interval [{lo}, {hi}]")));
        }
        Self::new(vec![lo; dim], spacing, vec![n as usize; dim])
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates of the flat index `i`.
    pub fn point(&self, mut i: usize) -> [f64; 3] {
        let mut p = [0.0; 3];
        for a in (0..self.dim()).rev() {
            let n = self.shape[a];
            p[a] = self.origin[a] + self.spacing * (i % n) as f64;
            i /= n;
        }
        p
    }

    pub fn axis(&self, a: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.shape[a]).map(move |i| self.origin[a] + self.spacing * i as f64)
    }

    pub fn upper(&self) -> Vec<f64> {
        self.origin.iter().zip(&self.shape).map(|(o, &n)| o + self.spacing * (n - 1) as f64).collect()
    }

    pub fn same_as(&self, other: &GridSpec) -> bool {
        self.shape == other.shape
            && (self.spacing - other.spacing).abs() <= 1e-12 * self.spacing
            && self.origin.iter().zip(&other.origin).all(|(a, b)| (a - b).abs() <= 1e-9 * self.spacing)
    }
}

/// Values on a [`GridSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledSignal {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

pub type SampledSignal1D = SampledSignal;
pub type SampledSignal2D = SampledSignal;

impl SampledSignal {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::GridMismatch(format!("{} values for a grid of {}", values.len(), grid.len())));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let n = grid.len();
        Self { grid, values: vec![0.0; n] }
    }

    pub fn from_fn<F: FnMut([f64; 3]) -> f64>(grid: GridSpec, mut f: F) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self { grid, values }
    }

    /// Discrete L² norm including the cell volume.
    pub fn norm_l2(&self) -> f64 {
        let cell = self.grid.spacing.powi(self.grid.dim() as i32);
        (self.values.iter().map(|v| v * v).sum::<f64>() * cell).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Relative errors ‖rec − ref‖_p / ‖ref‖_p for p = 1, 2, ∞.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

pub fn error_metrics(rec: &SampledSignal, reference: &SampledSignal) -> Result<ErrorMetrics> {
    if !rec.grid.same_as(&reference.grid) {
        return Err(Error::GridMismatch("reconstruction and reference grids differ".into()));
    }
    relative_errors(&rec.values, &reference.values)
}

/// Same metrics on bare value slices.
pub fn relative_errors(rec: &[f64], reference: &[f64]) -> Result<ErrorMetrics> {
    if rec.len() != reference.len() {
        return Err(Error::GridMismatch(format!("{} vs {} samples", rec.len(), reference.len())));
    }
    let (mut d1, mut d2, mut di, mut r1, mut r2, mut ri) = (0.0, 0.0, 0.0f64, 0.0, 0.0, 0.0f64);
    for (a, b) in rec.iter().zip(reference) {
        let d = (a - b).abs();
        d1 += d;
        d2 += d * d;
        di = di.max(d);
        r1 += b.abs();
        r2 += b * b;
        ri = ri.max(b.abs());
    }
    if ri == 0.0 {
        return Err(Error::InvalidArgument("reference signal is identically zero".into()));
    }
    Ok(ErrorMetrics { l1: d1 / r1, l2: (d2 / r2).sqrt(), linf: di / ri })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::new(vec![0.0, 0.0], 0.5, vec![2, 3]).unwrap()
    }

    #[test]
    fn point_layout_is_row_major() {
        let g = grid();
        assert_eq!(g.point(0), [0.0, 0.0, 0.0]);
        assert_eq!(g.point(1), [0.0, 0.5, 0.0]);
        assert_eq!(g.point(3), [0.5, 0.0, 0.0]);
        assert_eq!(g.upper(), vec![0.5, 1.0]);
    }

    #[test]
    fn metrics_examples() {
        let r = SampledSignal::new(grid(), vec![1.0, -2.0, 3.0, 0.5, 0.0, 1.0]).unwrap();
        let m = error_metrics(&r, &r).unwrap();
        assert_eq!((m.l1, m.l2, m.linf), (0.0, 0.0, 0.0));
        let mut twice = r.clone();
        twice.values.iter_mut().for_each(|v| *v *= 2.0);
        let m = error_metrics(&twice, &r).unwrap();
        assert!((m.l1 - 1.0).abs() < 1e-15 && (m.l2 - 1.0).abs() < 1e-15 && (m.linf - 1.0).abs() < 1e-15);
        // one pixel off by 0.25
        let mut p = r.clone();
        p.values[3] += 0.25;
        let m = error_metrics(&p, &r).unwrap();
        assert!((m.l1 - 0.25 / 7.5).abs() < 1e-15);
        assert!((m.l2 - 0.25 / 15.25f64.sqrt()).abs() < 1e-15);
        assert!((m.linf - 0.25 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn metrics_reject_mismatch_and_zero() {
        let r = SampledSignal::zeros(grid());
        assert!(error_metrics(&r, &r).is_err());
        let other = SampledSignal::zeros(GridSpec::new(vec![0.0, 0.0], 0.5, vec![3, 2]).unwrap());
        assert!(matches!(error_metrics(&r, &other), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn bad_grids_rejected() {
        assert!(GridSpec::new(vec![0.0], -1.0, vec![3]).is_err());
        assert!(GridSpec::new(vec![0.0, 1.0], 1.0, vec![3]).is_err());
        assert!(SampledSignal::new(grid(), vec![0.0; 5]).is_err());
    }
}
