//! Sparse coefficient sets and their on-disk format.

use crate::error::{Error, Result};
use crate::frame::{FrameConfig, WaveletIndex};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

/// Sparse map from wavelet index to coefficient, kept sorted by index.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSet {
    config: FrameConfig,
    entries: Vec<(WaveletIndex, f64)>,
}

fn check(config: &FrameConfig, s: &WaveletIndex) -> Result<()> {
    let j = s.j as i32;
    if s.dim != config.dim || j < -1 || j > config.j_max || s.t >= config.orientation_count(j) {
        return Err(Error::InvalidIndex(format!("{s:?} is not part of the configured frame")));
    }
    Ok(())
}

impl CoefficientSet {
    pub fn empty(config: FrameConfig) -> Self {
        Self { config, entries: Vec::new() }
    }

    /// Builds a set; duplicate indices are rejected and exact zeros dropped.
    pub fn from_entries(config: FrameConfig, mut entries: Vec<(WaveletIndex, f64)>) -> Result<Self> {
        config.validate()?;
        for (s, v) in &entries {
            check(&config, s)?;
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite coefficient at {s:?}")));
            }
        }
        entries.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidIndex(format!("duplicate index {:?}", w[0].0)));
        }
        entries.retain(|e| e.1 != 0.0);
        Ok(Self { config, entries })
    }

    pub fn config(&self) -> &FrameConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(WaveletIndex, f64)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (&WaveletIndex, f64)> {
        self.entries.iter().map(|(s, v)| (s, *v))
    }

    pub fn get(&self, s: &WaveletIndex) -> Option<f64> {
        self.entries.binary_search_by(|e| e.0.cmp(s)).ok().map(|i| self.entries[i].1)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.1.abs()))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|e| e.1 * e.1).sum()
    }

    /// Hard thresholding: drops every entry with |value| ≤ eps.
    pub fn threshold(&self, eps: f64) -> Result<Self> {
        if !(eps >= 0.0) {
            return Err(Error::InvalidArgument(format!("threshold {eps} must be non-negative")));
        }
        let entries = self.entries.iter().copied().filter(|e| e.1.abs() > eps).collect();
        Ok(Self { config: self.config.clone(), entries })
    }

    /// a·self + b·other.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.config != other.config {
            return Err(Error::InvalidArgument("coefficient sets use different frames".into()));
        }
        let mut out = Vec::with_capacity(self.len().max(other.len()));
        let (mut i, mut k) = (0, 0);
        let (x, y) = (&self.entries, &other.entries);
        while i < x.len() || k < y.len() {
            let ord = match (x.get(i), y.get(k)) {
                (Some(p), Some(q)) => p.0.cmp(&q.0),
                (Some(_), None) => std::cmp::Ordering::Less,
                _ => std::cmp::Ordering::Greater,
            };
            let (s, v) = match ord {
                std::cmp::Ordering::Less => {
                    i += 1;
                    (x[i - 1].0, a * x[i - 1].1)
                }
                std::cmp::Ordering::Greater => {
                    k += 1;
                    (y[k - 1].0, b * y[k - 1].1)
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    k += 1;
                    (x[i - 1].0, a * x[i - 1].1 + b * y[k - 1].1)
                }
            };
            if v != 0.0 {
                out.push((s, v));
            }
        }
        Ok(Self { config: self.config.clone(), entries: out })
    }

    /// Keeps entries for which `keep` returns true.
    pub fn filter<F: FnMut(&WaveletIndex, f64) -> bool>(&self, mut keep: F) -> Self {
        let entries = self.entries.iter().copied().filter(|(s, v)| keep(s, *v)).collect();
        Self { config: self.config.clone(), entries }
    }

    /// Writes the `PWCS` format: magic, version u32, header length u32, JSON header,
    /// record count u64, then records (j i8, k i32 × dim, t u16, value f64),
    /// everything little-endian.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let header = FileHeader {
            version: PWCS_VERSION,
            config: self.config.clone(),
            windows: window_descriptors(&self.config),
        };
        let json = serde_json::to_vec(&header)?;
        w.write_all(PWCS_MAGIC)?;
        w.write_all(&PWCS_VERSION.to_le_bytes())?;
        w.write_all(&(json.len() as u32).to_le_bytes())?;
        w.write_all(&json)?;
        w.write_all(&(self.entries.len() as u64).to_le_bytes())?;
        let d = self.config.dim as usize;
        let mut rec = Vec::with_capacity(1 + 4 * d + 2 + 8);
        for (s, v) in &self.entries {
            rec.clear();
            rec.push(s.j as u8);
            for k in &s.k[..d] {
                rec.extend_from_slice(&k.to_le_bytes());
            }
            rec.extend_from_slice(&s.t.to_le_bytes());
            rec.extend_from_slice(&v.to_le_bytes());
            w.write_all(&rec)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != PWCS_MAGIC {
            return Err(Error::Format("not a coefficient file (bad magic)".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != PWCS_VERSION {
            return Err(Error::Format(format!("unsupported coefficient file version {version}")));
        }
        r.read_exact(&mut b4)?;
        let len = u32::from_le_bytes(b4) as usize;
        if len > 1 << 24 {
            return Err(Error::Format("header too large".into()));
        }
        let mut json = vec![0u8; len];
        r.read_exact(&mut json)?;
        let header: FileHeader = serde_json::from_slice(&json)?;
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let count = u64::from_le_bytes(b8) as usize;
        let d = header.config.dim as usize;
        if d != 2 && d != 3 {
            return Err(Error::Format(format!("dimension {d} in header")));
        }
        let rec_len = 1 + 4 * d + 2 + 8;
        let mut rec = vec![0u8; rec_len];
        let mut entries = Vec::with_capacity(count.min(1 << 24));
        for _ in 0..count {
            r.read_exact(&mut rec)?;
            let j = rec[0] as i8;
            let mut k = [0i32; 3];
            for (a, kk) in k.iter_mut().enumerate().take(d) {
                *kk = i32::from_le_bytes(rec[1 + 4 * a..5 + 4 * a].try_into().unwrap());
            }
            let o = 1 + 4 * d;
            let t = u16::from_le_bytes(rec[o..o + 2].try_into().unwrap());
            let v = f64::from_le_bytes(rec[o + 2..o + 10].try_into().unwrap());
            entries.push((WaveletIndex { dim: d as u8, j, k, t }, v));
        }
        Self::from_entries(header.config, entries)
    }
}

pub const PWCS_MAGIC: &[u8; 4] = b"PWCS";
pub const PWCS_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct FileHeader {
    version: u32,
    config: FrameConfig,
    windows: Vec<WindowDescriptor>,
}

/// Human-readable summary of the angular windows of one level.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WindowDescriptor {
    pub level: i32,
    pub count: u16,
    pub kind: String,
}

pub fn window_descriptors(config: &FrameConfig) -> Vec<WindowDescriptor> {
    config
        .levels()
        .map(|j| {
            let count = config.orientation_count(j);
            let kind = match (config.dim, count) {
                (_, 1) => "isotropic".to_string(),
                (2, _) => format!("cos-power-{}", 2 * ((count - 1) / 2)),
                _ => "icosahedral-zonal-cos2".to_string(),
            };
            WindowDescriptor { level: j, count, kind }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> FrameConfig {
        FrameConfig::directional_2d(2, -1.0, 1.0)
    }

    #[test]
    fn threshold_examples() {
        let c = CoefficientSet::from_entries(
            cfg(),
            vec![(WaveletIndex::new2(0, 0, 0, 0), 1.0), (WaveletIndex::new2(1, 1, 0, 2), -0.1)],
        )
        .unwrap();
        assert_eq!(c.threshold(0.0).unwrap(), c);
        assert!(c.threshold(f64::INFINITY).unwrap().is_empty());
        assert_eq!(c.threshold(0.1).unwrap().len(), 1);
        assert!(c.threshold(-1.0).is_err());
    }

    #[test]
    fn rejects_bad_entries() {
        let dup = vec![(WaveletIndex::new2(0, 0, 0, 0), 1.0), (WaveletIndex::new2(0, 0, 0, 0), 2.0)];
        assert!(CoefficientSet::from_entries(cfg(), dup).is_err());
        let bad = vec![(WaveletIndex::new2(1, 0, 0, 7), 1.0)];
        assert!(CoefficientSet::from_entries(cfg(), bad).is_err());
    }

    #[test]
    fn file_round_trip_2d_and_3d() {
        let c = CoefficientSet::from_entries(
            cfg(),
            vec![(WaveletIndex::new2(-1, -3, 2, 0), 0.5), (WaveletIndex::new2(2, 7, -9, 5), -1.25)],
        )
        .unwrap();
        let mut buf = Vec::new();
        c.write_to(&mut buf).unwrap();
        assert_eq!(CoefficientSet::read_from(&buf[..]).unwrap(), c);
        let c3 = CoefficientSet::from_entries(
            FrameConfig::directional_3d(1, -1.0, 1.0),
            vec![(WaveletIndex::new3(1, [1, 2, -3], 4), 2.0)],
        )
        .unwrap();
        let mut buf = Vec::new();
        c3.write_to(&mut buf).unwrap();
        assert_eq!(CoefficientSet::read_from(&buf[..]).unwrap(), c3);
        assert!(CoefficientSet::read_from(&b"nope"[..]).is_err());
    }

    #[test]
    fn combine_cancels_to_empty() {
        let s = WaveletIndex::new2(1, 0, 0, 1);
        let a = CoefficientSet::from_entries(cfg(), vec![(s, 0.75)]).unwrap();
        assert!(a.combine(1.0, &a, -1.0).unwrap().is_empty());
        assert_eq!(a.combine(2.0, &a, 1.0).unwrap().get(&s), Some(2.25));
    }
}
