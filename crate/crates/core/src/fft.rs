//! Unnormalized n-dimensional FFTs on row-major (last axis fastest) buffers.

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

/// In-place n-D transform. `inverse` uses the +i exponent; neither direction scales.
pub fn fft_nd(data: &mut [Complex64], shape: &[usize], inverse: bool) {
    let total: usize = shape.iter().product();
    assert_eq!(data.len(), total, "buffer does not match shape");
    if total == 0 {
        return;
    }
    let dir = if inverse { FftDirection::Inverse } else { FftDirection::Forward };
    let mut planner = FftPlanner::new();
    let mut buf = Vec::new();
    for axis in 0..shape.len() {
        let n = shape[axis];
        if n == 1 {
            continue;
        }
        let fft = planner.plan_fft(n, dir);
        let inner: usize = shape[axis + 1..].iter().product();
        let outer = total / (n * inner);
        if inner == 1 {
            fft.process(data);
            continue;
        }
        // gather strided lines into a contiguous batch
        buf.resize(total, Complex64::new(0.0, 0.0));
        for o in 0..outer {
            let base = o * n * inner;
            for i in 0..inner {
                let line = (o * inner + i) * n;
                for k in 0..n {
                    buf[line + k] = data[base + k * inner + i];
                }
            }
        }
        fft.process(&mut buf);
        for o in 0..outer {
            let base = o * n * inner;
            for i in 0..inner {
                let line = (o * inner + i) * n;
                for k in 0..n {
                    data[base + k * inner + i] = buf[line + k];
                }
            }
        }
    }
}

/// Smallest m ≥ n whose prime factors are all 2, 3 or 5.
pub fn good_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}
