use super::kernels::{Kernel, KERNEL_LEN};
use crate::error::{Error, Result};

const HALF: usize = KERNEL_LEN / 2;

/// Dilated convolution of `x` with one kernel.
///
/// Unpadded: `u[i] = sum_m w[m] * x[i + m*d]` for `i < T - 8d`. Padded: the
/// signal is zero-extended by `4d` on both sides and the output has length T.
pub fn dilated_convolve(x: &[f64], kernel: &Kernel, dilation: usize, padded: bool) -> Result<Vec<f64>> {
    if dilation == 0 {
        return Err(Error::InvalidInput("dilation must be positive".into()));
    }
    let t = x.len();
    let span = (KERNEL_LEN - 1) * dilation;
    let w = kernel.weights();
    if padded {
        let mut u = vec![0.0; t];
        for (m, &wm) in w.iter().enumerate() {
            let wm = wm as f64;
            // tap m reads x[i + (m - 4) d]
            let shift = m as isize * dilation as isize - (HALF * dilation) as isize;
            let (lo, hi) = valid_range(t, shift);
            for i in lo..hi {
                u[i] += wm * x[(i as isize + shift) as usize];
            }
        }
        Ok(u)
    } else {
        if t < span + 1 {
            return Err(Error::SignalTooShort { len: t, required: span + 1 });
        }
        let n = t - span;
        let mut u = vec![0.0; n];
        for (m, &wm) in w.iter().enumerate() {
            let wm = wm as f64;
            let src = &x[m * dilation..m * dilation + n];
            for (ui, &xi) in u.iter_mut().zip(src) {
                *ui += wm * xi;
            }
        }
        Ok(u)
    }
}

/// Output indices `i` in `0..t` for which `i + shift` is inside the signal.
fn valid_range(t: usize, shift: isize) -> (usize, usize) {
    let lo = (-shift).max(0) as usize;
    let hi = (t as isize - shift).clamp(0, t as isize) as usize;
    (lo.min(hi), hi)
}

/// The nine zero-padded shifted copies of one signal at one dilation.
///
/// Since every weight is `-1 + 3 * [m is a 2-position]`, the padded response
/// of any kernel is `3 * (tap_a + tap_b + tap_c) - sum_m tap_m`; the tap sum
/// is shared by all 84 kernels, so each kernel costs three additions per
/// sample instead of nine multiply-adds.
pub struct TapBank {
    dilation: usize,
    len: usize,
    taps: Vec<f64>,
    total: Vec<f64>,
}

impl TapBank {
    pub fn new(x: &[f64], dilation: usize) -> Self {
        let t = x.len();
        let mut taps = vec![0.0; KERNEL_LEN * t];
        for m in 0..KERNEL_LEN {
            let shift = m as isize * dilation as isize - (HALF * dilation) as isize;
            let (lo, hi) = valid_range(t, shift);
            let row = &mut taps[m * t..(m + 1) * t];
            let start = (lo as isize + shift) as usize;
            row[lo..hi].copy_from_slice(&x[start..start + (hi - lo)]);
        }
        let mut total = vec![0.0; t];
        for m in 0..KERNEL_LEN {
            for (s, &v) in total.iter_mut().zip(&taps[m * t..(m + 1) * t]) {
                *s += v;
            }
        }
        Self { dilation, len: t, taps, total }
    }

    pub fn dilation(&self) -> usize {
        self.dilation
    }

    fn tap(&self, m: usize) -> &[f64] {
        &self.taps[m * self.len..(m + 1) * self.len]
    }

    /// Padded response of `kernel` written into `out` (length T).
    pub fn response_into(&self, kernel: &Kernel, out: &mut [f64]) {
        let [a, b, c] = kernel.twos();
        let (ta, tb, tc) = (self.tap(a), self.tap(b), self.tap(c));
        for i in 0..self.len {
            out[i] = 3.0 * (ta[i] + tb[i] + tc[i]) - self.total[i];
        }
    }

    pub fn response(&self, kernel: &Kernel) -> Vec<f64> {
        let mut out = vec![0.0; self.len];
        self.response_into(kernel, &mut out);
        out
    }

    /// Window of a padded response whose taps never touch the padding.
    /// Empty when the receptive field exceeds the signal.
    pub fn unpadded_range(&self) -> std::ops::Range<usize> {
        let edge = HALF * self.dilation;
        if self.len < 2 * edge + 1 {
            return 0..0;
        }
        edge..self.len - edge
    }
}
