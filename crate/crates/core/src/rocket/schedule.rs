use super::kernels::{KernelSet, KERNEL_LEN};
use crate::error::{Error, Result};

/// Cap on exponent points per kernel; `L' = min(features per kernel, cap) - 1`.
pub const DEFAULT_MAX_DILATIONS: usize = 32;

/// Dilations and per-(kernel, dilation) bias counts for one signal length.
///
/// Feature slots are laid out kernel-major, then dilation, then bias index.
/// Within each pair, even bias indices are unpadded and odd ones padded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DilationSchedule {
    signal_len: usize,
    n_kernels: usize,
    dilations: Vec<usize>,
    quotas: Vec<usize>,
    offsets: Vec<usize>,
    padded: Vec<bool>,
}

/// Schedule with the default exponent cap.
pub fn dilation_schedule(
    signal_len: usize,
    target_features: usize,
    kernels: &KernelSet,
) -> Result<DilationSchedule> {
    DilationSchedule::build(signal_len, target_features, kernels.len(), DEFAULT_MAX_DILATIONS)
}

/// `log2((T - 1) / (kernel_len - 1))`
pub fn max_exponent(signal_len: usize) -> f64 {
    ((signal_len as f64 - 1.0) / (KERNEL_LEN as f64 - 1.0)).log2()
}

impl DilationSchedule {
    /// Dilations are `floor(2^(i * L_max / L'))` for `i = 0..=L'`, merged when
    /// equal. Each kernel gets `floor(D / K)` features (the first `D mod K`
    /// kernels one more), spread over dilations in proportion to their
    /// multiplicity with leftovers going to the smallest dilations first.
    pub fn build(
        signal_len: usize,
        target_features: usize,
        n_kernels: usize,
        max_dilations: usize,
    ) -> Result<Self> {
        let min_len = 2 * (KERNEL_LEN - 1) + 1;
        if signal_len < min_len {
            return Err(Error::SignalTooShort { len: signal_len, required: min_len });
        }
        if n_kernels == 0 || target_features < n_kernels {
            return Err(Error::InfeasibleQuota(format!(
                "{target_features} features cannot cover {n_kernels} kernels"
            )));
        }
        if max_dilations == 0 {
            return Err(Error::InfeasibleQuota("max_dilations must be at least 1".into()));
        }
        let base = target_features / n_kernels;
        let extra = target_features % n_kernels;
        let points = base.min(max_dilations);
        let l_max = max_exponent(signal_len);
        let d_cap = (signal_len - 1) / (KERNEL_LEN - 1);

        let mut dilations: Vec<usize> = Vec::new();
        let mut multiplicity: Vec<usize> = Vec::new();
        for i in 0..points {
            let exponent = if points == 1 { 0.0 } else { i as f64 * l_max / (points - 1) as f64 };
            let d = (2f64.powf(exponent).floor() as usize).clamp(1, d_cap);
            if dilations.last() == Some(&d) {
                *multiplicity.last_mut().expect("non-empty") += 1;
            } else {
                dilations.push(d);
                multiplicity.push(1);
            }
        }

        let n_dil = dilations.len();
        let mut quotas = Vec::with_capacity(n_kernels * n_dil);
        for k in 0..n_kernels {
            let per_kernel = base + usize::from(k < extra);
            let mut row: Vec<usize> =
                multiplicity.iter().map(|&c| c * per_kernel / points).collect();
            let mut left = per_kernel - row.iter().sum::<usize>();
            let mut l = 0;
            while left > 0 {
                row[l % n_dil] += 1;
                left -= 1;
                l += 1;
            }
            quotas.extend(row);
        }

        let mut offsets = Vec::with_capacity(quotas.len() + 1);
        let mut padded = Vec::with_capacity(target_features);
        let mut acc = 0;
        for &q in &quotas {
            offsets.push(acc);
            acc += q;
            padded.extend((0..q).map(|j| j % 2 == 1));
        }
        offsets.push(acc);
        debug_assert_eq!(acc, target_features);

        Ok(Self { signal_len, n_kernels, dilations, quotas, offsets, padded })
    }

    /// Rebuilds a schedule from stored parts (used when loading a model).
    pub(crate) fn from_parts(
        signal_len: usize,
        n_kernels: usize,
        dilations: Vec<usize>,
        quotas: Vec<usize>,
        padded: Vec<bool>,
    ) -> Result<Self> {
        if quotas.len() != n_kernels * dilations.len() {
            return Err(Error::Format("quota table does not match kernels x dilations".into()));
        }
        let d_cap = signal_len.saturating_sub(1) / (KERNEL_LEN - 1);
        if dilations.iter().any(|&d| d == 0 || d > d_cap) {
            return Err(Error::Format("dilation outside receptive-field bound".into()));
        }
        let mut offsets = Vec::with_capacity(quotas.len() + 1);
        let mut acc = 0;
        for &q in &quotas {
            offsets.push(acc);
            acc += q;
        }
        offsets.push(acc);
        if padded.len() != acc {
            return Err(Error::Format(format!("{} padding flags for {acc} features", padded.len())));
        }
        Ok(Self { signal_len, n_kernels, dilations, quotas, offsets, padded })
    }

    pub fn signal_len(&self) -> usize {
        self.signal_len
    }

    pub fn kernel_len(&self) -> usize {
        KERNEL_LEN
    }

    pub fn n_kernels(&self) -> usize {
        self.n_kernels
    }

    /// Distinct dilations in increasing order; their count is the realised L.
    pub fn dilations(&self) -> &[usize] {
        &self.dilations
    }

    /// Bias count for every (kernel, dilation) pair, kernel-major.
    pub fn quotas(&self) -> &[usize] {
        &self.quotas
    }

    pub fn quota(&self, kernel: usize, dilation_idx: usize) -> usize {
        self.quotas[kernel * self.dilations.len() + dilation_idx]
    }

    /// First feature index of the (kernel, dilation) pair.
    pub fn offset(&self, kernel: usize, dilation_idx: usize) -> usize {
        self.offsets[kernel * self.dilations.len() + dilation_idx]
    }

    /// Padding flag per feature slot.
    pub fn padded(&self) -> &[bool] {
        &self.padded
    }

    pub fn n_features(&self) -> usize {
        self.padded.len()
    }

    /// Shortest signal every slot can be computed on: `8 * max_dilation + 1`.
    pub fn min_signal_len(&self) -> usize {
        (KERNEL_LEN - 1) * self.dilations.last().copied().unwrap_or(1) + 1
    }

    pub(crate) fn check_signal(&self, len: usize) -> Result<()> {
        let required = self.min_signal_len();
        if len < required {
            return Err(Error::SignalTooShort { len, required });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rocket::enumerate_kernels;

    #[test]
    fn l_max_at_875() {
        // log2(874 / 8) evaluated through natural logs
        let oracle = (874.0f64 / 8.0).ln() / 2f64.ln();
        assert!((max_exponent(875) - oracle).abs() < 1e-12);
        assert!((max_exponent(875) - 6.771489469500598).abs() < 1e-12);
    }

    #[test]
    fn default_layout() {
        let s = dilation_schedule(875, 9996, &enumerate_kernels()).unwrap();
        assert_eq!(s.n_features(), 9996);
        assert_eq!(s.dilations(), &[
            1, 2, 3, 4, 5, 6, 7, 8, 9, 11, 13, 15, 17, 20, 24, 27, 32, 37, 44, 51, 59, 69, 80, 93, 109
        ]);
        for k in 0..84 {
            let per: usize = (0..s.dilations().len()).map(|l| s.quota(k, l)).sum();
            assert_eq!(per, 119);
        }
        // 119/32 per point; dilation 1 merges five points -> floor(5 * 119 / 32) = 18, plus leftover
        assert_eq!(s.quota(0, 0), 19);
        assert_eq!(s.min_signal_len(), 8 * 109 + 1);
        let unpadded = s.padded().iter().filter(|&&p| !p).count();
        assert!(unpadded >= 9996 / 2);
    }

    #[test]
    fn uneven_target_sums_exactly() {
        let ks = enumerate_kernels();
        for target in [84, 85, 100, 1000, 10_000, 20_003] {
            for t in [17, 18, 64, 875, 2000] {
                let s = dilation_schedule(t, target, &ks).unwrap();
                assert_eq!(s.quotas().iter().sum::<usize>(), target);
                assert_eq!(s.n_features(), target);
                assert!(s.quotas().iter().all(|&q| q >= 1));
                assert!(s.dilations().iter().all(|&d| 8 * d < t));
                for pair in 0..s.quotas().len() {
                    let q = s.quotas()[pair];
                    let off = s.offsets[pair];
                    let unpadded = s.padded()[off..off + q].iter().filter(|&&p| !p).count();
                    assert_eq!(unpadded, q.div_ceil(2));
                }
            }
        }
    }

    #[test]
    fn errors() {
        let ks = enumerate_kernels();
        assert!(matches!(dilation_schedule(16, 9996, &ks), Err(Error::SignalTooShort { .. })));
        assert!(matches!(dilation_schedule(875, 83, &ks), Err(Error::InfeasibleQuota(_))));
    }

    #[test]
    fn shortest_signal_gets_dilation_two() {
        let s = dilation_schedule(17, 9996, &enumerate_kernels()).unwrap();
        assert_eq!(s.dilations(), &[1, 2]);
        assert_eq!(s.min_signal_len(), 17);
    }
}
