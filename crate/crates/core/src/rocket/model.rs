use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::convolve::TapBank;
use super::kernels::{enumerate_kernels, KernelSet};
use super::schedule::DilationSchedule;
use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Parallelism};

const MAGIC: &[u8; 4] = b"RKTM";
const VERSION: u16 = 1;

/// Quantile level of bias slot `j`: `frac((j + 1) * phi)` with
/// `phi = (sqrt(5) - 1) / 2`.
pub fn quantile_level(j: usize) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    ((j + 1) as f64 * phi).fract()
}

/// Empirical quantile with linear interpolation between order statistics.
/// `values` must be non-empty; it is sorted in place.
pub fn quantile(values: &mut [f64], q: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of empty slice");
    values.sort_unstable_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (values.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(values.len() - 1);
    let frac = pos - lo as f64;
    values[lo] + frac * (values[hi] - values[lo])
}

/// Fitted transform: kernel set, schedule and one bias per feature slot.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformModel {
    kernels: KernelSet,
    schedule: DilationSchedule,
    biases: Vec<f64>,
    fit_seed: u64,
}

pub fn fit_biases(
    sample: &[&[f64]],
    kernels: &KernelSet,
    schedule: &DilationSchedule,
    seed: u64,
) -> Result<TransformModel> {
    fit_biases_with(sample, kernels, schedule, seed, Parallelism::default())
}

/// Fits every bias slot on one training signal.
///
/// Slots are visited in feature order and assigned signals round-robin from
/// a seed-shuffled copy of `sample`. The bias is the `quantile_level(j)`
/// quantile of the slot's padded or unpadded response.
pub fn fit_biases_with(
    sample: &[&[f64]],
    kernels: &KernelSet,
    schedule: &DilationSchedule,
    seed: u64,
    mode: Parallelism,
) -> Result<TransformModel> {
    if sample.is_empty() {
        return Err(Error::Fit("empty training sample".into()));
    }
    if kernels.len() != schedule.n_kernels() {
        return Err(Error::Fit(format!(
            "schedule built for {} kernels, got {}",
            schedule.n_kernels(),
            kernels.len()
        )));
    }
    for (i, x) in sample.iter().enumerate() {
        schedule.check_signal(x.len()).map_err(|e| e.at_record(i))?;
    }
    let mut order: Vec<usize> = (0..sample.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let dilations = schedule.dilations();
    let per_kernel = map_indexed(kernels.len(), mode, |k| {
        let kernel = &kernels.kernels()[k];
        let mut out = Vec::new();
        for (l, &d) in dilations.iter().enumerate() {
            let offset = schedule.offset(k, l);
            for j in 0..schedule.quota(k, l) {
                let slot = offset + j;
                let x = sample[order[slot % order.len()]];
                let bank = TapBank::new(x, d);
                let mut resp = bank.response(kernel);
                let values = if schedule.padded()[slot] {
                    &mut resp[..]
                } else {
                    let r = bank.unpadded_range();
                    &mut resp[r]
                };
                out.push(quantile(values, quantile_level(j)));
            }
        }
        out
    });
    let biases = per_kernel.concat();
    debug_assert_eq!(biases.len(), schedule.n_features());
    Ok(TransformModel { kernels: kernels.clone(), schedule: schedule.clone(), biases, fit_seed: seed })
}

impl TransformModel {
    pub fn kernels(&self) -> &KernelSet {
        &self.kernels
    }

    pub fn schedule(&self) -> &DilationSchedule {
        &self.schedule
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn fit_seed(&self) -> u64 {
        self.fit_seed
    }

    pub fn n_features(&self) -> usize {
        self.biases.len()
    }

    /// `RKTM` blob: u16 version, u32 T, u32 D, u32 kernel count, u32 dilation
    /// count, dilations (u32), quotas per pair (u32), padding flag per slot
    /// (u8), biases (f64), u64 fit seed. Little-endian throughout.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let s = &self.schedule;
        let mut w = Writer::new();
        w.bytes(MAGIC);
        w.u16(VERSION);
        w.len_u32(s.signal_len())?;
        w.len_u32(self.biases.len())?;
        w.len_u32(self.kernels.len())?;
        w.len_u32(s.dilations().len())?;
        for &d in s.dilations() {
            w.len_u32(d)?;
        }
        for &q in s.quotas() {
            w.len_u32(q)?;
        }
        for &p in s.padded() {
            w.u8(u8::from(p));
        }
        for &b in &self.biases {
            w.f64(b);
        }
        w.u64(self.fit_seed);
        Ok(w.finish())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.expect_magic(MAGIC)?;
        let version = r.u16()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported transform version {version}")));
        }
        let signal_len = r.len_u32()?;
        let n_features = r.len_u32()?;
        let n_kernels = r.len_u32()?;
        let kernels = enumerate_kernels();
        if n_kernels != kernels.len() {
            return Err(Error::Format(format!("expected {} kernels, file has {n_kernels}", kernels.len())));
        }
        let n_dil = r.len_u32()?;
        let dilations = (0..n_dil).map(|_| r.len_u32()).collect::<Result<Vec<_>>>()?;
        let quotas = (0..n_kernels * n_dil).map(|_| r.len_u32()).collect::<Result<Vec<_>>>()?;
        let total: usize = quotas.iter().sum();
        if total != n_features {
            return Err(Error::Format(format!("quotas sum to {total}, header says {n_features}")));
        }
        let padded = (0..n_features)
            .map(|_| r.u8().map(|b| b != 0))
            .collect::<Result<Vec<_>>>()?;
        let biases = (0..n_features).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        let fit_seed = r.u64()?;
        r.finish()?;
        let schedule = DilationSchedule::from_parts(signal_len, n_kernels, dilations, quotas, padded)?;
        Ok(Self { kernels, schedule, biases, fit_seed })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
    }
}
