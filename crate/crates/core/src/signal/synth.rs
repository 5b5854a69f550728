//! Synthetic PPG corpus.
//!
//! Each beat is a Gaussian systolic bump followed by a delayed, scaled
//! Gaussian dicrotic bump. Windows add a sinusoidal baseline wander, a DC
//! level and white noise. Every subject draws its own RNG stream from
//! `(seed, class, subject index)`, so output is reproducible bit for bit.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::record::{binarize_label, Dataset, PpgRecord, SplitTag};
use crate::error::{Error, Result};

/// Per-class generator settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassProfile {
    pub n_subjects: usize,
    pub systolic_amplitude: f64,
    /// Gaussian sd of the systolic bump, seconds.
    pub systolic_width: f64,
    /// Dicrotic amplitude as a fraction of the systolic amplitude.
    pub dicrotic_ratio: f64,
    /// Dicrotic centre minus systolic centre, seconds.
    pub dicrotic_delay: f64,
    /// Gaussian sd of the dicrotic bump, seconds.
    pub dicrotic_width: f64,
    pub hr_mean: f64,
    /// Between-subject heart-rate sd, bpm.
    pub hr_sd: f64,
    /// Within-subject (window to window) heart-rate sd, bpm.
    pub window_hr_sd: f64,
    /// Relative sd of per-subject multiplicative jitter on every shape parameter.
    pub shape_jitter: f64,
    pub sbp_range: (f64, f64),
    pub dbp_range: (f64, f64),
    /// Optional second phenotype within the class.
    pub alt_phenotype: Option<AltPhenotype>,
}

/// Replaces the dicrotic mean shape for a random share of a class's subjects.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AltPhenotype {
    pub probability: f64,
    pub dicrotic_ratio: f64,
    pub dicrotic_delay: f64,
}

impl ClassProfile {
    pub fn default_normal() -> Self {
        Self {
            n_subjects: 240,
            systolic_amplitude: 1.0,
            systolic_width: 0.085,
            dicrotic_ratio: 0.45,
            dicrotic_delay: 0.30,
            dicrotic_width: 0.11,
            hr_mean: 74.0,
            hr_sd: 9.0,
            window_hr_sd: 2.0,
            shape_jitter: 0.1,
            sbp_range: (100.0, 138.0),
            dbp_range: (60.0, 88.0),
            alt_phenotype: None,
        }
    }

    /// Two phenotypes of equal share: an augmented late wave and a damped one,
    /// straddling the normal class.
    pub fn default_hypertensive() -> Self {
        Self {
            n_subjects: 60,
            systolic_width: 0.1,
            dicrotic_ratio: 0.75,
            hr_mean: 78.0,
            sbp_range: (140.0, 180.0),
            dbp_range: (70.0, 110.0),
            alt_phenotype: Some(AltPhenotype { probability: 0.5, dicrotic_ratio: 0.15, dicrotic_delay: 0.30 }),
            ..Self::default_normal()
        }
    }

    fn validate(&self, class: u8) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(format!("class {class} profile: {m}")));
        if self.systolic_amplitude < 0.0 || self.dicrotic_ratio < 0.0 {
            return bad("amplitudes must be non-negative".into());
        }
        if !(self.systolic_width > 0.0 && self.dicrotic_width > 0.0) {
            return bad("widths must be positive".into());
        }
        if self.dicrotic_delay < 0.0 {
            return bad("dicrotic delay must be non-negative".into());
        }
        if !(30.0..=220.0).contains(&self.hr_mean) {
            return bad(format!("mean heart rate {} outside [30, 220]", self.hr_mean));
        }
        if let Some(a) = &self.alt_phenotype {
            if !(0.0..=1.0).contains(&a.probability) || a.dicrotic_ratio < 0.0 || a.dicrotic_delay < 0.0 {
                return bad("alternative phenotype needs probability in [0, 1] and non-negative shape".into());
            }
        }
        if self.hr_sd < 0.0 || self.window_hr_sd < 0.0 || self.shape_jitter < 0.0 {
            return bad("standard deviations must be non-negative".into());
        }
        let (s0, s1) = self.sbp_range;
        let (d0, d1) = self.dbp_range;
        if !(s0 <= s1 && d0 <= d1 && d0 > 0.0 && s0 > d1) {
            return bad("pressure ranges must satisfy sbp > dbp > 0".into());
        }
        // both corners of the range must carry the class label
        for (s, d) in [(s0, d0), (s1, d1)] {
            if binarize_label(s, d)? != class {
                return bad(format!("pressure ({s}, {d}) does not map to class {class}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub normal: ClassProfile,
    pub hypertensive: ClassProfile,
    pub windows_per_subject: usize,
    pub duration_s: f64,
    pub fs: f64,
    pub noise_sd: f64,
    pub wander_amplitude: f64,
    pub wander_freq_hz: f64,
    pub dc_level: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            normal: ClassProfile::default_normal(),
            hypertensive: ClassProfile::default_hypertensive(),
            windows_per_subject: 4,
            duration_s: 7.0,
            fs: 125.0,
            noise_sd: 0.25,
            wander_amplitude: 0.1,
            wander_freq_hz: 0.2,
            dc_level: 1.5,
            seed: 0,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        self.normal.validate(0)?;
        self.hypertensive.validate(1)?;
        if self.windows_per_subject == 0 {
            return Err(Error::InvalidInput("windows_per_subject must be at least 1".into()));
        }
        if !(self.fs > 0.0 && self.duration_s > 0.0) {
            return Err(Error::InvalidInput("fs and duration must be positive".into()));
        }
        if self.window_len() < 2 {
            return Err(Error::InvalidInput("window shorter than two samples".into()));
        }
        if self.noise_sd < 0.0 || self.wander_amplitude < 0.0 || self.wander_freq_hz < 0.0 {
            return Err(Error::InvalidInput("noise and wander must be non-negative".into()));
        }
        Ok(())
    }

    /// Samples per window, `round(duration * fs)`.
    pub fn window_len(&self) -> usize {
        (self.duration_s * self.fs).round() as usize
    }

    /// Sets the subject counts so that `positive_fraction` of `total` subjects
    /// are hypertensive (rounded to the nearest subject, at least one per class).
    pub fn with_subjects(mut self, total: usize, positive_fraction: f64) -> Self {
        let pos = ((total as f64 * positive_fraction).round() as usize).clamp(1, total.saturating_sub(1).max(1));
        self.hypertensive.n_subjects = pos;
        self.normal.n_subjects = total.saturating_sub(pos).max(1);
        self
    }
}

/// Beat shape after per-subject jitter.
#[derive(Debug, Clone, Copy)]
struct BeatShape {
    amplitude: f64,
    sys_width: f64,
    ratio: f64,
    delay: f64,
    dic_width: f64,
}

impl BeatShape {
    /// The systolic centre sits three widths after the beat onset.
    fn systolic_offset(&self) -> f64 {
        3.0 * self.sys_width
    }

    fn value(&self, dt: f64) -> f64 {
        let c_sys = self.systolic_offset();
        let c_dic = c_sys + self.delay;
        let g = |t: f64, c: f64, w: f64| (-(t - c) * (t - c) / (2.0 * w * w)).exp();
        self.amplitude * (g(dt, c_sys, self.sys_width) + self.ratio * g(dt, c_dic, self.dic_width))
    }

    /// Time after onset beyond which the beat is negligible.
    fn support(&self) -> f64 {
        self.systolic_offset() + self.delay + 6.0 * self.dic_width.max(self.sys_width)
    }
}

fn jitter(rng: &mut ChaCha8Rng, value: f64, rel_sd: f64) -> f64 {
    if rel_sd == 0.0 {
        return value;
    }
    let n = Normal::new(1.0, rel_sd).expect("sd checked non-negative");
    value * n.sample(rng).clamp(0.5, 1.5)
}

fn normal_draw(rng: &mut ChaCha8Rng, mean: f64, sd: f64) -> f64 {
    if sd == 0.0 {
        return mean;
    }
    Normal::new(mean, sd).expect("sd checked non-negative").sample(rng)
}

fn render_window(p: &SynthParams, shape: &BeatShape, hr: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let t_len = p.window_len();
    let period = 60.0 / hr;
    let phase = rng.random::<f64>() * period;
    let wander_phase = rng.random::<f64>() * 2.0 * PI;
    let noise = (p.noise_sd > 0.0).then(|| Normal::new(0.0, p.noise_sd).expect("sd >= 0"));

    let mut x = vec![p.dc_level; t_len];
    // onsets before t = 0 contribute their tails
    let first = -((shape.support() / period).ceil() as i64) - 1;
    let mut n = first;
    loop {
        let onset = phase + n as f64 * period;
        if onset > p.duration_s {
            break;
        }
        let lo = ((onset * p.fs).floor().max(0.0)) as usize;
        let hi = (((onset + shape.support()) * p.fs).ceil().max(0.0) as usize).min(t_len);
        for (i, xi) in x.iter_mut().enumerate().take(hi).skip(lo) {
            *xi += shape.value(i as f64 / p.fs - onset);
        }
        n += 1;
    }
    for (i, xi) in x.iter_mut().enumerate() {
        let t = i as f64 / p.fs;
        *xi += p.wander_amplitude * (2.0 * PI * p.wander_freq_hz * t + wander_phase).sin();
        if let Some(noise) = &noise {
            *xi += noise.sample(rng);
        }
    }
    x
}

/// Generates the corpus: all normal subjects first, then hypertensive ones,
/// `windows_per_subject` consecutive records each.
pub fn synth_ppg(p: &SynthParams) -> Result<Dataset> {
    p.validate()?;
    let mut records = Vec::new();
    for (class, profile, prefix) in [(0u8, &p.normal, "N"), (1u8, &p.hypertensive, "H")] {
        for s in 0..profile.n_subjects {
            let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
            rng.set_stream(((class as u64) << 40) | s as u64);
            let pick: f64 = rng.random();
            let (ratio, delay) = match profile.alt_phenotype {
                Some(a) if pick < a.probability => (a.dicrotic_ratio, a.dicrotic_delay),
                _ => (profile.dicrotic_ratio, profile.dicrotic_delay),
            };
            let shape = BeatShape {
                amplitude: jitter(&mut rng, profile.systolic_amplitude, profile.shape_jitter),
                sys_width: jitter(&mut rng, profile.systolic_width, profile.shape_jitter),
                ratio: jitter(&mut rng, ratio, profile.shape_jitter),
                delay: jitter(&mut rng, delay, profile.shape_jitter),
                dic_width: jitter(&mut rng, profile.dicrotic_width, profile.shape_jitter),
            };
            let subject_hr = normal_draw(&mut rng, profile.hr_mean, profile.hr_sd).clamp(35.0, 200.0);
            let id = format!("{prefix}{s:05}");
            for _ in 0..p.windows_per_subject {
                let hr = normal_draw(&mut rng, subject_hr, profile.window_hr_sd).clamp(30.0, 220.0);
                let sbp = rng.random_range(profile.sbp_range.0..=profile.sbp_range.1);
                let dbp = rng.random_range(profile.dbp_range.0..=profile.dbp_range.1);
                let samples = render_window(p, &shape, hr, &mut rng);
                let rec = PpgRecord::new(id.clone(), samples, p.fs, Some(sbp), Some(dbp), Some(class))?;
                records.push(rec);
            }
        }
    }
    Ok(Dataset::new(records, SplitTag::Unsplit))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clean_75() -> SynthParams {
        let mut p = SynthParams { noise_sd: 0.0, wander_amplitude: 0.0, ..Default::default() };
        for c in [&mut p.normal, &mut p.hypertensive] {
            c.n_subjects = 1;
            c.hr_mean = 75.0;
            c.hr_sd = 0.0;
            c.window_hr_sd = 0.0;
            c.shape_jitter = 0.0;
        }
        p
    }

    #[test]
    fn counting() {
        let mut p = SynthParams { windows_per_subject: 3, ..Default::default() };
        p.normal.n_subjects = 2;
        p.hypertensive.n_subjects = 2;
        let d = synth_ppg(&p).unwrap();
        assert_eq!(d.len(), 12);
        assert_eq!(d.labels().iter().filter(|&&l| l == 1).count(), 6);
        assert_eq!(d.subjects().len(), 4);
        for r in d.records() {
            assert_eq!(r.len(), 875);
            assert!(r.samples().iter().all(|v| v.is_finite()));
            assert_eq!(binarize_label(r.sbp().unwrap(), r.dbp().unwrap()).unwrap(), r.label());
        }
    }

    #[test]
    fn deterministic() {
        let mut p = SynthParams::default().with_subjects(6, 0.5);
        p.seed = 11;
        assert_eq!(synth_ppg(&p).unwrap(), synth_ppg(&p).unwrap());
        let mut q = p.clone();
        q.seed = 12;
        assert_ne!(synth_ppg(&p).unwrap(), synth_ppg(&q).unwrap());
    }

    #[test]
    fn subject_streams_independent_of_count() {
        let mut p = SynthParams::default().with_subjects(4, 0.5);
        let small = synth_ppg(&p).unwrap();
        p.normal.n_subjects = 5;
        let big = synth_ppg(&p).unwrap();
        assert_eq!(small.records()[0], big.records()[0]);
    }

    #[test]
    fn length_is_rounded_duration() {
        let mut p = clean_75();
        p.duration_s = 3.3;
        p.fs = 50.0;
        let d = synth_ppg(&p).unwrap();
        assert!(d.records().iter().all(|r| r.len() == 165));
    }

    #[test]
    fn beats_spaced_at_period() {
        // brute force: local maxima above half amplitude on the clean signal
        let d = synth_ppg(&clean_75()).unwrap();
        for r in d.records() {
            let x = r.samples();
            let top = x.iter().cloned().fold(f64::MIN, f64::max);
            let base = x.iter().cloned().fold(f64::MAX, f64::min);
            let thr = base + 0.75 * (top - base);
            let peaks: Vec<usize> = (1..x.len() - 1)
                .filter(|&i| x[i] > thr && x[i] >= x[i - 1] && x[i] > x[i + 1])
                .collect();
            assert!(peaks.len() >= 7);
            for w in peaks.windows(2) {
                let gap = (w[1] - w[0]) as f64;
                assert!((gap - 100.0).abs() <= 1.0, "gap {gap}");
            }
        }
    }

    #[test]
    fn validation() {
        let mut p = SynthParams::default();
        p.normal.hr_mean = 20.0;
        assert!(synth_ppg(&p).is_err());
        let mut p = SynthParams::default();
        p.hypertensive.systolic_width = 0.0;
        assert!(synth_ppg(&p).is_err());
        let mut p = SynthParams::default();
        p.normal.sbp_range = (120.0, 150.0);
        assert!(synth_ppg(&p).is_err());
        let mut p = SynthParams::default();
        p.normal.dicrotic_ratio = -0.1;
        assert!(synth_ppg(&p).is_err());
    }
}
