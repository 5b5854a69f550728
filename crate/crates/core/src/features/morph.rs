//! Per-pulse key points and window-level morphological features.
//!
//! Beats are anchored on AMPD systolic peaks; each onset is the minimum
//! between two consecutive peaks and a pulse runs from one onset to the
//! next (both ends included). Each pulse is baseline-corrected by the line
//! through its end points before amplitudes are measured. Window features
//! are medians over pulses, skipping pulses where a value is undefined.

use std::io::Write;

use super::ampd::{ampd_peaks, heart_rate};
use crate::error::{Error, Result};

/// Sample indices of the key points of one pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PulseKeypoints {
    pub onset: usize,
    pub max_slope: usize,
    pub systolic_peak: usize,
    pub dicrotic_notch: Option<usize>,
    pub diastolic_peak: Option<usize>,
}

/// Window-level features. `None` marks a value no pulse could provide.
#[derive(Debug, Clone, PartialEq)]
pub struct MorphFeatures {
    /// Beats per minute.
    pub heart_rate: Option<f64>,
    /// Seconds at half systolic amplitude.
    pub pulse_width: Option<f64>,
    /// Seconds from onset to systolic peak.
    pub crest_time: Option<f64>,
    /// Diastolic over systolic amplitude.
    pub reflection_index: Option<f64>,
    /// Seconds from systolic to diastolic peak.
    pub lasi: Option<f64>,
    /// Area after the dicrotic notch over area before it.
    pub area_ratio: Option<f64>,
    /// AC / (AC + |DC|) of the raw window.
    pub mnpv: Option<f64>,
    pub notch_present: bool,
    pub n_pulses: usize,
}

pub const FEATURE_NAMES: [&str; 8] = [
    "heart_rate",
    "pulse_width",
    "crest_time",
    "reflection_index",
    "lasi",
    "area_ratio",
    "mnpv",
    "notch_present",
];

impl MorphFeatures {
    /// Values in [`FEATURE_NAMES`] order; the notch flag is 0 or 1.
    pub fn to_array(&self) -> [Option<f64>; 8] {
        [
            self.heart_rate,
            self.pulse_width,
            self.crest_time,
            self.reflection_index,
            self.lasi,
            self.area_ratio,
            self.mnpv,
            Some(if self.notch_present { 1.0 } else { 0.0 }),
        ]
    }
}

/// Key points of one onset-to-onset pulse.
///
/// The notch is the first local minimum after the systolic peak; failing
/// that, the first point where the second difference turns from positive
/// to negative (a shoulder), in which case the diastolic peak falls back to
/// the same point when no later local maximum exists.
pub fn detect_keypoints(pulse: &[f64], fs: f64) -> Result<PulseKeypoints> {
    if !(fs > 0.0) {
        return Err(Error::InvalidInput(format!("sampling rate must be positive, got {fs}")));
    }
    if pulse.len() < 3 {
        return Err(Error::InvalidInput(format!("pulse of {} samples", pulse.len())));
    }
    if let Some(i) = pulse.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("sample {i} is not finite")));
    }
    let n = pulse.len();
    let systolic_peak = argmax(pulse);
    if systolic_peak == 0 {
        return Err(Error::InvalidInput("pulse has no upstroke".into()));
    }
    // forward difference x[i+1] - x[i] is credited to sample i+1
    let max_slope = (0..systolic_peak)
        .max_by(|&a, &b| {
            (pulse[a + 1] - pulse[a])
                .total_cmp(&(pulse[b + 1] - pulse[b]))
                .then(b.cmp(&a))
        })
        .map(|i| i + 1)
        .expect("systolic peak > 0");

    let local_min = (systolic_peak + 1..n - 1).find(|&i| pulse[i] < pulse[i - 1] && pulse[i] <= pulse[i + 1]);
    let (dicrotic_notch, diastolic_peak) = match local_min {
        Some(notch) => {
            let dia = (notch + 1..n - 1).find(|&i| pulse[i] > pulse[i - 1] && pulse[i] >= pulse[i + 1]);
            (Some(notch), dia)
        }
        None => match shoulder(pulse, systolic_peak) {
            Some(s) => (Some(s), Some(s)),
            None => (None, None),
        },
    };
    Ok(PulseKeypoints { onset: 0, max_slope, systolic_peak, dicrotic_notch, diastolic_peak })
}

fn argmax(x: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in x.iter().enumerate() {
        if v > x[best] {
            best = i;
        }
    }
    best
}

/// First index after `from` where the second difference changes from
/// positive to non-positive, ignoring magnitudes at rounding level.
fn shoulder(x: &[f64], from: usize) -> Option<usize> {
    let range = x.iter().cloned().fold(f64::MIN, f64::max) - x.iter().cloned().fold(f64::MAX, f64::min);
    let eps = 1e-9 * range.max(f64::MIN_POSITIVE);
    let d2 = |i: usize| x[i + 1] - 2.0 * x[i] + x[i - 1];
    let mut prev_positive = false;
    for i in from + 1..x.len() - 1 {
        let v = d2(i);
        if v > eps {
            prev_positive = true;
        } else if v < -eps
            && prev_positive {
                return Some(i);
            }
    }
    None
}

struct PulseValues {
    pulse_width: Option<f64>,
    crest_time: f64,
    reflection_index: Option<f64>,
    lasi: Option<f64>,
    area_ratio: Option<f64>,
    notch: bool,
}

fn baseline_corrected(seg: &[f64]) -> Vec<f64> {
    let n = seg.len();
    let (a, b) = (seg[0], seg[n - 1]);
    seg.iter()
        .enumerate()
        .map(|(i, &v)| v - (a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

fn half_width(p: &[f64], peak: usize) -> Option<f64> {
    let half = p[peak] / 2.0;
    let left_i = (0..peak).rev().find(|&i| p[i] <= half)?;
    let left = left_i as f64 + (half - p[left_i]) / (p[left_i + 1] - p[left_i]);
    let right_i = (peak + 1..p.len()).find(|&i| p[i] <= half)?;
    let right = (right_i - 1) as f64 + (p[right_i - 1] - half) / (p[right_i - 1] - p[right_i]);
    Some(right - left)
}

fn trapezoid(p: &[f64]) -> f64 {
    p.windows(2).map(|w| 0.5 * (w[0].max(0.0) + w[1].max(0.0))).sum()
}

fn pulse_values(seg: &[f64], fs: f64) -> Option<PulseValues> {
    let p = baseline_corrected(seg);
    let kp = detect_keypoints(&p, fs).ok()?;
    let sys = kp.systolic_peak;
    let amp = p[sys];
    if !(amp > 0.0) {
        return None;
    }
    let reflection_index = kp.diastolic_peak.map(|d| (p[d] / amp).max(0.0));
    let lasi = kp.diastolic_peak.map(|d| (d - sys) as f64 / fs);
    let area_ratio = kp.dicrotic_notch.and_then(|notch| {
        let before = trapezoid(&p[..=notch]);
        let after = trapezoid(&p[notch..]);
        (before > 0.0).then(|| after / before)
    });
    Some(PulseValues {
        pulse_width: half_width(&p, sys).map(|w| w / fs),
        crest_time: (sys - kp.onset) as f64 / fs,
        reflection_index,
        lasi,
        area_ratio,
        notch: kp.dicrotic_notch.is_some(),
    })
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_unstable_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

pub fn morphological_features(x: &[f64], fs: f64) -> Result<MorphFeatures> {
    if !(fs > 0.0) {
        return Err(Error::InvalidInput(format!("sampling rate must be positive, got {fs}")));
    }
    let peaks = ampd_peaks(x)?;
    let hr = heart_rate(&peaks, fs)?;
    let p = peaks.indices();
    let onsets: Vec<usize> = p
        .windows(2)
        .map(|w| {
            let seg = &x[w[0]..=w[1]];
            let mut best = 0;
            for (i, &v) in seg.iter().enumerate() {
                if v < seg[best] {
                    best = i;
                }
            }
            w[0] + best
        })
        .collect();
    let pulses: Vec<PulseValues> = onsets
        .windows(2)
        .filter_map(|w| pulse_values(&x[w[0]..=w[1]], fs))
        .collect();

    let collect = |f: &dyn Fn(&PulseValues) -> Option<f64>| median(pulses.iter().filter_map(f).collect());
    let lo = x.iter().cloned().fold(f64::MAX, f64::min);
    let hi = x.iter().cloned().fold(f64::MIN, f64::max);
    let ac = hi - lo;
    let mnpv = (ac + lo.abs() > 0.0).then(|| ac / (ac + lo.abs()));

    Ok(MorphFeatures {
        heart_rate: (hr > 20.0 && hr < 250.0).then_some(hr),
        pulse_width: collect(&|v| v.pulse_width),
        crest_time: collect(&|v| Some(v.crest_time)),
        reflection_index: collect(&|v| v.reflection_index),
        lasi: collect(&|v| v.lasi),
        area_ratio: collect(&|v| v.area_ratio),
        mnpv,
        notch_present: pulses.iter().any(|v| v.notch),
        n_pulses: pulses.len(),
    })
}

/// Writes `label,heart_rate,...,notch_present`; missing values are empty.
/// Rows whose extraction failed are written with every feature empty and
/// the notch flag 0.
pub fn write_feature_csv<W: Write>(rows: &[(u8, Option<MorphFeatures>)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let fmt_err = |e: csv::Error| Error::Format(e.to_string());
    let mut header = vec!["label"];
    header.extend(FEATURE_NAMES);
    w.write_record(&header).map_err(fmt_err)?;
    for (label, feats) in rows {
        let mut rec = vec![label.to_string()];
        match feats {
            Some(f) => {
                let vals = f.to_array();
                rec.extend(vals[..7].iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
                rec.push(u8::from(f.notch_present).to_string());
            }
            None => {
                rec.extend(std::iter::repeat_n(String::new(), 7));
                rec.push("0".into());
            }
        }
        w.write_record(&rec).map_err(fmt_err)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(t: f64, c: f64, w: f64) -> f64 {
        (-(t - c) * (t - c) / (2.0 * w * w)).exp()
    }

    /// One beat sampled at `fs` over `period` seconds.
    fn template(fs: f64, ratio: f64) -> Vec<f64> {
        let n = (0.8 * fs) as usize;
        (0..=n)
            .map(|i| {
                let t = i as f64 / fs;
                gauss(t, 0.255, 0.085) + ratio * gauss(t, 0.555, 0.11)
            })
            .collect()
    }

    #[test]
    fn notch_between_bumps() {
        let fs = 125.0;
        let p = template(fs, 0.45);
        let kp = detect_keypoints(&p, fs).unwrap();
        // oracle: densely sampled analytic minimum between the bump centres
        let mut best = (0.0, f64::MAX);
        let mut t = 0.255;
        while t < 0.555 {
            let v = gauss(t, 0.255, 0.085) + 0.45 * gauss(t, 0.555, 0.11);
            if v < best.1 {
                best = (t, v);
            }
            t += 1e-5;
        }
        let want = best.0 * fs;
        let notch = kp.dicrotic_notch.unwrap() as f64;
        assert!((notch - want).abs() <= 2.0, "{notch} vs {want}");
        assert!(kp.onset < kp.max_slope && kp.max_slope <= kp.systolic_peak);
        assert!(kp.systolic_peak < kp.dicrotic_notch.unwrap());
        assert!(kp.dicrotic_notch.unwrap() <= kp.diastolic_peak.unwrap());
    }

    #[test]
    fn monotone_decay_has_no_notch() {
        let fs = 125.0;
        let p = template(fs, 0.0);
        let kp = detect_keypoints(&p, fs).unwrap();
        assert_eq!(kp.dicrotic_notch, None);
        assert_eq!(kp.diastolic_peak, None);
        assert!(kp.systolic_peak >= kp.max_slope);
    }

    #[test]
    fn merged_bump_gives_shoulder() {
        let fs = 500.0;
        let n = 400;
        let p: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / fs;
                gauss(t, 0.2, 0.05) + 0.5 * gauss(t, 0.3, 0.06)
            })
            .collect();
        let kp = detect_keypoints(&p, fs).unwrap();
        let notch = kp.dicrotic_notch.expect("shoulder found");
        assert!(notch > kp.systolic_peak);
        assert_eq!(kp.diastolic_peak, Some(notch));
    }

    #[test]
    fn keypoint_errors() {
        assert!(detect_keypoints(&[1.0, f64::NAN, 0.0], 125.0).is_err());
        assert!(detect_keypoints(&[1.0, 0.5], 125.0).is_err());
        assert!(detect_keypoints(&[1.0, 0.5, 0.2], 125.0).is_err());
        assert!(detect_keypoints(&[0.0, 1.0, 0.2], 0.0).is_err());
    }

    #[test]
    fn median_handles_even_and_empty() {
        assert_eq!(median(vec![]), None);
        assert_eq!(median(vec![3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), Some(2.5));
    }

    #[test]
    fn flat_window_has_insufficient_peaks() {
        assert!(matches!(
            morphological_features(&[1.0; 200], 125.0),
            Err(Error::InsufficientPeaks { found: 0 })
        ));
    }

    #[test]
    fn csv_marks_missing_values() {
        let f = MorphFeatures {
            heart_rate: Some(75.0),
            pulse_width: Some(0.2),
            crest_time: Some(0.25),
            reflection_index: None,
            lasi: None,
            area_ratio: None,
            mnpv: Some(0.4),
            notch_present: false,
            n_pulses: 3,
        };
        let mut out = Vec::new();
        write_feature_csv(&[(1, Some(f)), (0, None)], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "label,heart_rate,pulse_width,crest_time,reflection_index,lasi,area_ratio,mnpv,notch_present"
        );
        assert_eq!(lines[1], "1,75,0.2,0.25,,,,0.4,0");
        assert_eq!(lines[2], "0,,,,,,,,0");
    }
}
