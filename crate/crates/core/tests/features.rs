use std::f64::consts::PI;

use ppg_rocket::features::{ampd_peaks, detect_keypoints, heart_rate, morphological_features, PeakList};
use ppg_rocket::signal::{synth_ppg, SynthParams};
use ppg_rocket::Error;
use proptest::prelude::*;

fn gauss(t: f64, c: f64, w: f64) -> f64 {
    (-(t - c) * (t - c) / (2.0 * w * w)).exp()
}

/// Periodic two-Gaussian waveform, sampled at `fs`.
fn beats(fs: f64, seconds: f64, period: f64, ratio: f64) -> Vec<f64> {
    let n = (seconds * fs) as usize;
    (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            let ph = t.rem_euclid(period);
            // include the neighbouring beats' tails
            [-period, 0.0, period]
                .iter()
                .map(|o| gauss(ph - o, 0.255, 0.085) + ratio * gauss(ph - o, 0.555, 0.11))
                .sum::<f64>()
        })
        .collect()
}

/// Index of the maximum inside each full period.
fn per_period_argmax(x: &[f64], period: usize) -> Vec<usize> {
    x.chunks_exact(period)
        .enumerate()
        .map(|(c, chunk)| {
            let mut best = 0;
            for (i, &v) in chunk.iter().enumerate() {
                if v > chunk[best] {
                    best = i;
                }
            }
            c * period + best
        })
        .collect()
}

#[test]
fn sinusoid_peaks_match_brute_force() {
    for fs in [50.0, 125.0, 500.0] {
        for cycles in 2..=10 {
            let period = (fs * 0.8) as usize;
            let x: Vec<f64> = (0..cycles * period).map(|i| -(2.0 * PI * i as f64 / period as f64).cos()).collect();
            let want = per_period_argmax(&x, period);
            let got = ampd_peaks(&x).unwrap();
            assert_eq!(got.len(), want.len(), "fs {fs} cycles {cycles}");
            for (g, w) in got.indices().iter().zip(&want) {
                assert!(g.abs_diff(*w) <= 1, "fs {fs} cycles {cycles}: {g} vs {w}");
            }
        }
    }
}

#[test]
fn constant_signal_has_no_peaks() {
    assert!(ampd_peaks(&[2.5; 100]).unwrap().is_empty());
    assert!(ampd_peaks(&[1.0; 7]).is_err());
}

#[test]
fn heart_rate_examples() {
    let every_100 = PeakList((0..6).map(|i| 10 + 100 * i).collect());
    assert!((heart_rate(&every_100, 125.0).unwrap() - 75.0).abs() < 1e-12);
    assert_eq!(heart_rate(&PeakList(vec![0, 125, 250]), 125.0).unwrap(), 60.0);
    assert!(matches!(heart_rate(&PeakList(vec![4]), 125.0), Err(Error::InsufficientPeaks { found: 1 })));
}

fn clean_synth_75() -> SynthParams {
    let mut p = SynthParams { noise_sd: 0.0, wander_amplitude: 0.0, ..Default::default() };
    for c in [&mut p.normal, &mut p.hypertensive] {
        c.n_subjects = 2;
        c.hr_mean = 75.0;
        c.hr_sd = 0.0;
        c.window_hr_sd = 0.0;
        c.shape_jitter = 0.0;
    }
    p
}

#[test]
fn synthetic_75_bpm_windows() {
    let ds = synth_ppg(&clean_synth_75()).unwrap();
    for r in ds.records() {
        let peaks = ampd_peaks(r.samples()).unwrap();
        assert!(peaks.len() >= 7);
        for w in peaks.indices().windows(2) {
            assert!((w[1] - w[0]).abs_diff(100) <= 1, "gap {}", w[1] - w[0]);
        }
        let f = morphological_features(r.samples(), r.fs()).unwrap();
        assert!((f.heart_rate.unwrap() - 75.0).abs() <= 1.0);
    }
}

#[test]
fn two_gaussian_notch_lies_between_bumps() {
    let fs = 125.0;
    let pulse: Vec<f64> = (0..100)
        .map(|i| {
            let t = i as f64 / fs;
            gauss(t, 0.255, 0.085) + 0.4 * gauss(t, 0.555, 0.11)
        })
        .collect();
    // analytic minimum between the centres on a fine grid
    let fine = (0..=30_000)
        .map(|i| 0.255 + 0.3 * i as f64 / 30_000.0)
        .min_by(|a, b| {
            let f = |t: f64| gauss(t, 0.255, 0.085) + 0.4 * gauss(t, 0.555, 0.11);
            f(*a).total_cmp(&f(*b))
        })
        .unwrap();
    let kp = detect_keypoints(&pulse, fs).unwrap();
    let notch = kp.dicrotic_notch.unwrap();
    assert!((notch as f64 - fine * fs).abs() <= 2.0, "{notch} vs {}", fine * fs);
    assert!(notch > (0.255 * fs) as usize && notch < (0.555 * fs) as usize);
    assert!(kp.onset < kp.max_slope && kp.max_slope <= kp.systolic_peak);
    assert!(kp.systolic_peak < notch && notch <= kp.diastolic_peak.unwrap());
}

#[test]
fn monotone_decay_has_no_notch() {
    let fs = 125.0;
    let pulse: Vec<f64> = (0..100).map(|i| gauss(i as f64 / fs, 0.255, 0.085)).collect();
    let kp = detect_keypoints(&pulse, fs).unwrap();
    assert_eq!(kp.dicrotic_notch, None);
    assert_eq!(kp.diastolic_peak, None);
    assert!(detect_keypoints(&[0.0, f64::NAN, 1.0, 0.0], fs).is_err());
}

#[test]
fn template_crest_time_and_reflection_index() {
    let fs = 125.0;
    let x = beats(fs, 7.0, 0.8, 0.4);
    let f = morphological_features(&x, fs).unwrap();
    // brute force: onset = minimum between consecutive per-period maxima
    let peaks = per_period_argmax(&x, 100);
    let mut crest = Vec::new();
    for w in peaks.windows(2) {
        let onset = (w[0]..=w[1]).min_by(|&a, &b| x[a].total_cmp(&x[b])).unwrap();
        crest.push((w[1] - onset) as f64 / fs);
    }
    let want = crest[crest.len() / 2];
    assert!((f.crest_time.unwrap() - want).abs() <= 2.0 / fs);
    assert!((f.reflection_index.unwrap() - 0.4).abs() <= 0.05, "{:?}", f.reflection_index);
    assert!(f.notch_present);
}

#[test]
fn time_features_scale_with_sampling_rate() {
    let a = morphological_features(&beats(125.0, 7.0, 0.8, 0.4), 125.0).unwrap();
    let b = morphological_features(&beats(250.0, 7.0, 0.8, 0.4), 250.0).unwrap();
    let tol = 1.5 / 125.0;
    for (x, y) in [(a.crest_time, b.crest_time), (a.pulse_width, b.pulse_width), (a.lasi, b.lasi)] {
        assert!((x.unwrap() - y.unwrap()).abs() <= tol, "{x:?} vs {y:?}");
    }
    assert!((a.heart_rate.unwrap() - b.heart_rate.unwrap()).abs() < 0.5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ampd_invariant_to_shift_and_positive_scale(
        x in prop::collection::vec(-3.0f64..3.0, 8..300),
        c in prop::sample::select(vec![-10.0, 0.5, 1e3]),
        alpha in prop::sample::select(vec![0.01, 3.0, 100.0]),
    ) {
        let base = ampd_peaks(&x).unwrap();
        let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
        let scaled: Vec<f64> = x.iter().map(|v| v * alpha).collect();
        prop_assert_eq!(&ampd_peaks(&shifted).unwrap(), &base);
        prop_assert_eq!(&ampd_peaks(&scaled).unwrap(), &base);
        prop_assert!(base.indices().windows(2).all(|w| w[0] < w[1]));
        prop_assert!(base.indices().iter().all(|&i| i < x.len()));
    }

    #[test]
    fn heart_rate_depends_only_on_indices(gaps in prop::collection::vec(1usize..200, 1..20), fs in 10.0f64..1000.0) {
        let mut idx = vec![0usize];
        for g in gaps {
            idx.push(idx.last().unwrap() + g);
        }
        let span = (idx[idx.len() - 1] - idx[0]) as f64;
        let hr = heart_rate(&PeakList(idx.clone()), fs).unwrap();
        prop_assert!((hr - 60.0 * fs * (idx.len() - 1) as f64 / span).abs() <= 1e-9 * hr);
    }
}
