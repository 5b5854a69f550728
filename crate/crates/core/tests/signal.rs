use ppg_rocket::signal::{
    binarize_label, load_dataset, save_dataset, split_by_subject, subsample_training, synth_ppg, DataFormat, Dataset,
    PpgRecord, SplitTag, SynthParams,
};
use proptest::prelude::*;

fn record_strategy() -> impl Strategy<Value = PpgRecord> {
    (
        "[A-Za-z0-9_]{1,8}",
        prop::collection::vec(-1e3f64..1e3, 1..40),
        1.0f64..1000.0,
        prop::option::of((141.0f64..200.0, 40.0f64..80.0)),
        0u8..2,
    )
        .prop_map(|(id, samples, fs, bp, label)| match bp {
            Some((s, d)) => PpgRecord::new(id, samples, fs, Some(s), Some(d), None).unwrap(),
            None => PpgRecord::new(id, samples, fs, None, None, Some(label)).unwrap(),
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn csv_round_trip_is_exact(recs in prop::collection::vec(record_strategy(), 1..6)) {
        let n = recs[0].len();
        let recs: Vec<PpgRecord> = recs
            .iter()
            .enumerate()
            .map(|(i, r)| r.with_samples((0..n).map(|k| (i * 31 + k) as f64 / 7.0 - 3.3).collect()).unwrap())
            .collect();
        let d = Dataset::new(recs, SplitTag::Unsplit);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        save_dataset(&d, &path, DataFormat::Csv).unwrap();
        let back = load_dataset(&path, DataFormat::Csv).unwrap();
        prop_assert_eq!(back.records(), d.records());
    }

    #[test]
    fn binarize_is_monotone(s in 60.0f64..220.0, d in 30.0f64..59.0, ds in 0.0f64..40.0, dd in 0.0f64..40.0) {
        prop_assume!(s + ds > d + dd);
        let base = binarize_label(s, d).unwrap();
        let raised = binarize_label(s + ds, d + dd).unwrap();
        prop_assert!(raised >= base);
    }
}

#[test]
fn binarize_thresholds() {
    assert_eq!(binarize_label(139.9, 89.9).unwrap(), 0);
    assert_eq!(binarize_label(140.0, 70.0).unwrap(), 1);
    assert_eq!(binarize_label(120.0, 90.0).unwrap(), 1);
    assert!(binarize_label(80.0, 90.0).is_err());
    assert!(binarize_label(f64::NAN, 80.0).is_err());
}

#[test]
fn synthetic_split_is_subject_disjoint_and_stratified() {
    let ds = synth_ppg(&SynthParams::default().with_subjects(200, 0.2)).unwrap();
    assert_eq!(ds.subjects().len(), 200);
    let (tr, va, te) = split_by_subject(&ds, [0.7, 0.15, 0.15], 3).unwrap();
    assert_eq!(tr.len() + va.len() + te.len(), ds.len());
    for (a, b) in [(&tr, &va), (&tr, &te), (&va, &te)] {
        let sa = a.subjects();
        assert!(b.subjects().iter().all(|s| !sa.contains(s)));
    }
    for part in [&tr, &va, &te] {
        assert!((part.positive_fraction() - 0.2).abs() <= 0.05, "{}", part.positive_fraction());
    }
    let sub = subsample_training(&tr, 0.0625, 1).unwrap();
    assert_eq!(sub.len(), (tr.len() as f64 * 0.0625).ceil() as usize);
}

#[test]
fn binary_file_round_trip_narrows_samples() {
    let ds = synth_ppg(&SynthParams::default().with_subjects(4, 0.5)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.bin");
    save_dataset(&ds, &path, DataFormat::Binary).unwrap();
    let back = load_dataset(&path, DataFormat::Binary).unwrap();
    assert_eq!(back.len(), ds.len());
    for (a, b) in back.records().iter().zip(ds.records()) {
        assert_eq!(a.subject_id(), b.subject_id());
        assert_eq!(a.label(), b.label());
        for (x, y) in a.samples().iter().zip(b.samples()) {
            assert_eq!(*x, *y as f32 as f64);
        }
    }
}
