//! Hand-crafted PPG baselines: AMPD heart rate and pulse morphology.

mod ampd;
mod morph;

pub use ampd::{ampd_peaks, detrend, heart_rate, PeakList};
pub use morph::{
    detect_keypoints, morphological_features, write_feature_csv, MorphFeatures, PulseKeypoints,
    FEATURE_NAMES,
};
