//! Dataset representation, file formats, subject-level splitting and the
//! synthetic PPG generator.

mod io;
mod record;
mod split;
mod synth;

pub use io::{load_dataset, save_dataset, write_binary, write_csv, DataFormat};
pub use record::{binarize_label, BpThresholds, Dataset, PpgRecord, SplitTag};
pub use split::{split_by_subject, split_quotas, subsample_training};
pub use synth::{synth_ppg, AltPhenotype, ClassProfile, SynthParams};
