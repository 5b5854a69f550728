use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Blood-pressure cutoffs for the binary hypertension label.
///
/// A window is hypertensive when either pressure reaches its cutoff
/// (inclusive). Defaults are the guideline grade-1 values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpThresholds {
    pub sbp: f64,
    pub dbp: f64,
}

impl Default for BpThresholds {
    fn default() -> Self {
        Self { sbp: 140.0, dbp: 90.0 }
    }
}

impl BpThresholds {
    pub fn classify(&self, sbp: f64, dbp: f64) -> Result<u8> {
        if !sbp.is_finite() || !dbp.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite pressure ({sbp}, {dbp})")));
        }
        if dbp <= 0.0 || sbp <= dbp {
            return Err(Error::InvalidInput(format!(
                "need sbp > dbp > 0, got ({sbp}, {dbp})"
            )));
        }
        Ok(u8::from(sbp >= self.sbp || dbp >= self.dbp))
    }
}

/// Label with the default cutoffs: 1 iff sbp >= 140 or dbp >= 90 mmHg.
pub fn binarize_label(sbp: f64, dbp: f64) -> Result<u8> {
    BpThresholds::default().classify(sbp, dbp)
}

/// One windowed PPG signal.
#[derive(Debug, Clone, PartialEq)]
pub struct PpgRecord {
    subject_id: String,
    samples: Vec<f64>,
    fs: f64,
    sbp: Option<f64>,
    dbp: Option<f64>,
    label: u8,
}

impl PpgRecord {
    /// Builds a record, deriving the label from sbp/dbp when both are given.
    ///
    /// A supplied `label` must agree with the pressures; if either pressure
    /// is missing the label is required.
    pub fn new(
        subject_id: impl Into<String>,
        samples: Vec<f64>,
        fs: f64,
        sbp: Option<f64>,
        dbp: Option<f64>,
        label: Option<u8>,
    ) -> Result<Self> {
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::InvalidInput(format!("sampling rate must be positive, got {fs}")));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("sample {i} is not finite")));
        }
        if let Some(l) = label {
            if l > 1 {
                return Err(Error::InvalidInput(format!("label must be 0 or 1, got {l}")));
            }
        }
        let label = match (sbp, dbp, label) {
            (Some(s), Some(d), stored) => {
                let implied = binarize_label(s, d)?;
                if let Some(stored) = stored {
                    if stored != implied {
                        return Err(Error::LabelConsistency { record: 0, stored, implied });
                    }
                }
                implied
            }
            (_, _, Some(l)) => l,
            _ => {
                return Err(Error::InvalidInput(
                    "label missing and sbp/dbp incomplete".to_string(),
                ))
            }
        };
        Ok(Self { subject_id: subject_id.into(), samples, fs, sbp, dbp, label })
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn sbp(&self) -> Option<f64> {
        self.sbp
    }

    pub fn dbp(&self) -> Option<f64> {
        self.dbp
    }

    pub fn label(&self) -> u8 {
        self.label
    }

    /// Same metadata with the samples replaced.
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        Self::new(self.subject_id.clone(), samples, self.fs, self.sbp, self.dbp, Some(self.label))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitTag {
    Train,
    Val,
    Test,
    Unsplit,
}

/// An ordered collection of records.
///
/// A record's window index is its position among the records of the same
/// subject, so `(subject_id, window)` pairs are unique by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<PpgRecord>,
    split: SplitTag,
}

impl Dataset {
    pub fn new(records: Vec<PpgRecord>, split: SplitTag) -> Self {
        Self { records, split }
    }

    pub fn records(&self) -> &[PpgRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<PpgRecord> {
        self.records
    }

    pub fn split(&self) -> SplitTag {
        self.split
    }

    pub fn with_split(mut self, split: SplitTag) -> Self {
        self.split = split;
        self
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.records.iter().map(PpgRecord::label).collect()
    }

    pub fn signals(&self) -> Vec<&[f64]> {
        self.records.iter().map(PpgRecord::samples).collect()
    }

    /// Distinct subject IDs in sorted order.
    pub fn subjects(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.records.iter().map(PpgRecord::subject_id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// Majority label per subject (ties go to class 1).
    pub fn subject_labels(&self) -> BTreeMap<&str, u8> {
        let mut counts: BTreeMap<&str, [usize; 2]> = BTreeMap::new();
        for r in &self.records {
            counts.entry(r.subject_id()).or_default()[r.label() as usize] += 1;
        }
        counts.into_iter().map(|(id, [n0, n1])| (id, u8::from(n1 >= n0))).collect()
    }

    /// Records at `idx`, in the order given.
    pub fn select(&self, idx: &[usize], split: SplitTag) -> Self {
        Self { records: idx.iter().map(|&i| self.records[i].clone()).collect(), split }
    }

    pub fn positive_fraction(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().filter(|r| r.label() == 1).count() as f64 / self.len() as f64
    }
}
