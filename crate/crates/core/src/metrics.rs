//! Binary confusion counts and support-weighted classification metrics.
//!
//! Class 1 is the positive (hypertensive) class. Any ratio with a zero
//! denominator is reported as 0 and flagged in [`MetricReport::warnings`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        Self { tp, fp, tn, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total()).0
    }

    /// The same predictions with class labels exchanged.
    pub fn swapped(&self) -> Self {
        Self { tp: self.tn, fp: self.fn_, tn: self.tp, fn_: self.fp }
    }
}

pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix> {
    if y_true.is_empty() {
        return Err(Error::InvalidInput("no predictions to score".into()));
    }
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch { expected: y_true.len(), got: y_pred.len() });
    }
    let mut cm = ConfusionMatrix::default();
    for (i, (&t, &p)) in y_true.iter().zip(y_pred).enumerate() {
        match (t, p) {
            (1, 1) => cm.tp += 1,
            (0, 1) => cm.fp += 1,
            (0, 0) => cm.tn += 1,
            (1, 0) => cm.fn_ += 1,
            _ => {
                return Err(Error::InvalidInput(format!(
                    "non-binary label at index {i}: true={t}, predicted={p}"
                )))
            }
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub sensitivity: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub sensitivity_normal: f64,
    pub sensitivity_hypertension: f64,
    pub weighted_precision: f64,
    pub weighted_sensitivity: f64,
    pub weighted_f1: f64,
    pub normal: ClassMetrics,
    pub hypertension: ClassMetrics,
    pub counts: ConfusionMatrix,
    /// Names of quantities that hit a 0/0 and were set to 0.
    pub warnings: Vec<String>,
}

pub const CSV_HEADER: &str =
    "sensitivity_normal,sensitivity_hypertension,weighted_precision,weighted_sensitivity,weighted_f1,tp,fp,tn,fn";

impl MetricReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// One CSV row matching [`CSV_HEADER`].
    pub fn csv_row(&self) -> String {
        let c = &self.counts;
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.sensitivity_normal,
            self.sensitivity_hypertension,
            self.weighted_precision,
            self.weighted_sensitivity,
            self.weighted_f1,
            c.tp,
            c.fp,
            c.tn,
            c.fn_
        )
    }
}

fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

fn class_metrics(tp: u64, fp: u64, fn_: u64, name: &str, warnings: &mut Vec<String>) -> ClassMetrics {
    let (precision, w) = ratio(tp, tp + fp);
    if w {
        warnings.push(format!("precision_{name}"));
    }
    let (sensitivity, w) = ratio(tp, tp + fn_);
    if w {
        warnings.push(format!("sensitivity_{name}"));
    }
    let f1 = if precision + sensitivity == 0.0 {
        warnings.push(format!("f1_{name}"));
        0.0
    } else {
        2.0 * precision * sensitivity / (precision + sensitivity)
    };
    ClassMetrics { precision, sensitivity, f1, support: tp + fn_ }
}

pub fn report(cm: &ConfusionMatrix) -> Result<MetricReport> {
    let n = cm.total();
    if n == 0 {
        return Err(Error::InvalidInput("empty confusion matrix".into()));
    }
    let mut warnings = Vec::new();
    let normal = class_metrics(cm.tn, cm.fn_, cm.fp, "normal", &mut warnings);
    let hypertension = class_metrics(cm.tp, cm.fp, cm.fn_, "hypertension", &mut warnings);
    let wn = normal.support as f64 / n as f64;
    let wh = hypertension.support as f64 / n as f64;
    let weighted = |a: f64, b: f64| wn * a + wh * b;
    Ok(MetricReport {
        sensitivity_normal: normal.sensitivity,
        sensitivity_hypertension: hypertension.sensitivity,
        weighted_precision: weighted(normal.precision, hypertension.precision),
        weighted_sensitivity: weighted(normal.sensitivity, hypertension.sensitivity),
        weighted_f1: weighted(normal.f1, hypertension.f1),
        normal,
        hypertension,
        counts: *cm,
        warnings,
    })
}

/// `confusion` followed by `report`.
pub fn evaluate(y_true: &[u8], y_pred: &[u8]) -> Result<MetricReport> {
    report(&confusion(y_true, y_pred)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn confusion_counts() {
        let cm = confusion(&[1, 0, 1], &[1, 0, 1]).unwrap();
        assert_eq!(cm, ConfusionMatrix::new(2, 0, 1, 0));
        let cm = confusion(&[0, 0, 1], &[1, 1, 1]).unwrap();
        assert_eq!((cm.tp, cm.fp), (1, 2));
        assert!(confusion(&[], &[]).is_err());
        assert!(confusion(&[0, 1], &[0]).is_err());
        assert!(confusion(&[0, 2], &[0, 1]).is_err());
    }

    #[test]
    fn perfect_is_all_ones() {
        let r = evaluate(&[0, 1, 1, 0], &[0, 1, 1, 0]).unwrap();
        for v in [r.sensitivity_normal, r.sensitivity_hypertension, r.weighted_precision, r.weighted_sensitivity, r.weighted_f1] {
            assert_eq!(v, 1.0);
        }
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn fixture() {
        let r = report(&ConfusionMatrix::new(60, 40, 160, 40)).unwrap();
        assert_abs_diff_eq!(r.sensitivity_hypertension, 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(r.sensitivity_normal, 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(r.hypertension.f1, 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(r.normal.f1, 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(r.weighted_sensitivity, 11.0 / 15.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.weighted_f1, 11.0 / 15.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.weighted_precision, 11.0 / 15.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_division_is_flagged() {
        let r = evaluate(&[0, 0, 0], &[0, 0, 0]).unwrap();
        assert_eq!(r.hypertension.precision, 0.0);
        assert!(r.warnings.contains(&"precision_hypertension".to_string()));
        assert_eq!(r.sensitivity_normal, 1.0);
        assert_eq!(r.weighted_f1, 1.0);
    }

    #[test]
    fn serialises() {
        let r = report(&ConfusionMatrix::new(1, 2, 3, 4)).unwrap();
        let back: MetricReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(r.to_json().contains("\"fn\": 4"));
        assert_eq!(r.csv_row().split(',').count(), CSV_HEADER.split(',').count());
    }
}
