use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

/// Fills missing values with the training median of each column.
/// A column with no observed value is filled with 0.
#[derive(Debug, Clone, PartialEq)]
pub struct MedianImputer {
    medians: Vec<f64>,
}

impl MedianImputer {
    pub fn fit(rows: &[Vec<Option<f64>>], n_cols: usize) -> Result<Self> {
        let mut medians = Vec::with_capacity(n_cols);
        for j in 0..n_cols {
            let mut col = Vec::with_capacity(rows.len());
            for (i, r) in rows.iter().enumerate() {
                if r.len() != n_cols {
                    return Err(Error::DimensionMismatch { expected: n_cols, got: r.len() }.at_record(i));
                }
                if let Some(v) = r[j].filter(|v| v.is_finite()) {
                    col.push(v);
                }
            }
            col.sort_unstable_by(f64::total_cmp);
            let m = col.len() / 2;
            medians.push(match col.len() {
                0 => 0.0,
                n if n % 2 == 1 => col[m],
                _ => 0.5 * (col[m - 1] + col[m]),
            });
        }
        Ok(Self { medians })
    }

    pub fn from_medians(medians: Vec<f64>) -> Self {
        Self { medians }
    }

    pub fn medians(&self) -> &[f64] {
        &self.medians
    }

    pub fn transform(&self, rows: &[Vec<Option<f64>>]) -> Result<FeatureMatrix> {
        let n = self.medians.len();
        let mut data = Vec::with_capacity(rows.len() * n);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: r.len() }.at_record(i));
            }
            data.extend(r.iter().zip(&self.medians).map(|(v, &m)| v.filter(|v| v.is_finite()).unwrap_or(m)));
        }
        FeatureMatrix::from_vec(rows.len(), n, data)
    }
}
