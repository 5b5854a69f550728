use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Dense row-major feature matrix, one row per record.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(cols: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, got: r.len() }.at_record(i));
            }
            data.extend_from_slice(r);
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "{} values do not fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn iter_rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Rows picked by index, in the order given.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self { rows: idx.len(), cols: self.cols, data }
    }

    /// Columns picked by index, in the order given.
    pub fn select_cols(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.rows);
        for r in self.iter_rows() {
            data.extend(idx.iter().map(|&j| r[j]));
        }
        Self { rows: self.rows, cols: idx.len(), data }
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        if let Some(pos) = self.data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite feature at row {}, column {}",
                pos / self.cols.max(1),
                pos % self.cols.max(1)
            )));
        }
        Ok(())
    }

    /// Writes `label,f0,...,f{D-1}` with one row per record.
    pub fn write_csv<W: Write>(&self, labels: &[u8], out: W) -> Result<()> {
        if labels.len() != self.rows {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} rows",
                labels.len(),
                self.rows
            )));
        }
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["label".to_string()];
        header.extend((0..self.cols).map(|j| format!("f{j}")));
        w.write_record(&header).map_err(csv_err)?;
        for (r, &y) in self.iter_rows().zip(labels) {
            let mut rec = Vec::with_capacity(self.cols + 1);
            rec.push(y.to_string());
            rec.extend(r.iter().map(|v| v.to_string()));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, labels: &[u8], path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(labels, std::io::BufWriter::new(f))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}
