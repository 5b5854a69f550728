use super::convolve::TapBank;
use super::model::TransformModel;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Parallelism};
use crate::matrix::FeatureMatrix;
use crate::signal::Dataset;

/// PPV features of one signal, in (kernel, dilation, bias) order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Proportion of strictly positive entries.
pub fn ppv(v: &[f64]) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::InvalidInput("ppv of an empty sequence".into()));
    }
    Ok(count_above(v, 0.0) as f64 / v.len() as f64)
}

fn count_above(v: &[f64], bias: f64) -> usize {
    v.iter().filter(|&&u| u - bias > 0.0).count()
}

pub fn transform(x: &[f64], m: &TransformModel) -> Result<FeatureVector> {
    let mut out = vec![0.0; m.n_features()];
    transform_into(x, m, &mut out)?;
    Ok(FeatureVector(out))
}

fn transform_into(x: &[f64], m: &TransformModel, out: &mut [f64]) -> Result<()> {
    let schedule = m.schedule();
    schedule.check_signal(x.len())?;
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("sample {i} is not finite")));
    }
    let biases = m.biases();
    let padded = schedule.padded();
    let mut resp = vec![0.0; x.len()];
    for (l, &d) in schedule.dilations().iter().enumerate() {
        let bank = TapBank::new(x, d);
        let inner = bank.unpadded_range();
        let inv_full = 1.0 / x.len() as f64;
        let inv_inner = 1.0 / inner.len() as f64;
        for (k, kernel) in m.kernels().kernels().iter().enumerate() {
            bank.response_into(kernel, &mut resp);
            let offset = schedule.offset(k, l);
            for slot in offset..offset + schedule.quota(k, l) {
                out[slot] = if padded[slot] {
                    count_above(&resp, biases[slot]) as f64 * inv_full
                } else {
                    count_above(&resp[inner.clone()], biases[slot]) as f64 * inv_inner
                };
            }
        }
    }
    Ok(())
}

/// Transforms each signal; row `i` is `transform(signals[i])`.
///
/// Rows are computed independently, so the result is identical for every
/// [`Parallelism`] mode.
pub fn transform_signals(signals: &[&[f64]], m: &TransformModel, mode: Parallelism) -> Result<FeatureMatrix> {
    let d = m.n_features();
    let rows = map_indexed(signals.len(), mode, |i| {
        let mut row = vec![0.0; d];
        transform_into(signals[i], m, &mut row).map(|_| row).map_err(|e| e.at_record(i))
    });
    let mut data = Vec::with_capacity(signals.len() * d);
    for row in rows {
        data.extend(row?);
    }
    FeatureMatrix::from_vec(signals.len(), d, data)
}

pub fn transform_batch(ds: &Dataset, m: &TransformModel, mode: Parallelism) -> Result<FeatureMatrix> {
    transform_signals(&ds.signals(), m, mode)
}
