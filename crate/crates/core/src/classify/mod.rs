//! Class-balanced classifiers over feature matrices.

mod forest;
mod impute;
mod persist;
mod ridge;

pub use forest::{feature_importance, fit_balanced_forest, fit_balanced_forest_with, predict_forest, ForestConfig, ForestModel};
pub use impute::MedianImputer;
pub use persist::Classifier;
pub use ridge::{balanced_class_weights, fit_ridge, predict_ridge, RidgeModel, DEFAULT_LAMBDA_GRID};

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

pub(crate) fn check_training_set(x: &FeatureMatrix, y: &[u8]) -> Result<[usize; 2]> {
    if x.rows() != y.len() {
        return Err(Error::InvalidInput(format!("{} rows but {} labels", x.rows(), y.len())));
    }
    let mut counts = [0usize; 2];
    for &l in y {
        if l > 1 {
            return Err(Error::InvalidInput(format!("label {l} is not binary")));
        }
        counts[l as usize] += 1;
    }
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::DegenerateLabels(format!(
            "need both classes, got {} negatives and {} positives",
            counts[0], counts[1]
        )));
    }
    x.check_finite()?;
    Ok(counts)
}
