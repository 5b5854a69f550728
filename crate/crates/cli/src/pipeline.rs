//! Feature extraction plus classifier, fitted on a training split only.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ppg_rocket::classify::{fit_balanced_forest_with, fit_ridge, Classifier, ForestConfig, MedianImputer};
use ppg_rocket::features::{ampd_peaks, heart_rate, morphological_features, FEATURE_NAMES};
use ppg_rocket::rocket::{enumerate_kernels, fit_biases_with, transform_batch, DilationSchedule, TransformModel};
use ppg_rocket::signal::Dataset;
use ppg_rocket::{Error, FeatureMatrix, Parallelism, Result};
use serde_json::json;

use crate::error::{CliError, CliResult, Context};

pub const TRANSFORM_FILE: &str = "transform.rktm";
pub const CLASSIFIER_FILE: &str = "classifier.bin";
pub const PIPELINE_FILE: &str = "pipeline.json";
pub const RIDGE_TEXT_FILE: &str = "ridge.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    RocketRidge,
    RocketForest,
    HrRidge,
    MorphRidge,
    MorphForest,
}

impl Method {
    pub const ALL: [Method; 5] =
        [Method::RocketRidge, Method::RocketForest, Method::HrRidge, Method::MorphRidge, Method::MorphForest];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::RocketRidge => "rocket+ridge",
            Method::RocketForest => "rocket+forest",
            Method::HrRidge => "hr+ridge",
            Method::MorphRidge => "morph+ridge",
            Method::MorphForest => "morph+forest",
        }
    }

    fn uses_forest(self) -> bool {
        matches!(self, Method::RocketForest | Method::MorphForest)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| CliError::config(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub target_features: usize,
    pub max_dilations: usize,
    pub lambda_grid: Vec<f64>,
    pub forest: ForestConfig,
    pub parallelism: Parallelism,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Extractor {
    Rocket(TransformModel),
    HeartRate(MedianImputer),
    Morph(MedianImputer),
}

fn hr_rows(ds: &Dataset) -> Vec<Vec<Option<f64>>> {
    ds.records()
        .iter()
        .map(|r| {
            let hr = ampd_peaks(r.samples()).and_then(|p| heart_rate(&p, r.fs())).ok();
            vec![hr.filter(|h| h.is_finite())]
        })
        .collect()
}

fn morph_rows(ds: &Dataset) -> Vec<Vec<Option<f64>>> {
    ds.records()
        .iter()
        .map(|r| match morphological_features(r.samples(), r.fs()) {
            Ok(f) => f.to_array().to_vec(),
            Err(_) => vec![None; FEATURE_NAMES.len()],
        })
        .collect()
}

impl Extractor {
    pub fn features(&self, ds: &Dataset, mode: Parallelism) -> Result<FeatureMatrix> {
        match self {
            Extractor::Rocket(m) => transform_batch(ds, m, mode),
            Extractor::HeartRate(imp) => imp.transform(&hr_rows(ds)),
            Extractor::Morph(imp) => imp.transform(&morph_rows(ds)),
        }
    }
}

/// Anything that labels every record of a dataset.
pub trait Predictor {
    fn predict(&self, ds: &Dataset) -> Result<Vec<u8>>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    pub method: Method,
    pub extractor: Extractor,
    pub classifier: Classifier,
    pub parallelism: Parallelism,
}

impl Predictor for Pipeline {
    fn predict(&self, ds: &Dataset) -> Result<Vec<u8>> {
        let x = self.extractor.features(ds, self.parallelism)?;
        self.classifier.predict(&x)
    }
}

/// Fits every stage on `train` alone.
pub fn fit_pipeline(method: Method, train: &Dataset, opts: &FitOptions, seed: u64) -> Result<Pipeline> {
    if train.is_empty() {
        return Err(Error::InvalidInput("empty training set".into()));
    }
    let mode = opts.parallelism;
    let (extractor, x) = match method {
        Method::RocketRidge | Method::RocketForest => {
            let kernels = enumerate_kernels();
            let t = train.records()[0].len();
            let schedule = DilationSchedule::build(t, opts.target_features, kernels.len(), opts.max_dilations)?;
            let model = fit_biases_with(&train.signals(), &kernels, &schedule, seed, mode)?;
            let x = transform_batch(train, &model, mode)?;
            (Extractor::Rocket(model), x)
        }
        Method::HrRidge => {
            let rows = hr_rows(train);
            let imp = MedianImputer::fit(&rows, 1)?;
            let x = imp.transform(&rows)?;
            (Extractor::HeartRate(imp), x)
        }
        Method::MorphRidge | Method::MorphForest => {
            let rows = morph_rows(train);
            let imp = MedianImputer::fit(&rows, FEATURE_NAMES.len())?;
            let x = imp.transform(&rows)?;
            (Extractor::Morph(imp), x)
        }
    };
    let y = train.labels();
    let classifier = if method.uses_forest() {
        Classifier::Forest(fit_balanced_forest_with(&x, &y, &opts.forest, seed, mode)?)
    } else {
        Classifier::Ridge(fit_ridge(&x, &y, &opts.lambda_grid)?)
    };
    Ok(Pipeline { method, extractor, classifier, parallelism: mode })
}

impl Pipeline {
    /// Writes `pipeline.json`, `classifier.bin`, and for rocket methods
    /// `transform.rktm`; ridge models also get a text export.
    pub fn save(&self, dir: &Path) -> CliResult<()> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::model(format!("cannot create {}: {e}", dir.display())))?;
        let (kind, medians) = match &self.extractor {
            Extractor::Rocket(m) => {
                m.save(&dir.join(TRANSFORM_FILE)).model_err("saving transform")?;
                ("rocket", None)
            }
            Extractor::HeartRate(imp) => ("heart_rate", Some(imp.medians().to_vec())),
            Extractor::Morph(imp) => ("morph", Some(imp.medians().to_vec())),
        };
        self.classifier.save(&dir.join(CLASSIFIER_FILE)).model_err("saving classifier")?;
        if let Classifier::Ridge(r) = &self.classifier {
            write(&dir.join(RIDGE_TEXT_FILE), &r.to_text())?;
        }
        let meta = json!({
            "format_version": 1,
            "method": self.method.as_str(),
            "extractor": kind,
            "imputer_medians": medians,
        });
        write(&dir.join(PIPELINE_FILE), &format!("{}\n", serde_json::to_string_pretty(&meta).expect("json")))
    }

    pub fn load(dir: &Path, parallelism: Parallelism) -> CliResult<Self> {
        let path = dir.join(PIPELINE_FILE);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::model(format!("cannot read {}: {e}", path.display())))?;
        let meta: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::model(format!("{}: {e}", path.display())))?;
        if meta["format_version"] != 1 {
            return Err(CliError::model(format!("{}: unsupported format_version", path.display())));
        }
        let method: Method = meta["method"]
            .as_str()
            .ok_or_else(|| CliError::model("pipeline.json lacks method"))?
            .parse()
            .map_err(|e: CliError| CliError::model(e.message))?;
        let medians = || -> CliResult<Vec<f64>> {
            meta["imputer_medians"]
                .as_array()
                .and_then(|a| a.iter().map(|v| v.as_f64()).collect::<Option<Vec<_>>>())
                .ok_or_else(|| CliError::model("pipeline.json lacks imputer medians"))
        };
        let extractor = match method {
            Method::RocketRidge | Method::RocketForest => {
                Extractor::Rocket(TransformModel::load(&dir.join(TRANSFORM_FILE)).model_err("loading transform")?)
            }
            Method::HrRidge => Extractor::HeartRate(MedianImputer::from_medians(medians()?)),
            Method::MorphRidge | Method::MorphForest => Extractor::Morph(MedianImputer::from_medians(medians()?)),
        };
        let classifier = Classifier::load(&dir.join(CLASSIFIER_FILE)).model_err("loading classifier")?;
        if matches!(classifier, Classifier::Forest(_)) != method.uses_forest() {
            return Err(CliError::model(format!("classifier file does not match method {method}")));
        }
        Ok(Self { method, extractor, classifier, parallelism })
    }
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::model(format!("cannot write {}: {e}", path.display())))
}
