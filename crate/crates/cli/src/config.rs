//! Flat `key = value` run configuration.
//!
//! One pair per line, `#` starts a comment, unknown keys are rejected.
//! The file must declare `version = 1`. List values are comma separated.
//!
//! | key | default |
//! |-----|---------|
//! | `version` | required, `1` |
//! | `seed` | `0` |
//! | `method` | `rocket+forest` |
//! | `out_dir` | `out` |
//! | `data_dir` | `<out_dir>/data` |
//! | `model_dir` | `<out_dir>/model` |
//! | `data_format` | `binary` (or `csv`) |
//! | `n_subjects`, `positive_fraction` | `300`, `0.2` |
//! | `windows_per_subject`, `duration_s`, `fs` | `4`, `7`, `125` |
//! | `noise_sd`, `wander_amplitude` | generator defaults |
//! | `split` | `0.7,0.15,0.15` |
//! | `target_features`, `max_dilations` | `9996`, `32` |
//! | `lambda_grid` | `0.01,0.1,1,10,100` |
//! | `n_trees`, `max_depth`, `min_leaf`, `mtry` | `200`, `none`, `1`, `auto` |
//! | `fractions` | `0.0625,0.125,0.25,0.5,1` |
//! | `ablate_methods` | `rocket+forest,rocket+ridge` |
//! | `ablate_seeds` | `0,1,2` |
//! | `features_input` | training file |
//! | `parallel` | `true` |

use std::path::{Path, PathBuf};

use ppg_rocket::classify::{ForestConfig, DEFAULT_LAMBDA_GRID};
use ppg_rocket::signal::{DataFormat, SynthParams};
use ppg_rocket::Parallelism;

use crate::error::{CliError, CliResult};
use crate::pipeline::Method;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub method: Method,
    pub out_dir: PathBuf,
    data_dir: Option<PathBuf>,
    model_dir: Option<PathBuf>,
    pub data_format: DataFormat,
    pub synth: SynthParams,
    pub n_subjects: usize,
    pub positive_fraction: f64,
    pub split: [f64; 3],
    pub target_features: usize,
    pub max_dilations: usize,
    pub lambda_grid: Vec<f64>,
    pub forest: ForestConfig,
    pub fractions: Vec<f64>,
    pub ablate_methods: Vec<Method>,
    pub ablate_seeds: Vec<u64>,
    pub features_input: Option<PathBuf>,
    pub parallel: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            method: Method::RocketForest,
            out_dir: PathBuf::from("out"),
            data_dir: None,
            model_dir: None,
            data_format: DataFormat::Binary,
            synth: SynthParams::default(),
            n_subjects: 300,
            positive_fraction: 0.2,
            split: [0.7, 0.15, 0.15],
            target_features: 9_996,
            max_dilations: 32,
            lambda_grid: DEFAULT_LAMBDA_GRID.to_vec(),
            forest: ForestConfig::default(),
            fractions: vec![0.0625, 0.125, 0.25, 0.5, 1.0],
            ablate_methods: vec![Method::RocketForest, Method::RocketRidge],
            ablate_seeds: vec![0, 1, 2],
            features_input: None,
            parallel: true,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> CliResult<T> {
    v.parse().map_err(|_| CliError::config(format!("invalid value for {key}: {v:?}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> CliResult<Vec<T>> {
    let out: Vec<T> = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect::<CliResult<_>>()?;
    if out.is_empty() {
        return Err(CliError::config(format!("{key} must not be empty")));
    }
    Ok(out)
}

fn parse_opt_usize(key: &str, v: &str) -> CliResult<Option<usize>> {
    match v {
        "none" | "auto" => Ok(None),
        _ => parse_num(key, v).map(Some),
    }
}

impl RunConfig {
    pub fn data_dir(&self) -> PathBuf {
        self.data_dir.clone().unwrap_or_else(|| self.out_dir.join("data"))
    }

    pub fn model_dir(&self) -> PathBuf {
        self.model_dir.clone().unwrap_or_else(|| self.out_dir.join("model"))
    }

    pub fn set_data_dir(&mut self, p: impl Into<PathBuf>) {
        self.data_dir = Some(p.into());
    }

    pub fn set_model_dir(&mut self, p: impl Into<PathBuf>) {
        self.model_dir = Some(p.into());
    }

    fn extension(&self) -> &'static str {
        match self.data_format {
            DataFormat::Csv => "csv",
            DataFormat::Binary => "bin",
        }
    }

    /// Path of the `train`, `val` or `test` file.
    pub fn split_path(&self, name: &str) -> PathBuf {
        self.data_dir().join(format!("{name}.{}", self.extension()))
    }

    pub fn parallelism(&self) -> Parallelism {
        if self.parallel {
            Parallelism::Rayon
        } else {
            Parallelism::Sequential
        }
    }

    /// Generator settings with the configured seed and subject counts.
    pub fn synth_params(&self) -> SynthParams {
        SynthParams { seed: self.seed, ..self.synth.clone() }.with_subjects(self.n_subjects, self.positive_fraction)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::config(format!("{}: {}", path.display(), e.message)))
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut cfg = Self::default();
        let mut version = None;
        let mut seen = std::collections::BTreeSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(CliError::config(format!("line {}: duplicate key {key}", lineno + 1)));
            }
            if key == "version" {
                version = Some(parse_num::<u32>(key, value)?);
            } else {
                cfg.set(key, value)
                    .map_err(|e| CliError::config(format!("line {}: {}", lineno + 1, e.message)))?;
            }
        }
        match version {
            Some(CONFIG_VERSION) => {}
            Some(v) => return Err(CliError::config(format!("unsupported config version {v}"))),
            None => return Err(CliError::config("missing version key")),
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, v: &str) -> CliResult<()> {
        match key {
            "seed" => self.seed = parse_num(key, v)?,
            "method" => self.method = v.parse()?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            "data_dir" => self.data_dir = Some(PathBuf::from(v)),
            "model_dir" => self.model_dir = Some(PathBuf::from(v)),
            "data_format" => {
                self.data_format = match v {
                    "csv" => DataFormat::Csv,
                    "binary" => DataFormat::Binary,
                    _ => return Err(CliError::config(format!("data_format must be csv or binary, got {v:?}"))),
                }
            }
            "n_subjects" => self.n_subjects = parse_num(key, v)?,
            "positive_fraction" => self.positive_fraction = parse_num(key, v)?,
            "windows_per_subject" => self.synth.windows_per_subject = parse_num(key, v)?,
            "duration_s" => self.synth.duration_s = parse_num(key, v)?,
            "fs" => self.synth.fs = parse_num(key, v)?,
            "noise_sd" => self.synth.noise_sd = parse_num(key, v)?,
            "wander_amplitude" => self.synth.wander_amplitude = parse_num(key, v)?,
            "split" => {
                let s: Vec<f64> = parse_list(key, v)?;
                self.split = s
                    .try_into()
                    .map_err(|_| CliError::config("split needs exactly three fractions"))?;
            }
            "target_features" => self.target_features = parse_num(key, v)?,
            "max_dilations" => self.max_dilations = parse_num(key, v)?,
            "lambda_grid" => self.lambda_grid = parse_list(key, v)?,
            "n_trees" => self.forest.n_trees = parse_num(key, v)?,
            "max_depth" => self.forest.max_depth = parse_opt_usize(key, v)?,
            "min_leaf" => self.forest.min_leaf = parse_num(key, v)?,
            "mtry" => self.forest.mtry = parse_opt_usize(key, v)?,
            "fractions" => self.fractions = parse_list(key, v)?,
            "ablate_methods" => {
                self.ablate_methods = v.split(',').map(|s| s.trim().parse()).collect::<CliResult<_>>()?
            }
            "ablate_seeds" => self.ablate_seeds = parse_list(key, v)?,
            "features_input" => self.features_input = Some(PathBuf::from(v)),
            "parallel" => self.parallel = parse_num(key, v)?,
            _ => return Err(CliError::config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.n_subjects < 3 {
            return Err(CliError::config("n_subjects must be at least 3"));
        }
        if !(self.positive_fraction > 0.0 && self.positive_fraction < 1.0) {
            return Err(CliError::config("positive_fraction must lie in (0, 1)"));
        }
        if self.split.iter().any(|f| !(*f > 0.0)) || (self.split.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(CliError::config("split fractions must be positive and sum to 1"));
        }
        if self.fractions.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) {
            return Err(CliError::config("ablation fractions must lie in (0, 1]"));
        }
        if self.lambda_grid.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(CliError::config("lambda_grid values must be positive"));
        }
        if self.ablate_methods.is_empty() || self.ablate_seeds.is_empty() {
            return Err(CliError::config("ablation needs at least one method and one seed"));
        }
        self.synth_params().validate().map_err(|e| CliError::config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_keys() {
        let cfg = RunConfig::parse(
            "# run\nversion = 1\nseed = 7\nmethod = hr+ridge\nsplit = 0.6, 0.2, 0.2\nmax_depth = 5\nmtry = auto\nfractions = 0.5,1\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.method, Method::HrRidge);
        assert_eq!(cfg.split, [0.6, 0.2, 0.2]);
        assert_eq!(cfg.forest.max_depth, Some(5));
        assert_eq!(cfg.forest.mtry, None);
        assert_eq!(cfg.fractions, vec![0.5, 1.0]);
        assert_eq!(cfg.split_path("train"), PathBuf::from("out/data/train.bin"));
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "seed = 1\n",
            "version = 2\n",
            "version = 1\nbogus = 3\n",
            "version = 1\nseed = x\n",
            "version = 1\nseed = 1\nseed = 2\n",
            "version = 1\nfractions = 0,1\n",
            "version = 1\nsplit = 0.5,0.5\n",
            "version = 1\nmethod = rocket+svm\n",
            "version = 1\njust words\n",
        ] {
            let e = RunConfig::parse(text).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{text:?}");
        }
    }
}
