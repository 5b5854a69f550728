//! Subcommand implementations. Each returns a value the binary prints;
//! files are written under the configured directories.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use ppg_rocket::features::{morphological_features, write_feature_csv};
use ppg_rocket::metrics::{evaluate, MetricReport, CSV_HEADER};
use ppg_rocket::signal::{load_dataset, save_dataset, split_by_subject, subsample_training, synth_ppg, Dataset};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult, Context};
use crate::pipeline::{fit_pipeline, FitOptions, Method, Pipeline, Predictor};

pub const TRAIN_REPORT: &str = "train_report.json";
pub const EVAL_REPORT: &str = "eval_report.json";
pub const ABLATION_CSV: &str = "ablation.csv";
pub const FEATURES_CSV: &str = "features.csv";

/// Ordered log of data reads and fitting steps, kept so tests can check
/// that nothing is fitted after a validation or test file is opened.
#[derive(Debug, Default)]
pub struct Audit {
    events: Mutex<Vec<AuditEvent>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AuditEvent {
    Read(PathBuf),
    Fit(String),
}

impl Audit {
    pub fn record(&self, e: AuditEvent) {
        self.events.lock().expect("audit lock").push(e);
    }

    pub fn events(&self) -> Vec<AuditEvent> {
        self.events.lock().expect("audit lock").clone()
    }
}

fn read_dataset(path: &Path, cfg: &RunConfig, audit: Option<&Audit>) -> CliResult<Dataset> {
    if let Some(a) = audit {
        a.record(AuditEvent::Read(path.to_path_buf()));
    }
    load_dataset(path, cfg.data_format).data_err(&format!("reading {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::data(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}

pub fn fit_options(cfg: &RunConfig) -> FitOptions {
    FitOptions {
        target_features: cfg.target_features,
        max_dilations: cfg.max_dilations,
        lambda_grid: cfg.lambda_grid.clone(),
        forest: cfg.forest.clone(),
        parallelism: cfg.parallelism(),
    }
}

fn split_summary(d: &Dataset) -> Value {
    json!({
        "records": d.len(),
        "subjects": d.subjects().len(),
        "positive_fraction": d.positive_fraction(),
    })
}

/// Generates the synthetic corpus and writes subject-disjoint
/// `train`/`val`/`test` files. Returns a class-balance summary.
pub fn cmd_synth(cfg: &RunConfig) -> CliResult<Value> {
    let all = synth_ppg(&cfg.synth_params()).map_err(|e| CliError::config(format!("synthesis: {e}")))?;
    let (train, val, test) = split_by_subject(&all, cfg.split, cfg.seed).data_err("splitting by subject")?;
    let dir = cfg.data_dir();
    fs::create_dir_all(&dir).map_err(|e| CliError::data(format!("cannot create {}: {e}", dir.display())))?;
    let mut out = serde_json::Map::new();
    for (name, d) in [("train", &train), ("val", &val), ("test", &test)] {
        let path = cfg.split_path(name);
        save_dataset(d, &path, cfg.data_format).data_err(&format!("writing {}", path.display()))?;
        out.insert(name.into(), split_summary(d));
    }
    Ok(Value::Object(out))
}

fn report_json(report: &MetricReport, method: Method, split: &str) -> Value {
    let mut v = serde_json::to_value(report).expect("report serialises");
    let obj = v.as_object_mut().expect("report is an object");
    obj.insert("method".into(), json!(method.as_str()));
    obj.insert("split".into(), json!(split));
    v
}

fn pretty(v: &Value) -> String {
    format!("{}\n", serde_json::to_string_pretty(v).expect("json"))
}

/// Scores any predictor on a dataset.
pub fn evaluate_predictor<P: Predictor + ?Sized>(p: &P, ds: &Dataset) -> CliResult<MetricReport> {
    let pred = p.predict(ds).model_err("predicting")?;
    evaluate(&ds.labels(), &pred).model_err("scoring")
}

#[derive(Debug)]
pub struct TrainOutcome {
    pub report: MetricReport,
    pub json: Value,
    pub audit: Audit,
}

/// Fits the configured method on the training file, saves it, and reports
/// on the validation file.
pub fn cmd_train(cfg: &RunConfig) -> CliResult<TrainOutcome> {
    let audit = Audit::default();
    let train = read_dataset(&cfg.split_path("train"), cfg, Some(&audit))?;
    let pipeline = fit_pipeline(cfg.method, &train, &fit_options(cfg), cfg.seed).data_err("training")?;
    audit.record(AuditEvent::Fit(cfg.method.to_string()));
    pipeline.save(&cfg.model_dir())?;

    let val = read_dataset(&cfg.split_path("val"), cfg, Some(&audit))?;
    let report = evaluate_predictor(&pipeline, &val)?;
    let json = report_json(&report, cfg.method, "val");
    write_text(&cfg.out_dir.join(TRAIN_REPORT), &pretty(&json))?;
    Ok(TrainOutcome { report, json, audit })
}

/// Reloads the saved pipeline and reports on the test file.
pub fn cmd_eval(cfg: &RunConfig) -> CliResult<Value> {
    let pipeline = Pipeline::load(&cfg.model_dir(), cfg.parallelism())?;
    let test = read_dataset(&cfg.split_path("test"), cfg, None)?;
    let report = evaluate_predictor(&pipeline, &test)?;
    let json = report_json(&report, pipeline.method, "test");
    write_text(&cfg.out_dir.join(EVAL_REPORT), &pretty(&json))?;
    Ok(json)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub method: Method,
    pub fraction: f64,
    pub seed: u64,
    pub result: Result<MetricReport, String>,
}

impl AblationRow {
    pub fn csv(&self) -> String {
        let head = format!("{},{},{}", self.method, self.fraction, self.seed);
        match &self.result {
            Ok(r) => format!("{head},ok,{}", r.csv_row()),
            Err(e) => {
                let blanks = ",".repeat(CSV_HEADER.split(',').count() - 1);
                format!("{head},\"error: {}\",{blanks}", e.replace('"', "'"))
            }
        }
    }
}

pub fn ablation_header() -> String {
    format!("method,fraction,seed,status,{CSV_HEADER}")
}

fn run_cell(cfg: &RunConfig, train: &Dataset, test: &Dataset, method: Method, fraction: f64, seed: u64) -> AblationRow {
    let result = (|| {
        let sub = subsample_training(train, fraction, seed).map_err(|e| e.to_string())?;
        let p = fit_pipeline(method, &sub, &fit_options(cfg), seed).map_err(|e| e.to_string())?;
        evaluate_predictor(&p, test).map_err(|e| e.message)
    })();
    AblationRow { method, fraction, seed, result }
}

#[cfg(feature = "parallel")]
fn map_cells<F: Fn(&(Method, f64, u64)) -> AblationRow + Sync + Send>(
    cells: &[(Method, f64, u64)],
    parallel: bool,
    f: F,
) -> Vec<AblationRow> {
    use rayon::prelude::*;
    if parallel {
        let rows = Mutex::new(Vec::with_capacity(cells.len()));
        cells.par_iter().for_each(|c| {
            let row = f(c);
            rows.lock().expect("rows lock").push(row);
        });
        rows.into_inner().expect("rows lock")
    } else {
        cells.iter().map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
fn map_cells<F: Fn(&(Method, f64, u64)) -> AblationRow>(
    cells: &[(Method, f64, u64)],
    _parallel: bool,
    f: F,
) -> Vec<AblationRow> {
    cells.iter().map(f).collect()
}

/// Retrains every (method, fraction, seed) cell end to end on a subsample of
/// the training file and scores it on the test file. Failed cells become
/// error rows. Rows are sorted before writing.
pub fn cmd_ablate(cfg: &RunConfig) -> CliResult<Vec<AblationRow>> {
    let train = read_dataset(&cfg.split_path("train"), cfg, None)?;
    let test = read_dataset(&cfg.split_path("test"), cfg, None)?;
    let mut cells = Vec::new();
    for &m in &cfg.ablate_methods {
        for &f in &cfg.fractions {
            for &s in &cfg.ablate_seeds {
                cells.push((m, f, s));
            }
        }
    }
    let mut rows = map_cells(&cells, cfg.parallel, |&(m, f, s)| run_cell(cfg, &train, &test, m, f, s));
    rows.sort_by(|a, b| {
        a.method.cmp(&b.method).then(a.fraction.total_cmp(&b.fraction)).then(a.seed.cmp(&b.seed))
    });
    let mut text = ablation_header();
    text.push('\n');
    for r in &rows {
        text.push_str(&r.csv());
        text.push('\n');
    }
    write_text(&cfg.out_dir.join(ABLATION_CSV), &text)?;
    Ok(rows)
}

/// Dumps morphological features of one dataset file as CSV.
pub fn cmd_features(cfg: &RunConfig) -> CliResult<PathBuf> {
    let input = cfg.features_input.clone().unwrap_or_else(|| cfg.split_path("train"));
    let ds = read_dataset(&input, cfg, None)?;
    let rows: Vec<_> = ds
        .records()
        .iter()
        .map(|r| (r.label(), morphological_features(r.samples(), r.fs()).ok()))
        .collect();
    let mut buf = Vec::new();
    write_feature_csv(&rows, &mut buf).data_err("writing features")?;
    let out = cfg.out_dir.join(FEATURES_CSV);
    write_text(&out, &String::from_utf8(buf).expect("csv is utf-8"))?;
    Ok(out)
}
