//! Batch scoring of model predictions against a dataset.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use fixatons::dataset::{load_saliency_map, load_scanpath_file, SALIENCY_MAPS_DIR, SCANPATHS_DIR};
use fixatons::saliency_metrics::KL_EPSILON;
use fixatons::{
    auc_judd, euclidean_distance, kl_divergence, nss, scaled_tde, string_edit_distance,
    tde_distance, AucParams, DatasetCatalog, DatasetError, GridSpec, SaliencyMap, Scanpath,
    TdeMode,
};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
    StringEdit,
    Tde,
    ScaledTde,
    Nss,
    AucJudd,
    KlDiv,
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::Euclidean,
        Metric::StringEdit,
        Metric::Tde,
        Metric::ScaledTde,
        Metric::Nss,
        Metric::AucJudd,
        Metric::KlDiv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::StringEdit => "string_edit",
            Metric::Tde => "tde",
            Metric::ScaledTde => "scaled_tde",
            Metric::Nss => "NSS",
            Metric::AucJudd => "AUC_Judd",
            Metric::KlDiv => "KLdiv",
        }
    }

    fn is_scanpath(self) -> bool {
        matches!(
            self,
            Metric::Euclidean | Metric::StringEdit | Metric::Tde | Metric::ScaledTde
        )
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Metric::ALL
            .into_iter()
            .find(|m| m.name().to_ascii_lowercase() == key)
            .ok_or_else(|| {
                let names: Vec<_> = Metric::ALL.iter().map(|m| m.name()).collect();
                format!("unknown metric {s:?}, expected one of {}", names.join(", "))
            })
    }
}

/// Metric parameters shared by a whole run.
#[derive(Debug, Clone)]
pub struct EvalSettings {
    pub metrics: Vec<Metric>,
    pub grid_n: usize,
    pub substitution_cost: f64,
    pub k: usize,
    pub mode: TdeMode,
    pub truncate: bool,
    pub auc: AucParams,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            metrics: Metric::ALL.to_vec(),
            grid_n: GridSpec::DEFAULT_N,
            substitution_cost: 1.0,
            k: 3,
            mode: TdeMode::MeanMinimal,
            truncate: false,
            auc: AucParams::default(),
        }
    }
}

impl EvalSettings {
    fn parameters(&self, metric: Metric) -> String {
        match metric {
            Metric::Euclidean => format!("truncate={}", self.truncate),
            Metric::StringEdit => format!(
                "n={};substitution_cost={}",
                self.grid_n, self.substitution_cost
            ),
            Metric::Tde => {
                let mode = match self.mode {
                    TdeMode::MeanMinimal => "Mean",
                    TdeMode::Hausdorff => "Hausdorff",
                };
                format!("k={};distance_mode={mode}", self.k)
            }
            Metric::ScaledTde => String::new(),
            Metric::Nss => String::new(),
            Metric::AucJudd => format!(
                "jitter={};jitter_scale={:e};seed={}",
                self.auc.jitter, self.auc.jitter_scale, self.auc.seed
            ),
            Metric::KlDiv => format!("epsilon={KL_EPSILON:e}"),
        }
    }
}

/// One evaluated pair. `value` is `None` exactly when `error` is set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReportRow {
    pub dataset: String,
    pub stimulus: String,
    pub subject_a: String,
    pub subject_b: String,
    pub metric: String,
    pub value: Option<f64>,
    pub parameters: String,
    pub error: Option<String>,
}

pub const HUMAN: &str = "human";
pub const MODEL: &str = "model";

struct RowSink<'a> {
    dataset: &'a str,
    stimulus: &'a str,
    settings: &'a EvalSettings,
    rows: Vec<MetricReportRow>,
}

impl RowSink<'_> {
    fn push(&mut self, a: &str, b: &str, metric: Metric, result: Result<f64, String>) {
        let (value, error) = match result {
            Ok(v) if v.is_finite() => (Some(v), None),
            Ok(v) => (None, Some(format!("non-finite result {v}"))),
            Err(e) => (None, Some(e)),
        };
        self.rows.push(MetricReportRow {
            dataset: self.dataset.to_owned(),
            stimulus: self.stimulus.to_owned(),
            subject_a: a.to_owned(),
            subject_b: b.to_owned(),
            metric: metric.name().to_owned(),
            value,
            parameters: self.settings.parameters(metric),
            error,
        });
    }
}

/// Finds `dir/<stimulus>` or `dir/<stimulus stem>` (file or directory).
fn find_prediction(dir: &Path, stimulus: &str, want_dir: bool) -> Option<PathBuf> {
    let stem = Path::new(stimulus).file_stem()?.to_str()?;
    let ok = |p: &Path| if want_dir { p.is_dir() } else { p.is_file() };
    let exact = dir.join(stimulus);
    if ok(&exact) {
        return Some(exact);
    }
    let by_stem = dir.join(stem);
    if ok(&by_stem) {
        return Some(by_stem);
    }
    if want_dir {
        return None;
    }
    let mut candidates: Vec<PathBuf> = std::fs::read_dir(dir)
        .ok()?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.file_stem().and_then(|s| s.to_str()) == Some(stem))
        .collect();
    candidates.sort();
    candidates.into_iter().next()
}

/// Model scanpaths for a stimulus as `(id, result)` in id order.
fn model_scanpaths(predictions: &Path, stimulus: &str) -> Vec<(String, Result<Scanpath, String>)> {
    let Some(dir) = find_prediction(&predictions.join(SCANPATHS_DIR), stimulus, true) else {
        return Vec::new();
    };
    let Ok(entries) = std::fs::read_dir(&dir) else {
        return Vec::new();
    };
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && !p
                    .file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with('.'))
        })
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let id = p
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default()
                .to_owned();
            (
                id,
                load_scanpath_file(&p, stimulus).map_err(|e| e.to_string()),
            )
        })
        .collect()
}

fn model_saliency(predictions: &Path, stimulus: &str) -> Result<SaliencyMap, String> {
    let path = find_prediction(&predictions.join(SALIENCY_MAPS_DIR), stimulus, false)
        .ok_or_else(|| format!("no model saliency map for {stimulus}"))?;
    load_saliency_map(&path).map_err(|e| e.to_string())
}

fn scanpath_metric(
    metric: Metric,
    human: &Scanpath,
    model: &Scanpath,
    dims: (f64, f64),
    settings: &EvalSettings,
) -> Result<f64, String> {
    let r = match metric {
        Metric::Euclidean => euclidean_distance(model, human, settings.truncate),
        Metric::StringEdit => string_edit_distance(
            model,
            human,
            dims,
            settings.grid_n,
            settings.substitution_cost,
        ),
        Metric::Tde => tde_distance(model, human, settings.k, settings.mode),
        Metric::ScaledTde => scaled_tde(model, human, dims),
        _ => unreachable!("saliency metric routed to scanpath scoring"),
    };
    r.map_err(|e| e.to_string())
}

fn evaluate_stimulus(
    catalog: &DatasetCatalog,
    dataset: &str,
    stimulus: &str,
    predictions: &Path,
    settings: &EvalSettings,
) -> Vec<MetricReportRow> {
    let mut sink = RowSink {
        dataset,
        stimulus,
        settings,
        rows: Vec::new(),
    };
    let scanpath_metrics: Vec<Metric> = settings
        .metrics
        .iter()
        .copied()
        .filter(|m| m.is_scanpath())
        .collect();
    let saliency_metrics: Vec<Metric> = settings
        .metrics
        .iter()
        .copied()
        .filter(|m| !m.is_scanpath())
        .collect();

    if !scanpath_metrics.is_empty() {
        let dims = catalog
            .stimulus_dims(dataset, stimulus)
            .map(|(w, h)| (w as f64, h as f64))
            .map_err(|e| e.to_string());
        let models = model_scanpaths(predictions, stimulus);
        let subjects = catalog.list_subjects(dataset, stimulus).unwrap_or_default();
        for subject in &subjects {
            let human = catalog
                .get_scanpath(dataset, stimulus, Some(subject), 0)
                .map_err(|e| e.to_string());
            if models.is_empty() {
                for &m in &scanpath_metrics {
                    sink.push(
                        subject,
                        MODEL,
                        m,
                        Err(format!("no model scanpath for {stimulus}")),
                    );
                }
                continue;
            }
            for (model_id, model) in &models {
                for &m in &scanpath_metrics {
                    let result = match (&human, model, &dims) {
                        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => Err(e.clone()),
                        (Ok(h), Ok(s), Ok(d)) => scanpath_metric(m, h, s, *d, settings),
                    };
                    sink.push(subject, model_id, m, result);
                }
            }
        }
    }

    if !saliency_metrics.is_empty() {
        let model = model_saliency(predictions, stimulus);
        let human_fix = catalog
            .get_fixation_map(dataset, stimulus)
            .map_err(|e| e.to_string());
        for &m in &saliency_metrics {
            let result = model.clone().and_then(|sal| match m {
                Metric::Nss => human_fix
                    .clone()
                    .and_then(|f| nss(sal.view(), &f).map_err(|e| e.to_string())),
                Metric::AucJudd => human_fix.clone().and_then(|f| {
                    auc_judd(sal.view(), &f, &settings.auc).map_err(|e| e.to_string())
                }),
                Metric::KlDiv => catalog
                    .get_saliency_map(dataset, stimulus)
                    .map_err(|e| e.to_string())
                    .and_then(|human| {
                        kl_divergence(human.view(), sal.view(), KL_EPSILON)
                            .map_err(|e| e.to_string())
                    }),
                _ => unreachable!("scanpath metric routed to saliency scoring"),
            });
            sink.push(HUMAN, MODEL, m, result);
        }
    }
    sink.rows
}

/// Scores every stimulus of `dataset`. Stimuli run in parallel; rows come
/// back in stimulus order, then scanpath rows by (human subject, model id,
/// metric), then saliency rows by metric.
pub fn evaluate(
    catalog: &DatasetCatalog,
    dataset: &str,
    predictions: &Path,
    settings: &EvalSettings,
) -> Result<Vec<MetricReportRow>, DatasetError> {
    let stimuli = catalog.list_stimuli(dataset)?;
    let per_stimulus: Vec<Vec<MetricReportRow>> = stimuli
        .par_iter()
        .map(|s| evaluate_stimulus(catalog, dataset, s, predictions, settings))
        .collect();
    Ok(per_stimulus.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => ReportFormat::Json,
            _ => ReportFormat::Csv,
        }
    }
}

pub fn render_report(rows: &[MetricReportRow], format: ReportFormat) -> Result<Vec<u8>, String> {
    match format {
        ReportFormat::Json => {
            let mut out = serde_json::to_vec_pretty(rows).map_err(|e| e.to_string())?;
            out.push(b'\n');
            Ok(out)
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            if rows.is_empty() {
                w.write_record([
                    "dataset",
                    "stimulus",
                    "subject_a",
                    "subject_b",
                    "metric",
                    "value",
                    "parameters",
                    "error",
                ])
                .map_err(|e| e.to_string())?;
            }
            for row in rows {
                w.serialize(row).map_err(|e| e.to_string())?;
            }
            w.into_inner().map_err(|e| e.to_string())
        }
    }
}
