use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::EvalReport;

/// Headline metrics carried by every run record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Precision,
    Recall,
    F1,
    Map50,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Precision, Metric::Recall, Metric::F1, Metric::Map50];

    pub fn label(&self) -> &'static str {
        match self {
            Metric::Precision => "Precision",
            Metric::Recall => "Recall",
            Metric::F1 => "F1",
            Metric::Map50 => "mAP50",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "precision" | "p" => Ok(Metric::Precision),
            "recall" | "r" => Ok(Metric::Recall),
            "f1" => Ok(Metric::F1),
            "map50" | "map" => Ok(Metric::Map50),
            other => Err(format!(
                "unknown metric {other:?} (expected precision, recall, f1 or map50)"
            )),
        }
    }
}

/// Relative improvement per metric, in percent. `None` = zero baseline.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricDeltas {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub map50: Option<f64>,
}

impl MetricDeltas {
    pub fn get(&self, m: Metric) -> Option<f64> {
        match m {
            Metric::Precision => self.precision,
            Metric::Recall => self.recall,
            Metric::F1 => self.f1,
            Metric::Map50 => self.map50,
        }
    }

    pub(crate) fn between(new: &ModelRunRecord, base: &ModelRunRecord) -> Self {
        let d = |m| super::relative_improvement(new.metric(m), base.metric(m));
        Self {
            precision: d(Metric::Precision),
            recall: d(Metric::Recall),
            f1: d(Metric::F1),
            map50: d(Metric::Map50),
        }
    }
}

/// Optional per-class breakdown of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRow {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub images: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instances: Option<u64>,
    pub precision: f64,
    pub recall: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map50: Option<f64>,
}

/// One model configuration's metrics and timings.
///
/// Fields this type does not know are kept in `extra` and written back on
/// save.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRunRecord {
    pub name: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub map50: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inference_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training_hours: Option<f64>,
    /// Reported seconds per 30-frame input, checked against `frames / fps`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reported_computational_time_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conf_thresh: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iou_thresh: Option<f64>,
    /// Dataset the metrics were measured on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub images: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instances: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, rename = "class", skip_serializing_if = "Vec::is_empty")]
    pub classes: Vec<ClassRow>,
    #[serde(flatten)]
    pub extra: toml::Table,
}

impl ModelRunRecord {
    pub fn new(name: impl Into<String>, precision: f64, recall: f64, f1: f64, map50: f64) -> Self {
        Self {
            name: name.into(),
            precision,
            recall,
            f1,
            map50,
            fps: None,
            inference_ms: None,
            training_hours: None,
            reported_computational_time_s: None,
            conf_thresh: None,
            iou_thresh: None,
            dataset: None,
            images: None,
            instances: None,
            note: None,
            classes: Vec::new(),
            extra: toml::Table::new(),
        }
    }

    /// Record built from an evaluation report, including per-class rows.
    pub fn from_eval_report(name: impl Into<String>, report: &EvalReport) -> Self {
        let a = &report.all;
        let mut rec = Self::new(name, a.precision, a.recall, a.f1, a.map50);
        rec.conf_thresh = Some(report.config.conf_thresh);
        rec.iou_thresh = Some(report.config.iou_thresh);
        rec.images = Some(a.images as u64);
        rec.instances = Some(a.instances as u64);
        rec.classes = report
            .classes
            .iter()
            .map(|c| ClassRow {
                name: c.name.clone(),
                images: Some(c.images as u64),
                instances: Some(c.instances as u64),
                precision: c.precision,
                recall: c.recall,
                map50: c.ap50,
            })
            .collect();
        rec
    }

    pub fn metric(&self, m: Metric) -> f64 {
        match m {
            Metric::Precision => self.precision,
            Metric::Recall => self.recall,
            Metric::F1 => self.f1,
            Metric::Map50 => self.map50,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Records(format!("run {:?}: {msg}", self.name)));
        if self.name.trim().is_empty() {
            return Err(Error::Records("run name must be non-empty".into()));
        }
        for m in Metric::ALL {
            let v = self.metric(m);
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{m} = {v} is outside [0, 1]"));
            }
        }
        if let Some(fps) = self.fps {
            if !(fps > 0.0 && fps.is_finite()) {
                return bad(format!("fps = {fps} must be positive"));
            }
        }
        for (what, v) in [
            ("inference_ms", self.inference_ms),
            ("training_hours", self.training_hours),
        ] {
            if v.is_some_and(|v| !(v >= 0.0 && v.is_finite())) {
                return bad(format!("{what} must be non-negative"));
            }
        }
        for c in &self.classes {
            let vals = [Some(c.precision), Some(c.recall), c.map50];
            if vals.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
                return bad(format!("class {:?} has a metric outside [0, 1]", c.name));
            }
        }
        Ok(())
    }
}

/// A run-record document:
///
/// ```toml
/// title = "..."
///
/// [[run]]
/// name = "YOLOv8x"
/// precision = 0.763
/// recall = 0.485
/// f1 = 0.462
/// map50 = 0.514
/// fps = 101.0
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecordFile {
    #[serde(default)]
    pub run: Vec<ModelRunRecord>,
    #[serde(flatten)]
    pub extra: toml::Table,
}

impl RunRecordFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: Self = toml::from_str(text).map_err(|e| Error::Records(e.to_string()))?;
        for r in &file.run {
            r.validate()?;
        }
        Ok(file)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run records serialize")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Records(message) => Error::Format {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()).map_err(|e| Error::io(path, e))
    }
}

/// Concatenates the runs of several files, in order. Run names must be
/// unique across all files.
pub fn load_run_records<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<ModelRunRecord>> {
    let mut runs = Vec::new();
    for p in paths {
        runs.extend(RunRecordFile::load(p.as_ref())?.run);
    }
    check_unique(&runs)?;
    Ok(runs)
}

pub(crate) fn check_unique(runs: &[ModelRunRecord]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for r in runs {
        if !seen.insert(r.name.as_str()) {
            return Err(Error::Records(format!("duplicate run name {:?}", r.name)));
        }
    }
    Ok(())
}
