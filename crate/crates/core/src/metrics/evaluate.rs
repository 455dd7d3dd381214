use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ap::{average_precision, mean_ap, pr_curve};
use super::counts::{confusion_at_threshold, f1, ConfusionCounts};
use crate::annotation::{
    load_ground_truth, parse_detections, ClassId, DatasetManifest, DetectionRecord,
    GroundTruthRecord,
};
use crate::error::{Error, Result};
use crate::table::{fmt_metric, Table};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub iou_thresh: f64,
    pub conf_thresh: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            iou_thresh: 0.5,
            conf_thresh: 0.2,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.iou_thresh > 0.0 && self.iou_thresh <= 1.0) {
            return Err(Error::Contract(format!(
                "IoU threshold {} is outside (0, 1]",
                self.iou_thresh
            )));
        }
        if !(self.conf_thresh > 0.0 && self.conf_thresh <= 1.0) {
            return Err(Error::Contract(format!(
                "confidence threshold {} is outside (0, 1]",
                self.conf_thresh
            )));
        }
        Ok(())
    }
}

/// One per-class row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassEval {
    pub class_id: ClassId,
    pub name: String,
    pub images: usize,
    pub instances: usize,
    pub counts: ConfusionCounts,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// `None` when the class has no ground-truth instances.
    pub ap50: Option<f64>,
}

/// Pooled-count P/R/F1 and mAP across classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllClassesEval {
    pub images: usize,
    pub instances: usize,
    pub counts: ConfusionCounts,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub map50: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: EvalConfig,
    pub classes: Vec<ClassEval>,
    pub all: AllClassesEval,
    /// Classes without ground truth, left out of the mAP mean.
    pub excluded_from_map: Vec<String>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new([
            "Class",
            "Images",
            "Instances",
            "TP",
            "FP",
            "FN",
            "Precision",
            "Recall",
            "F1",
            "mAP50",
        ]);
        let a = &self.all;
        t.push_row([
            "all".to_string(),
            a.images.to_string(),
            a.instances.to_string(),
            a.counts.tp.to_string(),
            a.counts.fp.to_string(),
            a.counts.fn_.to_string(),
            fmt_metric(a.precision),
            fmt_metric(a.recall),
            fmt_metric(a.f1),
            fmt_metric(a.map50),
        ]);
        for c in &self.classes {
            t.push_row([
                c.name.clone(),
                c.images.to_string(),
                c.instances.to_string(),
                c.counts.tp.to_string(),
                c.counts.fp.to_string(),
                c.counts.fn_.to_string(),
                fmt_metric(c.precision),
                fmt_metric(c.recall),
                fmt_metric(c.f1),
                c.ap50.map_or_else(|| "-".to_string(), fmt_metric),
            ]);
        }
        t
    }
}

/// Evaluates in-memory records.
///
/// P/R/F1 use only detections at or above `conf_thresh`; AP uses every
/// detection. Ignore-flagged ground truth applies to all classes.
pub fn evaluate_records(
    class_names: &[String],
    total_images: usize,
    gts: &[GroundTruthRecord],
    dets: &[DetectionRecord],
    config: EvalConfig,
) -> Result<EvalReport> {
    config.validate()?;
    let k = class_names.len();
    let counts = confusion_at_threshold(gts, dets, k, config.iou_thresh, config.conf_thresh)?;

    let per_class: Vec<Result<ClassEval>> = (0..k)
        .into_par_iter()
        .map(|c| {
            let class = ClassId(c);
            let class_gts: Vec<GroundTruthRecord> = gts
                .iter()
                .filter(|g| g.ignore || g.class_id == class)
                .cloned()
                .collect();
            let class_dets: Vec<DetectionRecord> = dets
                .iter()
                .filter(|d| d.class_id() == class)
                .cloned()
                .collect();
            let curve = pr_curve(class, &class_gts, &class_dets, config.iou_thresh)?;
            let mut images: Vec<&str> = class_gts
                .iter()
                .filter(|g| !g.ignore)
                .map(|g| g.image_id.as_str())
                .collect();
            images.sort_unstable();
            images.dedup();
            let cc = counts[c];
            Ok(ClassEval {
                class_id: class,
                name: class_names[c].clone(),
                images: images.len(),
                instances: curve.num_gt,
                counts: cc,
                precision: cc.precision(),
                recall: cc.recall(),
                f1: cc.f1(),
                ap50: (curve.num_gt > 0).then(|| average_precision(&curve)),
            })
        })
        .collect();
    let classes = per_class.into_iter().collect::<Result<Vec<_>>>()?;

    let aps: Vec<Option<f64>> = classes.iter().map(|c| c.ap50).collect();
    let map = mean_ap(&aps)?;
    let pooled: ConfusionCounts = counts.iter().copied().sum();
    let (p, r) = (pooled.precision(), pooled.recall());
    let all = AllClassesEval {
        images: total_images,
        instances: classes.iter().map(|c| c.instances).sum(),
        counts: pooled,
        precision: p,
        recall: r,
        f1: f1(p, r),
        map50: map.value,
    };
    let excluded_from_map = map
        .excluded
        .iter()
        .map(|&i| class_names[i].clone())
        .collect::<Vec<_>>();
    for name in &excluded_from_map {
        log::warn!("class {name} has no ground-truth instances and is left out of mAP");
    }
    Ok(EvalReport {
        config,
        classes,
        all,
        excluded_from_map,
    })
}

/// Evaluates a converted split against `<detections>/<image_id>.txt`
/// prediction files.
pub fn evaluate(
    manifest: &DatasetManifest,
    detections: &Path,
    config: EvalConfig,
) -> Result<EvalReport> {
    config.validate()?;
    let missing: Vec<String> = manifest
        .images
        .iter()
        .filter(|e| !detections.join(format!("{}.txt", e.image_id)).is_file())
        .map(|e| e.image_id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingDetections(missing));
    }

    let loaded: Vec<(Vec<GroundTruthRecord>, Vec<DetectionRecord>)> = manifest
        .images
        .par_iter()
        .map(|entry| {
            let gts = load_ground_truth(manifest, entry)?;
            let path = detections.join(format!("{}.txt", entry.image_id));
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let dets = parse_detections(&text, entry.dims, &entry.image_id, manifest.num_classes())
                .map_err(|e| e.with_source_name(path.display().to_string()))?;
            Ok((gts, dets))
        })
        .collect::<Result<_>>()?;
    let (gts, dets): (Vec<_>, Vec<_>) = loaded.into_iter().unzip();
    let gts: Vec<GroundTruthRecord> = gts.into_iter().flatten().collect();
    let dets: Vec<DetectionRecord> = dets.into_iter().flatten().collect();
    evaluate_records(
        &manifest.class_names,
        manifest.images.len(),
        &gts,
        &dets,
        config,
    )
}
