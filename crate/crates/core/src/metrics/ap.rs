use serde::{Deserialize, Serialize};

use super::matching::{check_iou_thresh, group_by_image_class, match_refs, MatchKind};
use crate::annotation::{ClassId, DetectionRecord, GroundTruthRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub recall: f64,
    pub precision: f64,
    pub confidence: f64,
}

/// Cumulative precision/recall after each detection, in ranked order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    pub class_id: ClassId,
    /// Scorable ground-truth instances.
    pub num_gt: usize,
    pub points: Vec<PrPoint>,
}

/// Builds the ranked precision-recall sweep for one class over a whole
/// dataset.
///
/// Detections are matched per image with the greedy protocol; since greedy
/// matching visits detections by confidence, this labels each detection
/// exactly as an incremental sweep would. Detections absorbed by ignore
/// regions produce no point.
pub fn pr_curve(
    class_id: ClassId,
    gts: &[GroundTruthRecord],
    dets: &[DetectionRecord],
    iou_thresh: f64,
) -> Result<PrCurve> {
    check_iou_thresh(iou_thresh)?;
    if let Some(c) = gts
        .iter()
        .filter(|g| !g.ignore)
        .map(|g| g.class_id)
        .chain(dets.iter().map(|d| d.class_id()))
        .find(|&c| c != class_id)
    {
        return Err(Error::Contract(format!(
            "record of class {c} passed to the curve for class {class_id}"
        )));
    }
    let num_gt = gts.iter().filter(|g| !g.ignore).count();

    // (input position, confidence, is true positive); position breaks
    // confidence ties across images.
    let mut labelled: Vec<(usize, f64, bool)> = Vec::with_capacity(dets.len());
    // Every record is of `class_id`, so ignore regions only need to reach
    // that bucket.
    for group in group_by_image_class(gts, dets, class_id.0 + 1)
        .into_iter()
        .filter(|((_, c), _)| *c == class_id)
        .map(|(_, g)| g)
    {
        for o in match_refs(&group.gts, &group.dets, iou_thresh) {
            if o.kind != MatchKind::Ignored {
                labelled.push((
                    group.det_pos[o.detection],
                    group.dets[o.detection].confidence(),
                    o.kind == MatchKind::TruePositive,
                ));
            }
        }
    }
    labelled.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let (mut tp, mut fp) = (0usize, 0usize);
    let points = labelled
        .into_iter()
        .map(|(_, confidence, is_tp)| {
            if is_tp {
                tp += 1;
            } else {
                fp += 1;
            }
            PrPoint {
                recall: if num_gt == 0 {
                    0.0
                } else {
                    tp as f64 / num_gt as f64
                },
                precision: tp as f64 / (tp + fp) as f64,
                confidence,
            }
        })
        .collect();
    Ok(PrCurve {
        class_id,
        num_gt,
        points,
    })
}

/// All-point interpolated AP: the sum over recall increments of the step
/// width times the highest precision reached at that recall or beyond.
pub fn average_precision(curve: &PrCurve) -> f64 {
    let pts = &curve.points;
    let mut envelope = vec![0.0; pts.len()];
    let mut running = 0.0f64;
    for (i, p) in pts.iter().enumerate().rev() {
        running = running.max(p.precision);
        envelope[i] = running;
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for (p, env) in pts.iter().zip(&envelope) {
        if p.recall > prev_recall {
            ap += (p.recall - prev_recall) * env;
            prev_recall = p.recall;
        }
    }
    ap.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanAp {
    pub value: f64,
    /// Indices of classes left out because their AP is undefined.
    pub excluded: Vec<usize>,
}

/// Arithmetic mean over defined per-class APs (`None` = class without
/// ground truth).
pub fn mean_ap(aps: &[Option<f64>]) -> Result<MeanAp> {
    let defined: Vec<f64> = aps.iter().flatten().copied().collect();
    if defined.is_empty() {
        return Err(Error::NoScorableClasses);
    }
    let excluded = aps
        .iter()
        .enumerate()
        .filter(|(_, a)| a.is_none())
        .map(|(i, _)| i)
        .collect();
    Ok(MeanAp {
        value: defined.iter().sum::<f64>() / defined.len() as f64,
        excluded,
    })
}
