use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::annotation::{ClassId, DetectionRecord, GroundTruthRecord};
use crate::error::{Error, Result};
use crate::geometry::iou;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatchKind {
    TruePositive,
    FalsePositive,
    /// Overlaps an ignore region; counted as neither TP nor FP.
    Ignored,
}

/// Outcome for one detection. Indices refer to the input slices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchOutcome {
    pub detection: usize,
    pub ground_truth: Option<usize>,
    /// Best overlap with an unmatched scorable ground truth (or with the
    /// ignore region, for ignored detections).
    pub iou: f64,
    pub kind: MatchKind,
}

pub(crate) fn check_iou_thresh(t: f64) -> Result<()> {
    if t > 0.0 && t <= 1.0 {
        Ok(())
    } else {
        Err(Error::Contract(format!(
            "IoU threshold {t} is outside (0, 1]"
        )))
    }
}

/// Greedy matching for one image and one class.
///
/// Detections are visited by descending confidence (ties by input order).
/// Each takes the unmatched scorable ground truth of highest IoU (ties by
/// lowest index) when that IoU reaches `iou_thresh`. Otherwise a detection
/// overlapping an ignore region at `iou_thresh` or more is ignored, and
/// anything left is a false positive. The result is indexed like `dets`.
pub fn match_class_image(
    gts: &[GroundTruthRecord],
    dets: &[DetectionRecord],
    iou_thresh: f64,
) -> Result<Vec<MatchOutcome>> {
    check_iou_thresh(iou_thresh)?;
    let key = dets
        .first()
        .map(|d| (d.image_id(), Some(d.class_id())))
        .or_else(|| {
            gts.first()
                .map(|g| (g.image_id.as_str(), (!g.ignore).then_some(g.class_id)))
        });
    if let Some((image, mut class)) = key {
        for g in gts {
            if g.image_id != image {
                return Err(Error::Contract(format!(
                    "mixed image ids {image:?} and {:?}",
                    g.image_id
                )));
            }
            if g.ignore {
                continue;
            }
            match class {
                Some(c) if c != g.class_id => {
                    return Err(Error::Contract(format!(
                        "mixed class ids {c} and {}",
                        g.class_id
                    )))
                }
                _ => class = Some(g.class_id),
            }
        }
        for d in dets {
            if d.image_id() != image {
                return Err(Error::Contract(format!(
                    "mixed image ids {image:?} and {:?}",
                    d.image_id()
                )));
            }
            if class.is_some_and(|c| c != d.class_id()) {
                return Err(Error::Contract(format!(
                    "mixed class ids {} and {}",
                    class.unwrap(),
                    d.class_id()
                )));
            }
        }
    }
    let g: Vec<&GroundTruthRecord> = gts.iter().collect();
    let d: Vec<&DetectionRecord> = dets.iter().collect();
    Ok(match_refs(&g, &d, iou_thresh))
}

/// Descending-confidence order, stable on input position.
pub(crate) fn confidence_order(dets: &[&DetectionRecord]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].confidence().total_cmp(&dets[a].confidence()));
    order
}

pub(crate) fn match_refs(
    gts: &[&GroundTruthRecord],
    dets: &[&DetectionRecord],
    iou_thresh: f64,
) -> Vec<MatchOutcome> {
    let mut taken = vec![false; gts.len()];
    let mut out: Vec<Option<MatchOutcome>> = vec![None; dets.len()];
    for di in confidence_order(dets) {
        let det_box = dets[di].bbox();
        let mut best: Option<(usize, f64)> = None;
        for (gi, g) in gts.iter().enumerate() {
            if g.ignore || taken[gi] {
                continue;
            }
            let o = iou(det_box, &g.bbox);
            if best.is_none_or(|(_, b)| o > b) {
                best = Some((gi, o));
            }
        }
        let best_iou = best.map_or(0.0, |(_, o)| o);
        let outcome = match best {
            Some((gi, o)) if o >= iou_thresh => {
                taken[gi] = true;
                MatchOutcome {
                    detection: di,
                    ground_truth: Some(gi),
                    iou: o,
                    kind: MatchKind::TruePositive,
                }
            }
            _ => {
                let ignore_iou = gts
                    .iter()
                    .filter(|g| g.ignore)
                    .map(|g| iou(det_box, &g.bbox))
                    .fold(0.0, f64::max);
                if ignore_iou >= iou_thresh {
                    MatchOutcome {
                        detection: di,
                        ground_truth: None,
                        iou: ignore_iou,
                        kind: MatchKind::Ignored,
                    }
                } else {
                    MatchOutcome {
                        detection: di,
                        ground_truth: None,
                        iou: best_iou,
                        kind: MatchKind::FalsePositive,
                    }
                }
            }
        };
        out[di] = Some(outcome);
    }
    out.into_iter()
        .map(|o| o.expect("every detection visited"))
        .collect()
}

pub(crate) struct Group<'a> {
    pub gts: Vec<&'a GroundTruthRecord>,
    pub dets: Vec<&'a DetectionRecord>,
    /// Position of each entry of `dets` in the original slice.
    pub det_pos: Vec<usize>,
}

/// Buckets records by (image, class), preserving input order inside each
/// bucket. Ignore regions are copied into every class bucket of their image.
pub(crate) fn group_by_image_class<'a>(
    gts: &'a [GroundTruthRecord],
    dets: &'a [DetectionRecord],
    num_classes: usize,
) -> BTreeMap<(&'a str, ClassId), Group<'a>> {
    fn bucket<'m, 'a>(
        groups: &'m mut BTreeMap<(&'a str, ClassId), Group<'a>>,
        image: &'a str,
        class: ClassId,
    ) -> &'m mut Group<'a> {
        groups.entry((image, class)).or_insert_with(|| Group {
            gts: Vec::new(),
            dets: Vec::new(),
            det_pos: Vec::new(),
        })
    }

    let mut groups = BTreeMap::new();
    for g in gts {
        if g.ignore {
            for c in 0..num_classes {
                bucket(&mut groups, &g.image_id, ClassId(c)).gts.push(g);
            }
        } else {
            bucket(&mut groups, &g.image_id, g.class_id).gts.push(g);
        }
    }
    for (i, d) in dets.iter().enumerate() {
        let g = bucket(&mut groups, d.image_id(), d.class_id());
        g.dets.push(d);
        g.det_pos.push(i);
    }
    groups
}
