use serde::{Deserialize, Serialize};

use super::matching::{check_iou_thresh, group_by_image_class, match_refs, MatchKind};
use crate::annotation::{DetectionRecord, GroundTruthRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn new(tp: usize, fp: usize, fn_: usize) -> Self {
        Self { tp, fp, fn_ }
    }

    pub fn precision(&self) -> f64 {
        precision(self)
    }

    pub fn recall(&self) -> f64 {
        recall(self)
    }

    pub fn f1(&self) -> f64 {
        f1(self.precision(), self.recall())
    }
}

impl std::ops::Add for ConfusionCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self::new(self.tp + o.tp, self.fp + o.fp, self.fn_ + o.fn_)
    }
}

impl std::iter::Sum for ConfusionCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), |a, b| a + b)
    }
}

/// TP / (TP + FP), or 0 with no predictions.
pub fn precision(c: &ConfusionCounts) -> f64 {
    ratio(c.tp, c.tp + c.fp)
}

/// TP / (TP + FN), or 0 with no ground truth.
pub fn recall(c: &ConfusionCounts) -> f64 {
    ratio(c.tp, c.tp + c.fn_)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1(p: f64, r: f64) -> f64 {
    if p + r <= 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Per-class TP/FP/FN with detections below `conf_thresh` discarded before
/// matching. Index of the result is the class id.
pub fn confusion_at_threshold(
    gts: &[GroundTruthRecord],
    dets: &[DetectionRecord],
    num_classes: usize,
    iou_thresh: f64,
    conf_thresh: f64,
) -> Result<Vec<ConfusionCounts>> {
    check_iou_thresh(iou_thresh)?;
    if !(0.0..=1.0).contains(&conf_thresh) {
        return Err(Error::Contract(format!(
            "confidence threshold {conf_thresh} is outside [0, 1]"
        )));
    }
    if let Some(bad) = gts
        .iter()
        .filter(|g| !g.ignore)
        .map(|g| g.class_id)
        .chain(dets.iter().map(|d| d.class_id()))
        .find(|c| c.0 >= num_classes)
    {
        return Err(Error::Contract(format!(
            "class {bad} is out of range for {num_classes} classes"
        )));
    }
    let kept: Vec<DetectionRecord> = dets
        .iter()
        .filter(|d| d.confidence() >= conf_thresh)
        .cloned()
        .collect();
    let mut counts = vec![ConfusionCounts::default(); num_classes];
    for ((_, class), group) in group_by_image_class(gts, &kept, num_classes) {
        let c = &mut counts[class.0];
        let scorable = group.gts.iter().filter(|g| !g.ignore).count();
        let outcomes = match_refs(&group.gts, &group.dets, iou_thresh);
        let tp = outcomes
            .iter()
            .filter(|o| o.kind == MatchKind::TruePositive)
            .count();
        c.tp += tp;
        c.fp += outcomes
            .iter()
            .filter(|o| o.kind == MatchKind::FalsePositive)
            .count();
        c.fn_ += scorable - tp;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::ClassId;
    use crate::geometry::BoundingBox;

    fn bx(x: f64) -> BoundingBox {
        BoundingBox::new(x, 0., x + 10., 10.).unwrap()
    }

    #[test]
    fn formulas() {
        assert_eq!(precision(&ConfusionCounts::new(3, 1, 0)), 0.75);
        assert_eq!(precision(&ConfusionCounts::new(0, 0, 5)), 0.0);
        assert_eq!(recall(&ConfusionCounts::new(3, 0, 1)), 0.75);
        assert_eq!(recall(&ConfusionCounts::new(0, 4, 0)), 0.0);
        assert_eq!(f1(0.5, 0.5), 0.5);
        assert_eq!(f1(1.0, 0.0), 0.0);
        assert_eq!(f1(0.0, 0.0), 0.0);
        // 2 * 0.763 * 0.485 / 1.248
        assert!((f1(0.763, 0.485) - 0.593_036_858_974_359).abs() < 1e-12);
    }

    #[test]
    fn threshold_precedes_matching() {
        let gts = [
            GroundTruthRecord::new("a", ClassId(0), bx(0.)),
            GroundTruthRecord::new("a", ClassId(0), bx(100.)),
        ];
        let dets = [
            DetectionRecord::new("a", ClassId(0), 0.9, bx(0.)).unwrap(),
            DetectionRecord::new("a", ClassId(0), 0.15, bx(100.)).unwrap(),
        ];
        let c = confusion_at_threshold(&gts, &dets, 1, 0.5, 0.2).unwrap();
        assert_eq!(c[0], ConfusionCounts::new(1, 0, 1));
    }

    #[test]
    fn degenerate_inputs() {
        let gts: Vec<_> = (0..3)
            .map(|i| GroundTruthRecord::new("a", ClassId(0), bx(i as f64 * 50.)))
            .collect();
        assert_eq!(
            confusion_at_threshold(&gts, &[], 1, 0.5, 0.2).unwrap()[0],
            ConfusionCounts::new(0, 0, 3)
        );
        let dets: Vec<_> = (0..2)
            .map(|i| DetectionRecord::new("a", ClassId(0), 0.5, bx(i as f64 * 50.)).unwrap())
            .collect();
        assert_eq!(
            confusion_at_threshold(&[], &dets, 1, 0.5, 0.2).unwrap()[0],
            ConfusionCounts::new(0, 2, 0)
        );
        assert!(confusion_at_threshold(&[], &dets, 1, 0.5, 1.2).is_err());
    }
}
