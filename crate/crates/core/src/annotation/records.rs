use serde::{Deserialize, Serialize};

use super::ClassId;
use crate::error::{Error, Result};
use crate::geometry::BoundingBox;

/// One annotated object.
///
/// Ignore regions are class-agnostic: when `ignore` is set the record applies
/// to whichever class is being scored and `class_id` carries no meaning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthRecord {
    pub image_id: String,
    pub class_id: ClassId,
    pub bbox: BoundingBox,
    pub ignore: bool,
}

impl GroundTruthRecord {
    pub fn new(image_id: impl Into<String>, class_id: ClassId, bbox: BoundingBox) -> Self {
        Self {
            image_id: image_id.into(),
            class_id,
            bbox,
            ignore: false,
        }
    }

    pub fn ignore_region(image_id: impl Into<String>, bbox: BoundingBox) -> Self {
        Self {
            image_id: image_id.into(),
            class_id: ClassId(0),
            bbox,
            ignore: true,
        }
    }
}

/// One scored prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    image_id: String,
    class_id: ClassId,
    confidence: f64,
    bbox: BoundingBox,
}

impl DetectionRecord {
    pub fn new(
        image_id: impl Into<String>,
        class_id: ClassId,
        confidence: f64,
        bbox: BoundingBox,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::Domain(format!(
                "confidence {confidence} is outside [0, 1]"
            )));
        }
        Ok(Self {
            image_id: image_id.into(),
            class_id,
            confidence,
            bbox,
        })
    }

    pub fn image_id(&self) -> &str {
        &self.image_id
    }

    pub fn class_id(&self) -> ClassId {
        self.class_id
    }

    pub fn confidence(&self) -> f64 {
        self.confidence
    }

    pub fn bbox(&self) -> &BoundingBox {
        &self.bbox
    }

    /// Same detection with a different score.
    pub fn with_confidence(&self, confidence: f64) -> Result<Self> {
        Self::new(self.image_id.clone(), self.class_id, confidence, self.bbox)
    }
}
