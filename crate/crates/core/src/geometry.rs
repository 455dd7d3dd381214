//! Axis-aligned boxes, YOLO-style normalized boxes and intersection over union.
//!
//! Coordinates are continuous reals. Area is `(x_max - x_min) * (y_max - y_min)`
//! with no "+1" pixel correction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Image size in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageDims {
    width: f64,
    height: f64,
}

impl ImageDims {
    pub fn new(width: f64, height: f64) -> Result<Self> {
        if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
            return Err(Error::InvalidDims { width, height });
        }
        Ok(Self { width, height })
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }
}

/// Box in absolute pixel corner coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    x_min: f64,
    y_min: f64,
    x_max: f64,
    y_max: f64,
}

impl BoundingBox {
    /// Zero-area boxes are allowed; negative extents and non-finite values are not.
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        let finite = [x_min, y_min, x_max, y_max].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidBox(format!(
                "non-finite coordinate in ({x_min}, {y_min}, {x_max}, {y_max})"
            )));
        }
        if x_min > x_max || y_min > y_max {
            return Err(Error::InvalidBox(format!(
                "negative extent in ({x_min}, {y_min}, {x_max}, {y_max})"
            )));
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    /// Builds a box from a top-left corner and a size, as in VisDrone annotations.
    pub fn from_ltwh(left: f64, top: f64, width: f64, height: f64) -> Result<Self> {
        Self::new(left, top, left + width, top + height)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn y_min(&self) -> f64 {
        self.y_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn corners(&self) -> [f64; 4] {
        [self.x_min, self.y_min, self.x_max, self.y_max]
    }

    /// Clips the box to `[0, width] x [0, height]`.
    pub fn clamp_to(&self, dims: ImageDims) -> Self {
        let cx = |v: f64| v.clamp(0.0, dims.width);
        let cy = |v: f64| v.clamp(0.0, dims.height);
        Self {
            x_min: cx(self.x_min),
            y_min: cy(self.y_min),
            x_max: cx(self.x_max),
            y_max: cy(self.y_max),
        }
    }

    pub fn intersection_area(&self, other: &Self) -> f64 {
        let w = self.x_max.min(other.x_max) - self.x_min.max(other.x_min);
        let h = self.y_max.min(other.y_max) - self.y_min.max(other.y_min);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    pub fn to_normalized(&self, dims: ImageDims) -> Result<NormalizedBox> {
        to_normalized(self, dims)
    }
}

/// Center/size box as fractions of the image dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedBox {
    cx: f64,
    cy: f64,
    w: f64,
    h: f64,
}

impl NormalizedBox {
    pub fn new(cx: f64, cy: f64, w: f64, h: f64) -> Result<Self> {
        for (component, value) in [("cx", cx), ("cy", cy), ("w", w), ("h", h)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::Conversion { component, value });
            }
        }
        Ok(Self { cx, cy, w, h })
    }

    pub fn cx(&self) -> f64 {
        self.cx
    }

    pub fn cy(&self) -> f64 {
        self.cy
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn to_absolute(&self, dims: ImageDims) -> BoundingBox {
        from_normalized(self, dims)
    }
}

/// Intersection area over union area; 0 when the union is empty.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let inter = a.intersection_area(b);
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

pub fn to_normalized(b: &BoundingBox, dims: ImageDims) -> Result<NormalizedBox> {
    let cx = (b.x_min + b.x_max) / (2.0 * dims.width);
    let cy = (b.y_min + b.y_max) / (2.0 * dims.height);
    let w = b.width() / dims.width;
    let h = b.height() / dims.height;
    NormalizedBox::new(cx, cy, w, h)
}

pub fn from_normalized(n: &NormalizedBox, dims: ImageDims) -> BoundingBox {
    let half_w = n.w * dims.width / 2.0;
    let half_h = n.h * dims.height / 2.0;
    let cx = n.cx * dims.width;
    let cy = n.cy * dims.height;
    BoundingBox {
        x_min: cx - half_w,
        y_min: cy - half_h,
        x_max: cx + half_w,
        y_max: cy + half_h,
    }
}
