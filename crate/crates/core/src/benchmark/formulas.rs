use crate::error::{Error, Result};

/// Frames in one second of 30 FPS video.
pub const DEFAULT_FRAMES: f64 = 30.0;

/// Seconds needed to process `frames` frames at `fps`.
pub fn computational_time(fps: f64, frames: f64) -> Result<f64> {
    if !(fps > 0.0 && fps.is_finite()) {
        return Err(Error::Domain(format!("FPS must be positive, got {fps}")));
    }
    Ok(frames / fps)
}

/// `100 * (new - base) / base`; `None` when `base` is zero.
pub fn relative_improvement(new: f64, base: f64) -> Option<f64> {
    if base == 0.0 {
        None
    } else {
        Some(100.0 * (new - base) / base)
    }
}

/// Metric lost on an earlier task after later training. Negative values
/// mean backward transfer.
pub fn forgetting(before: f64, after: f64) -> f64 {
    before - after
}
