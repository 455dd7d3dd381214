//! VisDrone annotation lines:
//! `<left>,<top>,<width>,<height>,<score>,<category>,<truncation>,<occlusion>`.

use super::{CategoryAction, ClassMap, GroundTruthRecord};
use crate::error::{Error, Result};
use crate::geometry::BoundingBox;

/// VisDrone category ids and names, index = id.
pub const VISDRONE_CATEGORIES: [&str; 12] = [
    "ignored-regions",
    "pedestrian",
    "people",
    "bicycle",
    "car",
    "van",
    "truck",
    "tricycle",
    "awning-tricycle",
    "bus",
    "motor",
    "others",
];

const FIELD_NAMES: [&str; 8] = [
    "left",
    "top",
    "width",
    "height",
    "score",
    "category",
    "truncation",
    "occlusion",
];

/// Parses one annotation line. Returns `Ok(None)` for dropped categories.
///
/// `line_no` is 1-based and only used for error reporting.
pub fn parse_visdrone_line(
    line: &str,
    line_no: usize,
    image_id: &str,
    map: &ClassMap,
) -> Result<Option<GroundTruthRecord>> {
    let err = |msg: String| Error::parse("<visdrone>", line_no, msg);

    let trimmed = line.trim();
    let body = trimmed.strip_suffix(',').unwrap_or(trimmed);
    let fields: Vec<&str> = body.split(',').map(str::trim).collect();
    if fields.len() != FIELD_NAMES.len() {
        return Err(err(format!(
            "expected 8 comma-separated fields, found {}",
            fields.len()
        )));
    }
    let mut values = [0i64; 8];
    for (i, field) in fields.iter().enumerate() {
        values[i] = field
            .parse()
            .map_err(|_| err(format!("{} is not an integer: {field:?}", FIELD_NAMES[i])))?;
    }
    let [left, top, width, height, _score, category, _trunc, _occl] = values;
    if width <= 0 || height <= 0 {
        return Err(err(format!("non-positive box size {width}x{height}")));
    }
    let category =
        u32::try_from(category).map_err(|_| err(format!("negative category {category}")))?;

    let action = map.action(category).ok_or_else(|| {
        err(format!(
            "category {category} is not covered by the class map"
        ))
    })?;
    let bbox = BoundingBox::from_ltwh(left as f64, top as f64, width as f64, height as f64)
        .map_err(|e| err(e.to_string()))?;
    Ok(match action {
        CategoryAction::Drop => None,
        CategoryAction::Ignore => Some(GroundTruthRecord::ignore_region(image_id, bbox)),
        CategoryAction::Keep(class_id) => Some(GroundTruthRecord::new(image_id, class_id, bbox)),
    })
}

/// Parses a whole annotation file; blank lines are skipped.
pub fn parse_visdrone_file(
    text: &str,
    source_name: &str,
    image_id: &str,
    map: &ClassMap,
) -> Result<Vec<GroundTruthRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec = parse_visdrone_line(line, i + 1, image_id, map)
            .map_err(|e| e.with_source_name(source_name))?;
        out.extend(rec);
    }
    Ok(out)
}
