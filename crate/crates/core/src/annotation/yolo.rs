//! YOLO label grammar (`class cx cy w h`), prediction grammar
//! (`class confidence cx cy w h`) and class-agnostic ignore sidecars
//! (`cx cy w h`). All coordinates are normalized.

use super::{CategoryAction, ClassId, ClassMap, DetectionRecord, GroundTruthRecord};
use crate::error::{Error, Result};
use crate::geometry::{ImageDims, NormalizedBox};

/// Decimal digits written for normalized coordinates.
pub const LABEL_DECIMALS: usize = 8;

const SRC: &str = "<labels>";

fn fields(line: &str) -> Vec<&str> {
    line.split_whitespace().collect()
}

fn number(field: &str, what: &str, line_no: usize) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| Error::parse(SRC, line_no, format!("{what} is not a number: {field:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(SRC, line_no, format!("{what} is not finite")));
    }
    Ok(v)
}

fn class_field(field: &str, num_classes: usize, line_no: usize) -> Result<ClassId> {
    let id: usize = field.parse().map_err(|_| {
        Error::parse(
            SRC,
            line_no,
            format!("class is not a non-negative integer: {field:?}"),
        )
    })?;
    if id >= num_classes {
        return Err(Error::parse(
            SRC,
            line_no,
            format!("class {id} is out of range for {num_classes} classes"),
        ));
    }
    Ok(ClassId(id))
}

fn normalized(coords: &[&str], line_no: usize) -> Result<NormalizedBox> {
    let cx = number(coords[0], "cx", line_no)?;
    let cy = number(coords[1], "cy", line_no)?;
    let w = number(coords[2], "w", line_no)?;
    let h = number(coords[3], "h", line_no)?;
    NormalizedBox::new(cx, cy, w, h).map_err(|e| Error::parse(SRC, line_no, e.to_string()))
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty())
}

/// Parses a per-image YOLO label file into absolute boxes.
pub fn parse_yolo_labels(
    text: &str,
    dims: ImageDims,
    image_id: &str,
    num_classes: usize,
) -> Result<Vec<GroundTruthRecord>> {
    content_lines(text)
        .map(|(n, line)| {
            let f = fields(line);
            if f.len() != 5 {
                return Err(Error::parse(
                    SRC,
                    n,
                    format!("expected 5 fields, found {}", f.len()),
                ));
            }
            let class = class_field(f[0], num_classes, n)?;
            let bbox = normalized(&f[1..], n)?.to_absolute(dims);
            Ok(GroundTruthRecord::new(image_id, class, bbox))
        })
        .collect()
}

/// Parses a per-image prediction file.
pub fn parse_detections(
    text: &str,
    dims: ImageDims,
    image_id: &str,
    num_classes: usize,
) -> Result<Vec<DetectionRecord>> {
    content_lines(text)
        .map(|(n, line)| {
            let f = fields(line);
            if f.len() != 6 {
                return Err(Error::parse(
                    SRC,
                    n,
                    format!("expected 6 fields, found {}", f.len()),
                ));
            }
            let class = class_field(f[0], num_classes, n)?;
            let confidence = number(f[1], "confidence", n)?;
            if !(0.0..=1.0).contains(&confidence) {
                return Err(Error::parse(
                    SRC,
                    n,
                    format!("confidence {confidence} is outside [0, 1]"),
                ));
            }
            let bbox = normalized(&f[2..], n)?.to_absolute(dims);
            DetectionRecord::new(image_id, class, confidence, bbox)
                .map_err(|e| Error::parse(SRC, n, e.to_string()))
        })
        .collect()
}

/// Parses an ignore sidecar into ignore-flagged records.
pub fn parse_ignore_regions(
    text: &str,
    dims: ImageDims,
    image_id: &str,
) -> Result<Vec<GroundTruthRecord>> {
    content_lines(text)
        .map(|(n, line)| {
            let f = fields(line);
            if f.len() != 4 {
                return Err(Error::parse(
                    SRC,
                    n,
                    format!("expected 4 fields, found {}", f.len()),
                ));
            }
            let bbox = normalized(&f, n)?.to_absolute(dims);
            Ok(GroundTruthRecord::ignore_region(image_id, bbox))
        })
        .collect()
}

fn coords(n: &NormalizedBox) -> String {
    let p = LABEL_DECIMALS;
    format!("{:.p$} {:.p$} {:.p$} {:.p$}", n.cx(), n.cy(), n.w(), n.h())
}

/// One label line, without the trailing newline. `None` writes an ignore
/// sidecar line (no class column).
pub fn format_label_line(class: Option<ClassId>, n: &NormalizedBox) -> String {
    match class {
        Some(c) => format!("{} {}", c.0, coords(n)),
        None => coords(n),
    }
}

/// Remaps the class column of an already-converted label file.
///
/// Lines whose class maps to drop or ignore are removed. Output is
/// re-emitted at [`LABEL_DECIMALS`] so an identity map over our own output
/// leaves the bytes unchanged.
pub fn remap_yolo_labels(text: &str, map: &ClassMap) -> Result<String> {
    let mut out = String::new();
    for (n, line) in content_lines(text) {
        let f = fields(line);
        if f.len() != 5 {
            return Err(Error::parse(
                SRC,
                n,
                format!("expected 5 fields, found {}", f.len()),
            ));
        }
        let source: u32 = f[0].parse().map_err(|_| {
            Error::parse(
                SRC,
                n,
                format!("class is not a non-negative integer: {:?}", f[0]),
            )
        })?;
        let action = map.action(source).ok_or_else(|| {
            Error::parse(
                SRC,
                n,
                format!("class {source} is not covered by the class map"),
            )
        })?;
        if let CategoryAction::Keep(target) = action {
            out.push_str(&format_label_line(Some(target), &normalized(&f[1..], n)?));
            out.push('\n');
        }
    }
    Ok(out)
}

/// Renders kept boxes in label-file form.
pub(crate) fn render_labels<'a>(
    rows: impl IntoIterator<Item = (Option<ClassId>, &'a NormalizedBox)>,
) -> String {
    let mut out = String::new();
    for (class, n) in rows {
        out.push_str(&format_label_line(class, n));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d100() -> ImageDims {
        ImageDims::new(100., 100.).unwrap()
    }

    #[test]
    fn full_image_label() {
        let recs = parse_yolo_labels("0 0.5 0.5 1.0 1.0\n", d100(), "a", 4).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].class_id, ClassId(0));
        assert_eq!(recs[0].bbox.corners(), [0., 0., 100., 100.]);
        assert!(!recs[0].ignore);
    }

    #[test]
    fn empty_files() {
        assert!(parse_yolo_labels("", d100(), "a", 4).unwrap().is_empty());
        assert!(parse_detections("", d100(), "a", 4).unwrap().is_empty());
        assert!(parse_detections("\n\n", d100(), "a", 4).unwrap().is_empty());
    }

    #[test]
    fn label_range_and_shape_errors() {
        assert!(parse_yolo_labels("2 0.5 0.5 0.5 1.5", d100(), "a", 4).is_err());
        assert!(parse_yolo_labels("2 0.5 0.5 0.5", d100(), "a", 4).is_err());
        assert!(parse_yolo_labels("4 0.5 0.5 0.5 0.5", d100(), "a", 4).is_err());
        assert!(parse_yolo_labels("-1 0.5 0.5 0.5 0.5", d100(), "a", 4).is_err());
        let e =
            parse_yolo_labels("0 0.5 0.5 0.5 0.5\n0 nan 0.5 0.5 0.5", d100(), "a", 4).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn detection_line() {
        let d = parse_detections("0 0.90 0.5 0.5 0.2 0.2", d100(), "a", 4).unwrap();
        assert_eq!(d[0].confidence(), 0.9);
        let c = d[0].bbox().corners();
        let want = [40., 40., 60., 60.];
        for (x, y) in c.iter().zip(want) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn detection_confidence_range() {
        assert!(parse_detections("1 1.50 0.5 0.5 0.2 0.2", d100(), "a", 4).is_err());
        assert!(parse_detections("1 -0.1 0.5 0.5 0.2 0.2", d100(), "a", 4).is_err());
        assert!(parse_detections("1 0.5 0.5 0.2 0.2", d100(), "a", 4).is_err());
    }

    #[test]
    fn identity_remap_is_idempotent() {
        let text = "0 0.12345678 0.50000000 0.25000000 0.10000000\n3 0.90000000 0.10000000 0.01000000 0.02000000\n";
        let map = ClassMap::identity((0..4).map(|i| format!("c{i}")).collect()).unwrap();
        assert_eq!(remap_yolo_labels(text, &map).unwrap(), text);
    }

    #[test]
    fn remap_drops_and_renumbers() {
        let map = ClassMap::new(
            vec!["x".into()],
            vec![crate::annotation::ClassMapping {
                source: 2,
                target: 0,
            }],
            [0, 1],
            [],
        )
        .unwrap();
        let out = remap_yolo_labels("1 0.5 0.5 0.1 0.1\n2 0.5 0.5 0.1 0.1\n", &map).unwrap();
        assert_eq!(out, "0 0.50000000 0.50000000 0.10000000 0.10000000\n");
    }

    #[test]
    fn ignore_sidecar() {
        let recs = parse_ignore_regions("0.5 0.5 1.0 1.0\n", d100(), "a").unwrap();
        assert!(recs[0].ignore);
        assert!(parse_ignore_regions("0 0.5 0.5 1.0 1.0\n", d100(), "a").is_err());
    }
}
