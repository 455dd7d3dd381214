#![allow(dead_code)]

pub mod oracle;

use std::path::PathBuf;

use vrubench::annotation::{ClassId, DetectionRecord, GroundTruthRecord};
use vrubench::geometry::BoundingBox;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("fixtures")
        .join(name)
}

fn bbox(c: &oracle::Corners) -> BoundingBox {
    BoundingBox::new(c[0], c[1], c[2], c[3]).unwrap()
}

/// Library records for a single-class oracle instance, image ids `im0..`.
pub fn to_records(images: &[oracle::Image]) -> (Vec<GroundTruthRecord>, Vec<DetectionRecord>) {
    let mut gts = Vec::new();
    let mut dets = Vec::new();
    for (i, im) in images.iter().enumerate() {
        let id = format!("im{i}");
        for g in &im.gts {
            gts.push(GroundTruthRecord::new(&id, ClassId(0), bbox(g)));
        }
        for d in &im.dets {
            dets.push(DetectionRecord::new(&id, ClassId(0), d.conf, bbox(&d.bbox)).unwrap());
        }
    }
    (gts, dets)
}
