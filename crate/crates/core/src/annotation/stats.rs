use std::fs;

use serde::{Deserialize, Serialize};

use super::{
    parse_ignore_regions, parse_yolo_labels, ClassId, DatasetManifest, GroundTruthRecord,
    ManifestEntry,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassStats {
    pub class_id: ClassId,
    pub name: String,
    /// Images containing at least one instance of the class.
    pub images: usize,
    pub instances: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub split: String,
    pub per_class: Vec<ClassStats>,
    pub total_images: usize,
    pub total_instances: usize,
}

impl DatasetStats {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("stats serialize");
        s.push('\n');
        s
    }
}

/// Labels plus ignore regions for one manifest entry.
pub fn load_ground_truth(
    manifest: &DatasetManifest,
    entry: &ManifestEntry,
) -> Result<Vec<GroundTruthRecord>> {
    let path = manifest.labels_path(entry);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut recs = parse_yolo_labels(&text, entry.dims, &entry.image_id, manifest.num_classes())
        .map_err(|e| e.with_source_name(path.display().to_string()))?;
    let ignore = manifest.ignore_path(entry);
    match fs::read_to_string(&ignore) {
        Ok(text) => recs.extend(
            parse_ignore_regions(&text, entry.dims, &entry.image_id)
                .map_err(|e| e.with_source_name(ignore.display().to_string()))?,
        ),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
        Err(e) => return Err(Error::io(&ignore, e)),
    }
    Ok(recs)
}

/// Per-class image and instance counts. Ignore regions are not counted.
pub fn dataset_stats(manifest: &DatasetManifest) -> Result<DatasetStats> {
    let k = manifest.num_classes();
    let mut images = vec![0usize; k];
    let mut instances = vec![0usize; k];
    for entry in &manifest.images {
        let mut present = vec![false; k];
        for rec in load_ground_truth(manifest, entry)?
            .iter()
            .filter(|r| !r.ignore)
        {
            instances[rec.class_id.0] += 1;
            present[rec.class_id.0] = true;
        }
        for (c, p) in present.iter().enumerate() {
            images[c] += usize::from(*p);
        }
    }
    let per_class = manifest
        .class_names
        .iter()
        .enumerate()
        .map(|(c, name)| ClassStats {
            class_id: ClassId(c),
            name: name.clone(),
            images: images[c],
            instances: instances[c],
        })
        .collect();
    Ok(DatasetStats {
        split: manifest.split.clone(),
        per_class,
        total_images: manifest.images.len(),
        total_instances: instances.iter().sum(),
    })
}
