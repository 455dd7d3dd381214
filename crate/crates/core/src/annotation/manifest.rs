use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ImageDims;

/// Bookkeeping for one split of a YOLO-layout dataset.
///
/// Label paths are stored relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub split: String,
    pub class_names: Vec<String>,
    pub images: Vec<ManifestEntry>,
    #[serde(skip)]
    root: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub image_id: String,
    #[serde(flatten, with = "dims_serde")]
    pub dims: ImageDims,
    pub labels: String,
}

mod dims_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::geometry::ImageDims;

    #[derive(Serialize, Deserialize)]
    struct Raw {
        width: f64,
        height: f64,
    }

    pub fn serialize<S: Serializer>(d: &ImageDims, s: S) -> Result<S::Ok, S::Error> {
        Raw {
            width: d.width(),
            height: d.height(),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ImageDims, D::Error> {
        let raw = Raw::deserialize(d)?;
        ImageDims::new(raw.width, raw.height).map_err(serde::de::Error::custom)
    }
}

impl DatasetManifest {
    pub fn new(
        split: impl Into<String>,
        class_names: Vec<String>,
        images: Vec<ManifestEntry>,
        root: impl Into<PathBuf>,
    ) -> Result<Self> {
        let m = Self {
            split: split.into(),
            class_names,
            images,
            root: root.into(),
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for e in &self.images {
            if !seen.insert(e.image_id.as_str()) {
                return Err(Error::Contract(format!(
                    "duplicate image id {:?} in split {}",
                    e.image_id, self.split
                )));
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m: Self = serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        m.root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    /// Directory relative label paths resolve against.
    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn labels_path(&self, entry: &ManifestEntry) -> PathBuf {
        self.root.join(&entry.labels)
    }

    /// Ignore sidecar next to the label file; may not exist.
    pub fn ignore_path(&self, entry: &ManifestEntry) -> PathBuf {
        self.labels_path(entry).with_extension("ignore")
    }
}
