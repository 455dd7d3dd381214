//! Annotation and prediction file handling: VisDrone and YOLO grammars, class
//! remapping, dataset conversion and dataset statistics.

mod classmap;
mod convert;
mod dims;
mod manifest;
mod records;
mod stats;
mod visdrone;
mod yolo;

pub use classmap::{CategoryAction, ClassId, ClassMap, ClassMapping};
pub use convert::{convert_dataset, Conversion, ConvertOptions, DESCRIPTOR_FILE};
pub use dims::parse_dims_index;
pub use manifest::{DatasetManifest, ManifestEntry};
pub use records::{DetectionRecord, GroundTruthRecord};
pub use stats::{dataset_stats, load_ground_truth, ClassStats, DatasetStats};
pub use visdrone::{parse_visdrone_file, parse_visdrone_line, VISDRONE_CATEGORIES};
pub use yolo::{
    format_label_line, parse_detections, parse_ignore_regions, parse_yolo_labels,
    remap_yolo_labels, LABEL_DECIMALS,
};
