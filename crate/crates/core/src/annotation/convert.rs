//! VisDrone layout to YOLO layout.
//!
//! Source layout:
//!
//! ```text
//! <src>/images/<id>.<ext>
//! <src>/annotations/<id>.txt
//! <src>/dims.txt            # `image_id width height`
//! ```
//!
//! Output layout:
//!
//! ```text
//! <out>/images/<split>/<id>.<ext>
//! <out>/labels/<split>/<id>.txt      # kept objects
//! <out>/labels/<split>/<id>.ignore   # ignore regions, only when present
//! <out>/data.yaml
//! <out>/<split>.manifest.json
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::yolo::render_labels;
use super::{parse_dims_index, parse_visdrone_file, ClassMap, DatasetManifest, ManifestEntry};
use crate::error::{Error, Result};
use crate::geometry::{ImageDims, NormalizedBox};

pub const DESCRIPTOR_FILE: &str = "data.yaml";

#[derive(Debug, Clone)]
pub struct ConvertOptions {
    pub split: String,
    /// Defaults to `<src>/dims.txt`.
    pub dims_index: Option<PathBuf>,
    /// Worker threads for per-image work; `None` uses the global pool.
    pub threads: Option<usize>,
    pub copy_images: bool,
}

impl Default for ConvertOptions {
    fn default() -> Self {
        Self {
            split: "val".into(),
            dims_index: None,
            threads: None,
            copy_images: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Conversion {
    pub manifest: DatasetManifest,
    pub manifest_path: PathBuf,
    pub warnings: Vec<String>,
}

struct SourceImage {
    id: String,
    file: PathBuf,
    dims: ImageDims,
}

struct Converted {
    labels: String,
    ignore: String,
    warnings: Vec<String>,
}

/// Image files under `<src>/images`, sorted by file name.
pub(crate) fn list_images(src: &Path) -> Result<Vec<PathBuf>> {
    let dir = src.join("images");
    let mut files = Vec::new();
    for entry in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
        let entry = entry.map_err(|e| Error::io(&dir, e))?;
        let path = entry.path();
        if path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn image_id(path: &Path) -> Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string)
        .ok_or_else(|| Error::Format {
            path: path.to_path_buf(),
            message: "image file name is not valid UTF-8".into(),
        })
}

fn convert_one(src: &Path, img: &SourceImage, map: &ClassMap) -> Result<Converted> {
    let ann = src.join("annotations").join(format!("{}.txt", img.id));
    let mut warnings = Vec::new();
    let text = match fs::read_to_string(&ann) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            warnings.push(format!(
                "{}: no annotation file, treating as a negative image",
                img.id
            ));
            String::new()
        }
        Err(e) => return Err(Error::io(&ann, e)),
    };
    let records = parse_visdrone_file(&text, &ann.display().to_string(), &img.id, map)?;

    let mut kept: Vec<(Option<_>, NormalizedBox)> = Vec::new();
    let mut ignored: Vec<(Option<_>, NormalizedBox)> = Vec::new();
    for (n, rec) in records.iter().enumerate() {
        let clamped = rec.bbox.clamp_to(img.dims);
        if clamped != rec.bbox && clamped.area() > 0.0 {
            warnings.push(format!(
                "{}: object {} extends past the {}x{} image and was clipped",
                img.id,
                n + 1,
                img.dims.width(),
                img.dims.height()
            ));
        }
        if clamped.area() <= 0.0 {
            warnings.push(format!(
                "{}: object {} lies outside the image and was skipped",
                img.id,
                n + 1
            ));
            continue;
        }
        let norm = clamped.to_normalized(img.dims)?;
        if rec.ignore {
            ignored.push((None, norm));
        } else {
            kept.push((Some(rec.class_id), norm));
        }
    }
    Ok(Converted {
        labels: render_labels(kept.iter().map(|(c, n)| (*c, n))),
        ignore: render_labels(ignored.iter().map(|(c, n)| (*c, n))),
        warnings,
    })
}

fn descriptor(map: &ClassMap) -> String {
    let mut s = String::from("path: .\ntrain: images/train\nval: images/val\ntest: images/test\n");
    s.push_str(&format!("nc: {}\nnames:\n", map.num_classes()));
    for name in map.names() {
        s.push_str(&format!("  - '{}'\n", name.replace('\'', "''")));
    }
    s
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Converts one split. Output bytes do not depend on the thread count.
pub fn convert_dataset(
    src: &Path,
    map: &ClassMap,
    out: &Path,
    opts: &ConvertOptions,
) -> Result<Conversion> {
    let files = list_images(src)?;
    let dims_path = opts
        .dims_index
        .clone()
        .unwrap_or_else(|| src.join("dims.txt"));
    let dims_text = fs::read_to_string(&dims_path).map_err(|e| Error::io(&dims_path, e))?;
    let dims: BTreeMap<String, ImageDims> =
        parse_dims_index(&dims_text, &dims_path.display().to_string())?;

    let mut images = Vec::with_capacity(files.len());
    for file in files {
        let id = image_id(&file)?;
        let d = *dims.get(&id).ok_or_else(|| Error::Format {
            path: dims_path.clone(),
            message: format!("no dimensions for image {id:?}"),
        })?;
        images.push(SourceImage { id, file, dims: d });
    }
    for pair in images.windows(2) {
        if pair[0].id == pair[1].id {
            return Err(Error::Contract(format!(
                "two image files share the id {:?}",
                pair[0].id
            )));
        }
    }

    let run = || -> Result<Vec<Converted>> {
        images
            .par_iter()
            .map(|img| convert_one(src, img, map))
            .collect()
    };
    let converted = match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Contract(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };

    let split = &opts.split;
    let label_dir = out.join("labels").join(split);
    let image_dir = out.join("images").join(split);
    fs::create_dir_all(&label_dir).map_err(|e| Error::io(&label_dir, e))?;
    fs::create_dir_all(&image_dir).map_err(|e| Error::io(&image_dir, e))?;

    let mut warnings = Vec::new();
    let mut entries = Vec::with_capacity(images.len());
    for (img, conv) in images.iter().zip(converted) {
        let label_path = label_dir.join(format!("{}.txt", img.id));
        write(&label_path, &conv.labels)?;
        let ignore_path = label_path.with_extension("ignore");
        if conv.ignore.is_empty() {
            if ignore_path.exists() {
                fs::remove_file(&ignore_path).map_err(|e| Error::io(&ignore_path, e))?;
            }
        } else {
            write(&ignore_path, &conv.ignore)?;
        }
        if opts.copy_images {
            let name = img.file.file_name().expect("listed files have names");
            let dest = image_dir.join(name);
            fs::copy(&img.file, &dest).map_err(|e| Error::io(&dest, e))?;
        }
        warnings.extend(conv.warnings);
        entries.push(ManifestEntry {
            image_id: img.id.clone(),
            dims: img.dims,
            labels: format!("labels/{split}/{}.txt", img.id),
        });
    }

    write(&out.join(DESCRIPTOR_FILE), &descriptor(map))?;
    let manifest = DatasetManifest::new(split.clone(), map.names().to_vec(), entries, out)?;
    let manifest_path = out.join(format!("{split}.manifest.json"));
    manifest.save(&manifest_path)?;
    Ok(Conversion {
        manifest,
        manifest_path,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::{dataset_stats, parse_yolo_labels, ClassId};

    fn source(dir: &Path, images: &[(&str, &str, Option<&str>)]) {
        fs::create_dir_all(dir.join("images")).unwrap();
        fs::create_dir_all(dir.join("annotations")).unwrap();
        let mut dims = String::new();
        for (id, wh, ann) in images {
            fs::write(dir.join("images").join(format!("{id}.jpg")), id.as_bytes()).unwrap();
            dims.push_str(&format!("{id} {wh}\n"));
            if let Some(a) = ann {
                fs::write(dir.join("annotations").join(format!("{id}.txt")), a).unwrap();
            }
        }
        fs::write(dir.join("dims.txt"), dims).unwrap();
    }

    #[test]
    fn pedestrian_kept_car_dropped() {
        let tmp = tempfile::tempdir().unwrap();
        let src = tmp.path().join("src");
        let out = tmp.path().join("out");
        source(
            &src,
            &[(
                "a",
                "100 100",
                Some("10,10,20,20,0,1,0,0\n30,30,10,10,0,4,0,0\n"),
            )],
        );
        let conv = convert_dataset(
            &src,
            &ClassMap::visdrone_vru(),
            &out,
            &ConvertOptions::default(),
        )
        .unwrap();
        let labels = fs::read_to_string(out.join("labels/val/a.txt")).unwrap();
        assert_eq!(labels.lines().count(), 1);
        assert!(labels.starts_with("0 "));
        assert!(conv.warnings.is_empty());
        let recs = parse_yolo_labels(&labels, ImageDims::new(100., 100.).unwrap(), "a", 4).unwrap();
        assert_eq!(recs[0].class_id, ClassId(0));
        for (x, y) in recs[0].bbox.corners().iter().zip([10., 10., 30., 30.]) {
            assert!((x - y).abs() < 1e-4);
        }
        assert!(out.join("images/val/a.jpg").exists());
        assert!(!out.join("labels/val/a.ignore").exists());
    }

    #[test]
    fn empty_dataset_still_writes_descriptor() {
        let tmp = tempfile::tempdir().unwrap();
        let src = tmp.path().join("src");
        let out = tmp.path().join("out");
        source(&src, &[]);
        let conv = convert_dataset(
            &src,
            &ClassMap::visdrone_vru(),
            &out,
            &ConvertOptions::default(),
        )
        .unwrap();
        assert!(conv.manifest.images.is_empty());
        let desc = fs::read_to_string(out.join(DESCRIPTOR_FILE)).unwrap();
        assert!(desc
            .contains("names:\n  - 'pedestrian'\n  - 'people'\n  - 'bicycle'\n  - 'tricycle'\n"));
        for key in ["train:", "val:", "test:"] {
            assert!(desc.contains(key));
        }
        let stats = dataset_stats(&conv.manifest).unwrap();
        assert_eq!(stats.total_instances, 0);
    }

    #[test]
    fn missing_annotation_warns_and_ignore_goes_to_sidecar() {
        let tmp = tempfile::tempdir().unwrap();
        let src = tmp.path().join("src");
        let out = tmp.path().join("out");
        source(
            &src,
            &[
                ("a", "50 50", None),
                (
                    "b",
                    "50 50",
                    Some("0,0,10,10,0,0,0,0\n40,40,20,20,1,2,0,0\n"),
                ),
            ],
        );
        let conv = convert_dataset(
            &src,
            &ClassMap::visdrone_vru(),
            &out,
            &ConvertOptions::default(),
        )
        .unwrap();
        assert_eq!(
            fs::read_to_string(out.join("labels/val/a.txt")).unwrap(),
            ""
        );
        let ign = fs::read_to_string(out.join("labels/val/b.ignore")).unwrap();
        assert_eq!(ign.lines().count(), 1);
        assert_eq!(ign.split_whitespace().count(), 4);
        let labels = fs::read_to_string(out.join("labels/val/b.txt")).unwrap();
        assert!(labels.starts_with("1 "), "{labels}");
        // one missing-annotation warning, one clip warning
        assert_eq!(conv.warnings.len(), 2, "{:?}", conv.warnings);
    }

    #[test]
    fn missing_dims_is_an_error() {
        let tmp = tempfile::tempdir().unwrap();
        let src = tmp.path().join("src");
        source(&src, &[("a", "10 10", Some(""))]);
        fs::write(src.join("dims.txt"), "").unwrap();
        assert!(convert_dataset(
            &src,
            &ClassMap::visdrone_vru(),
            &tmp.path().join("o"),
            &ConvertOptions::default()
        )
        .is_err());
    }

    #[test]
    fn bad_annotation_is_a_hard_error() {
        let tmp = tempfile::tempdir().unwrap();
        let src = tmp.path().join("src");
        source(&src, &[("a", "10 10", Some("1,2,3\n"))]);
        let e = convert_dataset(
            &src,
            &ClassMap::visdrone_vru(),
            &tmp.path().join("o"),
            &ConvertOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
    }
}
