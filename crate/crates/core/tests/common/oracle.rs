//! Brute-force reference computations, written without the library's
//! matching, curve or integration code.

use rand::Rng;

pub type Corners = [f64; 4];

pub fn iou(a: &Corners, b: &Corners) -> f64 {
    let iw = (a[2].min(b[2]) - a[0].max(b[0])).max(0.0);
    let ih = (a[3].min(b[3]) - a[1].max(b[1])).max(0.0);
    let inter = iw * ih;
    let area = |c: &Corners| (c[2] - c[0]) * (c[3] - c[1]);
    let union = area(a) + area(b) - inter;
    if union > 0.0 {
        inter / union
    } else {
        0.0
    }
}

#[derive(Debug, Clone)]
pub struct Det {
    pub conf: f64,
    pub bbox: Corners,
}

/// One image of a single-class instance.
#[derive(Debug, Clone, Default)]
pub struct Image {
    pub gts: Vec<Corners>,
    pub dets: Vec<Det>,
}

/// True-positive flags in input order for one image.
pub fn greedy(gts: &[Corners], dets: &[Det], thr: f64) -> Vec<bool> {
    let mut idx: Vec<usize> = (0..dets.len()).collect();
    // insertion sort: descending confidence, stable
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && dets[idx[j - 1]].conf < dets[idx[j]].conf {
            idx.swap(j - 1, j);
            j -= 1;
        }
    }
    let mut used = vec![false; gts.len()];
    let mut tp = vec![false; dets.len()];
    for &d in &idx {
        let mut best = -1.0;
        let mut best_g = None;
        for (g, gt) in gts.iter().enumerate() {
            if used[g] {
                continue;
            }
            let o = iou(&dets[d].bbox, gt);
            if o > best {
                best = o;
                best_g = Some(g);
            }
        }
        if let Some(g) = best_g {
            if best >= thr {
                used[g] = true;
                tp[d] = true;
            }
        }
    }
    tp
}

/// (tp, fp, fn) for detections at or above `conf`.
pub fn counts(images: &[Image], iou_thr: f64, conf: f64) -> (usize, usize, usize) {
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for im in images {
        let kept: Vec<Det> = im.dets.iter().filter(|d| d.conf >= conf).cloned().collect();
        let flags = greedy(&im.gts, &kept, iou_thr);
        let t = flags.iter().filter(|f| **f).count();
        tp += t;
        fp += flags.len() - t;
        fn_ += im.gts.len() - t;
    }
    (tp, fp, fn_)
}

/// AP by re-matching from scratch at every distinct confidence cutoff and
/// integrating the interpolated envelope over recall levels.
pub fn average_precision(images: &[Image], iou_thr: f64) -> f64 {
    let n_gt: usize = images.iter().map(|im| im.gts.len()).sum();
    if n_gt == 0 {
        return 0.0;
    }
    let mut cutoffs: Vec<f64> = images
        .iter()
        .flat_map(|im| im.dets.iter().map(|d| d.conf))
        .collect();
    cutoffs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    cutoffs.dedup();

    let mut pts: Vec<(f64, f64)> = Vec::new();
    for &t in &cutoffs {
        let (tp, fp, _) = counts(images, iou_thr, t);
        pts.push((tp as f64 / n_gt as f64, tp as f64 / (tp + fp) as f64));
    }
    let mut levels: Vec<f64> = pts.iter().map(|p| p.0).filter(|r| *r > 0.0).collect();
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    levels.dedup();
    let mut ap = 0.0;
    let mut prev = 0.0;
    for r in levels {
        let p = pts
            .iter()
            .filter(|(pr, _)| *pr >= r)
            .map(|(_, pp)| *pp)
            .fold(0.0, f64::max);
        ap += (r - prev) * p;
        prev = r;
    }
    ap
}

/// Random single-class instance: at most `max_gts` ground truths and
/// `max_dets` detections over 1..=3 images, all confidences distinct.
pub fn random_instance<R: Rng>(rng: &mut R, max_gts: usize, max_dets: usize) -> Vec<Image> {
    let n_images = rng.gen_range(1..=3);
    let mut images = vec![Image::default(); n_images];
    let n_gts = rng.gen_range(0..=max_gts);
    let n_dets = rng.gen_range(0..=max_dets);
    let rand_box = |rng: &mut R| {
        let x = rng.gen_range(0.0..80.0);
        let y = rng.gen_range(0.0..80.0);
        let w = rng.gen_range(4.0..30.0);
        let h = rng.gen_range(4.0..30.0);
        [x, y, x + w, y + h]
    };
    for _ in 0..n_gts {
        let i = rng.gen_range(0..n_images);
        let b = rand_box(rng);
        images[i].gts.push(b);
    }
    let mut used_conf: Vec<f64> = Vec::new();
    for _ in 0..n_dets {
        let i = rng.gen_range(0..n_images);
        let bbox = match images[i].gts.len() {
            n if n > 0 && rng.gen_bool(0.7) => {
                let g = images[i].gts[rng.gen_range(0..n)];
                let j = |rng: &mut R| rng.gen_range(-6.0..6.0);
                let (x0, y0) = (g[0] + j(rng), g[1] + j(rng));
                let (x1, y1) = (g[2] + j(rng), g[3] + j(rng));
                [x0.min(x1), y0.min(y1), x0.max(x1), y0.max(y1)]
            }
            _ => rand_box(rng),
        };
        let conf = loop {
            let c: f64 = rng.gen_range(0.0..1.0);
            if !used_conf.contains(&c) {
                used_conf.push(c);
                break c;
            }
        };
        images[i].dets.push(Det { conf, bbox });
    }
    images
}

/// One class row computed straight from fixture files.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleClass {
    pub name: String,
    pub images: usize,
    pub instances: usize,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub ap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub classes: Vec<OracleClass>,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub map: f64,
}

fn div(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn to_corners(v: &[f64], w: f64, h: f64) -> Corners {
    let (cx, cy, bw, bh) = (v[0] * w, v[1] * h, v[2] * w, v[3] * h);
    [cx - bw / 2.0, cy - bh / 2.0, cx + bw / 2.0, cy + bh / 2.0]
}

/// Full report for a fixture directory holding `val.manifest.json`,
/// `labels/` and `detections/`. Reads the files with its own parsing.
pub fn report_for_fixture(dir: &std::path::Path, iou_thr: f64, conf: f64) -> OracleReport {
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("val.manifest.json")).unwrap())
            .unwrap();
    let names: Vec<String> = manifest["class_names"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    let mut per_class: Vec<Vec<Image>> = vec![Vec::new(); names.len()];
    for entry in manifest["images"].as_array().unwrap() {
        let id = entry["image_id"].as_str().unwrap();
        let (w, h) = (
            entry["width"].as_f64().unwrap(),
            entry["height"].as_f64().unwrap(),
        );
        let mut imgs = vec![Image::default(); names.len()];
        let labels = std::fs::read_to_string(dir.join(entry["labels"].as_str().unwrap())).unwrap();
        for line in labels.lines().filter(|l| !l.trim().is_empty()) {
            let v: Vec<f64> = line
                .split_whitespace()
                .map(|s| s.parse().unwrap())
                .collect();
            imgs[v[0] as usize].gts.push(to_corners(&v[1..], w, h));
        }
        let dets =
            std::fs::read_to_string(dir.join("detections").join(format!("{id}.txt"))).unwrap();
        for line in dets.lines().filter(|l| !l.trim().is_empty()) {
            let v: Vec<f64> = line
                .split_whitespace()
                .map(|s| s.parse().unwrap())
                .collect();
            imgs[v[0] as usize].dets.push(Det {
                conf: v[1],
                bbox: to_corners(&v[2..], w, h),
            });
        }
        for (c, im) in imgs.into_iter().enumerate() {
            per_class[c].push(im);
        }
    }
    let classes: Vec<OracleClass> = names
        .iter()
        .zip(&per_class)
        .map(|(name, images)| {
            let (tp, fp, fn_) = counts(images, iou_thr, conf);
            let (p, r) = (div(tp, tp + fp), div(tp, tp + fn_));
            OracleClass {
                name: name.clone(),
                images: images.iter().filter(|im| !im.gts.is_empty()).count(),
                instances: images.iter().map(|im| im.gts.len()).sum(),
                tp,
                fp,
                fn_,
                precision: p,
                recall: r,
                f1: harmonic(p, r),
                ap: average_precision(images, iou_thr),
            }
        })
        .collect();
    let (tp, fp, fn_) = classes
        .iter()
        .fold((0, 0, 0), |a, c| (a.0 + c.tp, a.1 + c.fp, a.2 + c.fn_));
    let (p, r) = (div(tp, tp + fp), div(tp, tp + fn_));
    let scored: Vec<f64> = classes
        .iter()
        .filter(|c| c.instances > 0)
        .map(|c| c.ap)
        .collect();
    OracleReport {
        map: scored.iter().sum::<f64>() / scored.len() as f64,
        classes,
        tp,
        fp,
        fn_,
        precision: p,
        recall: r,
        f1: harmonic(p, r),
    }
}
