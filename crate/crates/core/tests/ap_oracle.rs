mod common;

use common::oracle;
use rand::rngs::StdRng;
use rand::SeedableRng;
use vrubench::annotation::ClassId;
use vrubench::geometry::{iou, BoundingBox};
use vrubench::metrics::{average_precision, confusion_at_threshold, pr_curve};

fn library_ap(images: &[oracle::Image], thr: f64) -> f64 {
    let (gts, dets) = common::to_records(images);
    average_precision(&pr_curve(ClassId(0), &gts, &dets, thr).unwrap())
}

#[test]
fn ap_matches_brute_force_on_random_instances() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for case in 0..1000 {
        let images = oracle::random_instance(&mut rng, 8, 15);
        for thr in [0.5, 0.3, 0.75] {
            let want = oracle::average_precision(&images, thr);
            let got = library_ap(&images, thr);
            assert!(
                (want - got).abs() <= 1e-9,
                "case {case} thr {thr}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn counts_match_brute_force_on_random_instances() {
    let mut rng = StdRng::seed_from_u64(17);
    for case in 0..500 {
        let images = oracle::random_instance(&mut rng, 8, 15);
        let (gts, dets) = common::to_records(&images);
        for conf in [0.0, 0.2, 0.6] {
            let c = confusion_at_threshold(&gts, &dets, 1, 0.5, conf).unwrap()[0];
            assert_eq!(
                (c.tp, c.fp, c.fn_),
                oracle::counts(&images, 0.5, conf),
                "case {case}"
            );
        }
    }
}

#[test]
fn oracle_iou_agrees_with_library() {
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..200 {
        let images = oracle::random_instance(&mut rng, 4, 4);
        for im in &images {
            for g in &im.gts {
                for d in &im.dets {
                    let a = BoundingBox::new(g[0], g[1], g[2], g[3]).unwrap();
                    let b = BoundingBox::new(d.bbox[0], d.bbox[1], d.bbox[2], d.bbox[3]).unwrap();
                    assert!((iou(&a, &b) - oracle::iou(g, &d.bbox)).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn hand_worked_curve() {
    // three GTs, detections TP FP TP FP by confidence: envelope 1 @ 1/3, 2/3 @ 2/3
    let images = vec![oracle::Image {
        gts: vec![
            [0.0, 0.0, 10.0, 10.0],
            [20.0, 20.0, 30.0, 30.0],
            [50.0, 50.0, 60.0, 60.0],
        ],
        dets: vec![
            oracle::Det {
                conf: 0.9,
                bbox: [0.0, 0.0, 10.0, 10.0],
            },
            oracle::Det {
                conf: 0.8,
                bbox: [80.0, 80.0, 90.0, 90.0],
            },
            oracle::Det {
                conf: 0.7,
                bbox: [20.0, 20.0, 30.0, 30.0],
            },
            oracle::Det {
                conf: 0.6,
                bbox: [70.0, 0.0, 75.0, 5.0],
            },
        ],
    }];
    let want = 1.0 / 3.0 + (1.0 / 3.0) * (2.0 / 3.0);
    assert!((oracle::average_precision(&images, 0.5) - want).abs() < 1e-12);
    assert!((library_ap(&images, 0.5) - want).abs() < 1e-12);
}
