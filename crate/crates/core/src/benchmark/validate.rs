//! Internal-consistency checks for reported run records. Mismatches are
//! reported, never corrected.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{computational_time, ModelRunRecord};
use crate::metrics::f1;

/// Allowed gap between a reported F1 and `2PR / (P + R)` recomputed from
/// three-decimal P and R.
pub const F1_TOLERANCE: f64 = 0.005;

/// Allowed gap between a reported overall mAP and the mean of its class rows.
pub const MAP_MEAN_TOLERANCE: f64 = 0.0005;

/// Allowed gap between a reported per-30-frame time and `frames / fps`.
pub const COMPUTATIONAL_TIME_TOLERANCE: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscrepancyKind {
    F1Formula,
    MapClassMean,
    InstanceSum,
    ComputationalTime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub run: String,
    pub kind: DiscrepancyKind,
    pub reported: f64,
    pub recomputed: f64,
}

impl fmt::Display for Discrepancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            DiscrepancyKind::F1Formula => "reported F1 differs from 2PR/(P+R)",
            DiscrepancyKind::MapClassMean => "reported mAP differs from the mean of class APs",
            DiscrepancyKind::InstanceSum => "reported instances differ from the class total",
            DiscrepancyKind::ComputationalTime => {
                "reported computational time differs from frames/FPS"
            }
        };
        write!(
            f,
            "{}: {what}: reported {} vs recomputed {:.4}",
            self.run, self.reported, self.recomputed
        )
    }
}

pub fn validate_record(rec: &ModelRunRecord, frames: f64) -> Vec<Discrepancy> {
    let mut out = Vec::new();
    let mut flag = |kind, reported: f64, recomputed: f64, tol: f64| {
        if (reported - recomputed).abs() > tol {
            out.push(Discrepancy {
                run: rec.name.clone(),
                kind,
                reported,
                recomputed,
            });
        }
    };

    flag(
        DiscrepancyKind::F1Formula,
        rec.f1,
        f1(rec.precision, rec.recall),
        F1_TOLERANCE,
    );

    let class_aps: Vec<f64> = rec.classes.iter().filter_map(|c| c.map50).collect();
    if !class_aps.is_empty() {
        let mean = class_aps.iter().sum::<f64>() / class_aps.len() as f64;
        flag(
            DiscrepancyKind::MapClassMean,
            rec.map50,
            mean,
            MAP_MEAN_TOLERANCE,
        );
    }

    if let Some(total) = rec.instances {
        let parts: Option<Vec<u64>> = rec.classes.iter().map(|c| c.instances).collect();
        if let Some(parts) = parts.filter(|p| !p.is_empty()) {
            flag(
                DiscrepancyKind::InstanceSum,
                total as f64,
                parts.iter().sum::<u64>() as f64,
                0.0,
            );
        }
    }

    if let (Some(reported), Some(fps)) = (rec.reported_computational_time_s, rec.fps) {
        if let Ok(t) = computational_time(fps, frames) {
            flag(
                DiscrepancyKind::ComputationalTime,
                reported,
                t,
                COMPUTATIONAL_TIME_TOLERANCE,
            );
        }
    }
    out
}
