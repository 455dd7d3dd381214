//! Detection-to-ground-truth matching and the precision / recall / F1 / AP /
//! mAP suite.

mod ap;
mod counts;
mod evaluate;
mod matching;

pub use ap::{average_precision, mean_ap, pr_curve, MeanAp, PrCurve, PrPoint};
pub use counts::{confusion_at_threshold, f1, precision, recall, ConfusionCounts};
pub use evaluate::{evaluate, evaluate_records, AllClassesEval, ClassEval, EvalConfig, EvalReport};
pub use matching::{match_class_image, MatchKind, MatchOutcome};
