//! Cross-model comparison, throughput budgeting and continual-learning
//! scenario analysis over run records.

mod compare;
mod formulas;
mod record;
mod scenario;
mod validate;

pub use compare::{compare_models, CompareOptions, ComparisonReport, ComparisonRow};
pub use formulas::{computational_time, forgetting, relative_improvement, DEFAULT_FRAMES};
pub use record::{load_run_records, ClassRow, Metric, MetricDeltas, ModelRunRecord, RunRecordFile};
pub use scenario::{
    continual_scenario, ForgettingEntry, ForgettingFlag, ImprovementRow, ScenarioOptions,
    ScenarioReport, DEFAULT_EPSILON,
};
pub use validate::{
    validate_record, Discrepancy, DiscrepancyKind, COMPUTATIONAL_TIME_TOLERANCE, F1_TOLERANCE,
    MAP_MEAN_TOLERANCE,
};
