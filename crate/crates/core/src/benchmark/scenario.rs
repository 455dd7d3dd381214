//! Continual-learning scenarios.
//!
//! Runs are ordered by role: the first is the model trained on the prior
//! task, the second is trained from scratch on the new task, and every
//! later run is trained sequentially (prior task, then new task). With the
//! four-run layout this reads a, b, c, d.

use serde::{Deserialize, Serialize};

use super::compare::RELATIVE_CONVENTION;
use super::record::check_unique;
use super::{
    forgetting, validate_record, Discrepancy, Metric, MetricDeltas, ModelRunRecord, DEFAULT_FRAMES,
};
use crate::error::{Error, Result};
use crate::table::{fmt_metric, fmt_percent, OutputFormat, Table};

/// Absolute metric gap under which a sequential run counts as "the same as"
/// the scratch run.
pub const DEFAULT_EPSILON: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOptions {
    pub epsilon: f64,
    /// Metrics checked for the forgetting flag.
    pub flag_metrics: Vec<Metric>,
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            flag_metrics: vec![Metric::Map50],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementRow {
    pub new: String,
    pub base: String,
    pub deltas: MetricDeltas,
}

/// Sequential run whose metric sits within epsilon of the scratch run even
/// though the prior-task model was clearly different.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForgettingFlag {
    pub run: String,
    pub scratch: String,
    pub metric: Metric,
    /// |sequential - scratch|
    pub gap_to_scratch: f64,
    /// |prior - scratch|
    pub prior_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForgettingEntry {
    /// Dataset of the earlier task.
    pub task: String,
    pub run: String,
    pub metric: Metric,
    pub before: f64,
    pub after: f64,
    pub forgetting: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub runs: Vec<ModelRunRecord>,
    pub epsilon: f64,
    pub convention: String,
    /// Last run over the one before it (d vs c).
    pub headline: ImprovementRow,
    /// Every later run over every earlier one.
    pub improvements: Vec<ImprovementRow>,
    pub flags: Vec<ForgettingFlag>,
    pub forgetting: Vec<ForgettingEntry>,
    pub discrepancies: Vec<Discrepancy>,
}

fn improvement(runs: &[ModelRunRecord], new: usize, base: usize) -> ImprovementRow {
    ImprovementRow {
        new: runs[new].name.clone(),
        base: runs[base].name.clone(),
        deltas: MetricDeltas::between(&runs[new], &runs[base]),
    }
}

pub fn continual_scenario(
    records: &[ModelRunRecord],
    opts: &ScenarioOptions,
) -> Result<ScenarioReport> {
    if records.len() < 2 {
        return Err(Error::Records(format!(
            "a scenario needs at least two runs, got {}",
            records.len()
        )));
    }
    if !(opts.epsilon >= 0.0 && opts.epsilon.is_finite()) {
        return Err(Error::Domain(format!(
            "epsilon {} must be non-negative",
            opts.epsilon
        )));
    }
    check_unique(records)?;
    for r in records {
        r.validate()?;
    }
    let runs = records.to_vec();
    let n = runs.len();

    let mut improvements = Vec::new();
    for base in 0..n {
        for new in base + 1..n {
            improvements.push(improvement(&runs, new, base));
        }
    }

    let (prior, scratch) = (&runs[0], &runs[1]);
    let mut flags = Vec::new();
    for seq in &runs[2..] {
        for &m in &opts.flag_metrics {
            let gap_to_scratch = (seq.metric(m) - scratch.metric(m)).abs();
            let prior_gap = (prior.metric(m) - scratch.metric(m)).abs();
            if gap_to_scratch <= opts.epsilon && prior_gap > opts.epsilon {
                flags.push(ForgettingFlag {
                    run: seq.name.clone(),
                    scratch: scratch.name.clone(),
                    metric: m,
                    gap_to_scratch,
                    prior_gap,
                });
            }
        }
    }

    let mut entries = Vec::new();
    if let Some(task) = &prior.dataset {
        for later in runs[1..]
            .iter()
            .filter(|r| r.dataset.as_ref() == Some(task))
        {
            for m in Metric::ALL {
                entries.push(ForgettingEntry {
                    task: task.clone(),
                    run: later.name.clone(),
                    metric: m,
                    before: prior.metric(m),
                    after: later.metric(m),
                    forgetting: forgetting(prior.metric(m), later.metric(m)),
                });
            }
        }
    }

    let discrepancies = runs
        .iter()
        .flat_map(|r| validate_record(r, DEFAULT_FRAMES))
        .collect();
    let report = ScenarioReport {
        headline: improvement(&runs, n - 1, n - 2),
        runs,
        epsilon: opts.epsilon,
        convention: RELATIVE_CONVENTION.to_string(),
        improvements,
        flags,
        forgetting: entries,
        discrepancies,
    };
    report.verify()?;
    Ok(report)
}

impl ScenarioReport {
    fn run(&self, name: &str) -> Result<&ModelRunRecord> {
        self.runs
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| Error::Contract(format!("report cell refers to unknown run {name:?}")))
    }

    /// Recomputes every improvement and forgetting cell from the runs.
    pub fn verify(&self) -> Result<()> {
        for row in self
            .improvements
            .iter()
            .chain(std::iter::once(&self.headline))
        {
            let fresh = MetricDeltas::between(self.run(&row.new)?, self.run(&row.base)?);
            for m in Metric::ALL {
                let ok = match (fresh.get(m), row.deltas.get(m)) {
                    (Some(a), Some(b)) => (a - b).abs() <= 1e-12,
                    (None, None) => true,
                    _ => false,
                };
                if !ok {
                    return Err(Error::Contract(format!(
                        "{m} improvement of {} over {} does not match its source runs",
                        row.new, row.base
                    )));
                }
            }
        }
        for e in &self.forgetting {
            if e.forgetting != e.before - e.after {
                return Err(Error::Contract(format!(
                    "forgetting entry for {} / {} is inconsistent",
                    e.run, e.metric
                )));
            }
        }
        Ok(())
    }

    pub fn improvement(&self, new: &str, base: &str) -> Option<&ImprovementRow> {
        self.improvements
            .iter()
            .find(|r| r.new == new && r.base == base)
    }

    pub fn runs_table(&self) -> Table {
        let mut t = Table::new([
            "Run",
            "Dataset",
            "Precision",
            "Recall",
            "F1",
            "mAP50",
            "Training (h)",
        ]);
        for r in &self.runs {
            t.push_row([
                r.name.clone(),
                r.dataset.clone().unwrap_or_else(|| "-".into()),
                fmt_metric(r.precision),
                fmt_metric(r.recall),
                fmt_metric(r.f1),
                fmt_metric(r.map50),
                r.training_hours
                    .map_or_else(|| "-".into(), |h| format!("{h:.3}")),
            ]);
        }
        t
    }

    pub fn improvements_table(&self) -> Table {
        let mut t = Table::new(
            ["Comparison".to_string()]
                .into_iter()
                .chain(Metric::ALL.iter().map(|m| format!("d{}", m.label()))),
        );
        for row in &self.improvements {
            t.push_row(
                [format!("{} vs {}", row.new, row.base)]
                    .into_iter()
                    .chain(Metric::ALL.iter().map(|&m| fmt_percent(row.deltas.get(m)))),
            );
        }
        t
    }

    pub fn render(&self, format: OutputFormat) -> String {
        if format == OutputFormat::Structured {
            let mut s = serde_json::to_string_pretty(self).expect("report serializes");
            s.push('\n');
            return s;
        }
        let h = &self.headline;
        let mut out = self.runs_table().render(format);
        out.push('\n');
        out.push_str(&self.improvements_table().render(format));
        out.push_str(&format!(
            "\nHeadline ({} vs {}): {} F1, {} mAP50\n",
            h.new,
            h.base,
            fmt_percent(h.deltas.f1),
            fmt_percent(h.deltas.map50)
        ));
        out.push_str(&format!("Improvements: {}\n", self.convention));
        for f in &self.flags {
            out.push_str(&format!(
                "FLAG catastrophic forgetting suspected: {} {} is within {} of scratch run {} (gap {:.4}; prior-task gap {:.4})\n",
                f.run, f.metric, self.epsilon, f.scratch, f.gap_to_scratch, f.prior_gap
            ));
        }
        for e in &self.forgetting {
            out.push_str(&format!(
                "Forgetting on {} for {} {}: {:.4} -> {:.4} = {:+.4}\n",
                e.task, e.run, e.metric, e.before, e.after, e.forgetting
            ));
        }
        if !self.discrepancies.is_empty() {
            out.push_str("\nReported-value discrepancies:\n");
            for d in &self.discrepancies {
                out.push_str(&format!("  {d}\n"));
            }
        }
        out
    }
}
