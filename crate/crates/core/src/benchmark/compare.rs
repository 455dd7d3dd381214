use serde::{Deserialize, Serialize};

use super::record::check_unique;
use super::{
    computational_time, validate_record, Discrepancy, Metric, MetricDeltas, ModelRunRecord,
    DEFAULT_FRAMES,
};
use crate::error::{Error, Result};
use crate::table::{fmt_metric, fmt_percent, OutputFormat, Table};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareOptions {
    pub frames: f64,
    /// Rows are ranked by this metric, best first.
    pub sort_by: Metric,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            frames: DEFAULT_FRAMES,
            sort_by: Metric::Map50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub rank: usize,
    pub run: ModelRunRecord,
    pub computational_time_s: Option<f64>,
    /// Relative improvement over the baseline, in percent.
    pub vs_baseline: MetricDeltas,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub baseline: String,
    pub options: CompareOptions,
    pub convention: String,
    pub rows: Vec<ComparisonRow>,
    pub discrepancies: Vec<Discrepancy>,
}

pub(crate) const RELATIVE_CONVENTION: &str = "relative improvement, 100 * (new - base) / base";

/// Compares runs against a named baseline, ranked by `opts.sort_by`
/// (ties keep input order).
pub fn compare_models(
    records: &[ModelRunRecord],
    baseline: &str,
    opts: CompareOptions,
) -> Result<ComparisonReport> {
    if records.len() < 2 {
        return Err(Error::Records(format!(
            "comparison needs at least two runs, got {}",
            records.len()
        )));
    }
    check_unique(records)?;
    for r in records {
        r.validate()?;
    }
    let base = records
        .iter()
        .find(|r| r.name == baseline)
        .ok_or_else(|| Error::Records(format!("baseline run {baseline:?} not found")))?;

    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| {
        records[b]
            .metric(opts.sort_by)
            .total_cmp(&records[a].metric(opts.sort_by))
    });
    let rows = order
        .into_iter()
        .enumerate()
        .map(|(rank, i)| {
            let run = records[i].clone();
            ComparisonRow {
                rank: rank + 1,
                computational_time_s: run
                    .fps
                    .and_then(|f| computational_time(f, opts.frames).ok()),
                vs_baseline: MetricDeltas::between(&run, base),
                run,
            }
        })
        .collect();
    let discrepancies = records
        .iter()
        .flat_map(|r| validate_record(r, opts.frames))
        .collect();
    Ok(ComparisonReport {
        baseline: baseline.to_string(),
        options: opts,
        convention: RELATIVE_CONVENTION.to_string(),
        rows,
        discrepancies,
    })
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.digits$}"))
}

impl ComparisonReport {
    pub fn row(&self, name: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.run.name == name)
    }

    pub fn to_table(&self) -> Table {
        let time_header = format!("Time/{} frames (s)", self.options.frames);
        let mut t = Table::new(
            [
                "Rank",
                "Run",
                "Precision",
                "Recall",
                "F1",
                "mAP50",
                "FPS",
                "Inference (ms)",
                "Training (h)",
                time_header.as_str(),
            ]
            .map(String::from)
            .into_iter()
            .chain(
                Metric::ALL
                    .iter()
                    .map(|m| format!("d{} vs {}", m.label(), self.baseline)),
            ),
        );
        for row in &self.rows {
            let r = &row.run;
            let mut cells = vec![
                row.rank.to_string(),
                r.name.clone(),
                fmt_metric(r.precision),
                fmt_metric(r.recall),
                fmt_metric(r.f1),
                fmt_metric(r.map50),
                opt(r.fps, 2),
                opt(r.inference_ms, 1),
                opt(r.training_hours, 3),
                opt(row.computational_time_s, 3),
            ];
            cells.extend(
                Metric::ALL
                    .iter()
                    .map(|&m| fmt_percent(row.vs_baseline.get(m))),
            );
            t.push_row(cells);
        }
        t
    }

    pub fn render(&self, format: OutputFormat) -> String {
        if format == OutputFormat::Structured {
            let mut s = serde_json::to_string_pretty(self).expect("report serializes");
            s.push('\n');
            return s;
        }
        let mut out = self.to_table().render(format);
        out.push_str(&format!("\nImprovements: {}\n", self.convention));
        if !self.discrepancies.is_empty() {
            out.push_str("\nReported-value discrepancies:\n");
            for d in &self.discrepancies {
                out.push_str(&format!("  {d}\n"));
            }
        }
        out
    }
}
