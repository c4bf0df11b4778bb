use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::eval::EvalRecord;
use crate::error::{Error, Result};
use crate::metrics::{metrics, Degeneracy, METRIC_NAMES};

/// Metrics used for reporting and ranking, in table order.
pub const RANKED_METRICS: [&str; 3] = ["dice", "bcd", "modified_hausdorff"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricAggregate {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    /// Records that contributed a value.
    pub count: usize,
    /// Records with an empty mask on either side.
    pub degenerate_count: usize,
}

impl MetricAggregate {
    /// `mean±std`, both to three decimals.
    pub fn render(&self) -> String {
        format!("{:.3}±{:.3}", self.mean, self.std)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegeneratePolicy {
    /// Leave degenerate pairs out of distance aggregates.
    #[default]
    Exclude,
    /// Score a one-sided empty pair as the image diagonal (squared for
    /// BCD) and a both-empty pair as zero.
    Penalize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AggregateOptions {
    pub degenerate: DegeneratePolicy,
}

fn penalty(record: &EvalRecord, metric: &str) -> Option<f64> {
    if record.metrics.degenerate == Degeneracy::BothEmpty {
        return Some(0.0);
    }
    let diag2 = (record.height * record.height + record.width * record.width) as f64;
    match metric {
        "bcd" => Some(diag2),
        "modified_hausdorff" => Some(diag2.sqrt()),
        _ => None,
    }
}

fn mean_std(values: &mut [f64]) -> (f64, f64) {
    // Summing in sorted order makes the result independent of record order.
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let mut dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    dev.sort_by(f64::total_cmp);
    let var = dev.iter().sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn aggregate(records: &[EvalRecord]) -> Result<BTreeMap<String, MetricAggregate>> {
    aggregate_with(records, &AggregateOptions::default())
}

/// Mean and population std of every metric over `records`.
pub fn aggregate_with(records: &[EvalRecord], opts: &AggregateOptions) -> Result<BTreeMap<String, MetricAggregate>> {
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let registry = metrics();
    let degenerate_count = records
        .iter()
        .filter(|r| r.metrics.degenerate != Degeneracy::None)
        .count();
    let mut out = BTreeMap::new();
    for name in METRIC_NAMES {
        let metric = registry.get(name)?;
        let mut values: Vec<f64> = records
            .iter()
            .filter_map(|r| match metric.select(&r.metrics) {
                Some(v) => Some(v),
                None if opts.degenerate == DegeneratePolicy::Penalize => penalty(r, name),
                None => None,
            })
            .collect();
        if values.is_empty() {
            return Err(Error::AllDegenerate(metric.name()));
        }
        let count = values.len();
        let (mean, std) = mean_std(&mut values);
        out.insert(
            name.to_string(),
            MetricAggregate {
                mean,
                std,
                count,
                degenerate_count,
            },
        );
    }
    Ok(out)
}
