use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::aggregate::RANKED_METRICS;
use super::rank::{BenchReport, Rank};
use crate::error::{Error, Result};
use crate::metrics::Degeneracy;
use crate::registry::Registry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
    #[serde(alias = "markdown")]
    Md,
}

impl ReportFormat {
    pub fn name(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::Md => "md",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "md" | "markdown" => Ok(ReportFormat::Md),
            _ => Err(Error::UnknownStrategy {
                kind: "report format",
                name: s.to_string(),
                available: "csv, json, md".into(),
            }),
        }
    }
}

pub trait ReportEmitter: Send + Sync {
    fn name(&self) -> &'static str;
    fn emit(&self, reports: &[BenchReport]) -> Result<Vec<u8>>;
}

/// One row per (configuration, section).
pub struct CsvEmitter;
/// The full reports as a JSON array.
pub struct JsonEmitter;
/// Configurations by test sets, three metrics per test set, plus ranks.
pub struct MarkdownEmitter;

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn degeneracy_name(d: Degeneracy) -> &'static str {
    match d {
        Degeneracy::None => "none",
        Degeneracy::BothEmpty => "both_empty",
        Degeneracy::PredEmpty => "pred_empty",
        Degeneracy::GtEmpty => "gt_empty",
    }
}

impl ReportEmitter for CsvEmitter {
    fn name(&self) -> &'static str {
        "csv"
    }

    fn emit(&self, reports: &[BenchReport]) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "config_name",
            "test_set",
            "section_id",
            "height",
            "width",
            "dice",
            "jaccard",
            "bcd",
            "modified_hausdorff",
            "degenerate",
        ])?;
        for r in reports {
            for row in &r.rows {
                let m = &row.metrics;
                w.write_record([
                    r.config_name.clone(),
                    r.test_set.clone(),
                    row.section_id.clone(),
                    row.height.to_string(),
                    row.width.to_string(),
                    m.dice.to_string(),
                    m.jaccard.to_string(),
                    opt(m.bcd),
                    opt(m.modified_hausdorff),
                    degeneracy_name(m.degenerate).to_string(),
                ])?;
            }
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

impl ReportEmitter for JsonEmitter {
    fn name(&self) -> &'static str {
        "json"
    }

    fn emit(&self, reports: &[BenchReport]) -> Result<Vec<u8>> {
        let mut out = serde_json::to_vec_pretty(reports)?;
        out.push(b'\n');
        Ok(out)
    }
}

fn first_seen<'a>(items: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut out: Vec<&str> = Vec::new();
    for s in items {
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

const COLUMN_LABELS: [&str; 3] = ["Dice", "BCD", "Hausdorff"];

impl ReportEmitter for MarkdownEmitter {
    fn name(&self) -> &'static str {
        "md"
    }

    fn emit(&self, reports: &[BenchReport]) -> Result<Vec<u8>> {
        let configs = first_seen(reports.iter().map(|r| r.config_name.as_str()));
        let sets = first_seen(reports.iter().map(|r| r.test_set.as_str()));
        let find = |c: &str, t: &str| reports.iter().find(|r| r.config_name == c && r.test_set == t);
        let mut s = String::new();

        s.push_str("| Training configuration |");
        for t in &sets {
            for label in COLUMN_LABELS {
                let _ = write!(s, " {t} {label} |");
            }
        }
        s.push_str("\n|---|");
        s.push_str(&"---:|".repeat(sets.len() * COLUMN_LABELS.len()));
        s.push('\n');
        for c in &configs {
            let _ = write!(s, "| {c} |");
            for t in &sets {
                for metric in RANKED_METRICS {
                    let cell = find(c, t)
                        .and_then(|r| r.aggregates.get(metric))
                        .map(|a| a.render())
                        .unwrap_or_else(|| "-".into());
                    let _ = write!(s, " {cell} |");
                }
            }
            s.push('\n');
        }

        s.push_str("\n## Ranking\n\n| Test set | Best | Second | Worst |\n|---|---|---|---|\n");
        for t in &sets {
            let with = |rank: Rank| {
                let names: Vec<&str> = reports
                    .iter()
                    .filter(|r| r.test_set == *t && r.rank == rank)
                    .map(|r| r.config_name.as_str())
                    .collect();
                if names.is_empty() {
                    "-".to_string()
                } else {
                    names.join(", ")
                }
            };
            let _ = writeln!(s, "| {t} | {} | {} | {} |", with(Rank::Best), with(Rank::Second), with(Rank::Worst));
        }
        Ok(s.into_bytes())
    }
}

/// Built-in emitters: `csv`, `json`, `md`.
pub fn emitters() -> Registry<dyn ReportEmitter> {
    let mut reg: Registry<dyn ReportEmitter> = Registry::new("report format");
    reg.register("csv", Arc::new(CsvEmitter));
    reg.register("json", Arc::new(JsonEmitter));
    reg.register("md", Arc::new(MarkdownEmitter));
    reg.register("markdown", Arc::new(MarkdownEmitter));
    reg
}

pub fn emit_report(reports: &[BenchReport], format: ReportFormat) -> Result<Vec<u8>> {
    if reports.is_empty() {
        return Err(Error::InvalidArgument("no reports to emit".into()));
    }
    emitters().get(format.name())?.emit(reports)
}
