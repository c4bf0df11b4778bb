use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::aggregate::{MetricAggregate, RANKED_METRICS};
use super::eval::EvalRecord;
use crate::error::{Error, Result};
use crate::metrics::{metrics, Direction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rank {
    Best,
    Second,
    Worst,
    #[default]
    Unranked,
}

/// One training configuration evaluated on one test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config_name: String,
    pub test_set: String,
    pub rows: Vec<EvalRecord>,
    pub aggregates: BTreeMap<String, MetricAggregate>,
    #[serde(default)]
    pub rank: Rank,
}

impl BenchReport {
    pub fn mean(&self, metric: &str) -> Option<f64> {
        self.aggregates.get(metric).map(|a| a.mean)
    }
}

struct Scores {
    /// Per ranked metric, oriented so that larger is better.
    oriented: Vec<f64>,
    dice: f64,
}

/// Members of `pool` that are (tied) extreme on at least two of the three
/// ranked metrics; `best` selects the top rather than the bottom.
fn two_of_three(scores: &[Scores], pool: &[usize], best: bool) -> Vec<usize> {
    let m = RANKED_METRICS.len();
    let mut votes = vec![0usize; scores.len()];
    for k in 0..m {
        let vals = pool.iter().map(|&i| scores[i].oriented[k]);
        let target = if best {
            vals.fold(f64::NEG_INFINITY, f64::max)
        } else {
            vals.fold(f64::INFINITY, f64::min)
        };
        for &i in pool {
            if scores[i].oriented[k] == target {
                votes[i] += 1;
            }
        }
    }
    pool.iter().copied().filter(|&i| votes[i] >= 2).collect()
}

/// Ties between qualifying configurations are broken by Dice, then by
/// input order.
fn pick(scores: &[Scores], candidates: &[usize], best: bool) -> Option<usize> {
    candidates.iter().copied().reduce(|a, b| {
        let better = if best { scores[b].dice > scores[a].dice } else { scores[b].dice < scores[a].dice };
        if better {
            b
        } else {
            a
        }
    })
}

/// Assigns Best, Second and Worst among the reports for `test_set`.
///
/// Best is the configuration that wins at least two of highest Dice,
/// lowest BCD and lowest modified Hausdorff. Second applies the same rule
/// to the remaining configurations. Worst is a remaining configuration
/// that loses at least two of the three across all configurations. Ties on
/// a metric share its vote. Everything else is Unranked.
pub fn rank_configs(reports: &mut [BenchReport], test_set: &str) -> Result<()> {
    let idx: Vec<usize> = (0..reports.len()).filter(|&i| reports[i].test_set == test_set).collect();
    if idx.len() < 2 {
        return Err(Error::InsufficientConfigs {
            test_set: test_set.to_string(),
            found: idx.len(),
        });
    }
    let registry = metrics();
    let mut scores = Vec::with_capacity(idx.len());
    for &i in &idx {
        let mut oriented = Vec::with_capacity(RANKED_METRICS.len());
        for name in RANKED_METRICS {
            let metric = registry.get(name)?;
            let mean = reports[i].mean(name).ok_or_else(|| {
                Error::InvalidArgument(format!("report {} lacks a {name} aggregate", reports[i].config_name))
            })?;
            oriented.push(match metric.direction() {
                Direction::HigherIsBetter => mean,
                Direction::LowerIsBetter => -mean,
            });
        }
        let dice = reports[i].mean("dice").unwrap_or(f64::NAN);
        scores.push(Scores { oriented, dice });
    }

    let all: Vec<usize> = (0..idx.len()).collect();
    let mut ranks = vec![Rank::Unranked; idx.len()];
    if let Some(best) = pick(&scores, &two_of_three(&scores, &all, true), true) {
        ranks[best] = Rank::Best;
        let rest: Vec<usize> = all.iter().copied().filter(|&i| i != best).collect();
        if rest.len() >= 2 {
            if let Some(second) = pick(&scores, &two_of_three(&scores, &rest, true), true) {
                ranks[second] = Rank::Second;
            }
        }
    }
    let losers: Vec<usize> = two_of_three(&scores, &all, false)
        .into_iter()
        .filter(|&i| ranks[i] == Rank::Unranked)
        .collect();
    if let Some(worst) = pick(&scores, &losers, false) {
        ranks[worst] = Rank::Worst;
    }
    for (k, &i) in idx.iter().enumerate() {
        reports[i].rank = ranks[k];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn report(name: &str, dice: f64, bcd: f64, mhd: f64) -> BenchReport {
        let agg = |mean| MetricAggregate {
            mean,
            std: 0.0,
            count: 1,
            degenerate_count: 0,
        };
        BenchReport {
            config_name: name.into(),
            test_set: "t".into(),
            rows: vec![],
            aggregates: [
                ("dice".to_string(), agg(dice)),
                ("jaccard".to_string(), agg(dice / (2.0 - dice))),
                ("bcd".to_string(), agg(bcd)),
                ("modified_hausdorff".to_string(), agg(mhd)),
            ]
            .into_iter()
            .collect(),
            rank: Rank::Unranked,
        }
    }

    fn ranks(r: &[BenchReport]) -> Vec<Rank> {
        r.iter().map(|x| x.rank).collect()
    }

    #[test]
    fn dominating_config_is_best() {
        let mut r = vec![report("a", 0.9, 1.0, 1.0), report("b", 0.1, 9.0, 9.0)];
        rank_configs(&mut r, "t").unwrap();
        assert_eq!(ranks(&r), [Rank::Best, Rank::Worst]);
    }

    #[test]
    fn two_votes_beat_one() {
        let mut r = vec![report("a", 0.9, 5.0, 5.0), report("b", 0.5, 1.0, 1.0)];
        rank_configs(&mut r, "t").unwrap();
        assert_eq!(r[1].rank, Rank::Best);
    }

    #[test]
    fn split_votes_leave_unranked() {
        // Each config wins exactly one metric.
        let mut r = vec![
            report("a", 0.9, 5.0, 5.0),
            report("b", 0.5, 1.0, 6.0),
            report("c", 0.4, 6.0, 1.0),
        ];
        rank_configs(&mut r, "t").unwrap();
        assert!(r.iter().all(|x| x.rank != Rank::Best));
    }

    #[test]
    fn tie_broken_by_dice() {
        let mut r = vec![report("a", 0.5, 1.0, 1.0), report("b", 0.6, 1.0, 1.0)];
        rank_configs(&mut r, "t").unwrap();
        assert_eq!(ranks(&r), [Rank::Worst, Rank::Best]);
    }

    #[test]
    fn needs_two_configs() {
        let mut r = vec![report("a", 0.5, 1.0, 1.0)];
        assert!(matches!(
            rank_configs(&mut r, "t"),
            Err(Error::InsufficientConfigs { found: 1, .. })
        ));
        assert!(rank_configs(&mut r, "other").is_err());
    }
}
