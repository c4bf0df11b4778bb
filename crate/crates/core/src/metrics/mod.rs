//! Region overlap (Dice, Jaccard) and boundary distance (modified
//! Hausdorff, bidirectional Chamfer) metrics between binary masks.
//!
//! Distances use `(row, col)` pixel centres on the integer lattice. The
//! distance-based metrics go through an exact distance transform of each
//! mask, so one evaluation costs O(pixels) rather than O(|P| * |G|).

mod edt;

use std::sync::Arc;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

pub use edt::{distance_transform, squared_distance_transform};

use crate::error::{Error, MaskSide, Result};
use crate::registry::Registry;
use crate::types::FaultMask;

/// Why the distance metrics of a pair are undefined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degeneracy {
    None,
    BothEmpty,
    PredEmpty,
    GtEmpty,
}

impl Degeneracy {
    pub fn of(pred: &FaultMask, gt: &FaultMask) -> Self {
        match (pred.is_empty(), gt.is_empty()) {
            (true, true) => Degeneracy::BothEmpty,
            (true, false) => Degeneracy::PredEmpty,
            (false, true) => Degeneracy::GtEmpty,
            (false, false) => Degeneracy::None,
        }
    }
}

/// All four metrics for one prediction/ground-truth pair.
///
/// Distance fields are `None` exactly when the pair is degenerate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub dice: f64,
    pub jaccard: f64,
    /// Squared-pixel units.
    pub bcd: Option<f64>,
    /// Pixel units.
    pub modified_hausdorff: Option<f64>,
    pub degenerate: Degeneracy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Overlap {
    intersection: usize,
    pred: usize,
    gt: usize,
}

fn overlap(pred: &FaultMask, gt: &FaultMask) -> Result<Overlap> {
    pred.ensure_same_dims(gt)?;
    let mut o = Overlap {
        intersection: 0,
        pred: 0,
        gt: 0,
    };
    for (&p, &g) in pred.grid().iter().zip(gt.grid().iter()) {
        o.pred += p as usize;
        o.gt += g as usize;
        o.intersection += (p && g) as usize;
    }
    Ok(o)
}

impl Overlap {
    fn dice(&self) -> f64 {
        let denom = self.pred + self.gt;
        if denom == 0 {
            1.0
        } else {
            2.0 * self.intersection as f64 / denom as f64
        }
    }

    fn jaccard(&self) -> f64 {
        let union = self.pred + self.gt - self.intersection;
        if union == 0 {
            1.0
        } else {
            self.intersection as f64 / union as f64
        }
    }
}

/// `2|P ∩ G| / (|P| + |G|)`; 1.0 when both masks are empty.
pub fn dice(pred: &FaultMask, gt: &FaultMask) -> Result<f64> {
    Ok(overlap(pred, gt)?.dice())
}

/// `|P ∩ G| / |P ∪ G|`; 1.0 when both masks are empty.
pub fn jaccard(pred: &FaultMask, gt: &FaultMask) -> Result<f64> {
    Ok(overlap(pred, gt)?.jaccard())
}

/// Sums of squared and plain nearest-neighbour distances from each pixel of
/// `from` to the set whose squared distance transform is `to_sq`.
#[derive(Debug, Clone, Copy)]
struct Directed {
    mean_sq: f64,
    mean: f64,
}

fn directed(from: &FaultMask, to_sq: &Array2<f64>) -> Directed {
    let (mut sum_sq, mut sum, mut n) = (0.0, 0.0, 0usize);
    for (&v, &d2) in from.grid().iter().zip(to_sq.iter()) {
        if v {
            sum_sq += d2;
            sum += d2.sqrt();
            n += 1;
        }
    }
    Directed {
        mean_sq: sum_sq / n as f64,
        mean: sum / n as f64,
    }
}

fn directed_pair(pred: &FaultMask, gt: &FaultMask) -> Result<(Directed, Directed)> {
    pred.ensure_same_dims(gt)?;
    if pred.is_empty() {
        return Err(Error::EmptyMask(MaskSide::Pred));
    }
    if gt.is_empty() {
        return Err(Error::EmptyMask(MaskSide::Gt));
    }
    let to_gt = squared_distance_transform(gt)?;
    let to_pred = squared_distance_transform(pred)?;
    Ok((directed(pred, &to_gt), directed(gt, &to_pred)))
}

/// Larger of the two mean nearest-neighbour distances, in pixels.
pub fn modified_hausdorff(pred: &FaultMask, gt: &FaultMask) -> Result<f64> {
    let (pg, gp) = directed_pair(pred, gt)?;
    Ok(pg.mean.max(gp.mean))
}

/// Sum of the two mean squared nearest-neighbour distances.
pub fn bcd(pred: &FaultMask, gt: &FaultMask) -> Result<f64> {
    let (pg, gp) = directed_pair(pred, gt)?;
    Ok(pg.mean_sq + gp.mean_sq)
}

pub fn evaluate_pair(pred: &FaultMask, gt: &FaultMask) -> Result<MetricResult> {
    let o = overlap(pred, gt)?;
    let degenerate = Degeneracy::of(pred, gt);
    let (bcd, modified_hausdorff) = if degenerate == Degeneracy::None {
        let (pg, gp) = directed_pair(pred, gt)?;
        (Some(pg.mean_sq + gp.mean_sq), Some(pg.mean.max(gp.mean)))
    } else {
        (None, None)
    };
    Ok(MetricResult {
        dice: o.dice(),
        jaccard: o.jaccard(),
        bcd,
        modified_hausdorff,
        degenerate,
    })
}

/// Whether larger or smaller values of a metric are better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    HigherIsBetter,
    LowerIsBetter,
}

/// One named evaluation metric.
pub trait Metric: Send + Sync {
    fn name(&self) -> &'static str;
    fn direction(&self) -> Direction;
    /// Evaluates the metric on a single pair.
    fn compute(&self, pred: &FaultMask, gt: &FaultMask) -> Result<f64>;
    /// Picks this metric out of a full result; `None` when undefined.
    fn select(&self, result: &MetricResult) -> Option<f64>;
    /// Whether the metric is a distance (undefined for empty masks).
    fn is_distance(&self) -> bool {
        self.direction() == Direction::LowerIsBetter
    }
}

pub struct Dice;
pub struct Jaccard;
pub struct Bcd;
pub struct ModifiedHausdorff;

impl Metric for Dice {
    fn name(&self) -> &'static str {
        "dice"
    }
    fn direction(&self) -> Direction {
        Direction::HigherIsBetter
    }
    fn compute(&self, pred: &FaultMask, gt: &FaultMask) -> Result<f64> {
        dice(pred, gt)
    }
    fn select(&self, result: &MetricResult) -> Option<f64> {
        Some(result.dice)
    }
}

impl Metric for Jaccard {
    fn name(&self) -> &'static str {
        "jaccard"
    }
    fn direction(&self) -> Direction {
        Direction::HigherIsBetter
    }
    fn compute(&self, pred: &FaultMask, gt: &FaultMask) -> Result<f64> {
        jaccard(pred, gt)
    }
    fn select(&self, result: &MetricResult) -> Option<f64> {
        Some(result.jaccard)
    }
}

impl Metric for Bcd {
    fn name(&self) -> &'static str {
        "bcd"
    }
    fn direction(&self) -> Direction {
        Direction::LowerIsBetter
    }
    fn compute(&self, pred: &FaultMask, gt: &FaultMask) -> Result<f64> {
        bcd(pred, gt)
    }
    fn select(&self, result: &MetricResult) -> Option<f64> {
        result.bcd
    }
}

impl Metric for ModifiedHausdorff {
    fn name(&self) -> &'static str {
        "modified_hausdorff"
    }
    fn direction(&self) -> Direction {
        Direction::LowerIsBetter
    }
    fn compute(&self, pred: &FaultMask, gt: &FaultMask) -> Result<f64> {
        modified_hausdorff(pred, gt)
    }
    fn select(&self, result: &MetricResult) -> Option<f64> {
        result.modified_hausdorff
    }
}

/// Built-in metrics: `dice`, `jaccard`, `bcd`, `modified_hausdorff`
/// (alias `hausdorff`).
pub fn metrics() -> Registry<dyn Metric> {
    let mut reg: Registry<dyn Metric> = Registry::new("metric");
    reg.register("dice", Arc::new(Dice));
    reg.register("jaccard", Arc::new(Jaccard));
    reg.register("bcd", Arc::new(Bcd));
    reg.register("modified_hausdorff", Arc::new(ModifiedHausdorff));
    reg.register("hausdorff", Arc::new(ModifiedHausdorff));
    reg
}

/// Metric names in canonical reporting order.
pub const METRIC_NAMES: [&str; 4] = ["dice", "jaccard", "bcd", "modified_hausdorff"];
