//! Optimal Dataset Scale (ODS) thresholding: one binarization threshold per
//! model, chosen on training predictions and reused on test predictions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morph;
use crate::types::{FaultMask, ProbabilityMap};

/// How per-section overlap is pooled into a dataset score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreMode {
    /// Global Dice over pooled pixel counts.
    #[default]
    Micro,
    /// Mean of per-section Dice.
    Macro,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OdsOptions {
    /// Standardize binarized predictions before scoring.
    pub standardize: bool,
    pub mode: ScoreMode,
}

impl Default for OdsOptions {
    fn default() -> Self {
        Self {
            standardize: true,
            mode: ScoreMode::Micro,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub best_threshold: f64,
    pub best_score: f64,
    /// `(threshold, score)` with strictly increasing thresholds.
    pub curve: Vec<(f64, f64)>,
}

/// Thresholds `k * step` for `k = 1, 2, ...` strictly below 1.
///
/// The default step of 0.01 gives 0.01, 0.02, ..., 0.99.
pub fn grid_from_step(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidGrid(format!("step {step} must lie in (0, 1]")));
    }
    let steps = ((1.0 / step) - 1e-9).ceil() as usize;
    let grid: Vec<f64> = (1..steps.max(1) + 1)
        .map(|k| k as f64 * step)
        .filter(|&t| t < 1.0 - 1e-12)
        .collect();
    if grid.is_empty() {
        // step == 1: the only meaningful threshold is 1 itself.
        return Ok(vec![1.0]);
    }
    Ok(grid)
}

pub fn default_grid() -> Vec<f64> {
    (1..=99).map(|k| k as f64 / 100.0).collect()
}

/// Fault where `value >= t`.
pub fn binarize(pred: &ProbabilityMap, t: f64) -> FaultMask {
    FaultMask::new(pred.values().mapv(|v| v >= t))
}

fn checked_grid(grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("grid is empty".into()));
    }
    if let Some(t) = grid.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::InvalidGrid(format!("threshold {t} outside [0, 1]")));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    Ok(sorted)
}

fn score_at(preds: &[ProbabilityMap], gts: &[FaultMask], t: f64, opts: &OdsOptions) -> Result<f64> {
    let mut inter = 0usize;
    let mut total = 0usize;
    let mut dice_sum = 0.0;
    for (pred, gt) in preds.iter().zip(gts) {
        pred.ensure_dims(gt.dims())?;
        let mut mask = binarize(pred, t);
        if opts.standardize {
            mask = morph::standardize(&mask);
        }
        let (mut i, mut s) = (0usize, 0usize);
        for (&p, &g) in mask.grid().iter().zip(gt.grid().iter()) {
            i += (p && g) as usize;
            s += p as usize + g as usize;
        }
        inter += i;
        total += s;
        dice_sum += if s == 0 { 1.0 } else { 2.0 * i as f64 / s as f64 };
    }
    Ok(match opts.mode {
        ScoreMode::Micro if total == 0 => 1.0,
        ScoreMode::Micro => 2.0 * inter as f64 / total as f64,
        ScoreMode::Macro => dice_sum / preds.len() as f64,
    })
}

/// Scores every grid threshold and returns the best; ties go to the
/// smaller threshold. Thresholds are evaluated in parallel and reduced in
/// ascending order, so the result does not depend on scheduling.
pub fn ods_search(
    preds: &[ProbabilityMap],
    gts: &[FaultMask],
    grid: &[f64],
    opts: &OdsOptions,
) -> Result<ThresholdResult> {
    if preds.len() != gts.len() {
        return Err(Error::LengthMismatch {
            left: preds.len(),
            right: gts.len(),
        });
    }
    if preds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let grid = checked_grid(grid)?;
    let curve: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&t| score_at(preds, gts, t, opts).map(|s| (t, s)))
        .collect::<Result<_>>()?;
    let (best_threshold, best_score) = curve
        .iter()
        .copied()
        .fold(None, |best: Option<(f64, f64)>, (t, s)| match best {
            Some((_, bs)) if s <= bs => best,
            _ => Some((t, s)),
        })
        .expect("grid is nonempty");
    Ok(ThresholdResult {
        best_threshold,
        best_score,
        curve,
    })
}

/// Binarizes test predictions at the selected threshold, then optionally
/// standardizes each mask.
pub fn apply_threshold(preds: &[ProbabilityMap], result: &ThresholdResult, standardize: bool) -> Vec<FaultMask> {
    preds
        .par_iter()
        .map(|p| {
            let m = binarize(p, result.best_threshold);
            if standardize {
                morph::standardize(&m)
            } else {
                m
            }
        })
        .collect()
}
