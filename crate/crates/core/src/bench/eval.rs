use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::split::SplitSpec;
use crate::error::{Error, Result};
use crate::metrics::{evaluate_pair, MetricResult};
use crate::morph;
use crate::threshold::binarize;
use crate::types::FaultMask;
use crate::volume_io::{read_mask_png, read_npy, NpyArray};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub section_id: String,
    pub height: usize,
    pub width: usize,
    pub metrics: MetricResult,
}

/// A matched pair that could not be scored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairFailure {
    pub section_id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRun {
    pub records: Vec<EvalRecord>,
    pub failures: Vec<PairFailure>,
    pub unmatched_pred: Vec<String>,
    pub unmatched_gt: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    pub standardize_gt: bool,
    pub standardize_pred: bool,
    /// Cut-off applied to probability-map predictions.
    pub threshold: f64,
    /// Restrict evaluation to the split's test sections, indexed by the
    /// sorted ground-truth stems.
    pub split: Option<SplitSpec>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            standardize_gt: true,
            standardize_pred: true,
            threshold: 0.5,
            split: None,
        }
    }
}

/// Reads a `.png` mask or a `.npy` mask/probability map. Probability maps
/// are binarized at `threshold`.
pub fn load_mask(path: &Path, threshold: f64) -> Result<FaultMask> {
    let bytes = fs::read(path)?;
    match extension(path).as_deref() {
        Some("png") => read_mask_png(&bytes),
        Some("npy") => match read_npy(&bytes)? {
            NpyArray::Mask(m) => Ok(m),
            NpyArray::Probability(p) => Ok(binarize(&p, threshold)),
            NpyArray::Volume(_) => Err(Error::UnsupportedRank(3)),
        },
        _ => Err(Error::InvalidArgument(format!("{}: expected a .png or .npy mask", path.display()))),
    }
}

fn extension(path: &Path) -> Option<String> {
    path.extension().map(|e| e.to_string_lossy().to_ascii_lowercase())
}

/// Mask files in `dir` keyed by stem. A stem present as both `.png` and
/// `.npy` is ambiguous and rejected.
fn mask_files(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if !path.is_file() || !matches!(extension(&path).as_deref(), Some("png" | "npy")) {
            continue;
        }
        let stem = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        if let Some(prev) = out.insert(stem.clone(), path.clone()) {
            return Err(Error::InvalidArgument(format!(
                "stem {stem} matches both {} and {}",
                prev.display(),
                path.display()
            )));
        }
    }
    Ok(out)
}

/// Height, width and metrics of one scored pair.
type Scored = (usize, usize, MetricResult);

fn score_pair(pred: &Path, gt: &Path, opts: &EvalOptions) -> Result<Scored> {
    let mut p = load_mask(pred, opts.threshold)?;
    let mut g = load_mask(gt, opts.threshold)?;
    p.ensure_same_dims(&g)?;
    if opts.standardize_pred {
        p = morph::standardize(&p);
    }
    if opts.standardize_gt {
        g = morph::standardize(&g);
    }
    Ok((g.height(), g.width(), evaluate_pair(&p, &g)?))
}

/// Scores every prediction against the label with the same file stem.
///
/// Pairs are processed in sorted stem order; a pair that fails to load or
/// has mismatched dimensions becomes a [`PairFailure`] instead of aborting
/// the run.
pub fn evaluate_run(pred_dir: &Path, gt_dir: &Path, opts: &EvalOptions) -> Result<EvalRun> {
    let preds = mask_files(pred_dir)?;
    let mut gts = mask_files(gt_dir)?;
    if let Some(split) = &opts.split {
        let stems: Vec<String> = gts.keys().cloned().collect();
        let keep: Vec<String> = split.select_test(&stems)?.into_iter().cloned().collect();
        gts.retain(|k, _| keep.contains(k));
    }
    let pairs: Vec<(&String, &PathBuf, &PathBuf)> = gts
        .iter()
        .filter_map(|(stem, g)| preds.get(stem).map(|p| (stem, p, g)))
        .collect();
    if pairs.is_empty() {
        return Err(Error::NoPairsFound);
    }
    let outcomes: Vec<(String, Result<Scored>)> = pairs
        .par_iter()
        .map(|(stem, p, g)| ((*stem).clone(), score_pair(p, g, opts)))
        .collect();

    let mut run = EvalRun {
        records: Vec::new(),
        failures: Vec::new(),
        unmatched_pred: preds.keys().filter(|k| !gts.contains_key(*k)).cloned().collect(),
        unmatched_gt: gts.keys().filter(|k| !preds.contains_key(*k)).cloned().collect(),
    };
    for (section_id, outcome) in outcomes {
        match outcome {
            Ok((height, width, metrics)) => run.records.push(EvalRecord {
                section_id,
                height,
                width,
                metrics,
            }),
            Err(e) => run.failures.push(PairFailure {
                section_id,
                error: e.to_string(),
            }),
        }
    }
    Ok(run)
}
