//! Seeded synthetic fault masks and perturbations for probing how the
//! evaluation metrics react to noise, shifts, gaps and thickening.
//!
//! Every generator is a pure function of its spec, seed included.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{evaluate_pair, MetricResult};
use crate::types::FaultMask;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaultSpec {
    pub image_h: usize,
    pub image_w: usize,
    pub fault_count: usize,
    /// Inclusive range of fault lengths, in steps of one pixel.
    pub length_range: (usize, usize),
    /// Inclusive range of dips in degrees from horizontal (90 = vertical).
    pub dip_range: (f64, f64),
    /// Largest lateral drift added per step.
    pub waviness: f64,
    pub seed: u64,
}

impl FaultSpec {
    pub fn validate(&self) -> Result<()> {
        if self.image_h == 0 || self.image_w == 0 {
            return Err(Error::InvalidSpec("image dimensions must be positive".into()));
        }
        if self.length_range.0 == 0 || self.length_range.0 > self.length_range.1 {
            return Err(Error::InvalidSpec(format!(
                "length range {:?} must be nonempty and positive",
                self.length_range
            )));
        }
        if !self.dip_range.0.is_finite() || !self.dip_range.1.is_finite() || self.dip_range.0 > self.dip_range.1 {
            return Err(Error::InvalidSpec(format!("dip range {:?} is empty", self.dip_range)));
        }
        if !(self.waviness >= 0.0 && self.waviness.is_finite()) {
            return Err(Error::InvalidSpec(format!("waviness {} must be >= 0", self.waviness)));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..*self }
    }
}

/// SplitMix64 finalizer, used to derive independent child seeds.
pub fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_add(0x9e37_79b9_7f4a_7c15).rotate_left(17);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn sample_range(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// 8-connected Bresenham segment between two lattice points.
fn line(from: (i64, i64), to: (i64, i64), mut plot: impl FnMut(i64, i64)) {
    let (mut r, mut c) = from;
    let dr = (to.0 - r).abs();
    let dc = -(to.1 - c).abs();
    let sr = if r < to.0 { 1 } else { -1 };
    let sc = if c < to.1 { 1 } else { -1 };
    let mut err = dr + dc;
    loop {
        plot(r, c);
        if (r, c) == to {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dc {
            err += dc;
            r += sr;
        }
        if e2 <= dr {
            err += dr;
            c += sc;
        }
    }
}

/// Rasterizes `fault_count` one-pixel-thick polylines.
///
/// Each fault walks `length` unit steps along its dip, drifting sideways by
/// up to `waviness` per step. It is then translated to a random position
/// where it fits entirely, or clipped if it is larger than the image.
pub fn gen_faults(spec: &FaultSpec) -> Result<FaultMask> {
    spec.validate()?;
    let (h, w) = (spec.image_h as i64, spec.image_w as i64);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut mask = FaultMask::empty(spec.image_h, spec.image_w);

    for _ in 0..spec.fault_count {
        let length = rng.random_range(spec.length_range.0..=spec.length_range.1);
        let dip = sample_range(&mut rng, spec.dip_range.0, spec.dip_range.1).to_radians();
        let (sin, cos) = dip.sin_cos();
        let mut drift = 0.0;
        let mut points = Vec::with_capacity(length);
        for k in 0..length {
            if k > 0 && spec.waviness > 0.0 {
                drift += rng.random_range(-spec.waviness..=spec.waviness);
            }
            let along = k as f64;
            let r = along * sin + drift * cos;
            let c = along * cos - drift * sin;
            points.push((r.round() as i64, c.round() as i64));
        }
        let (min_r, max_r) = points.iter().fold((i64::MAX, i64::MIN), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
        let (min_c, max_c) = points.iter().fold((i64::MAX, i64::MIN), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)));
        let mut place = |min: i64, max: i64, extent: i64| {
            let span = max - min;
            if span < extent {
                rng.random_range(0..=extent - 1 - span) - min
            } else {
                rng.random_range(0..extent) - min
            }
        };
        let shift_r = place(min_r, max_r, h);
        let shift_c = place(min_c, max_c, w);

        let grid = mask.grid_mut();
        let mut plot = |r: i64, c: i64| {
            if (0..h).contains(&r) && (0..w).contains(&c) {
                grid[[r as usize, c as usize]] = true;
            }
        };
        let mut prev: Option<(i64, i64)> = None;
        for &(r, c) in &points {
            let cur = (r + shift_r, c + shift_c);
            match prev {
                Some(p) => line(p, cur, &mut plot),
                None => plot(cur.0, cur.1),
            }
            prev = Some(cur);
        }
    }
    Ok(mask)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerturbKind {
    /// Turn exactly `pixels` background pixels, chosen uniformly, into faults.
    SaltNoise { pixels: usize },
    /// Translate the foreground by `dx` columns and `dy` rows, clipping at borders.
    Shift { dx: i64, dy: i64 },
    /// Delete each foreground pixel independently with probability `gap_probability`.
    Fragment { gap_probability: f64 },
    /// Dilate with a Euclidean disk of radius `radius`.
    Thicken { radius: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbSpec {
    #[serde(flatten)]
    pub kind: PerturbKind,
    #[serde(default)]
    pub seed: u64,
}

impl PerturbSpec {
    pub fn new(kind: PerturbKind, seed: u64) -> Self {
        Self { kind, seed }
    }
}

/// Offsets `(dr, dc)` with `dr² + dc² <= radius²`.
pub fn disk(radius: usize) -> Vec<(i64, i64)> {
    let r = radius as i64;
    (-r..=r)
        .flat_map(|dr| (-r..=r).map(move |dc| (dr, dc)))
        .filter(|(dr, dc)| dr * dr + dc * dc <= r * r)
        .collect()
}

pub fn perturb(mask: &FaultMask, spec: &PerturbSpec) -> Result<FaultMask> {
    let (h, w) = mask.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match spec.kind {
        PerturbKind::SaltNoise { pixels } => {
            let background: Vec<usize> = mask
                .grid()
                .iter()
                .enumerate()
                .filter(|(_, &v)| !v)
                .map(|(i, _)| i)
                .collect();
            if pixels > background.len() {
                return Err(Error::SaltNoiseOverflow {
                    requested: pixels,
                    available: background.len(),
                });
            }
            let mut out = mask.clone();
            for i in index::sample(&mut rng, background.len(), pixels) {
                let flat = background[i];
                out.set(flat / w, flat % w, true);
            }
            Ok(out)
        }
        PerturbKind::Shift { dx, dy } => {
            let mut out = FaultMask::empty(h, w);
            for (r, c) in mask.points() {
                let rr = r as i64 + dy;
                let cc = c as i64 + dx;
                if (0..h as i64).contains(&rr) && (0..w as i64).contains(&cc) {
                    out.set(rr as usize, cc as usize, true);
                }
            }
            Ok(out)
        }
        PerturbKind::Fragment { gap_probability } => {
            if !(0.0..=1.0).contains(&gap_probability) {
                return Err(Error::InvalidSpec(format!(
                    "gap probability {gap_probability} outside [0, 1]"
                )));
            }
            let mut out = mask.clone();
            for (r, c) in mask.points() {
                if rng.random::<f64>() < gap_probability {
                    out.set(r, c, false);
                }
            }
            Ok(out)
        }
        PerturbKind::Thicken { radius } => {
            let offsets = disk(radius);
            let mut out = FaultMask::empty(h, w);
            for (r, c) in mask.points() {
                for &(dr, dc) in &offsets {
                    let rr = r as i64 + dr;
                    let cc = c as i64 + dc;
                    if (0..h as i64).contains(&rr) && (0..w as i64).contains(&cc) {
                        out.set(rr as usize, cc as usize, true);
                    }
                }
            }
            Ok(out)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    Few,
    Many,
}

/// One perturbed-vs-clean evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparsityRow {
    pub trial: usize,
    pub arm: Arm,
    pub fault_pixels: usize,
    pub dice: f64,
    pub jaccard: f64,
    pub bcd: f64,
    pub modified_hausdorff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmMeans {
    pub dice: f64,
    pub jaccard: f64,
    pub bcd: f64,
    pub modified_hausdorff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsityReport {
    pub rows: Vec<SparsityRow>,
    pub few: ArmMeans,
    pub many: ArmMeans,
}

fn arm_means(rows: &[SparsityRow], arm: Arm) -> ArmMeans {
    let sel: Vec<_> = rows.iter().filter(|r| r.arm == arm).collect();
    let n = sel.len().max(1) as f64;
    ArmMeans {
        dice: sel.iter().map(|r| r.dice).sum::<f64>() / n,
        jaccard: sel.iter().map(|r| r.jaccard).sum::<f64>() / n,
        bcd: sel.iter().map(|r| r.bcd).sum::<f64>() / n,
        modified_hausdorff: sel.iter().map(|r| r.modified_hausdorff).sum::<f64>() / n,
    }
}

/// The clean and noisy masks of one sparsity trial, where `trial_seed` is
/// the experiment seed plus the trial number.
pub fn sparsity_masks(spec: &FaultSpec, arm: Arm, noise_pixels: usize, trial_seed: u64) -> Result<(FaultMask, FaultMask)> {
    let arm_tag = arm as u64 + 1;
    let clean = gen_faults(&spec.with_seed(mix_seed(spec.seed, trial_seed)))?;
    let noisy = perturb(
        &clean,
        &PerturbSpec::new(
            PerturbKind::SaltNoise { pixels: noise_pixels },
            mix_seed(trial_seed, arm_tag),
        ),
    )?;
    Ok((clean, noisy))
}

fn sparsity_trial(spec: &FaultSpec, arm: Arm, trial: usize, noise_pixels: usize, trial_seed: u64) -> Result<SparsityRow> {
    let (clean, noisy) = sparsity_masks(spec, arm, noise_pixels, trial_seed)?;
    let m = evaluate_pair(&noisy, &clean)?;
    Ok(SparsityRow {
        trial,
        arm,
        fault_pixels: clean.count(),
        dice: m.dice,
        jaccard: m.jaccard,
        bcd: m.bcd.unwrap_or(0.0),
        modified_hausdorff: m.modified_hausdorff.unwrap_or(0.0),
    })
}

/// Adds the same amount of salt noise to sparse and dense fault masks and
/// scores each noisy mask against its clean original.
///
/// Trial `t` uses seed `seed + t`, so results do not depend on how trials
/// are scheduled across threads.
pub fn run_sparsity_experiment(
    few_spec: &FaultSpec,
    many_spec: &FaultSpec,
    noise_pixels: usize,
    trials: usize,
    seed: u64,
) -> Result<SparsityReport> {
    few_spec.validate()?;
    many_spec.validate()?;
    if few_spec.fault_count >= many_spec.fault_count {
        return Err(Error::InvalidSpec(format!(
            "few-fault arm ({}) must have fewer faults than the many-fault arm ({})",
            few_spec.fault_count, many_spec.fault_count
        )));
    }
    if (few_spec.image_h, few_spec.image_w) != (many_spec.image_h, many_spec.image_w) {
        return Err(Error::InvalidSpec("both arms must share image dimensions".into()));
    }
    let rows: Vec<SparsityRow> = (0..trials)
        .into_par_iter()
        .flat_map_iter(|t| {
            let ts = seed.wrapping_add(t as u64);
            [
                sparsity_trial(few_spec, Arm::Few, t, noise_pixels, ts),
                sparsity_trial(many_spec, Arm::Many, t, noise_pixels, ts),
            ]
        })
        .collect::<Result<_>>()?;
    Ok(SparsityReport {
        few: arm_means(&rows, Arm::Few),
        many: arm_means(&rows, Arm::Many),
        rows,
    })
}

/// Two perturbed predictions whose Dice and BCD orderings disagree:
/// `mask_b` has the higher Dice *and* the higher (worse) BCD.
#[derive(Debug, Clone, PartialEq)]
pub struct ContradictionPair {
    pub gt: FaultMask,
    pub mask_b: FaultMask,
    pub mask_c: FaultMask,
    pub metrics_b: MetricResult,
    pub metrics_c: MetricResult,
    pub recipe_b: Vec<PerturbSpec>,
    pub recipe_c: Vec<PerturbSpec>,
}

fn random_recipe(rng: &mut ChaCha8Rng) -> Vec<PerturbSpec> {
    loop {
        let mut recipe = Vec::new();
        if rng.random_bool(0.5) {
            let dx = rng.random_range(-3..=3);
            let dy = rng.random_range(-3..=3);
            recipe.push(PerturbSpec::new(PerturbKind::Shift { dx, dy }, 0));
        }
        if rng.random_bool(0.5) {
            let q = rng.random_range(0.05..=0.5);
            recipe.push(PerturbSpec::new(PerturbKind::Fragment { gap_probability: q }, rng.random()));
        }
        if rng.random_bool(0.5) {
            let radius = rng.random_range(1..=3);
            recipe.push(PerturbSpec::new(PerturbKind::Thicken { radius }, 0));
        }
        if !recipe.is_empty() {
            return recipe;
        }
    }
}

/// Searches shift/fragment/thicken combinations of a synthetic ground truth
/// for two candidates on which Dice and BCD disagree. Each of the `budget`
/// candidates is compared against all earlier ones; the first
/// contradicting pair is returned.
pub fn find_contradiction_pair(gt_spec: &FaultSpec, budget: usize, seed: u64) -> Result<ContradictionPair> {
    let gt = gen_faults(gt_spec)?;
    if gt.is_empty() {
        return Err(Error::InvalidSpec("ground truth has no faults".into()));
    }
    let mut seen: Vec<(FaultMask, MetricResult, Vec<PerturbSpec>)> = Vec::new();
    for i in 0..budget {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, i as u64));
        let recipe = random_recipe(&mut rng);
        let mut cand = gt.clone();
        for step in &recipe {
            cand = perturb(&cand, step)?;
        }
        if cand.is_empty() || cand == gt {
            continue;
        }
        let m = evaluate_pair(&cand, &gt)?;
        let (Some(bcd_new), dice_new) = (m.bcd, m.dice) else {
            continue;
        };
        for (prev, pm, precipe) in &seen {
            let bcd_prev = pm.bcd.expect("only non-degenerate candidates are kept");
            let found = if dice_new > pm.dice && bcd_new > bcd_prev {
                Some(((cand.clone(), m, recipe.clone()), (prev.clone(), *pm, precipe.clone())))
            } else if pm.dice > dice_new && bcd_prev > bcd_new {
                Some(((prev.clone(), *pm, precipe.clone()), (cand.clone(), m, recipe.clone())))
            } else {
                None
            };
            if let Some(((mask_b, metrics_b, recipe_b), (mask_c, metrics_c, recipe_c))) = found {
                return Ok(ContradictionPair {
                    gt,
                    mask_b,
                    mask_c,
                    metrics_b,
                    metrics_c,
                    recipe_b,
                    recipe_c,
                });
            }
        }
        seen.push((cand, m, recipe));
    }
    Err(Error::NotFoundWithinBudget(budget))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparsityConfig {
    pub few: FaultSpec,
    pub many: FaultSpec,
    pub noise_pixels: usize,
    pub trials: usize,
    pub seed: u64,
}

impl SparsityConfig {
    pub fn run(&self) -> Result<SparsityReport> {
        run_sparsity_experiment(&self.few, &self.many, self.noise_pixels, self.trials, self.seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContradictionConfig {
    pub gt: FaultSpec,
    pub budget: usize,
    pub seed: u64,
}

impl ContradictionConfig {
    pub fn run(&self) -> Result<ContradictionPair> {
        find_contradiction_pair(&self.gt, self.budget, self.seed)
    }
}

/// Frozen experiment configurations, versioned alongside the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaultlabDefaults {
    pub version: u32,
    pub sparsity: SparsityConfig,
    /// Regression bound on `|1 - dice|` for both sparsity arms.
    pub sparsity_dice_bound: f64,
    pub contradiction: ContradictionConfig,
}

const DEFAULTS_JSON: &str = include_str!("../defaults/faultlab.json");

impl FaultlabDefaults {
    pub fn load() -> Self {
        serde_json::from_str(DEFAULTS_JSON).expect("bundled faultlab defaults parse")
    }
}
