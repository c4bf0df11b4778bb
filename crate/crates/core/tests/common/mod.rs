//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use faultbench::{FaultMask, ProbabilityMap};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_mask(rng: &mut ChaCha8Rng, h: usize, w: usize, density: f64) -> FaultMask {
    FaultMask::new(Array2::from_shape_fn((h, w), |_| rng.random_bool(density)))
}

/// A few random straight strokes, each 2 to 5 pixels thick.
pub fn thick_strokes(rng: &mut ChaCha8Rng, h: usize, w: usize) -> FaultMask {
    let mut m = FaultMask::empty(h, w);
    for _ in 0..rng.random_range(1..=3) {
        let (r0, c0) = (rng.random_range(0..h) as f64, rng.random_range(0..w) as f64);
        let (r1, c1) = (rng.random_range(0..h) as f64, rng.random_range(0..w) as f64);
        let half = rng.random_range(1.0..2.5);
        let (dr, dc) = (r1 - r0, c1 - c0);
        let len2 = (dr * dr + dc * dc).max(1e-12);
        for r in 0..h {
            for c in 0..w {
                let t = (((r as f64 - r0) * dr + (c as f64 - c0) * dc) / len2).clamp(0.0, 1.0);
                let (pr, pc) = (r0 + t * dr, c0 + t * dc);
                if (r as f64 - pr).hypot(c as f64 - pc) <= half {
                    m.set(r, c, true);
                }
            }
        }
    }
    m
}

pub fn random_probability(rng: &mut ChaCha8Rng, h: usize, w: usize) -> ProbabilityMap {
    ProbabilityMap::new(Array2::from_shape_fn((h, w), |_| rng.random::<f64>())).unwrap()
}

fn points(m: &FaultMask) -> Vec<(f64, f64)> {
    m.points().into_iter().map(|(r, c)| (r as f64, c as f64)).collect()
}

/// Squared distance from each point of `from` to its nearest point of `to`,
/// by exhaustive search.
fn nearest_sq(from: &[(f64, f64)], to: &[(f64, f64)]) -> Vec<f64> {
    from.iter()
        .map(|&(r, c)| {
            to.iter()
                .map(|&(r2, c2)| (r - r2) * (r - r2) + (c - c2) * (c - c2))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn brute_dice(p: &FaultMask, g: &FaultMask) -> f64 {
    let inter = p.grid().iter().zip(g.grid().iter()).filter(|(a, b)| **a && **b).count();
    let total = p.count() + g.count();
    if total == 0 {
        1.0
    } else {
        2.0 * inter as f64 / total as f64
    }
}

pub fn brute_jaccard(p: &FaultMask, g: &FaultMask) -> f64 {
    let inter = p.grid().iter().zip(g.grid().iter()).filter(|(a, b)| **a && **b).count();
    let union = p.grid().iter().zip(g.grid().iter()).filter(|(a, b)| **a || **b).count();
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// `None` when either mask is empty.
pub fn brute_bcd(p: &FaultMask, g: &FaultMask) -> Option<f64> {
    let (pp, gg) = (points(p), points(g));
    if pp.is_empty() || gg.is_empty() {
        return None;
    }
    Some(mean(&nearest_sq(&pp, &gg)) + mean(&nearest_sq(&gg, &pp)))
}

pub fn brute_mhd(p: &FaultMask, g: &FaultMask) -> Option<f64> {
    let (pp, gg) = (points(p), points(g));
    if pp.is_empty() || gg.is_empty() {
        return None;
    }
    let d = |a: &[(f64, f64)], b: &[(f64, f64)]| mean(&nearest_sq(a, b).iter().map(|x| x.sqrt()).collect::<Vec<_>>());
    Some(d(&pp, &gg).max(d(&gg, &pp)))
}

/// Exhaustive threshold search: score every grid value independently and
/// keep the first maximum in ascending order.
pub fn exhaustive_ods(preds: &[ProbabilityMap], gts: &[FaultMask], grid: &[f64], standardize: bool) -> (f64, f64) {
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    for &t in &sorted {
        let (mut inter, mut total) = (0usize, 0usize);
        for (p, g) in preds.iter().zip(gts) {
            let mut m = FaultMask::new(p.values().mapv(|v| v >= t));
            if standardize {
                m = faultbench::morph::standardize(&m);
            }
            for (a, b) in m.grid().iter().zip(g.grid().iter()) {
                inter += (*a && *b) as usize;
                total += *a as usize + *b as usize;
            }
        }
        let score = if total == 0 { 1.0 } else { 2.0 * inter as f64 / total as f64 };
        if score > best.1 {
            best = (t, score);
        }
    }
    best
}

/// Central finite-difference gradient of `f` at `x`.
pub fn finite_difference(x: &Array2<f64>, h: f64, f: impl Fn(&Array2<f64>) -> f64) -> Array2<f64> {
    let mut grad = Array2::zeros(x.dim());
    let mut probe = x.clone();
    for (idx, g) in grad.indexed_iter_mut() {
        let orig = probe[idx];
        probe[idx] = orig + h;
        let up = f(&probe);
        probe[idx] = orig - h;
        let down = f(&probe);
        probe[idx] = orig;
        *g = (up - down) / (2.0 * h);
    }
    grad
}

/// Largest element-wise relative error, with magnitudes below `floor`
/// compared absolutely.
pub fn max_relative_error(a: &Array2<f64>, b: &Array2<f64>, floor: f64) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(floor))
        .fold(0.0, f64::max)
}
