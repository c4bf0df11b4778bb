//! Exact Euclidean distance transform (Felzenszwalb & Huttenlocher):
//! a 1D lower-envelope-of-parabolas pass over columns, then over rows.

use ndarray::{Array2, Axis};

use crate::error::{Error, MaskSide, Result};
use crate::types::FaultMask;

/// Squared distance transform of a sampled function along one line.
///
/// `f` holds squared distances (or `INFINITY` where unknown). Only finite
/// entries contribute parabolas, so the result is exact in integer
/// arithmetic; a line with no finite entry stays infinite.
fn transform_line(f: &[f64], out: &mut [f64], sites: &mut Vec<usize>, bounds: &mut Vec<f64>) {
    sites.clear();
    bounds.clear();
    for (q, &fq) in f.iter().enumerate() {
        if !fq.is_finite() {
            continue;
        }
        let qf = q as f64;
        loop {
            let Some(&v) = sites.last() else {
                sites.push(q);
                bounds.push(f64::NEG_INFINITY);
                break;
            };
            let vf = v as f64;
            let s = ((fq + qf * qf) - (f[v] + vf * vf)) / (2.0 * (qf - vf));
            if s <= *bounds.last().expect("bounds track sites") {
                sites.pop();
                bounds.pop();
                continue;
            }
            sites.push(q);
            bounds.push(s);
            break;
        }
    }
    if sites.is_empty() {
        out.fill(f64::INFINITY);
        return;
    }
    let mut k = 0;
    for (q, slot) in out.iter_mut().enumerate() {
        let qf = q as f64;
        while k + 1 < sites.len() && bounds[k + 1] < qf {
            k += 1;
        }
        let v = sites[k];
        let d = qf - v as f64;
        *slot = d * d + f[v];
    }
}

/// Squared Euclidean distance from every pixel to the nearest foreground
/// pixel. Values are exact integers stored as `f64`.
pub fn squared_distance_transform(mask: &FaultMask) -> Result<Array2<f64>> {
    if mask.is_empty() {
        return Err(Error::EmptyMask(MaskSide::Gt));
    }
    let (h, w) = mask.dims();
    let mut grid = mask.grid().mapv(|v| if v { 0.0 } else { f64::INFINITY });
    let mut sites = Vec::with_capacity(h.max(w));
    let mut bounds = Vec::with_capacity(h.max(w));
    let mut line = vec![0.0; h.max(w)];
    let mut buf = vec![0.0; h.max(w)];

    for axis in [Axis(0), Axis(1)] {
        for mut lane in grid.lanes_mut(axis) {
            let n = lane.len();
            for (dst, src) in line[..n].iter_mut().zip(lane.iter()) {
                *dst = *src;
            }
            transform_line(&line[..n], &mut buf[..n], &mut sites, &mut bounds);
            for (dst, src) in lane.iter_mut().zip(&buf[..n]) {
                *dst = *src;
            }
        }
    }
    Ok(grid)
}

/// Euclidean distance from every pixel to the nearest foreground pixel.
pub fn distance_transform(mask: &FaultMask) -> Result<Array2<f64>> {
    Ok(squared_distance_transform(mask)?.mapv(f64::sqrt))
}
