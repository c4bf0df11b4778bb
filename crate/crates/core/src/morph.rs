//! Fault-annotation thickness standardization: thinning to a one-pixel
//! skeleton followed by dilation with a 3x3 structuring element.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::FaultMask;

/// A 3x3 structuring element, indexed `[row][col]` with the origin at `[1][1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuringElement([[bool; 3]; 3]);

impl StructuringElement {
    pub fn new(grid: [[bool; 3]; 3]) -> Result<Self> {
        if !grid[1][1] {
            return Err(Error::InvalidArgument(
                "structuring element must contain its center".into(),
            ));
        }
        Ok(Self(grid))
    }

    /// Full 3x3 square (8-neighbourhood).
    pub fn square() -> Self {
        Self([[true; 3]; 3])
    }

    /// Plus-shaped cross (4-neighbourhood).
    pub fn cross() -> Self {
        Self([[false, true, false], [true, true, true], [false, true, false]])
    }

    pub fn grid(&self) -> [[bool; 3]; 3] {
        self.0
    }

    fn offsets(&self) -> impl Iterator<Item = (isize, isize)> + '_ {
        (0..3).flat_map(move |r| {
            (0..3)
                .filter(move |&c| self.0[r][c])
                .map(move |c| (r as isize - 1, c as isize - 1))
        })
    }
}

impl Default for StructuringElement {
    fn default() -> Self {
        Self::square()
    }
}

impl std::str::FromStr for StructuringElement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "square" => Ok(Self::square()),
            "cross" => Ok(Self::cross()),
            other => Err(Error::InvalidArgument(format!(
                "unknown structuring element {other:?} (square, cross)"
            ))),
        }
    }
}

/// Parameters of [`standardize_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StandardizeOptions {
    pub element: StructuringElement,
    pub dilation_passes: usize,
}

impl Default for StandardizeOptions {
    fn default() -> Self {
        Self {
            element: StructuringElement::square(),
            dilation_passes: 1,
        }
    }
}

/// Neighbours P2..P9 clockwise from north; out-of-range pixels are background.
fn neighbours(grid: &Array2<bool>, r: usize, c: usize) -> [bool; 8] {
    let (h, w) = grid.dim();
    let at = |dr: isize, dc: isize| {
        let rr = r as isize + dr;
        let cc = c as isize + dc;
        rr >= 0 && cc >= 0 && (rr as usize) < h && (cc as usize) < w && grid[[rr as usize, cc as usize]]
    };
    [
        at(-1, 0),
        at(-1, 1),
        at(0, 1),
        at(1, 1),
        at(1, 0),
        at(1, -1),
        at(0, -1),
        at(-1, -1),
    ]
}

/// Zhang-Suen deletion test for subiteration `step` (0 or 1).
fn deletable(p: &[bool; 8], step: usize) -> bool {
    let b = p.iter().filter(|&&v| v).count();
    if !(2..=6).contains(&b) {
        return false;
    }
    let a = (0..8).filter(|&i| !p[i] && p[(i + 1) % 8]).count();
    if a != 1 {
        return false;
    }
    let [p2, _, p4, _, p6, _, p8, _] = *p;
    if step == 0 {
        !(p2 && p4 && p6) && !(p4 && p6 && p8)
    } else {
        !(p2 && p4 && p8) && !(p2 && p6 && p8)
    }
}

/// Thins every stroke to a one-pixel-wide skeleton.
///
/// Two-subiteration Zhang-Suen thinning. Within a subiteration, candidates
/// are found on the current image and then removed in raster order, each
/// re-tested against the partially thinned image. The re-test keeps 2x2
/// blocks and two-pixel diagonals from vanishing, so the number of
/// 8-connected components is preserved.
pub fn skeletonize(mask: &FaultMask) -> FaultMask {
    let mut grid = mask.grid().to_owned();
    let (h, w) = grid.dim();
    loop {
        let mut changed = false;
        for step in 0..2 {
            let candidates: Vec<(usize, usize)> = (0..h)
                .flat_map(|r| (0..w).map(move |c| (r, c)))
                .filter(|&(r, c)| grid[[r, c]] && deletable(&neighbours(&grid, r, c), step))
                .collect();
            for (r, c) in candidates {
                if deletable(&neighbours(&grid, r, c), step) {
                    grid[[r, c]] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    FaultMask::new(grid)
}

/// Binary dilation: a pixel is set when the reflected element centred on it
/// hits the foreground.
pub fn dilate(mask: &FaultMask, element: &StructuringElement) -> FaultMask {
    let grid = mask.grid();
    let (h, w) = grid.dim();
    let offsets: Vec<_> = element.offsets().collect();
    let mut out = Array2::from_elem((h, w), false);
    for ((r, c), _) in grid.indexed_iter().filter(|(_, &v)| v) {
        for &(dr, dc) in &offsets {
            let rr = r as isize + dr;
            let cc = c as isize + dc;
            if rr >= 0 && cc >= 0 && (rr as usize) < h && (cc as usize) < w {
                out[[rr as usize, cc as usize]] = true;
            }
        }
    }
    FaultMask::new(out)
}

/// Skeletonize, then dilate once with the full 3x3 square.
pub fn standardize(mask: &FaultMask) -> FaultMask {
    standardize_with(mask, &StandardizeOptions::default())
}

pub fn standardize_with(mask: &FaultMask, options: &StandardizeOptions) -> FaultMask {
    let mut out = skeletonize(mask);
    for _ in 0..options.dilation_passes {
        out = dilate(&out, &options.element);
    }
    out
}

/// Labels 8-connected foreground components; returns their count.
pub fn component_count(mask: &FaultMask) -> usize {
    let grid = mask.grid();
    let (h, w) = grid.dim();
    let mut seen = Array2::from_elem((h, w), false);
    let mut count = 0;
    let mut stack = Vec::new();
    for ((r, c), &v) in grid.indexed_iter() {
        if !v || seen[[r, c]] {
            continue;
        }
        count += 1;
        seen[[r, c]] = true;
        stack.push((r, c));
        while let Some((pr, pc)) = stack.pop() {
            for dr in -1isize..=1 {
                for dc in -1isize..=1 {
                    let rr = pr as isize + dr;
                    let cc = pc as isize + dc;
                    if rr < 0 || cc < 0 || rr as usize >= h || cc as usize >= w {
                        continue;
                    }
                    let (rr, cc) = (rr as usize, cc as usize);
                    if grid[[rr, cc]] && !seen[[rr, cc]] {
                        seen[[rr, cc]] = true;
                        stack.push((rr, cc));
                    }
                }
            }
        }
    }
    count
}

/// `true` when no foreground pixel has its entire 3x3 neighbourhood set.
pub fn is_thin(mask: &FaultMask) -> bool {
    let grid = mask.grid().to_owned();
    grid.indexed_iter()
        .filter(|(_, &v)| v)
        .all(|((r, c), _)| !neighbours(&grid, r, c).iter().all(|&n| n))
}
