//! Reference implementations of the segmentation training losses, with
//! closed-form gradients, for checking external training code.

use std::sync::Arc;

use ndarray::{Array2, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::registry::Registry;
use crate::types::{FaultMask, ProbabilityMap};

pub const DEFAULT_CLAMP_EPS: f64 = 1e-7;
pub const DEFAULT_DICE_EPS: f64 = 1e-6;

/// A scalar loss over a probability map and a binary target.
pub trait Loss: Send + Sync {
    fn name(&self) -> &'static str;
    fn value(&self, pred: &ProbabilityMap, target: &FaultMask) -> Result<f64>;
    /// `dL/dp_i` at every pixel.
    fn gradient(&self, pred: &ProbabilityMap, target: &FaultMask) -> Result<Array2<f64>>;
}

fn check_dims(pred: &ProbabilityMap, target: &FaultMask) -> Result<()> {
    pred.ensure_dims(target.dims())
}

/// Pixel-wise binary cross-entropy, with predictions clipped to
/// `[eps, 1 - eps]` before the logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bce {
    pub clamp_eps: f64,
}

/// Soft Dice loss `1 - (2 Σ p y + eps) / (Σ p + Σ y + eps)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiceLoss {
    pub eps: f64,
}

/// `alpha * BCE + (1 - alpha) * Dice`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hybrid {
    pub alpha: f64,
    pub bce: Bce,
    pub dice: DiceLoss,
}

impl Default for Bce {
    fn default() -> Self {
        Self {
            clamp_eps: DEFAULT_CLAMP_EPS,
        }
    }
}

impl Default for DiceLoss {
    fn default() -> Self {
        Self { eps: DEFAULT_DICE_EPS }
    }
}

impl Bce {
    pub fn new(clamp_eps: f64) -> Result<Self> {
        if !(clamp_eps > 0.0 && clamp_eps < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "BCE clamp eps {clamp_eps} must lie in (0, 0.5)"
            )));
        }
        Ok(Self { clamp_eps })
    }
}

impl DiceLoss {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::InvalidArgument(format!("Dice eps {eps} must be >= 0")));
        }
        Ok(Self { eps })
    }

    fn sums(&self, pred: &ProbabilityMap, target: &FaultMask) -> (f64, f64) {
        let mut inter = 0.0;
        let mut total = 0.0;
        Zip::from(pred.values()).and(target.grid()).for_each(|&p, &y| {
            let y = y as u8 as f64;
            inter += p * y;
            total += p + y;
        });
        (2.0 * inter + self.eps, total + self.eps)
    }
}

impl Hybrid {
    pub fn new(alpha: f64, bce: Bce, dice: DiceLoss) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidArgument(format!("alpha {alpha} must lie in [0, 1]")));
        }
        Ok(Self { alpha, bce, dice })
    }
}

impl Loss for Bce {
    fn name(&self) -> &'static str {
        "bce"
    }

    fn value(&self, pred: &ProbabilityMap, target: &FaultMask) -> Result<f64> {
        check_dims(pred, target)?;
        let (lo, hi) = (self.clamp_eps, 1.0 - self.clamp_eps);
        let n = pred.values().len() as f64;
        let mut sum = 0.0;
        Zip::from(pred.values()).and(target.grid()).for_each(|&p, &y| {
            let p = p.clamp(lo, hi);
            sum += if y { p.ln() } else { (1.0 - p).ln() };
        });
        Ok(-sum / n)
    }

    /// Zero where the clip is active, since the clipped value is constant there.
    fn gradient(&self, pred: &ProbabilityMap, target: &FaultMask) -> Result<Array2<f64>> {
        check_dims(pred, target)?;
        let (lo, hi) = (self.clamp_eps, 1.0 - self.clamp_eps);
        let n = pred.values().len() as f64;
        Ok(Zip::from(pred.values()).and(target.grid()).map_collect(|&p, &y| {
            if p < lo || p > hi {
                0.0
            } else if y {
                -1.0 / (n * p)
            } else {
                1.0 / (n * (1.0 - p))
            }
        }))
    }
}

impl Loss for DiceLoss {
    fn name(&self) -> &'static str {
        "dice"
    }

    fn value(&self, pred: &ProbabilityMap, target: &FaultMask) -> Result<f64> {
        check_dims(pred, target)?;
        let (num, den) = self.sums(pred, target);
        if den == 0.0 {
            // eps = 0 with both maps empty: perfect agreement.
            return Ok(0.0);
        }
        Ok(1.0 - num / den)
    }

    fn gradient(&self, pred: &ProbabilityMap, target: &FaultMask) -> Result<Array2<f64>> {
        check_dims(pred, target)?;
        let (num, den) = self.sums(pred, target);
        if den == 0.0 {
            return Ok(Array2::zeros(pred.dims()));
        }
        let den2 = den * den;
        Ok(target
            .grid()
            .mapv(|y| -(2.0 * (y as u8 as f64) * den - num) / den2))
    }
}

impl Loss for Hybrid {
    fn name(&self) -> &'static str {
        "hybrid"
    }

    fn value(&self, pred: &ProbabilityMap, target: &FaultMask) -> Result<f64> {
        Ok(self.alpha * self.bce.value(pred, target)? + (1.0 - self.alpha) * self.dice.value(pred, target)?)
    }

    fn gradient(&self, pred: &ProbabilityMap, target: &FaultMask) -> Result<Array2<f64>> {
        let b = self.bce.gradient(pred, target)?;
        let d = self.dice.gradient(pred, target)?;
        Ok(b * self.alpha + d * (1.0 - self.alpha))
    }
}

pub fn bce_loss(pred: &ProbabilityMap, target: &FaultMask, clamp_eps: f64) -> Result<f64> {
    Bce::new(clamp_eps)?.value(pred, target)
}

pub fn dice_loss(pred: &ProbabilityMap, target: &FaultMask, eps: f64) -> Result<f64> {
    DiceLoss::new(eps)?.value(pred, target)
}

/// Hybrid loss with the default BCE clip and Dice smoothing `eps`.
pub fn hybrid_loss(pred: &ProbabilityMap, target: &FaultMask, alpha: f64, eps: f64) -> Result<f64> {
    Hybrid::new(alpha, Bce::default(), DiceLoss::new(eps)?)?.value(pred, target)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Bce,
    Dice,
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossParams {
    pub clamp_eps: f64,
    pub dice_eps: f64,
    pub alpha: f64,
}

impl Default for LossParams {
    fn default() -> Self {
        Self {
            clamp_eps: DEFAULT_CLAMP_EPS,
            dice_eps: DEFAULT_DICE_EPS,
            alpha: 0.5,
        }
    }
}

/// Builds the loss strategy for `kind` with `params`.
pub fn build_loss(kind: LossKind, params: &LossParams) -> Result<Box<dyn Loss>> {
    let bce = Bce::new(params.clamp_eps)?;
    let dice = DiceLoss::new(params.dice_eps)?;
    Ok(match kind {
        LossKind::Bce => Box::new(bce),
        LossKind::Dice => Box::new(dice),
        LossKind::Hybrid => Box::new(Hybrid::new(params.alpha, bce, dice)?),
    })
}

pub fn loss_gradient(
    kind: LossKind,
    pred: &ProbabilityMap,
    target: &FaultMask,
    params: &LossParams,
) -> Result<Array2<f64>> {
    build_loss(kind, params)?.gradient(pred, target)
}

/// Built-in losses with default parameters (`hybrid` uses alpha = 0.5).
pub fn losses() -> Registry<dyn Loss> {
    let mut reg: Registry<dyn Loss> = Registry::new("loss");
    reg.register("bce", Arc::new(Bce::default()));
    reg.register("dice", Arc::new(DiceLoss::default()));
    reg.register(
        "hybrid",
        Arc::new(Hybrid {
            alpha: 0.5,
            bce: Bce::default(),
            dice: DiceLoss::default(),
        }),
    );
    reg
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn map(v: Array2<f64>) -> ProbabilityMap {
        ProbabilityMap::new(v).unwrap()
    }

    #[test]
    fn bce_hand_values() {
        let t = FaultMask::new(array![[true, false], [false, true]]);
        let perfect = ProbabilityMap::from_mask(&t);
        assert!(bce_loss(&perfect, &t, 1e-7).unwrap() <= 1e-6);
        let half = map(Array2::from_elem((2, 2), 0.5));
        assert!((bce_loss(&half, &t, 1e-7).unwrap() - std::f64::consts::LN_2).abs() < 1e-12);
        let one = FaultMask::new(array![[true]]);
        let p = map(array![[0.8]]);
        assert!((bce_loss(&p, &one, 1e-7).unwrap() - 0.223_143_551_314_209_7).abs() < 1e-12);
        let g = loss_gradient(LossKind::Bce, &p, &one, &LossParams::default()).unwrap();
        assert!((g[[0, 0]] + 1.25).abs() < 1e-12);
    }

    #[test]
    fn bce_gradient_vanishes_under_clip() {
        let t = FaultMask::new(array![[true, false]]);
        let g = Bce::default().gradient(&ProbabilityMap::from_mask(&t), &t).unwrap();
        assert!(g.iter().all(|v| v.abs() <= 1.0 / DEFAULT_CLAMP_EPS));
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dice_hand_values() {
        let t = FaultMask::new(array![[true, true]]);
        let p = map(array![[1.0, 0.0]]);
        assert!((dice_loss(&p, &t, 0.0).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!(dice_loss(&ProbabilityMap::from_mask(&t), &t, 1e-6).unwrap().abs() < 1e-9);
        let zeros = map(array![[0.0, 0.0]]);
        assert!((dice_loss(&zeros, &t, 1e-6).unwrap() - 1.0).abs() < 1e-6);
        let empty = FaultMask::new(array![[false, false]]);
        assert_eq!(dice_loss(&zeros, &empty, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn hybrid_endpoints_and_midpoint() {
        let t = FaultMask::new(array![[true]]);
        let p = map(array![[0.8]]);
        let b = bce_loss(&p, &t, DEFAULT_CLAMP_EPS).unwrap();
        let d = dice_loss(&p, &t, 1e-6).unwrap();
        assert_eq!(hybrid_loss(&p, &t, 1.0, 1e-6).unwrap(), b);
        assert_eq!(hybrid_loss(&p, &t, 0.0, 1e-6).unwrap(), d);
        assert!((hybrid_loss(&p, &t, 0.5, 1e-6).unwrap() - (0.5 * b + 0.5 * d)).abs() < 1e-15);
        assert!(hybrid_loss(&p, &t, 1.5, 1e-6).is_err());
    }

    #[test]
    fn argument_validation() {
        let t = FaultMask::new(array![[true]]);
        let p = map(array![[0.5]]);
        assert!(bce_loss(&p, &t, 0.0).is_err());
        assert!(bce_loss(&p, &t, 0.5).is_err());
        assert!(dice_loss(&p, &t, -1.0).is_err());
        let wide = FaultMask::new(array![[true, false]]);
        assert!(matches!(bce_loss(&p, &wide, 1e-7), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn registry_names() {
        let reg = losses();
        assert_eq!(reg.names(), vec!["bce", "dice", "hybrid"]);
        assert_eq!(reg.get("hybrid").unwrap().name(), "hybrid");
    }
}
