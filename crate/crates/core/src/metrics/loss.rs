use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probabilities are clamped to `[PROB_EPS, 1 - PROB_EPS]` before taking logs.
pub const PROB_EPS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub focal_gamma: f64,
    pub focal_alpha: f64,
    pub dice_smooth: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            focal_gamma: 2.0,
            focal_alpha: 0.25,
            dice_smooth: 1.0,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.focal_gamma >= 0.0 && self.focal_gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "focal gamma {} must be >= 0",
                self.focal_gamma
            )));
        }
        if !(0.0..=1.0).contains(&self.focal_alpha) {
            return Err(Error::InvalidParameter(format!(
                "focal alpha {} must lie in [0, 1]",
                self.focal_alpha
            )));
        }
        if !(self.dice_smooth > 0.0 && self.dice_smooth.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dice smoothing {} must be > 0",
                self.dice_smooth
            )));
        }
        Ok(())
    }
}

fn check_lengths(prob: &[f64], gt: &[bool]) -> Result<()> {
    if prob.len() != gt.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} pixels", gt.len()),
            actual: format!("{} pixels", prob.len()),
        });
    }
    Ok(())
}

/// Soft dice loss `1 - (2Σpg + ε) / (Σp + Σg + ε)`.
pub fn dice_loss(prob: &[f64], gt: &[bool], smooth: f64) -> Result<f64> {
    check_lengths(prob, gt)?;
    let (mut inter, mut sp, mut sg) = (0.0, 0.0, 0.0);
    for (&p, &g) in prob.iter().zip(gt) {
        let g = if g { 1.0 } else { 0.0 };
        inter += p * g;
        sp += p;
        sg += g;
    }
    Ok(1.0 - (2.0 * inter + smooth) / (sp + sg + smooth))
}

/// Mean binary focal loss `-α_t (1 - p_t)^γ ln p_t` over all pixels.
pub fn focal_loss(prob: &[f64], gt: &[bool], cfg: &LossConfig) -> Result<f64> {
    check_lengths(prob, gt)?;
    if prob.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = prob
        .iter()
        .zip(gt)
        .map(|(&p, &g)| {
            let p = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
            let (pt, at) = if g {
                (p, cfg.focal_alpha)
            } else {
                (1.0 - p, 1.0 - cfg.focal_alpha)
            };
            -at * (1.0 - pt).powf(cfg.focal_gamma) * pt.ln()
        })
        .sum();
    Ok(sum / prob.len() as f64)
}

/// Dice and focal loss with equal weights.
pub fn combined_loss(prob: &[f64], gt: &[bool], cfg: &LossConfig) -> Result<f64> {
    Ok(dice_loss(prob, gt, cfg.dice_smooth)? + focal_loss(prob, gt, cfg)?)
}
