use serde::{Deserialize, Serialize};

use crate::{Arch, Error, Result};

/// Upper clip of a fitted threshold.
pub const MAX_GAMMA: f64 = 0.5;
/// Threshold sits this many fitted standard deviations from the ideal score.
pub const SIGMA_MULTIPLIER: f64 = 3.0;

/// Fitted decision threshold(s).
///
/// `gamma` is always expressed as a distance on the outlier side, in
/// `[0, 0.5]`: for Disc it is the threshold on `z` itself (reject if
/// `z > γ`); for OvA head `i` accepts when `zᵢ > 1 - γᵢ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSpec {
    pub arch: Arch,
    pub gamma: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl ThresholdSpec {
    /// OvA accept thresholds `max(0.5, 1 - 3σᵢ)` on the `z` scale.
    pub fn accept_thresholds(&self) -> Vec<f64> {
        self.gamma.iter().map(|g| 1.0 - g).collect()
    }
}

/// RMS of distances from the ideal score: the ML standard deviation of a
/// zero-mean Gaussian fitted to the scores mirrored about that ideal.
fn mirrored_sigma(distances: impl Iterator<Item = f64>) -> (f64, usize) {
    let (sum, n) = distances.fold((0.0, 0usize), |(s, n), d| (s + d * d, n + 1));
    ((sum / n as f64).sqrt(), n)
}

fn check_scores(scores: &[f64], what: &str) -> Result<()> {
    if scores.is_empty() {
        return Err(Error::Input(format!("no scores to fit {what}")));
    }
    if let Some(s) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(Error::Input(format!("score {s} outside [0, 1] while fitting {what}")));
    }
    Ok(())
}

/// `γ = min(0.5, 3σ)` with `σ = sqrt(mean(s²))` over authorized training scores.
pub fn fit_threshold_disc(authorized_train_scores: &[f64]) -> Result<ThresholdSpec> {
    check_scores(authorized_train_scores, "the disc threshold")?;
    let (sigma, _) = mirrored_sigma(authorized_train_scores.iter().copied());
    Ok(ThresholdSpec {
        arch: Arch::Disc,
        gamma: vec![(SIGMA_MULTIPLIER * sigma).min(MAX_GAMMA)],
        sigma: vec![sigma],
    })
}

/// Per-class fit: `σᵢ = sqrt(mean((1 - s)²))` over head `i`'s scores on its
/// own training frames; `γᵢ = min(0.5, 3σᵢ)`.
pub fn fit_threshold_ova(per_class_positive_scores: &[Vec<f64>]) -> Result<ThresholdSpec> {
    if per_class_positive_scores.is_empty() {
        return Err(Error::Input("no authorized classes to fit".into()));
    }
    let mut gamma = Vec::with_capacity(per_class_positive_scores.len());
    let mut sigma = Vec::with_capacity(per_class_positive_scores.len());
    for (i, scores) in per_class_positive_scores.iter().enumerate() {
        check_scores(scores, &format!("the threshold of class {i}"))?;
        let (s, _) = mirrored_sigma(scores.iter().map(|v| 1.0 - v));
        sigma.push(s);
        gamma.push((SIGMA_MULTIPLIER * s).min(MAX_GAMMA));
    }
    Ok(ThresholdSpec {
        arch: Arch::Ova,
        gamma,
        sigma,
    })
}
