//! From scores to accept/reject decisions, and how good those decisions are.
//!
//! Score conventions: Disc outputs one outlier probability; DClass outputs
//! `|A| + 1` class probabilities with the outlier class last; OvA outputs one
//! membership probability per authorized transmitter.

mod metrics;
mod threshold;

pub use metrics::{balanced_accuracy, resampled_balanced_accuracy, roc_curve, RocCurve, RocPoint, DEFAULT_ROC_POINTS};
pub use threshold::{fit_threshold_disc, fit_threshold_ova, ThresholdSpec, MAX_GAMMA, SIGMA_MULTIPLIER};

use serde::{Deserialize, Serialize};

use crate::model::ScoreVector;
use crate::{Arch, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hypothesis {
    /// Frame comes from an authorized transmitter.
    H0Authorized,
    /// Frame comes from an outlier.
    H1Outlier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub hypothesis: Hypothesis,
    /// Authorized class, present only for accepted DClass/OvA frames.
    pub predicted_class: Option<usize>,
}

impl Decision {
    pub fn is_outlier(&self) -> bool {
        self.hypothesis == Hypothesis::H1Outlier
    }

    fn reject() -> Self {
        Decision {
            hypothesis: Hypothesis::H1Outlier,
            predicted_class: None,
        }
    }

    fn accept(class: Option<usize>) -> Self {
        Decision {
            hypothesis: Hypothesis::H0Authorized,
            predicted_class: class,
        }
    }
}

/// Index of the largest value; ties go to the lowest index.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn need_threshold<'a>(z: &ScoreVector, t: Option<&'a ThresholdSpec>) -> Result<&'a ThresholdSpec> {
    let t = t.ok_or_else(|| Error::Input(format!("{} decisions need a threshold", z.arch)))?;
    if t.arch != z.arch {
        return Err(Error::Shape(format!("{} threshold used with {} scores", t.arch, z.arch)));
    }
    if t.gamma.len() != z.values.len() {
        return Err(Error::Shape(format!(
            "{} thresholds for {} scores",
            t.gamma.len(),
            z.values.len()
        )));
    }
    Ok(t)
}

/// Applies the decision rule of `z.arch`.
///
/// - Disc: outlier iff `z > γ`.
/// - DClass: outlier iff the outlier class has the largest probability; no
///   threshold is used (`t` may be `None`).
/// - OvA: outlier iff every head rejects, i.e. `zᵢ <= 1 - γᵢ` for all `i`
///   (`γ` is stored on the outlier-score side, see [`ThresholdSpec`]).
pub fn decide(z: &ScoreVector, t: Option<&ThresholdSpec>) -> Result<Decision> {
    if z.values.is_empty() {
        return Err(Error::Shape("empty score vector".into()));
    }
    match z.arch {
        Arch::Disc => {
            let t = need_threshold(z, t)?;
            Ok(if z.values[0] > t.gamma[0] {
                Decision::reject()
            } else {
                Decision::accept(None)
            })
        }
        Arch::DClass => {
            if let Some(t) = t {
                if t.arch != Arch::DClass {
                    return Err(Error::Shape(format!("{} threshold used with dclass scores", t.arch)));
                }
            }
            let outlier = z.values.len() - 1;
            let top = argmax(&z.values);
            Ok(if top == outlier {
                Decision::reject()
            } else {
                Decision::accept(Some(top))
            })
        }
        Arch::Ova => {
            let t = need_threshold(z, t)?;
            let any_accepts = z.values.iter().zip(&t.gamma).any(|(&zi, &gi)| zi > 1.0 - gi);
            Ok(if any_accepts {
                Decision::accept(Some(argmax(&z.values)))
            } else {
                Decision::reject()
            })
        }
    }
}

/// Most likely authorized transmitter, ignoring any outlier output.
pub fn classify_authorized(z: &ScoreVector) -> Result<usize> {
    match z.arch {
        Arch::Disc => Err(Error::Input("disc scores carry no class information".into())),
        Arch::DClass => {
            if z.values.len() < 2 {
                return Err(Error::Shape("dclass scores need at least two entries".into()));
            }
            Ok(argmax(&z.values[..z.values.len() - 1]))
        }
        Arch::Ova => {
            if z.values.is_empty() {
                return Err(Error::Shape("empty score vector".into()));
            }
            Ok(argmax(&z.values))
        }
    }
}

/// Scalar score where larger means more outlier-like.
///
/// Disc: `z`; OvA: `1 - maxᵢ zᵢ` (the single scanned threshold); DClass: the
/// outlier-class probability.
pub fn outlier_score(z: &ScoreVector) -> f64 {
    match z.arch {
        Arch::Disc => z.values[0],
        Arch::DClass => *z.values.last().expect("nonempty scores"),
        Arch::Ova => 1.0 - z.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    }
}
