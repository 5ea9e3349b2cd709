use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Decision;
use crate::{seed, Error, Result};

pub const DEFAULT_ROC_POINTS: usize = 1001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub p_fa: f64,
    pub p_d: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// Sorted by ascending `gamma`.
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

fn split_by_class(scores: &[(f64, bool)]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut authorized = Vec::new();
    let mut outliers = Vec::new();
    for &(s, is_outlier) in scores {
        if !s.is_finite() {
            return Err(Error::Input(format!("non-finite score {s}")));
        }
        if is_outlier {
            outliers.push(s);
        } else {
            authorized.push(s);
        }
    }
    if authorized.is_empty() || outliers.is_empty() {
        return Err(Error::Input("ROC needs both authorized and outlier samples".into()));
    }
    authorized.sort_by(f64::total_cmp);
    outliers.sort_by(f64::total_cmp);
    Ok((authorized, outliers))
}

/// Fraction of sorted `v` strictly above `gamma`.
fn frac_above(v: &[f64], gamma: f64) -> f64 {
    (v.len() - v.partition_point(|&s| s <= gamma)) as f64 / v.len() as f64
}

/// Scans `n_points` thresholds uniformly over `[0, 1]`.
///
/// A frame counts as rejected when its outlier score exceeds `γ`. The AUC is
/// the trapezoidal area under `p_d(p_fa)` through the scanned points, closed
/// at `(1, 1)` (every frame rejected) when the scan does not reach it.
pub fn roc_curve(scores: &[(f64, bool)], n_points: usize) -> Result<RocCurve> {
    if n_points < 2 {
        return Err(Error::Config("ROC scan needs at least two points".into()));
    }
    let (authorized, outliers) = split_by_class(scores)?;
    let points: Vec<RocPoint> = (0..n_points)
        .map(|i| {
            let gamma = i as f64 / (n_points - 1) as f64;
            RocPoint {
                p_fa: frac_above(&authorized, gamma),
                p_d: frac_above(&outliers, gamma),
                gamma,
            }
        })
        .collect();

    let mut auc = 0.0;
    let mut prev = (1.0, 1.0);
    for p in &points {
        auc += (prev.0 - p.p_fa) * (prev.1 + p.p_d) / 2.0;
        prev = (p.p_fa, p.p_d);
    }
    // scores above 1 would leave the tail open
    auc += prev.0 * prev.1 / 2.0;
    Ok(RocCurve { points, auc })
}

fn class_rates(decisions: &[Decision], is_outlier: &[bool]) -> Result<((usize, usize), (usize, usize))> {
    if decisions.len() != is_outlier.len() {
        return Err(Error::Shape(format!(
            "{} decisions for {} labels",
            decisions.len(),
            is_outlier.len()
        )));
    }
    let mut auth = (0, 0);
    let mut out = (0, 0);
    for (d, &o) in decisions.iter().zip(is_outlier) {
        if o {
            out.1 += 1;
            out.0 += usize::from(d.is_outlier());
        } else {
            auth.1 += 1;
            auth.0 += usize::from(!d.is_outlier());
        }
    }
    if auth.1 == 0 || out.1 == 0 {
        return Err(Error::Input("balanced accuracy needs both authorized and outlier samples".into()));
    }
    Ok((auth, out))
}

/// Mean of the per-class accuracies: what plain accuracy would be on a test
/// set with equally many authorized and outlier frames.
pub fn balanced_accuracy(decisions: &[Decision], is_outlier: &[bool]) -> Result<f64> {
    let ((ac, an), (oc, on)) = class_rates(decisions, is_outlier)?;
    Ok(0.5 * ac as f64 / an as f64 + 0.5 * oc as f64 / on as f64)
}

/// Plain accuracy after randomly subsampling the larger class down to the
/// size of the smaller one.
pub fn resampled_balanced_accuracy(decisions: &[Decision], is_outlier: &[bool], rng_seed: u64) -> Result<f64> {
    class_rates(decisions, is_outlier)?;
    let mut auth: Vec<usize> = (0..decisions.len()).filter(|&i| !is_outlier[i]).collect();
    let mut out: Vec<usize> = (0..decisions.len()).filter(|&i| is_outlier[i]).collect();
    let n = auth.len().min(out.len());
    let mut rng = seed::rng(rng_seed, &[seed::tag::RESAMPLE]);
    auth.shuffle(&mut rng);
    out.shuffle(&mut rng);
    let correct = auth[..n].iter().filter(|&&i| !decisions[i].is_outlier()).count()
        + out[..n].iter().filter(|&&i| decisions[i].is_outlier()).count();
    Ok(correct as f64 / (2 * n) as f64)
}

#[cfg(test)]
mod tests {
    use super::super::Hypothesis;
    use super::*;

    fn d(outlier: bool) -> Decision {
        Decision {
            hypothesis: if outlier { Hypothesis::H1Outlier } else { Hypothesis::H0Authorized },
            predicted_class: None,
        }
    }

    #[test]
    fn perfect_separation() {
        let mut s: Vec<(f64, bool)> = vec![(0.1, false); 10];
        s.extend(vec![(0.9, true); 10]);
        let roc = roc_curve(&s, DEFAULT_ROC_POINTS).unwrap();
        assert!((roc.auc - 1.0).abs() < 1e-12);
        assert_eq!(roc.points.len(), DEFAULT_ROC_POINTS);
    }

    #[test]
    fn uninformative_scores() {
        let mut s: Vec<(f64, bool)> = vec![(0.5, false); 10];
        s.extend(vec![(0.5, true); 30]);
        let roc = roc_curve(&s, DEFAULT_ROC_POINTS).unwrap();
        assert!((roc.auc - 0.5).abs() < 1e-3);
    }

    #[test]
    fn endpoints_and_monotonicity() {
        let s: Vec<(f64, bool)> = (0..50).map(|i| ((i as f64 * 0.37) % 1.0 + 1e-3, i % 3 == 0)).collect();
        let roc = roc_curve(&s, 101).unwrap();
        let first = roc.points[0];
        let last = *roc.points.last().unwrap();
        assert_eq!((first.p_fa, first.p_d), (1.0, 1.0));
        assert_eq!((last.p_fa, last.p_d), (0.0, 0.0));
        for w in roc.points.windows(2) {
            assert!(w[0].gamma < w[1].gamma);
            assert!(w[1].p_fa <= w[0].p_fa && w[1].p_d <= w[0].p_d);
        }
    }

    #[test]
    fn single_class_rejected() {
        assert!(roc_curve(&[(0.1, false), (0.2, false)], 11).is_err());
        assert!(balanced_accuracy(&[d(false)], &[true]).is_err());
        assert!(balanced_accuracy(&[d(false)], &[true, false]).is_err());
    }

    #[test]
    fn balanced_accuracy_examples() {
        let truth: Vec<bool> = (0..20).map(|i| i >= 10).collect();
        let all_h0 = vec![d(false); 20];
        assert_eq!(balanced_accuracy(&all_h0, &truth).unwrap(), 0.5);
        let perfect: Vec<Decision> = truth.iter().map(|&o| d(o)).collect();
        assert_eq!(balanced_accuracy(&perfect, &truth).unwrap(), 1.0);
        // authorized 8/10 correct, outliers 6/10 correct
        let mixed: Vec<Decision> = (0..20)
            .map(|i| if i < 10 { d(i >= 8) } else { d(i < 16) })
            .collect();
        assert!((balanced_accuracy(&mixed, &truth).unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn always_accept_is_half_regardless_of_mix() {
        let truth: Vec<bool> = (0..37).map(|i| i % 5 == 0).collect();
        assert_eq!(balanced_accuracy(&vec![d(false); 37], &truth).unwrap(), 0.5);
        assert_eq!(resampled_balanced_accuracy(&vec![d(false); 37], &truth, 3).unwrap(), 0.5);
    }
}
