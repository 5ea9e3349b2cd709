use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SetPartition;
use crate::sim::IQFrame;
use crate::{Arch, Error, Result};

/// Training target of one frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    /// 0 = authorized, 1 = outlier.
    Disc(u8),
    /// Class index in `0..=|A|`; `|A|` is the outlier class.
    DClass(usize),
    /// One binary target per authorized transmitter; all zeros for outliers.
    Ova(Vec<u8>),
}

impl Label {
    /// Weighting class: the authorized index, or `|A|` (Disc: 1) for outliers.
    pub fn class(&self) -> usize {
        match self {
            Label::Disc(l) => *l as usize,
            Label::DClass(c) => *c,
            Label::Ova(v) => v.iter().position(|&b| b == 1).unwrap_or(v.len()),
        }
    }

    pub fn arch(&self) -> Arch {
        match self {
            Label::Disc(_) => Arch::Disc,
            Label::DClass(_) => Arch::DClass,
            Label::Ova(_) => Arch::Ova,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub frames: Vec<IQFrame>,
    pub labels: Vec<Label>,
    pub scheme: Arch,
    pub n_authorized: usize,
    /// Weight per class present in the data (see [`Label::class`]).
    pub class_weights: BTreeMap<usize, f64>,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn class_counts(&self) -> BTreeMap<usize, usize> {
        count_classes(&self.labels)
    }

    /// Loss weight of sample `i`; classes unseen at fit time default to 1.
    pub fn sample_weight(&self, weights: &BTreeMap<usize, f64>, i: usize) -> f64 {
        weights.get(&self.labels[i].class()).copied().unwrap_or(1.0)
    }
}

fn count_classes(labels: &[Label]) -> BTreeMap<usize, usize> {
    let mut counts = BTreeMap::new();
    for l in labels {
        *counts.entry(l.class()).or_insert(0) += 1;
    }
    counts
}

/// Labels frames of `A ∪ K` for `scheme`.
///
/// Class weights are computed over the classes that occur; with no known
/// outliers the outlier class is simply absent.
pub fn label_frames(frames: Vec<IQFrame>, part: &SetPartition, scheme: Arch) -> Result<LabeledDataset> {
    let n_a = part.authorized.len();
    let labels = frames
        .iter()
        .map(|f| {
            let idx = part.authorized_index(f.tx_id);
            if idx.is_none() && !part.known_outliers.contains(&f.tx_id) {
                return Err(Error::Input(format!(
                    "transmitter {} is neither authorized nor a known outlier and cannot be labeled",
                    f.tx_id
                )));
            }
            Ok(match scheme {
                Arch::Disc => Label::Disc(u8::from(idx.is_none())),
                Arch::DClass => Label::DClass(idx.unwrap_or(n_a)),
                Arch::Ova => {
                    let mut v = vec![0u8; n_a];
                    if let Some(i) = idx {
                        v[i] = 1;
                    }
                    Label::Ova(v)
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let class_weights = if labels.is_empty() {
        BTreeMap::new()
    } else {
        class_weights(&count_classes(&labels))?
    };
    Ok(LabeledDataset {
        frames,
        labels,
        scheme,
        n_authorized: n_a,
        class_weights,
    })
}

/// `w_c = N / (n_classes * N_c)`; every listed class must have samples.
pub fn class_weights(counts: &BTreeMap<usize, usize>) -> Result<BTreeMap<usize, f64>> {
    if counts.is_empty() {
        return Err(Error::Input("no classes to weight".into()));
    }
    if let Some((c, _)) = counts.iter().find(|(_, &n)| n == 0) {
        return Err(Error::Input(format!("class {c} has no samples")));
    }
    let total: usize = counts.values().sum();
    let k = counts.len() as f64;
    Ok(counts
        .iter()
        .map(|(&c, &n)| (c, total as f64 / (k * n as f64)))
        .collect())
}
