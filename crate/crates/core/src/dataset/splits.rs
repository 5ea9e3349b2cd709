use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::SetPartition;
use crate::sim::{Corpus, IQFrame};
use crate::{seed, Error, Result};

/// Share of each authorized transmitter's frames used for training + validation.
pub const AUTHORIZED_TRAIN_PERCENT: usize = 70;
/// Share of the training pool that goes to training (rest is validation).
pub const TRAIN_PERCENT: usize = 80;

/// Identifies one frame in a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FrameRef {
    pub tx_id: u32,
    pub index: u32,
}

/// Train / validation / test assignment of frames, by reference.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitBundle {
    pub partition: SetPartition,
    pub seed: u64,
    pub train: Vec<FrameRef>,
    pub val: Vec<FrameRef>,
    pub test: Vec<FrameRef>,
    /// Ground truth per test frame: true for frames of unseen outliers.
    pub test_is_outlier: Vec<bool>,
}

fn percent_of(n: usize, percent: usize) -> usize {
    (n * percent + 50) / 100
}

/// Builds the three splits.
///
/// Per authorized transmitter, 70% of its shuffled frames feed training and
/// the rest go to test. All known-outlier frames feed training. Each
/// transmitter's training frames are divided 80/20 into train/validation,
/// and both lists are then shuffled. Every unseen-outlier frame goes to test.
pub fn make_splits(corpus: &Corpus, part: &SetPartition, rng_seed: u64) -> Result<SplitBundle> {
    if !part.is_disjoint() {
        return Err(Error::Input("set partition is not disjoint".into()));
    }
    let shuffled = |tx: u32| -> Result<Vec<FrameRef>> {
        let n = corpus.frames_of(tx)?.len();
        let mut refs: Vec<FrameRef> = (0..n as u32).map(|index| FrameRef { tx_id: tx, index }).collect();
        refs.shuffle(&mut seed::rng(rng_seed, &[seed::tag::SPLIT, tx as u64]));
        Ok(refs)
    };

    let mut train = Vec::new();
    let mut val = Vec::new();
    let mut test = Vec::new();
    let mut test_is_outlier = Vec::new();
    let mut add_trainable = |refs: &[FrameRef]| {
        let n_train = percent_of(refs.len(), TRAIN_PERCENT);
        train.extend_from_slice(&refs[..n_train]);
        val.extend_from_slice(&refs[n_train..]);
    };

    for &tx in &part.authorized {
        let refs = shuffled(tx)?;
        let n_fit = percent_of(refs.len(), AUTHORIZED_TRAIN_PERCENT);
        add_trainable(&refs[..n_fit]);
        test.extend_from_slice(&refs[n_fit..]);
        test_is_outlier.extend(std::iter::repeat_n(false, refs.len() - n_fit));
    }
    for &tx in &part.known_outliers {
        add_trainable(&shuffled(tx)?);
    }
    for &tx in &part.unseen_outliers {
        let n = corpus.frames_of(tx)?.len();
        test.extend((0..n as u32).map(|index| FrameRef { tx_id: tx, index }));
        test_is_outlier.extend(std::iter::repeat_n(true, n));
    }

    train.shuffle(&mut seed::rng(rng_seed, &[seed::tag::SPLIT, u64::MAX]));
    val.shuffle(&mut seed::rng(rng_seed, &[seed::tag::SPLIT, u64::MAX - 1]));

    Ok(SplitBundle {
        partition: part.clone(),
        seed: rng_seed,
        train,
        val,
        test,
        test_is_outlier,
    })
}

impl SplitBundle {
    /// Copies the referenced frames out of `corpus`.
    pub fn resolve(corpus: &Corpus, refs: &[FrameRef]) -> Result<Vec<IQFrame>> {
        refs.iter()
            .map(|r| {
                corpus
                    .frames_of(r.tx_id)?
                    .get(r.index as usize)
                    .cloned()
                    .ok_or_else(|| Error::MissingData(format!("frame {} of transmitter {}", r.index, r.tx_id)))
            })
            .collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::MissingData(format!("cannot read {}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }
}
