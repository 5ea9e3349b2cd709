use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{Model, scoring::frames_to_input};
use crate::dataset::{augment_into, AugmentConfig, Label, LabeledDataset};
use crate::nn::{Adam, Targets};
use crate::sim::IQFrame;
use crate::{seed, Arch, Error, Result, FRAME_LEN};
use ndarray::Array2;

fn default_epochs() -> usize {
    10
}

fn default_lr() -> f64 {
    0.001
}

fn default_batch() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub augment: AugmentConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: default_epochs(),
            learning_rate: default_lr(),
            batch_size: default_batch(),
            seed: 0,
            augment: AugmentConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub model: Model,
    /// Lowest validation loss seen; `None` when no epoch ran.
    pub best_val_loss: Option<f64>,
    pub best_epoch: Option<usize>,
    pub history: Vec<EpochStats>,
}

impl TrainedModel {
    pub fn untrained(model: Model) -> Self {
        TrainedModel {
            model,
            best_val_loss: None,
            best_epoch: None,
            history: Vec::new(),
        }
    }
}

const EVAL_BATCH: usize = 256;

fn check_dataset(model: &Model, ds: &LabeledDataset, what: &str) -> Result<()> {
    if ds.is_empty() {
        return Err(Error::Input(format!("{what} dataset is empty")));
    }
    if ds.scheme != model.arch() || ds.n_authorized != model.head.n_authorized {
        return Err(Error::Config(format!(
            "{what} dataset is labeled for {} with |A|={}, model is {} with |A|={}",
            ds.scheme,
            ds.n_authorized,
            model.arch(),
            model.head.n_authorized
        )));
    }
    Ok(())
}

fn batch_targets(labels: &[&Label], n_out: usize, arch: Arch) -> Targets<f32> {
    match arch {
        Arch::DClass => Targets::Categorical(
            labels
                .iter()
                .map(|l| match l {
                    Label::DClass(c) => *c,
                    _ => unreachable!("checked scheme"),
                })
                .collect(),
        ),
        Arch::Disc | Arch::Ova => {
            let mut y = Array2::<f32>::zeros((labels.len(), n_out));
            for (i, l) in labels.iter().enumerate() {
                match l {
                    Label::Disc(v) => y[[i, 0]] = *v as f32,
                    Label::Ova(v) => {
                        for (j, &b) in v.iter().enumerate() {
                            y[[i, j]] = b as f32;
                        }
                    }
                    Label::DClass(_) => unreachable!("checked scheme"),
                }
            }
            Targets::Binary(y)
        }
    }
}

/// Mean weighted data loss of `ds` (no augmentation, no L2 term).
pub fn dataset_loss(model: &Model, ds: &LabeledDataset, weights: &std::collections::BTreeMap<usize, f64>) -> f64 {
    let n_out = model.head.output_width();
    let mut total = 0.0;
    let idx: Vec<usize> = (0..ds.len()).collect();
    for chunk in idx.chunks(EVAL_BATCH) {
        let frames: Vec<&IQFrame> = chunk.iter().map(|&i| &ds.frames[i]).collect();
        let labels: Vec<&Label> = chunk.iter().map(|&i| &ds.labels[i]).collect();
        let w: Vec<f32> = chunk.iter().map(|&i| ds.sample_weight(weights, i) as f32).collect();
        let x = frames_to_input(&frames);
        let loss = model.net.data_loss(&x, chunk.len(), &batch_targets(&labels, n_out, model.arch()), &w);
        total += loss as f64 * chunk.len() as f64;
    }
    total / ds.len() as f64
}

/// Adam on the class-weighted cross-entropy (plus L2 on dense kernels).
///
/// Training batches are augmented on the fly with a stream derived from
/// `(seed, epoch, sample)`. Validation loss is computed after every epoch and
/// the weights of the best epoch are returned.
pub fn train(model: Model, train: &LabeledDataset, val: &LabeledDataset, cfg: &TrainConfig) -> Result<TrainedModel> {
    check_dataset(&model, train, "training")?;
    check_dataset(&model, val, "validation")?;
    if cfg.batch_size == 0 || !(cfg.learning_rate > 0.0) {
        return Err(Error::Config("batch_size and learning_rate must be positive".into()));
    }
    let mut model = model;
    if cfg.epochs == 0 {
        return Ok(TrainedModel::untrained(model));
    }

    let arch = model.arch();
    let n_out = model.head.output_width();
    let weights = &train.class_weights;
    let mut opt = Adam::<f32>::new(model.net.n_params(), cfg.learning_rate);
    let mut best: Option<(f64, usize, Vec<f32>)> = None;
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..train.len()).collect();

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut seed::rng(cfg.seed, &[seed::tag::SHUFFLE, epoch as u64]));
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let b = chunk.len();
            let width = b * FRAME_LEN;
            let mut buf = vec![0f32; 2 * width];
            let (re, im) = buf.split_at_mut(width);
            for (slot, &i) in chunk.iter().enumerate() {
                let mut rng = seed::rng(cfg.seed, &[seed::tag::AUGMENT, epoch as u64, i as u64]);
                let cols = slot * FRAME_LEN..(slot + 1) * FRAME_LEN;
                augment_into(
                    &train.frames[i].samples,
                    &mut rng,
                    &cfg.augment,
                    &mut re[cols.clone()],
                    &mut im[cols],
                );
            }
            let x = Array2::from_shape_vec((2, width), buf).expect("buffer sized for batch");
            let labels: Vec<&Label> = chunk.iter().map(|&i| &train.labels[i]).collect();
            let w: Vec<f32> = chunk.iter().map(|&i| train.sample_weight(weights, i) as f32).collect();
            let (loss, grad) = model.net.loss_and_grad(&x, b, &batch_targets(&labels, n_out, arch), &w);
            opt.step(&mut model.net.params, &grad);
            epoch_loss += loss as f64 * b as f64;
        }
        let val_loss = dataset_loss(&model, val, weights);
        history.push(EpochStats {
            train_loss: epoch_loss / train.len() as f64,
            val_loss,
        });
        if best.as_ref().is_none_or(|(v, _, _)| val_loss < *v) {
            best = Some((val_loss, epoch, model.net.params.clone()));
        }
    }

    let (best_val, best_epoch, params) = best.expect("at least one epoch ran");
    model.net.params = params;
    Ok(TrainedModel {
        model,
        best_val_loss: Some(best_val),
        best_epoch: Some(best_epoch),
        history,
    })
}
