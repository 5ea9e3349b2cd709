use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ExperimentConfig;
use crate::dataset::{label_frames, make_splits, normalize_frame, partition_transmitters, SetPartition, SetSizes, SplitBundle};
use crate::decision::{
    balanced_accuracy, classify_authorized, decide, fit_threshold_disc, fit_threshold_ova, outlier_score, roc_curve,
    ThresholdSpec,
};
use crate::model::{build_model, param_count, train, ScoreMode, ScoreVector, TrainConfig};
use crate::sim::{Corpus, IQFrame};
use crate::{seed, Arch, Error, Result};

/// Outcome of one architecture on one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchResult {
    pub arch: Arch,
    pub auc: f64,
    pub balanced_accuracy: f64,
    /// Accuracy of `classify_authorized` on authorized test frames; absent for Disc.
    pub closed_set_accuracy: Option<f64>,
    /// Share of test frames decided H0.
    pub accept_rate: f64,
    pub thresholds: Option<ThresholdSpec>,
    pub param_count: usize,
    pub best_epoch: Option<usize>,
    pub best_val_loss: Option<f64>,
}

impl ArchResult {
    /// Mean fitted γ; `None` for DClass.
    pub fn gamma_summary(&self) -> Option<f64> {
        self.thresholds
            .as_ref()
            .map(|t| t.gamma.iter().sum::<f64>() / t.gamma.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationResult {
    pub realization: usize,
    pub partition: SetPartition,
    pub archs: Vec<ArchResult>,
}

/// Test-set score of one frame, kept for later ROC analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub tx_id: u32,
    pub index: u32,
    pub is_outlier: bool,
    pub values: Vec<f64>,
}

/// Normalized frames of one realization, shared by all architectures.
pub struct Prepared {
    pub realization: usize,
    pub seed: u64,
    pub splits: SplitBundle,
    pub train: Vec<IQFrame>,
    pub val: Vec<IQFrame>,
    pub test: Vec<IQFrame>,
}

pub fn realization_seed(base_seed: u64, realization: usize) -> u64 {
    seed::derive(base_seed, &[seed::tag::REALIZATION, realization as u64])
}

fn arch_tag(arch: Arch) -> u64 {
    match arch {
        Arch::Disc => 1,
        Arch::DClass => 2,
        Arch::Ova => 3,
    }
}

fn normalized(corpus: &Corpus, refs: &[crate::dataset::FrameRef]) -> Result<Vec<IQFrame>> {
    SplitBundle::resolve(corpus, refs)?.iter().map(normalize_frame).collect()
}

/// Partition and split for `realization`. The seed depends only on
/// `(base_seed, realization)`, so every sweep point of a realization shares
/// its shuffled transmitter order.
pub fn prepare(cfg: &ExperimentConfig, corpus: &Corpus, sizes: SetSizes, realization: usize) -> Result<Prepared> {
    let pool = corpus.tx_ids();
    let sizes = cfg.fit_sizes(sizes, pool.len())?;
    let rs = realization_seed(cfg.base_seed, realization);
    let part = partition_transmitters(&pool, sizes, rs)?;
    let splits = make_splits(corpus, &part, rs)?;
    Ok(Prepared {
        realization,
        seed: rs,
        train: normalized(corpus, &splits.train)?,
        val: normalized(corpus, &splits.val)?,
        test: normalized(corpus, &splits.test)?,
        splits,
    })
}

fn fit_thresholds(arch: Arch, part: &SetPartition, frames: &[IQFrame], scores: &[ScoreVector]) -> Result<Option<ThresholdSpec>> {
    match arch {
        Arch::DClass => Ok(None),
        Arch::Disc => {
            let s: Vec<f64> = frames
                .iter()
                .zip(scores)
                .filter(|(f, _)| part.authorized_index(f.tx_id).is_some())
                .map(|(_, z)| z.values[0])
                .collect();
            fit_threshold_disc(&s).map(Some)
        }
        Arch::Ova => {
            let mut per_class = vec![Vec::new(); part.authorized.len()];
            for (f, z) in frames.iter().zip(scores) {
                if let Some(c) = part.authorized_index(f.tx_id) {
                    per_class[c].push(z.values[c]);
                }
            }
            fit_threshold_ova(&per_class).map(Some)
        }
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, serde_json::to_string_pretty(value)?.as_bytes())
}

pub(crate) fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingData(format!("{} does not exist", path.display())),
        _ => Error::io(path, e),
    })?;
    serde_json::from_str(&text).map_err(|e| Error::MissingData(format!("{} is corrupt: {e}", path.display())))
}

pub const METRICS_FILE: &str = "metrics.json";

/// Trains and evaluates one architecture.
///
/// With `dir` set, the checkpoint, thresholds and test scores are stored
/// there and `metrics.json` is written last; a directory that already holds
/// a readable `metrics.json` is returned as is without retraining.
pub fn run_arch(cfg: &ExperimentConfig, prep: &Prepared, arch: Arch, dir: Option<&Path>) -> Result<ArchResult> {
    if let Some(d) = dir {
        let done = d.join(METRICS_FILE);
        if done.exists() {
            if let Ok(r) = read_json::<ArchResult>(&done) {
                if r.arch == arch {
                    return Ok(r);
                }
            }
        }
    }
    let part = &prep.splits.partition;
    let n_a = part.authorized.len();
    let context = |e: Error| match e {
        Error::Input(m) => Error::Input(format!("{arch}, realization {}: {m}", prep.realization)),
        other => other,
    };

    let train_ds = label_frames(prep.train.clone(), part, arch)?;
    let val_ds = label_frames(prep.val.clone(), part, arch)?;
    let model = build_model(
        &cfg.extractor,
        &cfg.head(arch, n_a),
        seed::derive(prep.seed, &[seed::tag::INIT, arch_tag(arch)]),
    )?;
    let n_params = param_count(&model);
    let tcfg = TrainConfig {
        seed: seed::derive(prep.seed, &[seed::tag::TRAIN, arch_tag(arch)]),
        ..cfg.training.clone()
    };
    let trained = train(model, &train_ds, &val_ds, &tcfg).map_err(context)?;
    let model = &trained.model;

    let train_scores = model.score_batch(&prep.train, ScoreMode::Strict)?;
    let thresholds = fit_thresholds(arch, part, &prep.train, &train_scores).map_err(context)?;

    let test_scores = model.score_batch(&prep.test, ScoreMode::Strict)?;
    let truth = &prep.splits.test_is_outlier;
    let decisions = test_scores
        .iter()
        .map(|z| decide(z, thresholds.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    let roc_input: Vec<(f64, bool)> = test_scores.iter().map(outlier_score).zip(truth.iter().copied()).collect();
    let roc = roc_curve(&roc_input, cfg.roc_points).map_err(context)?;
    let bacc = balanced_accuracy(&decisions, truth).map_err(context)?;
    let accept_rate = decisions.iter().filter(|d| !d.is_outlier()).count() as f64 / decisions.len() as f64;

    let closed_set_accuracy = if arch == Arch::Disc {
        None
    } else {
        let (mut hit, mut n) = (0usize, 0usize);
        for (f, z) in prep.test.iter().zip(&test_scores) {
            if let Some(c) = part.authorized_index(f.tx_id) {
                n += 1;
                hit += usize::from(classify_authorized(z)? == c);
            }
        }
        (n > 0).then(|| hit as f64 / n as f64)
    };

    let result = ArchResult {
        arch,
        auc: roc.auc,
        balanced_accuracy: bacc,
        closed_set_accuracy,
        accept_rate,
        thresholds,
        param_count: n_params,
        best_epoch: trained.best_epoch,
        best_val_loss: trained.best_val_loss,
    };

    if let Some(d) = dir {
        fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
        trained.save(&d.join("checkpoint.json"))?;
        write_json(&d.join("thresholds.json"), &result.thresholds)?;
        let records: Vec<ScoreRecord> = prep
            .splits
            .test
            .iter()
            .zip(truth)
            .zip(&test_scores)
            .map(|((r, &o), z)| ScoreRecord {
                tx_id: r.tx_id,
                index: r.index,
                is_outlier: o,
                values: z.values.clone(),
            })
            .collect();
        write_json(&d.join("scores.json"), &records)?;
        write_json(&d.join(METRICS_FILE), &result)?;
    }
    Ok(result)
}

/// Directory of one architecture inside a realization directory.
pub fn arch_dir(realization_dir: &Path, arch: Arch) -> PathBuf {
    realization_dir.join(arch.name())
}

/// Runs every configured architecture on realization `realization`.
///
/// Uses `cfg.sizes`; artifacts go to `<output_dir>/run/r<realization>/<arch>`
/// when `persist` is set.
pub fn run_realization(cfg: &ExperimentConfig, corpus: &Corpus, realization: usize, persist: bool) -> Result<RealizationResult> {
    cfg.validate()?;
    let sizes = cfg
        .sizes
        .ok_or_else(|| Error::Config("`sizes` is required for a single realization".into()))?;
    let prep = prepare(cfg, corpus, sizes, realization)?;
    let rdir = cfg.output_dir.join("run").join(format!("r{realization}"));
    let archs = cfg
        .archs
        .iter()
        .map(|&a| {
            let d = arch_dir(&rdir, a);
            run_arch(cfg, &prep, a, persist.then_some(d.as_path()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RealizationResult {
        realization,
        partition: prep.splits.partition,
        archs,
    })
}
