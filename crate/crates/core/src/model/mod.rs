//! Disc, DClass and OvA networks on a shared residual feature extractor.

mod checkpoint;
mod config;
mod scoring;
mod training;

pub use config::{build_model, param_count, ExtractorConfig, HeadConfig, Model};
pub use scoring::{frames_to_input, ScoreMode, ScoreVector};
pub use training::{dataset_loss, train, EpochStats, TrainConfig, TrainedModel};
