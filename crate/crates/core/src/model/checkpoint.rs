use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::net_spec;
use super::{EpochStats, ExtractorConfig, HeadConfig, Model, TrainedModel};
use crate::nn::Network;
use crate::{Error, Result};

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    extractor: ExtractorConfig,
    head: HeadConfig,
    best_val_loss: Option<f64>,
    best_epoch: Option<usize>,
    history: Vec<EpochStats>,
    params: Vec<f32>,
}

impl TrainedModel {
    /// Writes weights, both configs and the training history as JSON.
    pub fn save(&self, path: &Path) -> Result<()> {
        let ck = Checkpoint {
            extractor: self.model.extractor.clone(),
            head: self.model.head.clone(),
            best_val_loss: self.best_val_loss,
            best_epoch: self.best_epoch,
            history: self.history.clone(),
            params: self.model.net.params.clone(),
        };
        fs::write(path, serde_json::to_string(&ck)?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::MissingData(format!("cannot read checkpoint {}: {e}", path.display())))?;
        let ck: Checkpoint = serde_json::from_str(&text)?;
        let spec = net_spec(&ck.extractor, &ck.head)?;
        Ok(TrainedModel {
            model: Model {
                extractor: ck.extractor,
                head: ck.head,
                net: Network::from_params(spec, ck.params)?,
            },
            best_val_loss: ck.best_val_loss,
            best_epoch: ck.best_epoch,
            history: ck.history,
        })
    }
}
