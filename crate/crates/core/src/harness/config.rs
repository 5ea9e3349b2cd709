use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::SetSizes;
use crate::model::{ExtractorConfig, HeadConfig, TrainConfig};
use crate::sim::{generate_corpus, io, Corpus, CorpusParams};
use crate::{Arch, Error, Result};

/// Where the frames come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusSource {
    Generate(CorpusParams),
    /// Directory written by `txauth generate`.
    Path(PathBuf),
}

impl CorpusSource {
    pub fn load(&self) -> Result<Corpus> {
        match self {
            CorpusSource::Generate(p) => generate_corpus(p),
            CorpusSource::Path(dir) => io::read_dataset(dir),
        }
    }
}

fn default_authorized_grid() -> Vec<usize> {
    vec![5, 10, 15, 20, 25, 30, 40]
}

fn default_known_grid() -> Vec<usize> {
    vec![0, 5, 10, 15, 20, 25]
}

fn default_archs() -> Vec<Arch> {
    Arch::ALL.to_vec()
}

fn default_realizations() -> usize {
    10
}

fn default_sweep_auth_outliers() -> usize {
    30
}

fn default_sweep_known_authorized() -> usize {
    10
}

fn default_sweep_known_outliers() -> usize {
    26
}

fn default_hidden() -> usize {
    80
}

fn default_l2() -> f64 {
    0.001
}

fn default_roc_points() -> usize {
    crate::decision::DEFAULT_ROC_POINTS
}

/// Everything needed to run a realization or a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub corpus: CorpusSource,
    /// Set sizes for a single `run`.
    #[serde(default)]
    pub sizes: Option<SetSizes>,
    /// `|A|` values of the authorized-set sweep.
    #[serde(default = "default_authorized_grid")]
    pub authorized_grid: Vec<usize>,
    /// `|O|` used throughout the authorized-set sweep.
    #[serde(default = "default_sweep_auth_outliers")]
    pub authorized_sweep_outliers: usize,
    /// `|K|` values of the known-outlier sweep.
    #[serde(default = "default_known_grid")]
    pub known_grid: Vec<usize>,
    #[serde(default = "default_sweep_known_authorized")]
    pub known_sweep_authorized: usize,
    #[serde(default = "default_sweep_known_outliers")]
    pub known_sweep_outliers: usize,
    /// Shrink `|O|` to whatever the pool leaves instead of failing.
    #[serde(default)]
    pub cap_outliers: bool,
    #[serde(default = "default_archs")]
    pub archs: Vec<Arch>,
    #[serde(default = "default_realizations")]
    pub n_realizations: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// `seed` inside is replaced by a per-job derived seed.
    #[serde(default)]
    pub training: TrainConfig,
    #[serde(default)]
    pub extractor: ExtractorConfig,
    #[serde(default = "default_hidden")]
    pub hidden_width: usize,
    #[serde(default = "default_l2")]
    pub l2_weight: f64,
    #[serde(default = "default_roc_points")]
    pub roc_points: usize,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn new(corpus: CorpusSource, output_dir: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            corpus,
            sizes: None,
            authorized_grid: default_authorized_grid(),
            authorized_sweep_outliers: default_sweep_auth_outliers(),
            known_grid: default_known_grid(),
            known_sweep_authorized: default_sweep_known_authorized(),
            known_sweep_outliers: default_sweep_known_outliers(),
            cap_outliers: false,
            archs: default_archs(),
            n_realizations: default_realizations(),
            base_seed: 0,
            training: TrainConfig::default(),
            extractor: ExtractorConfig::default(),
            hidden_width: default_hidden(),
            l2_weight: default_l2(),
            roc_points: default_roc_points(),
            output_dir: output_dir.into(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks that do not need the corpus.
    pub fn validate(&self) -> Result<()> {
        if self.archs.is_empty() {
            return Err(Error::Config("arch list is empty".into()));
        }
        let mut seen = self.archs.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.archs.len() {
            return Err(Error::Config("arch list has duplicates".into()));
        }
        if self.n_realizations == 0 {
            return Err(Error::Config("n_realizations must be positive".into()));
        }
        if self.authorized_grid.is_empty() || self.known_grid.is_empty() {
            return Err(Error::Config("sweep grids must be nonempty".into()));
        }
        if self.authorized_grid.contains(&0) || self.known_sweep_authorized == 0 {
            return Err(Error::Config("|A| must be positive".into()));
        }
        if self.roc_points < 2 {
            return Err(Error::Config("roc_points must be at least 2".into()));
        }
        if self.training.batch_size == 0 || !(self.training.learning_rate > 0.0) {
            return Err(Error::Config("batch_size and learning_rate must be positive".into()));
        }
        if let CorpusSource::Generate(p) = &self.corpus {
            p.validate()?;
        }
        if let Some(s) = self.sizes {
            if s.authorized == 0 {
                return Err(Error::Config("|A| must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn head(&self, arch: Arch, n_authorized: usize) -> HeadConfig {
        HeadConfig {
            arch,
            n_authorized,
            hidden_width: self.hidden_width,
            l2_weight: self.l2_weight,
        }
    }

    /// Applies `cap_outliers` to a requested size triple.
    pub fn fit_sizes(&self, sizes: SetSizes, pool: usize) -> Result<SetSizes> {
        let mut s = sizes;
        if self.cap_outliers {
            s.unseen = s.unseen.min(pool.saturating_sub(s.authorized + s.known));
        }
        s.check_feasible(pool)?;
        if s.unseen == 0 {
            return Err(Error::Infeasible(format!(
                "no transmitters left for unseen outliers with |A|={} |K|={} in a pool of {pool}",
                s.authorized, s.known
            )));
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::FrameCountRange;

    fn cfg() -> ExperimentConfig {
        ExperimentConfig::new(
            CorpusSource::Generate(CorpusParams::new(20, FrameCountRange::exactly(10), 20.0, 1)),
            "out",
        )
    }

    #[test]
    fn minimal_json_gets_defaults() {
        let c: ExperimentConfig =
            serde_json::from_str(r#"{"corpus": {"path": "data"}, "output_dir": "out"}"#).unwrap();
        assert_eq!(c.n_realizations, 10);
        assert_eq!(c.authorized_grid, vec![5, 10, 15, 20, 25, 30, 40]);
        assert_eq!(c.known_grid, vec![0, 5, 10, 15, 20, 25]);
        assert_eq!(c.archs, Arch::ALL.to_vec());
        assert_eq!((c.known_sweep_authorized, c.known_sweep_outliers), (10, 26));
        assert_eq!(c.authorized_sweep_outliers, 30);
        c.validate().unwrap();
    }

    #[test]
    fn json_round_trip() {
        let c = cfg();
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn bad_configs() {
        let mut c = cfg();
        c.archs.clear();
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = cfg();
        c.known_grid.clear();
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.archs = vec![Arch::Ova, Arch::Ova];
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.n_realizations = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn outlier_cap() {
        let mut c = cfg();
        let want = SetSizes::new(10, 5, 26);
        assert!(matches!(c.fit_sizes(want, 20), Err(Error::Infeasible(_))));
        c.cap_outliers = true;
        assert_eq!(c.fit_sizes(want, 20).unwrap(), SetSizes::new(10, 5, 5));
        assert!(matches!(c.fit_sizes(SetSizes::new(10, 10, 26), 20), Err(Error::Infeasible(_))));
    }
}
