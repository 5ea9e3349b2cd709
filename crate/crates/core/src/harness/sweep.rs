use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::realization::{arch_dir, prepare, run_arch, write_json};
use super::report::{report, SummaryTable};
use super::ExperimentConfig;
use crate::dataset::SetSizes;
use crate::sim::Corpus;
use crate::{Arch, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// Vary `|A|`.
    Authorized,
    /// Vary `|K|`.
    Known,
}

impl SweepKind {
    pub fn dir_name(self) -> &'static str {
        match self {
            SweepKind::Authorized => "sweep-auth",
            SweepKind::Known => "sweep-known",
        }
    }

    /// Name of the swept quantity, used in file and column headers.
    pub fn parameter(self) -> &'static str {
        match self {
            SweepKind::Authorized => "n_authorized",
            SweepKind::Known => "n_known",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: usize,
    pub sizes: SetSizes,
}

/// Stored as `sweep.json`; tells `report` what to collect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub kind: SweepKind,
    pub points: Vec<SweepPoint>,
    pub archs: Vec<Arch>,
    pub n_realizations: usize,
}

pub const PLAN_FILE: &str = "sweep.json";

impl SweepPlan {
    /// Checks every point against the pool before anything is trained.
    pub fn build(cfg: &ExperimentConfig, kind: SweepKind, pool: usize) -> Result<Self> {
        cfg.validate()?;
        let (archs, points): (Vec<Arch>, Vec<SetSizes>) = match kind {
            SweepKind::Authorized => (
                cfg.archs.iter().copied().filter(|&a| a != Arch::DClass).collect(),
                cfg.authorized_grid
                    .iter()
                    .map(|&a| SetSizes::new(a, 0, cfg.authorized_sweep_outliers))
                    .collect(),
            ),
            SweepKind::Known => (
                cfg.archs.clone(),
                cfg.known_grid
                    .iter()
                    .map(|&k| SetSizes::new(cfg.known_sweep_authorized, k, cfg.known_sweep_outliers))
                    .collect(),
            ),
        };
        if archs.is_empty() {
            return Err(Error::Config("the authorized-set sweep does not run dclass; no architecture left".into()));
        }
        let values: Vec<usize> = match kind {
            SweepKind::Authorized => cfg.authorized_grid.clone(),
            SweepKind::Known => cfg.known_grid.clone(),
        };
        let mut sorted = values.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != values.len() {
            return Err(Error::Config("sweep grid has duplicate values".into()));
        }
        let points = values
            .into_iter()
            .zip(points)
            .map(|(value, s)| Ok(SweepPoint { value, sizes: cfg.fit_sizes(s, pool)? }))
            .collect::<Result<Vec<_>>>()?;
        Ok(SweepPlan {
            kind,
            points,
            archs,
            n_realizations: cfg.n_realizations,
        })
    }

    pub fn realization_dir(&self, sweep_dir: &Path, point: &SweepPoint, realization: usize) -> PathBuf {
        sweep_dir
            .join(format!("{}_{}", self.kind.parameter(), point.value))
            .join(format!("r{realization}"))
    }
}

/// Runs a sweep into `<output_dir>/<sweep-auth|sweep-known>` and reports it.
///
/// Realizations run in parallel. Each architecture's results land in their
/// own directory, so an interrupted sweep picks up where it stopped.
pub fn run_sweep(cfg: &ExperimentConfig, corpus: &Corpus, kind: SweepKind) -> Result<SummaryTable> {
    let plan = SweepPlan::build(cfg, kind, corpus.tx_ids().len())?;
    let dir = cfg.output_dir.join(kind.dir_name());
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    write_json(&dir.join(PLAN_FILE), &plan)?;
    write_json(&dir.join("config.json"), cfg)?;

    let jobs: Vec<(usize, usize)> = (0..plan.points.len())
        .flat_map(|p| (0..plan.n_realizations).map(move |r| (p, r)))
        .collect();
    jobs.par_iter()
        .map(|&(p, r)| {
            let point = &plan.points[p];
            let rdir = plan.realization_dir(&dir, point, r);
            let prep = prepare(cfg, corpus, point.sizes, r)?;
            for &arch in &plan.archs {
                run_arch(cfg, &prep, arch, Some(&arch_dir(&rdir, arch)))?;
            }
            Ok(())
        })
        .collect::<Result<Vec<()>>>()?;
    report(&dir)
}

/// Authorized-set sweep: vary `|A|` with `|K| = 0`.
pub fn sweep_authorized(cfg: &ExperimentConfig, corpus: &Corpus) -> Result<SummaryTable> {
    run_sweep(cfg, corpus, SweepKind::Authorized)
}

/// Known-outlier sweep: vary `|K|` at fixed `|A|` and `|O|`.
pub fn sweep_known(cfg: &ExperimentConfig, corpus: &Corpus) -> Result<SummaryTable> {
    run_sweep(cfg, corpus, SweepKind::Known)
}
