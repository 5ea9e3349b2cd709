use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    apply_fingerprint, make_reference_waveform, sample_profile, ChannelPhase, IQFrame, ImpairmentRanges,
    TransmitterProfile, WaveformKind,
};
use crate::{seed, Error, Result, FRAME_LEN};

/// Inclusive range of frames generated per transmitter, serialized as `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct FrameCountRange {
    pub lo: usize,
    pub hi: usize,
}

impl FrameCountRange {
    pub const fn new(lo: usize, hi: usize) -> Self {
        FrameCountRange { lo, hi }
    }

    pub const fn exactly(n: usize) -> Self {
        FrameCountRange { lo: n, hi: n }
    }
}

impl Default for FrameCountRange {
    /// 200 to 1500 frames, the spread of packet counts per device in a
    /// one-second WiFi capture.
    fn default() -> Self {
        FrameCountRange { lo: 200, hi: 1500 }
    }
}

impl From<[usize; 2]> for FrameCountRange {
    fn from(v: [usize; 2]) -> Self {
        FrameCountRange { lo: v[0], hi: v[1] }
    }
}

impl From<FrameCountRange> for [usize; 2] {
    fn from(r: FrameCountRange) -> Self {
        [r.lo, r.hi]
    }
}

fn default_max_tx() -> usize {
    71
}

fn default_snr() -> f64 {
    20.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusParams {
    pub n_tx: usize,
    #[serde(default)]
    pub frames_per_tx: FrameCountRange,
    #[serde(default = "default_snr")]
    pub snr_db: f64,
    pub seed: u64,
    #[serde(default)]
    pub ranges: ImpairmentRanges,
    #[serde(default)]
    pub waveform: WaveformKind,
    #[serde(default)]
    pub channel_phase: ChannelPhase,
    #[serde(default = "default_max_tx")]
    pub max_tx: usize,
}

impl CorpusParams {
    pub fn new(n_tx: usize, frames_per_tx: FrameCountRange, snr_db: f64, seed: u64) -> Self {
        CorpusParams {
            n_tx,
            frames_per_tx,
            snr_db,
            seed,
            ranges: ImpairmentRanges::default(),
            waveform: WaveformKind::default(),
            channel_phase: ChannelPhase::Random,
            max_tx: default_max_tx(),
        }
    }

    pub fn with_ranges(mut self, ranges: ImpairmentRanges) -> Self {
        self.ranges = ranges;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_tx == 0 {
            return Err(Error::Config("n_tx must be positive".into()));
        }
        if self.n_tx > self.max_tx {
            return Err(Error::Config(format!(
                "n_tx = {} exceeds the transmitter pool limit {}",
                self.n_tx, self.max_tx
            )));
        }
        let r = self.frames_per_tx;
        if r.lo == 0 || r.lo > r.hi {
            return Err(Error::Config(format!(
                "frames_per_tx [{}, {}] is not a valid positive interval",
                r.lo, r.hi
            )));
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return Err(Error::Config(format!("snr_db {} is not usable", self.snr_db)));
        }
        self.ranges.validate()
    }
}

/// Frames for every transmitter, keyed by transmitter id.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub params: CorpusParams,
    pub profiles: BTreeMap<u32, TransmitterProfile>,
    pub frames: BTreeMap<u32, Vec<IQFrame>>,
}

impl Corpus {
    pub fn seed(&self) -> u64 {
        self.params.seed
    }

    pub fn tx_ids(&self) -> Vec<u32> {
        self.frames.keys().copied().collect()
    }

    pub fn frames_of(&self, tx_id: u32) -> Result<&[IQFrame]> {
        self.frames
            .get(&tx_id)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::MissingData(format!("no frames for transmitter {tx_id}")))
    }

    pub fn total_frames(&self) -> usize {
        self.frames.values().map(Vec::len).sum()
    }

    /// Checks key/tx_id agreement, frame shape and per-transmitter counts.
    pub fn check(&self) -> Result<()> {
        let r = self.params.frames_per_tx;
        for (&tx, frames) in &self.frames {
            if !self.profiles.contains_key(&tx) {
                return Err(Error::MissingData(format!("transmitter {tx} has no profile")));
            }
            if frames.len() < r.lo || frames.len() > r.hi {
                return Err(Error::Input(format!(
                    "transmitter {tx} has {} frames outside [{}, {}]",
                    frames.len(),
                    r.lo,
                    r.hi
                )));
            }
            if let Some(f) = frames.iter().find(|f| f.tx_id != tx || !f.is_valid()) {
                return Err(Error::Input(format!(
                    "frame tagged {} with {} samples filed under transmitter {tx}",
                    f.tx_id,
                    f.samples.len()
                )));
            }
        }
        Ok(())
    }
}

/// Generates transmitters `0..n_tx`, each with a frame count drawn uniformly
/// from `frames_per_tx`. Reproducible from `params.seed`.
pub fn generate_corpus(params: &CorpusParams) -> Result<Corpus> {
    params.validate()?;
    let reference = make_reference_waveform(params.waveform, FRAME_LEN)?;
    let ids: Vec<u32> = (0..params.n_tx as u32).collect();

    let per_tx: Vec<(TransmitterProfile, Vec<IQFrame>)> = ids
        .par_iter()
        .map(|&tx| {
            let profile = sample_profile(params.seed, tx, &params.ranges)?;
            let mut rng = seed::rng(params.seed, &[seed::tag::COUNT, tx as u64]);
            let count = rng.random_range(params.frames_per_tx.lo..=params.frames_per_tx.hi);
            let frames = (0..count as u64)
                .map(|k| {
                    let frame_seed = seed::derive(params.seed, &[seed::tag::FRAME, tx as u64, k]);
                    apply_fingerprint(&reference, &profile, params.snr_db, frame_seed, params.channel_phase)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((profile, frames))
        })
        .collect::<Result<_>>()?;

    let mut profiles = BTreeMap::new();
    let mut frames = BTreeMap::new();
    for (p, f) in per_tx {
        profiles.insert(p.tx_id, p);
        frames.insert(p.tx_id, f);
    }
    Ok(Corpus {
        params: params.clone(),
        profiles,
        frames,
    })
}
