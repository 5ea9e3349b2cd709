//! Synthetic transmitter fingerprints.
//!
//! A single reference waveform is passed through a per-transmitter chain of
//! hardware impairments followed by a random channel phase and AWGN. Each
//! transmitter id maps to a reproducible [`TransmitterProfile`], so frames
//! from the same device share a fingerprint while different devices do not.

mod corpus;
mod fingerprint;
pub mod io;
mod profile;
mod waveform;

pub use corpus::{generate_corpus, Corpus, CorpusParams, FrameCountRange};
pub use fingerprint::{apply_fingerprint, ChannelPhase};
pub use profile::{sample_profile, ImpairmentRanges, Interval, TransmitterProfile};
pub use waveform::{make_reference_waveform, SymbolFrame, WaveformKind, SAMPLE_RATE_HZ};

use num_complex::Complex32;
use serde::{Deserialize, Serialize};

/// One received frame `y`: 256 complex baseband samples from one transmitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IQFrame {
    pub samples: Vec<Complex32>,
    pub tx_id: u32,
    pub snr_db: f64,
}

impl IQFrame {
    pub fn mean_power(&self) -> f64 {
        mean_power32(&self.samples)
    }

    pub fn is_valid(&self) -> bool {
        self.samples.len() == crate::FRAME_LEN
            && self.samples.iter().all(|s| s.re.is_finite() && s.im.is_finite())
    }
}

pub(crate) fn mean_power32(samples: &[Complex32]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples
        .iter()
        .map(|s| (s.re as f64).powi(2) + (s.im as f64).powi(2))
        .sum::<f64>()
        / samples.len() as f64
}
