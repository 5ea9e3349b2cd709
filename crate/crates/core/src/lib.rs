//! Open-set transmitter authorization on fingerprinted IQ frames.
//!
//! The crate is organised the way an experiment flows:
//!
//! - [`sim`] synthesises a corpus of 256-sample frames where every transmitter
//!   imposes its own hardware impairments on a shared reference waveform.
//! - [`dataset`] draws the authorized / known-outlier / unseen-outlier sets,
//!   splits frames into train, validation and test, and labels them.
//! - [`model`] holds the shared residual feature extractor and the three
//!   heads (`Disc`, `DClass`, `OvA`), together with the training loop.
//! - [`decision`] fits thresholds, turns scores into accept/reject decisions
//!   and computes ROC, AUC and balanced accuracy.
//! - [`harness`] runs single realizations and the two sweep protocols and
//!   renders the result tables and plots.

pub mod dataset;
pub mod decision;
pub mod error;
pub mod harness;
pub mod model;
pub mod nn;
pub mod seed;
pub mod sim;

pub use error::{Error, Result};

/// Number of complex samples in every frame.
pub const FRAME_LEN: usize = 256;

/// The three open-set architectures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arch {
    /// Single sigmoid discriminator, authorized = 0, outlier = 1.
    Disc,
    /// `|A| + 1` way softmax classifier, last class is "outlier".
    DClass,
    /// One sigmoid binary classifier per authorized transmitter.
    Ova,
}

impl Arch {
    pub const ALL: [Arch; 3] = [Arch::Disc, Arch::DClass, Arch::Ova];

    pub fn name(self) -> &'static str {
        match self {
            Arch::Disc => "disc",
            Arch::DClass => "dclass",
            Arch::Ova => "ova",
        }
    }
}

impl std::fmt::Display for Arch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Arch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "disc" => Ok(Arch::Disc),
            "dclass" => Ok(Arch::DClass),
            "ova" => Ok(Arch::Ova),
            other => Err(Error::Config(format!("unknown architecture `{other}`"))),
        }
    }
}
