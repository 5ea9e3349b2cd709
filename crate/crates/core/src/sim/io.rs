//! Dataset file pair: `frames.bin` + `manifest.json`.
//!
//! `frames.bin` is little-endian `f32`, interleaved I/Q, 256 complex samples
//! per frame, frames of each transmitter stored contiguously in ascending
//! transmitter id. The manifest records generation parameters and, per
//! transmitter, its profile, frame count and byte offset into `frames.bin`.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex32;
use serde::{Deserialize, Serialize};

use super::{Corpus, CorpusParams, IQFrame, TransmitterProfile};
use crate::{Error, Result, FRAME_LEN};

pub const FRAMES_FILE: &str = "frames.bin";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const FORMAT_TAG: &str = "txauth-iq-f32le-v1";

/// Bytes per stored frame.
pub const FRAME_BYTES: usize = FRAME_LEN * 2 * 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmitterEntry {
    pub tx_id: u32,
    pub frame_count: usize,
    pub byte_offset: u64,
    pub profile: TransmitterProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub frame_len: usize,
    pub seed: u64,
    pub snr_db: f64,
    pub params: CorpusParams,
    pub transmitters: Vec<TransmitterEntry>,
}

impl Manifest {
    pub fn for_corpus(corpus: &Corpus) -> Self {
        let mut offset = 0u64;
        let transmitters = corpus
            .frames
            .iter()
            .map(|(&tx_id, frames)| {
                let entry = TransmitterEntry {
                    tx_id,
                    frame_count: frames.len(),
                    byte_offset: offset,
                    profile: corpus.profiles[&tx_id],
                };
                offset += (frames.len() * FRAME_BYTES) as u64;
                entry
            })
            .collect();
        Manifest {
            format: FORMAT_TAG.to_string(),
            frame_len: FRAME_LEN,
            seed: corpus.params.seed,
            snr_db: corpus.params.snr_db,
            params: corpus.params.clone(),
            transmitters,
        }
    }
}

pub fn encode_frames<'a>(frames: impl IntoIterator<Item = &'a IQFrame>) -> Vec<u8> {
    let mut out = Vec::new();
    for f in frames {
        for s in &f.samples {
            out.extend_from_slice(&s.re.to_le_bytes());
            out.extend_from_slice(&s.im.to_le_bytes());
        }
    }
    out
}

pub fn decode_frame(bytes: &[u8], tx_id: u32, snr_db: f64) -> IQFrame {
    debug_assert_eq!(bytes.len(), FRAME_BYTES);
    let samples = bytes
        .chunks_exact(8)
        .map(|c| {
            Complex32::new(
                f32::from_le_bytes([c[0], c[1], c[2], c[3]]),
                f32::from_le_bytes([c[4], c[5], c[6], c[7]]),
            )
        })
        .collect();
    IQFrame { samples, tx_id, snr_db }
}

/// Writes the corpus into `dir` (created if needed).
pub fn write_dataset(dir: &Path, corpus: &Corpus) -> Result<Manifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let manifest = Manifest::for_corpus(corpus);

    let frames_path = dir.join(FRAMES_FILE);
    let file = fs::File::create(&frames_path).map_err(|e| Error::io(&frames_path, e))?;
    let mut w = BufWriter::new(file);
    for frames in corpus.frames.values() {
        w.write_all(&encode_frames(frames)).map_err(|e| Error::io(&frames_path, e))?;
    }
    w.flush().map_err(|e| Error::io(&frames_path, e))?;

    let manifest_path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(&manifest_path, text).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path)
        .map_err(|e| Error::MissingData(format!("cannot read {}: {e}", path.display())))?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    if manifest.format != FORMAT_TAG || manifest.frame_len != FRAME_LEN {
        return Err(Error::Config(format!(
            "unsupported dataset format `{}` with frame length {}",
            manifest.format, manifest.frame_len
        )));
    }
    Ok(manifest)
}

/// Loads a corpus written by [`write_dataset`].
pub fn read_dataset(dir: &Path) -> Result<Corpus> {
    let manifest = read_manifest(dir)?;
    let frames_path = dir.join(FRAMES_FILE);
    let bytes = fs::read(&frames_path)
        .map_err(|e| Error::MissingData(format!("cannot read {}: {e}", frames_path.display())))?;

    let mut profiles = BTreeMap::new();
    let mut frames = BTreeMap::new();
    for entry in &manifest.transmitters {
        let start = entry.byte_offset as usize;
        let end = start + entry.frame_count * FRAME_BYTES;
        if end > bytes.len() {
            return Err(Error::MissingData(format!(
                "{} is truncated: transmitter {} needs bytes {start}..{end}, file has {}",
                frames_path.display(),
                entry.tx_id,
                bytes.len()
            )));
        }
        let tx_frames = bytes[start..end]
            .chunks_exact(FRAME_BYTES)
            .map(|chunk| decode_frame(chunk, entry.tx_id, manifest.snr_db))
            .collect();
        profiles.insert(entry.tx_id, entry.profile);
        frames.insert(entry.tx_id, tx_frames);
    }
    Ok(Corpus {
        params: manifest.params,
        profiles,
        frames,
    })
}
