use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::Model;
use crate::sim::IQFrame;
use crate::{Arch, Error, Result, FRAME_LEN};

/// Model output `z` for one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector {
    pub arch: Arch,
    pub values: Vec<f64>,
}

/// Whether [`Model::score`] checks that frames are normalized first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreMode {
    #[default]
    Lenient,
    /// Rejects frames whose mean power is not 1 within 1e-3.
    Strict,
}

const SCORE_BATCH: usize = 256;

/// Packs frames into the `(2, batch * 256)` network input (I row, Q row).
pub fn frames_to_input(frames: &[&IQFrame]) -> Array2<f32> {
    let width = frames.len() * FRAME_LEN;
    let mut x = Array2::<f32>::zeros((2, width));
    for (b, f) in frames.iter().enumerate() {
        for (n, s) in f.samples.iter().enumerate() {
            x[[0, b * FRAME_LEN + n]] = s.re;
            x[[1, b * FRAME_LEN + n]] = s.im;
        }
    }
    x
}

impl Model {
    pub fn score(&self, frame: &IQFrame, mode: ScoreMode) -> Result<ScoreVector> {
        Ok(self.score_batch(std::slice::from_ref(frame), mode)?.remove(0))
    }

    /// Scores many frames; identical to scoring them one at a time.
    pub fn score_batch(&self, frames: &[IQFrame], mode: ScoreMode) -> Result<Vec<ScoreVector>> {
        for f in frames {
            if !f.is_valid() {
                return Err(Error::Input(format!(
                    "frame of transmitter {} is not {FRAME_LEN} finite samples",
                    f.tx_id
                )));
            }
            if mode == ScoreMode::Strict && (f.mean_power() - 1.0).abs() > 1e-3 {
                return Err(Error::Input(format!(
                    "frame of transmitter {} is not normalized (mean power {})",
                    f.tx_id,
                    f.mean_power()
                )));
            }
        }
        let mut out = Vec::with_capacity(frames.len());
        for chunk in frames.chunks(SCORE_BATCH) {
            let refs: Vec<&IQFrame> = chunk.iter().collect();
            let probs = self.net.predict(&frames_to_input(&refs), refs.len());
            out.extend(probs.rows().into_iter().map(|row| ScoreVector {
                arch: self.arch(),
                values: row.iter().map(|&v| v as f64).collect(),
            }));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use num_complex::Complex32;

    use super::*;
    use crate::model::{build_model, ExtractorConfig, HeadConfig};

    fn tiny() -> ExtractorConfig {
        ExtractorConfig {
            block_filters: vec![4, 4],
            kernel_size: 3,
            feature_dim: 8,
        }
    }

    fn frame(k: usize) -> IQFrame {
        let samples: Vec<Complex32> = (0..FRAME_LEN)
            .map(|n| Complex32::from_polar(1.0, (n * (k + 1)) as f32 * 0.05))
            .collect();
        IQFrame { samples, tx_id: k as u32, snr_db: 20.0 }
    }

    #[test]
    fn score_ranges_per_arch() {
        let frames: Vec<IQFrame> = (0..5).map(frame).collect();
        for arch in Arch::ALL {
            let m = build_model(&tiny(), &HeadConfig::new(arch, 3), 1).unwrap();
            for z in m.score_batch(&frames, ScoreMode::Strict).unwrap() {
                assert_eq!(z.values.len(), m.head.output_width());
                assert!(z.values.iter().all(|v| (0.0..=1.0).contains(v)));
                if arch == Arch::DClass {
                    assert!((z.values.iter().sum::<f64>() - 1.0).abs() < 1e-5);
                }
            }
        }
    }

    #[test]
    fn batch_equals_single() {
        let frames: Vec<IQFrame> = (0..7).map(frame).collect();
        let m = build_model(&tiny(), &HeadConfig::new(Arch::Ova, 4), 2).unwrap();
        let batch = m.score_batch(&frames, ScoreMode::Lenient).unwrap();
        for (f, zb) in frames.iter().zip(&batch) {
            let z = m.score(f, ScoreMode::Lenient).unwrap();
            for (a, b) in z.values.iter().zip(&zb.values) {
                assert!((a - b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn strict_mode_rejects_unnormalized() {
        let m = build_model(&tiny(), &HeadConfig::new(Arch::Disc, 1), 2).unwrap();
        let mut f = frame(0);
        for s in &mut f.samples {
            *s *= 3.0;
        }
        assert!(m.score(&f, ScoreMode::Strict).is_err());
        assert!(m.score(&f, ScoreMode::Lenient).is_ok());
    }
}
