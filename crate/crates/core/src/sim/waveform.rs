use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{seed, Error, Result, FRAME_LEN};

/// Nominal sample rate of the reference waveform (20 MHz channel).
pub const SAMPLE_RATE_HZ: f64 = 20e6;

const OFDM_SIZE: usize = 64;
const USED_SUBCARRIERS: i32 = 26;
const PREAMBLE_SEED: u64 = 0x0FD_7A3B;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveformKind {
    /// Linear chirp sweeping the full band; unit modulus everywhere.
    ConstantEnvelopeChirp,
    /// OFDM-style training field: QPSK on 52 of 64 subcarriers, repeated
    /// four times. Non-constant envelope, so amplitude distortions show.
    #[default]
    QpskPreamble,
}

/// Transmitted symbols `x`, shared by every transmitter.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFrame {
    pub samples: Vec<Complex64>,
    pub sample_rate_hz: f64,
}

impl SymbolFrame {
    pub fn mean_power(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }
}

pub fn make_reference_waveform(kind: WaveformKind, length: usize) -> Result<SymbolFrame> {
    if length != FRAME_LEN {
        return Err(Error::Config(format!(
            "reference waveform length must be {FRAME_LEN}, got {length}"
        )));
    }
    let mut samples = match kind {
        WaveformKind::ConstantEnvelopeChirp => chirp(length),
        WaveformKind::QpskPreamble => qpsk_preamble(length),
    };
    let rms = (samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / length as f64).sqrt();
    for s in &mut samples {
        *s /= rms;
    }
    Ok(SymbolFrame {
        samples,
        sample_rate_hz: SAMPLE_RATE_HZ,
    })
}

fn chirp(length: usize) -> Vec<Complex64> {
    let n_f = length as f64;
    (0..length)
        .map(|n| {
            let n = n as f64;
            // instantaneous frequency goes from -0.5 to +0.5 cycles/sample
            Complex64::from_polar(1.0, PI * (n * n / n_f - n))
        })
        .collect()
}

fn qpsk_preamble(length: usize) -> Vec<Complex64> {
    let mut rng = seed::rng(PREAMBLE_SEED, &[]);
    let mut bins = vec![Complex64::new(0.0, 0.0); OFDM_SIZE];
    for k in (-USED_SUBCARRIERS..=USED_SUBCARRIERS).filter(|&k| k != 0) {
        let re = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let im = if rng.random::<bool>() { 1.0 } else { -1.0 };
        bins[k.rem_euclid(OFDM_SIZE as i32) as usize] = Complex64::new(re, im);
    }
    let symbol: Vec<Complex64> = (0..OFDM_SIZE)
        .map(|n| {
            bins.iter()
                .enumerate()
                .map(|(k, b)| b * Complex64::from_polar(1.0, 2.0 * PI * (k * n) as f64 / OFDM_SIZE as f64))
                .sum()
        })
        .collect();
    (0..length).map(|n| symbol[n % OFDM_SIZE]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qpsk_preamble_has_unit_power() {
        let w = make_reference_waveform(WaveformKind::QpskPreamble, 256).unwrap();
        assert_eq!(w.samples.len(), 256);
        assert!((w.mean_power() - 1.0).abs() < 1e-6);
        // not constant envelope
        let mags: Vec<f64> = w.samples.iter().map(|s| s.norm()).collect();
        let spread = mags.iter().cloned().fold(0.0, f64::max) - mags.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread > 0.5);
    }

    #[test]
    fn chirp_is_constant_envelope() {
        let w = make_reference_waveform(WaveformKind::ConstantEnvelopeChirp, 256).unwrap();
        for s in &w.samples {
            assert!((s.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn wrong_length_rejected() {
        assert!(matches!(
            make_reference_waveform(WaveformKind::QpskPreamble, 128),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn waveform_is_deterministic() {
        let a = make_reference_waveform(WaveformKind::QpskPreamble, 256).unwrap();
        let b = make_reference_waveform(WaveformKind::QpskPreamble, 256).unwrap();
        assert_eq!(a, b);
    }
}
