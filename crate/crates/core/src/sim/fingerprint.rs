use std::f64::consts::PI;

use num_complex::{Complex32, Complex64};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{IQFrame, SymbolFrame, TransmitterProfile};
use crate::{seed, Error, Result, FRAME_LEN};

/// How the channel phase rotation is chosen for a frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelPhase {
    /// Uniform on `[0, 2π)`, drawn from the frame seed.
    #[default]
    Random,
    /// Fixed rotation in radians (0 disables the channel phase).
    Fixed(f64),
}

/// Passes the reference symbols through transmitter `p` and the channel.
///
/// Stage order: IQ imbalance, third-order AM/AM compression, DC offset,
/// carrier frequency offset, phase-noise random walk, channel phase, AWGN.
/// `snr_db = +inf` disables the noise. The output is a pure function of the
/// arguments.
pub fn apply_fingerprint(
    x: &SymbolFrame,
    p: &TransmitterProfile,
    snr_db: f64,
    rng_seed: u64,
    phase: ChannelPhase,
) -> Result<IQFrame> {
    if x.samples.len() != FRAME_LEN || x.samples.iter().any(|s| !s.re.is_finite() || !s.im.is_finite()) {
        return Err(Error::Input(format!(
            "symbol frame must hold {FRAME_LEN} finite samples"
        )));
    }
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::Input(format!("snr_db must be finite or +inf, got {snr_db}")));
    }
    if !p.is_valid() {
        return Err(Error::Input(format!("transmitter profile {} is invalid", p.tx_id)));
    }

    let mut rng = seed::rng(rng_seed, &[seed::tag::FRAME]);

    // y = mu x + nu conj(x)
    let g = 10f64.powf(p.iq_gain_imbalance_db / 20.0);
    let phi = p.iq_phase_imbalance_rad;
    let mu = (Complex64::new(1.0, 0.0) + g * Complex64::from_polar(1.0, -phi)) / 2.0;
    let nu = (Complex64::new(1.0, 0.0) - g * Complex64::from_polar(1.0, phi)) / 2.0;

    let channel = match phase {
        ChannelPhase::Random => None,
        ChannelPhase::Fixed(theta) => Some(theta),
    };

    let mut pn_phase = 0.0f64;
    let mut y: Vec<Complex64> = Vec::with_capacity(FRAME_LEN);
    for (n, &s) in x.samples.iter().enumerate() {
        let mut v = mu * s + nu * s.conj();
        v *= 1.0 - p.nonlinearity_coeff * v.norm_sqr();
        v += p.dc_offset;
        v *= Complex64::from_polar(1.0, 2.0 * PI * p.cfo_normalized * n as f64);
        if n > 0 {
            let step: f64 = rng.sample(StandardNormal);
            pn_phase += p.phase_noise_std_rad * step;
        }
        v *= Complex64::from_polar(1.0, pn_phase);
        y.push(v);
    }

    let u: f64 = rng.random();
    let theta = channel.unwrap_or(2.0 * PI * u);
    if theta != 0.0 {
        let rot = Complex64::from_polar(1.0, theta);
        for v in &mut y {
            *v *= rot;
        }
    }

    if snr_db.is_finite() {
        let power = y.iter().map(|v| v.norm_sqr()).sum::<f64>() / y.len() as f64;
        let sigma = (power / 10f64.powf(snr_db / 10.0) / 2.0).sqrt();
        for v in &mut y {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *v += Complex64::new(sigma * re, sigma * im);
        }
    }

    Ok(IQFrame {
        samples: y.iter().map(|v| Complex32::new(v.re as f32, v.im as f32)).collect(),
        tx_id: p.tx_id,
        snr_db,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{make_reference_waveform, WaveformKind};

    fn reference() -> SymbolFrame {
        make_reference_waveform(WaveformKind::QpskPreamble, FRAME_LEN).unwrap()
    }

    fn as_c64(s: &Complex32) -> Complex64 {
        Complex64::new(s.re as f64, s.im as f64)
    }

    #[test]
    fn identity_profile_without_noise_is_identity() {
        let x = reference();
        let y = apply_fingerprint(&x, &TransmitterProfile::identity(0), f64::INFINITY, 5, ChannelPhase::Fixed(0.0))
            .unwrap();
        for (a, b) in x.samples.iter().zip(&y.samples) {
            assert!((a - as_c64(b)).norm() < 1e-6);
        }
    }

    #[test]
    fn dc_offset_only_adds_constant() {
        let x = reference();
        let mut p = TransmitterProfile::identity(1);
        p.dc_offset = Complex64::new(0.1, 0.0);
        let y = apply_fingerprint(&x, &p, f64::INFINITY, 5, ChannelPhase::Fixed(0.0)).unwrap();
        for (a, b) in x.samples.iter().zip(&y.samples) {
            assert!((a + 0.1 - as_c64(b)).norm() < 1e-6);
        }
    }

    #[test]
    fn cfo_only_rotates_linearly() {
        let x = reference();
        let mut p = TransmitterProfile::identity(2);
        p.cfo_normalized = 0.003;
        let y = apply_fingerprint(&x, &p, f64::INFINITY, 5, ChannelPhase::Fixed(0.0)).unwrap();
        for (n, (a, b)) in x.samples.iter().zip(&y.samples).enumerate() {
            let expect = a * Complex64::from_polar(1.0, 2.0 * PI * 0.003 * n as f64);
            assert!((expect - as_c64(b)).norm() < 1e-6);
        }
    }

    #[test]
    fn iq_imbalance_matches_branch_model() {
        // I' = I, Q' = g (Q cos(phi) - I sin(phi))
        let x = reference();
        let mut p = TransmitterProfile::identity(3);
        p.iq_gain_imbalance_db = 1.0;
        p.iq_phase_imbalance_rad = 0.1;
        let y = apply_fingerprint(&x, &p, f64::INFINITY, 5, ChannelPhase::Fixed(0.0)).unwrap();
        let g = 10f64.powf(1.0 / 20.0);
        for (a, b) in x.samples.iter().zip(&y.samples) {
            let i = a.re;
            let q = g * (a.im * 0.1f64.cos() - a.re * 0.1f64.sin());
            let mu = (Complex64::new(1.0, 0.0) + g * Complex64::from_polar(1.0, -0.1)) / 2.0;
            let nu = (Complex64::new(1.0, 0.0) - g * Complex64::from_polar(1.0, 0.1)) / 2.0;
            let expect = mu * a + nu * a.conj();
            assert!((expect - as_c64(b)).norm() < 1e-6);
            assert!((expect.re - i).abs() < 1e-9 && (expect.im - q).abs() < 1e-9);
        }
    }

    #[test]
    fn random_channel_phase_preserves_magnitude() {
        let x = reference();
        let y = apply_fingerprint(&x, &TransmitterProfile::identity(0), f64::INFINITY, 77, ChannelPhase::Random)
            .unwrap();
        for (a, b) in x.samples.iter().zip(&y.samples) {
            assert!((a.norm() - as_c64(b).norm()).abs() < 1e-6);
        }
        let z = apply_fingerprint(&x, &TransmitterProfile::identity(0), f64::INFINITY, 78, ChannelPhase::Random)
            .unwrap();
        assert_ne!(y.samples, z.samples);
    }

    #[test]
    fn deterministic_given_seed() {
        let x = reference();
        let p = crate::sim::sample_profile(1, 1, &Default::default()).unwrap();
        let a = apply_fingerprint(&x, &p, 15.0, 9, ChannelPhase::Random).unwrap();
        let b = apply_fingerprint(&x, &p, 15.0, 9, ChannelPhase::Random).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn snr_is_calibrated() {
        let x = reference();
        let p = TransmitterProfile::identity(0);
        let snr_db = 10.0;
        let mut signal = 0.0;
        let mut noise = 0.0;
        for k in 0..400u64 {
            let y = apply_fingerprint(&x, &p, snr_db, k, ChannelPhase::Fixed(0.0)).unwrap();
            for (a, b) in x.samples.iter().zip(&y.samples) {
                signal += a.norm_sqr();
                noise += (as_c64(b) - a).norm_sqr();
            }
        }
        let measured = 10.0 * (signal / noise).log10();
        assert!((measured - snr_db).abs() < 0.2, "measured {measured} dB");
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut x = reference();
        let p = TransmitterProfile::identity(0);
        assert!(apply_fingerprint(&x, &p, f64::NAN, 0, ChannelPhase::Random).is_err());
        x.samples.pop();
        assert!(apply_fingerprint(&x, &p, 10.0, 0, ChannelPhase::Random).is_err());
    }
}
