use std::f64::consts::PI;

use num_complex::Complex32;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::sim::IQFrame;
use crate::{seed, Error, Result};

/// Scales a frame to unit mean power. Phase is untouched.
pub fn normalize_frame(f: &IQFrame) -> Result<IQFrame> {
    let power = f.mean_power();
    if !(power > 0.0) || !power.is_finite() {
        return Err(Error::Input(format!(
            "cannot normalize frame of transmitter {} with power {power}",
            f.tx_id
        )));
    }
    let scale = (1.0 / power.sqrt()) as f32;
    Ok(IQFrame {
        samples: f.samples.iter().map(|s| s * scale).collect(),
        tx_id: f.tx_id,
        snr_db: f.snr_db,
    })
}

/// Training-time augmentation: additive circular Gaussian noise followed by a
/// uniformly random phase rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentConfig {
    /// Noise variance; 0 disables the noise.
    pub noise_variance: f64,
    /// When false (default) `noise_variance` is the total complex variance,
    /// split equally between I and Q. When true it applies to each component.
    #[serde(default)]
    pub variance_per_component: bool,
    #[serde(default = "yes")]
    pub random_phase: bool,
}

fn yes() -> bool {
    true
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            noise_variance: 0.01,
            variance_per_component: false,
            random_phase: true,
        }
    }
}

impl AugmentConfig {
    pub fn component_std(&self) -> f64 {
        if self.variance_per_component {
            self.noise_variance.sqrt()
        } else {
            (self.noise_variance / 2.0).sqrt()
        }
    }
}

/// Augments `samples` into planar I/Q buffers.
pub fn augment_into<R: Rng>(
    samples: &[Complex32],
    rng: &mut R,
    cfg: &AugmentConfig,
    out_i: &mut [f32],
    out_q: &mut [f32],
) {
    let std = cfg.component_std();
    let u: f64 = rng.random();
    let theta = if cfg.random_phase { 2.0 * PI * u } else { 0.0 };
    let (sin, cos) = theta.sin_cos();
    for (n, s) in samples.iter().enumerate() {
        let (mut re, mut im) = (s.re as f64, s.im as f64);
        if std > 0.0 {
            let nr: f64 = rng.sample(StandardNormal);
            let ni: f64 = rng.sample(StandardNormal);
            re += std * nr;
            im += std * ni;
        }
        out_i[n] = (re * cos - im * sin) as f32;
        out_q[n] = (re * sin + im * cos) as f32;
    }
}

/// Returns an augmented copy of `f`, deterministic in `rng_seed`.
pub fn augment(f: &IQFrame, rng_seed: u64, cfg: &AugmentConfig) -> IQFrame {
    let n = f.samples.len();
    let mut i = vec![0f32; n];
    let mut q = vec![0f32; n];
    let mut rng = seed::rng(rng_seed, &[seed::tag::AUGMENT]);
    augment_into(&f.samples, &mut rng, cfg, &mut i, &mut q);
    IQFrame {
        samples: i.into_iter().zip(q).map(|(re, im)| Complex32::new(re, im)).collect(),
        tx_id: f.tx_id,
        snr_db: f.snr_db,
    }
}
