use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{seed, Error, Result};

/// Largest carrier frequency offset accepted, in cycles per sample.
pub const MAX_CFO: f64 = 0.01;

/// Closed interval `[lo, hi]`, serialized as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub const fn symmetric(half_width: f64) -> Self {
        Interval {
            lo: -half_width,
            hi: half_width,
        }
    }

    pub const fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn is_valid(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Interval {
            lo: self.lo * factor,
            hi: self.hi * factor,
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        // always consume one draw so streams line up across degenerate ranges
        let u: f64 = rng.random();
        self.lo + (self.hi - self.lo) * u
    }
}

impl From<[f64; 2]> for Interval {
    fn from(v: [f64; 2]) -> Self {
        Interval { lo: v[0], hi: v[1] }
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

/// Ranges each impairment parameter is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpairmentRanges {
    pub iq_gain_imbalance_db: Interval,
    pub iq_phase_imbalance_rad: Interval,
    pub dc_offset_re: Interval,
    pub dc_offset_im: Interval,
    pub cfo_normalized: Interval,
    pub phase_noise_std_rad: Interval,
    pub nonlinearity_coeff: Interval,
}

impl Default for ImpairmentRanges {
    fn default() -> Self {
        ImpairmentRanges {
            iq_gain_imbalance_db: Interval::symmetric(0.25),
            iq_phase_imbalance_rad: Interval::symmetric(0.025),
            dc_offset_re: Interval::symmetric(0.025),
            dc_offset_im: Interval::symmetric(0.025),
            cfo_normalized: Interval::symmetric(0.001),
            phase_noise_std_rad: Interval::new(0.0, 0.01),
            nonlinearity_coeff: Interval::new(0.0, 0.025),
        }
    }
}

impl ImpairmentRanges {
    /// Every range collapsed to zero: the identity fingerprint.
    pub fn none() -> Self {
        let z = Interval::point(0.0);
        ImpairmentRanges {
            iq_gain_imbalance_db: z,
            iq_phase_imbalance_rad: z,
            dc_offset_re: z,
            dc_offset_im: z,
            cfo_normalized: z,
            phase_noise_std_rad: z,
            nonlinearity_coeff: z,
        }
    }

    /// Ranges eight times wider than the default, for well separated devices.
    pub fn wide() -> Self {
        Self::default().scaled(8.0)
    }

    /// Multiplies every interval endpoint by `factor` (clamping CFO to the
    /// admissible band).
    pub fn scaled(&self, factor: f64) -> Self {
        let cfo = self.cfo_normalized.scaled(factor);
        ImpairmentRanges {
            iq_gain_imbalance_db: self.iq_gain_imbalance_db.scaled(factor),
            iq_phase_imbalance_rad: self.iq_phase_imbalance_rad.scaled(factor),
            dc_offset_re: self.dc_offset_re.scaled(factor),
            dc_offset_im: self.dc_offset_im.scaled(factor),
            cfo_normalized: Interval::new(cfo.lo.max(-MAX_CFO), cfo.hi.min(MAX_CFO)),
            phase_noise_std_rad: self.phase_noise_std_rad.scaled(factor),
            nonlinearity_coeff: self.nonlinearity_coeff.scaled(factor),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("iq_gain_imbalance_db", self.iq_gain_imbalance_db),
            ("iq_phase_imbalance_rad", self.iq_phase_imbalance_rad),
            ("dc_offset_re", self.dc_offset_re),
            ("dc_offset_im", self.dc_offset_im),
            ("cfo_normalized", self.cfo_normalized),
            ("phase_noise_std_rad", self.phase_noise_std_rad),
            ("nonlinearity_coeff", self.nonlinearity_coeff),
        ];
        for (name, iv) in fields {
            if !iv.is_valid() {
                return Err(Error::Config(format!(
                    "impairment range `{name}` = [{}, {}] is empty or inverted",
                    iv.lo, iv.hi
                )));
            }
        }
        if self.cfo_normalized.lo < -MAX_CFO || self.cfo_normalized.hi > MAX_CFO {
            return Err(Error::Config(format!(
                "cfo_normalized must lie within [-{MAX_CFO}, {MAX_CFO}]"
            )));
        }
        if self.phase_noise_std_rad.lo < 0.0 || self.nonlinearity_coeff.lo < 0.0 {
            return Err(Error::Config(
                "phase_noise_std_rad and nonlinearity_coeff must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Per-device impairment parameters realizing the fingerprint function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmitterProfile {
    pub tx_id: u32,
    pub iq_gain_imbalance_db: f64,
    pub iq_phase_imbalance_rad: f64,
    pub dc_offset: Complex64,
    pub cfo_normalized: f64,
    pub phase_noise_std_rad: f64,
    pub nonlinearity_coeff: f64,
}

impl TransmitterProfile {
    pub fn identity(tx_id: u32) -> Self {
        TransmitterProfile {
            tx_id,
            iq_gain_imbalance_db: 0.0,
            iq_phase_imbalance_rad: 0.0,
            dc_offset: Complex64::new(0.0, 0.0),
            cfo_normalized: 0.0,
            phase_noise_std_rad: 0.0,
            nonlinearity_coeff: 0.0,
        }
    }

    pub fn is_valid(&self) -> bool {
        let all_finite = [
            self.iq_gain_imbalance_db,
            self.iq_phase_imbalance_rad,
            self.dc_offset.re,
            self.dc_offset.im,
            self.cfo_normalized,
            self.phase_noise_std_rad,
            self.nonlinearity_coeff,
        ]
        .iter()
        .all(|v| v.is_finite());
        all_finite
            && self.phase_noise_std_rad >= 0.0
            && self.nonlinearity_coeff >= 0.0
            && self.cfo_normalized.abs() <= MAX_CFO
    }

    /// Impairment parameters as a plain vector (id excluded).
    pub fn parameter_vector(&self) -> [f64; 7] {
        [
            self.iq_gain_imbalance_db,
            self.iq_phase_imbalance_rad,
            self.dc_offset.re,
            self.dc_offset.im,
            self.cfo_normalized,
            self.phase_noise_std_rad,
            self.nonlinearity_coeff,
        ]
    }
}

/// Draws every impairment uniformly from its range. Deterministic in
/// `(rng_seed, tx_id)`.
pub fn sample_profile(rng_seed: u64, tx_id: u32, ranges: &ImpairmentRanges) -> Result<TransmitterProfile> {
    ranges.validate()?;
    let mut rng = seed::rng(rng_seed, &[seed::tag::PROFILE, tx_id as u64]);
    Ok(TransmitterProfile {
        tx_id,
        iq_gain_imbalance_db: ranges.iq_gain_imbalance_db.sample(&mut rng),
        iq_phase_imbalance_rad: ranges.iq_phase_imbalance_rad.sample(&mut rng),
        dc_offset: Complex64::new(
            ranges.dc_offset_re.sample(&mut rng),
            ranges.dc_offset_im.sample(&mut rng),
        ),
        cfo_normalized: ranges.cfo_normalized.sample(&mut rng),
        phase_noise_std_rad: ranges.phase_noise_std_rad.sample(&mut rng),
        nonlinearity_coeff: ranges.nonlinearity_coeff.sample(&mut rng),
    })
}
