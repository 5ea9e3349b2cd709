use serde::{Deserialize, Serialize};

use crate::nn::{NetSpec, Network, OutputKind};
use crate::{Arch, Error, Result, FRAME_LEN};

/// Shape of the shared feature extractor.
///
/// Each residual block projects its input to `f` channels, applies two
/// `kernel_size` convolutions with a skip connection, and (except the last)
/// halves the time axis with max pooling. Global average pooling and a dense
/// layer of width `feature_dim` follow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractorConfig {
    pub block_filters: Vec<usize>,
    pub kernel_size: usize,
    pub feature_dim: usize,
}

impl Default for ExtractorConfig {
    fn default() -> Self {
        ExtractorConfig {
            block_filters: vec![32, 32, 64, 64],
            kernel_size: 3,
            feature_dim: 64,
        }
    }
}

impl ExtractorConfig {
    /// Reduced extractor used for quick CPU runs.
    pub fn desk() -> Self {
        ExtractorConfig {
            block_filters: vec![16, 16, 32, 32],
            kernel_size: 3,
            feature_dim: 64,
        }
    }
}

fn default_hidden() -> usize {
    80
}

fn default_l2() -> f64 {
    0.001
}

/// Classifier head(s): `dense(hidden_width, relu) -> dense(outputs)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadConfig {
    pub arch: Arch,
    pub n_authorized: usize,
    #[serde(default = "default_hidden")]
    pub hidden_width: usize,
    #[serde(default = "default_l2")]
    pub l2_weight: f64,
}

impl HeadConfig {
    pub fn new(arch: Arch, n_authorized: usize) -> Self {
        HeadConfig {
            arch,
            n_authorized,
            hidden_width: default_hidden(),
            l2_weight: default_l2(),
        }
    }

    /// Number of values in a score vector.
    pub fn output_width(&self) -> usize {
        match self.arch {
            Arch::Disc => 1,
            Arch::DClass => self.n_authorized + 1,
            Arch::Ova => self.n_authorized,
        }
    }
}

pub(crate) fn net_spec(ec: &ExtractorConfig, hc: &HeadConfig) -> Result<NetSpec> {
    if hc.n_authorized == 0 {
        return Err(Error::Config("n_authorized must be at least 1".into()));
    }
    let (heads, outputs_per_head, output) = match hc.arch {
        Arch::Disc => (1, 1, OutputKind::Sigmoid),
        Arch::DClass => (1, hc.n_authorized + 1, OutputKind::Softmax),
        Arch::Ova => (hc.n_authorized, 1, OutputKind::Sigmoid),
    };
    let spec = NetSpec {
        input_channels: 2,
        input_len: FRAME_LEN,
        block_filters: ec.block_filters.clone(),
        kernel_size: ec.kernel_size,
        feature_dim: ec.feature_dim,
        heads,
        hidden_width: hc.hidden_width,
        outputs_per_head,
        output,
        l2_weight: hc.l2_weight,
    };
    spec.validate()?;
    Ok(spec)
}

/// A network together with the configuration that produced it.
#[derive(Debug, Clone)]
pub struct Model {
    pub extractor: ExtractorConfig,
    pub head: HeadConfig,
    pub net: Network<f32>,
}

impl Model {
    pub fn arch(&self) -> Arch {
        self.head.arch
    }
}

/// Builds an untrained model; weights are drawn from `init_seed`.
pub fn build_model(ec: &ExtractorConfig, hc: &HeadConfig, init_seed: u64) -> Result<Model> {
    let spec = net_spec(ec, hc)?;
    Ok(Model {
        extractor: ec.clone(),
        head: hc.clone(),
        net: Network::new(spec, init_seed)?,
    })
}

pub fn param_count(model: &Model) -> usize {
    model.net.n_params()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(arch: Arch, n: usize) -> usize {
        param_count(&build_model(&ExtractorConfig::default(), &HeadConfig::new(arch, n), 0).unwrap())
    }

    #[test]
    fn dclass_grows_by_81_per_transmitter() {
        assert_eq!(count(Arch::DClass, 11) - count(Arch::DClass, 10), 81);
        let m = build_model(&ExtractorConfig::default(), &HeadConfig::new(Arch::DClass, 10), 0).unwrap();
        assert_eq!(m.net.spec().n_outputs(), 11);
    }

    #[test]
    fn disc_size_is_independent_of_authorized_count() {
        assert_eq!(count(Arch::Disc, 5), count(Arch::Disc, 50));
    }

    #[test]
    fn ova_has_one_head_per_transmitter() {
        let m = build_model(&ExtractorConfig::default(), &HeadConfig::new(Arch::Ova, 3), 0).unwrap();
        assert_eq!(m.net.spec().heads, 3);
        let step = count(Arch::Ova, 4) - count(Arch::Ova, 3);
        assert_eq!(step, count(Arch::Ova, 9) - count(Arch::Ova, 8));
        // hidden layer (64 -> 80) plus output unit (80 -> 1)
        assert_eq!(step, 64 * 80 + 80 + 80 + 1);
    }

    #[test]
    fn zero_authorized_rejected() {
        assert!(build_model(&ExtractorConfig::default(), &HeadConfig::new(Arch::Ova, 0), 0).is_err());
        let bad = ExtractorConfig {
            block_filters: vec![8, 0],
            ..ExtractorConfig::default()
        };
        assert!(build_model(&bad, &HeadConfig::new(Arch::Disc, 2), 0).is_err());
    }
}
