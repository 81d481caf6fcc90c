//! Learned orientation regressor.
//!
//! A convolutional backbone feeds a fixed fully connected head
//! (512 → 256 → 64, ReLU) ending in one linear unit that predicts the
//! rotation in degrees. Raw outputs are unbounded; they are wrapped onto the
//! circle by the circular loss and at prediction time.
//!
//! Regression targets follow the level: the signed angle for the restricted
//! levels (a range symmetric around 0) and the wrapped angle for the full
//! circle.

mod checkpoint;
mod layers;
mod loss;
mod model;
mod optim;
mod train;

pub use checkpoint::{ModelCheckpoint, Predictor, CHECKPOINT_MAGIC, FORMAT_VERSION};
pub use loss::{loss_for_config, LossFn, LossKind};
pub use model::{build_model, build_model_with_extractor, FeatureExtractor, Model};
pub use optim::{Adadelta, AdadeltaConfig};
pub use train::{prepare_examples, train, train_with_log, EpochRecord, Example, TrainOutcome};

use crate::angle::AngleError;
use crate::dataset::{DatasetError, DifficultyLevel, FillPolicy};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, thiserror::Error)]
pub enum RegressorError {
    #[error("model construction: {0}")]
    Construction(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("training diverged in epoch {epoch}: loss is {loss}")]
    TrainingDiverged { epoch: usize, loss: f64 },
    #[error("checkpoint: {0}")]
    Load(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Angle(#[from] AngleError),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HiddenActivation {
    Relu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    Linear,
}

/// The regression head appended to the backbone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeadSpec {
    pub fc_sizes: Vec<usize>,
    pub hidden_activation: HiddenActivation,
    pub output_nodes: usize,
    pub output_activation: OutputActivation,
    /// Fixed degrees per unit of the linear output. Not trained.
    pub output_scale: f64,
}

impl HeadSpec {
    pub const FC_SIZES: [usize; 3] = [512, 256, 64];

    pub fn for_level(level: DifficultyLevel) -> Self {
        Self { output_scale: level.output_scale(), ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), RegressorError> {
        if self.fc_sizes != Self::FC_SIZES {
            return Err(RegressorError::Construction(format!(
                "head must have hidden widths {:?}, got {:?}",
                Self::FC_SIZES,
                self.fc_sizes
            )));
        }
        if self.output_nodes != 1 {
            return Err(RegressorError::Construction(format!(
                "head must have exactly one output node, got {}",
                self.output_nodes
            )));
        }
        if !(self.output_scale.is_finite() && self.output_scale > 0.0) {
            return Err(RegressorError::Construction(format!("output scale {} must be positive", self.output_scale)));
        }
        Ok(())
    }
}

impl Default for HeadSpec {
    fn default() -> Self {
        Self {
            fc_sizes: Self::FC_SIZES.to_vec(),
            hidden_activation: HiddenActivation::Relu,
            output_nodes: 1,
            output_activation: OutputActivation::Linear,
            output_scale: 180.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackboneName {
    /// An externally supplied large pretrained extractor (Xception class).
    PretrainedLarge,
    /// Small strided conv stack trainable from scratch on a CPU.
    TinyDesk,
    /// A narrower, shallower conv stack; the weak backbone for ablations.
    MicroDesk,
}

impl BackboneName {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::PretrainedLarge => "pretrained_large",
            Self::TinyDesk => "tiny_desk",
            Self::MicroDesk => "micro_desk",
        }
    }
}

impl fmt::Display for BackboneName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BackboneName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "pretrained_large" => Ok(Self::PretrainedLarge),
            "tiny_desk" => Ok(Self::TinyDesk),
            "micro_desk" => Ok(Self::MicroDesk),
            other => Err(format!("unknown backbone {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightsOrigin {
    Pretrained,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackboneSpec {
    pub name: BackboneName,
    pub feature_dim: usize,
    pub weights_origin: WeightsOrigin,
    /// Model input `(height, width)`.
    pub input_size: (u32, u32),
    /// Output channels of each stride-2 3×3 conv block. Empty for external
    /// extractors.
    pub channels: Vec<usize>,
    /// Whether training updates the backbone.
    pub trainable: bool,
}

impl BackboneSpec {
    /// Four conv blocks, 16-32-32-32 channels, on a 32×32 input.
    pub fn tiny_desk() -> Self {
        Self::conv_stack(BackboneName::TinyDesk, (32, 32), vec![16, 32, 32, 32])
    }

    /// Three conv blocks, 4-8-8 channels, on a 32×32 input.
    pub fn micro_desk() -> Self {
        Self::conv_stack(BackboneName::MicroDesk, (32, 32), vec![4, 8, 8])
    }

    /// A frozen external extractor producing `feature_dim` features from a
    /// 299×299 input.
    pub fn pretrained_large(feature_dim: usize) -> Self {
        Self {
            name: BackboneName::PretrainedLarge,
            feature_dim,
            weights_origin: WeightsOrigin::Pretrained,
            input_size: (299, 299),
            channels: Vec::new(),
            trainable: false,
        }
    }

    pub fn by_name(name: BackboneName) -> Result<Self, RegressorError> {
        match name {
            BackboneName::TinyDesk => Ok(Self::tiny_desk()),
            BackboneName::MicroDesk => Ok(Self::micro_desk()),
            BackboneName::PretrainedLarge => Err(RegressorError::Construction(
                "pretrained_large needs an external feature extractor".into(),
            )),
        }
    }

    pub fn conv_stack(name: BackboneName, input_size: (u32, u32), channels: Vec<usize>) -> Self {
        let feature_dim = conv_feature_dim(input_size, &channels);
        Self { name, feature_dim, weights_origin: WeightsOrigin::Random, input_size, channels, trainable: true }
    }

    /// Spatial size after each stride-2 block, padding 1.
    pub(crate) fn conv_output_sizes(&self) -> Vec<(usize, usize)> {
        let (mut h, mut w) = (self.input_size.0 as usize, self.input_size.1 as usize);
        self.channels
            .iter()
            .map(|_| {
                h = h.div_ceil(2);
                w = w.div_ceil(2);
                (h, w)
            })
            .collect()
    }
}

fn conv_feature_dim(input: (u32, u32), channels: &[usize]) -> usize {
    let (mut h, mut w) = (input.0 as usize, input.1 as usize);
    for _ in channels {
        h = h.div_ceil(2);
        w = w.div_ceil(2);
    }
    channels.last().map(|c| c * h * w).unwrap_or(3 * h * w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub level: DifficultyLevel,
    pub loss: LossKind,
    pub optimizer: AdadeltaConfig,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// How rotated training images are framed.
    #[serde(default)]
    pub fill_policy: FillPolicy,
}

impl TrainConfig {
    pub fn new(level: DifficultyLevel, loss: LossKind) -> Self {
        Self {
            level,
            loss,
            optimizer: AdadeltaConfig::default(),
            batch_size: 8,
            epochs: 30,
            seed: 0,
            fill_policy: FillPolicy::FillBlack,
        }
    }

    pub fn validate(&self) -> Result<(), RegressorError> {
        self.optimizer.validate()?;
        if self.batch_size == 0 {
            return Err(RegressorError::InvalidArgument("batch size must be at least 1".into()));
        }
        Ok(())
    }
}
