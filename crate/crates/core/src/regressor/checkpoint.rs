//! Versioned binary checkpoint container.
//!
//! ```text
//! magic        8 bytes   "ORIENTCK"
//! version      u32 LE
//! header_len   u32 LE
//! header       JSON, header_len bytes
//! payload      f32 LE, tensors back to back in header order
//! ```

use super::model::{build_model_with_extractor, Model};
use super::train::TrainOutcome;
use super::{build_model, BackboneSpec, EpochRecord, FeatureExtractor, HeadSpec, RegressorError, TrainConfig};
use crate::angle::{wrap_degrees, Angle};
use crate::dataset::{preprocess_for_model, DifficultyLevel};
use image::RgbImage;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"ORIENTCK";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorInfo {
    name: String,
    shape: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    backbone: BackboneSpec,
    head: HeadSpec,
    train_config: TrainConfig,
    history: Vec<EpochRecord>,
    best_epoch: Option<usize>,
    provenance: Option<serde_json::Value>,
    tensors: Vec<TensorInfo>,
}

/// A trained model together with how it was trained.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelCheckpoint {
    pub backbone: BackboneSpec,
    pub head: HeadSpec,
    pub train_config: TrainConfig,
    pub history: Vec<EpochRecord>,
    pub best_epoch: Option<usize>,
    /// Free-form effective configuration recorded by the caller.
    pub provenance: Option<serde_json::Value>,
    pub tensors: Vec<(String, Vec<usize>, Vec<f32>)>,
}

impl ModelCheckpoint {
    pub fn from_model(model: &Model, train_config: &TrainConfig, outcome: &TrainOutcome) -> Self {
        Self {
            backbone: model.backbone().clone(),
            head: model.head().clone(),
            train_config: train_config.clone(),
            history: outcome.history.clone(),
            best_epoch: outcome.best_epoch,
            provenance: None,
            tensors: model.tensors().into_iter().map(|(n, s, v)| (n, s, v.to_vec())).collect(),
        }
    }

    pub fn level(&self) -> DifficultyLevel {
        self.train_config.level
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = Header {
            backbone: self.backbone.clone(),
            head: self.head.clone(),
            train_config: self.train_config.clone(),
            history: self.history.clone(),
            best_epoch: self.best_epoch,
            provenance: self.provenance.clone(),
            tensors: self.tensors.iter().map(|(n, s, _)| TensorInfo { name: n.clone(), shape: s.clone() }).collect(),
        };
        let json = serde_json::to_vec(&header).expect("header serializes");
        let mut out = Vec::with_capacity(16 + json.len() + self.tensors.iter().map(|t| 4 * t.2.len()).sum::<usize>());
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(json.len() as u32).to_le_bytes());
        out.extend_from_slice(&json);
        for (_, _, data) in &self.tensors {
            for v in data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, RegressorError> {
        let err = |m: String| RegressorError::Load(m);
        if bytes.len() < 16 || &bytes[..8] != CHECKPOINT_MAGIC {
            return Err(err("not a checkpoint (bad magic)".into()));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
        if version != FORMAT_VERSION {
            return Err(err(format!("unsupported format version {version}, expected {FORMAT_VERSION}")));
        }
        let header_len = u32::from_le_bytes(bytes[12..16].try_into().expect("4 bytes")) as usize;
        let body = &bytes[16..];
        if header_len > body.len() {
            return Err(err(format!("header length {header_len} exceeds file size")));
        }
        let header: Header =
            serde_json::from_slice(&body[..header_len]).map_err(|e| err(format!("invalid header: {e}")))?;
        let mut payload = &body[header_len..];

        let mut tensors = Vec::with_capacity(header.tensors.len());
        for t in &header.tensors {
            let n = t
                .shape
                .iter()
                .try_fold(1usize, |acc, &d| acc.checked_mul(d))
                .filter(|n| n.checked_mul(4).is_some_and(|b| b <= payload.len()))
                .ok_or_else(|| err(format!("tensor {} {:?} exceeds the payload", t.name, t.shape)))?;
            let (chunk, rest) = payload.split_at(4 * n);
            let data: Vec<f32> =
                chunk.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes"))).collect();
            tensors.push((t.name.clone(), t.shape.clone(), data));
            payload = rest;
        }
        if !payload.is_empty() {
            return Err(err(format!("{} trailing bytes after the last tensor", payload.len())));
        }
        Ok(Self {
            backbone: header.backbone,
            head: header.head,
            train_config: header.train_config,
            history: header.history,
            best_epoch: header.best_epoch,
            provenance: header.provenance,
            tensors,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), RegressorError> {
        std::fs::write(path, self.to_bytes()).map_err(|source| RegressorError::Io { path: path.to_owned(), source })
    }

    pub fn load(path: &Path) -> Result<Self, RegressorError> {
        let bytes = std::fs::read(path).map_err(|source| RegressorError::Io { path: path.to_owned(), source })?;
        Self::from_bytes(&bytes)
    }

    /// Rebuilds a conv-stack model from the stored weights.
    pub fn to_model(&self) -> Result<Model, RegressorError> {
        let mut model = build_model(&self.backbone, &self.head, 0)?;
        model.load_tensors(&self.tensors)?;
        Ok(model)
    }

    /// Rebuilds a model around an external extractor; the checkpoint holds
    /// only the head weights.
    pub fn to_model_with_extractor(&self, extractor: Box<dyn FeatureExtractor>) -> Result<Model, RegressorError> {
        let mut model = build_model_with_extractor(&self.backbone, &self.head, extractor, 0)?;
        model.load_tensors(&self.tensors)?;
        Ok(model)
    }
}

/// Maps images to wrapped angle predictions.
#[derive(Debug)]
pub struct Predictor {
    model: Model,
    level: DifficultyLevel,
}

impl Predictor {
    pub fn new(model: Model, level: DifficultyLevel) -> Self {
        Self { model, level }
    }

    pub fn from_checkpoint(ckpt: &ModelCheckpoint) -> Result<Self, RegressorError> {
        Ok(Self::new(ckpt.to_model()?, ckpt.level()))
    }

    pub fn level(&self) -> DifficultyLevel {
        self.level
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    /// Raw output in degrees, not wrapped.
    pub fn predict_raw(&self, img: &RgbImage) -> Result<f64, RegressorError> {
        let input = preprocess_for_model(img, self.model.input_size());
        Ok(self.model.forward(&[input])?[0])
    }

    pub fn predict_angle(&self, img: &RgbImage) -> Result<Angle, RegressorError> {
        let raw = self.predict_raw(img)?;
        Ok(wrap_degrees(raw)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regressor::{BackboneName, LossKind};

    fn sample() -> (ModelCheckpoint, Model) {
        let spec = BackboneSpec::conv_stack(BackboneName::MicroDesk, (16, 16), vec![2, 2]);
        let model = build_model(&spec, &HeadSpec::for_level(DifficultyLevel::Pm45), 9).unwrap();
        let cfg = TrainConfig::new(DifficultyLevel::Pm45, LossKind::Circular);
        let outcome = TrainOutcome {
            history: vec![EpochRecord { epoch: 1, train_loss: 12.5, val_mae: 11.0 }],
            best_epoch: Some(1),
        };
        let mut ckpt = ModelCheckpoint::from_model(&model, &cfg, &outcome);
        ckpt.provenance = Some(serde_json::json!({"seed": 3}));
        (ckpt, model)
    }

    #[test]
    fn round_trip_is_exact() {
        let (ckpt, model) = sample();
        let bytes = ckpt.to_bytes();
        assert_eq!(&bytes[..8], CHECKPOINT_MAGIC);
        let back = ModelCheckpoint::from_bytes(&bytes).unwrap();
        assert_eq!(back, ckpt);
        assert_eq!(back.to_bytes(), bytes);

        let img = RgbImage::from_fn(40, 30, |x, y| image::Rgb([(x * 6) as u8, (y * 8) as u8, 77]));
        let p1 = Predictor::new(model, DifficultyLevel::Pm45);
        let p2 = Predictor::from_checkpoint(&back).unwrap();
        assert_eq!(p1.predict_raw(&img).unwrap().to_bits(), p2.predict_raw(&img).unwrap().to_bits());
    }

    #[test]
    fn file_round_trip() {
        let (ckpt, _) = sample();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ock");
        ckpt.save(&path).unwrap();
        assert_eq!(ModelCheckpoint::load(&path).unwrap(), ckpt);
        assert!(matches!(ModelCheckpoint::load(&dir.path().join("missing")), Err(RegressorError::Io { .. })));
    }

    #[test]
    fn corrupt_inputs_rejected() {
        let (ckpt, _) = sample();
        let bytes = ckpt.to_bytes();
        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        let mut bad_version = bytes.clone();
        bad_version[8] = 99;
        let mut bad_len = bytes.clone();
        bad_len[12..16].copy_from_slice(&u32::MAX.to_le_bytes());
        let truncated = &bytes[..bytes.len() - 1];
        let mut trailing = bytes.clone();
        trailing.extend_from_slice(&[0, 0, 0, 0]);
        for b in [&bad_magic[..], &bad_version, &bad_len, truncated, &trailing, &[], b"ORIENTCK"] {
            assert!(matches!(ModelCheckpoint::from_bytes(b), Err(RegressorError::Load(_))));
        }
    }

    #[test]
    fn shape_mismatch_rejected_on_rebuild() {
        let (mut ckpt, _) = sample();
        // first conv weight is 2 x 27; store a consistent but wrong 2 x 28
        ckpt.tensors[0].1 = vec![2, 28];
        ckpt.tensors[0].2.extend([0.0, 0.0]);
        let back = ModelCheckpoint::from_bytes(&ckpt.to_bytes()).unwrap();
        assert!(matches!(back.to_model(), Err(RegressorError::Load(_))));
    }
}
