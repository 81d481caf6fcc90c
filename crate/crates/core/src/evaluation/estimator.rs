use crate::angle::{wrap_degrees, Angle};
use crate::classical::{ClassicalMethod, EstimatorConfig};
use crate::dataset::DifficultyLevel;
use crate::regressor::Predictor;
use image::RgbImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::cell::RefCell;

/// Anything that maps an image to an orientation.
pub trait Estimator {
    fn name(&self) -> String;

    /// Whether the method can be scored on rotations drawn at `level`.
    fn applicable(&self, level: DifficultyLevel) -> bool;

    /// Estimated rotation, or a failure message (for example, no structure).
    fn estimate(&self, img: &RgbImage) -> Result<Angle, String>;
}

/// Column name of the learned model for a level: `OAD-30`, `OAD-45`,
/// `OAD-360`.
pub fn learned_method_name(level: DifficultyLevel) -> String {
    format!("OAD-{}", level.model_suffix())
}

#[derive(Debug, Clone)]
pub struct ClassicalEstimator {
    pub method: ClassicalMethod,
    pub config: EstimatorConfig,
}

impl ClassicalEstimator {
    pub fn new(method: ClassicalMethod) -> Self {
        Self { method, config: EstimatorConfig::default() }
    }
}

impl Estimator for ClassicalEstimator {
    fn name(&self) -> String {
        self.method.as_str().to_string()
    }

    /// Line-based estimators cannot tell a half-turn apart, so they are
    /// restricted to the bounded levels.
    fn applicable(&self, level: DifficultyLevel) -> bool {
        level != DifficultyLevel::Full360
    }

    fn estimate(&self, img: &RgbImage) -> Result<Angle, String> {
        let a = self.method.estimate(img, &self.config).map_err(|e| e.to_string())?;
        wrap_degrees(a).map_err(|e| e.to_string())
    }
}

#[derive(Debug)]
pub struct LearnedEstimator {
    pub predictor: Predictor,
}

impl Estimator for LearnedEstimator {
    fn name(&self) -> String {
        learned_method_name(self.predictor.level())
    }

    fn applicable(&self, _level: DifficultyLevel) -> bool {
        true
    }

    fn estimate(&self, img: &RgbImage) -> Result<Angle, String> {
        self.predictor.predict_angle(img).map_err(|e| e.to_string())
    }
}

/// Always answers the same angle.
#[derive(Debug, Clone, Copy)]
pub struct ConstantPredictor(pub Angle);

impl Estimator for ConstantPredictor {
    fn name(&self) -> String {
        format!("constant-{}", self.0.degrees())
    }

    fn applicable(&self, _level: DifficultyLevel) -> bool {
        true
    }

    fn estimate(&self, _img: &RgbImage) -> Result<Angle, String> {
        Ok(self.0)
    }
}

/// Uniform random guesses on `[0, 360)`, reproducible for a seed and call
/// order.
#[derive(Debug)]
pub struct UniformRandomPredictor {
    rng: RefCell<ChaCha8Rng>,
}

impl UniformRandomPredictor {
    pub fn new(seed: u64) -> Self {
        Self { rng: RefCell::new(ChaCha8Rng::seed_from_u64(seed)) }
    }
}

impl Estimator for UniformRandomPredictor {
    fn name(&self) -> String {
        "uniform-random".into()
    }

    fn applicable(&self, _level: DifficultyLevel) -> bool {
        true
    }

    fn estimate(&self, _img: &RgbImage) -> Result<Angle, String> {
        let x: f64 = self.rng.borrow_mut().gen_range(0.0..360.0);
        wrap_degrees(x).map_err(|e| e.to_string())
    }
}
