use super::RegressorError;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdadeltaConfig {
    pub learning_rate: f64,
    pub rho: f64,
    pub epsilon: f64,
}

impl Default for AdadeltaConfig {
    fn default() -> Self {
        Self { learning_rate: 0.1, rho: 0.95, epsilon: 1e-7 }
    }
}

impl AdadeltaConfig {
    pub fn validate(&self) -> Result<(), RegressorError> {
        let ok = self.learning_rate.is_finite()
            && self.learning_rate > 0.0
            && (0.0..1.0).contains(&self.rho)
            && self.epsilon.is_finite()
            && self.epsilon > 0.0;
        if ok {
            Ok(())
        } else {
            Err(RegressorError::InvalidArgument(format!("invalid optimizer settings {self:?}")))
        }
    }
}

/// Adadelta with a global learning rate.
///
/// ```text
/// E[g²] = ρ E[g²] + (1-ρ) g²
/// Δ     = sqrt(E[Δ²] + ε) / sqrt(E[g²] + ε) · g
/// E[Δ²] = ρ E[Δ²] + (1-ρ) Δ²
/// θ    -= lr · Δ
/// ```
#[derive(Debug, Clone)]
pub struct Adadelta {
    cfg: AdadeltaConfig,
    acc_grad: Vec<Vec<f32>>,
    acc_delta: Vec<Vec<f32>>,
}

impl Adadelta {
    pub fn new(cfg: AdadeltaConfig) -> Self {
        Self { cfg, acc_grad: Vec::new(), acc_delta: Vec::new() }
    }

    /// Updates each `(value, grad)` pair. The slot order must stay the same
    /// between calls.
    pub fn step<'a>(&mut self, params: impl IntoIterator<Item = (&'a mut [f32], &'a [f32])>) {
        let (rho, eps, lr) = (self.cfg.rho as f32, self.cfg.epsilon as f32, self.cfg.learning_rate as f32);
        for (slot, (value, grad)) in params.into_iter().enumerate() {
            if slot == self.acc_grad.len() {
                self.acc_grad.push(vec![0.0; value.len()]);
                self.acc_delta.push(vec![0.0; value.len()]);
            }
            let ag = &mut self.acc_grad[slot];
            let ad = &mut self.acc_delta[slot];
            for i in 0..value.len() {
                let g = grad[i];
                ag[i] = rho * ag[i] + (1.0 - rho) * g * g;
                let delta = (ad[i] + eps).sqrt() / (ag[i] + eps).sqrt() * g;
                ad[i] = rho * ad[i] + (1.0 - rho) * delta * delta;
                value[i] -= lr * delta;
            }
        }
    }
}
