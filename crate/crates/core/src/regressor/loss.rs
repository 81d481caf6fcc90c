use super::TrainConfig;
use crate::angle::{circular_distance_raw, circular_loss_subgradient, l1_subgradient, wrap_degrees, AngleError};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// Mean shortest-arc distance on wrapped predictions.
    Circular,
    /// Mean absolute difference of raw values.
    L1,
}

impl LossKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Circular => "circular",
            Self::L1 => "l1",
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LossKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "circular" => Ok(Self::Circular),
            "l1" => Ok(Self::L1),
            other => Err(format!("unknown loss {other:?}; expected circular or l1")),
        }
    }
}

/// Loss over regression targets and raw outputs, both in degrees.
///
/// Targets are whatever the model regresses toward: signed angles for the
/// restricted levels and wrapped angles for the full circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LossFn {
    pub kind: LossKind,
}

impl LossFn {
    pub fn per_sample(&self, target: f64, raw: f64) -> f64 {
        match self.kind {
            LossKind::Circular => circular_distance_raw(target, raw).degrees(),
            LossKind::L1 => (target - raw).abs(),
        }
    }

    /// Derivative of [`per_sample`](Self::per_sample) with respect to `raw`.
    pub fn gradient(&self, target: f64, raw: f64) -> f64 {
        match self.kind {
            LossKind::Circular => match wrap_degrees(target) {
                Ok(t) => circular_loss_subgradient(t, raw),
                Err(_) => 0.0,
            },
            LossKind::L1 => l1_subgradient(target, raw),
        }
    }

    pub fn mean(&self, targets: &[f64], raws: &[f64]) -> Result<f64, AngleError> {
        if targets.is_empty() {
            return Err(AngleError::Empty("targets"));
        }
        if targets.len() != raws.len() {
            return Err(AngleError::LengthMismatch { truths: targets.len(), predictions: raws.len() });
        }
        Ok(targets.iter().zip(raws).map(|(&t, &p)| self.per_sample(t, p)).sum::<f64>() / targets.len() as f64)
    }
}

pub fn loss_for_config(cfg: &TrainConfig) -> LossFn {
    LossFn { kind: cfg.loss }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::DifficultyLevel;
    use proptest::prelude::*;

    fn handle(kind: LossKind) -> LossFn {
        loss_for_config(&TrainConfig::new(DifficultyLevel::Full360, kind))
    }

    #[test]
    fn motivating_pair() {
        assert_eq!(handle(LossKind::Circular).per_sample(1.0, 359.0), 2.0);
        assert_eq!(handle(LossKind::L1).per_sample(1.0, 359.0), 358.0);
    }

    #[test]
    fn both_agree_inside_half_turn() {
        for kind in [LossKind::Circular, LossKind::L1] {
            assert_eq!(handle(kind).per_sample(10.0, 20.0), 10.0);
            assert_eq!(handle(kind).gradient(10.0, 20.0), 1.0);
        }
    }

    #[test]
    fn mean_checks_lengths() {
        let l = handle(LossKind::Circular);
        assert!(l.mean(&[], &[]).is_err());
        assert!(l.mean(&[1.0], &[1.0, 2.0]).is_err());
        assert_eq!(l.mean(&[0.0, 0.0], &[90.0, 270.0]).unwrap(), 90.0);
    }

    #[test]
    fn parse_names() {
        assert_eq!("l1".parse::<LossKind>().unwrap(), LossKind::L1);
        assert!("l2".parse::<LossKind>().is_err());
    }

    proptest! {
        #[test]
        fn degenerate_on_restricted_range(t in -45.0f64..=45.0, p in -45.0f64..=45.0) {
            let c = handle(LossKind::Circular);
            let l = handle(LossKind::L1);
            prop_assert_eq!(c.per_sample(t, p), l.per_sample(t, p));
            prop_assert_eq!(c.gradient(t, p), l.gradient(t, p));
        }

        #[test]
        fn circular_gradient_matches_finite_difference(t in 0.0f64..360.0, p in -720.0f64..720.0) {
            let l = handle(LossKind::Circular);
            let d = l.per_sample(t, p);
            prop_assume!(d > 0.01 && d < 179.99);
            let h = 1e-4;
            let fd = (l.per_sample(t, p + h) - l.per_sample(t, p - h)) / (2.0 * h);
            prop_assert!((fd - l.gradient(t, p)).abs() < 1e-3, "fd {} vs {}", fd, l.gradient(t, p));
        }
    }
}
