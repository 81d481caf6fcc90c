use super::{EvalError, Estimator};
use crate::angle::{circular_distance, Angle};
use crate::dataset::{DifficultyLevel, RotatedSample};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRecord {
    pub source_id: String,
    pub true_angle: Angle,
    pub predicted_angle: Angle,
    /// Circular distance in degrees.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FailureRecord {
    pub source_id: String,
    pub true_angle: Angle,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Summary {
    method: String,
    level: DifficultyLevel,
    samples: usize,
    failures: usize,
    mae: Option<f64>,
    #[serde(default)]
    config: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Line {
    Sample(SampleRecord),
    Failure(FailureRecord),
    Summary(Summary),
}

/// Per-sample errors and their mean for one method at one level.
///
/// Estimator failures are kept apart: they do not enter the MAE.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub method: String,
    pub level: DifficultyLevel,
    pub per_sample: Vec<SampleRecord>,
    pub failed: Vec<FailureRecord>,
    /// `None` when every sample failed.
    pub mae: Option<f64>,
    /// Effective configuration that produced the report.
    pub config: Option<serde_json::Value>,
}

fn mean_error(records: &[SampleRecord]) -> Option<f64> {
    if records.is_empty() {
        None
    } else {
        Some(records.iter().map(|r| r.error).sum::<f64>() / records.len() as f64)
    }
}

impl EvalReport {
    pub fn failures(&self) -> usize {
        self.failed.len()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let lines = self
            .per_sample
            .iter()
            .cloned()
            .map(Line::Sample)
            .chain(self.failed.iter().cloned().map(Line::Failure))
            .chain(std::iter::once(Line::Summary(Summary {
                method: self.method.clone(),
                level: self.level,
                samples: self.per_sample.len(),
                failures: self.failed.len(),
                mae: self.mae,
                config: self.config.clone(),
            })));
        for line in lines {
            out.push_str(&serde_json::to_string(&line).expect("report line serializes"));
            out.push('\n');
        }
        out
    }

    /// Parses and checks a report: the summary comes last, counts match,
    /// and every stored error and the MAE agree with the angles to 1e-9.
    pub fn from_jsonl(text: &str) -> Result<Self, EvalError> {
        let mut per_sample = Vec::new();
        let mut failed = Vec::new();
        let mut summary = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            if summary.is_some() {
                return Err(EvalError::Parse { line, message: "content after the summary record".into() });
            }
            let parsed: Line =
                serde_json::from_str(raw).map_err(|e| EvalError::Parse { line, message: e.to_string() })?;
            match parsed {
                Line::Sample(s) => {
                    let expect = circular_distance(s.true_angle, s.predicted_angle).degrees();
                    let off = (expect - s.error).abs();
                    if off.is_nan() || off > 1e-9 {
                        return Err(EvalError::Parse {
                            line,
                            message: format!("error {} does not match the angles ({expect})", s.error),
                        });
                    }
                    per_sample.push(s);
                }
                Line::Failure(f) => failed.push(f),
                Line::Summary(s) => summary = Some((line, s)),
            }
        }
        let (line, s) = summary.ok_or(EvalError::Parse { line: text.lines().count(), message: "missing summary".into() })?;
        if s.samples != per_sample.len() || s.failures != failed.len() {
            return Err(EvalError::Parse {
                line,
                message: format!(
                    "summary counts {}/{} do not match {} samples and {} failures",
                    s.samples,
                    s.failures,
                    per_sample.len(),
                    failed.len()
                ),
            });
        }
        let mae = mean_error(&per_sample);
        let consistent = match (mae, s.mae) {
            (None, None) => true,
            (Some(a), Some(b)) => (a - b).abs() <= 1e-9,
            _ => false,
        };
        if !consistent {
            return Err(EvalError::Parse { line, message: format!("summary mae {:?} does not match {mae:?}", s.mae) });
        }
        Ok(Self { method: s.method, level: s.level, per_sample, failed, mae: s.mae, config: s.config })
    }

    pub fn save(&self, path: &Path) -> Result<(), EvalError> {
        std::fs::write(path, self.to_jsonl()).map_err(|source| EvalError::Io { path: path.to_owned(), source })
    }

    pub fn load(path: &Path) -> Result<Self, EvalError> {
        let text = std::fs::read_to_string(path).map_err(|source| EvalError::Io { path: path.to_owned(), source })?;
        Self::from_jsonl(&text)
    }
}

/// Builds a report from `(source_id, truth, prediction)` triples.
pub fn evaluate_predictions(
    method: &str,
    level: DifficultyLevel,
    items: impl IntoIterator<Item = (String, Angle, Result<Angle, String>)>,
) -> Result<EvalReport, EvalError> {
    let mut per_sample = Vec::new();
    let mut failed = Vec::new();
    for (source_id, true_angle, pred) in items {
        match pred {
            Ok(p) => per_sample.push(SampleRecord {
                source_id,
                true_angle,
                predicted_angle: p,
                error: circular_distance(true_angle, p).degrees(),
            }),
            Err(message) => failed.push(FailureRecord { source_id, true_angle, message }),
        }
    }
    if per_sample.is_empty() && failed.is_empty() {
        return Err(EvalError::InvalidArgument("empty test set".into()));
    }
    let mae = mean_error(&per_sample);
    Ok(EvalReport { method: method.to_string(), level, per_sample, failed, mae, config: None })
}

/// Scores `estimator` on a test set drawn at a single level.
pub fn evaluate(estimator: &dyn Estimator, testset: &[RotatedSample]) -> Result<EvalReport, EvalError> {
    let first = testset.first().ok_or_else(|| EvalError::InvalidArgument("empty test set".into()))?;
    let level = first.level;
    if let Some(other) = testset.iter().find(|s| s.level != level) {
        return Err(EvalError::InvalidArgument(format!(
            "test set mixes levels {level} and {}",
            other.level
        )));
    }
    let method = estimator.name();
    if !estimator.applicable(level) {
        return Err(EvalError::NotApplicable { method, level });
    }
    evaluate_predictions(
        &method,
        level,
        testset.iter().map(|s| (s.source_id.clone(), s.true_angle, estimator.estimate(&s.image))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::wrap_degrees;
    use crate::evaluation::{ClassicalEstimator, ConstantPredictor, UniformRandomPredictor};
    use crate::classical::ClassicalMethod;
    use image::RgbImage;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn a(x: f64) -> Angle {
        wrap_degrees(x).unwrap()
    }

    fn blank_set(n: usize, level: DifficultyLevel, seed: u64) -> Vec<RotatedSample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let angle = crate::dataset::sample_angle(level, &mut rng);
                RotatedSample::new(format!("s{i}"), RgbImage::new(1, 1), angle, level).unwrap()
            })
            .collect()
    }

    #[test]
    fn oracle_scores_zero() {
        let set = blank_set(50, DifficultyLevel::Full360, 1);
        let r = evaluate_predictions("oracle", DifficultyLevel::Full360, set.iter().map(|s| (s.source_id.clone(), s.true_angle, Ok(s.true_angle))))
            .unwrap();
        assert_eq!(r.mae, Some(0.0));
    }

    #[test]
    fn constant_zero_on_uniform_full_circle() {
        let set = blank_set(10_000, DifficultyLevel::Full360, 2);
        let r = evaluate(&ConstantPredictor(Angle::ZERO), &set).unwrap();
        assert!((r.mae.unwrap() - 90.0).abs() <= 2.0, "{:?}", r.mae);
    }

    #[test]
    fn uniform_random_concentrates_near_ninety() {
        let set = blank_set(10_000, DifficultyLevel::Pm30, 3);
        let r = evaluate(&UniformRandomPredictor::new(4), &set).unwrap();
        assert!((r.mae.unwrap() - 90.0).abs() <= 3.0, "{:?}", r.mae);
    }

    #[test]
    fn classical_refuses_full_circle() {
        let set = blank_set(3, DifficultyLevel::Full360, 5);
        for m in ClassicalMethod::ALL {
            let err = evaluate(&ClassicalEstimator::new(m), &set).unwrap_err();
            assert!(matches!(err, EvalError::NotApplicable { .. }));
            assert!(err.to_string().contains("method not applicable"));
        }
    }

    #[test]
    fn failures_are_counted_not_averaged() {
        // 1x1 images have no structure for the classical methods
        let set = blank_set(4, DifficultyLevel::Pm45, 6);
        let r = evaluate(&ClassicalEstimator::new(ClassicalMethod::HoughPow), &set).unwrap();
        assert_eq!(r.failures(), 4);
        assert_eq!(r.mae, None);
        let back = EvalReport::from_jsonl(&r.to_jsonl()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn empty_and_mixed_sets_rejected() {
        assert!(matches!(evaluate(&ConstantPredictor(Angle::ZERO), &[]), Err(EvalError::InvalidArgument(_))));
        let mut set = blank_set(2, DifficultyLevel::Pm30, 7);
        set.extend(blank_set(1, DifficultyLevel::Pm45, 8));
        assert!(evaluate(&ConstantPredictor(Angle::ZERO), &set).is_err());
    }

    #[test]
    fn jsonl_round_trip_and_validation() {
        let r = evaluate_predictions(
            "m",
            DifficultyLevel::Pm45,
            vec![
                ("x".to_string(), a(10.0), Ok(a(350.0))),
                ("y".to_string(), a(0.5), Ok(a(0.25))),
                ("z".to_string(), a(1.0), Err("no structure".to_string())),
            ],
        )
        .unwrap();
        assert_eq!(r.mae, Some(10.125));
        let text = r.to_jsonl();
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().last().unwrap().contains("\"record\":\"summary\""));
        assert_eq!(EvalReport::from_jsonl(&text).unwrap(), r);

        let tampered = text.replacen("\"error\":20.0", "\"error\":21.0", 1);
        assert!(matches!(EvalReport::from_jsonl(&tampered), Err(EvalError::Parse { line: 1, .. })));
        let no_summary: String = text.lines().take(3).map(|l| format!("{l}\n")).collect();
        assert!(EvalReport::from_jsonl(&no_summary).is_err());
        let extra = format!("{text}{}\n", text.lines().next().unwrap());
        assert!(EvalReport::from_jsonl(&extra).is_err());
        let bad_mae = text.replace("\"mae\":10.125", "\"mae\":10.0");
        assert!(EvalReport::from_jsonl(&bad_mae).is_err());
        assert!(EvalReport::from_jsonl("").is_err());
    }

    proptest! {
        #[test]
        fn mae_matches_recomputation(pairs in prop::collection::vec((0.0f64..360.0, -720.0f64..720.0), 1..60)) {
            let r = evaluate_predictions(
                "p",
                DifficultyLevel::Full360,
                pairs.iter().enumerate().map(|(i, &(t, p))| (i.to_string(), a(t), Ok(a(p)))),
            ).unwrap();
            let recomputed = r.per_sample.iter().map(|s| circular_distance(s.true_angle, s.predicted_angle).degrees()).sum::<f64>()
                / r.per_sample.len() as f64;
            prop_assert!((r.mae.unwrap() - recomputed).abs() <= 1e-9);
            prop_assert!(r.per_sample.iter().all(|s| (0.0..=180.0).contains(&s.error)));
            prop_assert!(r.mae.unwrap() <= 180.0);
            let back = EvalReport::from_jsonl(&r.to_jsonl()).unwrap();
            prop_assert_eq!(back, r);
        }

        #[test]
        fn evaluation_is_pure(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let items: Vec<_> = (0..20).map(|i| (i.to_string(), a(rng.gen_range(0.0..360.0)), Ok(a(rng.gen_range(0.0..360.0))))).collect();
            let r1 = evaluate_predictions("p", DifficultyLevel::Full360, items.clone()).unwrap();
            let r2 = evaluate_predictions("p", DifficultyLevel::Full360, items).unwrap();
            prop_assert_eq!(r1.to_jsonl(), r2.to_jsonl());
        }
    }
}
