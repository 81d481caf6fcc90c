//! Circular angle arithmetic in degrees.
//!
//! Orientation angles live on the circle `[0, 360)`. The distance between a
//! true angle `t` and a prediction `p` is the shorter of the two arcs,
//! `min(|t - p|, 360 - |t - p|)`, and the training loss is the mean of that
//! distance over a batch. Raw model outputs are unbounded reals, so they are
//! wrapped onto the circle before the distance is taken.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Degrees in a full turn.
pub const FULL_TURN: f64 = 360.0;
/// Degrees in a half turn; the largest possible circular distance.
pub const HALF_TURN: f64 = 180.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AngleError {
    #[error("angle must be finite, got {0}")]
    NonFinite(f64),
    #[error("{0} must not be empty")]
    Empty(&'static str),
    #[error("length mismatch: {truths} truths vs {predictions} predictions")]
    LengthMismatch { truths: usize, predictions: usize },
}

/// An orientation in degrees, always in `[0, 360)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    /// Wraps any finite value onto the circle.
    pub fn new(degrees: f64) -> Result<Self, AngleError> {
        wrap_degrees(degrees)
    }

    pub fn degrees(self) -> f64 {
        self.0
    }

    /// The same orientation expressed in `(-180, 180]`.
    pub fn to_signed(self) -> f64 {
        if self.0 > HALF_TURN {
            self.0 - FULL_TURN
        } else {
            self.0
        }
    }
}

impl TryFrom<f64> for Angle {
    type Error = AngleError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        wrap_degrees(value)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}°", self.0)
    }
}

/// Shortest-arc distance between two angles, in `[0, 180]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AngularError(f64);

impl AngularError {
    pub fn degrees(self) -> f64 {
        self.0
    }
}

/// Signed rotation in `(-180, 180]` taking one angle onto another along the
/// shortest arc.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SignedDelta(f64);

impl SignedDelta {
    pub fn degrees(self) -> f64 {
        self.0
    }
}

/// Reduces `x` modulo 360 into `[0, 360)`.
pub fn wrap_degrees(x: f64) -> Result<Angle, AngleError> {
    if !x.is_finite() {
        return Err(AngleError::NonFinite(x));
    }
    let mut r = x.rem_euclid(FULL_TURN);
    // rem_euclid rounds tiny negative inputs up to exactly 360.
    if r >= FULL_TURN {
        r = 0.0;
    }
    Ok(Angle(r))
}

/// `min(|t - p|, 360 - |t - p|)`.
pub fn circular_distance(t: Angle, p: Angle) -> AngularError {
    circular_distance_raw(t.0, p.0)
}

/// Circular distance between two unwrapped values.
///
/// Equal to `circular_distance(wrap(t), wrap(p))`, but reduces the raw
/// difference instead of each operand, so it is exactly `|t - p|` whenever
/// that is at most 180. Non-finite input yields NaN.
pub fn circular_distance_raw(t: f64, p: f64) -> AngularError {
    // fmod is exact
    let d = (t - p).abs() % FULL_TURN;
    AngularError(d.min(FULL_TURN - d))
}

/// The unique `δ ∈ (-180, 180]` with `wrap(p + δ) = t`.
pub fn signed_shortest_delta(t: Angle, p: Angle) -> SignedDelta {
    let mut d = t.0 - p.0;
    if d > HALF_TURN {
        d -= FULL_TURN;
    } else if d <= -HALF_TURN {
        d += FULL_TURN;
    }
    SignedDelta(d)
}

/// Mean circular distance between truths and wrapped raw predictions.
pub fn circular_loss(truths: &[Angle], raw_predictions: &[f64]) -> Result<f64, AngleError> {
    check_batch(truths.len(), raw_predictions.len())?;
    let mut sum = 0.0;
    for (&t, &p) in truths.iter().zip(raw_predictions) {
        if !p.is_finite() {
            return Err(AngleError::NonFinite(p));
        }
        sum += circular_distance_raw(t.0, p).0;
    }
    Ok(sum / truths.len() as f64)
}

/// Derivative of `circular_distance(t, wrap(p_raw))` with respect to `p_raw`.
///
/// Returns `-1`, `0` or `+1`. Both kinks (distance 0 and distance 180) map to
/// 0. A non-finite `p_raw` also yields 0.
pub fn circular_loss_subgradient(t: Angle, p_raw: f64) -> f64 {
    let Ok(p) = wrap_degrees(p_raw) else {
        return 0.0;
    };
    let delta = signed_shortest_delta(t, p).0;
    if delta == 0.0 || delta.abs() == HALF_TURN {
        0.0
    } else {
        -delta.signum()
    }
}

/// Mean absolute difference of raw values, with no wrapping.
pub fn l1_loss(truths_signed: &[f64], raw_predictions: &[f64]) -> Result<f64, AngleError> {
    check_batch(truths_signed.len(), raw_predictions.len())?;
    let sum: f64 = truths_signed
        .iter()
        .zip(raw_predictions)
        .map(|(t, p)| (t - p).abs())
        .sum();
    Ok(sum / truths_signed.len() as f64)
}

/// Derivative of `|t - p|` with respect to `p`, 0 at the kink.
pub fn l1_subgradient(t_signed: f64, p_raw: f64) -> f64 {
    let d = p_raw - t_signed;
    if d == 0.0 || !d.is_finite() {
        0.0
    } else {
        d.signum()
    }
}

/// Mean circular distance over `(truth, prediction)` pairs.
pub fn mean_absolute_angular_error(pairs: &[(Angle, Angle)]) -> Result<f64, AngleError> {
    if pairs.is_empty() {
        return Err(AngleError::Empty("pairs"));
    }
    let sum: f64 = pairs.iter().map(|&(t, p)| circular_distance(t, p).0).sum();
    Ok(sum / pairs.len() as f64)
}

fn check_batch(truths: usize, predictions: usize) -> Result<(), AngleError> {
    if truths == 0 {
        return Err(AngleError::Empty("truths"));
    }
    if truths != predictions {
        return Err(AngleError::LengthMismatch { truths, predictions });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn a(x: f64) -> Angle {
        Angle::new(x).unwrap()
    }

    /// Independent reference: the shortest of the candidate arcs.
    fn brute_distance(t: f64, p: f64) -> f64 {
        (-2..=2)
            .map(|k| (t - p + FULL_TURN * k as f64).abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// Independent reference: the candidate offset that lands in (-180, 180].
    fn brute_delta(t: f64, p: f64) -> f64 {
        (-1..=1)
            .map(|k| t - p + FULL_TURN * k as f64)
            .find(|d| *d > -HALF_TURN && *d <= HALF_TURN)
            .unwrap()
    }

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap_degrees(0.0).unwrap().degrees(), 0.0);
        assert_eq!(wrap_degrees(365.0).unwrap().degrees(), 5.0);
        assert_eq!(wrap_degrees(-30.0).unwrap().degrees(), 330.0);
        assert_eq!(wrap_degrees(360.0).unwrap().degrees(), 0.0);
        assert_eq!(wrap_degrees(-1e-20).unwrap().degrees(), 0.0);
    }

    #[test]
    fn wrap_rejects_non_finite() {
        assert!(matches!(wrap_degrees(f64::NAN), Err(AngleError::NonFinite(_))));
        assert!(wrap_degrees(f64::INFINITY).is_err());
        assert!(wrap_degrees(f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn distance_examples() {
        assert_eq!(circular_distance(a(1.0), a(359.0)).degrees(), 2.0);
        assert_eq!(circular_distance(a(10.0), a(200.0)).degrees(), 170.0);
        for t in [0.0, 17.5, 180.0, 359.9] {
            assert_eq!(circular_distance(a(t), a(t)).degrees(), 0.0);
        }
    }

    #[test]
    fn delta_examples() {
        assert_eq!(signed_shortest_delta(a(1.0), a(359.0)).degrees(), brute_delta(1.0, 359.0));
        assert_eq!(signed_shortest_delta(a(1.0), a(359.0)).degrees(), 2.0);
        assert_eq!(signed_shortest_delta(a(359.0), a(1.0)).degrees(), -2.0);
        assert_eq!(signed_shortest_delta(a(42.0), a(42.0)).degrees(), 0.0);
        // the half-turn resolves to +180
        assert_eq!(signed_shortest_delta(a(180.0), a(0.0)).degrees(), 180.0);
        assert_eq!(signed_shortest_delta(a(0.0), a(180.0)).degrees(), 180.0);
    }

    #[test]
    fn loss_examples() {
        assert_eq!(circular_loss(&[a(1.0)], &[359.0]).unwrap(), 2.0);
        assert_eq!(circular_loss(&[a(10.0), a(350.0)], &[10.0, 350.0]).unwrap(), 0.0);
        let oracle = (brute_distance(0.0, 90.0) + brute_distance(0.0, 270.0)) / 2.0;
        assert_eq!(oracle, 90.0);
        assert_eq!(circular_loss(&[a(0.0), a(0.0)], &[90.0, 270.0]).unwrap(), oracle);
        // raw outputs far from the circle are wrapped first
        assert_eq!(circular_loss(&[a(1.0)], &[-1.0 - 720.0]).unwrap(), 2.0);
    }

    #[test]
    fn loss_errors() {
        assert_eq!(circular_loss(&[], &[]), Err(AngleError::Empty("truths")));
        assert_eq!(
            circular_loss(&[a(0.0)], &[1.0, 2.0]),
            Err(AngleError::LengthMismatch { truths: 1, predictions: 2 })
        );
        assert!(circular_loss(&[a(0.0)], &[f64::NAN]).is_err());
    }

    #[test]
    fn l1_motivating_example() {
        assert_eq!(l1_loss(&[1.0], &[359.0]).unwrap(), 358.0);
        assert_eq!(l1_loss(&[10.0], &[20.0]).unwrap(), 10.0);
    }

    #[test]
    fn subgradient_examples() {
        // frozen from the central finite difference below
        let h = 1e-4;
        let fd = (circular_loss(&[a(90.0)], &[80.0 + h]).unwrap()
            - circular_loss(&[a(90.0)], &[80.0 - h]).unwrap())
            / (2.0 * h);
        assert!((fd - -1.0).abs() < 1e-6);
        assert_eq!(circular_loss_subgradient(a(90.0), 80.0), -1.0);
        assert_eq!(circular_loss_subgradient(a(90.0), 100.0), 1.0);
        assert_eq!(circular_loss_subgradient(a(33.0), 33.0), 0.0);
        assert_eq!(circular_loss_subgradient(a(0.0), 180.0), 0.0);
        // across the seam: predicting 359 for truth 1 should push p upward
        assert_eq!(circular_loss_subgradient(a(1.0), 359.0), -1.0);
        assert_eq!(circular_loss_subgradient(a(1.0), -1.0), -1.0);
    }

    #[test]
    fn mae_examples() {
        let pairs = [(a(1.0), a(359.0)), (a(359.0), a(1.0))];
        let oracle = (brute_distance(1.0, 359.0) + brute_distance(359.0, 1.0)) / 2.0;
        assert_eq!(mean_absolute_angular_error(&pairs).unwrap(), oracle);
        assert_eq!(oracle, 2.0);
        assert_eq!(mean_absolute_angular_error(&[(a(5.0), a(5.0))]).unwrap(), 0.0);
        assert_eq!(mean_absolute_angular_error(&[(a(0.0), a(90.0))]).unwrap(), 90.0);
        assert!(mean_absolute_angular_error(&[]).is_err());
    }

    #[test]
    fn serde_wraps_on_read() {
        let x: Angle = serde_json::from_str("370.0").unwrap();
        assert_eq!(x.degrees(), 10.0);
        assert!(serde_json::from_str::<Angle>("\"x\"").is_err());
        assert_eq!(serde_json::to_string(&a(12.5)).unwrap(), "12.5");
    }

    fn finite() -> impl Strategy<Value = f64> {
        -1e6f64..1e6
    }

    fn wrapped() -> impl Strategy<Value = Angle> {
        (0.0f64..360.0).prop_map(a)
    }

    proptest! {
        #[test]
        fn wrap_is_idempotent_and_in_range(x in finite()) {
            let w = wrap_degrees(x).unwrap();
            prop_assert!(w.degrees() >= 0.0 && w.degrees() < 360.0);
            prop_assert_eq!(wrap_degrees(w.degrees()).unwrap(), w);
            // congruent mod 360
            let k = ((x - w.degrees()) / 360.0).round();
            prop_assert!((x - w.degrees() - 360.0 * k).abs() < 1e-6);
        }

        #[test]
        fn distance_symmetric_and_bounded(t in wrapped(), p in wrapped()) {
            let d = circular_distance(t, p).degrees();
            prop_assert_eq!(d, circular_distance(p, t).degrees());
            prop_assert!((0.0..=180.0).contains(&d));
            prop_assert!((d - brute_distance(t.degrees(), p.degrees())).abs() <= 1e-9);
        }

        #[test]
        fn distance_rotation_invariant(t in wrapped(), p in wrapped(), c in -1000.0f64..1000.0) {
            let shifted = circular_distance(
                wrap_degrees(t.degrees() + c).unwrap(),
                wrap_degrees(p.degrees() + c).unwrap(),
            );
            prop_assert!((shifted.degrees() - circular_distance(t, p).degrees()).abs() < 1e-9);
        }

        #[test]
        fn triangle_inequality(x in wrapped(), y in wrapped(), z in wrapped()) {
            let xz = circular_distance(x, z).degrees();
            let xy = circular_distance(x, y).degrees();
            let yz = circular_distance(y, z).degrees();
            prop_assert!(xz <= xy + yz + 1e-9);
        }

        #[test]
        fn delta_lands_on_target(t in wrapped(), p in wrapped()) {
            let d = signed_shortest_delta(t, p).degrees();
            prop_assert!(d > -180.0 && d <= 180.0);
            prop_assert_eq!(d, brute_delta(t.degrees(), p.degrees()));
            let landed = wrap_degrees(p.degrees() + d).unwrap();
            prop_assert!(circular_distance(landed, t).degrees() < 1e-9);
            prop_assert!((d.abs() - circular_distance(t, p).degrees()).abs() < 1e-12);
        }

        #[test]
        fn l1_degeneracy_on_restricted_range(t in -90.0f64..90.0, p in -90.0f64..90.0) {
            prop_assert_eq!(circular_distance_raw(t, p).degrees(), (t - p).abs());
            // wrapping each operand first rounds, so only near-equality holds
            let circ = circular_distance(a(t), a(p)).degrees();
            prop_assert!((circ - (t - p).abs()).abs() < 1e-12);
        }

        #[test]
        fn raw_distance_matches_wrapped(t in finite(), p in finite()) {
            let raw = circular_distance_raw(t, p).degrees();
            let wrapped = circular_distance(a(t), a(p)).degrees();
            prop_assert!((raw - wrapped).abs() < 1e-6);
        }
    }
}
