use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Sampling range for synthetic rotations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DifficultyLevel {
    /// Uniform in [-30, 30].
    Pm30,
    /// Uniform in [-45, 45].
    Pm45,
    /// Uniform in [0, 360).
    Full360,
}

impl DifficultyLevel {
    pub const ALL: [DifficultyLevel; 3] = [Self::Pm30, Self::Pm45, Self::Full360];

    /// Lower and upper bound of the native signed range.
    pub fn range(self) -> (f64, f64) {
        match self {
            Self::Pm30 => (-30.0, 30.0),
            Self::Pm45 => (-45.0, 45.0),
            Self::Full360 => (0.0, 360.0),
        }
    }

    /// Whether `signed` lies in this level's range (upper bound open for
    /// the full circle).
    pub fn contains(self, signed: f64) -> bool {
        let (lo, hi) = self.range();
        match self {
            Self::Full360 => signed >= lo && signed < hi,
            _ => signed >= lo && signed <= hi,
        }
    }

    /// Half-width used to scale the regression output.
    pub fn output_scale(self) -> f64 {
        match self {
            Self::Pm30 => 30.0,
            Self::Pm45 => 45.0,
            Self::Full360 => 180.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Pm30 => "pm30",
            Self::Pm45 => "pm45",
            Self::Full360 => "full360",
        }
    }

    /// Suffix used in learned-model names: 30, 45 or 360.
    pub fn model_suffix(self) -> &'static str {
        match self {
            Self::Pm30 => "30",
            Self::Pm45 => "45",
            Self::Full360 => "360",
        }
    }
}

impl fmt::Display for DifficultyLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DifficultyLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pm30" => Ok(Self::Pm30),
            "pm45" => Ok(Self::Pm45),
            "full360" => Ok(Self::Full360),
            other => Err(format!("unknown level {other:?}; expected pm30, pm45 or full360")),
        }
    }
}

/// Draws one rotation uniformly from the level's range.
pub fn sample_angle<R: Rng + ?Sized>(level: DifficultyLevel, rng: &mut R) -> f64 {
    match level {
        DifficultyLevel::Pm30 => rng.gen_range(-30.0..=30.0),
        DifficultyLevel::Pm45 => rng.gen_range(-45.0..=45.0),
        DifficultyLevel::Full360 => rng.gen_range(0.0..360.0),
    }
}
