use serde::{Deserialize, Serialize};

use super::FeatureError;

/// Lower edges of the confidence bins; the last bin is closed at 1.
pub const CONFIDENCE_EDGES: [f64; 5] = [0.0, 0.2, 0.4, 0.6, 0.8];
/// Polarity bins: [-1,-0.6) [-0.6,-0.2) [-0.2,0.2] (0.2,0.6] (0.6,1].
pub const POLARITY_EDGES: [f64; 4] = [-0.6, -0.2, 0.2, 0.6];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfidenceBin {
    VeryLow,
    Low,
    Medium,
    High,
    VeryHigh,
}

impl ConfidenceBin {
    pub const ALL: [ConfidenceBin; 5] = [
        ConfidenceBin::VeryLow,
        ConfidenceBin::Low,
        ConfidenceBin::Medium,
        ConfidenceBin::High,
        ConfidenceBin::VeryHigh,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ConfidenceBin::VeryLow => "very_low",
            ConfidenceBin::Low => "low",
            ConfidenceBin::Medium => "medium",
            ConfidenceBin::High => "high",
            ConfidenceBin::VeryHigh => "very_high",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    StronglyNegative,
    Negative,
    Neutral,
    Positive,
    StronglyPositive,
}

impl Polarity {
    pub const ALL: [Polarity; 5] = [
        Polarity::StronglyNegative,
        Polarity::Negative,
        Polarity::Neutral,
        Polarity::Positive,
        Polarity::StronglyPositive,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::StronglyNegative => "strongly_negative",
            Polarity::Negative => "negative",
            Polarity::Neutral => "neutral",
            Polarity::Positive => "positive",
            Polarity::StronglyPositive => "strongly_positive",
        }
    }
}

pub fn bin_confidence(raw: f64) -> Result<ConfidenceBin, FeatureError> {
    if !(0.0..=1.0).contains(&raw) {
        return Err(FeatureError::OutOfRange { value: raw, lo: 0.0, hi: 1.0 });
    }
    let idx = CONFIDENCE_EDGES.iter().rposition(|&e| raw >= e).unwrap_or(0);
    Ok(ConfidenceBin::ALL[idx])
}

pub fn bin_polarity(raw: f64) -> Result<Polarity, FeatureError> {
    if !(-1.0..=1.0).contains(&raw) {
        return Err(FeatureError::OutOfRange { value: raw, lo: -1.0, hi: 1.0 });
    }
    let [a, b, c, d] = POLARITY_EDGES;
    Ok(if raw < a {
        Polarity::StronglyNegative
    } else if raw < b {
        Polarity::Negative
    } else if raw <= c {
        Polarity::Neutral
    } else if raw <= d {
        Polarity::Positive
    } else {
        Polarity::StronglyPositive
    })
}
