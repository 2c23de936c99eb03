//! Confusion matrices, recall/precision, and throughput figures.

use std::fmt;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("prediction stream has {predictions} entries but label stream has {labels}")]
    LengthMismatch { predictions: usize, labels: usize },
    #[error("throughput needs at least one processed frame")]
    NoFrames,
    #[error("wall time must be positive and finite, got {0} ms")]
    WallTime(f64),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

/// Outcome of a ratio metric. A zero denominator is its own state, never 0 or 100.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Rate {
    Percent(f64),
    Undefined,
}

impl Rate {
    pub fn percent(self) -> Option<f64> {
        match self {
            Rate::Percent(p) => Some(p),
            Rate::Undefined => None,
        }
    }

    pub fn reported(self, rounding: Rounding) -> Rate {
        match self {
            Rate::Percent(p) => Rate::Percent(rounding.apply(p)),
            Rate::Undefined => Rate::Undefined,
        }
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rate::Percent(p) => write!(f, "{p:.2}"),
            Rate::Undefined => f.write_str("undefined"),
        }
    }
}

/// How percentages are cut to two decimals for reporting.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rounding {
    /// Drop digits past the second decimal (93.899 → 93.89).
    #[default]
    Truncate,
    /// Round half away from zero (93.899 → 93.90).
    HalfUp,
}

impl Rounding {
    pub fn apply(self, pct: f64) -> f64 {
        let scaled = pct * 100.0;
        // Absorb binary noise such as 84.31 * 100 = 8430.999999999999.
        let nudged = scaled + scaled.abs() * 1e-12;
        match self {
            Rounding::Truncate => nudged.trunc() / 100.0,
            Rounding::HalfUp => nudged.round() / 100.0,
        }
    }
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        Self { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Tally one (prediction, label) pair.
    pub fn record(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn recall(&self) -> Rate {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn precision(&self) -> Rate {
        ratio(self.tp, self.tp + self.fp)
    }
}

fn ratio(num: u64, den: u64) -> Rate {
    if den == 0 {
        Rate::Undefined
    } else {
        Rate::Percent(num as f64 / den as f64 * 100.0)
    }
}

impl Add for ConfusionMatrix {
    type Output = ConfusionMatrix;

    fn add(self, o: ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix::new(self.tp + o.tp, self.fp + o.fp, self.fn_ + o.fn_, self.tn + o.tn)
    }
}

impl AddAssign for ConfusionMatrix {
    fn add_assign(&mut self, o: ConfusionMatrix) {
        *self = *self + o;
    }
}

impl std::iter::Sum for ConfusionMatrix {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(ConfusionMatrix::default(), Add::add)
    }
}

pub fn confusion(predictions: &[bool], labels: &[bool]) -> Result<ConfusionMatrix, MetricsError> {
    if predictions.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &l) in predictions.iter().zip(labels) {
        cm.record(p, l);
    }
    Ok(cm)
}

pub fn recall(cm: &ConfusionMatrix) -> Rate {
    cm.recall()
}

pub fn precision(cm: &ConfusionMatrix) -> Rate {
    cm.precision()
}

/// Counts plus reported rates, as written by `eval`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(flatten)]
    pub counts: ConfusionMatrix,
    pub recall: Rate,
    pub precision: Rate,
}

impl MetricsReport {
    pub fn new(counts: ConfusionMatrix, rounding: Rounding) -> Self {
        Self {
            counts,
            recall: counts.recall().reported(rounding),
            precision: counts.precision().reported(rounding),
        }
    }

    pub const CSV_HEADER: &'static str = "tp,fp,fn,tn,recall,precision";

    pub fn csv_row(&self) -> String {
        let c = &self.counts;
        format!(
            "{},{},{},{},{},{}",
            c.tp, c.fp, c.fn_, c.tn, self.recall, self.precision
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerfStats {
    pub frames_processed: u64,
    pub wall_ms: f64,
    pub ms_per_frame: f64,
    pub fps: f64,
}

pub fn throughput(frames_processed: u64, wall_ms: f64) -> Result<PerfStats, MetricsError> {
    if frames_processed == 0 {
        return Err(MetricsError::NoFrames);
    }
    if !(wall_ms.is_finite() && wall_ms > 0.0) {
        return Err(MetricsError::WallTime(wall_ms));
    }
    let ms_per_frame = wall_ms / frames_processed as f64;
    Ok(PerfStats {
        frames_processed,
        wall_ms,
        ms_per_frame,
        fps: 1000.0 / ms_per_frame,
    })
}

/// Published confusion counts with the percentages reported alongside them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCounts {
    pub name: String,
    pub description: String,
    #[serde(flatten)]
    pub counts: ConfusionMatrix,
    pub expected_recall: f64,
    pub expected_precision: f64,
}

const REFERENCE_COUNTS: [&str; 5] = [
    include_str!("../data/reference_counts/classifier.json"),
    include_str!("../data/reference_counts/umpire.json"),
    include_str!("../data/reference_counts/pitch.json"),
    include_str!("../data/reference_counts/either.json"),
    include_str!("../data/reference_counts/dual.json"),
];

/// Counts for the classifier, umpire, pitch, either and dual gates, in that order.
pub fn reference_counts() -> Vec<ReferenceCounts> {
    REFERENCE_COUNTS
        .iter()
        .map(|text| serde_json::from_str(text).expect("bundled reference counts are valid"))
        .collect()
}
