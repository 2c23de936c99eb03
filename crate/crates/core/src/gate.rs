//! Front pitch view decisions.
//!
//! Five independent strategies decide whether one frame shows the front pitch
//! view: the classifier score alone, an umpire detection, a pitch detection,
//! either detection, and the dual-stage combination of classifier and
//! detections. All threshold comparisons are inclusive.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detection::{ClassScore, FrameAnnotations, ObjectLabel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Classifier,
    Umpire,
    Pitch,
    Either,
    Dual,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Classifier,
        Strategy::Umpire,
        Strategy::Pitch,
        Strategy::Either,
        Strategy::Dual,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Classifier => "classifier",
            Strategy::Umpire => "umpire",
            Strategy::Pitch => "pitch",
            Strategy::Either => "either",
            Strategy::Dual => "dual",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = GateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| GateError::UnknownStrategy(s.to_string()))
    }
}

/// How the dual-stage gate combines its two halves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DualMode {
    #[default]
    Union,
    Intersection,
}

impl FromStr for DualMode {
    type Err = GateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "union" => Ok(DualMode::Union),
            "intersection" => Ok(DualMode::Intersection),
            other => Err(GateError::UnknownDualMode(other.to_string())),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GateError {
    #[error("{name} = {value} must lie in [0, 1]")]
    Threshold { name: &'static str, value: f64 },
    #[error("debounce length must be at least 1")]
    ZeroDebounce,
    #[error("unknown gate strategy {0:?} (expected classifier, umpire, pitch, either or dual)")]
    UnknownStrategy(String),
    #[error("unknown dual mode {0:?} (expected union or intersection)")]
    UnknownDualMode(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateConfig {
    pub classifier_threshold: f64,
    pub umpire_conf_min: f64,
    pub pitch_conf_min: f64,
    pub dual_mode: DualMode,
}

impl Default for GateConfig {
    fn default() -> Self {
        Self {
            classifier_threshold: 0.5,
            umpire_conf_min: 0.25,
            pitch_conf_min: 0.25,
            dual_mode: DualMode::Union,
        }
    }
}

impl GateConfig {
    pub fn validate(&self) -> Result<(), GateError> {
        for (name, value) in [
            ("classifier_threshold", self.classifier_threshold),
            ("umpire_conf_min", self.umpire_conf_min),
            ("pitch_conf_min", self.pitch_conf_min),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(GateError::Threshold { name, value });
            }
        }
        Ok(())
    }
}

/// Which signals fired. `None` means the strategy did not consult that signal.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub classifier: Option<bool>,
    pub umpire: Option<bool>,
    pub pitch: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateVerdict {
    pub strategy: Strategy,
    pub is_front: bool,
    pub evidence: Evidence,
}

fn detected(ann: &FrameAnnotations, label: ObjectLabel, min_conf: f64) -> bool {
    ann.of_label(label).any(|d| d.confidence >= min_conf)
}

pub fn gate_classifier(score: &ClassScore, cfg: &GateConfig) -> GateVerdict {
    let fired = score.front_prob >= cfg.classifier_threshold;
    GateVerdict {
        strategy: Strategy::Classifier,
        is_front: fired,
        evidence: Evidence {
            classifier: Some(fired),
            ..Evidence::default()
        },
    }
}

pub fn gate_umpire(ann: &FrameAnnotations, cfg: &GateConfig) -> GateVerdict {
    let fired = detected(ann, ObjectLabel::Umpire, cfg.umpire_conf_min);
    GateVerdict {
        strategy: Strategy::Umpire,
        is_front: fired,
        evidence: Evidence {
            umpire: Some(fired),
            ..Evidence::default()
        },
    }
}

pub fn gate_pitch(ann: &FrameAnnotations, cfg: &GateConfig) -> GateVerdict {
    let fired = detected(ann, ObjectLabel::Pitch, cfg.pitch_conf_min);
    GateVerdict {
        strategy: Strategy::Pitch,
        is_front: fired,
        evidence: Evidence {
            pitch: Some(fired),
            ..Evidence::default()
        },
    }
}

pub fn gate_either(ann: &FrameAnnotations, cfg: &GateConfig) -> GateVerdict {
    let umpire = detected(ann, ObjectLabel::Umpire, cfg.umpire_conf_min);
    let pitch = detected(ann, ObjectLabel::Pitch, cfg.pitch_conf_min);
    GateVerdict {
        strategy: Strategy::Either,
        is_front: umpire || pitch,
        evidence: Evidence {
            classifier: None,
            umpire: Some(umpire),
            pitch: Some(pitch),
        },
    }
}

/// Classifier and detector verdicts combined per `cfg.dual_mode`.
pub fn gate_dual(score: &ClassScore, ann: &FrameAnnotations, cfg: &GateConfig) -> GateVerdict {
    let classifier = gate_classifier(score, cfg).is_front;
    let objects = gate_either(ann, cfg);
    let is_front = match cfg.dual_mode {
        DualMode::Union => classifier || objects.is_front,
        DualMode::Intersection => classifier && objects.is_front,
    };
    GateVerdict {
        strategy: Strategy::Dual,
        is_front,
        evidence: Evidence {
            classifier: Some(classifier),
            ..objects.evidence
        },
    }
}

/// Run the chosen strategy on one frame's annotations.
pub fn evaluate(strategy: Strategy, ann: &FrameAnnotations, cfg: &GateConfig) -> GateVerdict {
    match strategy {
        Strategy::Classifier => gate_classifier(&ann.score, cfg),
        Strategy::Umpire => gate_umpire(ann, cfg),
        Strategy::Pitch => gate_pitch(ann, cfg),
        Strategy::Either => gate_either(ann, cfg),
        Strategy::Dual => gate_dual(&ann.score, ann, cfg),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateEvent {
    /// `k` consecutive front frames confirmed at `at`; the run began at `run_start`.
    Open { at: u64, run_start: u64 },
    /// `k` consecutive non-front frames confirmed at `at`; the run began at `run_start`.
    Close { at: u64, run_start: u64 },
}

/// Turns a per-frame verdict stream into open/close events, requiring `k`
/// consecutive agreeing frames before the gate changes state.
#[derive(Clone, Debug)]
pub struct Debouncer {
    k: u32,
    open: bool,
    run: u32,
    run_start: u64,
}

impl Debouncer {
    pub fn new(k: u32) -> Result<Self, GateError> {
        if k == 0 {
            return Err(GateError::ZeroDebounce);
        }
        Ok(Self {
            k,
            open: false,
            run: 0,
            run_start: 0,
        })
    }

    pub fn is_open(&self) -> bool {
        self.open
    }

    /// Forget all history; the gate starts closed again.
    pub fn reset(&mut self) {
        self.open = false;
        self.run = 0;
    }

    /// Feed the verdict for `frame`. Frames must arrive in order.
    pub fn push(&mut self, frame: u64, is_front: bool) -> Option<GateEvent> {
        if is_front == self.open {
            self.run = 0;
            return None;
        }
        if self.run == 0 {
            self.run_start = frame;
        }
        self.run += 1;
        if self.run < self.k {
            return None;
        }
        self.open = is_front;
        self.run = 0;
        Some(if is_front {
            GateEvent::Open {
                at: frame,
                run_start: self.run_start,
            }
        } else {
            GateEvent::Close {
                at: frame,
                run_start: self.run_start,
            }
        })
    }
}

/// Debounce a whole verdict sequence whose first element is frame 0.
pub fn debounce(verdicts: &[bool], k: u32) -> Result<Vec<GateEvent>, GateError> {
    let mut d = Debouncer::new(k)?;
    Ok(verdicts
        .iter()
        .enumerate()
        .filter_map(|(i, &v)| d.push(i as u64, v))
        .collect())
}
