//! Per-frame classifier scores and object detections, and the backends that
//! serve them.
//!
//! The pipeline never runs a network itself. Anything that can turn a frame
//! into [`FrameAnnotations`] implements [`Backend`]: a file of precomputed
//! records, the synthetic scenario backend, or an adapter around a live model.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::{CropSpec, Frame};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectLabel {
    Pitch,
    Umpire,
    Batsman,
    Bowler,
    Ball,
}

impl ObjectLabel {
    pub const ALL: [ObjectLabel; 5] = [
        ObjectLabel::Pitch,
        ObjectLabel::Umpire,
        ObjectLabel::Batsman,
        ObjectLabel::Bowler,
        ObjectLabel::Ball,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ObjectLabel::Pitch => "pitch",
            ObjectLabel::Umpire => "umpire",
            ObjectLabel::Batsman => "batsman",
            ObjectLabel::Bowler => "bowler",
            ObjectLabel::Ball => "ball",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.as_str() == s)
    }
}

impl fmt::Display for ObjectLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Axis-aligned box in pixels; `y` is the top edge, growing downward.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl From<[f64; 4]> for BBox {
    fn from([x, y, w, h]: [f64; 4]) -> Self {
        Self { x, y, w, h }
    }
}

impl From<BBox> for [f64; 4] {
    fn from(b: BBox) -> Self {
        [b.x, b.y, b.w, b.h]
    }
}

impl BBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    /// Row of the bottom edge.
    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    pub fn is_well_formed(&self) -> bool {
        [self.x, self.y, self.w, self.h].iter().all(|v| v.is_finite())
            && self.w > 0.0
            && self.h > 0.0
            && self.x >= 0.0
            && self.y >= 0.0
    }

    pub fn fits_within(&self, width: u32, height: u32) -> bool {
        const SLACK: f64 = 1e-6;
        self.is_well_formed() && self.x + self.w <= width as f64 + SLACK && self.y + self.h <= height as f64 + SLACK
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.w * s, self.h * s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub label: ObjectLabel,
    #[serde(rename = "box")]
    pub bbox: BBox,
    #[serde(rename = "conf")]
    pub confidence: f64,
}

impl Detection {
    pub fn new(label: ObjectLabel, bbox: BBox, confidence: f64) -> Self {
        Self {
            label,
            bbox,
            confidence,
        }
    }
}

/// Probability that the frame shows the front pitch view.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub front_prob: f64,
}

impl ClassScore {
    pub fn new(front_prob: f64) -> Option<Self> {
        (0.0..=1.0).contains(&front_prob).then_some(Self { front_prob })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameAnnotations {
    #[serde(rename = "frame")]
    pub frame_index: u64,
    #[serde(flatten)]
    pub score: ClassScore,
    pub detections: Vec<Detection>,
}

impl FrameAnnotations {
    pub fn new(frame_index: u64, front_prob: f64) -> Self {
        Self {
            frame_index,
            score: ClassScore { front_prob },
            detections: Vec::new(),
        }
    }

    pub fn with(mut self, label: ObjectLabel, bbox: BBox, confidence: f64) -> Self {
        self.detections.push(Detection::new(label, bbox, confidence));
        self
    }

    pub fn of_label(&self, label: ObjectLabel) -> impl Iterator<Item = &Detection> {
        self.detections.iter().filter(move |d| d.label == label)
    }

    /// Highest-confidence detection of `label`; the earliest wins a tie.
    pub fn best(&self, label: ObjectLabel) -> Option<&Detection> {
        self.of_label(label)
            .fold(None, |best: Option<&Detection>, d| match best {
                Some(b) if b.confidence >= d.confidence => Some(b),
                _ => Some(d),
            })
    }
}

#[derive(Debug, Error)]
#[error("{backend} backend failed on frame {frame_index}: {message}")]
pub struct AnnotateError {
    pub frame_index: u64,
    pub backend: &'static str,
    pub message: String,
}

/// Anything that can annotate a frame.
///
/// `annotate` may be called concurrently for distinct frames.
pub trait Backend: Send + Sync {
    fn name(&self) -> &'static str;

    fn annotate(&self, frame: &Frame) -> Result<FrameAnnotations, AnnotateError>;
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn name(&self) -> &'static str {
        (**self).name()
    }

    fn annotate(&self, frame: &Frame) -> Result<FrameAnnotations, AnnotateError> {
        (**self).annotate(frame)
    }
}

impl<B: Backend + ?Sized> Backend for std::sync::Arc<B> {
    fn name(&self) -> &'static str {
        (**self).name()
    }

    fn annotate(&self, frame: &Frame) -> Result<FrameAnnotations, AnnotateError> {
        (**self).annotate(frame)
    }
}

/// Coordinate space of stored ball boxes.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum BallSpace {
    #[default]
    Full,
    /// Ball boxes are relative to this crop of the full frame.
    Cropped(CropSpec),
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read annotation file")]
    Io(#[from] std::io::Error),
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: unknown label {label:?}")]
    UnknownLabel { line: usize, label: String },
    #[error("line {line}: confidence {value} outside [0, 1]")]
    Confidence { line: usize, value: f64 },
    #[error("line {line}: front_prob {value} outside [0, 1]")]
    FrontProb { line: usize, value: f64 },
    #[error("line {line}: box {bbox:?} must have non-negative origin and positive size")]
    InvalidBox { line: usize, bbox: [f64; 4] },
    #[error("line {line}: frame {frame} already has a record")]
    DuplicateFrame { line: usize, frame: u64 },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    frame: u64,
    front_prob: f64,
    #[serde(default)]
    detections: Vec<RawDetection>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDetection {
    label: String,
    #[serde(rename = "box")]
    bbox: [f64; 4],
    conf: f64,
}

/// Serves annotations stored as JSON Lines, one record per frame.
#[derive(Clone, Debug, Default)]
pub struct PrecomputedBackend {
    records: HashMap<u64, FrameAnnotations>,
    ball_space: BallSpace,
}

pub fn load_precomputed(path: impl AsRef<Path>) -> Result<PrecomputedBackend, LoadError> {
    let file = std::fs::File::open(path)?;
    PrecomputedBackend::from_reader(BufReader::new(file))
}

impl PrecomputedBackend {
    pub fn from_reader(reader: impl BufRead) -> Result<Self, LoadError> {
        let mut records = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let ann = parse_record(&line, line_no)?;
            let frame = ann.frame_index;
            if records.insert(frame, ann).is_some() {
                return Err(LoadError::DuplicateFrame { line: line_no, frame });
            }
        }
        Ok(Self {
            records,
            ball_space: BallSpace::Full,
        })
    }

    pub fn from_annotations(annotations: impl IntoIterator<Item = FrameAnnotations>) -> Self {
        Self {
            records: annotations.into_iter().map(|a| (a.frame_index, a)).collect(),
            ball_space: BallSpace::Full,
        }
    }

    pub fn with_ball_space(mut self, space: BallSpace) -> Self {
        self.ball_space = space;
        self
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

fn parse_record(line: &str, line_no: usize) -> Result<FrameAnnotations, LoadError> {
    let raw: RawRecord = serde_json::from_str(line).map_err(|e| LoadError::Malformed {
        line: line_no,
        message: e.to_string(),
    })?;
    if !(0.0..=1.0).contains(&raw.front_prob) {
        return Err(LoadError::FrontProb {
            line: line_no,
            value: raw.front_prob,
        });
    }
    let mut detections = Vec::with_capacity(raw.detections.len());
    for d in raw.detections {
        let label = ObjectLabel::parse(&d.label).ok_or_else(|| LoadError::UnknownLabel {
            line: line_no,
            label: d.label.clone(),
        })?;
        if !(0.0..=1.0).contains(&d.conf) {
            return Err(LoadError::Confidence {
                line: line_no,
                value: d.conf,
            });
        }
        let bbox = BBox::from(d.bbox);
        if !bbox.is_well_formed() {
            return Err(LoadError::InvalidBox {
                line: line_no,
                bbox: d.bbox,
            });
        }
        detections.push(Detection::new(label, bbox, d.conf));
    }
    Ok(FrameAnnotations {
        frame_index: raw.frame,
        score: ClassScore {
            front_prob: raw.front_prob,
        },
        detections,
    })
}

impl Backend for PrecomputedBackend {
    fn name(&self) -> &'static str {
        "file"
    }

    fn annotate(&self, frame: &Frame) -> Result<FrameAnnotations, AnnotateError> {
        let err = |message: String| AnnotateError {
            frame_index: frame.index(),
            backend: "file",
            message,
        };
        let mut ann = self
            .records
            .get(&frame.index())
            .cloned()
            .ok_or_else(|| err("no record for this frame".into()))?;
        if let BallSpace::Cropped(crop) = self.ball_space {
            let (x0, _) = crop.columns(frame.width());
            let (y0, _) = crop.rows(frame.height());
            for d in ann.detections.iter_mut().filter(|d| d.label == ObjectLabel::Ball) {
                d.bbox.x += x0 as f64;
                d.bbox.y += y0 as f64;
            }
        }
        if let Some(d) = ann
            .detections
            .iter()
            .find(|d| !d.bbox.fits_within(frame.width(), frame.height()))
        {
            return Err(err(format!(
                "{} box {:?} exceeds {}x{} frame",
                d.label,
                <[f64; 4]>::from(d.bbox),
                frame.width(),
                frame.height()
            )));
        }
        Ok(ann)
    }
}

/// Serialize one annotation record as a JSON line (no trailing newline).
pub fn to_json_line(ann: &FrameAnnotations) -> String {
    serde_json::to_string(ann).expect("annotations serialize")
}
