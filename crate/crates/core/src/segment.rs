//! Shot boundaries and delivery clips.
//!
//! A per-pixel running-average background model flags pixels that moved away
//! from the background by more than a luma threshold. When the flagged share
//! of a frame exceeds the foreground threshold the shot has changed. The
//! [`Segmenter`] combines these boundaries with debounced front-view gate
//! events: a clip opens with a confirmed run of front-view frames and closes at
//! the next boundary, at a confirmed run of non-front frames, or at the end of
//! the stream.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detection::{AnnotateError, FrameAnnotations};
use crate::frame::Frame;
use crate::gate::{self, Debouncer, Evidence, GateConfig, GateError, GateEvent, GateVerdict, Strategy};
use crate::replay::{self, Liveness, ReplayConfig, ReplayError};

#[derive(Debug, Error)]
pub enum SegmentError {
    #[error("frame is {got_w}x{got_h} but the background model is {want_w}x{want_h}")]
    DimensionMismatch {
        want_w: u32,
        want_h: u32,
        got_w: u32,
        got_h: u32,
    },
    #[error("frame {got} arrived after frame {last}; frames must be in increasing order")]
    OutOfOrder { last: u64, got: u64 },
    #[error("invalid boundary config: {0}")]
    Config(String),
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConfig {
    /// Share of foreground pixels above which a shot change is declared.
    pub foreground_threshold: f64,
    /// Observations before the model is trusted.
    pub init_frames: u32,
    /// Absolute luma deviation that makes a pixel foreground.
    pub pixel_threshold: f32,
    pub learning_rate: f32,
    /// Shorter clips are dropped.
    pub min_clip_frames: u64,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        Self {
            foreground_threshold: 0.6,
            init_frames: 30,
            pixel_threshold: 25.0,
            learning_rate: 0.05,
            min_clip_frames: 25,
        }
    }
}

impl BoundaryConfig {
    pub fn validate(&self) -> Result<(), SegmentError> {
        let err = |m: String| Err(SegmentError::Config(m));
        if !(self.foreground_threshold > 0.0 && self.foreground_threshold <= 1.0) {
            return err(format!(
                "foreground_threshold {} must lie in (0, 1]",
                self.foreground_threshold
            ));
        }
        if self.init_frames == 0 {
            return err("init_frames must be at least 1".into());
        }
        if self.pixel_threshold.is_nan() || self.pixel_threshold < 0.0 {
            return err(format!("pixel_threshold {} must be non-negative", self.pixel_threshold));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return err(format!("learning_rate {} must lie in (0, 1]", self.learning_rate));
        }
        Ok(())
    }
}

/// Per-pixel foreground flags of one frame.
#[derive(Clone, Debug, PartialEq)]
pub struct ForegroundMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl ForegroundMask {
    pub fn new(width: u32, height: u32, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), width as usize * height as usize);
        Self { width, height, bits }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

pub fn foreground_fraction(mask: &ForegroundMask) -> f64 {
    if mask.bits.is_empty() {
        return 0.0;
    }
    mask.bits.iter().filter(|&&b| b).count() as f64 / mask.bits.len() as f64
}

pub fn detect_boundary(fraction: f64, warm: bool, cfg: &BoundaryConfig) -> bool {
    warm && fraction > cfg.foreground_threshold
}

/// Running-average background over the luma plane.
///
/// During warm-up the estimate is the plain mean of the frames seen so far;
/// afterwards it moves toward each frame by `learning_rate`.
#[derive(Clone, Debug)]
pub struct BackgroundModel {
    width: u32,
    height: u32,
    mean: Vec<f32>,
    observed: u32,
    init_frames: u32,
    learning_rate: f32,
    pixel_threshold: f32,
}

impl BackgroundModel {
    pub fn new(width: u32, height: u32, cfg: &BoundaryConfig) -> Self {
        Self {
            width,
            height,
            mean: vec![0.0; width as usize * height as usize],
            observed: 0,
            init_frames: cfg.init_frames,
            learning_rate: cfg.learning_rate,
            pixel_threshold: cfg.pixel_threshold,
        }
    }

    pub fn is_warm(&self) -> bool {
        self.observed >= self.init_frames
    }

    pub fn reset(&mut self) {
        self.observed = 0;
    }

    fn check(&self, frame: &Frame) -> Result<(), SegmentError> {
        if (frame.width(), frame.height()) != (self.width, self.height) {
            return Err(SegmentError::DimensionMismatch {
                want_w: self.width,
                want_h: self.height,
                got_w: frame.width(),
                got_h: frame.height(),
            });
        }
        Ok(())
    }

    /// Observe `frame` and return its foreground mask (all false while cold).
    pub fn update(&mut self, frame: &Frame) -> Result<ForegroundMask, SegmentError> {
        self.check(frame)?;
        let mut bits = vec![false; self.mean.len()];
        self.observe(frame, Some(&mut bits));
        Ok(ForegroundMask::new(self.width, self.height, bits))
    }

    /// Observe `frame` and return only its foreground fraction.
    pub fn update_fraction(&mut self, frame: &Frame) -> Result<f64, SegmentError> {
        self.check(frame)?;
        let count = self.observe(frame, None);
        Ok(count as f64 / self.mean.len() as f64)
    }

    fn observe(&mut self, frame: &Frame, mut bits: Option<&mut [bool]>) -> usize {
        let luma = frame.luma();
        if !self.is_warm() {
            if self.observed == 0 {
                for (m, &p) in self.mean.iter_mut().zip(luma) {
                    *m = p as f32;
                }
            } else {
                let w = 1.0 / (self.observed as f32 + 1.0);
                for (m, &p) in self.mean.iter_mut().zip(luma) {
                    *m += (p as f32 - *m) * w;
                }
            }
            self.observed += 1;
            return 0;
        }
        let (lr, thr) = (self.learning_rate, self.pixel_threshold);
        let mut count = 0usize;
        match bits.as_mut() {
            Some(bits) => {
                for ((m, &p), b) in self.mean.iter_mut().zip(luma).zip(bits.iter_mut()) {
                    let d = p as f32 - *m;
                    *b = d.abs() > thr;
                    count += *b as usize;
                    *m += d * lr;
                }
            }
            None => {
                for (m, &p) in self.mean.iter_mut().zip(luma) {
                    let d = p as f32 - *m;
                    count += (d.abs() > thr) as usize;
                    *m += d * lr;
                }
            }
        }
        self.observed = self.observed.saturating_add(1);
        count
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CloseReason {
    Boundary,
    GateClose,
    EndOfStream,
}

/// What the gate saw over a clip.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClipEvidence {
    pub strategy: Strategy,
    pub front_frames: u64,
    pub classifier: u64,
    pub umpire: u64,
    pub pitch: u64,
    pub closed_by: CloseReason,
    pub band_diff: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clip {
    pub id: u64,
    pub start: u64,
    /// Inclusive.
    pub end: u64,
    pub duration_ms: f64,
    pub liveness: Liveness,
    pub evidence: ClipEvidence,
}

impl Clip {
    pub fn len(&self) -> u64 {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, frame: u64) -> bool {
        (self.start..=self.end).contains(&frame)
    }
}

pub fn clip_duration_ms(start: u64, end: u64, fps: f64) -> f64 {
    (end - start + 1) as f64 * 1000.0 / fps
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmenterConfig {
    pub strategy: Strategy,
    pub gate: GateConfig,
    pub debounce_k: u32,
    pub boundary: BoundaryConfig,
    pub replay: ReplayConfig,
    pub fps: f64,
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Dual,
            gate: GateConfig::default(),
            debounce_k: 3,
            boundary: BoundaryConfig::default(),
            replay: ReplayConfig::default(),
            fps: 25.0,
        }
    }
}

impl SegmenterConfig {
    pub fn validate(&self) -> Result<(), SegmentError> {
        self.gate.validate()?;
        if self.debounce_k == 0 {
            return Err(GateError::ZeroDebounce.into());
        }
        self.boundary.validate()?;
        self.replay.validate()?;
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(SegmentError::Config(format!("fps {} must be positive", self.fps)));
        }
        Ok(())
    }
}

#[derive(Debug)]
pub enum SegmentEvent {
    /// Shot change detected at this frame (the first frame of the new shot).
    Boundary {
        frame: u64,
        fraction: f64,
    },
    Clip(Clip),
    /// Closed clip shorter than `min_clip_frames`.
    Discarded {
        start: u64,
        end: u64,
    },
    /// The backend failed; any open clip was abandoned.
    BackendError(AnnotateError),
}

struct OpenClip {
    start: u64,
    first: Frame,
    /// Most recent frame inside the clip.
    latest: Frame,
    /// Most recent front-view frame.
    last_front: Frame,
    /// Every frame of the clip, kept only in strict replay mode.
    all: Vec<Frame>,
    evidence: Vec<(u64, GateVerdict)>,
}

/// Frame-ordered state machine from (frame, annotations) pairs to clips.
pub struct Segmenter {
    cfg: SegmenterConfig,
    background: Option<BackgroundModel>,
    debouncer: Debouncer,
    /// Frames of the current front run while the gate is still closed.
    pending: Vec<(Frame, GateVerdict)>,
    open: Option<OpenClip>,
    last_index: Option<u64>,
    next_id: u64,
    last_verdict: Option<GateVerdict>,
}

impl Segmenter {
    pub fn new(cfg: SegmenterConfig) -> Result<Self, SegmentError> {
        cfg.validate()?;
        let debouncer = Debouncer::new(cfg.debounce_k)?;
        Ok(Self {
            cfg,
            background: None,
            debouncer,
            pending: Vec::new(),
            open: None,
            last_index: None,
            next_id: 0,
            last_verdict: None,
        })
    }

    pub fn config(&self) -> &SegmenterConfig {
        &self.cfg
    }

    /// Gate verdict of the most recent successfully annotated frame.
    pub fn last_verdict(&self) -> Option<GateVerdict> {
        self.last_verdict
    }

    pub fn push(
        &mut self,
        frame: Frame,
        annotations: Result<FrameAnnotations, AnnotateError>,
    ) -> Result<Vec<SegmentEvent>, SegmentError> {
        let idx = frame.index();
        if let Some(last) = self.last_index {
            if idx <= last {
                return Err(SegmentError::OutOfOrder { last, got: idx });
            }
        }
        self.last_index = Some(idx);
        self.last_verdict = None;
        let mut events = Vec::new();

        let bg = self
            .background
            .get_or_insert_with(|| BackgroundModel::new(frame.width(), frame.height(), &self.cfg.boundary));
        let warm = bg.is_warm();
        let fraction = bg.update_fraction(&frame)?;
        if detect_boundary(fraction, warm, &self.cfg.boundary) {
            bg.reset();
            bg.update_fraction(&frame)?;
            events.push(SegmentEvent::Boundary { frame: idx, fraction });
            if let Some(open) = self.open.take() {
                let end = open.latest.clone();
                self.close(open, end, CloseReason::Boundary, &mut events)?;
            }
            self.debouncer.reset();
            self.pending.clear();
        }

        let ann = match annotations {
            Ok(a) => a,
            Err(e) => {
                self.open = None;
                self.pending.clear();
                self.debouncer.reset();
                events.push(SegmentEvent::BackendError(e));
                return Ok(events);
            }
        };
        let verdict = gate::evaluate(self.cfg.strategy, &ann, &self.cfg.gate);
        self.last_verdict = Some(verdict);
        let event = self.debouncer.push(idx, verdict.is_front);

        match self.open.as_mut() {
            None => {
                if verdict.is_front {
                    self.pending.push((frame, verdict));
                } else {
                    self.pending.clear();
                }
                if let Some(GateEvent::Open { run_start, .. }) = event {
                    let pending = std::mem::take(&mut self.pending);
                    debug_assert_eq!(pending[0].0.index(), run_start);
                    let (first, _) = pending[0].clone();
                    let (latest, _) = pending.last().cloned().expect("non-empty run");
                    let strict = self.cfg.replay.strict;
                    self.open = Some(OpenClip {
                        start: run_start,
                        first,
                        last_front: latest.clone(),
                        latest,
                        all: if strict {
                            pending.iter().map(|(f, _)| f.clone()).collect()
                        } else {
                            Vec::new()
                        },
                        evidence: pending.iter().map(|(f, v)| (f.index(), *v)).collect(),
                    });
                }
            }
            Some(open) => {
                if verdict.is_front {
                    open.last_front = frame.clone();
                }
                open.evidence.push((idx, verdict));
                if self.cfg.replay.strict {
                    open.all.push(frame.clone());
                }
                open.latest = frame;
                if let Some(GateEvent::Close { .. }) = event {
                    let open = self.open.take().expect("open clip");
                    let end = open.last_front.clone();
                    self.close(open, end, CloseReason::GateClose, &mut events)?;
                }
            }
        }
        Ok(events)
    }

    /// Close whatever is still open at the end of the stream.
    pub fn finish(&mut self) -> Result<Vec<SegmentEvent>, SegmentError> {
        let mut events = Vec::new();
        if let Some(open) = self.open.take() {
            let end = open.latest.clone();
            self.close(open, end, CloseReason::EndOfStream, &mut events)?;
        }
        self.pending.clear();
        Ok(events)
    }

    fn close(
        &mut self,
        mut open: OpenClip,
        last: Frame,
        reason: CloseReason,
        events: &mut Vec<SegmentEvent>,
    ) -> Result<(), SegmentError> {
        let end = last.index();
        let len = end - open.start + 1;
        if len < self.cfg.boundary.min_clip_frames {
            events.push(SegmentEvent::Discarded { start: open.start, end });
            return Ok(());
        }
        let frames = if self.cfg.replay.strict {
            open.all.retain(|f| f.index() <= end);
            open.all
        } else {
            vec![open.first, last]
        };
        let (liveness, band_diff) = replay::classify_liveness(len, &frames, &self.cfg.replay)?;
        let mut evidence = ClipEvidence {
            strategy: self.cfg.strategy,
            front_frames: 0,
            classifier: 0,
            umpire: 0,
            pitch: 0,
            closed_by: reason,
            band_diff,
        };
        for (_, v) in open.evidence.iter().filter(|(i, _)| *i <= end) {
            let Evidence {
                classifier,
                umpire,
                pitch,
            } = v.evidence;
            evidence.front_frames += v.is_front as u64;
            evidence.classifier += (classifier == Some(true)) as u64;
            evidence.umpire += (umpire == Some(true)) as u64;
            evidence.pitch += (pitch == Some(true)) as u64;
        }
        let clip = Clip {
            id: self.next_id,
            start: open.start,
            end,
            duration_ms: clip_duration_ms(open.start, end, self.cfg.fps),
            liveness,
            evidence,
        };
        self.next_id += 1;
        events.push(SegmentEvent::Clip(clip));
        Ok(())
    }
}
