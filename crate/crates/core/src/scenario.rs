//! Scripted synthetic broadcasts.
//!
//! A script is a list of contiguous shots, each with a scene kind. Rendering
//! is deterministic from the script seed: every shot has its own base luma
//! level and noise texture, so consecutive shots differ everywhere except in
//! the live scorecard band. The [`SyntheticBackend`] answers from the script
//! itself, so scripted ground truth doubles as the test oracle.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detection::{AnnotateError, BBox, Backend, FrameAnnotations, ObjectLabel};
use crate::frame::{timestamp_ms, BandSpec, Frame, FrameError};
use crate::geometry::{self, DeliveryType, PitchSpec, RowCalibration};
use crate::replay::Liveness;

/// Base levels cycled through by consecutive shots.
const SHOT_LEVELS: [u8; 6] = [60, 180, 100, 220, 40, 160];
const TEXTURE_AMPLITUDE: i32 = 12;
const PAN_RANGE: u32 = 256;
const OBJECT_BOOST: u8 = 90;
const REPLAY_STRIP_PERIOD: usize = 4099;
const REPLAY_SCROLL_PX: usize = 3;
const REPLAY_AMPLITUDE: i32 = 60;
/// Frames of post-bounce rise drawn for a scripted delivery.
pub const RISE_FRAMES: u64 = 8;
const BALL_SIZE: f64 = 6.0;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario")]
    Io(#[from] std::io::Error),
    #[error("malformed scenario")]
    Json(#[from] serde_json::Error),
    #[error("invalid scenario {name:?}: {message}")]
    Invalid { name: String, message: String },
    #[error("no bundled scenario named {0:?}")]
    UnknownBundled(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SceneKind {
    /// Live front pitch view.
    Front,
    /// Any other camera.
    Other,
    /// Replayed front pitch view without the live scorecard.
    Replay,
}

impl SceneKind {
    pub fn is_front(self) -> bool {
        matches!(self, SceneKind::Front | SceneKind::Replay)
    }
}

/// In-shot motion that must not read as a cut.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Motion {
    /// Horizontal camera pan, pixels per frame.
    pub pan_px: f64,
    /// Area of the moving bright object as a share of the frame.
    pub object_frac: f64,
    pub object_speed_px: f64,
}

impl Default for Motion {
    fn default() -> Self {
        Self {
            pan_px: 1.0,
            object_frac: 0.08,
            object_speed_px: 2.0,
        }
    }
}

/// One bowled ball inside a front-view shot. Frame offsets are relative to
/// the shot start; pixel sizes refer to the release frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeliverySpec {
    pub release: u64,
    pub bounce: u64,
    /// Bounce distance from the batsman's stumps.
    pub distance_m: f64,
    /// Batsman box height at release.
    pub batsman_px: f64,
    /// Rows between batsman and bowler feet at release.
    pub pitch_px: f64,
    /// Batsman height at bounce over batsman height at release.
    pub zoom: f64,
    /// Row of the batsman's feet (fixed through the shot).
    pub batsman_row: f64,
    /// Add low-confidence ball detections far from the real ball.
    #[serde(default)]
    pub decoys: bool,
}

impl DeliverySpec {
    pub fn expected_type(&self, pitch: &PitchSpec) -> Result<DeliveryType, geometry::GeometryError> {
        geometry::classify_delivery(self.distance_m, pitch)
    }

    fn batsman_height_at(&self, offset: u64) -> f64 {
        let s = if offset <= self.release {
            0.0
        } else if offset >= self.bounce {
            1.0
        } else {
            (offset - self.release) as f64 / (self.bounce - self.release) as f64
        };
        self.batsman_px * (1.0 + (self.zoom - 1.0) * s)
    }

    /// Row where the ball lands in the bounce frame.
    pub fn bounce_row(&self, tilt_deg: f64) -> Result<f64, geometry::GeometryError> {
        let calib = RowCalibration::from_pitch_height(self.batsman_row, self.zoom * self.pitch_px, tilt_deg);
        geometry::distance_to_row(self.distance_m, &calib, &PitchSpec::default())
    }

    /// Ball centre row at `offset`, if the ball is in play.
    pub fn ball_row(&self, offset: u64, tilt_deg: f64) -> Option<f64> {
        if offset < self.release || offset > self.bounce + RISE_FRAMES {
            return None;
        }
        let rb = self.bounce_row(tilt_deg).ok()?;
        let bowler_row = self.batsman_row - self.pitch_px;
        let r0 = bowler_row.min(rb) - 12.0;
        let n = (self.bounce - self.release) as f64;
        let step = (rb - r0) / n;
        Some(if offset <= self.bounce {
            r0 + step * (offset - self.release) as f64
        } else {
            rb - 0.6 * step * (offset - self.bounce) as f64
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShotSpec {
    pub start: u64,
    /// Inclusive.
    pub end: u64,
    pub scene: SceneKind,
    #[serde(default)]
    pub motion: Motion,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delivery: Option<DeliverySpec>,
}

impl ShotSpec {
    pub fn len(&self) -> u64 {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioScript {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub width: u32,
    pub height: u32,
    pub fps: f64,
    pub seed: u64,
    pub segments: Vec<ShotSpec>,
}

/// Scripted truth for one frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub is_front: bool,
    pub scene: SceneKind,
    pub live: bool,
}

/// A clip the segmenter should emit for a front or replay shot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedClip {
    pub start: u64,
    pub end: u64,
    pub liveness: Liveness,
}

#[derive(Debug)]
pub struct Scenario {
    script: ScenarioScript,
    band: BandSpec,
    tilt_deg: f64,
    replay_strip: Vec<u8>,
    band_rows: (u32, u32),
}

impl Scenario {
    pub fn new(script: ScenarioScript) -> Result<Self, ScenarioError> {
        let tilt_deg = PitchSpec::default().tilt_deg;
        validate(&script, tilt_deg)?;
        let band = BandSpec::default();
        let band_rows = band.rows(script.height);
        let strip_rows = (band_rows.1 - band_rows.0) as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(script.seed ^ 0x5EED_BA4D);
        let replay_strip = (0..strip_rows * REPLAY_STRIP_PERIOD)
            .map(|_| (128 + rng.random_range(-REPLAY_AMPLITUDE..=REPLAY_AMPLITUDE)) as u8)
            .collect();
        Ok(Self {
            script,
            band,
            tilt_deg,
            replay_strip,
            band_rows,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        Self::new(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn script(&self) -> &ScenarioScript {
        &self.script
    }

    pub fn name(&self) -> &str {
        &self.script.name
    }

    pub fn len(&self) -> u64 {
        self.script.segments.last().map_or(0, |s| s.end + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn width(&self) -> u32 {
        self.script.width
    }

    pub fn height(&self) -> u32 {
        self.script.height
    }

    pub fn fps(&self) -> f64 {
        self.script.fps
    }

    pub fn band(&self) -> BandSpec {
        self.band
    }

    fn shot_at(&self, index: u64) -> Option<(usize, &ShotSpec)> {
        let segs = &self.script.segments;
        let i = segs.partition_point(|s| s.end < index);
        segs.get(i).filter(|s| s.start <= index).map(|s| (i, s))
    }

    pub fn ground_truth(&self, index: u64) -> Option<GroundTruth> {
        let (_, s) = self.shot_at(index)?;
        Some(GroundTruth {
            is_front: s.scene.is_front(),
            scene: s.scene,
            live: s.scene != SceneKind::Replay,
        })
    }

    /// First frames of every shot after the first.
    pub fn cuts(&self) -> Vec<u64> {
        self.script.segments.iter().skip(1).map(|s| s.start).collect()
    }

    /// One clip per front or replay shot of at least `min_len` frames.
    pub fn expected_clips(&self, min_len: u64) -> Vec<ExpectedClip> {
        self.script
            .segments
            .iter()
            .filter(|s| s.scene.is_front() && s.len() >= min_len)
            .map(|s| ExpectedClip {
                start: s.start,
                end: s.end,
                liveness: if s.scene == SceneKind::Replay {
                    Liveness::Replay
                } else {
                    Liveness::Live
                },
            })
            .collect()
    }

    /// Front-view shots carrying a scripted delivery, with their start frame.
    pub fn deliveries(&self) -> impl Iterator<Item = (u64, &DeliverySpec)> {
        self.script
            .segments
            .iter()
            .filter_map(|s| s.delivery.as_ref().map(|d| (s.start, d)))
    }

    /// Annotations the synthetic detectors report for frame `index`.
    pub fn annotations(&self, index: u64) -> Option<FrameAnnotations> {
        let (_, shot) = self.shot_at(index)?;
        let (w, h) = (self.script.width as f64, self.script.height as f64);
        if !shot.scene.is_front() {
            return Some(FrameAnnotations::new(index, 0.0));
        }
        let mut ann = FrameAnnotations::new(index, 1.0)
            .with(
                ObjectLabel::Pitch,
                BBox::new(0.42 * w, 0.30 * h, 0.16 * w, 0.50 * h),
                0.9,
            )
            .with(
                ObjectLabel::Umpire,
                BBox::new(0.30 * w, 0.35 * h, 0.05 * w, 0.20 * h),
                0.9,
            );
        if let Some(d) = &shot.delivery {
            let offset = index - shot.start;
            let bh = d.batsman_height_at(offset);
            ann = ann.with(
                ObjectLabel::Batsman,
                BBox::new(0.5 * w - 0.2 * bh, d.batsman_row - bh, 0.4 * bh, bh),
                0.95,
            );
            if offset <= d.release {
                let ph = 0.9 * d.batsman_px;
                ann = ann.with(
                    ObjectLabel::Bowler,
                    BBox::new(0.44 * w, d.batsman_row - d.pitch_px - ph, 0.4 * ph, ph),
                    0.85,
                );
            }
            if let Some(row) = d.ball_row(offset, self.tilt_deg) {
                let n = (d.bounce + RISE_FRAMES - d.release) as f64;
                let col = w * (0.46 + 0.04 * (offset - d.release) as f64 / n);
                let half = BALL_SIZE / 2.0;
                ann = ann.with(
                    ObjectLabel::Ball,
                    BBox::new(col - half, row - half, BALL_SIZE, BALL_SIZE),
                    0.8,
                );
                if d.decoys && offset > d.release {
                    ann = ann.with(
                        ObjectLabel::Ball,
                        BBox::new(0.08 * w, 0.12 * h + (offset % 5) as f64, BALL_SIZE, BALL_SIZE),
                        0.3,
                    );
                }
            }
        }
        Some(ann)
    }

    /// Render one frame on its own.
    pub fn render(&self, index: u64) -> Option<Frame> {
        let (i, shot) = self.shot_at(index)?;
        let texture = ShotTexture::new(&self.script, i);
        Some(self.render_with(&texture, shot, index))
    }

    /// All frames in order.
    pub fn frames(&self) -> ScenarioFrames<'_> {
        ScenarioFrames {
            scenario: self,
            next: 0,
            texture: None,
        }
    }

    fn render_with(&self, tex: &ShotTexture, shot: &ShotSpec, index: u64) -> Frame {
        let (w, h) = (self.script.width as usize, self.script.height as usize);
        let mut luma = vec![0u8; w * h];
        let j = (index - shot.start) as f64;
        let m = &shot.motion;

        let period = 2.0 * PAN_RANGE as f64;
        let phase = (j * m.pan_px).rem_euclid(period);
        let pan = if phase <= PAN_RANGE as f64 {
            phase
        } else {
            period - phase
        } as usize;
        let (b0, b1) = (self.band_rows.0 as usize, self.band_rows.1 as usize);
        for y in 0..b0 {
            let src = &tex.pixels[y * tex.width + pan..y * tex.width + pan + w];
            luma[y * w..(y + 1) * w].copy_from_slice(src);
        }

        if m.object_frac > 0.0 {
            let ow = ((w as f64 * 0.25).round() as usize).clamp(1, w);
            let oh = ((m.object_frac * (w * h) as f64 / ow as f64).round() as usize).clamp(1, b0.max(1));
            let y0 = (b0.saturating_sub(oh)) / 2;
            let travel = (w - ow).max(1) as f64;
            let p = (j * m.object_speed_px).rem_euclid(2.0 * travel);
            let x0 = if p <= travel { p } else { 2.0 * travel - p } as usize;
            for y in y0..(y0 + oh).min(b0) {
                for v in &mut luma[y * w + x0..y * w + x0 + ow] {
                    *v = v.saturating_add(OBJECT_BOOST);
                }
            }
        }

        let band_h = b1 - b0;
        if shot.scene == SceneKind::Replay {
            let start = (index as usize * REPLAY_SCROLL_PX) % REPLAY_STRIP_PERIOD;
            for r in 0..band_h {
                let strip = &self.replay_strip[r * REPLAY_STRIP_PERIOD..(r + 1) * REPLAY_STRIP_PERIOD];
                let row = &mut luma[(b0 + r) * w..(b0 + r + 1) * w];
                for (x, v) in row.iter_mut().enumerate() {
                    *v = strip[(start + x) % REPLAY_STRIP_PERIOD];
                }
            }
        } else {
            for r in 0..band_h {
                let row = &mut luma[(b0 + r) * w..(b0 + r + 1) * w];
                for (x, v) in row.iter_mut().enumerate() {
                    *v = scorecard(x, r);
                }
            }
        }
        Frame::new(index, timestamp_ms(index, self.script.fps), w as u32, h as u32, luma)
            .expect("dimensions match the script")
    }
}

/// Static overlay pattern of live coverage.
fn scorecard(x: usize, r: usize) -> u8 {
    if r < 2 {
        20
    } else {
        30 + ((x / 8 + r / 6) % 5) as u8 * 40
    }
}

struct ShotTexture {
    shot: usize,
    width: usize,
    pixels: Vec<u8>,
}

impl ShotTexture {
    fn new(script: &ScenarioScript, shot: usize) -> Self {
        let width = (script.width + PAN_RANGE) as usize;
        let base = SHOT_LEVELS[shot % SHOT_LEVELS.len()] as i32;
        let mut rng = ChaCha8Rng::seed_from_u64(
            script
                .seed
                .wrapping_add((shot as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        );
        let pixels = (0..width * script.height as usize)
            .map(|_| (base + rng.random_range(-TEXTURE_AMPLITUDE..=TEXTURE_AMPLITUDE)) as u8)
            .collect();
        Self { shot, width, pixels }
    }
}

/// Sequential renderer; reuses each shot's texture across its frames.
pub struct ScenarioFrames<'a> {
    scenario: &'a Scenario,
    next: u64,
    texture: Option<ShotTexture>,
}

impl Iterator for ScenarioFrames<'_> {
    type Item = Result<Frame, FrameError>;

    fn next(&mut self) -> Option<Self::Item> {
        let (i, shot) = self.scenario.shot_at(self.next)?;
        if self.texture.as_ref().is_none_or(|t| t.shot != i) {
            self.texture = Some(ShotTexture::new(&self.scenario.script, i));
        }
        let frame = self
            .scenario
            .render_with(self.texture.as_ref().expect("texture"), shot, self.next);
        self.next += 1;
        Some(Ok(frame))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.scenario.len() - self.next) as usize;
        (left, Some(left))
    }
}

fn validate(s: &ScenarioScript, tilt_deg: f64) -> Result<(), ScenarioError> {
    let fail = |message: String| {
        Err(ScenarioError::Invalid {
            name: s.name.clone(),
            message,
        })
    };
    if s.width < 16 || s.height < 16 {
        return fail(format!("frame size {}x{} is below 16x16", s.width, s.height));
    }
    if !(s.fps.is_finite() && s.fps > 0.0) {
        return fail(format!("fps {} must be positive", s.fps));
    }
    if s.segments.is_empty() {
        return fail("no segments".into());
    }
    let mut expected_start = 0;
    for (i, seg) in s.segments.iter().enumerate() {
        if seg.start != expected_start {
            return fail(format!(
                "segment {i} starts at {} but must start at {expected_start}; segments must tile the timeline without gaps or overlaps",
                seg.start
            ));
        }
        if seg.end < seg.start {
            return fail(format!(
                "segment {i} ends at {} before its start {}",
                seg.end, seg.start
            ));
        }
        let m = &seg.motion;
        if !(m.pan_px.is_finite() && m.pan_px >= 0.0)
            || !(0.0..=0.5).contains(&m.object_frac)
            || !(m.object_speed_px.is_finite() && m.object_speed_px >= 0.0)
        {
            return fail(format!("segment {i} has invalid motion {m:?}"));
        }
        if let Some(d) = &seg.delivery {
            if seg.scene != SceneKind::Front {
                return fail(format!("segment {i}: deliveries belong to front shots"));
            }
            if d.release >= d.bounce || d.bounce + 2 > seg.len() - 1 {
                return fail(format!(
                    "segment {i}: need release < bounce and two frames after the bounce inside the shot"
                ));
            }
            if !(d.batsman_px > 0.0 && d.pitch_px > 0.0 && d.zoom > 0.0) {
                return fail(format!("segment {i}: delivery sizes must be positive"));
            }
            if let Err(e) = d.bounce_row(tilt_deg) {
                return fail(format!("segment {i}: {e}"));
            }
        }
        expected_start = seg.end + 1;
    }
    // Every box must fit the frame.
    let probe = Scenario {
        script: s.clone(),
        band: BandSpec::default(),
        tilt_deg,
        replay_strip: Vec::new(),
        band_rows: (0, 0),
    };
    for (start, d) in probe.deliveries() {
        for off in 0..=d.bounce + RISE_FRAMES {
            let Some(ann) = probe.annotations(start + off) else {
                break;
            };
            if let Some(bad) = ann.detections.iter().find(|x| !x.bbox.fits_within(s.width, s.height)) {
                return fail(format!(
                    "frame {}: {} box {:?} leaves the frame",
                    start + off,
                    bad.label,
                    <[f64; 4]>::from(bad.bbox)
                ));
            }
        }
    }
    Ok(())
}

/// Backend that reads annotations straight from a scenario.
#[derive(Clone, Debug)]
pub struct SyntheticBackend {
    scenario: Arc<Scenario>,
    fail_on: BTreeSet<u64>,
}

impl SyntheticBackend {
    pub fn new(scenario: Arc<Scenario>) -> Self {
        Self {
            scenario,
            fail_on: BTreeSet::new(),
        }
    }

    /// Make `annotate` fail on the given frames.
    pub fn failing_on(mut self, frames: impl IntoIterator<Item = u64>) -> Self {
        self.fail_on.extend(frames);
        self
    }

    pub fn scenario(&self) -> &Arc<Scenario> {
        &self.scenario
    }
}

impl Backend for SyntheticBackend {
    fn name(&self) -> &'static str {
        "synthetic"
    }

    fn annotate(&self, frame: &Frame) -> Result<FrameAnnotations, AnnotateError> {
        let index = frame.index();
        let err = |message: String| AnnotateError {
            frame_index: index,
            backend: "synthetic",
            message,
        };
        if self.fail_on.contains(&index) {
            return Err(err("injected failure".into()));
        }
        self.scenario.annotations(index).ok_or_else(|| {
            err(format!(
                "frame is past the end of scenario {:?} ({} frames)",
                self.scenario.name(),
                self.scenario.len()
            ))
        })
    }
}

const BUNDLED: &[(&str, &str)] = &[
    ("one_delivery", include_str!("../scenarios/one_delivery.json")),
    (
        "delivery_plus_replay",
        include_str!("../scenarios/delivery_plus_replay.json"),
    ),
    ("three_lengths", include_str!("../scenarios/three_lengths.json")),
    ("no_ball", include_str!("../scenarios/no_ball.json")),
    ("match", include_str!("../scenarios/match.json")),
];

/// Names of the scenarios shipped with the crate.
pub fn bundled_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|(n, _)| *n).collect()
}

pub fn bundled_script(name: &str) -> Result<ScenarioScript, ScenarioError> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| ScenarioError::UnknownBundled(name.to_string()))?;
    Ok(serde_json::from_str(text)?)
}

pub fn bundled(name: &str) -> Result<Scenario, ScenarioError> {
    Scenario::new(bundled_script(name)?)
}

/// Script with random shot lengths, scenes and sub-threshold motion.
///
/// Shots are long enough for the background model to warm up before the
/// next cut.
pub fn random_cut_script(seed: u64, width: u32, height: u32, shots: usize) -> ScenarioScript {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut segments = Vec::with_capacity(shots);
    let mut start = 0;
    for _ in 0..shots {
        let len = rng.random_range(40..=120);
        let scene = match rng.random_range(0..3) {
            0 => SceneKind::Front,
            1 => SceneKind::Other,
            _ => SceneKind::Replay,
        };
        let motion = Motion {
            pan_px: rng.random_range(0.0..4.0),
            object_frac: rng.random_range(0.0..0.2),
            object_speed_px: rng.random_range(0.0..4.0),
        };
        segments.push(ShotSpec {
            start,
            end: start + len - 1,
            scene,
            motion,
            delivery: None,
        });
        start += len;
    }
    ScenarioScript {
        name: format!("cuts-{seed}"),
        description: "random hard cuts".into(),
        width,
        height,
        fps: 25.0,
        seed,
        segments,
    }
}

/// Script of `clips` front-view shots alternating live and replay at random,
/// separated by other-camera shots.
pub fn liveness_script(seed: u64, width: u32, height: u32, clips: usize) -> ScenarioScript {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut segments = Vec::new();
    let mut start = 0;
    let mut push = |len: u64, scene: SceneKind, start: &mut u64| {
        segments.push(ShotSpec {
            start: *start,
            end: *start + len - 1,
            scene,
            motion: Motion::default(),
            delivery: None,
        });
        *start += len;
    };
    for _ in 0..clips {
        push(rng.random_range(30..=45), SceneKind::Other, &mut start);
        let scene = if rng.random_bool(0.5) {
            SceneKind::Front
        } else {
            SceneKind::Replay
        };
        push(rng.random_range(30..=70), scene, &mut start);
    }
    push(30, SceneKind::Other, &mut start);
    ScenarioScript {
        name: format!("liveness-{seed}"),
        description: "live and replay clips".into(),
        width,
        height,
        fps: 25.0,
        seed,
        segments,
    }
}

/// Bounce distances of the 214-delivery corpus: 80 full, 85 good and 49 short,
/// drawn away from the category edges.
pub fn delivery_corpus(seed: u64) -> Vec<DeliverySpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bands: [(usize, f64, f64); 3] = [(80, 1.3, 5.9), (85, 6.05, 7.95), (49, 8.05, 16.0)];
    let mut out = Vec::with_capacity(214);
    for (count, lo, hi) in bands {
        for _ in 0..count {
            let release = rng.random_range(5..=12);
            out.push(DeliverySpec {
                release,
                bounce: release + rng.random_range(10..=16),
                distance_m: rng.random_range(lo..=hi),
                batsman_px: rng.random_range(50.0..=70.0),
                pitch_px: 180.0,
                zoom: rng.random_range(1.0..=1.4),
                batsman_row: 320.0,
                decoys: rng.random_bool(0.3),
            });
        }
    }
    out
}

/// Single front-view shot around one delivery on a 640x360 frame.
pub fn delivery_script(delivery: DeliverySpec, seed: u64) -> ScenarioScript {
    let len = delivery.bounce + RISE_FRAMES + 10;
    ScenarioScript {
        name: format!("delivery-{seed}"),
        description: String::new(),
        width: 640,
        height: 360,
        fps: 25.0,
        seed,
        segments: vec![ShotSpec {
            start: 0,
            end: len - 1,
            scene: SceneKind::Front,
            motion: Motion::default(),
            delivery: Some(delivery),
        }],
    }
}
