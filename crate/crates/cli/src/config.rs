//! TOML pipeline configuration and its translation into core configs.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use cricshot_core::frame::{BandSpec, CropSpec, Frame, FrameError, SourceSpec};
use cricshot_core::scenario::{self, Scenario};
use cricshot_core::{
    open_source, Backend, BallSpace, BoundaryConfig, DualMode, GateConfig, PitchSpec, ReplayConfig, SegmenterConfig,
    Strategy, SyntheticBackend, TrackerConfig,
};

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub source: SourceSection,
    pub backend: BackendSection,
    pub gate: GateSection,
    pub boundary: BoundarySection,
    pub replay: ReplaySection,
    pub tracker: TrackerSection,
    pub pitch: PitchSection,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceSection {
    /// Image directory, scenario JSON, `scenario:<name>` or `raw:<W>x<H>:<path>`.
    pub path: Option<String>,
    pub fps: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendSection {
    /// `file` or `synthetic`.
    pub kind: Option<String>,
    /// Annotation JSONL for the file backend.
    pub annotations: Option<PathBuf>,
    /// Ball boxes are relative to the ball-detection crop.
    pub ball_crop: bool,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GateSection {
    pub strategy: String,
    pub dual_mode: String,
    pub debounce_k: u32,
    pub thresholds: Thresholds,
}

impl Default for GateSection {
    fn default() -> Self {
        Self {
            strategy: "dual".into(),
            dual_mode: "union".into(),
            debounce_k: 3,
            thresholds: Thresholds::default(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub classifier: f64,
    pub umpire: f64,
    pub pitch: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        let g = GateConfig::default();
        Self {
            classifier: g.classifier_threshold,
            umpire: g.umpire_conf_min,
            pitch: g.pitch_conf_min,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundarySection {
    pub foreground_threshold: f64,
    pub init_frames: u32,
    pub pixel_threshold: f32,
    pub learning_rate: f32,
    pub min_clip_frames: u64,
}

impl Default for BoundarySection {
    fn default() -> Self {
        let b = BoundaryConfig::default();
        Self {
            foreground_threshold: b.foreground_threshold,
            init_frames: b.init_frames,
            pixel_threshold: b.pixel_threshold,
            learning_rate: b.learning_rate,
            min_clip_frames: b.min_clip_frames,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReplaySection {
    pub band_fraction: f64,
    pub threshold: f64,
    pub strict: bool,
}

impl Default for ReplaySection {
    fn default() -> Self {
        let r = ReplayConfig::default();
        Self {
            band_fraction: r.band.band_fraction,
            threshold: r.mean_abs_diff_threshold,
            strict: r.strict,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerSection {
    /// Defaults to 120 px scaled to the frame width.
    pub max_jump_px: Option<f64>,
    pub max_gap_frames: u32,
}

impl Default for TrackerSection {
    fn default() -> Self {
        Self {
            max_jump_px: None,
            max_gap_frames: TrackerConfig::default().max_gap_frames,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PitchSection {
    pub tilt_deg: f64,
    pub full_max_m: f64,
    pub good_max_m: f64,
}

impl Default for PitchSection {
    fn default() -> Self {
        let p = PitchSpec::default();
        Self {
            tilt_deg: p.tilt_deg,
            full_max_m: p.full_max_m,
            good_max_m: p.good_max_m,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub source: Option<String>,
    pub backend: Option<String>,
    pub annotations: Option<PathBuf>,
    pub gate: Option<String>,
    pub fps: Option<f64>,
}

impl PipelineConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = &o.source {
            self.source.path = Some(s.clone());
        }
        if let Some(b) = &o.backend {
            self.backend.kind = Some(b.clone());
        }
        if let Some(a) = &o.annotations {
            self.backend.annotations = Some(a.clone());
        }
        if let Some(g) = &o.gate {
            self.gate.strategy = g.clone();
        }
        if let Some(f) = o.fps {
            self.source.fps = Some(f);
        }
    }

    pub fn segmenter(&self, fps: f64) -> Result<SegmenterConfig> {
        let strategy: Strategy = self.gate.strategy.parse()?;
        let dual_mode: DualMode = self.gate.dual_mode.parse()?;
        let band = BandSpec::new(self.replay.band_fraction).context("replay.band_fraction")?;
        let b = &self.boundary;
        let cfg = SegmenterConfig {
            strategy,
            gate: GateConfig {
                classifier_threshold: self.gate.thresholds.classifier,
                umpire_conf_min: self.gate.thresholds.umpire,
                pitch_conf_min: self.gate.thresholds.pitch,
                dual_mode,
            },
            debounce_k: self.gate.debounce_k,
            boundary: BoundaryConfig {
                foreground_threshold: b.foreground_threshold,
                init_frames: b.init_frames,
                pixel_threshold: b.pixel_threshold,
                learning_rate: b.learning_rate,
                min_clip_frames: b.min_clip_frames,
            },
            replay: ReplayConfig {
                band,
                mean_abs_diff_threshold: self.replay.threshold,
                strict: self.replay.strict,
            },
            fps,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn tracker(&self, frame_width: u32) -> Result<TrackerConfig> {
        let mut cfg = TrackerConfig::for_width(frame_width);
        if let Some(j) = self.tracker.max_jump_px {
            cfg.max_jump_px = j;
        }
        cfg.max_gap_frames = self.tracker.max_gap_frames;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn pitch(&self) -> Result<PitchSpec> {
        let p = PitchSpec {
            tilt_deg: self.pitch.tilt_deg,
            full_max_m: self.pitch.full_max_m,
            good_max_m: self.pitch.good_max_m,
            ..PitchSpec::default()
        };
        p.validate()?;
        Ok(p)
    }
}

/// Where frames come from, resolved and checked.
pub enum Input {
    Stream { spec: SourceSpec, fps: f64 },
    Scenario(Arc<Scenario>),
}

impl Input {
    pub fn resolve(cfg: &PipelineConfig) -> Result<Self> {
        let path = cfg
            .source
            .path
            .as_deref()
            .ok_or_else(|| anyhow!("no source given; pass --source or set source.path"))?;
        if let Some(name) = path.strip_prefix("scenario:") {
            return Ok(Input::Scenario(Arc::new(scenario::bundled(name)?)));
        }
        if let Some(rest) = path.strip_prefix("raw:") {
            let (dims, file) = rest
                .split_once(':')
                .ok_or_else(|| anyhow!("raw source must look like raw:<W>x<H>:<path>"))?;
            let (w, h) = dims
                .split_once('x')
                .and_then(|(w, h)| Some((w.parse().ok()?, h.parse().ok()?)))
                .ok_or_else(|| anyhow!("bad raw frame size {dims:?}; expected <W>x<H>"))?;
            if file != "-" && !Path::new(file).is_file() {
                bail!("raw source {file} does not exist");
            }
            return Ok(Input::Stream {
                spec: SourceSpec::Raw {
                    path: file.into(),
                    width: w,
                    height: h,
                },
                fps: cfg.source.fps.unwrap_or(25.0),
            });
        }
        let p = Path::new(path);
        if p.extension().is_some_and(|e| e == "json") {
            return Ok(Input::Scenario(Arc::new(Scenario::load(p)?)));
        }
        if !p.is_dir() {
            bail!("source {path} is not a directory, scenario file or raw: spec");
        }
        Ok(Input::Stream {
            spec: SourceSpec::ImageDir(p.to_path_buf()),
            fps: cfg.source.fps.unwrap_or(25.0),
        })
    }

    pub fn fps(&self, cfg: &PipelineConfig) -> f64 {
        match self {
            Input::Stream { fps, .. } => *fps,
            Input::Scenario(s) => cfg.source.fps.unwrap_or(s.fps()),
        }
    }

    pub fn frames<'a>(
        &'a self,
        cfg: &PipelineConfig,
    ) -> Result<Box<dyn Iterator<Item = Result<Frame, FrameError>> + 'a>> {
        Ok(match self {
            Input::Stream { spec, fps } => Box::new(open_source(spec, *fps)?),
            Input::Scenario(s) => {
                let fps = self.fps(cfg);
                if fps == s.fps() {
                    Box::new(s.frames())
                } else {
                    // Same pixels, retimed.
                    Box::new(s.frames().map(move |f| {
                        let f = f?;
                        Frame::new(
                            f.index(),
                            cricshot_core::frame::timestamp_ms(f.index(), fps),
                            f.width(),
                            f.height(),
                            f.luma().to_vec(),
                        )
                    }))
                }
            }
        })
    }

    pub fn backend(&self, cfg: &PipelineConfig) -> Result<Box<dyn Backend>> {
        let default_kind = match self {
            Input::Scenario(_) => "synthetic",
            Input::Stream { .. } => "file",
        };
        match cfg.backend.kind.as_deref().unwrap_or(default_kind) {
            "synthetic" => match self {
                Input::Scenario(s) => Ok(Box::new(SyntheticBackend::new(s.clone()))),
                Input::Stream { .. } => bail!("synthetic backend needs a scenario source"),
            },
            "file" => {
                let path = cfg.backend.annotations.as_ref().ok_or_else(|| {
                    anyhow!("file backend: no annotations file; pass --annotations or set backend.annotations")
                })?;
                let loaded = cricshot_core::load_precomputed(path)
                    .with_context(|| format!("file backend: cannot load annotations {}", path.display()))?;
                let space = if cfg.backend.ball_crop {
                    BallSpace::Cropped(CropSpec::BALL_DETECTION)
                } else {
                    BallSpace::Full
                };
                Ok(Box::new(loaded.with_ball_space(space)))
            }
            other => bail!("unknown backend {other:?}; expected file or synthetic"),
        }
    }
}
