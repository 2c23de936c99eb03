//! End-to-end segmentation run: frames in, clips out.
//!
//! Frames are annotated a batch at a time on the rayon pool (results keep
//! frame order) and then fed one by one to the [`Segmenter`].

use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::detection::{AnnotateError, Backend};
use crate::frame::{Frame, FrameError};
use crate::gate::GateVerdict;
use crate::metrics::{self, PerfStats};
use crate::segment::{Clip, SegmentError, SegmentEvent, Segmenter, SegmenterConfig};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("frame source failed")]
    Source(#[from] FrameError),
    #[error("segmenter failed")]
    Segment(#[from] SegmentError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    /// Frames annotated together.
    pub batch_size: usize,
    /// Annotate batches on the rayon pool.
    pub parallel: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            batch_size: 64,
            parallel: true,
        }
    }
}

#[derive(Debug, Default)]
pub struct SegmentRun {
    pub clips: Vec<Clip>,
    pub boundaries: Vec<u64>,
    pub discarded: Vec<(u64, u64)>,
    pub backend_errors: Vec<AnnotateError>,
    /// Per-frame gate verdicts; `None` where the backend failed.
    pub verdicts: Vec<(u64, Option<GateVerdict>)>,
    pub frames: u64,
    pub wall_ms: f64,
}

impl SegmentRun {
    pub fn perf(&self) -> Option<PerfStats> {
        metrics::throughput(self.frames, self.wall_ms).ok()
    }

    /// Frames covered by emitted clips over frames processed.
    pub fn clip_fraction(&self) -> f64 {
        if self.frames == 0 {
            return 0.0;
        }
        self.clips.iter().map(Clip::len).sum::<u64>() as f64 / self.frames as f64
    }

    fn absorb(&mut self, events: Vec<SegmentEvent>, on_clip: &mut dyn FnMut(&Clip)) {
        for e in events {
            match e {
                SegmentEvent::Boundary { frame, .. } => self.boundaries.push(frame),
                SegmentEvent::Clip(c) => {
                    on_clip(&c);
                    self.clips.push(c);
                }
                SegmentEvent::Discarded { start, end } => self.discarded.push((start, end)),
                SegmentEvent::BackendError(e) => self.backend_errors.push(e),
            }
        }
    }
}

/// Run the segmenter over `frames`, calling `on_clip` as each clip closes.
pub fn run_segmentation<I, B>(
    frames: I,
    backend: &B,
    cfg: &SegmenterConfig,
    opts: RunOptions,
    mut on_clip: impl FnMut(&Clip),
) -> Result<SegmentRun, PipelineError>
where
    I: IntoIterator<Item = Result<Frame, FrameError>>,
    B: Backend + ?Sized,
{
    let started = Instant::now();
    let mut segmenter = Segmenter::new(cfg.clone())?;
    let mut run = SegmentRun::default();
    let batch_size = opts.batch_size.max(1);
    let mut frames = frames.into_iter();
    let mut batch = Vec::with_capacity(batch_size);
    loop {
        batch.clear();
        for f in frames.by_ref().take(batch_size) {
            batch.push(f?);
        }
        if batch.is_empty() {
            break;
        }
        let annotations: Vec<_> = if opts.parallel {
            batch.par_iter().map(|f| backend.annotate(f)).collect()
        } else {
            batch.iter().map(|f| backend.annotate(f)).collect()
        };
        for (frame, ann) in batch.drain(..).zip(annotations) {
            let index = frame.index();
            let events = segmenter.push(frame, ann)?;
            run.verdicts.push((index, segmenter.last_verdict()));
            run.frames += 1;
            run.absorb(events, &mut on_clip);
        }
    }
    let events = segmenter.finish()?;
    run.absorb(events, &mut on_clip);
    run.wall_ms = started.elapsed().as_secs_f64() * 1000.0;
    Ok(run)
}
