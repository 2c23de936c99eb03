//! Live/replay classification from the score overlay.
//!
//! Live coverage carries a static score overlay along the bottom edge;
//! replays drop it, so the bottom band follows the moving scene. A clip is
//! live when the band barely changes between its first and last frames.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::{BandSpec, Frame, FrameError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Liveness {
    Live,
    Replay,
    Undetermined,
}

impl Liveness {
    pub fn as_str(self) -> &'static str {
        match self {
            Liveness::Live => "live",
            Liveness::Replay => "replay",
            Liveness::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("band difference threshold must be non-negative, got {0}")]
    Threshold(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayConfig {
    pub band: BandSpec,
    /// Mean absolute luma difference at or below which the band counts as static.
    pub mean_abs_diff_threshold: f64,
    /// Also require the middle frame to match.
    pub strict: bool,
}

impl Default for ReplayConfig {
    fn default() -> Self {
        Self {
            band: BandSpec::default(),
            mean_abs_diff_threshold: 8.0,
            strict: false,
        }
    }
}

impl ReplayConfig {
    pub fn validate(&self) -> Result<(), ReplayError> {
        self.band.validate()?;
        if self.mean_abs_diff_threshold.is_nan() || self.mean_abs_diff_threshold < 0.0 {
            return Err(ReplayError::Threshold(self.mean_abs_diff_threshold));
        }
        Ok(())
    }
}

/// Mean absolute luma difference over the bottom band of two frames.
pub fn band_difference(first: &Frame, last: &Frame, band: &BandSpec) -> Result<f64, ReplayError> {
    band.validate()?;
    if (first.width(), first.height()) != (last.width(), last.height()) {
        return Err(FrameError::DimensionMismatch(first.width(), first.height(), last.width(), last.height()).into());
    }
    let (r0, r1) = band.rows(first.height());
    let w = first.width() as usize;
    let range = r0 as usize * w..r1 as usize * w;
    let a = &first.luma()[range.clone()];
    let b = &last.luma()[range];
    let total: u64 = a.iter().zip(b).map(|(&x, &y)| x.abs_diff(y) as u64).sum();
    Ok(total as f64 / a.len() as f64)
}

/// Live or replay for a clip of `clip_len` frames.
///
/// `frames` holds the clip's frames in order; only the first and last (and
/// the middle one in strict mode) are inspected. Clips shorter than two frames
/// are undetermined.
pub fn classify_liveness(
    clip_len: u64,
    frames: &[Frame],
    cfg: &ReplayConfig,
) -> Result<(Liveness, Option<f64>), ReplayError> {
    let (Some(first), Some(last)) = (frames.first(), frames.last()) else {
        return Ok((Liveness::Undetermined, None));
    };
    if clip_len < 2 || frames.len() < 2 {
        return Ok((Liveness::Undetermined, None));
    }
    let mut diff = band_difference(first, last, &cfg.band)?;
    if cfg.strict && frames.len() > 2 {
        let middle = &frames[frames.len() / 2];
        diff = diff
            .max(band_difference(first, middle, &cfg.band)?)
            .max(band_difference(middle, last, &cfg.band)?);
    }
    let verdict = if diff <= cfg.mean_abs_diff_threshold {
        Liveness::Live
    } else {
        Liveness::Replay
    };
    Ok((verdict, Some(diff)))
}
