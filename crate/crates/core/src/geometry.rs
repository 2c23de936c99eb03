//! Bounce row to pitch length, via the batsman zoom factor.
//!
//! The broadcast camera keeps zooming on the batsman while the ball is in the
//! air, so the pitch measured at release no longer fits the bounce frame. The
//! batsman's box height in both frames gives the zoom `Z = H2 / H1`; the pitch
//! height measured at release (batsman feet to bowler feet, `P1`) rescales to
//! `P2 = Z · P1` in the bounce frame. The crease-to-crease span is then laid
//! between the batsman's feet and `P2` pixels above them, and the bounce row is
//! read off that span.
//!
//! The span is not linear on screen. The pitch is modelled as a strip tilted
//! by `θ` away from the image plane: a normalized screen position
//! `t ∈ [0, 1]` (0 at the batsman crease) maps to the along-pitch fraction
//!
//! ```text
//! u = t / (cos θ + t · (1 − cos θ))
//! ```
//!
//! which is the identity at `θ = 0` and keeps both creases fixed for every `θ`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detection::{FrameAnnotations, ObjectLabel};
use crate::tracker::Trajectory;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("no batsman detection in frame {0}")]
    NoBatsman(u64),
    #[error("no bowler detection in frame {0}")]
    NoBowler(u64),
    #[error("pitch height {0} px is not positive (bowler must stand above the batsman)")]
    PitchHeight(f64),
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("row {row} lies outside the crease span [{bowler_row}, {batsman_row}]")]
    RowOutOfRange {
        row: f64,
        bowler_row: f64,
        batsman_row: f64,
    },
    #[error("distance {0} m lies outside the pitch")]
    DistanceOutOfRange(f64),
    #[error("crease rows must satisfy batsman row > bowler row, got {batsman_row} and {bowler_row}")]
    DegenerateCalibration { batsman_row: f64, bowler_row: f64 },
    #[error("invalid pitch spec: {0}")]
    PitchSpec(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PitchSpec {
    pub stumps_to_stumps_m: f64,
    pub crease_offset_m: f64,
    pub full_max_m: f64,
    pub good_max_m: f64,
    pub tilt_deg: f64,
}

impl Default for PitchSpec {
    fn default() -> Self {
        Self {
            stumps_to_stumps_m: 20.12,
            crease_offset_m: 1.22,
            full_max_m: 6.0,
            good_max_m: 8.0,
            tilt_deg: 20.0,
        }
    }
}

impl PitchSpec {
    /// The wider reading of good length, 6 to 9 metres.
    pub fn with_wide_good_length(self) -> Self {
        Self {
            good_max_m: 9.0,
            ..self
        }
    }

    /// Crease-to-crease length in metres.
    pub fn crease_span_m(&self) -> f64 {
        self.stumps_to_stumps_m - 2.0 * self.crease_offset_m
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let bad = |m: String| Err(GeometryError::PitchSpec(m));
        if !(self.crease_offset_m >= 0.0 && self.crease_span_m() > 0.0) {
            return bad(format!(
                "crease offset {} leaves no span on a {} m pitch",
                self.crease_offset_m, self.stumps_to_stumps_m
            ));
        }
        if !(0.0 < self.full_max_m && self.full_max_m < self.good_max_m && self.good_max_m < self.stumps_to_stumps_m) {
            return bad(format!(
                "need 0 < full_max ({}) < good_max ({}) < pitch length ({})",
                self.full_max_m, self.good_max_m, self.stumps_to_stumps_m
            ));
        }
        if !(0.0..90.0).contains(&self.tilt_deg) {
            return bad(format!("tilt {} must lie in [0, 90)", self.tilt_deg));
        }
        Ok(())
    }
}

/// Crease rows in the bounce frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowCalibration {
    pub batsman_crease_row: f64,
    pub bowler_crease_row: f64,
    pub tilt_deg: f64,
}

impl RowCalibration {
    /// Anchor the batsman crease at `batsman_row` and place the bowler crease
    /// `pitch_px` rows above it.
    pub fn from_pitch_height(batsman_row: f64, pitch_px: f64, tilt_deg: f64) -> Self {
        Self {
            batsman_crease_row: batsman_row,
            bowler_crease_row: batsman_row - pitch_px,
            tilt_deg,
        }
    }

    fn span(&self) -> Result<f64, GeometryError> {
        let span = self.batsman_crease_row - self.bowler_crease_row;
        if span > 0.0 && span.is_finite() {
            Ok(span)
        } else {
            Err(GeometryError::DegenerateCalibration {
                batsman_row: self.batsman_crease_row,
                bowler_row: self.bowler_crease_row,
            })
        }
    }
}

/// Camera-derived quantities of one delivery, all in pixels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZoomContext {
    /// Batsman box height in the release frame.
    pub release_batsman_px: f64,
    /// Batsman feet to bowler feet in the release frame.
    pub release_pitch_px: f64,
    /// Batsman box height in the bounce frame.
    pub bounce_batsman_px: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DeliveryType {
    #[serde(rename = "full")]
    FullPitched,
    #[serde(rename = "good")]
    GoodLength,
    #[serde(rename = "short")]
    ShortPitched,
}

impl DeliveryType {
    pub fn as_str(self) -> &'static str {
        match self {
            DeliveryType::FullPitched => "full",
            DeliveryType::GoodLength => "good",
            DeliveryType::ShortPitched => "short",
        }
    }
}

impl fmt::Display for DeliveryType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64, GeometryError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(GeometryError::NonPositive { name, value })
    }
}

/// Box height of the most confident batsman detection.
pub fn batsman_height(ann: &FrameAnnotations) -> Result<f64, GeometryError> {
    ann.best(ObjectLabel::Batsman)
        .map(|d| d.bbox.h)
        .ok_or(GeometryError::NoBatsman(ann.frame_index))
}

/// Rows between the batsman's and the bowler's feet.
pub fn pitch_pixel_height(ann: &FrameAnnotations) -> Result<f64, GeometryError> {
    let batsman = ann
        .best(ObjectLabel::Batsman)
        .ok_or(GeometryError::NoBatsman(ann.frame_index))?;
    let bowler = ann
        .best(ObjectLabel::Bowler)
        .ok_or(GeometryError::NoBowler(ann.frame_index))?;
    let p = batsman.bbox.bottom() - bowler.bbox.bottom();
    if p > 0.0 {
        Ok(p)
    } else {
        Err(GeometryError::PitchHeight(p))
    }
}

pub fn zoom_factor(h1: f64, h2: f64) -> Result<f64, GeometryError> {
    Ok(positive("H2", h2)? / positive("H1", h1)?)
}

pub fn scaled_pitch_height(zoom: f64, p1: f64) -> Result<f64, GeometryError> {
    Ok(positive("zoom factor", zoom)? * positive("P1", p1)?)
}

/// Along-pitch fraction for a normalized screen position.
pub fn screen_to_pitch_fraction(t: f64, tilt_deg: f64) -> f64 {
    let c = tilt_deg.to_radians().cos();
    t / (c + t * (1.0 - c))
}

/// Inverse of [`screen_to_pitch_fraction`].
pub fn pitch_to_screen_fraction(u: f64, tilt_deg: f64) -> f64 {
    let c = tilt_deg.to_radians().cos();
    u * c / (1.0 - u * (1.0 - c))
}

/// Distance in metres from the batsman's stumps for a row in the bounce frame.
pub fn row_to_distance(row: f64, calib: &RowCalibration, pitch: &PitchSpec) -> Result<f64, GeometryError> {
    let span = calib.span()?;
    if !(calib.bowler_crease_row..=calib.batsman_crease_row).contains(&row) {
        return Err(GeometryError::RowOutOfRange {
            row,
            bowler_row: calib.bowler_crease_row,
            batsman_row: calib.batsman_crease_row,
        });
    }
    let t = (calib.batsman_crease_row - row) / span;
    let u = screen_to_pitch_fraction(t, calib.tilt_deg);
    Ok(pitch.crease_offset_m + u * pitch.crease_span_m())
}

/// Row at which a point `distance_m` from the batsman's stumps appears.
pub fn distance_to_row(distance_m: f64, calib: &RowCalibration, pitch: &PitchSpec) -> Result<f64, GeometryError> {
    let span = calib.span()?;
    let u = (distance_m - pitch.crease_offset_m) / pitch.crease_span_m();
    if !(0.0..=1.0).contains(&u) {
        return Err(GeometryError::DistanceOutOfRange(distance_m));
    }
    let t = pitch_to_screen_fraction(u, calib.tilt_deg);
    Ok(calib.batsman_crease_row - t * span)
}

pub fn classify_delivery(distance_m: f64, pitch: &PitchSpec) -> Result<DeliveryType, GeometryError> {
    if !(0.0..=pitch.stumps_to_stumps_m).contains(&distance_m) {
        return Err(GeometryError::DistanceOutOfRange(distance_m));
    }
    Ok(if distance_m < pitch.full_max_m {
        DeliveryType::FullPitched
    } else if distance_m <= pitch.good_max_m {
        DeliveryType::GoodLength
    } else {
        DeliveryType::ShortPitched
    })
}

/// Stage of the bounce-length computation, used to tag failures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Bounce,
    ReleaseBatsman,
    ReleasePitch,
    BounceBatsman,
    Zoom,
    ScaledPitch,
    Mapping,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Bounce => "bounce detection",
            Stage::ReleaseBatsman => "step 1 (batsman height at release)",
            Stage::ReleasePitch => "step 2 (pitch height at release)",
            Stage::BounceBatsman => "step 3 (batsman height at bounce)",
            Stage::Zoom => "step 4 (zoom factor)",
            Stage::ScaledPitch => "step 5 (pitch height at bounce)",
            Stage::Mapping => "step 6 (bounce row to length)",
        })
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ClassifyError {
    #[error("trajectory has no bounce")]
    NoBounce,
    #[error("{stage}: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: GeometryError,
    },
}

impl ClassifyError {
    pub fn stage(&self) -> Stage {
        match self {
            ClassifyError::NoBounce => Stage::Bounce,
            ClassifyError::Stage { stage, .. } => *stage,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeliveryEstimate {
    pub release_frame: u64,
    pub bounce_frame: u64,
    pub bounce_row: f64,
    pub zoom: ZoomContext,
    pub zoom_factor: f64,
    pub calibration: RowCalibration,
    pub distance_m: f64,
    pub delivery: DeliveryType,
}

/// One line of a delivery report; fields other than `clip` and `status`
/// are absent when the delivery could not be classified.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeliveryRecord {
    pub clip: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounce_frame: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    #[serde(rename = "type")]
    pub delivery: Option<DeliveryType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zoom: Option<f64>,
    pub status: String,
}

/// Length and type of one delivery.
///
/// The release frame is the first trajectory point, the bounce frame the
/// trajectory's bounce. The batsman crease is anchored at the bottom of the
/// batsman box in the bounce frame.
pub fn classify_clip_delivery(
    trajectory: &Trajectory,
    release: &FrameAnnotations,
    bounce: &FrameAnnotations,
    pitch: &PitchSpec,
) -> Result<DeliveryEstimate, ClassifyError> {
    let at = |stage| move |source| ClassifyError::Stage { stage, source };
    let bounce_point = *trajectory.bounce().ok_or(ClassifyError::NoBounce)?;
    let release_frame = trajectory.points()[0].frame_index;

    let h1 = batsman_height(release).map_err(at(Stage::ReleaseBatsman))?;
    let p1 = pitch_pixel_height(release).map_err(at(Stage::ReleasePitch))?;
    let bounce_batsman = bounce
        .best(ObjectLabel::Batsman)
        .ok_or(GeometryError::NoBatsman(bounce.frame_index))
        .map_err(at(Stage::BounceBatsman))?;
    let h2 = bounce_batsman.bbox.h;
    let z = zoom_factor(h1, h2).map_err(at(Stage::Zoom))?;
    let p2 = scaled_pitch_height(z, p1).map_err(at(Stage::ScaledPitch))?;

    let calibration = RowCalibration::from_pitch_height(bounce_batsman.bbox.bottom(), p2, pitch.tilt_deg);
    let distance_m = row_to_distance(bounce_point.pos.row, &calibration, pitch).map_err(at(Stage::Mapping))?;
    let delivery = classify_delivery(distance_m, pitch).map_err(at(Stage::Mapping))?;
    Ok(DeliveryEstimate {
        release_frame,
        bounce_frame: bounce_point.frame_index,
        bounce_row: bounce_point.pos.row,
        zoom: ZoomContext {
            release_batsman_px: h1,
            release_pitch_px: p1,
            bounce_batsman_px: h2,
        },
        zoom_factor: z,
        calibration,
        distance_m,
        delivery,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::BBox;
    use crate::tracker::TrackPoint;
    use proptest::prelude::*;

    fn calib(tilt: f64) -> RowCalibration {
        RowCalibration {
            batsman_crease_row: 600.0,
            bowler_crease_row: 200.0,
            tilt_deg: tilt,
        }
    }

    fn person(label: ObjectLabel, bottom: f64, h: f64, conf: f64) -> (ObjectLabel, BBox, f64) {
        (label, BBox::new(100.0, bottom - h, 40.0, h), conf)
    }

    fn ann(frame: u64, people: &[(ObjectLabel, BBox, f64)]) -> FrameAnnotations {
        people
            .iter()
            .fold(FrameAnnotations::new(frame, 1.0), |a, &(l, b, c)| a.with(l, b, c))
    }

    #[test]
    fn batsman_height_uses_most_confident_box() {
        let a = ann(0, &[person(ObjectLabel::Batsman, 600.0, 200.0, 0.8)]);
        assert_eq!(batsman_height(&a), Ok(200.0));
        let a = ann(
            0,
            &[
                person(ObjectLabel::Batsman, 600.0, 180.0, 0.9),
                person(ObjectLabel::Batsman, 600.0, 300.0, 0.4),
            ],
        );
        assert_eq!(batsman_height(&a), Ok(180.0));
        assert_eq!(batsman_height(&ann(5, &[])), Err(GeometryError::NoBatsman(5)));
    }

    #[test]
    fn pitch_height_between_feet() {
        let a = ann(
            0,
            &[
                person(ObjectLabel::Batsman, 600.0, 100.0, 0.9),
                person(ObjectLabel::Bowler, 200.0, 60.0, 0.9),
            ],
        );
        assert_eq!(pitch_pixel_height(&a), Ok(400.0));
        let level = ann(
            0,
            &[
                person(ObjectLabel::Batsman, 300.0, 100.0, 0.9),
                person(ObjectLabel::Bowler, 300.0, 60.0, 0.9),
            ],
        );
        assert!(matches!(pitch_pixel_height(&level), Err(GeometryError::PitchHeight(_))));
        let inverted = ann(
            0,
            &[
                person(ObjectLabel::Batsman, 200.0, 100.0, 0.9),
                person(ObjectLabel::Bowler, 300.0, 60.0, 0.9),
            ],
        );
        assert!(pitch_pixel_height(&inverted).is_err());
    }

    #[test]
    fn zoom_and_scaling() {
        assert_eq!(zoom_factor(200.0, 200.0), Ok(1.0));
        assert_eq!(zoom_factor(100.0, 150.0), Ok(1.5));
        assert!(zoom_factor(0.0, 150.0).is_err());
        assert_eq!(scaled_pitch_height(1.5, 400.0), Ok(600.0));
        assert_eq!(scaled_pitch_height(1.0, 400.0), Ok(400.0));
        assert_eq!(scaled_pitch_height(0.5, 400.0), Ok(200.0));
        assert!(scaled_pitch_height(-1.0, 400.0).is_err());
    }

    #[test]
    fn row_endpoints_and_midpoint() {
        let p = PitchSpec::default();
        for tilt in [0.0, 20.0, 45.0] {
            let c = calib(tilt);
            assert_eq!(row_to_distance(600.0, &c, &p).unwrap(), 1.22);
            assert!((row_to_distance(200.0, &c, &p).unwrap() - 18.90).abs() < 1e-12);
        }
        assert!((row_to_distance(400.0, &calib(0.0), &p).unwrap() - 10.06).abs() < 1e-12);
        assert!(row_to_distance(601.0, &calib(20.0), &p).is_err());
        assert!(row_to_distance(199.0, &calib(20.0), &p).is_err());
        let flat = RowCalibration {
            batsman_crease_row: 300.0,
            bowler_crease_row: 300.0,
            tilt_deg: 20.0,
        };
        assert!(matches!(
            row_to_distance(300.0, &flat, &p),
            Err(GeometryError::DegenerateCalibration { .. })
        ));
    }

    #[test]
    fn delivery_boundaries() {
        let p = PitchSpec::default();
        assert_eq!(classify_delivery(5.0, &p), Ok(DeliveryType::FullPitched));
        assert_eq!(classify_delivery(6.0, &p), Ok(DeliveryType::GoodLength));
        assert_eq!(classify_delivery(8.0, &p), Ok(DeliveryType::GoodLength));
        assert_eq!(classify_delivery(9.5, &p), Ok(DeliveryType::ShortPitched));
        assert_eq!(
            classify_delivery(8.5, &p.with_wide_good_length()),
            Ok(DeliveryType::GoodLength)
        );
        assert!(classify_delivery(-0.1, &p).is_err());
        assert!(classify_delivery(20.2, &p).is_err());
        assert_eq!(classify_delivery(0.0, &p), Ok(DeliveryType::FullPitched));
        assert_eq!(classify_delivery(20.12, &p), Ok(DeliveryType::ShortPitched));
    }

    #[test]
    fn pitch_spec_validation() {
        assert!(PitchSpec::default().validate().is_ok());
        let bad = PitchSpec {
            full_max_m: 8.0,
            good_max_m: 6.0,
            ..PitchSpec::default()
        };
        assert!(bad.validate().is_err());
        let bad = PitchSpec {
            tilt_deg: 90.0,
            ..PitchSpec::default()
        };
        assert!(bad.validate().is_err());
    }

    fn delivery_frames(bounce_row: f64) -> (Trajectory, FrameAnnotations, FrameAnnotations) {
        let release = ann(
            10,
            &[
                person(ObjectLabel::Batsman, 600.0, 200.0, 0.9),
                person(ObjectLabel::Bowler, 200.0, 150.0, 0.9),
            ],
        );
        let bounce = ann(20, &[person(ObjectLabel::Batsman, 600.0, 200.0, 0.9)]);
        let t = Trajectory::new(vec![
            TrackPoint::from((10, 300.0, 150.0)),
            TrackPoint::from((20, 300.0, bounce_row)),
            TrackPoint::from((25, 300.0, bounce_row - 40.0)),
        ])
        .unwrap();
        (t, release, bounce)
    }

    #[test]
    fn unit_zoom_bounce_at_batsman_crease_is_full() {
        let (t, release, bounce) = delivery_frames(600.0);
        let est = classify_clip_delivery(&t, &release, &bounce, &PitchSpec::default()).unwrap();
        assert_eq!(est.zoom_factor, 1.0);
        assert_eq!(est.distance_m, 1.22);
        assert_eq!(est.delivery, DeliveryType::FullPitched);
        assert_eq!((est.release_frame, est.bounce_frame), (10, 20));
    }

    #[test]
    fn missing_bowler_names_step_two() {
        let (t, mut release, bounce) = delivery_frames(500.0);
        release.detections.retain(|d| d.label != ObjectLabel::Bowler);
        let err = classify_clip_delivery(&t, &release, &bounce, &PitchSpec::default()).unwrap_err();
        assert_eq!(err.stage(), Stage::ReleasePitch);
        assert!(err.to_string().starts_with("step 2"));
        let flat = Trajectory::new(vec![TrackPoint::from((0, 0.0, 1.0))]).unwrap();
        assert_eq!(
            classify_clip_delivery(&flat, &release, &bounce, &PitchSpec::default()),
            Err(ClassifyError::NoBounce)
        );
    }

    proptest! {
        #[test]
        fn row_map_strictly_decreasing(tilt in 0.0f64..80.0, a in 200.0f64..600.0, b in 200.0f64..600.0) {
            prop_assume!((a - b).abs() > 1e-6);
            let p = PitchSpec::default();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(row_to_distance(lo, &calib(tilt), &p).unwrap() > row_to_distance(hi, &calib(tilt), &p).unwrap());
        }

        #[test]
        fn distance_row_round_trip(tilt in 0.0f64..60.0, d in 1.22f64..=18.90) {
            let p = PitchSpec::default();
            let row = distance_to_row(d, &calib(tilt), &p).unwrap();
            prop_assert!((row_to_distance(row, &calib(tilt), &p).unwrap() - d).abs() < 1e-9);
        }

        #[test]
        fn classification_partitions_pitch(d in 0.0f64..=20.12) {
            let p = PitchSpec::default();
            let t = classify_delivery(d, &p).unwrap();
            let expected = [d < 6.0, (6.0..=8.0).contains(&d), d > 8.0];
            prop_assert_eq!(expected.iter().filter(|&&x| x).count(), 1);
            let idx = expected.iter().position(|&x| x).unwrap();
            prop_assert_eq!(t, [DeliveryType::FullPitched, DeliveryType::GoodLength, DeliveryType::ShortPitched][idx]);
        }
    }
}
