//! Ball trajectory assembly and bounce detection.
//!
//! Tracking is single-hypothesis and greedy: starting from the most confident
//! candidate on the first frame that has any, each following frame contributes
//! the candidate nearest to the last accepted position. The bounce is the
//! lowest on-screen point (largest row) of the resulting path.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detection::{FrameAnnotations, ObjectLabel};

/// Pixel position, `row` growing downward.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub col: f64,
    pub row: f64,
}

impl Point {
    pub fn new(col: f64, row: f64) -> Self {
        Self { col, row }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.col - other.col).hypot(self.row - other.row)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallCandidate {
    pub frame_index: u64,
    pub center: Point,
    pub confidence: f64,
}

impl BallCandidate {
    pub fn new(frame_index: u64, col: f64, row: f64, confidence: f64) -> Self {
        Self {
            frame_index,
            center: Point::new(col, row),
            confidence,
        }
    }
}

/// Ball detections of one frame as tracker candidates, in detection order.
pub fn candidates_from(ann: &FrameAnnotations) -> Vec<BallCandidate> {
    ann.of_label(ObjectLabel::Ball)
        .map(|d| {
            let (col, row) = d.bbox.center();
            BallCandidate::new(ann.frame_index, col, row, d.confidence)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "(u64, f64, f64)", into = "(u64, f64, f64)")]
pub struct TrackPoint {
    pub frame_index: u64,
    pub pos: Point,
}

impl From<(u64, f64, f64)> for TrackPoint {
    fn from((frame_index, col, row): (u64, f64, f64)) -> Self {
        Self {
            frame_index,
            pos: Point::new(col, row),
        }
    }
}

impl From<TrackPoint> for (u64, f64, f64) {
    fn from(p: TrackPoint) -> Self {
        (p.frame_index, p.pos.col, p.pos.row)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TrackError {
    #[error("trajectory frame indices must strictly increase (frame {0} follows {1})")]
    NotIncreasing(u64, u64),
    #[error("bounce index {0} does not match the lowest point of the trajectory")]
    BadBounce(usize),
    #[error("tracker {0} must be positive")]
    Config(&'static str),
}

/// Ordered ball positions with the bounce, if the ball came down and went up.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TrajectoryWire", into = "TrajectoryWire")]
pub struct Trajectory {
    points: Vec<TrackPoint>,
    bounce_index: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct TrajectoryWire {
    points: Vec<TrackPoint>,
    bounce: Option<usize>,
}

impl TryFrom<TrajectoryWire> for Trajectory {
    type Error = TrackError;

    fn try_from(w: TrajectoryWire) -> Result<Self, TrackError> {
        let t = Trajectory::new(w.points)?;
        if t.bounce_index != w.bounce {
            return Err(TrackError::BadBounce(w.bounce.unwrap_or(usize::MAX)));
        }
        Ok(t)
    }
}

impl From<Trajectory> for TrajectoryWire {
    fn from(t: Trajectory) -> Self {
        Self {
            points: t.points,
            bounce: t.bounce_index,
        }
    }
}

impl Trajectory {
    pub fn new(points: Vec<TrackPoint>) -> Result<Self, TrackError> {
        if let Some(w) = points.windows(2).find(|w| w[1].frame_index <= w[0].frame_index) {
            return Err(TrackError::NotIncreasing(w[1].frame_index, w[0].frame_index));
        }
        let bounce_index = find_bounce(&points);
        Ok(Self { points, bounce_index })
    }

    pub fn points(&self) -> &[TrackPoint] {
        &self.points
    }

    pub fn bounce_index(&self) -> Option<usize> {
        self.bounce_index
    }

    pub fn bounce(&self) -> Option<&TrackPoint> {
        self.bounce_index.map(|i| &self.points[i])
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackerConfig {
    pub max_jump_px: f64,
    pub max_gap_frames: u32,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            max_jump_px: 120.0,
            max_gap_frames: 3,
        }
    }
}

impl TrackerConfig {
    const REFERENCE_WIDTH: f64 = 1280.0;

    /// Defaults with the jump bound scaled from a 1280-pixel-wide frame.
    pub fn for_width(width: u32) -> Self {
        Self {
            max_jump_px: Self::default().max_jump_px * width as f64 / Self::REFERENCE_WIDTH,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), TrackError> {
        if !(self.max_jump_px.is_finite() && self.max_jump_px > 0.0) {
            return Err(TrackError::Config("max_jump_px"));
        }
        if self.max_gap_frames == 0 {
            return Err(TrackError::Config("max_gap_frames"));
        }
        Ok(())
    }
}

/// One line of a trajectory file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClipTrajectory {
    pub clip: u64,
    #[serde(flatten)]
    pub trajectory: Trajectory,
}

/// Nearest candidate to `prev` within `max_jump_px` (inclusive); the earliest
/// listed candidate wins a distance tie.
pub fn associate<'a>(prev: Point, candidates: &'a [BallCandidate], cfg: &TrackerConfig) -> Option<&'a BallCandidate> {
    let mut best: Option<(&BallCandidate, f64)> = None;
    for c in candidates {
        let d = prev.distance(&c.center);
        if d > cfg.max_jump_px {
            continue;
        }
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((c, d));
        }
    }
    best.map(|(c, _)| c)
}

/// Greedy track over per-frame candidate lists given in frame order.
///
/// Up to `max_gap_frames` consecutive frames without an accepted candidate are
/// tolerated; one more ends the track. Missed frames are not interpolated.
pub fn build_trajectory(per_frame: &[(u64, Vec<BallCandidate>)], cfg: &TrackerConfig) -> Trajectory {
    let Some(seed_at) = per_frame.iter().position(|(_, c)| !c.is_empty()) else {
        return Trajectory::default();
    };
    let (seed_frame, seed_list) = &per_frame[seed_at];
    let seed = seed_list
        .iter()
        .fold(None::<&BallCandidate>, |best, c| match best {
            Some(b) if b.confidence >= c.confidence => Some(b),
            _ => Some(c),
        })
        .expect("non-empty");
    let mut points = vec![TrackPoint {
        frame_index: *seed_frame,
        pos: seed.center,
    }];
    let mut last = points[0];
    for (frame, candidates) in &per_frame[seed_at + 1..] {
        if *frame <= last.frame_index {
            continue;
        }
        let missed = frame - last.frame_index - 1;
        if missed > cfg.max_gap_frames as u64 {
            break;
        }
        if let Some(c) = associate(last.pos, candidates, cfg) {
            last = TrackPoint {
                frame_index: *frame,
                pos: c.center,
            };
            points.push(last);
        } else if missed + 1 > cfg.max_gap_frames as u64 {
            break;
        }
    }
    Trajectory::new(points).expect("frames visited in increasing order")
}

/// Index of the lowest on-screen point (largest row, earliest on ties).
///
/// Absent for fewer than three points or when rows never both fall and rise.
pub fn find_bounce(points: &[TrackPoint]) -> Option<usize> {
    if points.len() < 3 {
        return None;
    }
    let rows: Vec<f64> = points.iter().map(|p| p.pos.row).collect();
    let non_decreasing = rows.windows(2).all(|w| w[1] >= w[0]);
    let non_increasing = rows.windows(2).all(|w| w[1] <= w[0]);
    if non_decreasing || non_increasing {
        return None;
    }
    let mut best = 0;
    for (i, &r) in rows.iter().enumerate() {
        if r > rows[best] {
            best = i;
        }
    }
    Some(best)
}

/// Points up to and including the bounce, and the points after it.
pub fn split_phases(t: &Trajectory) -> (&[TrackPoint], &[TrackPoint]) {
    match t.bounce_index {
        Some(b) => t.points.split_at(b + 1),
        None => (&t.points[..], &[]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(rows: &[f64]) -> Vec<TrackPoint> {
        rows.iter()
            .enumerate()
            .map(|(i, &r)| TrackPoint::from((i as u64, 50.0, r)))
            .collect()
    }

    fn cfg(max_jump_px: f64) -> TrackerConfig {
        TrackerConfig {
            max_jump_px,
            max_gap_frames: 3,
        }
    }

    #[test]
    fn associate_picks_nearest() {
        let cands = [
            BallCandidate::new(1, 110.0, 112.0, 0.9),
            BallCandidate::new(1, 103.0, 104.0, 0.5),
        ];
        let c = associate(Point::new(100.0, 100.0), &cands, &cfg(50.0)).unwrap();
        assert_eq!(c.center, Point::new(103.0, 104.0));
    }

    #[test]
    fn associate_bound_is_inclusive() {
        let cands = [BallCandidate::new(1, 103.0, 104.0, 0.5)];
        assert!(associate(Point::new(100.0, 100.0), &cands, &cfg(5.0)).is_some());
        assert!(associate(Point::new(100.0, 100.0), &cands, &cfg(4.99)).is_none());
    }

    #[test]
    fn associate_tie_goes_to_first_listed() {
        let cands = [
            BallCandidate::new(1, 10.0, 0.0, 0.1),
            BallCandidate::new(1, -10.0, 0.0, 0.9),
        ];
        let c = associate(Point::new(0.0, 0.0), &cands, &cfg(50.0)).unwrap();
        assert_eq!(c.center.col, 10.0);
    }

    #[test]
    fn bounce_cases() {
        assert_eq!(find_bounce(&pts(&[10.0, 20.0, 30.0, 25.0, 15.0])), Some(2));
        assert_eq!(find_bounce(&pts(&[10.0, 20.0, 30.0, 40.0])), None);
        assert_eq!(find_bounce(&pts(&[10.0, 30.0, 30.0, 20.0])), Some(1));
        assert_eq!(find_bounce(&pts(&[10.0, 30.0])), None);
        assert_eq!(find_bounce(&pts(&[40.0, 30.0, 20.0])), None);
    }

    #[test]
    fn phases() {
        let t = Trajectory::new(pts(&[10.0, 20.0, 30.0, 25.0])).unwrap();
        let (down, up) = split_phases(&t);
        assert_eq!(down.iter().map(|p| p.pos.row).collect::<Vec<_>>(), [10.0, 20.0, 30.0]);
        assert_eq!(up.iter().map(|p| p.pos.row).collect::<Vec<_>>(), [25.0]);

        let t = Trajectory::new(pts(&[10.0, 20.0])).unwrap();
        assert_eq!(split_phases(&t), (t.points(), &[][..]));

        // Bounce on the last point only happens with a rise before it.
        let t = Trajectory::new(pts(&[20.0, 10.0, 30.0])).unwrap();
        assert_eq!(t.bounce_index(), Some(2));
        assert!(split_phases(&t).1.is_empty());
    }

    #[test]
    fn clean_arc_is_followed() {
        let rows = [100.0, 110.0, 120.0, 130.0, 124.0, 118.0];
        let per_frame: Vec<_> = rows
            .iter()
            .enumerate()
            .map(|(i, &r)| (i as u64, vec![BallCandidate::new(i as u64, 300.0 + i as f64, r, 0.8)]))
            .collect();
        let t = build_trajectory(&per_frame, &cfg(60.0));
        assert_eq!(t.len(), 6);
        assert_eq!(t.bounce_index(), Some(3));
    }

    #[test]
    fn track_terminates_after_gap() {
        let mut per_frame: Vec<_> = (0..5u64)
            .map(|i| (i, vec![BallCandidate::new(i, 10.0 * i as f64, 10.0, 0.9)]))
            .collect();
        for i in 5..9u64 {
            per_frame.push((i, vec![]));
        }
        per_frame.push((9, vec![BallCandidate::new(9, 50.0, 10.0, 0.9)]));
        let t = build_trajectory(&per_frame, &cfg(100.0));
        assert_eq!(t.points().last().unwrap().frame_index, 4);

        // Three misses are tolerated.
        per_frame[8] = (8, vec![BallCandidate::new(8, 50.0, 10.0, 0.9)]);
        let t = build_trajectory(&per_frame, &cfg(100.0));
        let frames: Vec<u64> = t.points().iter().map(|p| p.frame_index).collect();
        assert_eq!(frames, vec![0, 1, 2, 3, 4, 8, 9]);
    }

    #[test]
    fn missing_frames_in_list_count_as_misses() {
        let per_frame = vec![
            (0, vec![BallCandidate::new(0, 0.0, 0.0, 0.9)]),
            (1, vec![BallCandidate::new(1, 1.0, 0.0, 0.9)]),
            (6, vec![BallCandidate::new(6, 2.0, 0.0, 0.9)]),
        ];
        assert_eq!(build_trajectory(&per_frame, &cfg(10.0)).len(), 2);
    }

    #[test]
    fn seed_is_most_confident_on_first_frame() {
        let per_frame = vec![
            (3, vec![]),
            (
                4,
                vec![
                    BallCandidate::new(4, 0.0, 0.0, 0.3),
                    BallCandidate::new(4, 200.0, 0.0, 0.95),
                ],
            ),
            (5, vec![BallCandidate::new(5, 205.0, 5.0, 0.5)]),
        ];
        let t = build_trajectory(&per_frame, &cfg(30.0));
        assert_eq!(t.points()[0].pos.col, 200.0);
        assert_eq!(t.len(), 2);
        assert!(build_trajectory(&[(0, vec![])], &cfg(30.0)).is_empty());
    }

    #[test]
    fn trajectory_json_shape() {
        let t = Trajectory::new(pts(&[10.0, 20.0, 15.0])).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(
            json,
            r#"{"points":[[0,50.0,10.0],[1,50.0,20.0],[2,50.0,15.0]],"bounce":1}"#
        );
        assert_eq!(serde_json::from_str::<Trajectory>(&json).unwrap(), t);
        assert!(serde_json::from_str::<Trajectory>(r#"{"points":[[1,0,0],[1,0,0]],"bounce":null}"#).is_err());
        assert!(serde_json::from_str::<Trajectory>(r#"{"points":[[0,0,10],[1,0,20],[2,0,15]],"bounce":0}"#).is_err());
    }

    proptest! {
        #[test]
        fn associate_is_scale_equivariant(
            prev in (-500.0f64..500.0, -500.0f64..500.0),
            cands in prop::collection::vec((-500.0f64..500.0, -500.0f64..500.0), 0..8),
            max_jump in 1.0f64..400.0,
            s in 0.1f64..10.0,
        ) {
            let list: Vec<_> = cands.iter().map(|&(c, r)| BallCandidate::new(0, c, r, 0.5)).collect();
            let scaled: Vec<_> = cands.iter().map(|&(c, r)| BallCandidate::new(0, c * s, r * s, 0.5)).collect();
            let pick = associate(Point::new(prev.0, prev.1), &list, &cfg(max_jump))
                .map(|c| list.iter().position(|x| std::ptr::eq(x, c)).unwrap());
            let pick_s = associate(Point::new(prev.0 * s, prev.1 * s), &scaled, &cfg(max_jump * s))
                .map(|c| scaled.iter().position(|x| std::ptr::eq(x, c)).unwrap());
            // Floating error can only matter right at the bound or on exact ties.
            let near_bound = cands.iter().any(|&(c, r)| {
                let d = Point::new(prev.0, prev.1).distance(&Point::new(c, r));
                (d - max_jump).abs() < 1e-9 * max_jump.max(1.0)
            });
            if !near_bound {
                prop_assert_eq!(pick, pick_s);
            }
        }

        #[test]
        fn bounce_is_time_reversal_symmetric(
            rows in prop::collection::hash_set(0i32..1000, 3..20),
            order in any::<u64>(),
        ) {
            let mut rows: Vec<f64> = rows.into_iter().map(f64::from).collect();
            rows.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = rows.len();
            rows.rotate_left((order as usize) % n);
            let fwd = find_bounce(&pts(&rows));
            let rev_rows: Vec<f64> = rows.iter().rev().copied().collect();
            let rev = find_bounce(&pts(&rev_rows));
            prop_assert_eq!(fwd.map(|i| n - 1 - i), rev);
        }
    }
}
