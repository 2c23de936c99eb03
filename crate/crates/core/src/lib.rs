//! Delivery-clip extraction and ball-length analysis for broadcast cricket video.
//!
//! Frames flow from a [`frame`] source through an annotation [`Backend`] into
//! the front-view [`gate`] and the shot [`segment`]er, which emits clips tagged
//! live or replay by [`replay`]. Per clip, the [`tracker`] follows the ball to
//! its bounce and [`geometry`] turns the bounce row into a length.

pub mod detection;
pub mod frame;
pub mod gate;
pub mod geometry;
pub mod metrics;
pub mod pipeline;
pub mod replay;
pub mod scenario;
pub mod segment;
pub mod tracker;

pub use detection::{
    load_precomputed, AnnotateError, BBox, Backend, BallSpace, ClassScore, Detection, FrameAnnotations, LoadError,
    ObjectLabel, PrecomputedBackend,
};
pub use frame::{crop, open_source, BandSpec, CropSpec, Frame, FrameError, FrameStream, SourceSpec};
pub use gate::{
    debounce, evaluate, Debouncer, DualMode, Evidence, GateConfig, GateError, GateEvent, GateVerdict, Strategy,
};
pub use geometry::{
    classify_clip_delivery, classify_delivery, distance_to_row, row_to_distance, ClassifyError, DeliveryEstimate,
    DeliveryRecord, DeliveryType, GeometryError, PitchSpec, RowCalibration, Stage,
};
pub use metrics::{
    confusion, reference_counts, throughput, ConfusionMatrix, MetricsError, MetricsReport, PerfStats, Rate,
    ReferenceCounts, Rounding,
};
pub use pipeline::{run_segmentation, PipelineError, RunOptions, SegmentRun};
pub use replay::{band_difference, classify_liveness, Liveness, ReplayConfig, ReplayError};
pub use scenario::{Scenario, ScenarioError, ScenarioScript, SceneKind, SyntheticBackend};
pub use segment::{
    BackgroundModel, BoundaryConfig, Clip, ClipEvidence, CloseReason, SegmentError, SegmentEvent, Segmenter,
    SegmenterConfig,
};
pub use tracker::{
    build_trajectory, find_bounce, BallCandidate, ClipTrajectory, Point, TrackError, TrackPoint, TrackerConfig,
    Trajectory,
};
