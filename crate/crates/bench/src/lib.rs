//! Pre-rendered inputs for the benchmarks, so that timed loops measure the
//! pipeline rather than the synthetic renderer.

use std::sync::Arc;

use cricshot_core::scenario::{self, Scenario, ScenarioError};
use cricshot_core::tracker::candidates_from;
use cricshot_core::{Backend, BallCandidate, Frame, FrameAnnotations, SyntheticBackend};

/// A scenario with every frame rendered up front.
pub struct Fixture {
    pub scenario: Arc<Scenario>,
    pub frames: Vec<Frame>,
}

impl Fixture {
    pub fn new(scenario: Scenario) -> Self {
        let frames = scenario.frames().map(|f| f.expect("scenario renders")).collect();
        Self {
            scenario: Arc::new(scenario),
            frames,
        }
    }

    pub fn bundled(name: &str) -> Result<Self, ScenarioError> {
        Ok(Self::new(scenario::bundled(name)?))
    }

    /// Random shot cuts with no deliveries, `shots` shots long.
    pub fn random_cuts(seed: u64, width: u32, height: u32, shots: usize) -> Result<Self, ScenarioError> {
        Ok(Self::new(Scenario::new(scenario::random_cut_script(
            seed, width, height, shots,
        ))?))
    }

    /// One front-view shot per delivery of the reference corpus, first `n` only.
    pub fn deliveries(seed: u64, n: usize) -> Result<Vec<Self>, ScenarioError> {
        scenario::delivery_corpus(seed)
            .into_iter()
            .take(n)
            .enumerate()
            .map(|(i, d)| Ok(Self::new(Scenario::new(scenario::delivery_script(d, seed + i as u64))?)))
            .collect()
    }

    pub fn backend(&self) -> SyntheticBackend {
        SyntheticBackend::new(self.scenario.clone())
    }

    pub fn annotations(&self) -> Vec<FrameAnnotations> {
        let backend = self.backend();
        self.frames
            .iter()
            .map(|f| backend.annotate(f).expect("synthetic backend never fails"))
            .collect()
    }

    /// Ball candidates per frame, as the tracker consumes them.
    pub fn candidates(&self) -> Vec<(u64, Vec<BallCandidate>)> {
        self.annotations()
            .iter()
            .map(|a| (a.frame_index, candidates_from(a)))
            .collect()
    }

    pub fn pixels(&self) -> u64 {
        self.frames.iter().map(|f| f.width() as u64 * f.height() as u64).sum()
    }
}
